#pragma once

// Named witness sequences. Every entry is an exact rule; parameterised
// entries take B(r,s,t,u) parameters.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dsum/matrix4d.hpp"
#include "dsum/seqcore.hpp"

namespace dsum {

inline DoubleSequence constant_sequence(Scalar c, std::string name = "constant") {
  return DoubleSequence([c](std::size_t, std::size_t) { return c; }, std::move(name));
}

inline DoubleSequence impulse(std::size_t k0 = 0, std::size_t l0 = 0) {
  return DoubleSequence([k0, l0](std::size_t k, std::size_t l) { return (k == k0 && l == l0) ? 1.0 : 0.0; },
                        "impulse");
}

namespace detail {

inline Scalar alt(std::size_t e) { return (e % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

struct CorpusEntry {
  std::string key;
  bool needs_params = false;
  std::string description;
};

inline const std::vector<CorpusEntry>& corpus_entries() {
  static const std::vector<CorpusEntry> entries = {
      {"e", false, "all-ones sequence"},
      {"zero", false, "zero sequence"},
      {"impulse", false, "unit impulse at (0,0)"},
      {"boos", false, "x_{0n} = n, x_{mn} = 0 for m >= 1 (Pringsheim null, unbounded)"},
      {"alt-col", false, "x_{kl} = (-1)^l (almost convergent, not strongly)"},
      {"checkerboard", false, "x_{kl} = 1 if k+l even, else 0"},
      {"alt-diag", false, "x_{kl} = (-1)^{k+l}"},
      {"k-over-rt", true, "x_{kl} = k/(rt)"},
      {"k-alt-over-rt", true, "x_{kl} = k(-1)^l/(rt)"},
      {"bx-alt-col", true, "the x with (Bx)_{kl} = (-1)^l"},
  };
  return entries;
}

/// The named witness sequence. Throws on unknown names or missing params.
inline DoubleSequence corpus(const std::string& name, const std::optional<BParams>& params = std::nullopt) {
  using detail::alt;
  auto need = [&]() -> const BParams& {
    if (!params) throw Error("corpus: entry '" + name + "' needs B parameters r,s,t,u");
    return *params;
  };
  if (name == "e") return constant_sequence(1.0, "e");
  if (name == "zero") return constant_sequence(0.0, "zero");
  if (name == "impulse") return impulse(0, 0);
  if (name == "boos")
    return DoubleSequence([](std::size_t m, std::size_t n) { return m == 0 ? static_cast<Scalar>(n) : 0.0; }, "boos");
  if (name == "alt-col") return DoubleSequence([](std::size_t, std::size_t l) { return alt(l); }, "alt-col");
  if (name == "checkerboard")
    return DoubleSequence([](std::size_t k, std::size_t l) { return (k + l) % 2 == 0 ? 1.0 : 0.0; }, "checkerboard");
  if (name == "alt-diag") return DoubleSequence([](std::size_t k, std::size_t l) { return alt(k + l); }, "alt-diag");
  if (name == "k-over-rt") {
    const Scalar rt = need().rt();
    return DoubleSequence([rt](std::size_t k, std::size_t) { return static_cast<Scalar>(k) / rt; }, "k-over-rt");
  }
  if (name == "k-alt-over-rt") {
    const Scalar rt = need().rt();
    return DoubleSequence([rt](std::size_t k, std::size_t l) { return static_cast<Scalar>(k) * alt(l) / rt; },
                          "k-alt-over-rt");
  }
  if (name == "bx-alt-col") {
    // x_{kl} = (1/rt) sum_{i<=k, j<=l} sigma^{k-i} tau^{l-j} (-1)^j, which
    // separates into a row factor and a column factor.
    const BParams& p = need();
    const Scalar sigma = p.sigma(), tau = p.tau(), rt = p.rt();
    return DoubleSequence(
        [=](std::size_t k, std::size_t l) {
          Scalar rowf = 0.0;
          for (std::size_t i = 0; i <= k; ++i) rowf = rowf * sigma + 1.0;
          Scalar colf = 0.0;
          for (std::size_t j = 0; j <= l; ++j) colf = colf * tau + alt(j);
          return rowf * colf / rt;
        },
        "bx-alt-col");
  }
  throw Error("corpus: unknown sequence '" + name + "'");
}

}  // namespace dsum
