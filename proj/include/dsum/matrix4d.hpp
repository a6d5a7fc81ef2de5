#pragma once

/**
 * @file matrix4d.hpp
 * @brief Four-dimensional kernels a_{mnkl}, the generalized difference
 * operator B(r,s,t,u), its inverse F and the derived kernels D, E, G.
 *
 * Kernels are pure rules (m,n,k,l) -> value. Sums that run over a row
 * (m,n) use row-major order over (k,l) so results are reproducible.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsum/seqcore.hpp"

namespace dsum {

/// The nonzero reals r, s, t, u of B(r,s,t,u).
class BParams {
 public:
  BParams(Scalar r, Scalar s, Scalar t, Scalar u) : r_(r), s_(s), t_(t), u_(u) {
    if (r == 0.0 || s == 0.0 || t == 0.0 || u == 0.0)
      throw Error("BParams: r, s, t, u must all be nonzero");
    if (!std::isfinite(r) || !std::isfinite(s) || !std::isfinite(t) || !std::isfinite(u))
      throw Error("BParams: r, s, t, u must be finite");
  }

  [[nodiscard]] Scalar r() const noexcept { return r_; }
  [[nodiscard]] Scalar s() const noexcept { return s_; }
  [[nodiscard]] Scalar t() const noexcept { return t_; }
  [[nodiscard]] Scalar u() const noexcept { return u_; }
  [[nodiscard]] Scalar sigma() const noexcept { return -s_ / r_; }
  [[nodiscard]] Scalar tau() const noexcept { return -u_ / t_; }
  [[nodiscard]] Scalar rt() const noexcept { return r_ * t_; }

  /// |s/r| < 1 and |u/t| < 1.
  [[nodiscard]] bool contractive() const noexcept {
    return std::abs(sigma()) < 1.0 && std::abs(tau()) < 1.0;
  }

  /// Parameters of the plain difference operator Delta(1,-1,1,-1).
  static BParams delta() { return {1.0, -1.0, 1.0, -1.0}; }

  friend bool operator==(const BParams&, const BParams&) = default;

 private:
  Scalar r_, s_, t_, u_;
};

/// Lower bandwidths of a triangular kernel: a_{mnkl} = 0 unless
/// m - below_k <= k <= m and n - below_l <= l <= n.
struct Band {
  std::size_t below_k = 0;
  std::size_t below_l = 0;
};

class FourDimMatrix {
 public:
  using Rule = std::function<Scalar(std::size_t, std::size_t, std::size_t, std::size_t)>;

  FourDimMatrix() : rule_([](std::size_t, std::size_t, std::size_t, std::size_t) { return 0.0; }), triangular_(true), name_("zero") {}
  FourDimMatrix(Rule rule, bool triangular, std::string name, std::optional<Band> band = std::nullopt)
      : rule_(std::move(rule)), triangular_(triangular), band_(band), name_(std::move(name)) {}

  /// a_{mnkl}; triangular kernels return 0 above the diagonal without
  /// consulting the rule.
  Scalar operator()(std::size_t m, std::size_t n, std::size_t k, std::size_t l) const {
    if (triangular_ && (k > m || l > n)) return 0.0;
    if (triangular_ && band_ && (m - k > band_->below_k || n - l > band_->below_l)) return 0.0;
    return rule_(m, n, k, l);
  }

  [[nodiscard]] bool triangular() const noexcept { return triangular_; }
  [[nodiscard]] const std::optional<Band>& band() const noexcept { return band_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// Column range [lo, hi] that can be nonzero in row index m, given an
  /// inner bound used for non-triangular kernels.
  [[nodiscard]] std::pair<std::size_t, std::size_t> k_range(std::size_t m, std::size_t inner) const {
    if (!triangular_) return {0, inner};
    const std::size_t lo = band_ ? (m > band_->below_k ? m - band_->below_k : 0) : 0;
    return {lo, m};
  }
  [[nodiscard]] std::pair<std::size_t, std::size_t> l_range(std::size_t n, std::size_t inner) const {
    if (!triangular_) return {0, inner};
    const std::size_t lo = band_ ? (n > band_->below_l ? n - band_->below_l : 0) : 0;
    return {lo, n};
  }

  /// The row A_{mn} = (a_{mnkl})_{k,l} as a double sequence.
  [[nodiscard]] DoubleSequence row(std::size_t m, std::size_t n) const {
    auto self = *this;
    return DoubleSequence([self, m, n](std::size_t k, std::size_t l) { return self(m, n, k, l); },
                          name_ + "[" + std::to_string(m) + "," + std::to_string(n) + "]");
  }

 private:
  Rule rule_;
  bool triangular_ = false;
  std::optional<Band> band_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Built-in kernels

inline FourDimMatrix identity_kernel() {
  return FourDimMatrix([](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
                         return (m == k && n == l) ? 1.0 : 0.0;
                       },
                       true, "Identity", Band{0, 0});
}

inline FourDimMatrix zero_kernel() { return FourDimMatrix(); }

/// c_{mnkl} = 1/((m+1)(n+1)) for k <= m, l <= n.
inline FourDimMatrix cesaro_kernel() {
  return FourDimMatrix([](std::size_t m, std::size_t n, std::size_t, std::size_t) {
                         return 1.0 / (static_cast<Scalar>(m + 1) * static_cast<Scalar>(n + 1));
                       },
                       true, "Cesaro");
}

/// su at (m-1,n-1), st at (m-1,n), ru at (m,n-1), rt at (m,n).
inline FourDimMatrix b_kernel(const BParams& p) {
  const Scalar su = p.s() * p.u(), st = p.s() * p.t(), ru = p.r() * p.u(), rt = p.r() * p.t();
  return FourDimMatrix(
      [=](std::size_t m, std::size_t n, std::size_t k, std::size_t l) -> Scalar {
        if (k == m && l == n) return rt;
        if (k == m && l + 1 == n) return ru;
        if (k + 1 == m && l == n) return st;
        if (k + 1 == m && l + 1 == n) return su;
        return 0.0;
      },
      true, "B", Band{1, 1});
}

/// The four-dimensional difference matrix Delta(1,-1,1,-1).
inline FourDimMatrix delta_kernel() {
  auto b = b_kernel(BParams::delta());
  return FourDimMatrix([b](std::size_t m, std::size_t n, std::size_t k, std::size_t l) { return b(m, n, k, l); },
                       true, "Delta", Band{1, 1});
}

namespace detail {

// x^e by repeated multiplication so that e = 0 gives exactly 1 and
// negative bases keep their sign pattern.
inline Scalar ipow(Scalar x, std::size_t e) {
  Scalar r = 1.0;
  for (std::size_t i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace detail

/// f_{mnkl} = sigma^{m-k} tau^{n-l} / (rt) for k <= m, l <= n.
inline FourDimMatrix f_kernel(const BParams& p) {
  const Scalar sigma = p.sigma(), tau = p.tau(), rt = p.rt();
  return FourDimMatrix(
      [=](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
        return detail::ipow(sigma, m - k) * detail::ipow(tau, n - l) / rt;
      },
      true, "F");
}

// ---------------------------------------------------------------------------
// Transforms

/// y_{mn} = su x_{m-1,n-1} + st x_{m-1,n} + ru x_{m,n-1} + rt x_{mn};
/// terms with a negative index contribute nothing.
inline Scalar b_transform_at(const DoubleSequence& x, const BParams& p, std::size_t m, std::size_t n) {
  const Scalar su = p.s() * p.u(), st = p.s() * p.t(), ru = p.r() * p.u(), rt = p.r() * p.t();
  Scalar y = 0.0;
  if (m > 0 && n > 0) y += su * x(m - 1, n - 1);
  if (m > 0) y += st * x(m - 1, n);
  if (n > 0) y += ru * x(m, n - 1);
  y += rt * x(m, n);
  return y;
}

inline DoubleSequence b_transform(const DoubleSequence& x, const BParams& p) {
  return DoubleSequence([x, p](std::size_t m, std::size_t n) { return b_transform_at(x, p, m, n); },
                        "B(" + x.name() + ")");
}

/// x_{mn} = (1/rt) sum_{k<=m, l<=n} sigma^{m-k} tau^{n-l} y_{kl}.
///
/// Evaluated by nested (Horner) accumulation of the same terms.
inline Scalar inverse_transform_at(const DoubleSequence& y, const BParams& p, std::size_t m, std::size_t n) {
  const Scalar sigma = p.sigma(), tau = p.tau();
  Scalar outer = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    Scalar inner = 0.0;
    for (std::size_t l = 0; l <= n; ++l) inner = inner * tau + y(k, l);
    outer = outer * sigma + inner;
  }
  return outer / p.rt();
}

inline DoubleSequence inverse_transform(const DoubleSequence& y, const BParams& p) {
  return DoubleSequence([y, p](std::size_t m, std::size_t n) { return inverse_transform_at(y, p, m, n); },
                        "F(" + y.name() + ")");
}

/// Whole-grid inverse in O(MN) via the recurrence x = F y restricted to the
/// grid (row-then-column geometric accumulation).
inline Grid inverse_transform_grid(const Grid& y, const BParams& p) {
  const Scalar sigma = p.sigma(), tau = p.tau();
  Grid h(y.rows(), y.cols());
  for (std::size_t k = 0; k < y.rows(); ++k) {
    Scalar acc = 0.0;
    for (std::size_t l = 0; l < y.cols(); ++l) {
      acc = acc * tau + y(k, l);
      h(k, l) = acc;
    }
  }
  Grid x(y.rows(), y.cols());
  for (std::size_t l = 0; l < y.cols(); ++l) {
    Scalar acc = 0.0;
    for (std::size_t k = 0; k < y.rows(); ++k) {
      acc = acc * sigma + h(k, l);
      x(k, l) = acc / p.rt();
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// apply / compose

enum class ConvergenceMode { p, bp, r };

inline const char* to_string(ConvergenceMode m) {
  switch (m) {
    case ConvergenceMode::p: return "p";
    case ConvergenceMode::bp: return "bp";
    case ConvergenceMode::r: return "r";
  }
  return "?";
}

struct EntryDiagnostic {
  bool exact = true;        // triangular row: finite sum, no truncation
  bool stabilized = true;   // partial sums settled within the inner bound
  Scalar last_change = 0.0; // |S_full - S_half| (0 for exact rows)
};

struct ApplyResult {
  Grid values;
  std::vector<EntryDiagnostic> diagnostics;  // row-major, same shape as values
  Truncation truncation{};
  ConvergenceMode mode = ConvergenceMode::bp;

  [[nodiscard]] bool all_exist() const {
    return std::all_of(diagnostics.begin(), diagnostics.end(), [](const EntryDiagnostic& d) { return d.stabilized; });
  }
  [[nodiscard]] DoubleSequence as_sequence() const {
    auto g = values;
    return DoubleSequence([g](std::size_t m, std::size_t n) {
      if (m >= g.rows() || n >= g.cols()) throw Error("ApplyResult: index outside the evaluated grid");
      return g(m, n);
    }, "Ax");
  }
};

/// (Ax)_{mn} for a single row; exact for triangular kernels.
inline Scalar apply_row(const FourDimMatrix& A, const DoubleSequence& x, std::size_t m, std::size_t n,
                        std::size_t inner_k, std::size_t inner_l) {
  const auto [k0, k1] = A.k_range(m, inner_k);
  const auto [l0, l1] = A.l_range(n, inner_l);
  Scalar sum = 0.0;
  for (std::size_t k = k0; k <= k1; ++k)
    for (std::size_t l = l0; l <= l1; ++l) sum += A(m, n, k, l) * x(k, l);
  return sum;
}

/// Lazy A-transform for triangular kernels (every entry is a finite sum).
inline DoubleSequence apply_lazy(const FourDimMatrix& A, const DoubleSequence& x) {
  if (!A.triangular()) throw Error("apply_lazy: kernel " + A.name() + " is not triangular");
  return DoubleSequence([A, x](std::size_t m, std::size_t n) { return apply_row(A, x, m, n, m, n); },
                        A.name() + "(" + x.name() + ")");
}

/// A-transform on the grid tr. Non-triangular rows are summed over the inner
/// square [0,M] x [0,N]; existence is judged by comparing the partial sums at
/// the half and full inner bounds (and, for regular convergence, the two
/// mixed rectangles).
inline ApplyResult apply(const FourDimMatrix& A, const DoubleSequence& x, ConvergenceMode mode, Truncation tr,
                         Scalar stabilization_tol = 1e-9) {
  ApplyResult res{Grid(tr.M + 1, tr.N + 1), {}, tr, mode};
  res.diagnostics.resize((tr.M + 1) * (tr.N + 1));
  const std::size_t hk = tr.M / 2, hl = tr.N / 2;
  for (std::size_t m = 0; m <= tr.M; ++m)
    for (std::size_t n = 0; n <= tr.N; ++n) {
      auto& d = res.diagnostics[m * (tr.N + 1) + n];
      if (A.triangular()) {
        res.values(m, n) = apply_row(A, x, m, n, m, n);
        continue;
      }
      const Scalar full = apply_row(A, x, m, n, tr.M, tr.N);
      const Scalar half = apply_row(A, x, m, n, hk, hl);
      Scalar change = std::abs(full - half);
      if (mode == ConvergenceMode::r) {
        change = std::max(change, std::abs(full - apply_row(A, x, m, n, hk, tr.N)));
        change = std::max(change, std::abs(full - apply_row(A, x, m, n, tr.M, hl)));
      }
      res.values(m, n) = full;
      d.exact = false;
      d.last_change = change;
      d.stabilized = change <= stabilization_tol * std::max<Scalar>(1.0, std::abs(full));
    }
  return res;
}

/// (AB)_{mnkl} = sum_{i,j} A(m,n,i,j) B(i,j,k,l). Triangular pairs sum over
/// k <= i <= m, l <= j <= n (narrowed further by bands); other pairs sum over
/// the inner square [0,M] x [0,N] of tr.
inline FourDimMatrix compose(const FourDimMatrix& A, const FourDimMatrix& B, Truncation tr) {
  const bool tri = A.triangular() && B.triangular();
  std::optional<Band> band;
  if (tri && A.band() && B.band())
    band = Band{A.band()->below_k + B.band()->below_k, A.band()->below_l + B.band()->below_l};
  return FourDimMatrix(
      [A, B, tr, tri](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
        std::size_t i0 = 0, i1 = tr.M, j0 = 0, j1 = tr.N;
        if (tri) {
          i0 = k;
          i1 = m;
          j0 = l;
          j1 = n;
          if (A.band()) {
            i0 = std::max(i0, m > A.band()->below_k ? m - A.band()->below_k : 0);
            j0 = std::max(j0, n > A.band()->below_l ? n - A.band()->below_l : 0);
          }
          if (B.band()) {
            i1 = std::min(i1, k + B.band()->below_k);
            j1 = std::min(j1, l + B.band()->below_l);
          }
        }
        Scalar sum = 0.0;
        for (std::size_t i = i0; i <= i1; ++i)
          for (std::size_t j = j0; j <= j1; ++j) sum += A(m, n, i, j) * B(i, j, k, l);
        return sum;
      },
      tri, "(" + A.name() + "*" + B.name() + ")", band);
}

// ---------------------------------------------------------------------------
// Derived kernels D, E, G

namespace detail {

// Memoised row tables T_{mn}(k,l) for 0 <= k <= m, 0 <= l <= n.
class RowTableCache {
 public:
  using Builder = std::function<std::vector<Scalar>(std::size_t, std::size_t)>;
  explicit RowTableCache(Builder b) : build_(std::move(b)) {}

  Scalar get(std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = rows_.find({m, n});
    if (it == rows_.end()) it = rows_.emplace(std::make_pair(m, n), build_(m, n)).first;
    return it->second[k * (n + 1) + l];
  }

 private:
  Builder build_;
  std::mutex mu_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Scalar>> rows_;
};

// T(k,l) = sum_{j=k..m} sum_{i=l..n} sigma^{j-k} tau^{i-l} c(j,i), built by
// backward accumulation: first along i, then along j.
inline std::vector<Scalar> geometric_tail_table(const std::function<Scalar(std::size_t, std::size_t)>& c,
                                                Scalar sigma, Scalar tau, std::size_t m, std::size_t n) {
  const std::size_t W = n + 1;
  std::vector<Scalar> h((m + 1) * W);
  for (std::size_t j = 0; j <= m; ++j) {
    Scalar acc = 0.0;
    for (std::size_t i = n + 1; i-- > 0;) {
      acc = acc * tau + c(j, i);
      h[j * W + i] = acc;
    }
  }
  std::vector<Scalar> t((m + 1) * W);
  for (std::size_t i = 0; i <= n; ++i) {
    Scalar acc = 0.0;
    for (std::size_t j = m + 1; j-- > 0;) {
      acc = acc * sigma + h[j * W + i];
      t[j * W + i] = acc;
    }
  }
  return t;
}

}  // namespace detail

/// d_{mnkl} = sum_{j=k..m} sum_{i=l..n} sigma^{j-k} tau^{i-l} a_{ji} / (rt)
/// for k <= m, l <= n.
inline FourDimMatrix d_kernel(const DoubleSequence& a, const BParams& p) {
  const Scalar sigma = p.sigma(), tau = p.tau(), rt = p.rt();
  auto cache = std::make_shared<detail::RowTableCache>([a, sigma, tau](std::size_t m, std::size_t n) {
    return detail::geometric_tail_table([&a](std::size_t j, std::size_t i) { return a(j, i); }, sigma, tau, m, n);
  });
  return FourDimMatrix(
      [cache, rt](std::size_t m, std::size_t n, std::size_t k, std::size_t l) { return cache->get(m, n, k, l) / rt; },
      true, "D(" + a.name() + ")");
}

/// e_{mnkl} = sum_{i=k..m} sum_{j=l..n} sigma^{i-k} tau^{j-l} a_{mnij} / (rt)
/// for k <= m, l <= n. Satisfies sum_{k,l<=m,n} a_{mnkl} x_{kl} = (E Bx)_{mn}.
inline FourDimMatrix e_kernel(const FourDimMatrix& A, const BParams& p) {
  const Scalar sigma = p.sigma(), tau = p.tau(), rt = p.rt();
  auto cache = std::make_shared<detail::RowTableCache>([A, sigma, tau](std::size_t m, std::size_t n) {
    return detail::geometric_tail_table([&A, m, n](std::size_t i, std::size_t j) { return A(m, n, i, j); }, sigma,
                                        tau, m, n);
  });
  return FourDimMatrix(
      [cache, rt](std::size_t m, std::size_t n, std::size_t k, std::size_t l) { return cache->get(m, n, k, l) / rt; },
      true, "E(" + A.name() + ")");
}

/// g_{mnkl} = sum_{i,j} b_{mnij} a_{ijkl}
///          = su a_{m-1,n-1,k,l} + st a_{m-1,n,k,l} + ru a_{m,n-1,k,l} + rt a_{mnkl}.
inline FourDimMatrix g_kernel(const FourDimMatrix& A, const BParams& p) {
  const Scalar su = p.s() * p.u(), st = p.s() * p.t(), ru = p.r() * p.u(), rt = p.r() * p.t();
  std::optional<Band> band;
  if (A.triangular() && A.band()) band = Band{A.band()->below_k + 1, A.band()->below_l + 1};
  return FourDimMatrix(
      [A, su, st, ru, rt](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
        Scalar g = 0.0;
        if (m > 0 && n > 0) g += su * A(m - 1, n - 1, k, l);
        if (m > 0) g += st * A(m - 1, n, k, l);
        if (n > 0) g += ru * A(m, n - 1, k, l);
        g += rt * A(m, n, k, l);
        return g;
      },
      A.triangular(), "G(" + A.name() + ")", band);
}

}  // namespace dsum
