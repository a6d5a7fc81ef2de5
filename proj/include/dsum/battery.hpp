#pragma once

// The witness battery: twelve numbered items, each a PASS/FAIL with a short
// detail line. Deterministic for a fixed seed and tolerance.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dsum/classcheck.hpp"
#include "dsum/convergence.hpp"
#include "dsum/corpus.hpp"
#include "dsum/matrix4d.hpp"

namespace dsum {

struct BatteryItem {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

struct BatteryOptions {
  ToleranceConfig tol{};
  std::uint64_t seed = 20240101;
};

namespace detail {

inline std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// Random magnitude in [lo, hi] with a random sign.
inline Scalar signed_uniform(std::mt19937_64& rng, Scalar lo, Scalar hi) {
  std::uniform_real_distribution<Scalar> mag(lo, hi);
  const Scalar v = mag(rng);
  return (rng() & 1U) ? v : -v;
}

/// Random B parameters with 0.05 <= |sigma|, |tau| <= 1.
inline BParams random_params(std::mt19937_64& rng) {
  const Scalar r = signed_uniform(rng, 0.5, 3.0), t = signed_uniform(rng, 0.5, 3.0);
  const Scalar sigma = signed_uniform(rng, 0.05, 1.0), tau = signed_uniform(rng, 0.05, 1.0);
  return {r, -sigma * r, t, -tau * t};
}

inline Grid random_grid(std::mt19937_64& rng, std::size_t rows, std::size_t cols, Scalar lo = -1.0, Scalar hi = 1.0) {
  std::uniform_real_distribution<Scalar> u(lo, hi);
  Grid g(rows, cols);
  for (std::size_t k = 0; k < rows; ++k)
    for (std::size_t l = 0; l < cols; ++l) g(k, l) = u(rng);
  return g;
}

/// Triangular kernel with random entries for m, n < side; zero beyond.
inline FourDimMatrix random_triangular_kernel(std::mt19937_64& rng, std::size_t side) {
  auto table = std::make_shared<std::vector<Scalar>>(side * side * side * side, 0.0);
  std::uniform_real_distribution<Scalar> u(-1.0, 1.0);
  for (std::size_t m = 0; m < side; ++m)
    for (std::size_t n = 0; n < side; ++n)
      for (std::size_t k = 0; k <= m; ++k)
        for (std::size_t l = 0; l <= n; ++l) (*table)[((m * side + n) * side + k) * side + l] = u(rng);
  return FourDimMatrix(
      [table, side](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
        if (m >= side || n >= side) return 0.0;
        return (*table)[((m * side + n) * side + k) * side + l];
      },
      true, "random");
}

/// The fixed parameters used for parameterised corpus entries.
inline BParams corpus_params() { return {2.0, -1.0, 3.0, -1.0}; }

inline std::vector<DoubleSequence> full_corpus() {
  std::vector<DoubleSequence> out;
  for (const auto& e : corpus_entries())
    out.push_back(e.needs_params ? corpus(e.key, corpus_params()) : corpus(e.key));
  return out;
}

// ---------------------------------------------------------------------------

inline BatteryItem battery_round_trip(const BatteryOptions& o) {
  std::mt19937_64 rng(o.seed);
  Scalar worst = 0.0;
  for (int pi = 0; pi < 10; ++pi) {
    const BParams p = random_params(rng);
    for (int si = 0; si < 100; ++si) {
      const Grid xg = random_grid(rng, 64, 64);
      const DoubleSequence x = grid_sequence(xg, "random");
      const Grid y = Grid::sample(b_transform(x, p), 64, 64);
      const Grid back = inverse_transform_grid(y, p);
      Scalar err = 0.0, sup = 0.0;
      for (std::size_t k = 0; k < 64; ++k)
        for (std::size_t l = 0; l < 64; ++l) {
          err = std::max(err, std::abs(back(k, l) - xg(k, l)));
          sup = std::max(sup, std::abs(xg(k, l)));
        }
      worst = std::max(worst, err / sup);
    }
  }
  return {1, "inverse_transform(b_transform(x)) = x on 64x64", worst <= 1e-9,
          fmt("max relative error %.3e over 10 params x 100 sequences", worst)};
}

inline BatteryItem battery_kernel_inverse(const BatteryOptions& o) {
  std::mt19937_64 rng(o.seed + 1);
  const std::vector<BParams> ps = {BParams(2.0, 1.0, 3.0, 1.0), BParams::delta(), random_params(rng)};
  const Truncation tr(31, 31);
  Scalar worst = 0.0;
  for (const auto& p : ps) {
    const FourDimMatrix F = f_kernel(p), B = b_kernel(p);
    const FourDimMatrix FB = compose(F, B, tr), BF = compose(B, F, tr);
    for (std::size_t m = 0; m <= tr.M; ++m)
      for (std::size_t n = 0; n <= tr.N; ++n)
        for (std::size_t k = 0; k <= tr.M; ++k)
          for (std::size_t l = 0; l <= tr.N; ++l) {
            const Scalar id = (m == k && n == l) ? 1.0 : 0.0;
            worst = std::max({worst, std::abs(FB(m, n, k, l) - id), std::abs(BF(m, n, k, l) - id)});
          }
  }
  return {2, "compose(F,B) = compose(B,F) = I on 32x32", worst <= 1e-12, fmt("max |error| %.3e over 3 params", worst)};
}

inline BatteryItem battery_k_over_rt(const BatteryOptions& o) {
  std::mt19937_64 rng(o.seed + 2);
  bool zero = true, member = true;
  Scalar worst_final = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Scalar r = signed_uniform(rng, 0.5, 3.0), t = signed_uniform(rng, 0.5, 3.0);
    const BParams p(r, -r, t, -t);
    const DoubleSequence x = corpus("k-over-rt", p);
    const DoubleSequence bx = b_transform(x, p);
    for (std::size_t m = 1; m <= 127 && zero; ++m)
      for (std::size_t n = 1; n <= 127; ++n)
        if (bx(m, n) != 0.0) {
          zero = false;
          break;
        }
    const Verdict v = membership(x, "BSCf0", p, TruncationSchedule::extended(), o.tol);
    member = member && v.converges();
    worst_final = std::max(worst_final, v.final_residual());
  }
  return {3, "k/(rt): Bx = 0 off the axes and x in B[C_f0]", zero && member,
          std::string(zero ? "Bx exactly 0 on [1,127]^2" : "Bx not identically 0") + "; BSCf0 " +
              (member ? "member" : "not member") + fmt(", worst final residual %.3e", worst_final)};
}

inline BatteryItem battery_checkerboard(const BatteryOptions& o) {
  const std::vector<std::pair<Scalar, Scalar>> rts = {{1, 1}, {2, 3}, {0.5, 4}, {3, 5}, {1.5, 2}};
  const TruncationSchedule sched;
  bool exact = true, nonmember = true;
  for (const auto& [r, t] : rts) {
    const BParams p(r, -r, t, -t);
    const DoubleSequence x = corpus("checkerboard");
    const Scalar want = 2.0 * std::abs(r * t);
    Grid g = Grid::sample(b_transform(x, p), sched.largest());
    for (std::size_t k = 0; k < g.rows(); ++k)
      for (std::size_t l = 0; l < g.cols(); ++l) g(k, l) = std::abs(g(k, l));
    const PrefixSum2D ps(g);
    for (std::size_t i = 0; i < sched.size(); ++i) {
      const MeanRange mr = stage_window_range(ps, sched[i], 1);
      if (mr.lo != want || mr.hi != want) exact = false;
    }
    nonmember = nonmember && membership(x, "BSCf0", p, sched, o.tol).diverges();
  }
  return {4, "checkerboard: strong means of |Bx| equal 2|rt|, x not in B[C_f0]", exact && nonmember,
          std::string(exact ? "window means exactly 2|rt|" : "window means differ from 2|rt|") + "; BSCf0 " +
              (nonmember ? "diverges" : "does not diverge") + " for 5 (r,t)"};
}

inline BatteryItem battery_alt_col(const BatteryOptions& o) {
  const TruncationSchedule sched = TruncationSchedule::extended();
  const DoubleSequence x = corpus("alt-col");
  const Verdict f = almost_limit(x, sched, o.tol);
  const Verdict sf = strong_almost_limit(x, sched, o.tol);
  bool bound_ok = true, away = true;
  for (const auto& t : f.residual_trace)
    if (t.residual > 1.0 / static_cast<Scalar>(stage_q(t.stage) + 1)) bound_ok = false;
  for (const auto& t : sf.residual_trace)
    if (t.residual < 1.0 - o.tol.decision_tol) away = false;
  const bool lim0 = f.candidate_limit && std::abs(*f.candidate_limit) <= o.tol.decision_tol;
  const bool pass = f.converges() && lim0 && bound_ok && sf.diverges() && away;
  return {5, "(-1)^l: in C_f, not in [C_f]", pass,
          std::string("f ") + to_string(f.decision) + fmt(" (final %.3e)", f.final_residual()) + ", [f] " +
              to_string(sf.decision) + fmt(" (final %.3g)", sf.final_residual())};
}

inline BatteryItem battery_boos(const BatteryOptions& o) {
  const DoubleSequence x = corpus("boos");
  const Verdict p = p_limit(x, {}, o.tol);
  const Verdict b = bounded(x, {}, o.tol);
  const bool lim0 = p.candidate_limit && std::abs(*p.candidate_limit) <= o.tol.decision_tol;
  return {6, "Boos sequence: in C_p, not in M_u", p.converges() && lim0 && b.diverges(),
          std::string("p ") + to_string(p.decision) + ", bounded " + to_string(b.decision) +
              fmt(" (sup %.17g)", b.bound.value_or(0.0))};
}

/// Verdicts for the chain C_bp => [C_f] => C_f => M_u.
struct ChainVerdicts {
  Verdict bp, strong, almost, bounded;
};

inline ChainVerdicts chain_verdicts(const DoubleSequence& x, const ToleranceConfig& tol) {
  const TruncationSchedule sched;
  return {bp_limit(x, sched, tol), strong_almost_limit(x, sched, tol), almost_limit(x, sched, tol),
          bounded(x, sched, tol)};
}

/// A violation: an antecedent converges while its consequent does not, or
/// both converge to limits further apart than decision_tol.
inline int chain_violations(const ChainVerdicts& c, const ToleranceConfig& tol) {
  int bad = 0;
  auto step = [&](const Verdict& a, const Verdict& b, bool limits) {
    if (!a.converges()) return;
    if (!b.converges()) {
      ++bad;
      return;
    }
    if (limits && a.candidate_limit && b.candidate_limit &&
        std::abs(*a.candidate_limit - *b.candidate_limit) > tol.decision_tol)
      ++bad;
  };
  step(c.bp, c.strong, true);
  step(c.strong, c.almost, true);
  step(c.almost, c.bounded, false);
  return bad;
}

/// 50 bounded sequences: periodic patterns, bounded noise, and constants
/// plus a geometrically vanishing perturbation.
inline std::vector<DoubleSequence> random_bounded_sequences(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DoubleSequence> out;
  std::uniform_real_distribution<Scalar> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    switch (i % 3) {
      case 0: {
        const std::size_t pk = 1 + rng() % 4, pl = 1 + rng() % 4;
        auto cell = std::make_shared<std::vector<Scalar>>();
        for (std::size_t j = 0; j < pk * pl; ++j) cell->push_back(u(rng));
        out.emplace_back([cell, pk, pl](std::size_t k, std::size_t l) { return (*cell)[(k % pk) * pl + l % pl]; },
                         "periodic");
        break;
      }
      case 1: {
        const std::uint64_t salt = rng();
        out.emplace_back(
            [salt](std::size_t k, std::size_t l) {
              std::uint64_t h = salt ^ (k * 0x9E3779B97F4A7C15ULL) ^ (l * 0xC2B2AE3D27D4EB4FULL);
              h ^= h >> 31;
              h *= 0xBF58476D1CE4E5B9ULL;
              h ^= h >> 29;
              return static_cast<Scalar>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
            },
            "noise");
        break;
      }
      default: {
        const Scalar c = u(rng), a = 0.5 * u(rng);
        const Scalar rho = 0.1 + 0.3 * (u(rng) + 1.0) / 2.0;
        out.emplace_back(
            [c, a, rho](std::size_t k, std::size_t l) { return c + a * std::pow(rho, static_cast<Scalar>(k + l)); },
            "decaying");
      }
    }
  }
  return out;
}

inline BatteryItem battery_inclusion_chain(const BatteryOptions& o) {
  int violations = 0, checked = 0;
  std::string first;
  auto run = [&](const DoubleSequence& x) {
    const int v = chain_violations(chain_verdicts(x, o.tol), o.tol);
    if (v > 0 && first.empty()) first = x.name();
    violations += v;
    ++checked;
  };
  for (const auto& x : full_corpus()) run(x);
  for (const auto& x : random_bounded_sequences(o.seed + 3)) run(x);
  return {7, "inclusion chain C_bp => [C_f] => C_f => M_u holds", violations == 0,
          std::to_string(violations) + " violations over " + std::to_string(checked) + " sequences" +
              (first.empty() ? "" : ", first on " + first)};
}

inline BatteryItem battery_e_identity(const BatteryOptions& o) {
  std::mt19937_64 rng(o.seed + 4);
  const Truncation tr(7, 7);
  Scalar worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const FourDimMatrix A = random_triangular_kernel(rng, 8);
    const BParams p = random_params(rng);
    const DoubleSequence x = grid_sequence(random_grid(rng, 8, 8), "random");
    const Grid ax = apply(A, x, ConvergenceMode::bp, tr).values;
    const Grid ebx = apply(e_kernel(A, p), b_transform(x, p), ConvergenceMode::bp, tr).values;
    for (std::size_t m = 0; m <= tr.M; ++m)
      for (std::size_t n = 0; n <= tr.N; ++n) worst = std::max(worst, std::abs(ax(m, n) - ebx(m, n)));
  }
  return {8, "A x = E(A) (Bx) for triangular A on 8x8", worst <= 1e-9, fmt("max |error| %.3e over 20 kernels", worst)};
}

/// Class reports behind item 9, in a fixed order.
inline std::vector<std::pair<ClassReport, Outcome>> class_suite_reports(const ToleranceConfig& tol) {
  const TruncationSchedule sched = class_schedule();
  const FourDimMatrix C = cesaro_kernel(), I = identity_kernel();
  return {
      {check_cbp_regular(C, sched, tol), Outcome::pass},
      {check_almost_regular(C, sched, tol), Outcome::pass},
      {check_strongly_regular(C, sched, tol), Outcome::pass},
      {check_strong_almost_to_almost(C, {diagonal_set()}, sched, tol), Outcome::pass},
      {check_cbp_regular(I, sched, tol), Outcome::pass},
      {check_almost_regular(I, sched, tol), Outcome::pass},
      {check_strongly_regular(I, sched, tol), Outcome::fail},
      {check_strong_almost_to_almost(I, {diagonal_set()}, sched, tol), Outcome::fail},
  };
}

inline BatteryItem battery_class_suites(const BatteryOptions& o) {
  int good = 0, total = 0;
  std::string misses;
  for (const auto& [rep, want] : class_suite_reports(o.tol)) {
    ++total;
    // "fails" is read as "does not pass".
    const bool ok = want == Outcome::pass ? rep.overall == Outcome::pass : rep.overall != Outcome::pass;
    if (ok) {
      ++good;
    } else {
      misses += (misses.empty() ? "" : ", ") + rep.class_id + "[" + rep.kernel + "]=" + to_string(rep.overall);
    }
  }
  return {9, "class suites on Cesaro and identity at stage 32", good == total,
          std::to_string(good) + "/" + std::to_string(total) + " as expected" +
              (misses.empty() ? "" : "; got " + misses)};
}

inline BatteryItem battery_cesaro_semantics(const BatteryOptions& o) {
  const TruncationSchedule sched = TruncationSchedule::from_sides({8, 16, 32, 64});
  const FourDimMatrix C = cesaro_kernel();
  const std::vector<std::pair<std::string, Scalar>> members = {{"e", 1.0}, {"zero", 0.0}, {"impulse", 0.0}};
  bool pass = true;
  std::string detail;
  for (const auto& [name, L] : members) {
    const Grid cx = apply(C, corpus(name), ConvergenceMode::bp, sched.largest()).values;
    const Verdict v = almost_limit_to(grid_sequence(cx, "C(" + name + ")"), L, sched, o.tol);
    if (!v.converges()) pass = false;
    detail += (detail.empty() ? "" : ", ") + name + " " + to_string(v.decision) + fmt(" (%.3e)", v.final_residual());
  }
  return {10, "almost_limit(C x) = L for Cesaro and members of [C_f]", pass, detail};
}

inline BatteryItem battery_duals(const BatteryOptions& o) {
  const BParams contractive(2.0, 1.0, 3.0, 1.0);
  const ClassReport beta = beta_dual_report(impulse(), contractive, class_schedule(), o.tol);
  const ConditionReport d1 = dual_membership(corpus("e"), "d1", BParams::delta(), class_schedule(), o.tol);
  const DoubleSequence geo([](std::size_t k, std::size_t l) { return std::ldexp(1.0, -static_cast<int>(k + l)); },
                           "2^-(k+l)");
  const ConditionReport alpha = dual_membership(geo, "alpha", contractive, class_schedule(), o.tol);
  Scalar l1 = 0.0;
  for (const auto& [k, v] : alpha.constants)
    if (k == "l1_sum") l1 = v;
  const bool pass = beta.overall == Outcome::pass && d1.verdict == Outcome::fail &&
                    alpha.verdict == Outcome::pass && std::abs(l1 - 4.0) <= 1e-6;
  return {11, "dual sets: impulse in beta, e not in d1, 2^-(k+l) in alpha", pass,
          std::string("beta ") + to_string(beta.overall) + ", d1(e) " + to_string(d1.verdict) + ", alpha " +
              to_string(alpha.verdict) + fmt(" (l1 %.12g)", l1)};
}

inline BatteryItem battery_norm_identity(const BatteryOptions&) {
  const BParams p = corpus_params();
  const Truncation tr = Truncation::square(24);
  bool same = true;
  for (const auto& x : full_corpus()) {
    const WindowSupResult a = norm_BCf(x, p, tr);
    const WindowSupResult b = norm_strong(b_transform(x, p), tr);
    if (std::bit_cast<std::uint64_t>(a.value) != std::bit_cast<std::uint64_t>(b.value) || !(a.argmax == b.argmax))
      same = false;
  }
  return {12, "norm_BCf(x) = norm_strong(Bx) bit for bit", same,
          std::string(same ? "identical" : "mismatch") + " on " + std::to_string(corpus_entries().size()) +
              " corpus entries"};
}

}  // namespace detail

using BatteryFn = BatteryItem (*)(const BatteryOptions&);

inline const std::vector<BatteryFn>& battery_items() {
  static const std::vector<BatteryFn> fns = {
      detail::battery_round_trip,       detail::battery_kernel_inverse, detail::battery_k_over_rt,
      detail::battery_checkerboard,     detail::battery_alt_col,        detail::battery_boos,
      detail::battery_inclusion_chain,  detail::battery_e_identity,     detail::battery_class_suites,
      detail::battery_cesaro_semantics, detail::battery_duals,          detail::battery_norm_identity};
  return fns;
}

/// Runs item i (0-based). An Error inside the item, such as a rejected
/// precondition under a very tight tolerance, becomes a FAIL.
inline BatteryItem run_battery_item(std::size_t i, const BatteryOptions& o) {
  try {
    return battery_items().at(i)(o);
  } catch (const Error& e) {
    return {static_cast<int>(i + 1), "battery item " + std::to_string(i + 1), false, std::string("error: ") + e.what()};
  }
}

inline std::vector<BatteryItem> run_battery(const BatteryOptions& o = {}) {
  o.tol.validate();
  std::vector<BatteryItem> out;
  for (std::size_t i = 0; i < battery_items().size(); ++i) out.push_back(run_battery_item(i, o));
  return out;
}

inline std::string battery_line(const BatteryItem& it) {
  char head[16];
  std::snprintf(head, sizeof head, "%2d ", it.id);
  return std::string(head) + (it.pass ? "PASS " : "FAIL ") + it.title + " -- " + it.detail;
}

}  // namespace dsum
