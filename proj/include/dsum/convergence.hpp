#pragma once

/**
 * @file convergence.hpp
 * @brief Schedule-based estimators for the notions p, bp, r, bounded,
 * almost (C_f), strongly almost ([C_f]) and almost Cauchy.
 *
 * Every estimator samples x once on the largest stage and then reports one
 * residual per stage. Candidate limits always come from the largest stage.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dsum/matrix4d.hpp"
#include "dsum/seqcore.hpp"
#include "dsum/verdict.hpp"

namespace dsum {

/// base_min = 1 restricts window corners to m, n >= 1.
struct ScanOptions {
  std::size_t base_min = 0;
};

namespace detail {

inline std::size_t stage_q(Truncation tr) { return std::min(tr.M, tr.N) / 2; }

// Diagonal windows q = qp with q in [stage_q, min(M,N) - base_min] and every
// corner (m, n) with base_min <= m, m+q <= M (likewise n). Calls f(window).
template <class F>
void for_each_stage_window(Truncation tr, std::size_t base_min, F&& f) {
  const std::size_t side = std::min(tr.M, tr.N);
  if (side < base_min) return;
  for (std::size_t q = stage_q(tr); q + base_min <= side; ++q)
    for (std::size_t m = base_min; m + q <= tr.M; ++m)
      for (std::size_t n = base_min; n + q <= tr.N; ++n) f(Window{m, n, q, q});
}

inline Scalar stage_window_residual(const PrefixSum2D& ps, Truncation tr, Scalar L, std::size_t base_min) {
  Scalar r = 0.0;
  for_each_stage_window(tr, base_min, [&](const Window& w) { r = std::max(r, std::abs(ps.window_mean(w) - L)); });
  return r;
}

struct MeanRange {
  Scalar lo = 0.0;
  Scalar hi = 0.0;
};

inline MeanRange stage_window_range(const PrefixSum2D& ps, Truncation tr, std::size_t base_min) {
  bool first = true;
  MeanRange r;
  for_each_stage_window(tr, base_min, [&](const Window& w) {
    const Scalar v = ps.window_mean(w);
    if (first) {
      r = {v, v};
      first = false;
    } else {
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  });
  return r;
}

/// The window of side stage_q(tr)+1 centred in the truncation.
inline Window centred_window(Truncation tr) {
  const std::size_t q = stage_q(tr);
  return {(tr.M - q) / 2, (tr.N - q) / 2, q, q};
}

inline Grid abs_deviation(const Grid& g, Scalar L) {
  Grid out(g.rows(), g.cols());
  for (std::size_t k = 0; k < g.rows(); ++k)
    for (std::size_t l = 0; l < g.cols(); ++l) out(k, l) = std::abs(g(k, l) - L);
  return out;
}

inline Scalar tail_block_mean(const Grid& g, Truncation tr) {
  Scalar sum = 0.0;
  for (std::size_t k = tr.M / 2; k <= tr.M; ++k)
    for (std::size_t l = tr.N / 2; l <= tr.N; ++l) sum += g(k, l);
  return sum / static_cast<Scalar>((tr.M - tr.M / 2 + 1) * (tr.N - tr.N / 2 + 1));
}

inline Scalar tail_block_residual(const Grid& g, Truncation tr, Scalar L) {
  Scalar r = 0.0;
  for (std::size_t k = tr.M / 2; k <= tr.M; ++k)
    for (std::size_t l = tr.N / 2; l <= tr.N; ++l) r = std::max(r, std::abs(g(k, l) - L));
  return r;
}

inline std::vector<Scalar> elementwise_max(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  std::vector<Scalar> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

inline std::vector<Scalar> residuals_of(const Verdict& v) {
  std::vector<Scalar> r;
  for (const auto& t : v.residual_trace) r.push_back(t.residual);
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pringsheim, boundedness, bp and regular convergence

/// Residual at (M,N): max over the tail block [M/2,M] x [N/2,N] of |x - L|.
inline Verdict p_limit_to(const DoubleSequence& x, Scalar L, const TruncationSchedule& sched = {},
                          const ToleranceConfig& tol = {}) {
  const Grid g = Grid::sample(x, sched.largest());
  std::vector<Scalar> r;
  for (const auto& tr : sched.sizes()) r.push_back(detail::tail_block_residual(g, tr, L));
  return make_verdict(sched, r, tol, "p", L);
}

/// Pringsheim limit with L estimated as the largest-stage tail-block mean.
inline Verdict p_limit(const DoubleSequence& x, const TruncationSchedule& sched = {},
                       const ToleranceConfig& tol = {}) {
  const Grid g = Grid::sample(x, sched.largest());
  const Scalar L = detail::tail_block_mean(g, sched.largest());
  std::vector<Scalar> r;
  for (const auto& tr : sched.sizes()) r.push_back(detail::tail_block_residual(g, tr, L));
  return make_verdict(sched, r, tol, "p", L);
}

/// Verdict on whether a non-decreasing stage statistic (a running sup or a
/// partial sum of non-negative terms) stays bounded. Residual per stage is
/// the relative growth over the previous stage; diverges means the absolute
/// growth never slows down.
inline Verdict growth_verdict(const std::vector<Scalar>& values, const TruncationSchedule& sched,
                              const ToleranceConfig& tol, std::string mode) {
  std::vector<Scalar> r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == 0)
      r.push_back(values[0] > 0.0 ? 1.0 : 0.0);
    else
      r.push_back(values[i] > 0.0 ? (values[i] - values[i - 1]) / values[i] : 0.0);
  }
  Verdict v;
  v.mode = std::move(mode);
  v.bound = values.back();
  for (std::size_t i = 0; i < r.size(); ++i) v.residual_trace.push_back({sched[i], r[i]});
  if (trace_settles(r, tol)) {
    v.decision = Decision::converges;
  } else {
    bool growing = r.back() >= tol.decision_tol && values.size() >= 3;
    for (std::size_t i = 2; growing && i < values.size(); ++i)
      growing = (values[i] - values[i - 1]) >= (values[i - 1] - values[i - 2]);
    v.decision = growing ? Decision::diverges : Decision::inconclusive;
  }
  return v;
}

/// Boundedness via the growth of sup|x| across stages. Converges means
/// bounded, with the bound reported.
inline Verdict bounded(const DoubleSequence& x, const TruncationSchedule& sched = {},
                       const ToleranceConfig& tol = {}) {
  const Grid g = Grid::sample(x, sched.largest());
  std::vector<Scalar> sups;
  for (const auto& tr : sched.sizes()) {
    Scalar s = 0.0;
    for (std::size_t k = 0; k <= tr.M; ++k)
      for (std::size_t l = 0; l <= tr.N; ++l) s = std::max(s, std::abs(g(k, l)));
    sups.push_back(s);
  }
  return growth_verdict(sups, sched, tol, "bounded");
}

/// C_bp = C_p and M_u.
inline Verdict bp_limit(const DoubleSequence& x, const TruncationSchedule& sched = {},
                        const ToleranceConfig& tol = {}) {
  const Verdict p = p_limit(x, sched, tol);
  const Verdict b = bounded(x, sched, tol);
  Verdict v = make_verdict(sched, detail::elementwise_max(detail::residuals_of(p), detail::residuals_of(b)), tol,
                           "bp", p.candidate_limit);
  v.decision = conjunction({p.decision, b.decision});
  v.bound = b.bound;
  return v;
}

namespace detail {

// Single-sequence limit residuals of every row k <= K (along l) or every
// column l <= K (along k); the per-line limit is the largest-stage tail mean.
inline std::vector<Scalar> line_residuals(const Grid& g, const TruncationSchedule& sched, std::size_t K, bool rows) {
  const Truncation big = sched.largest();
  const std::size_t lines = std::min(K, rows ? big.M : big.N);
  std::vector<Scalar> limits(lines + 1, 0.0);
  for (std::size_t a = 0; a <= lines; ++a) {
    const std::size_t last = rows ? big.N : big.M;
    Scalar sum = 0.0;
    for (std::size_t b = last / 2; b <= last; ++b) sum += rows ? g(a, b) : g(b, a);
    limits[a] = sum / static_cast<Scalar>(last - last / 2 + 1);
  }
  std::vector<Scalar> out;
  for (const auto& tr : sched.sizes()) {
    const std::size_t last = rows ? tr.N : tr.M;
    Scalar r = 0.0;
    for (std::size_t a = 0; a <= lines; ++a)
      for (std::size_t b = last / 2; b <= last; ++b)
        r = std::max(r, std::abs((rows ? g(a, b) : g(b, a)) - limits[a]));
    out.push_back(r);
  }
  return out;
}

}  // namespace detail

/// Regular convergence: bp plus convergence of the rows and columns with
/// index up to the first stage's extent.
inline Verdict r_limit(const DoubleSequence& x, const TruncationSchedule& sched = {},
                       const ToleranceConfig& tol = {}) {
  const Verdict bp = bp_limit(x, sched, tol);
  const Grid g = Grid::sample(x, sched.largest());
  const auto rows = detail::line_residuals(g, sched, sched.smallest().M, true);
  const auto cols = detail::line_residuals(g, sched, sched.smallest().N, false);
  auto r = detail::elementwise_max(detail::residuals_of(bp), detail::elementwise_max(rows, cols));
  Verdict v = make_verdict(sched, r, tol, "r", bp.candidate_limit);
  v.decision = conjunction({bp.decision, decide(rows, tol), decide(cols, tol)});
  v.bound = bp.bound;
  return v;
}

// ---------------------------------------------------------------------------
// Almost convergence

/// Candidate f-limit: mean over the centred window of the largest stage.
inline Scalar almost_candidate(const DoubleSequence& x, const TruncationSchedule& sched = {}) {
  return window_mean(x, detail::centred_window(sched.largest()));
}

namespace detail {

inline Verdict almost_impl(const DoubleSequence& x, std::optional<Scalar> target, bool strong,
                           const TruncationSchedule& sched, const ToleranceConfig& tol, const ScanOptions& opt) {
  const Grid g = Grid::sample(x, sched.largest());
  const Scalar L = target ? *target : PrefixSum2D(g).window_mean(centred_window(sched.largest()));
  std::vector<Scalar> r;
  if (strong) {
    const PrefixSum2D ps(abs_deviation(g, L));
    for (const auto& tr : sched.sizes()) r.push_back(stage_window_residual(ps, tr, 0.0, opt.base_min));
  } else {
    const PrefixSum2D ps(g);
    for (const auto& tr : sched.sizes()) r.push_back(stage_window_residual(ps, tr, L, opt.base_min));
  }
  std::string mode = strong ? "[f]" : "f";
  if (target && *target == 0.0) mode = strong ? "[f0]" : "f0";
  return make_verdict(sched, r, tol, mode, L);
}

}  // namespace detail

/// C_f: residual is the sup over diagonal windows of side >= q_S + 1 and all
/// base points of |window mean - L|.
inline Verdict almost_limit(const DoubleSequence& x, const TruncationSchedule& sched = {},
                            const ToleranceConfig& tol = {}, const ScanOptions& opt = {}) {
  return detail::almost_impl(x, std::nullopt, false, sched, tol, opt);
}

inline Verdict almost_limit_to(const DoubleSequence& x, Scalar L, const TruncationSchedule& sched = {},
                               const ToleranceConfig& tol = {}, const ScanOptions& opt = {}) {
  return detail::almost_impl(x, L, false, sched, tol, opt);
}

/// [C_f]: as almost_limit with the mean of |x - L|, L the f-candidate.
inline Verdict strong_almost_limit(const DoubleSequence& x, const TruncationSchedule& sched = {},
                                   const ToleranceConfig& tol = {}, const ScanOptions& opt = {}) {
  return detail::almost_impl(x, std::nullopt, true, sched, tol, opt);
}

inline Verdict strong_almost_limit_to(const DoubleSequence& x, Scalar L, const TruncationSchedule& sched = {},
                                      const ToleranceConfig& tol = {}, const ScanOptions& opt = {}) {
  return detail::almost_impl(x, L, true, sched, tol, opt);
}

/// Almost Cauchy: half the spread of window means over the stage windows.
inline Verdict almost_cauchy(const DoubleSequence& x, const TruncationSchedule& sched = {},
                             const ToleranceConfig& tol = {}, const ScanOptions& opt = {}) {
  const Grid g = Grid::sample(x, sched.largest());
  const PrefixSum2D ps(g);
  std::vector<Scalar> r;
  detail::MeanRange last;
  for (const auto& tr : sched.sizes()) {
    last = detail::stage_window_range(ps, tr, opt.base_min);
    r.push_back(0.5 * (last.hi - last.lo));
  }
  return make_verdict(sched, r, tol, "f-cauchy", 0.5 * (last.hi + last.lo));
}

// ---------------------------------------------------------------------------
// Space membership

/// ||x||_{B[C_f]} = ||Bx||_{[C_f]}.
inline WindowSupResult norm_BCf(const DoubleSequence& x, const BParams& p, Truncation tr) {
  return norm_strong(b_transform(x, p), tr);
}

inline const std::vector<std::string>& space_tags() {
  static const std::vector<std::string> tags = {"Mu",  "Cp",   "Cbp",  "Cr",    "Cf",  "Cf0",
                                                "SCf", "SCf0", "BCf", "BCf0", "BSCf", "BSCf0"};
  return tags;
}

/// Membership of x in a named space. B-prefixed spaces test Bx.
inline Verdict membership(const DoubleSequence& x, const std::string& space, const std::optional<BParams>& p,
                          const TruncationSchedule& sched = {}, const ToleranceConfig& tol = {},
                          const ScanOptions& opt = {}) {
  const auto& tags = space_tags();
  if (std::find(tags.begin(), tags.end(), space) == tags.end())
    throw Error("membership: unknown space '" + space + "'");
  std::string base = space;
  DoubleSequence y = x;
  if (space.front() == 'B') {
    if (!p) throw Error("membership: space " + space + " needs B parameters");
    y = b_transform(x, *p);
    base = space.substr(1);
  }
  Verdict v;
  if (base == "Mu") v = bounded(y, sched, tol);
  else if (base == "Cp") v = p_limit(y, sched, tol);
  else if (base == "Cbp") v = bp_limit(y, sched, tol);
  else if (base == "Cr") v = r_limit(y, sched, tol);
  else if (base == "Cf") v = almost_limit(y, sched, tol, opt);
  else if (base == "Cf0") v = almost_limit_to(y, 0.0, sched, tol, opt);
  else if (base == "SCf") v = strong_almost_limit(y, sched, tol, opt);
  else if (base == "SCf0") v = strong_almost_limit_to(y, 0.0, sched, tol, opt);
  v.mode = space;
  return v;
}

}  // namespace dsum
