#pragma once

/**
 * @file classcheck.hpp
 * @brief Condition suites for four-dimensional matrix classes and the dual
 * sets d1..d7, plus index sets of uniformly zero density.
 *
 * Every condition is turned into a residual trace over a truncation schedule
 * and judged with the Verdict rules: converges -> pass, diverges -> fail,
 * anything else -> inconclusive.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsum/convergence.hpp"
#include "dsum/matrix4d.hpp"
#include "dsum/seqcore.hpp"
#include "dsum/verdict.hpp"

namespace dsum {

// ---------------------------------------------------------------------------
// Index sets and zero density

class IndexSet {
 public:
  using Predicate = std::function<bool(std::size_t, std::size_t)>;
  IndexSet(Predicate contains, std::string name) : contains_(std::move(contains)), name_(std::move(name)) {}

  bool operator()(std::size_t k, std::size_t l) const { return contains_(k, l); }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  Predicate contains_;
  std::string name_;
};

inline IndexSet diagonal_set() {
  return IndexSet([](std::size_t k, std::size_t l) { return k == l; }, "diagonal");
}
inline IndexSet full_set() {
  return IndexSet([](std::size_t, std::size_t) { return true; }, "full");
}
inline IndexSet first_column_set() {
  return IndexSet([](std::size_t, std::size_t l) { return l == 0; }, "first-column");
}

/// |{(j,k) in E : m <= j <= m+p-1, n <= k <= n+q-1}| by enumeration.
inline std::size_t count_in_rectangle(const IndexSet& E, std::size_t m, std::size_t n, std::size_t p, std::size_t q) {
  std::size_t c = 0;
  for (std::size_t j = m; j < m + p; ++j)
    for (std::size_t k = n; k < n + q; ++k) c += E(j, k) ? 1 : 0;
  return c;
}

enum class Outcome { pass, fail, inconclusive };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Outcome outcome_of(Decision d) {
  switch (d) {
    case Decision::converges: return Outcome::pass;
    case Decision::diverges: return Outcome::fail;
    default: return Outcome::inconclusive;
  }
}

struct ConditionReport {
  std::string condition_id;
  std::vector<TracePoint> trend;
  Outcome verdict = Outcome::inconclusive;
  std::vector<std::pair<std::string, Scalar>> constants;
  std::string note;
};

struct ClassReport {
  std::string class_id;
  std::string kernel;
  std::vector<ConditionReport> conditions;
  Outcome overall = Outcome::inconclusive;

  [[nodiscard]] const ConditionReport* find(const std::string& id) const {
    for (const auto& c : conditions)
      if (c.condition_id == id) return &c;
    return nullptr;
  }
};

/// fail if any condition fails, else inconclusive if any is, else pass.
inline Outcome overall_of(const std::vector<ConditionReport>& cs) {
  bool all = true;
  for (const auto& c : cs) {
    if (c.verdict == Outcome::fail) return Outcome::fail;
    if (c.verdict != Outcome::pass) all = false;
  }
  return all ? Outcome::pass : Outcome::inconclusive;
}

inline ClassReport make_class_report(std::string id, std::string kernel, std::vector<ConditionReport> cs) {
  ClassReport r{std::move(id), std::move(kernel), std::move(cs), Outcome::inconclusive};
  r.overall = overall_of(r.conditions);
  return r;
}

namespace detail {

inline ConditionReport condition_from(std::string id, const TruncationSchedule& sched, const std::vector<Scalar>& r,
                                      Decision d) {
  ConditionReport c;
  c.condition_id = std::move(id);
  for (std::size_t i = 0; i < r.size(); ++i) c.trend.push_back({sched[i], r[i]});
  c.verdict = outcome_of(d);
  return c;
}

inline ConditionReport condition_from(std::string id, const Verdict& v) {
  ConditionReport c;
  c.condition_id = std::move(id);
  c.trend = v.residual_trace;
  c.verdict = outcome_of(v.decision);
  return c;
}

}  // namespace detail

inline std::vector<std::size_t> default_density_sides() { return {16, 64, 256, 1024}; }

/// Uniform density of E on p x p squares: max over corners (m,n) in
/// [0, base_extent]^2 of count/p^2, one value per side; the trend must decay
/// to 0.
inline ConditionReport zero_density_check(const IndexSet& E, const std::vector<std::size_t>& sides = default_density_sides(),
                                          const ToleranceConfig& tol = {}, std::size_t base_extent = 32) {
  if (sides.size() < 3) throw Error("zero_density_check: at least 3 sides are required");
  for (std::size_t i = 1; i < sides.size(); ++i)
    if (sides[i] <= sides[i - 1]) throw Error("zero_density_check: sides must increase");
  const std::size_t ext = base_extent + sides.back();
  Grid ind(ext, ext);
  for (std::size_t k = 0; k < ext; ++k)
    for (std::size_t l = 0; l < ext; ++l) ind(k, l) = E(k, l) ? 1.0 : 0.0;
  const PrefixSum2D ps(ind);
  std::vector<Scalar> r;
  std::vector<Truncation> stages;
  for (auto p : sides) {
    Scalar best = 0.0;
    for (std::size_t m = 0; m <= base_extent; ++m)
      for (std::size_t n = 0; n <= base_extent; ++n)
        best = std::max(best, ps.window_sum({m, n, p - 1, p - 1}) / static_cast<Scalar>(p * p));
    r.push_back(best);
    stages.push_back(Truncation::square(p));
  }
  const TruncationSchedule sched(stages);
  auto c = detail::condition_from("zero-density(" + E.name() + ")", sched, r, decide(r, tol));
  return c;
}

// ---------------------------------------------------------------------------
// Finite differences and window means of kernel columns

inline Scalar delta10(const FourDimMatrix& A, std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
  return A(m, n, k, l) - A(m, n, k + 1, l);
}
inline Scalar delta01(const FourDimMatrix& A, std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
  return A(m, n, k, l) - A(m, n, k, l + 1);
}
inline Scalar delta11(const FourDimMatrix& A, std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
  return A(m, n, k, l) - A(m, n, k + 1, l) - A(m, n, k, l + 1) + A(m, n, k + 1, l + 1);
}

/// a(i,j,q,q',m,n): mean of a_{klij} over the row indices k in [m,m+q],
/// l in [n,n+q'].
inline Scalar matrix_window_mean(const FourDimMatrix& A, std::size_t i, std::size_t j, const Window& w) {
  Scalar sum = 0.0;
  for (std::size_t k = w.m; k <= w.m + w.q; ++k)
    for (std::size_t l = w.n; l <= w.n + w.qp; ++l) sum += A(k, l, i, j);
  return sum / static_cast<Scalar>(w.cardinality());
}

/// Default schedule for class checks.
inline TruncationSchedule class_schedule() { return TruncationSchedule::from_sides({8, 16, 32}); }

namespace detail {

inline DoubleSequence grid_sequence(Grid g, std::string name) {
  auto sp = std::make_shared<const Grid>(std::move(g));
  return DoubleSequence([sp](std::size_t k, std::size_t l) { return (*sp)(k, l); }, std::move(name));
}

// Column range summed in row (m, n): the triangle for triangular kernels,
// the inner square [0, inner] otherwise.
inline std::size_t k_hi(const FourDimMatrix& A, std::size_t m, std::size_t inner) { return A.triangular() ? m : inner; }

inline Grid row_abs_sums(const FourDimMatrix& A, Truncation tr) {
  Grid g(tr.M + 1, tr.N + 1);
  for (std::size_t m = 0; m <= tr.M; ++m)
    for (std::size_t n = 0; n <= tr.N; ++n) {
      const auto [k0, k1] = A.k_range(m, tr.M);
      const auto [l0, l1] = A.l_range(n, tr.N);
      Scalar s = 0.0;
      for (std::size_t k = k0; k <= k1; ++k)
        for (std::size_t l = l0; l <= l1; ++l) s += std::abs(A(m, n, k, l));
      g(m, n) = s;
    }
  return g;
}

inline Grid row_sums(const FourDimMatrix& A, Truncation tr) {
  Grid g(tr.M + 1, tr.N + 1);
  for (std::size_t m = 0; m <= tr.M; ++m)
    for (std::size_t n = 0; n <= tr.N; ++n) {
      const auto [k0, k1] = A.k_range(m, tr.M);
      const auto [l0, l1] = A.l_range(n, tr.N);
      Scalar s = 0.0;
      for (std::size_t k = k0; k <= k1; ++k)
        for (std::size_t l = l0; l <= l1; ++l) s += A(m, n, k, l);
      g(m, n) = s;
    }
  return g;
}

// bp-limit of a sampled statistic: Pringsheim residual plus boundedness.
inline Verdict bp_of(const DoubleSequence& s, std::optional<Scalar> target, const TruncationSchedule& sched,
                     const ToleranceConfig& tol) {
  Verdict p = target ? p_limit_to(s, *target, sched, tol) : p_limit(s, sched, tol);
  const Verdict b = bounded(s, sched, tol);
  p.decision = conjunction({p.decision, b.decision});
  p.bound = b.bound;
  p.mode = "bp";
  return p;
}

// Merge per-probe verdicts into one condition: residuals by max, decisions
// by conjunction.
struct ProbeMerge {
  std::vector<Scalar> r;
  Decision d = Decision::converges;
  bool any = false;

  void add(const Verdict& v) {
    const auto rv = residuals_of(v);
    r = any ? elementwise_max(r, rv) : rv;
    d = any ? conjunction({d, v.decision}) : v.decision;
    any = true;
  }
  void add(const std::vector<Scalar>& rv, Decision dv) {
    r = any ? elementwise_max(r, rv) : rv;
    d = any ? conjunction({d, dv}) : dv;
    any = true;
  }
};

inline std::string probe_name(const char* prefix, std::size_t a, std::size_t b) {
  return std::string(prefix) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}

inline ConditionReport row_abs_sum_condition(const FourDimMatrix& A, const TruncationSchedule& sched,
                                             const ToleranceConfig& tol) {
  const Verdict v = bounded(grid_sequence(row_abs_sums(A, sched.largest()), "row-abs-sums"), sched, tol);
  auto c = condition_from("row-abs-sums-bounded", v);
  c.constants.push_back({"sup", *v.bound});
  return c;
}

inline void check_E_sets(const std::vector<IndexSet>& E_sets, const ToleranceConfig& tol) {
  for (const auto& E : E_sets) {
    const auto z = zero_density_check(E, default_density_sides(), tol);
    if (z.verdict != Outcome::pass)
      throw Error("index set '" + E.name() + "' does not pass the uniform zero-density check");
  }
}

// Sum over (k,l) in E (inside the row's column range) of |D a_{mnkl}| for a
// difference operator D, as a grid over (m, n).
inline Grid delta_sums_on(const FourDimMatrix& A, const IndexSet& E, Truncation tr,
                          Scalar (*delta)(const FourDimMatrix&, std::size_t, std::size_t, std::size_t, std::size_t)) {
  Grid g(tr.M + 1, tr.N + 1);
  for (std::size_t m = 0; m <= tr.M; ++m)
    for (std::size_t n = 0; n <= tr.N; ++n) {
      Scalar s = 0.0;
      for (std::size_t k = 0; k <= k_hi(A, m, tr.M); ++k)
        for (std::size_t l = 0; l <= k_hi(A, n, tr.N); ++l)
          if (E(k, l)) s += std::abs(delta(A, m, n, k, l));
      g(m, n) = s;
    }
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// C_bp -> C_bp

namespace detail {

inline ClassReport cbp_suite(const FourDimMatrix& A, const TruncationSchedule& sched, const ToleranceConfig& tol,
                             bool regular) {
  const Truncation big = sched.largest();
  std::vector<ConditionReport> cs;
  cs.push_back(row_abs_sum_condition(A, sched, tol));

  // Column limits a_{kl} at probe columns; conservative estimates for every
  // column come from the largest-stage tail block.
  auto column_limit = [&](std::size_t k, std::size_t l) {
    Scalar sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t m = big.M / 2; m <= big.M; ++m)
      for (std::size_t n = big.N / 2; n <= big.N; ++n, ++cnt) sum += A(m, n, k, l);
    return sum / static_cast<Scalar>(cnt);
  };
  {
    ProbeMerge pm;
    ConditionReport c;
    for (std::size_t k = 0; k <= 2; ++k)
      for (std::size_t l = 0; l <= 2; ++l) {
        auto col = DoubleSequence([A, k, l](std::size_t m, std::size_t n) { return A(m, n, k, l); }, "column");
        const Verdict v = bp_of(col, regular ? std::optional<Scalar>(0.0) : std::nullopt, sched, tol);
        pm.add(v);
        c.constants.push_back({probe_name("a", k, l), v.candidate_limit.value_or(0.0)});
      }
    auto cc = condition_from("column-limits", sched, pm.r, pm.d);
    cc.constants = c.constants;
    cs.push_back(cc);
  }
  {
    const Verdict v = bp_of(grid_sequence(row_sums(A, big), "row-sums"),
                            regular ? std::optional<Scalar>(1.0) : std::nullopt, sched, tol);
    auto c = condition_from("row-sum-limit", v);
    c.constants.push_back({"v", v.candidate_limit.value_or(0.0)});
    cs.push_back(c);
  }
  for (int along_k = 1; along_k >= 0; --along_k) {
    ProbeMerge pm;
    for (std::size_t fixed = 0; fixed <= 2; ++fixed) {
      std::vector<Scalar> lim(big.M + 2, 0.0);
      if (!regular)
        for (std::size_t v = 0; v <= big.M; ++v) lim[v] = along_k ? column_limit(v, fixed) : column_limit(fixed, v);
      Grid g(big.M + 1, big.N + 1);
      for (std::size_t m = 0; m <= big.M; ++m)
        for (std::size_t n = 0; n <= big.N; ++n) {
          Scalar s = 0.0;
          const std::size_t hi = along_k ? k_hi(A, m, big.M) : k_hi(A, n, big.N);
          for (std::size_t v = 0; v <= hi; ++v)
            s += std::abs((along_k ? A(m, n, v, fixed) : A(m, n, fixed, v)) - lim[v]);
          g(m, n) = s;
        }
      pm.add(bp_of(grid_sequence(std::move(g), "column-block"), 0.0, sched, tol));
    }
    cs.push_back(condition_from(along_k ? "column-block-sum-over-k" : "column-block-sum-over-l", sched, pm.r, pm.d));
  }
  return make_class_report(regular ? "cbp-regular" : "cbp-conservative", A.name(), std::move(cs));
}

}  // namespace detail

inline ClassReport check_cbp_conservative(const FourDimMatrix& A, const TruncationSchedule& sched = class_schedule(),
                                          const ToleranceConfig& tol = {}) {
  return detail::cbp_suite(A, sched, tol, false);
}

inline ClassReport check_cbp_regular(const FourDimMatrix& A, const TruncationSchedule& sched = class_schedule(),
                                     const ToleranceConfig& tol = {}) {
  return detail::cbp_suite(A, sched, tol, true);
}

/// A in ([C_f]; C_bp): regular plus the Delta10/Delta01 sums over each E
/// vanish.
inline ClassReport check_strong_to_bp(const FourDimMatrix& A, const std::vector<IndexSet>& E_sets = {diagonal_set()},
                                      const TruncationSchedule& sched = class_schedule(),
                                      const ToleranceConfig& tol = {}) {
  detail::check_E_sets(E_sets, tol);
  auto reg = check_cbp_regular(A, sched, tol);
  std::vector<ConditionReport> cs = reg.conditions;
  for (const auto& E : E_sets) {
    for (int which = 0; which < 2; ++which) {
      const Grid g = detail::delta_sums_on(A, E, sched.largest(), which == 0 ? &delta10 : &delta01);
      const Verdict v = detail::bp_of(detail::grid_sequence(g, "delta-sums"), 0.0, sched, tol);
      cs.push_back(detail::condition_from(std::string(which == 0 ? "delta10-on-" : "delta01-on-") + E.name(), v));
    }
  }
  return make_class_report("strong-to-bp", A.name(), std::move(cs));
}

// ---------------------------------------------------------------------------
// Window-mean suites (almost conservative / regular / strongly regular)

namespace detail {

struct WindowSuiteData {
  std::vector<Scalar> column_means;  // probes (i,j) in {0,1}^2
  std::vector<Scalar> total;         // sum over all (i,j)
  std::vector<Scalar> sum_over_i;    // probes j in {0,1}
  std::vector<Scalar> sum_over_j;    // probes i in {0,1}
  std::vector<Scalar> delta10;
  std::vector<Scalar> delta01;
  std::vector<std::pair<std::string, Scalar>> constants;
};

// One pass over every column pair (i, j) in [0, M+1]^2: the grid
// G(k,l) = a_{klij} is prefix-summed once and every stage window is read
// from it. Rows i and i-1 of window means are kept for the Delta10 sums.
inline WindowSuiteData window_suite_data(const FourDimMatrix& A, const TruncationSchedule& sched, bool regular) {
  const Truncation big = sched.largest();
  std::vector<Window> windows;
  std::vector<std::size_t> stage_of;
  for (std::size_t s = 0; s < sched.size(); ++s)
    for_each_stage_window(sched[s], 0, [&](const Window& w) {
      windows.push_back(w);
      stage_of.push_back(s);
    });
  const std::size_t W = windows.size(), S = sched.size();
  const Window centre = centred_window(big);
  const std::size_t I = big.M + 2, J = big.N + 2;

  std::vector<Scalar> total(W, 0.0), d10(W, 0.0), d01(W, 0.0);
  std::vector<std::vector<Scalar>> over_i(2, std::vector<Scalar>(W, 0.0)), over_j(2, std::vector<Scalar>(W, 0.0));
  std::vector<Scalar> probe_res(S, 0.0);
  std::vector<std::vector<Scalar>> prev_row(J, std::vector<Scalar>(W, 0.0)), cur_row(J, std::vector<Scalar>(W, 0.0));
  WindowSuiteData out;

  Grid g(big.M + 1, big.N + 1);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t k = 0; k <= big.M; ++k)
        for (std::size_t l = 0; l <= big.N; ++l) g(k, l) = A(k, l, i, j);
      const PrefixSum2D ps(g);
      const Scalar target = regular ? 0.0 : ps.window_mean(centre);
      auto& means = cur_row[j];
      for (std::size_t w = 0; w < W; ++w) means[w] = ps.window_mean(windows[w]);
      const bool probe_i = i <= 1, probe_j = j <= 1;
      if (probe_i && probe_j) {
        for (std::size_t w = 0; w < W; ++w)
          probe_res[stage_of[w]] = std::max(probe_res[stage_of[w]], std::abs(means[w] - target));
        out.constants.push_back({probe_name("a", i, j), target});
      }
      for (std::size_t w = 0; w < W; ++w) {
        total[w] += means[w];
        const Scalar dev = std::abs(means[w] - target);
        if (probe_j) over_i[j][w] += dev;
        if (probe_i) over_j[i][w] += dev;
        if (j > 0) d01[w] += std::abs(cur_row[j - 1][w] - means[w]);
        if (i > 0) d10[w] += std::abs(prev_row[j][w] - means[w]);
      }
    }
    std::swap(prev_row, cur_row);
  }

  Scalar u = 1.0;
  if (!regular) {
    for (std::size_t w = 0; w < W; ++w)
      if (windows[w] == centre && stage_of[w] == S - 1) u = total[w];
    out.constants.push_back({"u", u});
  }
  auto stage_max = [&](const std::vector<Scalar>& acc, Scalar shift) {
    std::vector<Scalar> r(S, 0.0);
    for (std::size_t w = 0; w < W; ++w) r[stage_of[w]] = std::max(r[stage_of[w]], std::abs(acc[w] - shift));
    return r;
  };
  out.column_means = probe_res;
  out.total = stage_max(total, u);
  out.sum_over_i = elementwise_max(stage_max(over_i[0], 0.0), stage_max(over_i[1], 0.0));
  out.sum_over_j = elementwise_max(stage_max(over_j[0], 0.0), stage_max(over_j[1], 0.0));
  out.delta10 = stage_max(d10, 0.0);
  out.delta01 = stage_max(d01, 0.0);
  return out;
}

inline std::vector<ConditionReport> window_suite(const FourDimMatrix& A, const TruncationSchedule& sched,
                                                 const ToleranceConfig& tol, bool regular, bool with_deltas) {
  const auto d = window_suite_data(A, sched, regular);
  std::vector<ConditionReport> cs;
  cs.push_back(row_abs_sum_condition(A, sched, tol));
  auto cm = condition_from("window-column-means", sched, d.column_means, decide(d.column_means, tol));
  for (const auto& kv : d.constants)
    if (kv.first != "u") cm.constants.push_back(kv);
  cs.push_back(cm);
  auto tot = condition_from("window-total", sched, d.total, decide(d.total, tol));
  for (const auto& kv : d.constants)
    if (kv.first == "u") tot.constants.push_back(kv);
  cs.push_back(tot);
  cs.push_back(condition_from("window-sum-over-i", sched, d.sum_over_i, decide(d.sum_over_i, tol)));
  cs.push_back(condition_from("window-sum-over-j", sched, d.sum_over_j, decide(d.sum_over_j, tol)));
  if (with_deltas) {
    cs.push_back(condition_from("window-delta10", sched, d.delta10, decide(d.delta10, tol)));
    cs.push_back(condition_from("window-delta01", sched, d.delta01, decide(d.delta01, tol)));
  }
  return cs;
}

}  // namespace detail

inline ClassReport check_almost_conservative(const FourDimMatrix& A, const TruncationSchedule& sched = class_schedule(),
                                             const ToleranceConfig& tol = {}) {
  return make_class_report("almost-conservative", A.name(), detail::window_suite(A, sched, tol, false, false));
}

inline ClassReport check_almost_regular(const FourDimMatrix& A, const TruncationSchedule& sched = class_schedule(),
                                        const ToleranceConfig& tol = {}) {
  return make_class_report("almost-regular", A.name(), detail::window_suite(A, sched, tol, true, false));
}

inline ClassReport check_strongly_regular(const FourDimMatrix& A, const TruncationSchedule& sched = class_schedule(),
                                          const ToleranceConfig& tol = {}) {
  return make_class_report("strongly-regular", A.name(), detail::window_suite(A, sched, tol, true, true));
}

/// A in ([C_f]; C_f) with limits preserved: almost C_bp-regular plus the
/// Delta11 sums over each E vanish.
inline ClassReport check_strong_almost_to_almost(const FourDimMatrix& A,
                                                 const std::vector<IndexSet>& E_sets = {diagonal_set()},
                                                 const TruncationSchedule& sched = class_schedule(),
                                                 const ToleranceConfig& tol = {}) {
  detail::check_E_sets(E_sets, tol);
  auto cs = detail::window_suite(A, sched, tol, true, false);
  for (const auto& E : E_sets) {
    const Grid g = detail::delta_sums_on(A, E, sched.largest(), &delta11);
    const Verdict v = detail::bp_of(detail::grid_sequence(g, "delta11-sums"), 0.0, sched, tol);
    cs.push_back(detail::condition_from("delta11-on-" + E.name(), v));
  }
  return make_class_report("strong-almost-to-almost", A.name(), std::move(cs));
}

// ---------------------------------------------------------------------------
// Dual sets

/// The geometric weights of the dual kernel: sigma, tau and rt of B, or the
/// plain (untransformed) space with sigma = tau = 0, rt = 1.
struct DualTransform {
  Scalar sigma = 0.0;
  Scalar tau = 0.0;
  Scalar rt = 1.0;

  static DualTransform of(const BParams& p) { return {p.sigma(), p.tau(), p.rt()}; }
  static DualTransform plain() { return {0.0, 0.0, 1.0}; }
};

/// Centred uses |Delta(d_{mnkl} - beta_{kl}/rt)| in d6/d7; literal uses the
/// plain |Delta d_{mnkl}|.
enum class DeltaCentering { centered, literal };

inline const std::vector<std::string>& dual_set_ids() {
  static const std::vector<std::string> ids = {"d1", "d2", "d3", "d4", "d5", "d6", "d7", "alpha"};
  return ids;
}

/// All dual-set statistics of a candidate a, computed once. T_{mn}(k,l) is
/// the inner sum of the d-sets without the 1/rt factor.
class DualAnalysis {
 public:
  DualAnalysis(const DoubleSequence& a, DualTransform dt, TruncationSchedule sched = class_schedule(),
               ToleranceConfig tol = {}, IndexSet E = diagonal_set(),
               DeltaCentering centering = DeltaCentering::centered)
      : a_(a), dt_(dt), sched_(std::move(sched)), tol_(tol), E_(std::move(E)), centering_(centering) {
    compute();
  }

  [[nodiscard]] ConditionReport report(const std::string& which) const {
    for (const auto& r : reports_)
      if (r.condition_id == which) return r;
    throw Error("dual_membership: unknown set '" + which + "'");
  }
  [[nodiscard]] const std::vector<ConditionReport>& reports() const noexcept { return reports_; }
  [[nodiscard]] Scalar d1_sup() const noexcept { return d1_sup_; }
  [[nodiscard]] Scalar beta(std::size_t k, std::size_t l) const { return beta_(k, l); }

 private:
  std::vector<Scalar> table(const Grid& ag, std::size_t m, std::size_t n) const {
    return detail::geometric_tail_table([&ag](std::size_t j, std::size_t i) { return ag(j, i); }, dt_.sigma, dt_.tau,
                                        m, n);
  }

  void compute() {
    const Truncation big = sched_.largest();
    const std::size_t M = big.M, N = big.N;
    const Grid ag = Grid::sample(a_, big);
    const Scalar art = std::abs(dt_.rt);
    Grid mask(M + 1, N + 1);
    for (std::size_t k = 0; k <= M; ++k)
      for (std::size_t l = 0; l <= N; ++l) mask(k, l) = E_(k, l) ? 1.0 : 0.0;

    Grid d1(M + 1, N + 1), d3(M + 1, N + 1);
    std::vector<Grid> probes(9, Grid(M + 1, N + 1));
    beta_ = Grid(M + 2, N + 2);
    std::size_t tail_count = 0;
    for (std::size_t m = 0; m <= M; ++m)
      for (std::size_t n = 0; n <= N; ++n) {
        const auto T = table(ag, m, n);
        const bool tail = m >= M / 2 && n >= N / 2;
        tail_count += tail ? 1 : 0;
        Scalar sa = 0.0, s = 0.0;
        for (std::size_t k = 0; k <= m; ++k)
          for (std::size_t l = 0; l <= n; ++l) {
            const Scalar t = T[k * (n + 1) + l];
            sa += std::abs(t);
            s += t;
            if (tail) beta_(k, l) += t;
          }
        d1(m, n) = sa / art;
        d3(m, n) = s / dt_.rt;
        for (std::size_t p = 0; p < 9; ++p) {
          const std::size_t k = p / 3, l = p % 3;
          probes[p](m, n) = (k <= m && l <= n) ? T[k * (n + 1) + l] : 0.0;
        }
      }
    for (std::size_t k = 0; k <= M; ++k)
      for (std::size_t l = 0; l <= N; ++l) beta_(k, l) /= static_cast<Scalar>(tail_count);

    Grid d4(M + 1, N + 1), d5(M + 1, N + 1), d6(M + 1, N + 1), d7(M + 1, N + 1);
    const Scalar c = centering_ == DeltaCentering::centered ? 1.0 : 0.0;
    for (std::size_t m = 0; m <= M; ++m)
      for (std::size_t n = 0; n <= N; ++n) {
        const auto T = table(ag, m, n);
        auto f = [&](std::size_t k, std::size_t l) {
          const Scalar t = (k <= m && l <= n) ? T[k * (n + 1) + l] : 0.0;
          return (t - c * beta_(k, l)) / dt_.rt;
        };
        Scalar s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
        for (std::size_t k = 0; k <= m; ++k) s4 += std::abs(T[k * (n + 1)] - beta_(k, 0));
        for (std::size_t l = 0; l <= n; ++l) s5 += std::abs(T[l] - beta_(0, l));
        for (std::size_t k = 0; k <= m; ++k)
          for (std::size_t l = 0; l <= n; ++l)
            if (mask(k, l) != 0.0) {
              const Scalar fkl = f(k, l);
              s6 += std::abs(fkl - f(k, l + 1));
              s7 += std::abs(fkl - f(k + 1, l));
            }
        d4(m, n) = s4;
        d5(m, n) = s5;
        d6(m, n) = s6;
        d7(m, n) = s7;
      }

    d1_sup_ = 0.0;
    for (std::size_t m = 0; m <= M; ++m)
      for (std::size_t n = 0; n <= N; ++n) d1_sup_ = std::max(d1_sup_, d1(m, n));
    const Scalar norm_d = d1_sup_ > 0.0 ? d1_sup_ : 1.0;  // scale of D rows
    const Scalar norm_t = norm_d * art;                    // scale of T rows

    // d1: bounded absolute row sums of D.
    {
      const Verdict v = bounded(detail::grid_sequence(d1, "d1"), sched_, tol_);
      auto r = detail::condition_from("d1", v);
      r.constants.push_back({"sup", d1_sup_});
      reports_.push_back(r);
    }
    // d2: column limits beta_{kl} exist at the probes.
    {
      detail::ProbeMerge pm;
      ConditionReport r;
      for (std::size_t p = 0; p < 9; ++p) {
        const std::size_t k = p / 3, l = p % 3;
        std::vector<Scalar> res;
        for (const auto& tr : sched_.sizes()) res.push_back(detail::tail_block_residual(probes[p], tr, beta_(k, l)) / norm_t);
        pm.add(res, decide(res, tol_));
        r.constants.push_back({detail::probe_name("beta", k, l), beta_(k, l)});
      }
      auto c2 = detail::condition_from("d2", sched_, pm.r, pm.d);
      c2.constants = r.constants;
      reports_.push_back(c2);
    }
    // d3: the full row sum of D has a limit.
    {
      const Scalar u = detail::tail_block_mean(d3, big);
      std::vector<Scalar> res;
      for (const auto& tr : sched_.sizes()) res.push_back(detail::tail_block_residual(d3, tr, u) / norm_d);
      auto r = detail::condition_from("d3", sched_, res, decide(res, tol_));
      r.constants.push_back({"u", u});
      reports_.push_back(r);
    }
    auto null_condition = [&](const char* id, const Grid& g, Scalar scale, const char* note) {
      std::vector<Scalar> res;
      for (const auto& tr : sched_.sizes()) res.push_back(detail::tail_block_residual(g, tr, 0.0) / scale);
      auto r = detail::condition_from(id, sched_, res, decide(res, tol_));
      r.note = note;
      reports_.push_back(r);
    };
    null_condition("d4", d4, norm_t, "l0 = 0");
    null_condition("d5", d5, norm_t, "k0 = 0");
    const char* cnote = centering_ == DeltaCentering::centered ? "centred by beta" : "literal";
    null_condition("d6", d6, norm_d, cnote);
    null_condition("d7", d7, norm_d, cnote);
    // alpha: bounded L1 sums of a.
    {
      std::vector<Scalar> sums;
      for (const auto& tr : sched_.sizes()) sums.push_back(lq_norm(a_, tr, 1.0));
      const Verdict v = growth_verdict(sums, sched_, tol_, "alpha");
      auto r = detail::condition_from("alpha", v);
      r.constants.push_back({"l1_sum", sums.back()});
      reports_.push_back(r);
    }
    for (auto& r : reports_)
      if (r.condition_id == "d6" || r.condition_id == "d7") r.note += ", E = " + E_.name();
  }

  DoubleSequence a_;
  DualTransform dt_;
  TruncationSchedule sched_;
  ToleranceConfig tol_;
  IndexSet E_;
  DeltaCentering centering_;
  Grid beta_;
  Scalar d1_sup_ = 0.0;
  std::vector<ConditionReport> reports_;
};

inline ConditionReport dual_membership(const DoubleSequence& a, const std::string& which, const BParams& p,
                                       const TruncationSchedule& sched = class_schedule(),
                                       const ToleranceConfig& tol = {}, const IndexSet& E = diagonal_set(),
                                       DeltaCentering centering = DeltaCentering::centered) {
  const auto& ids = dual_set_ids();
  if (std::find(ids.begin(), ids.end(), which) == ids.end())
    throw Error("dual_membership: unknown set '" + which + "'");
  return DualAnalysis(a, DualTransform::of(p), sched, tol, E, centering).report(which);
}

inline ClassReport beta_dual_report(const DoubleSequence& a, const DualTransform& dt,
                                    const TruncationSchedule& sched = class_schedule(),
                                    const ToleranceConfig& tol = {}, const IndexSet& E = diagonal_set(),
                                    DeltaCentering centering = DeltaCentering::centered) {
  const DualAnalysis da(a, dt, sched, tol, E, centering);
  std::vector<ConditionReport> cs;
  for (const auto& id : {"d1", "d2", "d3", "d4", "d5", "d6", "d7"}) cs.push_back(da.report(id));
  return make_class_report("beta-dual", a.name(), std::move(cs));
}

inline ClassReport beta_dual_report(const DoubleSequence& a, const BParams& p,
                                    const TruncationSchedule& sched = class_schedule(),
                                    const ToleranceConfig& tol = {}, const IndexSet& E = diagonal_set(),
                                    DeltaCentering centering = DeltaCentering::centered) {
  return beta_dual_report(a, DualTransform::of(p), sched, tol, E, centering);
}

/// x_{mn} = (1/rt) sum_{k<=m, l<=n} sigma^{m-k} tau^{n-l} y_{kl} on a grid.
inline Grid dual_preimage_grid(const Grid& y, const DualTransform& dt) {
  Grid h(y.rows(), y.cols()), x(y.rows(), y.cols());
  for (std::size_t k = 0; k < y.rows(); ++k) {
    Scalar acc = 0.0;
    for (std::size_t l = 0; l < y.cols(); ++l) h(k, l) = acc = acc * dt.tau + y(k, l);
  }
  for (std::size_t l = 0; l < y.cols(); ++l) {
    Scalar acc = 0.0;
    for (std::size_t k = 0; k < y.rows(); ++k) {
      acc = acc * dt.sigma + h(k, l);
      x(k, l) = acc / dt.rt;
    }
  }
  return x;
}

/// gamma dual: d1 together with bp-convergence of the partial sums of a*x
/// for x = F y, y in {e, zero, impulse}.
inline ClassReport gamma_dual_report(const DoubleSequence& a, const BParams& p,
                                     const TruncationSchedule& sched = class_schedule(),
                                     const ToleranceConfig& tol = {}) {
  const DualTransform dt = DualTransform::of(p);
  const DualAnalysis da(a, dt, sched, tol);
  std::vector<ConditionReport> cs{da.report("d1")};
  const Truncation big = sched.largest();
  const Grid ag = Grid::sample(a, big);
  detail::ProbeMerge pm;
  ConditionReport c;
  for (const char* yname : {"e", "zero", "impulse"}) {
    const std::string yn = yname;
    const DoubleSequence y = yn == "e" ? DoubleSequence([](std::size_t, std::size_t) { return 1.0; }, "e")
                             : yn == "zero" ? DoubleSequence()
                                            : DoubleSequence([](std::size_t k, std::size_t l) { return (k == 0 && l == 0) ? 1.0 : 0.0; }, "impulse");
    const Grid x = dual_preimage_grid(Grid::sample(y, big), dt);
    Grid ax(big.M + 1, big.N + 1);
    for (std::size_t k = 0; k <= big.M; ++k)
      for (std::size_t l = 0; l <= big.N; ++l) ax(k, l) = ag(k, l) * x(k, l);
    const PrefixSum2D ps(ax);
    Grid s(big.M + 1, big.N + 1);
    Scalar scale = 0.0;
    for (std::size_t m = 0; m <= big.M; ++m)
      for (std::size_t n = 0; n <= big.N; ++n) {
        s(m, n) = ps.window_sum({0, 0, m, n});
        scale = std::max(scale, std::abs(s(m, n)));
      }
    if (scale == 0.0) scale = 1.0;
    const DoubleSequence seq = detail::grid_sequence(s, "partial-sums");
    const Verdict v = p_limit(seq, sched, tol);
    auto res = detail::residuals_of(v);
    for (auto& r : res) r /= scale;
    pm.add(res, conjunction({decide(res, tol), bounded(seq, sched, tol).decision}));
    c.constants.push_back({"limit(" + yn + ")", v.candidate_limit.value_or(0.0)});
  }
  auto cs_cond = detail::condition_from("CS_bp", sched, pm.r, pm.d);
  cs_cond.constants = c.constants;
  cs.push_back(cs_cond);
  return make_class_report("gamma-dual", a.name(), std::move(cs));
}

// ---------------------------------------------------------------------------
// ([C_f]; M_u) and the B-domain classes

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> row_probes() {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (std::size_t m = 0; m <= 2; ++m)
    for (std::size_t n = 0; n <= 2; ++n) r.push_back({m, n});
  return r;
}

inline ClassReport cf_to_mu(const FourDimMatrix& rows_of, const DualTransform& dt, const FourDimMatrix& summed,
                            std::string id, const TruncationSchedule& sched, const ToleranceConfig& tol) {
  std::vector<ConditionReport> cs;
  ProbeMerge pm;
  std::string failing;
  for (const auto& [m, n] : row_probes()) {
    const auto beta = beta_dual_report(rows_of.row(m, n), dt, sched, tol);
    std::vector<Scalar> r;
    for (const auto& c : beta.conditions) {
      std::vector<Scalar> cr;
      for (const auto& t : c.trend) cr.push_back(t.residual);
      r = r.empty() ? cr : elementwise_max(r, cr);
    }
    const Decision d = beta.overall == Outcome::pass   ? Decision::converges
                       : beta.overall == Outcome::fail ? Decision::diverges
                                                       : Decision::inconclusive;
    pm.add(r, d);
    if (beta.overall != Outcome::pass && failing.empty()) failing = probe_name("row", m, n);
  }
  auto rc = condition_from("rows-in-beta-dual", sched, pm.r, pm.d);
  rc.note = failing.empty() ? "rows (m,n) in {0,1,2}^2" : "first non-passing: " + failing;
  cs.push_back(rc);
  cs.push_back(row_abs_sum_condition(summed, sched, tol));
  return make_class_report(std::move(id), summed.name(), std::move(cs));
}

}  // namespace detail

/// A in ([C_f]; M_u) (or (B[C_f]; M_u) when p is given): rows in the beta
/// dual and bounded absolute row sums.
inline ClassReport check_Cf_to_Mu(const FourDimMatrix& A, const std::optional<BParams>& p = std::nullopt,
                                  const TruncationSchedule& sched = class_schedule(),
                                  const ToleranceConfig& tol = {}) {
  const DualTransform dt = p ? DualTransform::of(*p) : DualTransform::plain();
  return detail::cf_to_mu(A, dt, A, "Cf-to-Mu", sched, tol);
}

inline const std::vector<std::string>& b_domain_class_ids() {
  static const std::vector<std::string> ids = {"BSCf_to_Cf", "BSCf_to_Mu", "BSCf_to_Cbp", "SCf_to_BMu",
                                               "SCf_to_BCbp"};
  return ids;
}

/// Runs the suite of class_id on E(A) (domain B[C_f]) or G(A) (range B(.)).
inline ClassReport check_B_domain_class(const FourDimMatrix& A, const BParams& p, const std::string& class_id,
                                        const TruncationSchedule& sched = class_schedule(),
                                        const ToleranceConfig& tol = {},
                                        const std::vector<IndexSet>& E_sets = {diagonal_set()}) {
  ClassReport r;
  if (class_id == "BSCf_to_Cf") {
    r = check_strong_almost_to_almost(e_kernel(A, p), E_sets, sched, tol);
  } else if (class_id == "BSCf_to_Mu") {
    r = detail::cf_to_mu(A, DualTransform::of(p), e_kernel(A, p), class_id, sched, tol);
  } else if (class_id == "BSCf_to_Cbp") {
    r = check_strong_to_bp(e_kernel(A, p), E_sets, sched, tol);
  } else if (class_id == "SCf_to_BMu") {
    r = detail::cf_to_mu(A, DualTransform::plain(), g_kernel(A, p), class_id, sched, tol);
  } else if (class_id == "SCf_to_BCbp") {
    r = check_strong_to_bp(g_kernel(A, p), E_sets, sched, tol);
  } else {
    throw Error("check_B_domain_class: unknown class '" + class_id + "'");
  }
  r.class_id = class_id;
  return r;
}

}  // namespace dsum
