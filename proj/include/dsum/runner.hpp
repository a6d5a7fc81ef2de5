#pragma once

// Executes an ExperimentConfig and builds the report document.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "dsum/battery.hpp"
#include "dsum/classcheck.hpp"
#include "dsum/config.hpp"
#include "dsum/convergence.hpp"
#include "dsum/corpus.hpp"
#include "dsum/expr.hpp"
#include "dsum/report.hpp"

namespace dsum {

struct RunOptions {
  std::optional<std::size_t> stage_max;
  bool timing = false;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline DoubleSequence config_sequence(const ExperimentConfig& c) {
  if (c.corpus) return corpus(*c.corpus, c.params);
  if (c.expr) return expr_sequence(*c.expr, c.params);
  throw Error("config: operation '" + c.operation + "' needs a [sequence] corpus or expr");
}

inline const BParams& need_params(const ExperimentConfig& c, const std::string& what) {
  if (!c.params) throw Error("config: " + what + " needs [params] r, s, t, u");
  return *c.params;
}

inline FourDimMatrix named_kernel(const ExperimentConfig& c, const std::string& raw, bool allow_derived) {
  const std::string name = lower(raw);
  if (name == "b") return b_kernel(need_params(c, "kernel B"));
  if (name == "f") return f_kernel(need_params(c, "kernel F"));
  if (name == "delta") return delta_kernel();
  if (name == "cesaro") return cesaro_kernel();
  if (name == "identity") return identity_kernel();
  if (name == "zero") return zero_kernel();
  if (name == "expr") {
    if (!c.kernel_expr) throw Error("config: kernel expr needs [kernel] expr");
    return expr_kernel(*c.kernel_expr, c.kernel_triangular.value_or(true), c.params);
  }
  if (allow_derived) {
    if (name == "d") return d_kernel(config_sequence(c), need_params(c, "kernel D"));
    if (name == "e" || name == "g") {
      if (!c.kernel_base) throw Error("config: kernel " + raw + " needs [kernel] base");
      const FourDimMatrix A = named_kernel(c, *c.kernel_base, false);
      const BParams& p = need_params(c, "kernel " + raw);
      return name == "e" ? e_kernel(A, p) : g_kernel(A, p);
    }
  }
  throw Error("config: unknown kernel '" + raw + "'");
}

inline FourDimMatrix config_kernel(const ExperimentConfig& c) {
  if (!c.kernel) throw Error("config: operation '" + c.operation + "' needs a [kernel] name");
  return named_kernel(c, *c.kernel, true);
}

inline IndexSet config_index_set(const ExperimentConfig& c) {
  const std::string n = c.index_set.value_or("diagonal");
  if (n == "diagonal") return diagonal_set();
  if (n == "first-column") return first_column_set();
  if (n == "full") return full_set();
  throw Error("config: unknown index set '" + n + "'");
}

inline TruncationSchedule config_schedule(const ExperimentConfig& c, const RunOptions& o) {
  TruncationSchedule s;
  if (!c.sizes.empty()) s = TruncationSchedule::from_sides(c.sizes);
  else if (c.operation == "check" || c.operation == "dual") s = class_schedule();
  return o.stage_max ? s.capped(*o.stage_max) : s;
}

inline std::string sequence_label(const ExperimentConfig& c) {
  if (c.corpus) return *c.corpus;
  if (c.expr) return *c.expr;
  return "";
}

inline Json run_transform(const ExperimentConfig& c, const TruncationSchedule& sched) {
  const DoubleSequence x = config_sequence(c);
  const FourDimMatrix A = config_kernel(c);
  const std::string mode_name = c.target.empty() ? "bp" : c.target;
  ConvergenceMode mode;
  if (mode_name == "p") mode = ConvergenceMode::p;
  else if (mode_name == "bp") mode = ConvergenceMode::bp;
  else if (mode_name == "r") mode = ConvergenceMode::r;
  else throw Error("transform: target must be p, bp or r, got '" + mode_name + "'");
  const Truncation tr = sched.largest();
  Json out{{"sequence", sequence_label(c)}, {"kernel", A.name()}, {"mode", to_string(mode)}};
  const std::string kname = lower(*c.kernel);
  if (kname == "b" || kname == "f") {
    // The band form of B and the closed form of F; both exact finite sums.
    const DoubleSequence y = kname == "b" ? b_transform(x, *c.params) : inverse_transform(x, *c.params);
    out["all_exist"] = true;
    out["unstabilized"] = 0;
    out["grid"] = to_json(Grid::sample(y, tr));
    return out;
  }
  const ApplyResult res = apply(A, x, mode, tr);
  std::size_t bad = 0;
  for (const auto& d : res.diagnostics) bad += d.stabilized ? 0 : 1;
  out["all_exist"] = res.all_exist();
  out["unstabilized"] = bad;
  out["grid"] = to_json(res.values);
  return out;
}

inline Json run_verdict(const ExperimentConfig& c, const TruncationSchedule& sched) {
  const DoubleSequence x = config_sequence(c);
  const std::string space = c.target.empty() ? "Cf" : c.target;
  Verdict v;
  if (space == "cauchy") v = almost_cauchy(x, sched, c.tol);
  else v = membership(x, space, c.params, sched, c.tol);
  return Json{{"sequence", sequence_label(c)}, {"verdict", to_json(v)}};
}

inline Json run_norm(const ExperimentConfig& c, const TruncationSchedule& sched) {
  const DoubleSequence x = config_sequence(c);
  std::vector<std::string> which;
  if (c.target.empty()) {
    which = {"sup", "Cf", "SCf", "l1"};
    if (c.params) which.push_back("BCf");
  } else {
    which = {c.target};
  }
  Json norms = Json::array();
  for (const auto& w : which) {
    Json stages = Json::array();
    for (const auto& tr : sched.sizes()) {
      Json s{{"M", tr.M}, {"N", tr.N}};
      if (w == "sup") {
        const SupResult r = sup_abs(x, tr);
        s["value"] = r.value;
        s["argmax"] = Json{{"k", r.argmax.k}, {"l", r.argmax.l}};
      } else if (w == "Cf" || w == "SCf" || w == "BCf") {
        const WindowSupResult r = w == "Cf"    ? norm_Cf(x, tr)
                                  : w == "SCf" ? norm_strong(x, tr)
                                               : norm_BCf(x, need_params(c, "norm BCf"), tr);
        s["value"] = r.value;
        s["argmax"] = Json{{"m", r.argmax.m}, {"n", r.argmax.n}, {"q", r.argmax.q}, {"qp", r.argmax.qp}};
      } else if (w == "l1") {
        s["value"] = lq_norm(x, tr, 1.0);
      } else {
        throw Error("norm: target must be sup, Cf, SCf, BCf or l1, got '" + w + "'");
      }
      stages.push_back(std::move(s));
    }
    norms.push_back(Json{{"norm", w}, {"stages", stages}});
  }
  return Json{{"sequence", sequence_label(c)}, {"norms", norms}};
}

inline const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids = {
      "cbp-conservative",        "cbp-regular", "strong-to-bp", "almost-conservative", "almost-regular",
      "strongly-regular",        "strong-almost-to-almost",     "Cf-to-Mu",            "zero-density",
      "BSCf_to_Cf",              "BSCf_to_Mu",  "BSCf_to_Cbp",  "SCf_to_BMu",          "SCf_to_BCbp"};
  return ids;
}

inline Json run_check(const ExperimentConfig& c, const TruncationSchedule& sched) {
  const std::string id = c.target;
  if (id == "zero-density") {
    const IndexSet E = config_index_set(c);
    const ConditionReport r = zero_density_check(E, default_density_sides(), c.tol);
    return Json{{"report", to_json(make_class_report("zero-density", E.name(), {r}))}};
  }
  const FourDimMatrix A = config_kernel(c);
  const std::vector<IndexSet> E{config_index_set(c)};
  ClassReport r;
  if (id == "cbp-conservative") r = check_cbp_conservative(A, sched, c.tol);
  else if (id == "cbp-regular") r = check_cbp_regular(A, sched, c.tol);
  else if (id == "strong-to-bp") r = check_strong_to_bp(A, E, sched, c.tol);
  else if (id == "almost-conservative") r = check_almost_conservative(A, sched, c.tol);
  else if (id == "almost-regular") r = check_almost_regular(A, sched, c.tol);
  else if (id == "strongly-regular") r = check_strongly_regular(A, sched, c.tol);
  else if (id == "strong-almost-to-almost") r = check_strong_almost_to_almost(A, E, sched, c.tol);
  else if (id == "Cf-to-Mu") r = check_Cf_to_Mu(A, c.params, sched, c.tol);
  else if (std::find(b_domain_class_ids().begin(), b_domain_class_ids().end(), id) != b_domain_class_ids().end())
    r = check_B_domain_class(A, need_params(c, "class " + id), id, sched, c.tol, E);
  else throw Error("check: unknown class '" + id + "'");
  return Json{{"report", to_json(r)}};
}

inline Json run_dual(const ExperimentConfig& c, const TruncationSchedule& sched) {
  const DoubleSequence a = config_sequence(c);
  const std::string id = c.target.empty() ? "beta" : c.target;
  const DeltaCentering centering =
      c.centering.value_or("centered") == "literal" ? DeltaCentering::literal : DeltaCentering::centered;
  const DualTransform dt = c.params ? DualTransform::of(*c.params) : DualTransform::plain();
  ClassReport r;
  if (id == "beta") {
    r = beta_dual_report(a, dt, sched, c.tol, config_index_set(c), centering);
  } else if (id == "gamma") {
    r = gamma_dual_report(a, need_params(c, "the gamma dual"), sched, c.tol);
  } else if (std::find(dual_set_ids().begin(), dual_set_ids().end(), id) != dual_set_ids().end()) {
    r = make_class_report(id, a.name(),
                          {dual_membership(a, id, need_params(c, "dual set " + id), sched, c.tol, config_index_set(c),
                                           centering)});
  } else {
    throw Error("dual: unknown set '" + id + "'");
  }
  return Json{{"report", to_json(r)}};
}

}  // namespace detail

/// Runs the configured operation. Throws Error (or ParseError) on invalid
/// input; verdict outcomes never throw.
inline ReportDocument run_config(const ExperimentConfig& c, const RunOptions& o = {}) {
  using clock = std::chrono::steady_clock;
  c.tol.validate();
  ReportDocument doc;
  Json timing = Json::object();
  const auto t0 = clock::now();
  auto seconds_since = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };

  if (c.operation == "battery") {
    BatteryOptions bo{c.tol, c.seed.value_or(BatteryOptions{}.seed)};
    bo.tol.validate();
    Json arr = Json::array();
    int passed = 0;
    for (std::size_t i = 0; i < battery_items().size(); ++i) {
      const auto ti = clock::now();
      const BatteryItem it = run_battery_item(i, bo);
      timing["item" + std::to_string(it.id)] = seconds_since(ti);
      passed += it.pass ? 1 : 0;
      arr.push_back(to_json(it));
    }
    const int total = static_cast<int>(arr.size());
    doc.config = config_json(c, nullptr);
    doc.results = Json{{"items", arr}, {"passed", passed}, {"total", total}};
    doc.exit_code = passed == total ? 0 : 1;
  } else {
    const TruncationSchedule sched = detail::config_schedule(c, o);
    doc.config = config_json(c, &sched);
    if (c.operation == "transform") doc.results = detail::run_transform(c, sched);
    else if (c.operation == "verdict") doc.results = detail::run_verdict(c, sched);
    else if (c.operation == "norm") doc.results = detail::run_norm(c, sched);
    else if (c.operation == "check") doc.results = detail::run_check(c, sched);
    else if (c.operation == "dual") doc.results = detail::run_dual(c, sched);
    else throw Error("unknown operation '" + c.operation + "'");
  }
  timing["total"] = seconds_since(t0);
  doc.timing = o.timing ? timing : Json(nullptr);
  return doc;
}

}  // namespace dsum
