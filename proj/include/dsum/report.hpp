#pragma once

// JSON encodings of library results and the text/CSV renderings of a report
// document. Requires nlohmann/json (vendor/json.hpp).

#include <sstream>
#include <string>

#include "json.hpp"

#include "dsum/battery.hpp"
#include "dsum/classcheck.hpp"
#include "dsum/config.hpp"
#include "dsum/verdict.hpp"

namespace dsum {

using Json = nlohmann::ordered_json;

inline constexpr const char* version_string = "1.0.0";

inline Json to_json(const Truncation& tr) { return Json{{"M", tr.M}, {"N", tr.N}}; }

inline Json to_json(const std::vector<TracePoint>& trace) {
  Json a = Json::array();
  for (const auto& t : trace) a.push_back(Json{{"M", t.stage.M}, {"N", t.stage.N}, {"residual", t.residual}});
  return a;
}

inline Json optional_json(const std::optional<Scalar>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const Verdict& v) {
  return Json{{"mode", v.mode},
              {"decision", to_string(v.decision)},
              {"candidate_limit", optional_json(v.candidate_limit)},
              {"bound", optional_json(v.bound)},
              {"residual_trace", to_json(v.residual_trace)}};
}

inline Json to_json(const ConditionReport& c) {
  Json consts = Json::object();
  for (const auto& [k, v] : c.constants) consts[k] = v;
  return Json{{"condition_id", c.condition_id},
              {"verdict", to_string(c.verdict)},
              {"trend", to_json(c.trend)},
              {"constants", consts},
              {"note", c.note}};
}

inline Json to_json(const ClassReport& r) {
  Json cs = Json::array();
  for (const auto& c : r.conditions) cs.push_back(to_json(c));
  return Json{{"class_id", r.class_id}, {"kernel", r.kernel}, {"overall", to_string(r.overall)}, {"conditions", cs}};
}

inline Json to_json(const Grid& g) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < g.rows(); ++k) {
    Json row = Json::array();
    for (std::size_t l = 0; l < g.cols(); ++l) row.push_back(g(k, l));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", g.rows()}, {"cols", g.cols()}, {"values", rows}};
}

inline Json to_json(const BatteryItem& it) {
  return Json{{"id", it.id}, {"status", it.pass ? "PASS" : "FAIL"}, {"title", it.title}, {"detail", it.detail}};
}

/// The config echo, with the resolved schedule.
inline Json config_json(const ExperimentConfig& c, const TruncationSchedule* sched) {
  Json j;
  j["run"] = Json{{"operation", c.operation}, {"target", c.target}, {"format", c.format}};
  if (c.seed) j["run"]["seed"] = *c.seed;
  if (c.corpus) j["sequence"]["corpus"] = *c.corpus;
  if (c.expr) j["sequence"]["expr"] = *c.expr;
  if (c.kernel) j["kernel"]["name"] = *c.kernel;
  if (c.kernel_base) j["kernel"]["base"] = *c.kernel_base;
  if (c.kernel_expr) j["kernel"]["expr"] = *c.kernel_expr;
  if (c.kernel_triangular) j["kernel"]["triangular"] = *c.kernel_triangular;
  if (c.params)
    j["params"] = Json{{"r", c.params->r()}, {"s", c.params->s()}, {"t", c.params->t()}, {"u", c.params->u()}};
  if (sched) {
    Json sizes = Json::array();
    for (const auto& tr : sched->sizes()) sizes.push_back(tr.M + 1);
    j["schedule"]["sizes"] = sizes;
  }
  j["tolerance"] =
      Json{{"decision", c.tol.decision_tol}, {"exact", c.tol.exact_tol}, {"trend_ratio", c.tol.trend_ratio}};
  if (c.index_set) j["index_set"]["name"] = *c.index_set;
  if (c.centering) j["index_set"]["centering"] = *c.centering;
  return j;
}

/// {"config", "version", "results", "timing"}
struct ReportDocument {
  Json config;
  Json results;
  Json timing;
  int exit_code = 0;

  [[nodiscard]] Json to_json() const {
    return Json{{"config", config}, {"version", version_string}, {"results", results}, {"timing", timing}};
  }
};

// ---------------------------------------------------------------------------
// Text and CSV

namespace detail {

inline std::string num(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_number_float()) return format17(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.get<std::string>();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline void text_trace(std::ostringstream& o, const Json& trace, const char* indent) {
  for (const auto& t : trace)
    o << indent << "stage " << t["M"].get<std::size_t>() + 1 << "x" << t["N"].get<std::size_t>() + 1
      << "  residual " << num(t["residual"]) << "\n";
}

inline void text_class(std::ostringstream& o, const Json& r) {
  o << r["class_id"].get<std::string>() << " [" << r["kernel"].get<std::string>() << "]: "
    << r["overall"].get<std::string>() << "\n";
  for (const auto& c : r["conditions"]) {
    o << "  " << c["condition_id"].get<std::string>() << ": " << c["verdict"].get<std::string>();
    if (!c["note"].get<std::string>().empty()) o << "  (" << c["note"].get<std::string>() << ")";
    o << "\n";
    text_trace(o, c["trend"], "    ");
    for (const auto& [k, v] : c["constants"].items()) o << "    " << k << " = " << num(v) << "\n";
  }
}

inline void csv_class(std::ostringstream& o, const Json& r) {
  for (const auto& c : r["conditions"])
    for (const auto& t : c["trend"])
      o << csv_field(r["class_id"].get<std::string>()) << "," << csv_field(c["condition_id"].get<std::string>())
        << "," << c["verdict"].get<std::string>() << "," << t["M"] << "," << t["N"] << "," << num(t["residual"])
        << "\n";
}

}  // namespace detail

inline std::string render_text(const ReportDocument& d, const std::string& operation) {
  std::ostringstream o;
  const Json& r = d.results;
  if (operation == "battery") {
    for (const auto& it : r["items"]) {
      char head[16];
      std::snprintf(head, sizeof head, "%2d ", it["id"].get<int>());
      o << head << it["status"].get<std::string>() << " " << it["title"].get<std::string>() << " -- "
        << it["detail"].get<std::string>() << "\n";
    }
    o << r["passed"].get<int>() << "/" << r["total"].get<int>() << " passed\n";
  } else if (operation == "verdict") {
    const Json& v = r["verdict"];
    o << r["sequence"].get<std::string>() << " in " << v["mode"].get<std::string>() << ": "
      << v["decision"].get<std::string>() << "\n";
    o << "  candidate limit " << detail::num(v["candidate_limit"]) << "\n";
    if (!v["bound"].is_null()) o << "  bound " << detail::num(v["bound"]) << "\n";
    detail::text_trace(o, v["residual_trace"], "  ");
  } else if (operation == "norm") {
    o << "norms of " << r["sequence"].get<std::string>() << "\n";
    for (const auto& n : r["norms"]) {
      o << "  " << n["norm"].get<std::string>() << "\n";
      for (const auto& s : n["stages"])
        o << "    stage " << s["M"].get<std::size_t>() + 1 << "x" << s["N"].get<std::size_t>() + 1 << "  "
          << detail::num(s["value"]) << "\n";
    }
  } else if (operation == "check" || operation == "dual") {
    detail::text_class(o, r["report"]);
  } else if (operation == "transform") {
    o << r["kernel"].get<std::string>() << " applied to " << r["sequence"].get<std::string>() << " ("
      << r["mode"].get<std::string>() << "), all entries exist: " << (r["all_exist"].get<bool>() ? "yes" : "no")
      << "\n";
    for (const auto& row : r["grid"]["values"]) {
      bool first = true;
      for (const auto& v : row) {
        o << (first ? "" : " ") << detail::num(v);
        first = false;
      }
      o << "\n";
    }
  }
  if (!d.timing.is_null()) {
    o << "timing:\n";
    for (const auto& [k, v] : d.timing.items()) o << "  " << k << " " << detail::num(v) << " s\n";
  }
  return o.str();
}

inline std::string render_csv(const ReportDocument& d, const std::string& operation) {
  std::ostringstream o;
  const Json& r = d.results;
  if (operation == "battery") {
    o << "id,status,title,detail\n";
    for (const auto& it : r["items"])
      o << it["id"] << "," << it["status"].get<std::string>() << "," << detail::csv_field(it["title"].get<std::string>())
        << "," << detail::csv_field(it["detail"].get<std::string>()) << "\n";
  } else if (operation == "verdict") {
    o << "mode,decision,M,N,residual\n";
    const Json& v = r["verdict"];
    for (const auto& t : v["residual_trace"])
      o << v["mode"].get<std::string>() << "," << v["decision"].get<std::string>() << "," << t["M"] << "," << t["N"]
        << "," << detail::num(t["residual"]) << "\n";
  } else if (operation == "norm") {
    o << "norm,M,N,value\n";
    for (const auto& n : r["norms"])
      for (const auto& s : n["stages"])
        o << n["norm"].get<std::string>() << "," << s["M"] << "," << s["N"] << "," << detail::num(s["value"]) << "\n";
  } else if (operation == "check" || operation == "dual") {
    o << "class_id,condition_id,verdict,M,N,residual\n";
    detail::csv_class(o, r["report"]);
  } else if (operation == "transform") {
    o << "m,n,value\n";
    const auto& rows = r["grid"]["values"];
    for (std::size_t m = 0; m < rows.size(); ++m)
      for (std::size_t n = 0; n < rows[m].size(); ++n) o << m << "," << n << "," << detail::num(rows[m][n]) << "\n";
  }
  return o.str();
}

inline std::string render(const ReportDocument& d, const std::string& operation, const std::string& format) {
  if (format == "json") return d.to_json().dump(2) + "\n";
  if (format == "csv") return render_csv(d, operation);
  return render_text(d, operation);
}

}  // namespace dsum
