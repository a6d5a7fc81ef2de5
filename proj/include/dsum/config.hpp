#pragma once

// Experiment configuration: a sectioned key = value text format.
//
//   [run]        operation, target, format, seed
//   [sequence]   corpus | expr
//   [kernel]     name, base, expr, triangular
//   [params]     r, s, t, u
//   [schedule]   sizes (cells per side, comma separated)
//   [tolerance]  decision, exact, trend_ratio
//   [index_set]  name, centering
//
// Lines starting with '#' or ';' are comments. Unknown sections or keys,
// duplicate keys and malformed values are rejected with line:column.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsum/expr.hpp"
#include "dsum/matrix4d.hpp"
#include "dsum/verdict.hpp"

namespace dsum {

struct ExperimentConfig {
  std::string operation = "verdict";
  std::string target;
  std::string format = "json";
  std::optional<std::uint64_t> seed;

  std::optional<std::string> corpus;
  std::optional<std::string> expr;

  std::optional<std::string> kernel;
  std::optional<std::string> kernel_base;
  std::optional<std::string> kernel_expr;
  std::optional<bool> kernel_triangular;

  std::optional<BParams> params;
  std::vector<std::size_t> sizes;
  ToleranceConfig tol;

  std::optional<std::string> index_set;
  std::optional<std::string> centering;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& operation_ids() {
  static const std::vector<std::string> ids = {"transform", "verdict", "norm", "check", "dual", "battery"};
  return ids;
}

/// Shortest text that parses back to the same double (at most 17 digits).
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Exactly 17 significant digits.
inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double_at(const std::string& v, std::size_t line, std::size_t col) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + v + "'", line, col);
  }
  if (used != v.size()) throw ParseError("trailing characters after number '" + v + "'", line, col + used);
  return d;
}

inline std::uint64_t parse_uint_at(const std::string& v, std::size_t line, std::size_t col) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw ParseError("expected a non-negative integer, got '" + v + "'", line, col);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ParseError("integer out of range: '" + v + "'", line, col);
  }
}

inline std::vector<std::size_t> parse_sizes_at(const std::string& v, std::size_t line, std::size_t col) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const std::size_t end = comma == std::string::npos ? v.size() : comma;
    const std::string item = trim(v.substr(start, end - start));
    const std::size_t lead = v.substr(start, end - start).find_first_not_of(" \t");
    out.push_back(static_cast<std::size_t>(parse_uint_at(item, line, col + start + (lead == std::string::npos ? 0 : lead))));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses a configuration text. Throws ParseError on any problem.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line = 0;
  std::vector<std::string> seen;
  std::optional<double> pr, ps, pt, pu;
  std::size_t params_line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (raw[first] == '#' || raw[first] == ';') continue;
    if (raw[first] == '[') {
      const std::size_t close = raw.find(']', first);
      if (close == std::string::npos) throw ParseError("missing ']'", line, raw.size() + 1);
      if (!detail::trim(raw.substr(close + 1)).empty()) throw ParseError("text after section header", line, close + 2);
      section = detail::trim(raw.substr(first + 1, close - first - 1));
      static const std::vector<std::string> sections = {"run",    "sequence",  "kernel",   "params",
                                                        "schedule", "tolerance", "index_set"};
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw ParseError("unknown section '" + section + "'", line, first + 2);
      continue;
    }
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line, first + 1);
    if (section.empty()) throw ParseError("key outside of any section", line, first + 1);
    const std::string key = detail::trim(raw.substr(first, eq - first));
    const std::size_t vstart = raw.find_first_not_of(" \t", eq + 1);
    const std::string value = vstart == std::string::npos ? std::string{} : detail::trim(raw.substr(vstart));
    const std::size_t vcol = (vstart == std::string::npos ? raw.size() : vstart) + 1;
    const std::string full = section + "." + key;
    if (std::find(seen.begin(), seen.end(), full) != seen.end())
      throw ParseError("duplicate key '" + full + "'", line, first + 1);
    seen.push_back(full);
    auto need_value = [&] {
      if (value.empty()) throw ParseError("empty value for '" + full + "'", line, vcol);
    };
    auto unknown = [&] { throw ParseError("unknown key '" + key + "' in [" + section + "]", line, first + 1); };

    if (section == "run") {
      need_value();
      if (key == "operation") {
        const auto& ops = operation_ids();
        if (std::find(ops.begin(), ops.end(), value) == ops.end())
          throw ParseError("unknown operation '" + value + "'", line, vcol);
        c.operation = value;
      } else if (key == "target") {
        c.target = value;
      } else if (key == "format") {
        if (value != "json" && value != "csv" && value != "text")
          throw ParseError("format must be json, csv or text", line, vcol);
        c.format = value;
      } else if (key == "seed") {
        c.seed = detail::parse_uint_at(value, line, vcol);
      } else {
        unknown();
      }
    } else if (section == "sequence") {
      need_value();
      if (key == "corpus") c.corpus = value;
      else if (key == "expr") {
        parse_expr(value, line, vcol);
        c.expr = value;
      } else unknown();
    } else if (section == "kernel") {
      need_value();
      if (key == "name") c.kernel = value;
      else if (key == "base") c.kernel_base = value;
      else if (key == "expr") {
        parse_expr(value, line, vcol);
        c.kernel_expr = value;
      } else if (key == "triangular") {
        if (value != "true" && value != "false") throw ParseError("triangular must be true or false", line, vcol);
        c.kernel_triangular = value == "true";
      } else unknown();
    } else if (section == "params") {
      need_value();
      params_line = line;
      const double d = detail::parse_double_at(value, line, vcol);
      if (key == "r") pr = d;
      else if (key == "s") ps = d;
      else if (key == "t") pt = d;
      else if (key == "u") pu = d;
      else unknown();
    } else if (section == "schedule") {
      need_value();
      if (key == "sizes") c.sizes = detail::parse_sizes_at(value, line, vcol);
      else unknown();
    } else if (section == "tolerance") {
      need_value();
      const double d = detail::parse_double_at(value, line, vcol);
      if (key == "decision") c.tol.decision_tol = d;
      else if (key == "exact") c.tol.exact_tol = d;
      else if (key == "trend_ratio") c.tol.trend_ratio = d;
      else unknown();
    } else if (section == "index_set") {
      need_value();
      if (key == "name") c.index_set = value;
      else if (key == "centering") {
        if (value != "centered" && value != "literal")
          throw ParseError("centering must be centered or literal", line, vcol);
        c.centering = value;
      } else unknown();
    }
  }
  if (pr || ps || pt || pu) {
    if (!(pr && ps && pt && pu)) throw ParseError("[params] needs all of r, s, t, u", params_line, 1);
    try {
      c.params = BParams(*pr, *ps, *pt, *pu);
    } catch (const Error& e) {
      throw ParseError(e.what(), params_line, 1);
    }
  }
  if (c.corpus && c.expr) throw ParseError("[sequence] takes corpus or expr, not both", line, 1);
  try {
    c.tol.validate();
    if (!c.sizes.empty()) TruncationSchedule::from_sides(c.sizes);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line, 1);
  }
  return c;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[run]\n";
  o << "operation = " << c.operation << "\n";
  if (!c.target.empty()) o << "target = " << c.target << "\n";
  o << "format = " << c.format << "\n";
  if (c.seed) o << "seed = " << *c.seed << "\n";
  if (c.corpus || c.expr) {
    o << "\n[sequence]\n";
    if (c.corpus) o << "corpus = " << *c.corpus << "\n";
    if (c.expr) o << "expr = " << *c.expr << "\n";
  }
  if (c.kernel || c.kernel_base || c.kernel_expr || c.kernel_triangular) {
    o << "\n[kernel]\n";
    if (c.kernel) o << "name = " << *c.kernel << "\n";
    if (c.kernel_base) o << "base = " << *c.kernel_base << "\n";
    if (c.kernel_expr) o << "expr = " << *c.kernel_expr << "\n";
    if (c.kernel_triangular) o << "triangular = " << (*c.kernel_triangular ? "true" : "false") << "\n";
  }
  if (c.params) {
    o << "\n[params]\n";
    o << "r = " << format_double(c.params->r()) << "\n";
    o << "s = " << format_double(c.params->s()) << "\n";
    o << "t = " << format_double(c.params->t()) << "\n";
    o << "u = " << format_double(c.params->u()) << "\n";
  }
  if (!c.sizes.empty()) {
    o << "\n[schedule]\nsizes = ";
    for (std::size_t i = 0; i < c.sizes.size(); ++i) o << (i ? ", " : "") << c.sizes[i];
    o << "\n";
  }
  o << "\n[tolerance]\n";
  o << "decision = " << format_double(c.tol.decision_tol) << "\n";
  o << "exact = " << format_double(c.tol.exact_tol) << "\n";
  o << "trend_ratio = " << format_double(c.tol.trend_ratio) << "\n";
  if (c.index_set || c.centering) {
    o << "\n[index_set]\n";
    if (c.index_set) o << "name = " << *c.index_set << "\n";
    if (c.centering) o << "centering = " << *c.centering << "\n";
  }
  return o.str();
}

}  // namespace dsum
