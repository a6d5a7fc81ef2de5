// dsum: command-line front end.
//
//   dsum <transform|verdict|norm|check|dual|battery> [--config PATH] [flags]
//
// Exit status: 0 success, 1 a battery item failed, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "dsum/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dsum::Error("cannot open config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> split_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (dsum::detail::trim(item.substr(used)).size() != 0) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw dsum::Error(std::string("--") + what + ": malformed number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-sequence summability toolkit", "dsum"};
  app.set_version_flag("--version", dsum::version_string);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, format, corpus, expr, kernel, kernel_base, kernel_expr, params, sizes, target, index_set,
      centering, output;
  std::size_t stage_max = 0;
  std::uint64_t seed = 0;
  double decision_tol = 0, exact_tol = 0, trend_ratio = 0;
  bool timing = false;

  app.add_option("--config", config_path, "Experiment config file");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--stage-max", stage_max, "Drop stages with more cells per side than N")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed for randomized battery items");
  app.add_flag("--timing", timing, "Report wall-clock times");
  app.add_option("--target", target, "Space, class, dual set, norm or convergence mode");
  app.add_option("--corpus", corpus, "Named corpus sequence");
  app.add_option("--expr", expr, "Sequence expression in k, l");
  app.add_option("--kernel", kernel, "Kernel: B, F, Delta, Cesaro, Identity, Zero, D, E, G, expr");
  app.add_option("--base", kernel_base, "Base kernel of E or G");
  app.add_option("--kernel-expr", kernel_expr, "Kernel expression in m, n, k, l");
  app.add_option("--params", params, "B parameters r,s,t,u");
  app.add_option("--sizes", sizes, "Stage sizes (cells per side), comma separated");
  app.add_option("--decision-tol", decision_tol, "Decision tolerance");
  app.add_option("--exact-tol", exact_tol, "Exact tolerance");
  app.add_option("--trend-ratio", trend_ratio, "Required shrink factor between stages");
  app.add_option("--index-set", index_set, "Index set E")->check(CLI::IsMember({"diagonal", "first-column", "full"}));
  app.add_option("--centering", centering, "d6/d7 centering")->check(CLI::IsMember({"centered", "literal"}));
  app.add_option("--output", output, "Also write the CSV rendering to this file");

  for (const auto& op : dsum::operation_ids()) app.add_subcommand(op, "Run the " + op + " operation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    dsum::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = dsum::parse_config(read_file(config_path));
    cfg.operation = app.get_subcommands().front()->get_name();
    if (!format.empty()) cfg.format = format;
    if (app.count("--seed")) cfg.seed = seed;
    if (!target.empty()) cfg.target = target;
    if (!corpus.empty()) {
      cfg.corpus = corpus;
      cfg.expr.reset();
    }
    if (!expr.empty()) {
      dsum::parse_expr(expr);
      cfg.expr = expr;
      cfg.corpus.reset();
    }
    if (!kernel.empty()) cfg.kernel = kernel;
    if (!kernel_base.empty()) cfg.kernel_base = kernel_base;
    if (!kernel_expr.empty()) {
      dsum::parse_expr(kernel_expr);
      cfg.kernel_expr = kernel_expr;
    }
    if (!params.empty()) {
      const auto v = split_numbers(params, "params");
      if (v.size() != 4) throw dsum::Error("--params needs exactly four numbers r,s,t,u");
      cfg.params = dsum::BParams(v[0], v[1], v[2], v[3]);
    }
    if (!sizes.empty()) {
      cfg.sizes.clear();
      for (double d : split_numbers(sizes, "sizes")) {
        if (!(d >= 2.0) || d != static_cast<double>(static_cast<std::size_t>(d)))
          throw dsum::Error("--sizes: each size must be an integer >= 2");
        cfg.sizes.push_back(static_cast<std::size_t>(d));
      }
    }
    if (app.count("--decision-tol")) cfg.tol.decision_tol = decision_tol;
    if (app.count("--exact-tol")) cfg.tol.exact_tol = exact_tol;
    if (app.count("--trend-ratio")) cfg.tol.trend_ratio = trend_ratio;
    if (!index_set.empty()) cfg.index_set = index_set;
    if (!centering.empty()) cfg.centering = centering;

    dsum::RunOptions ro;
    if (stage_max > 0) ro.stage_max = stage_max;
    ro.timing = timing;
    const dsum::ReportDocument doc = dsum::run_config(cfg, ro);
    std::cout << dsum::render(doc, cfg.operation, cfg.format);
    if (!output.empty()) {
      std::ofstream out(output);
      if (!out) throw dsum::Error("cannot write '" + output + "'");
      out << dsum::render_csv(doc, cfg.operation);
    }
    return doc.exit_code;
  } catch (const dsum::ParseError& e) {
    std::cerr << "dsum: parse error at " << e.what() << "\n";
    return 2;
  } catch (const dsum::Error& e) {
    std::cerr << "dsum: " << e.what() << "\n";
    return 2;
  }
}
