#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is discarded.
Run run(const std::string& args) {
  const std::string cmd = std::string("'") + DSUM_CLI_PATH + "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("dsum_test_" + std::to_string(::getpid()) + "_" + name);
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("verdict --corpus nope").code, 2);
  EXPECT_EQ(run("verdict --format xml").code, 2);
  EXPECT_EQ(run("verdict --expr 'k +'").code, 2);
  EXPECT_EQ(run("transform --corpus e --kernel B").code, 2);
  EXPECT_EQ(run("verdict --corpus e --sizes 8,16").code, 2);
  EXPECT_EQ(run("verdict --corpus e --decision-tol 1e-12").code, 2);
  EXPECT_EQ(run("verdict --config /nonexistent/file.ini").code, 2);
}

TEST(Cli, ConfigParseErrorExitsTwo) {
  const auto path = temp_file("bad.ini", "[run]\nfoo = 1\n");
  EXPECT_EQ(run("verdict --config '" + path.string() + "'").code, 2);
  std::filesystem::remove(path);
}

TEST(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run("--help").code, 0);
  const auto v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("1.0.0"), std::string::npos);
}

TEST(Cli, JsonDocumentShape) {
  const auto r = run("verdict --corpus e --target Cf --sizes 4,8,12");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::ordered_json::parse(r.out);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"config", "version", "results", "timing"}));
  EXPECT_TRUE(j["timing"].is_null());
  EXPECT_EQ(j["results"]["verdict"]["decision"], "converges");
  EXPECT_EQ(j["results"]["verdict"]["candidate_limit"], 1.0);
  EXPECT_EQ(j["config"]["schedule"]["sizes"], nlohmann::json({4, 8, 12}));
}

TEST(Cli, TimingIsOptIn) {
  const auto j = nlohmann::json::parse(run("norm --corpus e --target sup --sizes 4,8,12 --timing").out);
  EXPECT_TRUE(j["timing"].is_object());
}

TEST(Cli, VerdictOnAltColumns) {
  const auto r = run("verdict --corpus alt-col --target SCf --format csv");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"mode", "decision", "M", "N", "residual"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][1], "diverges");
    EXPECT_EQ(std::strtod(rows[i][4].c_str(), nullptr), 1.0);
  }
}

TEST(Cli, TransformOfConstantUnderB) {
  // (Bx)_{mn} for x = e and B(1,-1,1,-1) is 1 at the origin and 0 elsewhere.
  const auto r = run("transform --corpus e --kernel B --params 1,-1,1,-1 --sizes 4,6,8 --format csv");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1u + 64u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool origin = rows[i][0] == "0" && rows[i][1] == "0";
    EXPECT_EQ(std::strtod(rows[i][2].c_str(), nullptr), origin ? 1.0 : 0.0) << rows[i][0] << "," << rows[i][1];
  }
}

TEST(Cli, TransformOfKOverRtVanishesOffAxes) {
  const auto r = run("transform --corpus k-over-rt --kernel B --params 2,-2,3,-3 --sizes 8,16,32 --format csv");
  ASSERT_EQ(r.code, 0);
  for (const auto& row : csv_rows(r.out)) {
    if (row[0] == "m" || row[0] == "0" || row[1] == "0") continue;
    EXPECT_EQ(std::strtod(row[2].c_str(), nullptr), 0.0) << row[0] << "," << row[1];
  }
}

TEST(Cli, CsvUsesSeventeenDigits) {
  const auto r = run("transform --expr '1/(k+l+3)' --kernel Identity --sizes 2,3,4 --format csv");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[1][2], "0.33333333333333331");
}

TEST(Cli, OutputFileHoldsCsv) {
  const auto path = std::filesystem::temp_directory_path() / ("dsum_test_" + std::to_string(::getpid()) + ".csv");
  const auto r = run("norm --corpus e --target sup --sizes 4,8,12 --output '" + path.string() + "'");
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "norm,M,N,value");
  std::filesystem::remove(path);
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const auto path = temp_file("ok.ini", "[run]\noperation = norm\ntarget = sup\nformat = csv\n\n[sequence]\ncorpus = boos\n\n"
                                        "[schedule]\nsizes = 4, 8, 16\n");
  const auto a = run("norm --config '" + path.string() + "'");
  ASSERT_EQ(a.code, 0);
  const auto rows = csv_rows(a.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows.back(), (std::vector<std::string>{"sup", "15", "15", "15"}));
  const auto b = run("norm --config '" + path.string() + "' --corpus e");
  EXPECT_EQ(csv_rows(b.out).back(), (std::vector<std::string>{"sup", "15", "15", "1"}));
  std::filesystem::remove(path);
}

TEST(Cli, CheckAndDual) {
  const auto c = run("check --kernel Identity --target cbp-regular");
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(nlohmann::json::parse(c.out)["results"]["report"]["overall"], "pass");
  const auto d = run("dual --corpus impulse --params 2,-1,3,-1 --target beta");
  EXPECT_EQ(d.code, 0);
  EXPECT_EQ(nlohmann::json::parse(d.out)["results"]["report"]["overall"], "pass");
}

TEST(Cli, BatteryIsReproducibleAndTightToleranceFails) {
  const auto a = run("battery --format text");
  const auto b = run("battery --format text");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 13);
  EXPECT_NE(a.out.find("passed"), std::string::npos);
  const auto t = run("battery --format csv --decision-tol 1e-12 --exact-tol 1e-13");
  EXPECT_EQ(t.code, 1);
  EXPECT_NE(t.out.find(",FAIL,"), std::string::npos);
}
