#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "dsum/config.hpp"
#include "dsum/expr.hpp"

using namespace dsum;

namespace {

Scalar eval(const std::string& text, Scalar k = 0, Scalar l = 0) {
  ExprEnv env;
  env.k = k;
  env.l = l;
  return parse_expr(text)->eval(env);
}

ParseError parse_error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseError("", 0, 0);
}

}  // namespace

TEST(Expr, Precedence) {
  EXPECT_EQ(eval("1 + 2 * 3"), 7.0);
  EXPECT_EQ(eval("(1 + 2) * 3"), 9.0);
  EXPECT_EQ(eval("2 ^ 3 ^ 2"), 512.0);
  EXPECT_EQ(eval("-2 ^ 2"), -4.0);
  EXPECT_EQ(eval("2 ^ -1"), 0.5);
  EXPECT_EQ(eval("8 / 4 / 2"), 1.0);
  EXPECT_EQ(eval("5 - 3 - 1"), 1.0);
  EXPECT_EQ(eval("1.5e1"), 15.0);
}

TEST(Expr, Variables) {
  EXPECT_EQ(eval("k + 10 * l", 3, 4), 43.0);
  EXPECT_EQ(eval("1/(k+l+1)", 1, 2), 0.25);
}

TEST(Expr, AlternatingSignsAreExact) {
  for (int l = 0; l < 200; ++l) EXPECT_EQ(eval("(-1)^l", 0, l), l % 2 ? -1.0 : 1.0);
  EXPECT_EQ(eval("(-1)^(k+l)", 3, 4), -1.0);
}

TEST(Expr, ParseErrorsCarryColumns) {
  try {
    (void)parse_expr("k + * l");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 5u);
  }
  try {
    (void)parse_expr("k + x", 3, 10);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 14u);
  }
  EXPECT_THROW((void)parse_expr("(k + l"), ParseError);
  EXPECT_THROW((void)parse_expr("k l"), ParseError);
  EXPECT_THROW((void)parse_expr(""), ParseError);
}

TEST(Expr, SequenceAndKernel) {
  const auto x = expr_sequence("k - l");
  EXPECT_EQ(x(7, 2), 5.0);
  EXPECT_THROW(expr_sequence("m + k"), ParseError);
  EXPECT_THROW(expr_sequence("r * k"), Error);
  EXPECT_EQ(expr_sequence("r * k", BParams(2, -1, 3, -1))(4, 0), 8.0);
  const auto A = expr_kernel("1/((m+1)*(n+1))", true);
  EXPECT_EQ(A(1, 1, 0, 1), 0.25);
  EXPECT_EQ(A(1, 1, 2, 0), 0.0);
  EXPECT_TRUE(A.triangular());
}

TEST(Config, ParsesFullFile) {
  const auto c = parse_config(R"(# example
[run]
operation = check
target = cbp-regular
format = text
seed = 7

[sequence]
corpus = e

[kernel]
name = Cesaro

; params
[params]
r = 2
s = -1
t = 3
u = -1

[schedule]
sizes = 8, 16, 32

[tolerance]
decision = 1e-4
exact = 1e-10
trend_ratio = 0.5

[index_set]
name = diagonal
centering = literal
)");
  EXPECT_EQ(c.operation, "check");
  EXPECT_EQ(c.target, "cbp-regular");
  EXPECT_EQ(c.format, "text");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.corpus, "e");
  EXPECT_EQ(c.kernel, "Cesaro");
  EXPECT_EQ(c.params, BParams(2, -1, 3, -1));
  EXPECT_EQ(c.sizes, (std::vector<std::size_t>{8, 16, 32}));
  EXPECT_EQ(c.tol.decision_tol, 1e-4);
  EXPECT_EQ(c.tol.trend_ratio, 0.5);
  EXPECT_EQ(c.index_set, "diagonal");
  EXPECT_EQ(c.centering, "literal");
}

TEST(Config, Defaults) {
  const auto c = parse_config("[run]\noperation = battery\n");
  EXPECT_EQ(c.format, "json");
  EXPECT_FALSE(c.seed);
  EXPECT_EQ(c.tol, ToleranceConfig{});
  EXPECT_EQ(parse_config(""), ExperimentConfig{});
}

TEST(Config, StrictRejections) {
  EXPECT_EQ(parse_error_of("[run]\nfoo = 1\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[run]\noperation = verdict\n[bogus]\n").line(), 3u);
  EXPECT_EQ(parse_error_of("[run]\nformat = json\nformat = csv\n").line(), 3u);
  EXPECT_EQ(parse_error_of("[run]\nformat = xml\n").column(), 10u);
  EXPECT_EQ(parse_error_of("[run]\noperation = fly\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[run]\nseed = -3\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[run]\nformat =\n").line(), 2u);
  EXPECT_EQ(parse_error_of("operation = verdict\n").line(), 1u);
  EXPECT_EQ(parse_error_of("[run\n").line(), 1u);
  EXPECT_EQ(parse_error_of("[run]\njust text\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[params]\nr = 2\ns = 1\nt = 3\n").line(), 4u);
  EXPECT_EQ(parse_error_of("[params]\nr = 0\ns = 1\nt = 3\nu = 1\n").line(), 5u);
  EXPECT_EQ(parse_error_of("[tolerance]\ndecision = 0.5x\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[tolerance]\ndecision = 1e-12\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[schedule]\nsizes = 8, 16\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[sequence]\ncorpus = e\nexpr = k\n").line(), 3u);
  EXPECT_EQ(parse_error_of("[sequence]\nexpr = k +\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[kernel]\ntriangular = yes\n").line(), 2u);
  EXPECT_EQ(parse_error_of("[index_set]\ncentering = middle\n").line(), 2u);
}

TEST(Config, ExprErrorColumnPointsIntoValue) {
  const auto e = parse_error_of("[sequence]\nexpr = k + * l\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.column(), 12u);
}

TEST(Config, TrailingCommentsAreNotStripped) {
  EXPECT_EQ(parse_error_of("[run]\nformat = json # comment\n").line(), 2u);
  EXPECT_NO_THROW(parse_config("  # indented comment\n[run]\n; other\nformat = json\n"));
}

TEST(Config, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-3), "0.001");
  EXPECT_EQ(format_double(-2.0), "-2");
  EXPECT_EQ(format17(0.1), "0.10000000000000001");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Scalar v = std::bit_cast<Scalar>(rng() & 0x7FEFFFFFFFFFFFFFULL);
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    EXPECT_EQ(std::strtod(format17(v).c_str(), nullptr), v);
  }
}

TEST(Config, RoundTripRandomized) {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<Scalar> u(0.05, 3.0);
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  auto maybe = [&] { return rng() % 2 == 0; };
  for (int i = 0; i < 500; ++i) {
    ExperimentConfig c;
    c.operation = pick(operation_ids());
    if (maybe()) c.target = pick({"Cf", "SCf0", "cbp-regular", "d3", "sup"});
    c.format = pick({"json", "csv", "text"});
    if (maybe()) c.seed = rng();
    if (maybe()) c.corpus = pick({"e", "boos", "alt-col"});
    else if (maybe()) c.expr = pick({"(-1)^l", "1/(k+l+1)", "k*r/(r*t)"});
    if (maybe()) c.kernel = pick({"Cesaro", "B", "E"});
    if (maybe()) c.kernel_base = pick({"Identity", "Cesaro"});
    if (maybe()) c.kernel_expr = "1/((m+1)*(n+1))";
    if (maybe()) c.kernel_triangular = maybe();
    if (maybe()) c.params = BParams(u(rng), -u(rng), u(rng), -u(rng));
    if (maybe()) {
      std::size_t s = 2 + rng() % 10;
      for (int j = 0; j < 3 + static_cast<int>(rng() % 3); ++j) c.sizes.push_back(s += 1 + rng() % 40);
    }
    c.tol.decision_tol = std::ldexp(u(rng), -12);
    c.tol.exact_tol = c.tol.decision_tol * std::ldexp(u(rng), -20);
    c.tol.trend_ratio = u(rng) / 3.01;
    if (maybe()) c.index_set = pick({"diagonal", "first-column"});
    if (maybe()) c.centering = pick({"centered", "literal"});
    const std::string text = serialize_config(c);
    EXPECT_EQ(parse_config(text), c) << text;
    EXPECT_EQ(serialize_config(parse_config(text)), text);
  }
}
