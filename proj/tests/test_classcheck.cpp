#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsum/classcheck.hpp"
#include "dsum/corpus.hpp"
#include "oracles.hpp"

using namespace dsum;

namespace {

const BParams kParams(2, -1, 3, -1);

const ConditionReport& cond(const ClassReport& r, const std::string& id) {
  for (const auto& c : r.conditions)
    if (c.condition_id == id) return c;
  throw std::runtime_error("no condition " + id + " in " + r.class_id);
}

Scalar constant(const ConditionReport& c, const std::string& key) {
  for (const auto& [k, v] : c.constants)
    if (k == key) return v;
  throw std::runtime_error("no constant " + key + " in " + c.condition_id);
}

ConditionReport with(Outcome o) {
  ConditionReport c;
  c.verdict = o;
  return c;
}

FourDimMatrix random_kernel(std::uint64_t seed, bool triangular) {
  return FourDimMatrix(
      [seed](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
        std::mt19937_64 g(seed ^ (((m * 131 + n) * 131 + k) * 131 + l));
        return std::uniform_real_distribution<Scalar>(-1.0, 1.0)(g);
      },
      triangular, "random");
}

}  // namespace

TEST(Outcome, OverallOf) {
  using O = Outcome;
  EXPECT_EQ(overall_of({}), O::pass);
  EXPECT_EQ(overall_of({with(O::pass), with(O::pass)}), O::pass);
  EXPECT_EQ(overall_of({with(O::pass), with(O::inconclusive)}), O::inconclusive);
  EXPECT_EQ(overall_of({with(O::inconclusive), with(O::fail), with(O::pass)}), O::fail);
  EXPECT_EQ(outcome_of(Decision::converges), O::pass);
  EXPECT_EQ(outcome_of(Decision::diverges), O::fail);
  EXPECT_EQ(outcome_of(Decision::inconclusive), O::inconclusive);
}

TEST(Outcome, OverallIsFailIffAnyFails) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    std::vector<ConditionReport> cs(rng() % 6);
    bool any_fail = false, all_pass = true;
    for (auto& c : cs) {
      c.verdict = static_cast<Outcome>(rng() % 3);
      any_fail = any_fail || c.verdict == Outcome::fail;
      all_pass = all_pass && c.verdict == Outcome::pass;
    }
    const Outcome o = overall_of(cs);
    EXPECT_EQ(o == Outcome::fail, any_fail);
    EXPECT_EQ(o == Outcome::pass, all_pass);
  }
}

TEST(IndexSets, CountInRectangle) {
  EXPECT_EQ(count_in_rectangle(diagonal_set(), 0, 0, 5, 5), 5u);
  EXPECT_EQ(count_in_rectangle(diagonal_set(), 10, 0, 5, 5), 0u);
  EXPECT_EQ(count_in_rectangle(full_set(), 3, 4, 5, 6), 30u);
  EXPECT_EQ(count_in_rectangle(first_column_set(), 0, 0, 4, 7), 4u);
}

TEST(ZeroDensity, Examples) {
  EXPECT_EQ(zero_density_check(diagonal_set()).verdict, Outcome::pass);
  EXPECT_EQ(zero_density_check(first_column_set()).verdict, Outcome::pass);
  EXPECT_EQ(zero_density_check(full_set()).verdict, Outcome::fail);
}

TEST(ZeroDensity, DiagonalTrendIsOneOverSide) {
  const auto z = zero_density_check(diagonal_set());
  for (const auto& t : z.trend) EXPECT_NEAR(t.residual, 1.0 / static_cast<Scalar>(t.stage.M + 1), 1e-15);
}

TEST(ZeroDensity, UnsupportedSetIsRejectedByClassChecks) {
  EXPECT_THROW(check_strong_to_bp(identity_kernel(), {full_set()}), Error);
  EXPECT_THROW(check_strong_almost_to_almost(identity_kernel(), {full_set()}), Error);
}

TEST(Deltas, MatchOracle) {
  for (const bool tri : {true, false}) {
    const auto A = random_kernel(tri ? 5 : 6, tri);
    const oracle::Kernel ak = [&](std::size_t m, std::size_t n, std::size_t k, std::size_t l) { return A(m, n, k, l); };
    for (std::size_t m = 0; m < 5; ++m)
      for (std::size_t n = 0; n < 5; ++n)
        for (std::size_t k = 0; k < 6; ++k)
          for (std::size_t l = 0; l < 6; ++l) {
            EXPECT_EQ(delta11(A, m, n, k, l), oracle::delta11(ak, m, n, k, l));
            EXPECT_NEAR(delta10(A, m, n, k, l) - delta10(A, m, n, k, l + 1), delta11(A, m, n, k, l), 1e-14);
            EXPECT_EQ(delta01(A, m, n, k, l), A(m, n, k, l) - A(m, n, k, l + 1));
          }
  }
}

TEST(Deltas, MatrixWindowMean) {
  const auto C = cesaro_kernel();
  // Rows m in [2,4], n in [0,1] of column (0,0): mean of 1/((m+1)(n+1)).
  Scalar s = 0.0;
  for (std::size_t m = 2; m <= 4; ++m)
    for (std::size_t n = 0; n <= 1; ++n) s += oracle::cesaro_entry(m, n, 0, 0);
  EXPECT_NEAR(matrix_window_mean(C, 0, 0, {2, 0, 2, 1}), s / 6.0, 1e-15);
}

TEST(ClassSuites, IdentityIsCbpRegular) {
  const auto r = check_cbp_regular(identity_kernel());
  EXPECT_EQ(r.overall, Outcome::pass);
  EXPECT_EQ(r.class_id, "cbp-regular");
  EXPECT_EQ(r.kernel, "Identity");
  EXPECT_EQ(constant(cond(r, "row-sum-limit"), "v"), 1.0);
}

TEST(ClassSuites, IdentityFailsStrongAlmostToAlmost) {
  const auto r = check_strong_almost_to_almost(identity_kernel());
  EXPECT_EQ(r.overall, Outcome::fail);
  const auto& c = cond(r, "delta11-on-diagonal");
  EXPECT_EQ(c.verdict, Outcome::fail);
  // At m = n the diagonal carries Delta11 = 1 at k = m and at k = m-1.
  const oracle::Kernel id = oracle::identity_entry;
  for (const auto& t : c.trend) {
    Scalar s = 0.0;
    for (std::size_t k = 0; k <= t.stage.M; ++k) s += oracle::delta11(id, t.stage.M, t.stage.M, k, k);
    EXPECT_EQ(s, 2.0);
    EXPECT_EQ(t.residual, 2.0);
  }
}

TEST(ClassSuites, IdentityIsNotStronglyRegular) {
  EXPECT_NE(check_strongly_regular(identity_kernel()).overall, Outcome::pass);
  const auto r = check_strong_to_bp(identity_kernel());
  EXPECT_EQ(r.overall, Outcome::fail);
  EXPECT_EQ(cond(r, "delta10-on-diagonal").verdict, Outcome::fail);
}

TEST(ClassSuites, ZeroKernelIsNotRegular) {
  const auto r = check_cbp_regular(zero_kernel());
  EXPECT_EQ(r.overall, Outcome::fail);
  EXPECT_EQ(cond(r, "row-sum-limit").verdict, Outcome::fail);
  EXPECT_EQ(cond(r, "row-abs-sums-bounded").verdict, Outcome::pass);
}

TEST(ClassSuites, CesaroColumnLimitTrendMatchesOracle) {
  const auto r = check_cbp_regular(cesaro_kernel());
  const auto& c = cond(r, "column-limits");
  ASSERT_EQ(c.trend.size(), 3u);
  for (const auto& t : c.trend) {
    Scalar best = 0.0;
    for (std::size_t m = t.stage.M / 2; m <= t.stage.M; ++m)
      for (std::size_t n = t.stage.N / 2; n <= t.stage.N; ++n) best = std::max(best, oracle::cesaro_entry(m, n, 0, 0));
    EXPECT_DOUBLE_EQ(t.residual, best);
  }
  // 1/((floor(M/2)+1)^2) at side 32.
  EXPECT_DOUBLE_EQ(c.trend.back().residual, 1.0 / 256.0);
  EXPECT_EQ(cond(r, "row-sum-limit").verdict, Outcome::pass);
  EXPECT_NEAR(constant(cond(r, "row-abs-sums-bounded"), "sup"), 1.0, 1e-12);
}

TEST(ClassSuites, CesaroNeverFails) {
  const auto C = cesaro_kernel();
  for (const auto& r : {check_cbp_regular(C), check_almost_regular(C), check_strongly_regular(C),
                        check_strong_almost_to_almost(C), check_almost_conservative(C)})
    EXPECT_NE(r.overall, Outcome::fail) << r.class_id;
}

TEST(ClassSuites, CfToMu) {
  const auto r = check_Cf_to_Mu(cesaro_kernel());
  EXPECT_EQ(r.overall, Outcome::pass);
  EXPECT_EQ(r.class_id, "Cf-to-Mu");
}

TEST(BDomainClasses, IdentityExamples) {
  const auto I = identity_kernel();
  EXPECT_EQ(check_B_domain_class(I, kParams, "BSCf_to_Mu").overall, Outcome::pass);
  EXPECT_EQ(check_B_domain_class(I, kParams, "SCf_to_BMu").overall, Outcome::pass);
  EXPECT_EQ(check_B_domain_class(I, kParams, "BSCf_to_Cf").overall, Outcome::fail);
  EXPECT_EQ(check_B_domain_class(I, kParams, "SCf_to_BCbp").overall, Outcome::fail);
  EXPECT_EQ(check_B_domain_class(I, kParams, "BSCf_to_Cf").class_id, "BSCf_to_Cf");
  EXPECT_THROW(check_B_domain_class(I, kParams, "nope"), Error);
  EXPECT_EQ(b_domain_class_ids().size(), 5u);
}

TEST(BDomainClasses, GOfIdentityRowSumIsB) {
  // G(I) = B: away from the axes a row holds all four entries of B.
  const auto r = check_B_domain_class(identity_kernel(), kParams, "SCf_to_BMu");
  const Scalar want = std::abs(kParams.r() * kParams.t()) + std::abs(kParams.s() * kParams.t()) +
                      std::abs(kParams.r() * kParams.u()) + std::abs(kParams.s() * kParams.u());
  EXPECT_NEAR(constant(cond(r, "row-abs-sums-bounded"), "sup"), want, 1e-12);
}

TEST(Duals, ImpulseIsInBetaDual) {
  const auto r = beta_dual_report(corpus("impulse"), kParams);
  EXPECT_EQ(r.overall, Outcome::pass);
  ASSERT_EQ(r.conditions.size(), 7u);
  EXPECT_NEAR(constant(cond(r, "d1"), "sup"), oracle::d1_row(corpus("impulse"), kParams, 0, 0), 1e-15);
  EXPECT_NEAR(constant(cond(r, "d1"), "sup"), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(constant(cond(r, "d2"), "beta[0,0]"), 1.0);
}

TEST(Duals, ConstantIsNotInBetaDual) {
  const auto r = beta_dual_report(corpus("e"), kParams);
  EXPECT_EQ(r.overall, Outcome::fail);
  EXPECT_EQ(cond(r, "d1").verdict, Outcome::fail);
  Scalar best = 0.0;
  for (std::size_t m = 0; m < 32; m += 31)
    for (std::size_t n = 0; n < 32; n += 31) best = std::max(best, oracle::d1_row(corpus("e"), kParams, m, n));
  EXPECT_NEAR(constant(cond(r, "d1"), "sup"), best, 1e-9 * best);
}

TEST(Duals, D1SupMatchesOracleOnRandomSequence) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<Scalar> u(-1, 1);
  Grid g(12, 12);
  for (std::size_t k = 0; k < 12; ++k)
    for (std::size_t l = 0; l < 12; ++l) g(k, l) = u(rng) * std::ldexp(1.0, -static_cast<int>(k + l));
  const DoubleSequence a([g](std::size_t k, std::size_t l) { return k < 12 && l < 12 ? g(k, l) : 0.0; }, "random");
  const auto sched = TruncationSchedule::from_sides({4, 8, 12});
  const auto c = dual_membership(a, "d1", kParams, sched);
  Scalar best = 0.0;
  for (std::size_t m = 0; m < 12; ++m)
    for (std::size_t n = 0; n < 12; ++n) best = std::max(best, oracle::d1_row(a, kParams, m, n));
  EXPECT_NEAR(constant(c, "sup"), best, 1e-12);
}

TEST(Duals, AlphaOfGeometric) {
  const DoubleSequence geo([](std::size_t k, std::size_t l) { return std::ldexp(1.0, -static_cast<int>(k + l)); }, "geo");
  const auto c = dual_membership(geo, "alpha", kParams);
  EXPECT_EQ(c.verdict, Outcome::pass);
  Scalar s = 0.0;
  for (std::size_t k = 0; k < 32; ++k)
    for (std::size_t l = 0; l < 32; ++l) s += geo(k, l);
  EXPECT_NEAR(constant(c, "l1_sum"), s, 1e-12);
  EXPECT_EQ(dual_membership(corpus("e"), "alpha", kParams).verdict, Outcome::fail);
}

TEST(Duals, GammaOfImpulse) {
  const auto r = gamma_dual_report(corpus("impulse"), kParams);
  EXPECT_EQ(r.overall, Outcome::pass);
  EXPECT_EQ(r.class_id, "gamma-dual");
}

TEST(Duals, UnknownSetRejected) {
  EXPECT_THROW(dual_membership(corpus("e"), "d8", kParams), Error);
  EXPECT_EQ(dual_set_ids().size(), 8u);
}
