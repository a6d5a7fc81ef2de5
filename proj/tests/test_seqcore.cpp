#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsum/corpus.hpp"
#include "dsum/seqcore.hpp"
#include "oracles.hpp"

using namespace dsum;

namespace {

DoubleSequence random_sequence(std::uint64_t seed, Scalar scale = 1.0) {
  return DoubleSequence(
      [seed, scale](std::size_t k, std::size_t l) {
        std::mt19937_64 g(seed ^ (k * 1000003ULL + l * 7919ULL));
        return scale * std::uniform_real_distribution<Scalar>(-1.0, 1.0)(g);
      },
      "random");
}

DoubleSequence integer_sequence(std::uint64_t seed) {
  return DoubleSequence(
      [seed](std::size_t k, std::size_t l) {
        std::mt19937_64 g(seed ^ (k * 1000003ULL + l * 7919ULL));
        return static_cast<Scalar>(static_cast<int>(g() % 201) - 100);
      },
      "integers");
}

}  // namespace

TEST(Truncation, RejectsEmptyGrids) {
  EXPECT_THROW(Truncation(0, 3), Error);
  EXPECT_THROW((void)Truncation::square(1), Error);
  EXPECT_EQ(Truncation::square(8), Truncation(7, 7));
}

TEST(Window, Cardinality) {
  EXPECT_EQ((Window{3, 4, 0, 0}.cardinality()), 1u);
  EXPECT_EQ((Window{0, 0, 2, 4}.cardinality()), 15u);
}

TEST(DoubleSequence, EvaluationIsDeterministic) {
  const auto x = corpus("bx-alt-col", BParams(2, -1, 3, 1));
  for (std::size_t k = 0; k < 20; ++k)
    for (std::size_t l = 0; l < 20; ++l) EXPECT_EQ(std::bit_cast<std::uint64_t>(x(k, l)), std::bit_cast<std::uint64_t>(x(k, l)));
}

TEST(SupAbs, Examples) {
  EXPECT_EQ(sup_abs(corpus("e"), Truncation(10, 10)).value, 1.0);
  EXPECT_EQ(sup_abs(corpus("boos"), Truncation(10, 10)).value, 10.0);
  const DoubleSequence x([](std::size_t k, std::size_t l) { return static_cast<Scalar>(k) * (l % 2 ? -1.0 : 1.0); });
  EXPECT_EQ(sup_abs(x, Truncation(50, 50)).value, 50.0);
}

TEST(SupAbs, MonotoneInTruncation) {
  const auto x = random_sequence(3);
  Scalar prev = 0.0;
  for (std::size_t s = 2; s < 30; s += 3) {
    const Scalar v = sup_abs(x, Truncation::square(s)).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(WindowMean, Examples) {
  EXPECT_EQ(window_mean(corpus("e"), {3, 5, 4, 2}), 1.0);
  EXPECT_EQ(window_mean(corpus("alt-col"), {0, 0, 0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(window_mean(corpus("alt-col"), {0, 0, 0, 2}), 1.0 / 3.0);
}

TEST(WindowMean, SingleCellIsPointEvaluation) {
  const auto x = random_sequence(11);
  for (std::size_t k = 0; k < 12; ++k)
    for (std::size_t l = 0; l < 12; ++l) EXPECT_EQ(window_mean(x, {k, l, 0, 0}), x(k, l));
}

TEST(AbsWindowMean, Examples) {
  EXPECT_EQ(abs_window_mean(corpus("e"), {2, 2, 3, 3}, 1.0), 0.0);
  EXPECT_EQ(abs_window_mean(corpus("alt-col"), {0, 0, 0, 1}, 0.0), 1.0);
  EXPECT_EQ(abs_window_mean(corpus("alt-col"), {0, 0, 0, 1}, 1.0), 1.0);
}

TEST(AbsWindowMean, DominatesDeviationOfMean) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> idx(0, 20);
  std::uniform_real_distribution<Scalar> lim(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const auto x = random_sequence(rng());
    const Window w{idx(rng), idx(rng), idx(rng) % 6, idx(rng) % 6};
    const Scalar L = lim(rng);
    EXPECT_LE(std::abs(window_mean(x, w) - L), abs_window_mean(x, w, L) + 1e-15);
  }
}

TEST(PrefixSum2D, MatchesDirectWindowSums) {
  const auto x = random_sequence(17);
  const Grid g = Grid::sample(x, 12, 9);
  const PrefixSum2D ps(g);
  for (std::size_t m = 0; m < 12; m += 2)
    for (std::size_t n = 0; n < 9; ++n)
      for (std::size_t q = 0; m + q < 12; q += 3)
        for (std::size_t qp = 0; n + qp < 9; qp += 2)
          EXPECT_NEAR(ps.window_mean({m, n, q, qp}), oracle::window_mean(x, m, n, q, qp), 1e-14);
}

TEST(Norms, Examples) {
  const Truncation tr(4, 4);
  EXPECT_EQ(norm_Cf(corpus("e"), tr).value, 1.0);
  EXPECT_EQ(norm_Cf(corpus("alt-col"), tr).value, 1.0);
  EXPECT_EQ(norm_Cf(corpus("alt-col"), tr).argmax.qp, 0u);
  EXPECT_EQ(norm_Cf(corpus("zero"), tr).value, 0.0);
  EXPECT_EQ(norm_strong(corpus("e"), tr).value, 1.0);
  EXPECT_EQ(norm_strong(corpus("alt-col"), tr).value, 1.0);
  EXPECT_EQ(norm_strong(corpus("zero"), tr).value, 0.0);
}

TEST(Norms, MatchExhaustiveScan) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto x = random_sequence(100 + s);
    const Truncation tr(7, 5);
    EXPECT_NEAR(norm_Cf(x, tr).value, oracle::window_sup(x, 7, 5, false), 1e-14);
    EXPECT_NEAR(norm_strong(x, tr).value, oracle::window_sup(x, 7, 5, true), 1e-14);
  }
}

TEST(Norms, OrderedCfStrongSup) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = random_sequence(200 + s, 3.0);
    const Truncation tr(9, 6);
    const Scalar a = norm_Cf(x, tr).value, b = norm_strong(x, tr).value, c = sup_abs(x, tr).value;
    EXPECT_LE(a, b + 1e-14);
    EXPECT_LE(b, c + 1e-14);
  }
}

TEST(Norms, Homogeneous) {
  const auto x = integer_sequence(7);
  const Truncation tr(8, 8);
  for (const Scalar c : {-2.0, 0.5, 4.0}) {
    const auto y = x.scaled(c);
    EXPECT_EQ(sup_abs(y, tr).value, std::abs(c) * sup_abs(x, tr).value);
    EXPECT_NEAR(norm_Cf(y, tr).value, std::abs(c) * norm_Cf(x, tr).value, 1e-12);
    EXPECT_NEAR(norm_strong(y, tr).value, std::abs(c) * norm_strong(x, tr).value, 1e-12);
  }
}

TEST(Norms, MonotoneInTruncation) {
  const auto x = random_sequence(9);
  Scalar pc = 0.0, ps = 0.0;
  for (std::size_t s = 2; s <= 14; s += 4) {
    const Scalar c = norm_Cf(x, Truncation::square(s)).value, st = norm_strong(x, Truncation::square(s)).value;
    EXPECT_GE(c, pc);
    EXPECT_GE(st, ps);
    pc = c;
    ps = st;
  }
}

TEST(Norms, ArgmaxIsFirstInLexicographicOrder) {
  // Every window of e has mean 1; the first one scanned is (q,qp,m,n) = 0.
  const auto r = norm_Cf(corpus("e"), Truncation(5, 5));
  EXPECT_EQ(r.argmax, (Window{0, 0, 0, 0}));
}

TEST(LqNorm, Examples) {
  const DoubleSequence geo([](std::size_t k, std::size_t l) { return std::ldexp(1.0, -static_cast<int>(k + l)); });
  EXPECT_NEAR(lq_norm(geo, Truncation(60, 60), 1.0), 4.0, 1e-12);
  EXPECT_EQ(lq_norm(corpus("zero"), Truncation(5, 5), 2.0), 0.0);
  EXPECT_EQ(lq_norm(corpus("e"), Truncation(9, 9), 1.0), 100.0);
  EXPECT_THROW(lq_norm(corpus("e"), Truncation(3, 3), 0.5), Error);
}

TEST(LqNorm, NonDecreasingInTruncation) {
  const auto x = random_sequence(23);
  Scalar prev = 0.0;
  for (std::size_t s = 2; s < 20; s += 2) {
    const Scalar v = lq_norm(x, Truncation::square(s), 2.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(PartialSums, Examples) {
  const auto imp = partial_sums(corpus("impulse"));
  const auto e = partial_sums(corpus("e"));
  const auto alt = partial_sums(corpus("alt-diag"));
  for (std::size_t m = 0; m < 15; ++m)
    for (std::size_t n = 0; n < 15; ++n) {
      EXPECT_EQ(imp(m, n), 1.0);
      EXPECT_EQ(e(m, n), static_cast<Scalar>((m + 1) * (n + 1)));
      EXPECT_TRUE(alt(m, n) == 0.0 || alt(m, n) == 1.0);
    }
}

TEST(PartialSums, SecondDifferenceRecoversSourceExactly) {
  const auto x = integer_sequence(31);
  const auto s = partial_sums(x);
  for (std::size_t m = 1; m < 40; ++m)
    for (std::size_t n = 1; n < 40; ++n) EXPECT_EQ(s(m, n) - s(m - 1, n) - s(m, n - 1) + s(m - 1, n - 1), x(m, n));
}

TEST(PartialSums, CacheGrowthKeepsValues) {
  const auto x = integer_sequence(41);
  const auto s = partial_sums(x);
  const Scalar early = s(3, 4);
  (void)s(70, 90);
  EXPECT_EQ(s(3, 4), early);
  const auto copy = s;
  EXPECT_EQ(copy(70, 90), s(70, 90));
}

TEST(Corpus, PointValues) {
  EXPECT_EQ(corpus("boos")(0, 7), 7.0);
  EXPECT_EQ(corpus("boos")(3, 7), 0.0);
  EXPECT_EQ(corpus("checkerboard")(2, 4), 1.0);
  EXPECT_EQ(corpus("checkerboard")(2, 3), 0.0);
  EXPECT_EQ(corpus("alt-col")(5, 3), -1.0);
  const BParams p(2, -1, 4, 3);
  EXPECT_EQ(corpus("k-over-rt", p)(6, 1), 6.0 / 8.0);
  EXPECT_EQ(corpus("k-alt-over-rt", p)(6, 1), -6.0 / 8.0);
}

TEST(Corpus, Errors) {
  EXPECT_THROW(corpus("nope"), Error);
  EXPECT_THROW(corpus("k-over-rt"), Error);
  for (const auto& e : corpus_entries())
    if (!e.needs_params) EXPECT_NO_THROW(corpus(e.key));
}

TEST(Corpus, BxAltColHasAlternatingTransform) {
  const BParams p(2, -1, 3, 1);
  const auto x = corpus("bx-alt-col", p);
  for (std::size_t m = 0; m < 30; ++m)
    for (std::size_t n = 0; n < 30; ++n) EXPECT_NEAR(oracle::b_apply(x, p, m, n), n % 2 ? -1.0 : 1.0, 1e-12);
}
