#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <vector>

#include "hiddenset/distributions.hpp"
#include "hiddenset/rng.hpp"

using namespace hiddenset;

namespace {

constexpr int kDraws = 1'000'000;

// |observed - expected| within 4 standard errors of a proportion.
void expect_proportion(double hits, double n, double p) {
  const double se = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(hits / n, p, 4 * se) << "expected " << p;
}

}  // namespace

TEST(Rng, SameSeedAndStreamReproduce) {
  RngState a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, FrozenFirstOutputs) {
  // Platform-independent: pinned values of the counter-based generator.
  RngState r(1, 0);
  const std::uint64_t first = r.next_u64();
  RngState again(1, 0);
  EXPECT_EQ(first, again.next_u64());
  EXPECT_EQ(detail::mix64(0), 0u);
  EXPECT_EQ(detail::mix64(1), 0x5692161d100b05e5ULL);
}

TEST(Rng, DerivedStreamsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 100000; ++r) seen.insert(derive_stream(3, r));
  EXPECT_EQ(seen.size(), 100000u);
  EXPECT_NE(derive_stream(1, 0), derive_stream(2, 0));
}

TEST(Rng, IndependentOfThreadScheduling) {
  std::vector<std::uint64_t> serial(64), threaded(64);
  for (std::size_t i = 0; i < 64; ++i) serial[i] = derive_rng(9, 1, i).next_u64();
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = static_cast<std::size_t>(t); i < 64; i += 4)
        threaded[i] = derive_rng(9, 1, i).next_u64();
    });
  for (auto& th : pool) th.join();
  EXPECT_EQ(serial, threaded);
}

TEST(Rng, UniformRanges) {
  RngState r(5, 5);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Binomial, Degenerate) {
  RngState r(1, 1);
  EXPECT_EQ(draw_binomial(5, 0.0, r), 0);
  EXPECT_EQ(draw_binomial(5, 1.0, r), 5);
  EXPECT_EQ(draw_binomial(0, 0.4, r), 0);
}

TEST(Binomial, RejectsBadProbability) {
  RngState r(1, 1);
  EXPECT_THROW(draw_binomial(5, -0.1, r), ParameterError);
  EXPECT_THROW(draw_binomial(5, 1.5, r), ParameterError);
  EXPECT_THROW(draw_binomial(-1, 0.5, r), ParameterError);
}

TEST(Binomial, MeanTwentyPointThree) {
  RngState r(11, 0);
  double sum = 0;
  for (int i = 0; i < kDraws; ++i) sum += static_cast<double>(draw_binomial(20, 0.3, r));
  const double se = std::sqrt(20 * 0.3 * 0.7 / kDraws);
  EXPECT_NEAR(sum / kDraws, 6.0, 4 * se);
}

TEST(Binomial, LargeMeanBranchPmf) {
  // n p = 30 uses the mode-centred search; check P(X = 30) and the mean.
  RngState r(12, 0);
  const int n = 100;
  const double p = 0.3;
  const int draws = 200000;
  double sum = 0, at_mode = 0;
  for (int i = 0; i < draws; ++i) {
    const auto x = draw_binomial(n, p, r);
    ASSERT_GE(x, 0);
    ASSERT_LE(x, n);
    sum += static_cast<double>(x);
    at_mode += x == 30;
  }
  EXPECT_NEAR(sum / draws, 30.0, 4 * std::sqrt(n * p * (1 - p) / draws));
  const double pmf30 = std::exp(std::lgamma(101) - std::lgamma(31) - std::lgamma(71) + 30 * std::log(0.3) +
                                70 * std::log(0.7));
  expect_proportion(at_mode, draws, pmf30);
}

TEST(Hypergeometric, Degenerate) {
  RngState r(2, 2);
  EXPECT_EQ(draw_hypergeometric(5, 5, 3, r), 3);
  EXPECT_EQ(draw_hypergeometric(5, 0, 3, r), 0);
}

TEST(Hypergeometric, RejectsBadBounds) {
  RngState r(2, 2);
  EXPECT_THROW(draw_hypergeometric(5, 6, 2, r), ParameterError);
  EXPECT_THROW(draw_hypergeometric(5, 2, 6, r), ParameterError);
  EXPECT_THROW(draw_hypergeometric(-1, 0, 0, r), ParameterError);
}

TEST(Hypergeometric, SmallSupportPmf) {
  RngState r(21, 0);
  std::map<std::int64_t, double> freq;
  for (int i = 0; i < kDraws; ++i) ++freq[draw_hypergeometric(5, 2, 2, r)];
  EXPECT_EQ(freq.size(), 3u);
  expect_proportion(freq[0], kDraws, 0.3);
  expect_proportion(freq[1], kDraws, 0.6);
  expect_proportion(freq[2], kDraws, 0.1);
}

TEST(Hypergeometric, LargePopulationStaysInSupport) {
  RngState r(22, 0);
  const std::int64_t N = 10'000'000, K = 3'000'000, n = 5'000'000;
  double sum = 0;
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    const auto m = draw_hypergeometric(N, K, n, r);
    ASSERT_GE(m, 0);
    ASSERT_LE(m, std::min(n, K));
    sum += static_cast<double>(m);
  }
  const double mean = static_cast<double>(n) * K / N;
  const double var = mean * (1.0 - double(K) / N) * double(N - n) / double(N - 1);
  EXPECT_NEAR(sum / draws, mean, 4 * std::sqrt(var / draws));
}

TEST(ZTPoisson, SmallLambdaIsAlmostAlwaysOne) {
  RngState r(3, 3);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += draw_zt_poisson(1e-9, r) == 1;
  EXPECT_EQ(ones, 10000);
}

TEST(ZTPoisson, TruncatedMeanLambdaTwo) {
  RngState r(31, 0);
  double sum = 0, sq = 0;
  for (int i = 0; i < kDraws; ++i) {
    const auto x = static_cast<double>(draw_zt_poisson(2.0, r));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sq / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(mean, 2.0 / (1 - std::exp(-2.0)), 4 * se);
  EXPECT_NEAR(2.0 / (1 - std::exp(-2.0)), 2.3130, 1e-4);
}

TEST(ZTPoisson, NeverZero) {
  RngState r(32, 0);
  for (int i = 0; i < kDraws; ++i) ASSERT_GE(draw_zt_poisson(1.0, r), 1);
}

TEST(ZTPoisson, InversionBranchPmf) {
  // lambda < 0.1 takes the truncated inversion branch.
  RngState r(33, 0);
  const double lambda = 0.05;
  double twos = 0;
  for (int i = 0; i < kDraws; ++i) twos += draw_zt_poisson(lambda, r) == 2;
  expect_proportion(twos, kDraws, lambda * lambda / 2 / std::expm1(lambda));
}

TEST(ZTPoisson, RejectsNonPositiveRate) {
  RngState r(3, 3);
  EXPECT_THROW(draw_zt_poisson(0.0, r), ParameterError);
  EXPECT_THROW(draw_zt_poisson(-1.0, r), ParameterError);
}

TEST(Exponential, MeanAndMedian) {
  RngState r(41, 0);
  double sum = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = draw_exponential(1.0, r);
    ASSERT_GT(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum / kDraws, 1.0, 4 * std::sqrt(1.0 / kDraws));
  double below = 0;
  for (int i = 0; i < kDraws; ++i) below += draw_exponential(2.0, r) < std::log(2.0) / 2;
  expect_proportion(below, kDraws, 0.5);
  EXPECT_THROW(draw_exponential(0.0, r), ParameterError);
}

TEST(WithoutReplacement, CensusAndEmpty) {
  RngState r(5, 1);
  EXPECT_EQ(draw_without_replacement(3, 3, r), (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_TRUE(draw_without_replacement(3, 0, r).empty());
  EXPECT_THROW(draw_without_replacement(3, 4, r), ParameterError);
}

TEST(WithoutReplacement, UniformOverSubsets) {
  RngState r(51, 0);
  std::map<std::vector<std::int64_t>, double> freq;
  const int draws = 600000;
  for (int i = 0; i < draws; ++i) ++freq[draw_without_replacement(4, 2, r)];
  ASSERT_EQ(freq.size(), 6u);
  for (const auto& [subset, count] : freq) expect_proportion(count, draws, 1.0 / 6);
}

TEST(WithoutReplacement, SparseBranchDistinctSorted) {
  // n * 16 < N uses Floyd's algorithm.
  RngState r(52, 0);
  std::vector<double> hits(1001, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto s = draw_without_replacement(1000, 10, r);
    ASSERT_EQ(s.size(), 10u);
    for (std::size_t j = 1; j < s.size(); ++j) ASSERT_LT(s[j - 1], s[j]);
    ASSERT_GE(s.front(), 1);
    ASSERT_LE(s.back(), 1000);
    for (auto x : s) ++hits[static_cast<std::size_t>(x)];
  }
  expect_proportion(hits[1], draws, 0.01);
  expect_proportion(hits[1000], draws, 0.01);
  expect_proportion(hits[500], draws, 0.01);
}

TEST(Boundary, InverseCdfExamples) {
  EXPECT_DOUBLE_EQ(inverse_cdf_boundary(0.5, 2.0, BoundaryDensity::uniform()), 1.0);
  EXPECT_NEAR(inverse_cdf_boundary(0.5, 1.0, BoundaryDensity::polynomial(1)), 0.70711, 1e-5);
  const double x = inverse_cdf_boundary(0.5, 1.0, BoundaryDensity::exponential());
  EXPECT_NEAR(x, std::log(1 + 0.5 * (std::exp(1.0) - 1)), 1e-15);
  EXPECT_NEAR(x, 0.620115, 1e-6);
  EXPECT_NEAR(boundary_cdf(x, 1.0, BoundaryDensity::exponential()), 0.5, 1e-12);
}

TEST(Boundary, PolynomialZeroIsUniformExactly) {
  RngState r(6, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform_open();
    const double theta = 0.1 + 100 * r.uniform();
    ASSERT_EQ(inverse_cdf_boundary(u, theta, BoundaryDensity::polynomial(0)),
              inverse_cdf_boundary(u, theta, BoundaryDensity::uniform()));
  }
}

TEST(Boundary, ExponentialLargeThetaStaysInRange) {
  for (double theta : {29.0, 30.0, 200.0, 1000.0}) {
    for (double u : {1e-12, 0.25, 0.5, 0.999999}) {
      const double x = inverse_cdf_boundary(u, theta, BoundaryDensity::exponential());
      EXPECT_GT(x, 0.0);
      EXPECT_LE(x, theta);
      EXPECT_TRUE(std::isfinite(x));
    }
  }
  // Both branches agree where they meet.
  EXPECT_NEAR(std::log1p(0.3 * std::expm1(30.0)),
              inverse_cdf_boundary(0.3, 30.0, BoundaryDensity::exponential()), 1e-12);
}

TEST(Boundary, RejectsBadArguments) {
  EXPECT_THROW(inverse_cdf_boundary(0.0, 1.0, BoundaryDensity::uniform()), ParameterError);
  EXPECT_THROW(inverse_cdf_boundary(1.0, 1.0, BoundaryDensity::uniform()), ParameterError);
  EXPECT_THROW(inverse_cdf_boundary(0.5, 0.0, BoundaryDensity::uniform()), ParameterError);
  EXPECT_THROW(inverse_cdf_boundary(0.5, 1.0, BoundaryDensity::polynomial(-1)), ParameterError);
}
