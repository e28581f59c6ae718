#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "hiddenset/engine.hpp"

using namespace hiddenset;

namespace {

EngineSettings mc(std::int64_t R, std::uint64_t seed = 7) {
  EngineSettings s;
  s.replications = R;
  s.master_seed = seed;
  s.exact = ExactMode::Off;
  s.threads = 1;
  return s;
}

std::vector<std::string> ids_of(std::initializer_list<std::string_view> l) {
  std::vector<std::string> out;
  for (auto x : l) out.emplace_back(x);
  return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Normality, Examples) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  std::vector<double> x(100000);
  for (auto& v : x) v = z(gen);
  auto ks = normality_stat(x);
  ASSERT_TRUE(ks);
  EXPECT_LT(*ks, 0.01);

  std::vector<double> constant(100, 4.0);
  EXPECT_FALSE(normality_stat(constant));
  std::vector<double> few(49);
  for (auto& v : few) v = z(gen);
  EXPECT_FALSE(normality_stat(few));

  std::vector<double> skew(5000);
  std::exponential_distribution<double> e;
  for (auto& v : skew) v = e(gen);
  EXPECT_GT(*normality_stat(skew), 0.05);
}

TEST(Normality, BinomialMmeOutfill) {
  const auto est = ids_of({ids::binom_mme});
  auto run = run_cell(BinomialCountConfig{10000, 0.3, 10}, 1, est, mc(10000));
  EXPECT_LT(run.stats[0].ks_stat, 0.02);
}

TEST(RunCell, ExactTankGoodman) {
  EngineSettings s;
  s.exact = ExactMode::Auto;
  const auto est = ids_of({ids::tank_goodman, ids::tank_unknown_origin});
  auto run = run_cell(TankConfig{6, 3, 0}, 1, est, s);
  const auto& g = run.stats[0];
  EXPECT_TRUE(g.exact);
  EXPECT_NEAR(g.bias, 0.0, 1e-12);
  EXPECT_NEAR(g.variance, 1.4, 1e-12);
  EXPECT_EQ(g.mc_se, 0.0);
  EXPECT_NEAR(run.stats[1].variance, 4.2, 1e-12);
  EXPECT_NEAR(g.mse, g.bias * g.bias + g.variance, 1e-12);
}

TEST(RunCell, ExactAgreesWithMonteCarlo) {
  const auto est = ids_of({ids::crc_chapman});
  EngineSettings ex;
  ex.exact = ExactMode::Force;
  const auto exact = run_cell(CRC2Config{60, 20, 25}, 1, est, ex).stats[0];
  const auto sim = run_cell(CRC2Config{60, 20, 25}, 1, est, mc(40000)).stats[0];
  EXPECT_TRUE(exact.exact);
  EXPECT_FALSE(sim.exact);
  EXPECT_NEAR(sim.mean, exact.mean, 4 * sim.mc_se);
  EXPECT_NEAR(sim.variance / exact.variance, 1.0, 0.05);
}

TEST(RunCell, ForcedSameStreamHasZeroVariance) {
  auto s = mc(2);
  s.force_same_stream = true;
  const auto est = ids_of({ids::crc_lp, ids::crc_chapman});
  for (const auto& st : run_cell(CRC2Config{200, 40, 40}, 1, est, s).stats) {
    EXPECT_EQ(st.variance, 0.0);
    EXPECT_EQ(st.valid, 2);
  }
}

TEST(RunCell, Crc2ExclusionNegligible) {
  auto s = mc(100000);
  s.eps = {0.5};
  const auto est = ids_of({ids::crc_lp});
  const auto st = run_cell(CRC2Config{100, 50, 50}, 1, est, s).stats[0];
  EXPECT_EQ(st.excluded_fraction(), 0.0);
  ASSERT_EQ(st.p_outside.size(), 1u);
  EXPECT_GE(st.p_outside[0], 0.0);
  EXPECT_LE(st.p_outside[0], 1.0);
}

TEST(RunCell, UndefinedCountsAsOutside) {
  // n1 = n2 = 1 in a large population: LP is almost always undefined.
  auto s = mc(2000);
  s.eps = {0.5, 1e9};
  const auto est = ids_of({ids::crc_lp});
  const auto st = run_cell(CRC2Config{1000, 1, 1}, 1, est, s).stats[0];
  EXPECT_LT(st.valid, 20);
  EXPECT_GT(st.excluded_fraction(), 0.99);
  EXPECT_NEAR(st.p_outside[1], st.excluded_fraction(), 1e-12);
}

TEST(RunCell, DegenerateWhenAllUndefined) {
  const auto est = ids_of({ids::tank_gap});
  const auto st = run_cell(TankConfig{50, 1, 0}, 1, est, mc(100)).stats[0];
  EXPECT_TRUE(st.degenerate);
  EXPECT_EQ(st.valid, 0);
  EXPECT_TRUE(std::isnan(st.mean));
  EXPECT_EQ(st.p_outside[0], 1.0);
}

TEST(RunCell, MseInvariant) {
  const auto est = ids_of({ids::tank_mle, ids::tank_goodman, ids::tank_gap, ids::tank_bayes_mean});
  for (const auto& st : run_cell(TankConfig{300, 12, 0}, 1, est, mc(5000)).stats) {
    const double want = st.bias * st.bias + st.variance * double(st.valid - 1) / double(st.valid);
    EXPECT_NEAR(st.mse / want, 1.0, 1e-10) << st.estimator;
    for (double p : st.p_outside) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(RunCell, UnbiasedWithinFourSe) {
  const auto est = ids_of({ids::tank_goodman, ids::tank_unknown_origin});
  int inside = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    for (const auto& st : run_cell(TankConfig{500, 20, 0}, 1, est, mc(2000, seed)).stats) {
      inside += std::fabs(st.bias) < 4 * st.mc_se;
      ++total;
    }
  }
  EXPECT_GE(inside, total - 1);
}

TEST(RunCell, DeterministicAcrossThreads) {
  const auto est = ids_of({ids::crc_lp, ids::crc_chapman});
  auto s = mc(5000);
  s.eps = {0.5, 5.0};
  const auto base = run_cell(CRC2Config{400, 60, 80}, 1, est, s).stats;
  for (unsigned th : {2u, 4u, 8u}) {
    s.threads = th;
    const auto other = run_cell(CRC2Config{400, 60, 80}, 1, est, s).stats;
    for (std::size_t e = 0; e < base.size(); ++e) {
      EXPECT_TRUE(same_bits(base[e].mean, other[e].mean));
      EXPECT_TRUE(same_bits(base[e].variance, other[e].variance));
      EXPECT_TRUE(same_bits(base[e].mse, other[e].mse));
      EXPECT_TRUE(same_bits(base[e].ks_stat, other[e].ks_stat));
      EXPECT_EQ(base[e].p_outside, other[e].p_outside);
    }
  }
}

TEST(RunCell, Errors) {
  const auto bad = ids_of({ids::crc_lp});
  EXPECT_THROW(run_cell(TankConfig{10, 3, 0}, 1, bad, mc(10)), ConfigurationError);
  const auto ok = ids_of({ids::tank_goodman});
  EXPECT_THROW(run_cell(TankConfig{10, 3, 0}, 1, ok, mc(1)), ConfigurationError);
  EXPECT_THROW(run_cell(TankConfig{10, 3, 0}, 0, ok, mc(10)), ConfigurationError);
  EXPECT_THROW(run_cell(CRCkConfig{100, {10, 10, 10}}, 2, ids_of({ids::crc_k_mle}), mc(10)),
               ConfigurationError);
}

TEST(RunSchedule, InfillVarianceShrinks) {
  const ModelConfig base = TankConfig{40, 5, 0};
  const auto sched = build_schedule(Family::Tank, RegimeKind::Infill, base, std::vector<double>{10, 100}, {});
  const auto rows = run_schedule(sched, ids_of({ids::tank_goodman}), mc(4000));
  ASSERT_EQ(rows.size(), 2u);
  const double ratio = rows[0].variance / rows[1].variance;
  EXPECT_GT(ratio, 8.5);
  EXPECT_LT(ratio, 11.5);
}

TEST(RunSchedule, OutfillRows) {
  const auto sched = build_schedule(Family::Tank, RegimeKind::Outfill, TankConfig{10, 5, 0},
                                    std::vector<double>{100, 200, 400}, std::vector<double>{0.5});
  const auto rows = run_schedule(sched, ids_of({ids::tank_goodman}), mc(500));
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].t, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(rows[i].target, 100.0 * double(1 << i));
  }
  // Cells draw from different streams.
  EXPECT_NE(rows[0].seed, 0u);
}

TEST(RunSchedule, CensusCell) {
  const auto sched = build_schedule(Family::Tank, RegimeKind::FinitePopulation, TankConfig{30, 1, 0},
                                    std::vector<double>{5, 15, 30}, {});
  auto s = mc(200);
  s.eps = {0.5};
  const auto rows = run_schedule(sched, ids_of({ids::tank_goodman, ids::tank_mle}), s);
  for (std::size_t e = 4; e < 6; ++e) {
    EXPECT_EQ(rows[e].bias, 0.0);
    EXPECT_EQ(rows[e].variance, 0.0);
  }
  const std::vector<CellStats> census(rows.begin() + 4, rows.end());
  for (const auto& [t, p] : consistency_curve(census, 0.5)) {
    EXPECT_EQ(t, 3);
    EXPECT_EQ(p, 0.0);
  }
}

TEST(RateFitTest, Examples) {
  const std::vector<double> x{10, 100, 1000};
  const std::vector<double> flat{2, 2, 2};
  EXPECT_NEAR(fit_loglog_rate(flat, x).slope, 0.0, 1e-12);
  EXPECT_NEAR(fit_loglog_rate(x, x).slope, 1.0, 1e-12);
  std::vector<double> y;
  for (double v : x) y.push_back(3 * std::sqrt(v));
  const auto f = fit_loglog_rate(y, x);
  EXPECT_NEAR(f.slope, 0.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);

  const std::vector<double> noisy{1.0, 3.0, 2.0, 5.0};
  const std::vector<double> x4{1, 2, 3, 4};
  const auto n = fit_loglog_rate(noisy, x4);
  EXPECT_GE(n.r_squared, 0.0);
  EXPECT_LE(n.r_squared, 1.0);
}

TEST(RateFitTest, Errors) {
  const std::vector<double> x{10, 100, 1000};
  EXPECT_THROW(fit_loglog_rate(std::vector<double>{1, 0, 1}, x), ParameterError);
  EXPECT_THROW(fit_loglog_rate(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ParameterError);
  EXPECT_THROW(fit_loglog_rate(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}), ParameterError);
}

TEST(Consistency, IntervalMleTowardsExpMinusOne) {
  auto s = mc(20000);
  s.eps = {1.0};
  const auto sched = build_schedule(Family::Interval, RegimeKind::Outfill,
                                    IntervalConfig{1.0, 1, BoundaryDensity::uniform()},
                                    std::vector<double>{100, 500}, std::vector<double>{1.0});
  const auto rows = run_schedule(sched, ids_of({ids::interval_mle}), s);
  const auto curve = consistency_curve(rows, 1.0);
  ASSERT_EQ(curve.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const double theta = rows[i].target;
    const double want = std::pow(1.0 - 1.0 / theta, theta);
    const double se = std::sqrt(want * (1 - want) / 20000.0);
    EXPECT_NEAR(curve[i].second, want, 4 * se);
  }
  EXPECT_NEAR(curve[1].second, std::exp(-1.0), 0.02);
  EXPECT_THROW(consistency_curve(rows, 0.25), ParameterError);
}

TEST(Consistency, InfillTankNonIncreasing) {
  auto s = mc(1000);
  s.eps = {0.5};
  const auto sched = build_schedule(Family::Tank, RegimeKind::Infill, TankConfig{20, 5, 0},
                                    std::vector<double>{10, 100, 1000}, {});
  const auto curve = consistency_curve(run_schedule(sched, ids_of({ids::tank_goodman}), s), 0.5);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].second, curve[i - 1].second);
  EXPECT_LT(curve.back().second, 0.05);
}
