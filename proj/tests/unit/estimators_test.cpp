#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "ivmed/estimators.hpp"
#include "ivmed/oracle.hpp"
#include "ivmed/sampler.hpp"
#include "support/fixtures.hpp"
#include "support/observed_law.hpp"

namespace ivmed {
namespace {

using testing::pop_a;

Population noiseless_single() {
  Population pop = testing::single_stratum({{{0, 1}, {0, 1}}}, {{{0.25, 2.5}, {1.0, 4.75}}});
  pop.p_z = 0.3;
  pop.p_d = 0.6;
  return pop;
}

TEST(EstimateTheta, NoiselessSingleStratumIsExact) {
  const Population pop = noiseless_single();
  const ThetaIV want = population_theta_iv(pop);
  for (std::size_t n : {40u, 1000u}) {
    const ThetaIV got = estimate_theta_iv(draw(pop, n, n));
    EXPECT_NEAR(got.alpha0, want.alpha0, 1e-12);
    EXPECT_NEAR(got.alpha1, want.alpha1, 1e-12);
    EXPECT_NEAR(got.beta0, want.beta0, 1e-12);
    EXPECT_NEAR(got.beta1, want.beta1, 1e-12);
    EXPECT_NEAR(got.pi0, want.pi0, 1e-12);
    EXPECT_NEAR(got.pi1, want.pi1, 1e-12);
    EXPECT_NEAR(got.tau0, want.tau0, 1e-12);
    EXPECT_NEAR(got.tau1, want.tau1, 1e-12);
  }
}

TEST(EstimateTheta, HandBuiltFourRowDataset) {
  Dataset ds;
  ds.rows = {{0, 0, 0, 1.0}, {0, 1, 1, 3.0}, {1, 0, 0, 2.0}, {1, 1, 1, 6.0}};
  const ThetaIV t = estimate_theta_iv(ds);
  EXPECT_EQ(t.beta1, 2.0);
  EXPECT_EQ(t.beta0, 1.0);
  EXPECT_EQ(t.alpha1, 4.0);
  EXPECT_EQ(t.alpha0, 2.0);
  EXPECT_EQ(t.pi1, 1.0);
  EXPECT_EQ(t.pi0, 0.0);
  EXPECT_EQ(t.tau1, 1.0);
  EXPECT_EQ(t.tau0, 0.0);
}

TEST(EstimateTheta, PopALargeSample) {
  const ThetaIV t = estimate_theta_iv(draw_cells(pop_a(), 1000000, 1));
  EXPECT_NEAR(t.beta1, 2.0, 0.02);
  EXPECT_NEAR(t.alpha1, 2.0, 0.02);
  EXPECT_NEAR(t.pi1, 0.5, 0.02);
  EXPECT_NEAR(t.tau1, 0.5, 0.02);
  EXPECT_NEAR(t.pi0, 0.0, 0.02);
  EXPECT_NEAR(t.tau0, 0.5, 0.02);
  EXPECT_NEAR(t.beta0, 0.5, 0.02);
  EXPECT_NEAR(t.alpha0, 1.5, 0.02);
}

TEST(EstimateTheta, ConstantInstrumentIsEmptyCell) {
  Population pop = pop_a();
  Dataset ds = draw(pop, 200, 3);
  for (auto& r : ds.rows) {
    r.z = 0;
    r.m = static_cast<std::uint8_t>(pop.strata[0].response.at(r.d, 0));
  }
  try {
    estimate_theta_iv(ds);
    FAIL() << "expected EmptyCell";
  } catch (const EmptyCell& e) {
    EXPECT_EQ(e.z(), 1);
  }
}

TEST(EstimateTheta, ThresholdControlsWeakInstrument) {
  Dataset ds;
  ds.rows = {{0, 0, 0, 1.0}, {0, 1, 1, 3.0}, {1, 0, 1, 2.0}, {1, 1, 1, 6.0}};
  try {
    estimate_theta_iv(ds);
    FAIL() << "expected WeakInstrument";
  } catch (const WeakInstrument& e) {
    EXPECT_EQ(e.arm(), 1);
    EXPECT_EQ(e.first_stage(), 0.0);
  }
  const EstimateSet est = estimate_effects_iv(ds);
  EXPECT_EQ(est.weak_arms, std::vector<int>{1});
  EXPECT_FALSE(est.theta_hat);
  EXPECT_TRUE(est.effects.nie0);
  EXPECT_FALSE(est.effects.nde0);

  Dataset faint;
  faint.rows = {{0, 0, 0, 1.0}, {0, 1, 1, 3.0}, {1, 0, 0, 2.0}, {1, 1, 1, 6.0}, {1, 1, 0, 2.0}};
  EXPECT_NO_THROW(estimate_theta_iv(faint));
  EXPECT_THROW(estimate_theta_iv(faint, IvOptions{0.6}), WeakInstrument);
}

TEST(EstimateEffectsIv, PopALargeSample) {
  const EstimateSet est = estimate_effects_iv(draw_cells(pop_a(), 1000000, 1));
  ASSERT_TRUE(est.effects.complete());
  EXPECT_NEAR(*est.effects.nie0, 1.0, 0.03);
  EXPECT_NEAR(*est.effects.nie1, 1.0, 0.03);
  EXPECT_NEAR(*est.effects.nde0, 1.0, 0.03);
  EXPECT_NEAR(*est.effects.nde1, 1.0, 0.03);
  EXPECT_EQ(est.n, 1000000u);
  EXPECT_GE(est.e_z_hat, 0.0);
  EXPECT_LE(est.e_z_hat, 1.0);
  std::uint64_t total = 0;
  for (const auto& row : est.diagnostics.counts)
    for (auto c : row) total += c;
  EXPECT_EQ(total, est.n);
  EXPECT_NEAR(est.diagnostics.first_stage[0], 0.5, 0.01);
}

TEST(EstimateEffectsIv, CounterexampleCancels) {
  const EstimateSet est = estimate_effects_iv(draw_cells(build_cancellation_counterexample(1.0), 1000000, 2));
  ASSERT_TRUE(est.effects.nie0);
  EXPECT_NEAR(*est.effects.nie0, 0.0, 0.03);
  EXPECT_EQ(est.weak_arms, std::vector<int>{1});
}

TEST(EstimateEffectsIv, NoiselessMatchesOracleIvSide) {
  const Population pop = noiseless_single();
  const CellTable cells = draw_cells(pop, 5000, 17);
  const EstimateSet est = estimate_effects_iv(cells);
  // Plug-in uses the sample share of Z=1, so compare at that share.
  const IvEstimands want = iv_mediation_estimands(population_theta_iv(pop), est.e_z_hat);
  EXPECT_NEAR(*est.effects.nie0, want.nie0_iv, 1e-12);
  EXPECT_NEAR(*est.effects.nie1, want.nie1_iv, 1e-12);
  EXPECT_NEAR(*est.effects.nde0, want.nde0_iv, 1e-12);
  EXPECT_NEAR(*est.effects.nde1, want.nde1_iv, 1e-12);
}

TEST(EstimateEffectsIv, BalancedNoiselessDataMatchesGapReport) {
  // Every (d, z) cell appears equally often, so the sample share of Z=1 is p_z.
  Population pop = noiseless_single();
  pop.p_z = 0.5;
  Dataset ds;
  for (int rep = 0; rep < 3; ++rep)
    for (std::uint8_t d = 0; d < 2; ++d)
      for (std::uint8_t z = 0; z < 2; ++z) {
        const auto m = static_cast<std::uint8_t>(pop.strata[0].response.at(d, z));
        ds.rows.push_back({d, z, m, pop.strata[0].outcomes.at(d, m)});
      }
  const EstimateSet est = estimate_effects_iv(ds);
  const GapReport g = gap_report(pop);
  EXPECT_EQ(est.e_z_hat, 0.5);
  EXPECT_NEAR(*est.effects.nie0, *g.iv.nie0_iv, 1e-12);
  EXPECT_NEAR(*est.effects.nie1, *g.iv.nie1_iv, 1e-12);
  EXPECT_NEAR(*est.effects.nde0, *g.iv.nde0_iv, 1e-12);
  EXPECT_NEAR(*est.effects.nde1, *g.iv.nde1_iv, 1e-12);
  // Single stratum: effects are constant, so the IV side is also the truth.
  EXPECT_NEAR(*est.effects.nde1, g.target.nde1, 1e-12);
}

// Reference least squares fit with a generic solver.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.colPivHouseholderQr().solve(y);
}

TEST(EstimateEffectsSi, MatchesGenericLeastSquares) {
  const Dataset ds = draw(pop_a(1.0), 5000, 19);
  const auto n = static_cast<Eigen::Index>(ds.size());
  Eigen::MatrixXd xm(n, 2), xy(n, 4);
  Eigen::VectorXd m(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = ds.rows[static_cast<std::size_t>(i)];
    xm.row(i) << 1.0, r.d;
    xy.row(i) << 1.0, r.d, r.m, r.d * r.m;
    m(i) = r.m;
    y(i) = r.y;
  }
  const Eigen::VectorXd a = ols(xm, m);
  const Eigen::VectorXd b = ols(xy, y);
  const LsemEstimate e = estimate_effects_si(ds);
  EXPECT_NEAR(e.a0, a(0), 1e-10);
  EXPECT_NEAR(e.a1, a(1), 1e-10);
  EXPECT_NEAR(e.b0, b(0), 1e-10);
  EXPECT_NEAR(e.b1, b(1), 1e-10);
  EXPECT_NEAR(e.b2, b(2), 1e-10);
  EXPECT_NEAR(e.b3, b(3), 1e-10);
  EXPECT_NEAR(*e.effects.nie0, b(2) * a(1), 1e-10);
  EXPECT_NEAR(*e.effects.nie1, (b(2) + b(3)) * a(1), 1e-10);
  EXPECT_NEAR(*e.effects.nde0, b(1) + b(3) * a(0), 1e-10);
  EXPECT_NEAR(*e.effects.nde1, b(1) + b(3) * (a(0) + a(1)), 1e-10);
}

TEST(EstimateEffectsSi, PopAConvergesToConfoundedLimit) {
  const testing::SiLimits lim = testing::si_limits(pop_a());
  EXPECT_NEAR(lim.nie0, 2.0 / 3.0, 1e-12);
  const LsemEstimate e = estimate_effects_si(draw_cells(pop_a(), 1000000, 4));
  EXPECT_NEAR(*e.effects.nie0, lim.nie0, 0.02);
  EXPECT_NEAR(*e.effects.nie1, lim.nie1, 0.02);
  EXPECT_NEAR(*e.effects.nde0, lim.nde0, 0.02);
  EXPECT_NEAR(*e.effects.nde1, lim.nde1, 0.02);
  EXPECT_GT(std::abs(*e.effects.nie0 - 0.5), 0.1);
}

TEST(EstimateEffectsSi, UnconfoundedRecoversTruth) {
  const Population pop = testing::unconfounded(0.5);
  const EffectSet truth = true_effect_set(pop);
  const LsemEstimate e = estimate_effects_si(draw_cells(pop, 400000, 5));
  EXPECT_NEAR(*e.effects.nie0, truth.nie0, 0.02);
  EXPECT_NEAR(*e.effects.nie1, truth.nie1, 0.02);
  EXPECT_NEAR(*e.effects.nde0, truth.nde0, 0.02);
  EXPECT_NEAR(*e.effects.nde1, truth.nde1, 0.02);
}

TEST(EstimateEffectsSi, ConstantMediatorIsSingular) {
  Dataset ds;
  ds.rows = {{0, 0, 0, 1.0}, {0, 1, 0, 3.0}, {1, 0, 0, 2.0}, {1, 1, 1, 6.0}};
  EXPECT_THROW(estimate_effects_si(ds), SingularDesign);
  ds.rows = {{0, 0, 0, 1.0}, {0, 1, 1, 3.0}};
  EXPECT_THROW(estimate_effects_si(ds), SingularDesign);
}

TEST(Quantile, Type7) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_EQ(sorted_quantile(v, 0.0), 1.0);
  EXPECT_EQ(sorted_quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.25), 1.75);
  EXPECT_EQ(sorted_quantile({5.0}, 0.975), 5.0);
  EXPECT_THROW(sorted_quantile({}, 0.5), DomainError);
}

TEST(Bootstrap, SingleReplicateIsDegenerate) {
  const Dataset ds = draw(pop_a(1.0), 2000, 6);
  for (EstimatorKind kind : {EstimatorKind::kIv, EstimatorKind::kSi}) {
    const BootstrapResult r = bootstrap(ds, kind, 1, 9);
    EXPECT_EQ(r.failed_replicates, 0u);
    for (const auto& iv : r.intervals) {
      ASSERT_TRUE(iv.lower && iv.upper) << iv.effect;
      EXPECT_EQ(*iv.lower, *iv.upper);
      EXPECT_EQ(iv.successes, 1u);
    }
  }
}

TEST(Bootstrap, DeterministicAndThreadIndependent) {
  const Dataset ds = draw(pop_a(1.0), 3000, 8);
  const BootstrapResult a = bootstrap(ds, EstimatorKind::kIv, 60, 5, {.threads = 1});
  const BootstrapResult b = bootstrap(ds, EstimatorKind::kIv, 60, 5, {.threads = 4});
  const BootstrapResult c = bootstrap(ds, EstimatorKind::kIv, 60, 6, {.threads = 1});
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a.intervals[k].lower, b.intervals[k].lower);
    EXPECT_EQ(a.intervals[k].upper, b.intervals[k].upper);
    EXPECT_EQ(a.intervals[k].effect, b.intervals[k].effect);
  }
  EXPECT_NE(a.intervals[0].lower, c.intervals[0].lower);
}

TEST(Bootstrap, PopAIntervalCoversEstimand) {
  const Dataset ds = draw(pop_a(), 100000, 3);
  const BootstrapResult r = bootstrap(ds, EstimatorKind::kIv, 400, 3, {.threads = 0});
  EXPECT_EQ(r.intervals[0].effect, "nie0");
  ASSERT_TRUE(r.intervals[0].lower && r.intervals[0].upper);
  EXPECT_LE(*r.intervals[0].lower, 1.0);
  EXPECT_GE(*r.intervals[0].upper, 1.0);
  EXPECT_LT(*r.intervals[0].upper - *r.intervals[0].lower, 0.2);
  EXPECT_EQ(r.failed_replicates, 0u);
}

TEST(Bootstrap, TinyDatasetCountsFailures) {
  Dataset ds;
  ds.rows = {{0, 0, 0, 1.0}, {0, 1, 1, 3.0}, {1, 0, 0, 2.0}, {1, 1, 1, 6.0}};
  const BootstrapResult r = bootstrap(ds, EstimatorKind::kIv, 100, 1);
  EXPECT_GT(r.failed_replicates, 50u);
  EXPECT_LT(r.failed_replicates, 100u);
  EXPECT_EQ(r.intervals[0].successes + r.failed_replicates, 100u);
}

TEST(Bootstrap, AllFailuresThrow) {
  Dataset ds;
  ds.rows = {{0, 0, 0, 1.0}, {0, 0, 1, 3.0}};
  EXPECT_THROW(bootstrap(ds, EstimatorKind::kIv, 10, 1), AllReplicatesFailed);
  EXPECT_THROW(bootstrap(ds, EstimatorKind::kIv, 0, 1), DomainError);
}

}  // namespace
}  // namespace ivmed
