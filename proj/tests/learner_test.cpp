#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mftg/learner.hpp"
#include "mftg/presets.hpp"
#include "mftg/riccati.hpp"
#include "support.hpp"

namespace mftg {
namespace {

using test::expect_mat_near;
using test::random_spec;

LearnerConfig exact_config(double eta, int iterations) {
  LearnerConfig cfg;
  cfg.eta = {eta};
  cfg.iterations = iterations;
  cfg.mode = GradientMode::kExact;
  return cfg;
}

void expect_rows_near(const std::vector<TraceRow>& a,
                      const std::vector<TraceRow>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (size_t idx = 0; idx < a.size(); ++idx) {
    EXPECT_EQ(a[idx].phase_t, b[idx].phase_t);
    EXPECT_EQ(a[idx].iter_k, b[idx].iter_k);
    EXPECT_EQ(a[idx].player, b[idx].player);
    EXPECT_NEAR(a[idx].err_k, b[idx].err_k, tol);
    EXPECT_NEAR(a[idx].err_kbar, b[idx].err_kbar, tol);
    EXPECT_NEAR(a[idx].cost_y, b[idx].cost_y, tol * 100);
    EXPECT_NEAR(a[idx].cost_xbar, b[idx].cost_xbar, tol * 100);
    EXPECT_NEAR(a[idx].grad_norm, b[idx].grad_norm, tol * 100);
  }
}

TEST(Mrpg, SingleStepExactRunMatchesVanillaBaseline) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  const RiccatiSolution ne = solve_clne(model);
  const LearnerConfig cfg = exact_config(1e-3, 300);
  const RunTrace receding = mrpg_run(model, cfg, ne);
  const RunTrace vanilla = vanilla_npg_run(model, cfg, &ne.gains);
  expect_rows_near(receding.rows, vanilla.rows, 1e-12);
  EXPECT_NEAR(receding.final_err_k, vanilla.final_err_k, 1e-12);
}

TEST(Mrpg, SymmetricPlayersEvolveIdentically) {
  const JointModel model = derive_joint_model(symmetric_duopoly_spec());
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig cfg = exact_config(5e-3, 200);
  const RunTrace trace = mrpg_run(model, cfg, ne);
  ASSERT_EQ(trace.rows.size() % 2, 0u);
  for (size_t idx = 0; idx + 1 < trace.rows.size(); idx += 2) {
    const TraceRow& p0 = trace.rows[idx];
    const TraceRow& p1 = trace.rows[idx + 1];
    ASSERT_EQ(p0.iter_k, p1.iter_k);
    EXPECT_NEAR(p0.err_k, p1.err_k, 1e-13);
    EXPECT_NEAR(p0.cost_y, p1.cost_y, 1e-12);
  }
  expect_mat_near(trace.profile.k[0][0], trace.profile.k[1][0], 1e-13);
}

TEST(Mrpg, ExactModeIsExplorationScaleInvariant) {
  const JointModel model = derive_joint_model(random_spec(401));
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig a = exact_config(2e-3, 150);
  LearnerConfig b = a;
  b.sigma_y = 3.0;
  b.sigma_xbar = 0.4;
  const RunTrace ta = mrpg_run(model, a, ne);
  const RunTrace tb = mrpg_run(model, b, ne);
  for (int i = 0; i < model.players(); ++i)
    for (int t = 0; t < model.horizon(); ++t) {
      expect_mat_near(ta.profile.k[i][t], tb.profile.k[i][t], 1e-12);
      expect_mat_near(ta.profile.k_bar[i][t], tb.profile.k_bar[i][t], 1e-12);
    }
}

TEST(Mrpg, ZeroOrderNaturalEstimateIsExplorationScaleInvariant) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig a;
  a.eta = {1e-3};
  a.iterations = 80;
  a.num_directions = 64;
  a.antithetic = true;
  a.seed = 31;
  LearnerConfig b = a;
  b.sigma_y = 2.5;
  b.sigma_xbar = 0.7;
  const RunTrace ta = mrpg_run(model, a, ne);
  const RunTrace tb = mrpg_run(model, b, ne);
  expect_mat_near(ta.profile.k[0][0], tb.profile.k[0][0], 1e-10);
  expect_mat_near(ta.profile.k_bar[0][0], tb.profile.k_bar[0][0], 1e-10);
}

TEST(Mrpg, ReproducibleForFixedSeedSensitiveOtherwise) {
  const JointModel model = derive_joint_model(random_spec(402));
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig cfg;
  cfg.eta = {1e-3};
  cfg.iterations = 40;
  cfg.num_directions = 64;
  // one-point estimates depend on the drawn directions for any gain shape
  cfg.antithetic = false;
  cfg.seed = 77;
  const RunTrace a = mrpg_run(model, cfg, ne);
  const RunTrace b = mrpg_run(model, cfg, ne);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (size_t idx = 0; idx < a.rows.size(); ++idx) {
    EXPECT_DOUBLE_EQ(a.rows[idx].err_k, b.rows[idx].err_k);
    EXPECT_DOUBLE_EQ(a.rows[idx].cost_y, b.rows[idx].cost_y);
    EXPECT_DOUBLE_EQ(a.rows[idx].grad_norm, b.rows[idx].grad_norm);
  }
  cfg.seed = 78;
  const RunTrace c = mrpg_run(model, cfg, ne);
  EXPECT_NE(a.final_err_k, c.final_err_k);
}

TEST(Mrpg, DivergenceGuardThrowsWithPartialTrace) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  const LearnerConfig cfg = exact_config(5.0, 500);
  try {
    mrpg_run(model, cfg, solve_clne(model));
    FAIL() << "expected DivergenceDetected";
  } catch (const DivergenceDetected& e) {
    EXPECT_EQ(e.phase_t, 0);
    EXPECT_GT(e.iter_k, 0);
    EXPECT_FALSE(e.partial.rows.empty());
    for (const TraceRow& row : e.partial.rows)
      EXPECT_TRUE(std::isfinite(row.cost_y));
  }
}

TEST(Mrpg, ProjectionContainsUnstableStepSize) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  LearnerConfig cfg = exact_config(5.0, 400);
  cfg.proj_radius = 0.7;
  const RunTrace trace = mrpg_run(model, cfg, solve_clne(model));
  EXPECT_LE(trace.profile.k[0][0].norm(), 0.7 + 1e-12);
  EXPECT_LE(trace.profile.k_bar[0][0].norm(), 0.7 + 1e-12);
  for (const TraceRow& row : trace.rows) {
    EXPECT_TRUE(std::isfinite(row.err_k));
    EXPECT_TRUE(std::isfinite(row.cost_y));
  }
}

TEST(SpMrpg, SingletonPopulationCannotLearnDeviationGains) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig cfg;
  cfg.eta = {5e-3};
  cfg.iterations = 60;
  cfg.num_directions = 100;
  cfg.population = 1;
  cfg.seed = 3;
  const RunTrace trace = sp_mrpg_run(model, cfg, &ne.gains);
  // a centered ensemble of one agent has identically zero deviations, so the
  // deviation-branch oracle is constant and those gains never move
  EXPECT_EQ(trace.profile.k[0][0].norm(), 0.0);
  EXPECT_DOUBLE_EQ(trace.rows.front().err_k, trace.rows.back().err_k);
  EXPECT_LT(trace.rows.back().err_kbar, trace.rows.front().err_kbar);
}

TEST(EntryPoints, PinTheirOracles) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig cfg;
  cfg.eta = {1e-3};
  cfg.iterations = 30;
  cfg.num_directions = 64;
  cfg.population = 50;
  cfg.seed = 11;

  LearnerConfig as_sp = cfg;
  as_sp.mode = GradientMode::kZeroOrderSamplePath;
  LearnerConfig as_expected = cfg;
  as_expected.mode = GradientMode::kZeroOrderExpected;

  const RunTrace a = mrpg_run(model, as_sp, ne);
  const RunTrace b = mrpg_run(model, as_expected, ne);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (size_t idx = 0; idx < a.rows.size(); ++idx)
    EXPECT_DOUBLE_EQ(a.rows[idx].err_k, b.rows[idx].err_k);

  const RunTrace c = sp_mrpg_run(model, as_expected, &ne.gains);
  const RunTrace d = sp_mrpg_run(model, as_sp, &ne.gains);
  ASSERT_EQ(c.rows.size(), d.rows.size());
  for (size_t idx = 0; idx < c.rows.size(); ++idx)
    EXPECT_DOUBLE_EQ(c.rows[idx].err_k, d.rows[idx].err_k);
  EXPECT_NE(c.final_err_k, b.final_err_k);
}

TEST(Augmented, RequiresFiniteProjectionRadius) {
  const JointModel model = derive_joint_model(weak_penalty_spec());
  LearnerConfig cfg = exact_config(5e-3, 10);
  EXPECT_THROW(augmented_mrpg_run(model, cfg), std::invalid_argument);
}

TEST(Augmented, ZeroScheduleReducesToPlainRun) {
  const JointModel model = derive_joint_model(random_spec(403));
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig cfg = exact_config(2e-3, 120);
  cfg.proj_radius = 50.0;
  cfg.gamma = StageScale(model.players(),
                         std::vector<double>(model.horizon(), 0.0));
  cfg.gamma_bar = cfg.gamma;
  const RunTrace augmented = augmented_mrpg_run(model, cfg, &ne.gains);
  LearnerConfig plain = cfg;
  plain.gamma.clear();
  plain.gamma_bar.clear();
  // empty schedules trigger recomputation, so pass the zero schedule run
  // against mrpg_run directly
  const RunTrace direct = mrpg_run(model, cfg, ne);
  expect_rows_near(augmented.rows, direct.rows, 1e-13);
}

TEST(Augmented, ConvergesToAugmentedEquilibriumOnRepairedGame) {
  const ExperimentConfig preset = make_preset("augmented_repair");
  const JointModel model = derive_joint_model(preset.spec);
  const RunTrace trace = augmented_mrpg_run(model, preset.learner);
  EXPECT_LE(trace.final_err_k, 1e-3);
  EXPECT_LE(trace.final_err_kbar, 1e-3);
}

TEST(Vanilla, RejectsSamplePathOracle) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  LearnerConfig cfg;
  cfg.mode = GradientMode::kZeroOrderSamplePath;
  EXPECT_THROW(vanilla_npg_run(model, cfg), std::invalid_argument);
}

TEST(Config, ValidationRejectsIllFormedSettings) {
  const JointModel model = derive_joint_model(symmetric_duopoly_spec());
  {
    LearnerConfig cfg = exact_config(1e-3, 10);
    cfg.eta = {1e-3, 1e-3, 1e-3};
    EXPECT_THROW(mrpg_run(model, cfg), std::invalid_argument);
  }
  {
    LearnerConfig cfg = exact_config(1e-3, 0);
    EXPECT_THROW(mrpg_run(model, cfg), std::invalid_argument);
  }
  {
    LearnerConfig cfg;
    cfg.num_directions = 0;
    EXPECT_THROW(mrpg_run(model, cfg), std::invalid_argument);
  }
  {
    LearnerConfig cfg;
    cfg.radius = -1.0;
    EXPECT_THROW(mrpg_run(model, cfg), std::invalid_argument);
  }
  {
    LearnerConfig cfg;
    cfg.mode = GradientMode::kZeroOrderSamplePath;
    cfg.population = 0;
    EXPECT_THROW(sp_mrpg_run(model, cfg), std::invalid_argument);
  }
}

TEST(Config, EtaBroadcastAndPerPlayerLookup) {
  LearnerConfig cfg;
  cfg.eta = {0.5};
  EXPECT_DOUBLE_EQ(cfg.eta_for(0), 0.5);
  EXPECT_DOUBLE_EQ(cfg.eta_for(1), 0.5);
  cfg.eta = {0.1, 0.2};
  EXPECT_DOUBLE_EQ(cfg.eta_for(0), 0.1);
  EXPECT_DOUBLE_EQ(cfg.eta_for(1), 0.2);
}

TEST(Trace, ShapePhaseOrderAndFinalErrors) {
  test::RandomSpecOptions opts;
  opts.max_horizon = 3;
  GameSpec spec = random_spec(404, opts);
  spec.horizon = 3;
  while (static_cast<int>(spec.a.size()) < 3) {
    spec.a.push_back(spec.a.back());
    spec.a_bar.push_back(spec.a_bar.back());
    for (int i = 0; i < spec.num_players; ++i) {
      spec.b[i].push_back(spec.b[i].back());
      spec.b_bar[i].push_back(spec.b_bar[i].back());
      spec.r[i].push_back(spec.r[i].back());
      spec.r_bar[i].push_back(spec.r_bar[i].back());
      spec.q[i].insert(spec.q[i].end() - 1, spec.q[i].front());
      spec.q_bar[i].insert(spec.q_bar[i].end() - 1, spec.q_bar[i].front());
    }
  }
  const JointModel model = derive_joint_model(spec);
  const RiccatiSolution ne = solve_clne(model);
  LearnerConfig cfg = exact_config(1e-3, 25);
  const RunTrace trace = mrpg_run(model, cfg, ne);

  const int N = model.players();
  ASSERT_EQ(trace.rows.size(),
            static_cast<size_t>(3 * 25 * N));
  int prev_phase = model.horizon() - 1;
  for (size_t idx = 0; idx < trace.rows.size(); idx += 25 * N) {
    EXPECT_EQ(trace.rows[idx].phase_t, prev_phase);
    EXPECT_EQ(trace.rows[idx].iter_k, 1);
    --prev_phase;
  }
  EXPECT_DOUBLE_EQ(
      trace.final_err_k,
      max_gain_distance(trace.profile, ne.gains, Branch::kDeviation));
  EXPECT_DOUBLE_EQ(
      trace.final_err_kbar,
      max_gain_distance(trace.profile, ne.gains, Branch::kMeanField));
}

TEST(RateBound, MatchesHandComputationOnScalarInstance) {
  const JointModel model = derive_joint_model(scalar_tracking_spec());
  // h = ||R + B' Z_1 B|| = 2 at the equilibrium values
  EXPECT_NEAR(rate_bound_diagnostic(model), 1.0 / 22.0, 1e-12);
  EXPECT_GT(rate_bound_diagnostic(model), 0.0);
}

}  // namespace
}  // namespace mftg
