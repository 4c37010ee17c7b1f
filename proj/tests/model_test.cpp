#include <gtest/gtest.h>

#include <cmath>

#include "mftg/game.hpp"
#include "support.hpp"

namespace mftg {
namespace {

using test::expect_mat_near;
using test::random_spec;

TEST(Validate, AcceptsWellFormedRandomSpecs) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const ValidationReport report = validate_spec(random_spec(seed));
    EXPECT_TRUE(report.ok()) << "seed " << seed << "\n"
                             << report.to_string();
  }
}

TEST(Validate, CatchesDimensionMismatch) {
  GameSpec spec = random_spec(4);
  spec.a[0] = Mat::Zero(spec.state_dim, spec.state_dim + 1);
  const ValidationReport report = validate_spec(spec);
  ASSERT_FALSE(report.ok());
  EXPECT_NE(report.to_string().find("a[0]"), std::string::npos)
      << report.to_string();
}

TEST(Validate, CatchesSequenceLengthMismatch) {
  GameSpec spec = random_spec(5);
  spec.q[0].pop_back();
  EXPECT_FALSE(validate_spec(spec).ok());
}

TEST(Validate, CatchesIndefiniteControlPenalty) {
  GameSpec spec = random_spec(6);
  const int p = spec.control_dims[0];
  spec.r[0][0] = -Mat::Identity(p, p);
  const ValidationReport report = validate_spec(spec);
  ASSERT_FALSE(report.ok());
  EXPECT_NE(report.to_string().find("r[0][0]"), std::string::npos)
      << report.to_string();
}

TEST(Validate, CatchesAsymmetricStateCost) {
  GameSpec spec;
  uint64_t seed = 2;
  do {
    spec = random_spec(seed++);
  } while (spec.state_dim < 2);
  spec.q[0][1](0, 1) += 0.3;
  EXPECT_FALSE(validate_spec(spec).ok());
}

TEST(Validate, CatchesIndefiniteNoiseCovariance) {
  GameSpec spec = random_spec(7);
  spec.sigma = -Mat::Identity(spec.state_dim, spec.state_dim);
  EXPECT_FALSE(validate_spec(spec).ok());
}

TEST(JointModel, DerivesMeanFieldMatrices) {
  const GameSpec spec = random_spec(11);
  const JointModel model = derive_joint_model(spec);
  for (int t = 0; t < spec.horizon; ++t) {
    expect_mat_near(model.a_tilde[t], spec.a[t] + spec.a_bar[t], 1e-15);
    for (int i = 0; i < spec.num_players; ++i)
      expect_mat_near(model.b_tilde[i][t], spec.b[i][t] + spec.b_bar[i][t],
                      1e-15);
  }
  EXPECT_EQ(&model.a(0, Branch::kDeviation), &model.spec.a[0]);
  expect_mat_near(model.a(0, Branch::kMeanField), model.a_tilde[0], 0.0);
  expect_mat_near(model.noise_cov(Branch::kDeviation), spec.sigma, 0.0);
  expect_mat_near(model.noise_cov(Branch::kMeanField), spec.sigma0, 0.0);
}

TEST(JointModel, DeriveThrowsListingViolations) {
  GameSpec spec = random_spec(12);
  spec.r[0][0] = -spec.r[0][0];
  try {
    derive_joint_model(spec);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("r[0][0]"), std::string::npos)
        << e.what();
  }
}

TeamSpec small_teams() {
  TeamSpec teams;
  teams.num_teams = 2;
  teams.horizon = 2;
  teams.team_state_dim = 2;
  teams.control_dims = {1, 2};
  teams.agent_counts = {10, 20};
  std::mt19937_64 eng(99);
  for (int i = 0; i < 2; ++i) {
    MatSeq a, a_bar, q, q_bar, r, r_bar;
    std::vector<MatSeq> b(2), b_bar(2);
    for (int t = 0; t < 2; ++t) {
      a.push_back(test::random_mat(eng, 2, 2, 1.0));
      a_bar.push_back(test::random_mat(eng, 2, 2, 0.5));
      for (int k = 0; k < 2; ++k) {
        b[k].push_back(test::random_mat(eng, 2, teams.control_dims[k], 1.0));
        b_bar[k].push_back(
            test::random_mat(eng, 2, teams.control_dims[k], 0.5));
      }
      r.push_back(test::random_psd(eng, teams.control_dims[i], 0.5, 0.2));
      r_bar.push_back(test::random_psd(eng, teams.control_dims[i], 0.5, 0.2));
    }
    for (int t = 0; t <= 2; ++t) {
      q.push_back(test::random_psd(eng, 2, 0.5, 0.1));
      q_bar.push_back(test::random_psd(eng, 2, 0.5, 0.1));
    }
    teams.a.push_back(a);
    teams.a_bar.push_back(a_bar);
    teams.b.push_back(b);
    teams.b_bar.push_back(b_bar);
    teams.q.push_back(q);
    teams.q_bar.push_back(q_bar);
    teams.r.push_back(r);
    teams.r_bar.push_back(r_bar);
    teams.sigma.push_back(test::random_psd(eng, 2, 0.5, 0.1));
  }
  teams.sigma0 = test::random_psd(eng, 4, 0.5, 0.1);
  return teams;
}

TEST(Teams, AssembleJointPlacesBlocks) {
  const TeamSpec teams = small_teams();
  const GameSpec joint = assemble_joint(teams);
  ASSERT_EQ(joint.state_dim, 4);
  ASSERT_EQ(joint.num_players, 2);
  EXPECT_EQ(joint.control_dims, teams.control_dims);

  // A is block diagonal in the team states.
  expect_mat_near(joint.a[0].block(0, 0, 2, 2), teams.a[0][0], 0.0);
  expect_mat_near(joint.a[0].block(2, 2, 2, 2), teams.a[1][0], 0.0);
  expect_mat_near(joint.a[0].block(0, 2, 2, 2), Mat::Zero(2, 2), 0.0);

  // Player k's input matrix stacks its per-team rows.
  expect_mat_near(joint.b[1][0].block(0, 0, 2, 2), teams.b[0][1][0], 0.0);
  expect_mat_near(joint.b[1][0].block(2, 0, 2, 2), teams.b[1][1][0], 0.0);

  // Team i's cost lives on the (i, i) block of its own q.
  expect_mat_near(joint.q[1][0].block(2, 2, 2, 2), teams.q[1][0], 0.0);
  expect_mat_near(joint.q[1][0].block(0, 0, 2, 2), Mat::Zero(2, 2), 0.0);

  EXPECT_TRUE(validate_spec(joint).ok());
}

TEST(Teams, ExtractRoundTrips) {
  const TeamSpec teams = small_teams();
  const GameSpec joint = assemble_joint(teams);
  const TeamSpec back = extract_teams(joint, 2, teams.agent_counts);
  for (int i = 0; i < 2; ++i) {
    for (int t = 0; t < 2; ++t) {
      expect_mat_near(back.a[i][t], teams.a[i][t], 0.0);
      expect_mat_near(back.r[i][t], teams.r[i][t], 0.0);
      for (int k = 0; k < 2; ++k)
        expect_mat_near(back.b[i][k][t], teams.b[i][k][t], 0.0);
    }
    for (int t = 0; t <= 2; ++t)
      expect_mat_near(back.q_bar[i][t], teams.q_bar[i][t], 0.0);
    expect_mat_near(back.sigma[i], teams.sigma[i], 0.0);
  }
  expect_mat_near(back.sigma0, teams.sigma0, 0.0);
}

TEST(Teams, ExtractRejectsMismatchedDims) {
  const GameSpec joint = assemble_joint(small_teams());
  EXPECT_THROW(extract_teams(joint, 3, {10, 20}), std::invalid_argument);
}

TEST(Profile, ZerosMatchModelShape) {
  const JointModel model = derive_joint_model(random_spec(21));
  const PolicyProfile profile = PolicyProfile::zeros(model);
  ASSERT_EQ(static_cast<int>(profile.k.size()), model.players());
  for (int i = 0; i < model.players(); ++i) {
    ASSERT_EQ(static_cast<int>(profile.k[i].size()), model.horizon());
    for (int t = 0; t < model.horizon(); ++t) {
      EXPECT_EQ(profile.k[i][t].rows(), model.p(i));
      EXPECT_EQ(profile.k[i][t].cols(), model.n());
      EXPECT_TRUE(profile.k[i][t].isZero(0.0));
    }
  }
  EXPECT_TRUE(profile.finite());
}

TEST(Profile, FiniteDetectsNan) {
  const JointModel model = derive_joint_model(random_spec(22));
  PolicyProfile profile = PolicyProfile::zeros(model);
  profile.k_bar[0][0](0, 0) = std::nan("");
  EXPECT_FALSE(profile.finite());
}

TEST(Profile, ClosedLoopMatchesHandSum) {
  const JointModel model = derive_joint_model(random_spec(23));
  PolicyProfile profile = PolicyProfile::zeros(model);
  std::mt19937_64 eng(5);
  for (int i = 0; i < model.players(); ++i)
    for (int t = 0; t < model.horizon(); ++t) {
      profile.k[i][t] = test::random_mat(eng, model.p(i), model.n(), 0.3);
      profile.k_bar[i][t] = test::random_mat(eng, model.p(i), model.n(), 0.3);
    }
  for (Branch br : {Branch::kDeviation, Branch::kMeanField}) {
    Mat expected = model.a(0, br);
    for (int i = 0; i < model.players(); ++i)
      expected -= model.b(i, 0, br) * profile.gain(i, 0, br);
    expect_mat_near(closed_loop(model, profile, 0, br), expected, 1e-14);
  }
}

TEST(Profile, MaxGainDistancePicksWorstEntry) {
  const JointModel model = derive_joint_model(random_spec(24));
  PolicyProfile a = PolicyProfile::zeros(model);
  PolicyProfile b = PolicyProfile::zeros(model);
  b.k[0][0](0, 0) = 0.25;
  b.k_bar.back().back()(0, 0) = 1.5;
  EXPECT_DOUBLE_EQ(max_gain_distance(a, b, Branch::kDeviation), 0.25);
  EXPECT_DOUBLE_EQ(max_gain_distance(a, b, Branch::kMeanField), 1.5);
}

}  // namespace
}  // namespace mftg
