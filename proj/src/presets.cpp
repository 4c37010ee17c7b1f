#include "mftg/presets.hpp"

#include <stdexcept>

namespace mftg {
namespace {

Mat scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return m;
}

MatSeq repeat(double v, int count) { return MatSeq(count, scalar(v)); }

// Scalar-state spec with time-invariant data; q and r are per player.
GameSpec scalar_spec(int players, int horizon, double a, double a_bar,
                     double b, double b_bar, std::vector<double> q,
                     std::vector<double> q_bar, double r, double r_bar,
                     double sigma, double sigma0) {
  GameSpec spec;
  spec.num_players = players;
  spec.horizon = horizon;
  spec.state_dim = 1;
  spec.control_dims.assign(players, 1);
  spec.a = repeat(a, horizon);
  spec.a_bar = repeat(a_bar, horizon);
  for (int i = 0; i < players; ++i) {
    spec.b.push_back(repeat(b, horizon));
    spec.b_bar.push_back(repeat(b_bar, horizon));
    spec.q.push_back(repeat(q[i], horizon + 1));
    spec.q_bar.push_back(repeat(q_bar[i], horizon + 1));
    spec.r.push_back(repeat(r, horizon));
    spec.r_bar.push_back(repeat(r_bar, horizon));
  }
  spec.sigma = scalar(sigma);
  spec.sigma0 = scalar(sigma0);
  return spec;
}

}  // namespace

GameSpec scalar_tracking_spec() {
  return scalar_spec(1, 1, 1.0, 0.0, 1.0, 0.0, {1.0}, {1.0}, 1.0, 1.0, 1.0,
                     1.0);
}

GameSpec symmetric_duopoly_spec() {
  return scalar_spec(2, 1, 1.0, 0.0, 1.0, 0.0, {1.0, 1.0}, {1.0, 1.0}, 1.0,
                     1.0, 1.0, 1.0);
}

GameSpec population_scaling_spec() {
  return scalar_spec(2, 3, 0.8, 0.1, 1.0, 0.0, {1.0, 1.2}, {3.0, 3.5}, 1.0,
                     1.0, 1.0, 0.0);
}

GameSpec weak_penalty_spec() {
  return scalar_spec(2, 1, 1.0, 0.0, 1.0, 0.0, {1.0, 1.0}, {1.0, 1.0}, 1.0,
                     1.0, 0.2, 0.2);
}

std::vector<std::string> preset_names() {
  return {"mrpg_two_player", "eta_sweep",        "batch_sweep",
          "sample_path_compare", "population_sweep", "augmented_repair"};
}

ExperimentConfig make_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  if (name == "mrpg_two_player") {
    cfg.spec = scalar_spec(2, 2, 1.0, 0.3, 1.0, 0.2, {1.0, 1.3}, {1.1, 0.9},
                           5.0, 5.0, 0.2, 0.2);
    cfg.learner.eta = {1e-3};
    cfg.learner.iterations = 1000;
    cfg.learner.num_directions = 5000;
    cfg.learner.radius = 1e-2;
    return cfg;
  }
  if (name == "eta_sweep" || name == "batch_sweep") {
    cfg.spec = scalar_tracking_spec();
    cfg.learner.eta = {1e-3};
    cfg.learner.iterations = 1000;
    cfg.learner.num_directions = 5000;
    cfg.learner.radius = 1e-2;
    cfg.learner.antithetic = false;
    if (name == "eta_sweep")
      cfg.eta_grid = {1e-2, 1e-3, 1e-4};
    else
      cfg.nb_grid = {1000, 5000, 20000};
    return cfg;
  }
  if (name == "sample_path_compare") {
    cfg.spec = scalar_tracking_spec();
    cfg.spec.sigma0 = Mat::Constant(1, 1, 0.5);
    cfg.learner.eta = {1e-3};
    cfg.learner.iterations = 1000;
    cfg.learner.num_directions = 2000;
    cfg.learner.radius = 1e-2;
    // plain one-point estimator: the whole point of this preset is the
    // visible rollout-noise gap between the two oracles, which paired
    // evaluations would cancel
    cfg.learner.antithetic = false;
    cfg.learner.mode = GradientMode::kZeroOrderSamplePath;
    cfg.learner.population = 1000;
    cfg.nb_grid = {2000, 10000};
    return cfg;
  }
  if (name == "population_sweep") {
    cfg.spec = population_scaling_spec();
    cfg.m_grid = {10, 50, 100, 500, 1000};
    cfg.runs_per_m = {2000, 4000, 8000, 20000, 40000};
    return cfg;
  }
  if (name == "augmented_repair") {
    cfg.spec = weak_penalty_spec();
    cfg.learner.eta = {5e-3};
    cfg.learner.iterations = 1000;
    cfg.learner.mode = GradientMode::kExact;
    cfg.learner.proj_radius = 10.0;
    cfg.gamma_scales = {1.0, 0.5, 0.25, 0.125};
    return cfg;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace mftg
