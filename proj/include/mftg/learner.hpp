#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mftg/game.hpp"
#include "mftg/gradient.hpp"
#include "mftg/riccati.hpp"

namespace mftg {

struct LearnerConfig {
  std::vector<double> eta{1e-3};  // per player, broadcast when a single entry
  int iterations = 1000;          // inner iterations per phase
  int num_directions = 5000;      // mini-batch size of the zero-order estimate
  double radius = 1e-2;           // smoothing radius
  double sigma_y = 1.0;           // exploration covariance scale: Sigma = s*I
  double sigma_xbar = 1.0;
  double proj_radius = std::numeric_limits<double>::infinity();
  bool antithetic = true;
  GradientMode mode = GradientMode::kZeroOrderExpected;
  int population = 1000;  // rollout agents per sample-path oracle call
  StageScale gamma;       // optional stage-cost augmentation, empty = none
  StageScale gamma_bar;
  uint64_t seed = 0;

  double eta_for(int player) const {
    return eta.size() == 1 ? eta[0] : eta.at(player);
  }
};

struct TraceRow {
  int phase_t = 0;
  int iter_k = 0;
  int player = 0;
  double err_k = std::numeric_limits<double>::quiet_NaN();
  double err_kbar = std::numeric_limits<double>::quiet_NaN();
  double cost_y = 0.0;
  double cost_xbar = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  PolicyProfile profile;
  // max over players and timesteps of the gain distance to the reference
  double final_err_k = std::numeric_limits<double>::quiet_NaN();
  double final_err_kbar = std::numeric_limits<double>::quiet_NaN();
};

struct DivergenceDetected : std::runtime_error {
  DivergenceDetected(int phase_t_, int iter_k_, RunTrace partial_)
      : std::runtime_error("gain norm exceeded divergence guard at t=" +
                           std::to_string(phase_t_) +
                           ", k=" + std::to_string(iter_k_)),
        phase_t(phase_t_),
        iter_k(iter_k_),
        partial(std::move(partial_)) {}
  int phase_t;
  int iter_k;
  RunTrace partial;
};

// Receding-horizon natural policy gradient: learns the time-(T-1) gains
// first, then walks backward, with every player updating simultaneously
// against the pre-update profile. Gradient mode selects the oracle (exact
// bracket, expected-cost zero-order, or sample-path zero-order over
// `population`-agent rollouts). When a reference is supplied the trace
// records per-phase gain errors against it.
RunTrace mrpg_run(const JointModel& model, const LearnerConfig& config,
                  const PolicyProfile* reference = nullptr);
inline RunTrace mrpg_run(const JointModel& model, const LearnerConfig& config,
                         const RiccatiSolution& reference) {
  return mrpg_run(model, config, &reference.gains);
}

// Sample-path variant: forces the sample-path oracle. `teams` is accepted for
// interface symmetry and may be null (the joint model fixes the rollout law).
RunTrace sp_mrpg_run(const JointModel& model, const LearnerConfig& config,
                     const PolicyProfile* reference = nullptr,
                     const TeamSpec* teams = nullptr);

// Runs mrpg on the stage-cost-augmented game. Uses the config's gamma
// schedules when present, otherwise computes them; requires a finite
// projection radius. Default reference is the augmented equilibrium.
RunTrace augmented_mrpg_run(const JointModel& model,
                            const LearnerConfig& config,
                            const PolicyProfile* reference = nullptr);

// Non-receding baseline: every iteration updates the controllers of all
// timesteps from the full-horizon cost, natural-scaled by the inverse state
// covariance at each timestep. Supports exact and expected zero-order modes.
RunTrace vanilla_npg_run(const JointModel& model, const LearnerConfig& config,
                         const PolicyProfile* reference = nullptr);

// Smallest theoretical step-size cap over players, timesteps, and branches,
//   min( 1/(4h^2 + 3h), 1/(2h^2 + 1) ),  h = ||R^i_t + B' Z^i_{t+1} B||_2,
// evaluated at the equilibrium value matrices. Diagnostic only; model-free
// runs cannot compute it.
double rate_bound_diagnostic(const JointModel& model);

}  // namespace mftg
