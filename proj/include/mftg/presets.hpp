#pragma once

#include <string>
#include <vector>

#include "mftg/config_io.hpp"

namespace mftg {

// Small scalar instances with hand-checkable equilibria, shared by the
// example configs, the presets, and the test suite.

// One player, horizon 1, all-ones data. Equilibrium gain 1/2 on both
// branches, initial value matrix 3/2.
GameSpec scalar_tracking_spec();

// Two players, horizon 1, all-ones data. Coupled stage system gives
// K^1 = K^2 = 1/3 on both branches.
GameSpec symmetric_duopoly_spec();

// Two players, horizon 3, zero common noise. The finite-population cost gap
// decays like 1/M against the infinite-population limit.
GameSpec population_scaling_spec();

// Two players whose control penalty is too weak for the gain-update
// dominance condition (margin 1 - sqrt(2) at t = 0); cost augmentation with
// gamma = sqrt(2) - 1 restores it exactly.
GameSpec weak_penalty_spec();

std::vector<std::string> preset_names();

// Expands a named experiment: model, learner settings, and sweep grids.
// Throws std::invalid_argument for unknown names.
//   mrpg_two_player      two-player receding-horizon learning run
//   eta_sweep            step-size sweep, one-point estimator
//   batch_sweep          mini-batch-size sweep, one-point estimator
//   sample_path_compare  expected-cost vs sample-path oracle comparison
//   population_sweep     finite-population gap decay measurement
//   augmented_repair     dominance repair and augmented learning run
ExperimentConfig make_preset(const std::string& name);

}  // namespace mftg
