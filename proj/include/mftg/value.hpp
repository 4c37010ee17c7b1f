#pragma once

#include <vector>

#include "mftg/game.hpp"

namespace mftg {

// Backward cost-to-go recursion for a fixed policy profile on one branch:
//   P^i_T = Q^i_T
//   P^i_t = s^i_t (Q^i_t + K^i_t' R^i_t K^i_t) + L_t' P^i_{t+1} L_t
//   N^i_T = 0,  N^i_t = N^i_{t+1} + tr(Sigma_noise P^i_{t+1})
// where L_t is the closed loop for the branch and s^i_t an optional stage
// scale (1 when no scaling is requested, terminal stage never scaled).
struct ValueRecursion {
  PlayerMatSeq p;                           // p[i][t], t = 0..T
  std::vector<std::vector<double>> offset;  // offset[i][t]
};

using StageScale = std::vector<std::vector<double>>;  // [player][t], t < T

ValueRecursion value_recursion(const JointModel& model,
                               const PolicyProfile& profile, Branch br,
                               const StageScale* stage_scale = nullptr);

// Cost-to-go from time t with initial state ~ N(0, init_cov):
// tr(init_cov P^i_t) + N^i_t.
double cost_to_go(const ValueRecursion& vr, int player, int t,
                  const Mat& init_cov);

// Per-player expected receding-horizon costs from time t, with the time-t
// state drawn N(0, sigma_y_init) on the deviation branch and
// N(0, sigma_xbar_init) on the mean-field branch.
struct CostReport {
  std::vector<double> cost_y;
  std::vector<double> cost_xbar;
  std::vector<double> total;
};

CostReport analytic_cost(const JointModel& model, const PolicyProfile& profile,
                         const Mat& sigma_y_init, const Mat& sigma_xbar_init,
                         int t);

// Full-horizon cost under the game's own noise statistics: both branches
// start from their first noise draw (cov sigma and sigma0).
CostReport analytic_cost(const JointModel& model, const PolicyProfile& profile);

}  // namespace mftg
