#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "mftg/game.hpp"
#include "mftg/value.hpp"

namespace mftg {

// Coupled-system matrix at some timestep became numerically singular, so the
// simultaneous best-response system has no reliable solution there.
struct SingularPhi : std::runtime_error {
  SingularPhi(int t_, double rcond_)
      : std::runtime_error("coupled gain system singular at t=" +
                           std::to_string(t_) +
                           " (rcond=" + std::to_string(rcond_) + ")"),
        t(t_),
        rcond(rcond_) {}
  int t;
  double rcond;
};

// Closed-loop Nash equilibrium via the coupled backward recursion, run
// independently on the deviation and mean-field branches.
struct RiccatiSolution {
  PolicyProfile gains;
  PlayerMatSeq z;      // z[i][t], t = 0..T, deviation branch
  PlayerMatSeq z_bar;  // mean-field branch
  MatSeq f;            // closed loop A_t - sum_i B^i_t K^i_t, t < T
  MatSeq f_bar;
  std::vector<double> phi_rcond;  // reciprocal condition of the stage system
  std::vector<double> phi_bar_rcond;
};

RiccatiSolution solve_clne(const JointModel& model);

// Stationarity check: measures, per player and timestep,
//   || (R + B' Z_{t+1} B) K^i + sum_{j != i} B' Z_{t+1} B^j K^j
//      - B' Z_{t+1} A ||_F
// on each branch. Zero (up to round-off) exactly at the equilibrium.
struct ResidualReport {
  std::vector<std::vector<double>> residual_y;     // [player][t]
  std::vector<std::vector<double>> residual_xbar;  // [player][t]
  double max_residual_y = 0.0;
  double max_residual_xbar = 0.0;
  double max_residual() const {
    return std::max(max_residual_y, max_residual_xbar);
  }
};

ResidualReport verify_ne_residual(const JointModel& model,
                                  const RiccatiSolution& sol);

// Sufficient-condition margin, per player and timestep:
//   sigma_min(R^i_t) - sqrt(2 n (N-1)) (max_j ||B^j_t||_2)^2 ||Z^i_{t+1}||_2
// evaluated on both branches with that branch's matrices. The condition holds
// when every margin is nonnegative.
struct DiagDomReport {
  std::vector<std::vector<double>> margin_y;
  std::vector<std::vector<double>> margin_xbar;
  double min_margin_y = 0.0;
  double min_margin_xbar = 0.0;
  bool holds_y = false;
  bool holds_xbar = false;
  bool holds() const { return holds_y && holds_xbar; }
};

DiagDomReport check_diag_dominance(const JointModel& model,
                                   const RiccatiSolution& ne);

// Cost-augmentation schedule restoring the sufficient condition: backward
// pass that at each step picks
//   gamma^i_t = max(0, sqrt(2 n (N-1)) gB_t^2 ||P^i_{t+1}||_2
//                      / sigma_min(R^i_t) - 1),
// gB_t = max_j ||B^j_t||_2, then solves the coupled gain system of the game
// with stage costs scaled by (1 + gamma^i_t) (terminal cost untouched) and
// continues the recursion with the augmented cost-to-go. Both branches get
// their own schedule.
struct AugmentationSchedule {
  StageScale gamma;      // [player][t], t < T
  StageScale gamma_bar;
  PolicyProfile gains;   // equilibrium of the augmented game
  PlayerMatSeq z;
  PlayerMatSeq z_bar;
};

AugmentationSchedule compute_gamma_schedule(const JointModel& model);

// Returns a copy of the spec with q and r scaled by (1 + gamma^i_t) on the
// deviation branch and q_bar, r_bar by (1 + gamma_bar^i_t) on the mean-field
// branch, for t < T. Solving the scaled game reproduces the schedule's gains.
GameSpec scale_stage_costs(const GameSpec& spec, const StageScale& gamma,
                           const StageScale& gamma_bar);

}  // namespace mftg
