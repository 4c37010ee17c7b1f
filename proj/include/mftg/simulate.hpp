#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mftg/game.hpp"
#include "mftg/rng.hpp"

namespace mftg {

// One realized rollout. For the finite-population simulator the columns of
// x[t] are the M joint-agent states; xbar is their empirical mean. For the
// mean-field simulator there is a single representative column and xbar is
// the exact limit recursion (not the column mean).
struct Trajectory {
  std::vector<Mat> x;  // x[t] is n x M, t = 0..T
  Mat xbar;            // n x (T+1)
  int population = 1;
  std::vector<double> cost_y;     // realized per-player costs over the full
  std::vector<double> cost_xbar;  // horizon (see sample_path_cost)
  std::vector<double> cost_total;

  int horizon() const { return static_cast<int>(x.size()) - 1; }
  // Deviations y^j_t = x^j_t - xbar_t as columns.
  Mat deviations(int t) const { return x[t].colwise() - Vec(xbar.col(t)); }
  // Realized controls of player i at time t, one column per agent.
  Mat controls(const PolicyProfile& profile, int i, int t) const {
    return -profile.k[i][t] * deviations(t) -
           (profile.k_bar[i][t] * xbar.col(t)).replicate(1, x[t].cols());
  }
};

// Representative-agent rollout of the decoupled limit system:
//   y_0 = w_0, y_{t+1} = L_t y_t + w_{t+1}       (cov sigma)
//   xbar_0 = w0_0, xbar_{t+1} = Lbar_t xbar_t + w0_{t+1}  (cov sigma0)
// and x_t = y_t + xbar_t. run_id selects an independent noise substream.
Trajectory simulate_mean_field(const JointModel& model,
                               const PolicyProfile& profile, uint64_t seed,
                               uint64_t run_id = 0);

// M-agent rollout under u^{i,j}_t = -K^i_t (x^j_t - xtil_t) - Kbar^i_t xtil_t
// with the empirical mean field xtil_t = (1/M) sum_j x^j_t and
// x^j_0 = w^j_0 + w0_0. Common-noise substreams match simulate_mean_field for
// the same (seed, run_id). `teams` is accepted for interface symmetry with
// team-structured models; the joint matrices already determine the dynamics,
// so it may be null.
Trajectory simulate_finite_population(const JointModel& model,
                                      const PolicyProfile& profile, int num_agents,
                                      uint64_t seed, uint64_t run_id = 0,
                                      const TeamSpec* teams = nullptr);

// Realized cost of player i from time t:
//   first:  (1/M) sum_j sum_{s=t}^T (y^j_s)' (Q^i_s + K^i_s' R^i_s K^i_s) y^j_s
//   second: sum_{s=t}^T xbar_s' (Qbar^i_s + Kbar' Rbar Kbar) xbar_s
// with no control penalty at s = T.
std::pair<double, double> sample_path_cost(const Trajectory& traj,
                                           const JointModel& model,
                                           const PolicyProfile& profile, int i,
                                           int t);

// Per-M Monte-Carlo estimate of the per-agent finite-population cost under
// the profile, minus the analytic infinite-population cost.
struct EpsNashRow {
  int population = 0;
  std::vector<double> gap;  // per player, |J_M - J_inf|
  std::vector<double> se;   // standard error of the J_M estimate
};

struct EpsNashTable {
  std::vector<EpsNashRow> rows;
  std::vector<double> slope;  // per player, OLS slope of log gap vs log M
  // False when fewer than two of a player's gaps clear their own 3-standard-
  // error noise floor; the slope then fits Monte-Carlo noise, not a decay.
  std::vector<bool> slope_applicable;
};

EpsNashTable eps_nash_gap(const JointModel& model, const PolicyProfile& profile,
                          const std::vector<int>& m_grid,
                          const std::vector<int>& runs_per_m, uint64_t seed,
                          const TeamSpec* teams = nullptr);

// Least-squares slope of y against x; used for the gap-vs-M and bias-vs-radius
// log-log fits.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mftg
