#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mftg/game.hpp"
#include "mftg/value.hpp"

namespace mftg {

enum class GradientMode { kExact, kZeroOrderExpected, kZeroOrderSamplePath };

struct InvalidRadius : std::invalid_argument {
  explicit InvalidRadius(double r)
      : std::invalid_argument("smoothing radius must be positive, got " +
                              std::to_string(r)) {}
};

// Exact receding-horizon policy gradient of player i at time t:
//   2((R + B' P_{t+1} B) K^i_t - B' P_{t+1} (A - sum_{j != i} B^j K^j_t)) Sigma
// with Sigma = sigma * I the exploration covariance of the time-t state and
// P_{t+1} the cost-to-go under the frozen future controllers. Natural version
// drops the trailing Sigma.
Mat analytic_gradient(const JointModel& model, const PolicyProfile& profile,
                      int i, int t, Branch br, double sigma);
Mat analytic_natural_gradient(const JointModel& model,
                              const PolicyProfile& profile, int i, int t,
                              Branch br);

// Same, with the cost-to-go recursion precomputed (learner hot path).
Mat gradient_bracket(const JointModel& model, const PolicyProfile& profile,
                     const Mat& p_next, int i, int t, Branch br);

// Receding-horizon cost of player i at time t as a function of the candidate
// time-t gain, everything else frozen:
//   J(K) = tr(sigma (Q + K'RK + L(K)' P_next L(K))) + tail
//   L(K) = a_other - b K,  tail = tr(noise_cov P_next) + offset_{t+1}.
// Exactly quadratic in K.
struct StageOracle {
  Mat a_other;
  Mat b;
  Mat q;
  Mat r;
  Mat p_next;
  Mat sigma;  // covariance of the time-t state
  double tail = 0.0;
  double operator()(const Mat& k) const;
};

StageOracle make_expected_cost_oracle(const JointModel& model,
                                      const PolicyProfile& profile,
                                      const ValueRecursion& vr, int i, int t,
                                      Branch br, double sigma);

// Cost oracle for the zero-order estimator: candidate gain plus a substream
// seed (sample-path oracles draw their rollout noise from it, deterministic
// oracles ignore it).
using CostOracle = std::function<double(const Mat&, uint64_t)>;

struct ZeroOrderOptions {
  int num_directions = 5000;  // mini-batch size N_b
  double radius = 1e-2;
  bool antithetic = true;
  uint64_t seed = 0;
};

struct GradientEstimate {
  Mat raw;      // estimates dJ/dK (includes the Sigma factor of the cost)
  Mat natural;  // raw / sigma for isotropic exploration
  GradientMode mode = GradientMode::kZeroOrderExpected;
  int num_directions = 0;
  double radius = 0.0;
  uint64_t seed = 0;
};

// Sphere-smoothed estimate at base point k0: directions e_j are i.i.d.
// normal fills scaled to Frobenius norm exactly r, and
//   raw = d/(N_b r^2) sum_j w_j e_j,  d = rows*cols,
// with w_j = J(k0+e_j) in plain mode and (J(k0+e_j) - J(k0-e_j))/2 in
// antithetic mode (both evaluations share the j-th substream seed). The
// receding-horizon cost is exactly quadratic in the gain, so the antithetic
// form is unbiased for the true gradient at any radius.
GradientEstimate zero_order_gradient(const CostOracle& oracle, const Mat& k0,
                                     double sigma, const ZeroOrderOptions& opt);

// Bias of the smoothed gradient as a function of the radius: for each r,
// averages `repeats` independent estimates (num_directions each) and reports
// the distance to the analytic gradient together with a 3-standard-error
// noise floor. The log-log slope is fitted over the radii whose bias clears
// the floor; slope_valid is false when fewer than two do.
struct BiasProbeRow {
  double radius = 0.0;
  double bias = 0.0;
  double noise_floor = 0.0;
};

struct BiasProbeTable {
  std::vector<BiasProbeRow> rows;
  double slope = 0.0;
  bool slope_valid = false;
};

BiasProbeTable smoothed_gradient_bias_probe(const CostOracle& oracle,
                                            const Mat& k0, const Mat& analytic,
                                            const std::vector<double>& radii,
                                            int num_directions, int repeats,
                                            bool antithetic, uint64_t seed);

BiasProbeTable smoothed_gradient_bias_probe(const JointModel& model,
                                            const PolicyProfile& profile,
                                            int i, int t, Branch br,
                                            double sigma,
                                            const std::vector<double>& radii,
                                            int num_directions, int repeats,
                                            uint64_t seed);

}  // namespace mftg
