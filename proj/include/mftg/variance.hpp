#pragma once

#include "mftg/game.hpp"

namespace mftg {

// Exact first and second moments of the realized path cost of one player on
// one branch, from start time t. The state stack (z_t, ..., z_T) is a linear
// image Psi of the stacked standard-normal driving noise, so the cost is the
// quadratic form Phi = Psi' diag(Q_K(s)) Psi with mean tr(Phi) and variance
// 2 ||Phi||_F^2.
struct VarianceCertificate {
  Mat psi;  // block lower triangular, closed-loop products times sigma^{1/2}
  Mat phi;
  double mean = 0.0;
  double variance = 0.0;
};

// init_cov is the covariance of the time-t state; the game's own convention
// draws it from the branch noise (cov sigma resp. sigma0).
VarianceCertificate variance_certificate(const JointModel& model,
                                         const PolicyProfile& profile,
                                         int player, int t, Branch br,
                                         const Mat& init_cov);

VarianceCertificate variance_certificate(const JointModel& model,
                                         const PolicyProfile& profile,
                                         int player, int t, Branch br);

}  // namespace mftg
