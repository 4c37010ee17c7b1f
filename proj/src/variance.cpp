#include "mftg/variance.hpp"

#include "mftg/rng.hpp"

namespace mftg {

VarianceCertificate variance_certificate(const JointModel& model,
                                         const PolicyProfile& profile,
                                         int player, int t, Branch br,
                                         const Mat& init_cov) {
  const int T = model.horizon();
  const int n = model.n();
  const int steps = T - t + 1;  // states z_t .. z_T
  const Mat init_factor = covariance_factor(init_cov);
  const Mat step_factor = covariance_factor(model.noise_cov(br));

  // psi block (s, tau): state z_{t+s} response to the tau-th noise block,
  // i.e. L_{t+s-1} ... L_{t+tau} times the corresponding sqrt factor.
  Mat psi = Mat::Zero(steps * n, steps * n);
  for (int tau = 0; tau < steps; ++tau) {
    const Mat& factor = tau == 0 ? init_factor : step_factor;
    Mat prop = factor;
    psi.block(tau * n, tau * n, n, n) = prop;
    for (int s = tau + 1; s < steps; ++s) {
      prop = closed_loop(model, profile, t + s - 1, br) * prop;
      psi.block(s * n, tau * n, n, n) = prop;
    }
  }

  Mat weighted = psi;  // rows scaled by the stage cost of their timestep
  for (int s = 0; s < steps; ++s) {
    const int time = t + s;
    Mat stage = model.q(player, time, br);
    if (time < T) {
      const Mat& k = profile.gain(player, time, br);
      stage += k.transpose() * model.r(player, time, br) * k;
    }
    weighted.middleRows(s * n, n) = stage * psi.middleRows(s * n, n);
  }

  VarianceCertificate cert;
  cert.psi = psi;
  cert.phi = symmetrized(psi.transpose() * weighted);
  cert.mean = cert.phi.trace();
  cert.variance = 2.0 * cert.phi.squaredNorm();
  return cert;
}

VarianceCertificate variance_certificate(const JointModel& model,
                                         const PolicyProfile& profile,
                                         int player, int t, Branch br) {
  return variance_certificate(model, profile, player, t, br,
                              model.noise_cov(br));
}

}  // namespace mftg
