#include "mftg/riccati.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace mftg {

namespace {

constexpr double kRcondFloor = 1e-12;

// One backward step of the coupled gain system: given the next-step
// cost-to-go matrices z_next[i], assemble the block system
//   diag block (i,i): r_scale[i] R^i_t + B^i' Z^i B^i
//   off block  (i,j): B^i' Z^i B^j
//   rhs block  (i):   B^i' Z^i A_t
// and solve for the stacked gains.
std::vector<Mat> solve_stage_gains(const JointModel& model, int t, Branch br,
                                   const std::vector<Mat>& z_next,
                                   const std::vector<double>& r_scale,
                                   double* rcond_out) {
  const int N = model.players();
  int total_p = 0;
  for (int i = 0; i < N; ++i) total_p += model.p(i);
  const int n = model.n();

  Mat phi = Mat::Zero(total_p, total_p);
  Mat rhs = Mat::Zero(total_p, n);
  const Mat a = model.a(t, br);
  int row = 0;
  for (int i = 0; i < N; ++i) {
    const Mat bt_z = model.b(i, t, br).transpose() * z_next[i];
    int col = 0;
    for (int j = 0; j < N; ++j) {
      Mat block = bt_z * model.b(j, t, br);
      if (i == j) block += r_scale[i] * model.r(i, t, br);
      phi.block(row, col, model.p(i), model.p(j)) = block;
      col += model.p(j);
    }
    rhs.block(row, 0, model.p(i), n) = bt_z * a;
    row += model.p(i);
  }

  const double rc = reciprocal_condition(phi);
  if (rcond_out) *rcond_out = rc;
  if (rc < kRcondFloor) throw SingularPhi(t, rc);

  const Mat stacked = phi.partialPivLu().solve(rhs);
  std::vector<Mat> gains(N);
  row = 0;
  for (int i = 0; i < N; ++i) {
    gains[i] = stacked.block(row, 0, model.p(i), n);
    row += model.p(i);
  }
  return gains;
}

void backward_pass(const JointModel& model, Branch br,
                   std::vector<MatSeq>* gains_out, PlayerMatSeq* z_out,
                   MatSeq* f_out, std::vector<double>* rcond_out) {
  const int N = model.players();
  const int T = model.horizon();
  const std::vector<double> no_scale(N, 1.0);
  z_out->assign(N, MatSeq(T + 1));
  gains_out->assign(N, MatSeq(T));
  f_out->assign(T, Mat());
  rcond_out->assign(T, 0.0);
  std::vector<Mat> z_next(N);
  for (int i = 0; i < N; ++i) {
    (*z_out)[i][T] = model.q(i, T, br);
    z_next[i] = (*z_out)[i][T];
  }
  for (int t = T - 1; t >= 0; --t) {
    const std::vector<Mat> k =
        solve_stage_gains(model, t, br, z_next, no_scale, &(*rcond_out)[t]);
    Mat f = model.a(t, br);
    for (int i = 0; i < N; ++i) f -= model.b(i, t, br) * k[i];
    (*f_out)[t] = f;
    for (int i = 0; i < N; ++i) {
      const Mat stage =
          model.q(i, t, br) + k[i].transpose() * model.r(i, t, br) * k[i];
      z_next[i] = symmetrized(f.transpose() * z_next[i] * f + stage);
      (*z_out)[i][t] = z_next[i];
      (*gains_out)[i][t] = k[i];
    }
  }
}

}  // namespace

RiccatiSolution solve_clne(const JointModel& model) {
  RiccatiSolution sol;
  backward_pass(model, Branch::kDeviation, &sol.gains.k, &sol.z, &sol.f,
                &sol.phi_rcond);
  backward_pass(model, Branch::kMeanField, &sol.gains.k_bar, &sol.z_bar,
                &sol.f_bar, &sol.phi_bar_rcond);
  return sol;
}

namespace {

void residual_branch(const JointModel& model, const PolicyProfile& profile,
                     const PlayerMatSeq& z, Branch br,
                     std::vector<std::vector<double>>* out, double* max_out) {
  const int N = model.players();
  const int T = model.horizon();
  out->assign(N, std::vector<double>(T, 0.0));
  *max_out = 0.0;
  for (int t = 0; t < T; ++t) {
    const Mat a = model.a(t, br);
    for (int i = 0; i < N; ++i) {
      const Mat bt_z = model.b(i, t, br).transpose() * z[i][t + 1];
      Mat res = (model.r(i, t, br) + bt_z * model.b(i, t, br)) *
                profile.gain(i, t, br);
      Mat drift = a;
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        drift -= model.b(j, t, br) * profile.gain(j, t, br);
      }
      res -= bt_z * drift;
      (*out)[i][t] = res.norm();
      *max_out = std::max(*max_out, (*out)[i][t]);
    }
  }
}

}  // namespace

ResidualReport verify_ne_residual(const JointModel& model,
                                  const RiccatiSolution& sol) {
  ResidualReport report;
  residual_branch(model, sol.gains, sol.z, Branch::kDeviation,
                  &report.residual_y, &report.max_residual_y);
  residual_branch(model, sol.gains, sol.z_bar, Branch::kMeanField,
                  &report.residual_xbar, &report.max_residual_xbar);
  return report;
}

namespace {

void margins_branch(const JointModel& model, const PlayerMatSeq& z, Branch br,
                    std::vector<std::vector<double>>* out, double* min_out,
                    bool* holds) {
  const int N = model.players();
  const int T = model.horizon();
  const double coupling = std::sqrt(2.0 * model.n() * (N - 1));
  out->assign(N, std::vector<double>(T, 0.0));
  *min_out = std::numeric_limits<double>::infinity();
  for (int t = 0; t < T; ++t) {
    double gb = 0.0;
    for (int j = 0; j < N; ++j)
      gb = std::max(gb, spectral_norm(model.b(j, t, br)));
    for (int i = 0; i < N; ++i) {
      const double margin = min_singular_value(model.r(i, t, br)) -
                            coupling * gb * gb * spectral_norm(z[i][t + 1]);
      (*out)[i][t] = margin;
      *min_out = std::min(*min_out, margin);
    }
  }
  *holds = *min_out >= 0.0;
}

}  // namespace

DiagDomReport check_diag_dominance(const JointModel& model,
                                   const RiccatiSolution& ne) {
  DiagDomReport report;
  margins_branch(model, ne.z, Branch::kDeviation, &report.margin_y,
                 &report.min_margin_y, &report.holds_y);
  margins_branch(model, ne.z_bar, Branch::kMeanField, &report.margin_xbar,
                 &report.min_margin_xbar, &report.holds_xbar);
  return report;
}

namespace {

void gamma_pass(const JointModel& model, Branch br, StageScale* gamma_out,
                std::vector<MatSeq>* gains_out, PlayerMatSeq* z_out) {
  const int N = model.players();
  const int T = model.horizon();
  const double coupling = std::sqrt(2.0 * model.n() * (N - 1));
  gamma_out->assign(N, std::vector<double>(T, 0.0));
  z_out->assign(N, MatSeq(T + 1));
  gains_out->assign(N, MatSeq(T));
  std::vector<Mat> z_next(N);
  for (int i = 0; i < N; ++i) {
    (*z_out)[i][T] = model.q(i, T, br);
    z_next[i] = (*z_out)[i][T];
  }
  for (int t = T - 1; t >= 0; --t) {
    double gb = 0.0;
    for (int j = 0; j < N; ++j)
      gb = std::max(gb, spectral_norm(model.b(j, t, br)));
    std::vector<double> r_scale(N, 1.0);
    for (int i = 0; i < N; ++i) {
      const double need = coupling * gb * gb * spectral_norm(z_next[i]) /
                          min_singular_value(model.r(i, t, br));
      (*gamma_out)[i][t] = std::max(0.0, need - 1.0);
      r_scale[i] = 1.0 + (*gamma_out)[i][t];
    }
    const std::vector<Mat> k =
        solve_stage_gains(model, t, br, z_next, r_scale, nullptr);
    Mat f = model.a(t, br);
    for (int i = 0; i < N; ++i) f -= model.b(i, t, br) * k[i];
    for (int i = 0; i < N; ++i) {
      const Mat stage =
          r_scale[i] *
          (model.q(i, t, br) + k[i].transpose() * model.r(i, t, br) * k[i]);
      z_next[i] = symmetrized(f.transpose() * z_next[i] * f + stage);
      (*z_out)[i][t] = z_next[i];
      (*gains_out)[i][t] = k[i];
    }
  }
}

}  // namespace

AugmentationSchedule compute_gamma_schedule(const JointModel& model) {
  AugmentationSchedule sched;
  gamma_pass(model, Branch::kDeviation, &sched.gamma, &sched.gains.k, &sched.z);
  gamma_pass(model, Branch::kMeanField, &sched.gamma_bar, &sched.gains.k_bar,
             &sched.z_bar);
  return sched;
}

GameSpec scale_stage_costs(const GameSpec& spec, const StageScale& gamma,
                           const StageScale& gamma_bar) {
  GameSpec scaled = spec;
  for (int i = 0; i < spec.num_players; ++i) {
    for (int t = 0; t < spec.horizon; ++t) {
      const double s = 1.0 + gamma[i][t];
      const double sb = 1.0 + gamma_bar[i][t];
      scaled.q[i][t] *= s;
      scaled.r[i][t] *= s;
      scaled.q_bar[i][t] *= sb;
      scaled.r_bar[i][t] *= sb;
    }
  }
  return scaled;
}

}  // namespace mftg
