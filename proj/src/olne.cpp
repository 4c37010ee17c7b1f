#include "mftg/olne.hpp"

#include <Eigen/Dense>

namespace mftg {

namespace {

constexpr double kRcondFloor = 1e-12;
constexpr double kFixedPointTol = 1e-12;
constexpr int kFixedPointMaxIters = 10000;
constexpr double kDamping = 0.5;

// One backward step of the implicit costate recursion
//   P^i = W^i (A - sum_j C^j P^j),  W^i = A' P^i_next + 2 Q^i,  C^j = B^j L^j.
// Rearranged per player: P^i + sum_j (W^i C^j) P^j = W^i A, a linear system
// in the stacked blocks. Falls back to damped fixed-point iteration when the
// stacked matrix is ill-conditioned.
std::vector<Mat> costate_step(const Mat& a, const std::vector<Mat>& c,
                              const std::vector<Mat>& w, int t) {
  const int N = static_cast<int>(c.size());
  const int n = static_cast<int>(a.rows());
  Mat system = Mat::Identity(N * n, N * n);
  Mat rhs(N * n, n);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j)
      system.block(i * n, j * n, n, n) += w[i] * c[j];
    rhs.block(i * n, 0, n, n) = w[i] * a;
  }
  if (reciprocal_condition(system) >= kRcondFloor) {
    const Mat x = system.partialPivLu().solve(rhs);
    std::vector<Mat> p(N);
    for (int i = 0; i < N; ++i) p[i] = x.block(i * n, 0, n, n);
    return p;
  }

  std::vector<Mat> p(N, Mat::Zero(n, n));
  for (int iter = 0; iter < kFixedPointMaxIters; ++iter) {
    Mat drift = a;
    for (int j = 0; j < N; ++j) drift -= c[j] * p[j];
    double delta = 0.0;
    for (int i = 0; i < N; ++i) {
      const Mat next = (1.0 - kDamping) * p[i] + kDamping * (w[i] * drift);
      delta = std::max(delta, (next - p[i]).norm());
      p[i] = next;
    }
    if (delta <= kFixedPointTol) return p;
  }
  throw FixedPointDiverged(t);
}

struct BranchIn {
  // a(t), b(i,t), q(i,t) for the branch; gain maps l(i,t) already combined
  // (L for deviation, L + Lbar for mean field).
  const JointModel* model;
  Branch br;
  const PlayerMatSeq* l_eff;
};

PlayerMatSeq solve_branch(const BranchIn& in) {
  const JointModel& model = *in.model;
  const int N = model.players();
  const int T = model.horizon();
  const int n = model.n();
  PlayerMatSeq p(N, MatSeq(T + 1));
  for (int i = 0; i < N; ++i) p[i][T] = Mat::Zero(n, n);
  for (int t = T - 1; t >= 0; --t) {
    const Mat a = model.a(t, in.br);
    std::vector<Mat> c(N), w(N);
    for (int j = 0; j < N; ++j)
      c[j] = model.b(j, t, in.br) * (*in.l_eff)[j][t];
    for (int i = 0; i < N; ++i)
      w[i] = a.transpose() * p[i][t + 1] + 2.0 * model.q(i, t, in.br);
    const std::vector<Mat> pt = costate_step(a, c, w, t);
    for (int i = 0; i < N; ++i) p[i][t] = pt[i];
  }
  return p;
}

}  // namespace

OlneSolution solve_olne(const JointModel& model) {
  const int N = model.players();
  const int T = model.horizon();
  OlneSolution sol;
  sol.l.assign(N, MatSeq(T));
  sol.l_bar.assign(N, MatSeq(T));
  PlayerMatSeq l_eff(N, MatSeq(T));  // L + Lbar, drives the mean-field branch
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < T; ++t) {
      const Mat r_inv_bt = model.spec.r[i][t].llt().solve(
          model.spec.b[i][t].transpose());
      const Mat rbar_inv_btil = model.spec.r_bar[i][t].llt().solve(
          model.b_tilde[i][t].transpose());
      sol.l[i][t] = 0.5 * r_inv_bt;
      sol.l_bar[i][t] = 0.5 * (rbar_inv_btil - r_inv_bt);
      l_eff[i][t] = 0.5 * rbar_inv_btil;
    }
  }

  BranchIn dev{&model, Branch::kDeviation, &sol.l};
  BranchIn mf{&model, Branch::kMeanField, &l_eff};
  sol.p = solve_branch(dev);
  sol.p_bar = solve_branch(mf);

  sol.gains.k.assign(N, MatSeq(T));
  sol.gains.k_bar.assign(N, MatSeq(T));
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < T; ++t) {
      sol.gains.k[i][t] = sol.l[i][t] * sol.p[i][t];
      sol.gains.k_bar[i][t] = l_eff[i][t] * sol.p_bar[i][t];
    }
  }
  return sol;
}

double olne_residual(const JointModel& model, const OlneSolution& sol,
                     Branch br) {
  const int N = model.players();
  const int T = model.horizon();
  const bool dev = br == Branch::kDeviation;
  const PlayerMatSeq& p = dev ? sol.p : sol.p_bar;
  double worst = 0.0;
  for (int t = 0; t < T; ++t) {
    const Mat a = model.a(t, br);
    Mat drift = a;
    for (int j = 0; j < N; ++j) {
      const Mat l_eff =
          dev ? sol.l[j][t] : Mat(sol.l[j][t] + sol.l_bar[j][t]);
      drift -= model.b(j, t, br) * l_eff * p[j][t];
    }
    for (int i = 0; i < N; ++i) {
      const Mat w = a.transpose() * p[i][t + 1] + 2.0 * model.q(i, t, br);
      worst = std::max(worst, (p[i][t] - w * drift).norm());
    }
  }
  return worst;
}

}  // namespace mftg
