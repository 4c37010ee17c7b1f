#include "mftg/value.hpp"

namespace mftg {

ValueRecursion value_recursion(const JointModel& model,
                               const PolicyProfile& profile, Branch br,
                               const StageScale* stage_scale) {
  const int N = model.players();
  const int T = model.horizon();
  const Mat noise = model.noise_cov(br);

  ValueRecursion vr;
  vr.p.resize(N);
  vr.offset.assign(N, std::vector<double>(T + 1, 0.0));
  for (int i = 0; i < N; ++i) {
    vr.p[i].resize(T + 1);
    vr.p[i][T] = model.q(i, T, br);
  }
  for (int t = T - 1; t >= 0; --t) {
    const Mat l = closed_loop(model, profile, t, br);
    for (int i = 0; i < N; ++i) {
      const Mat& k = profile.gain(i, t, br);
      const double scale = stage_scale ? (*stage_scale)[i][t] : 1.0;
      Mat stage = model.q(i, t, br) + k.transpose() * model.r(i, t, br) * k;
      vr.p[i][t] = symmetrized(scale * stage + l.transpose() * vr.p[i][t + 1] * l);
      vr.offset[i][t] =
          vr.offset[i][t + 1] + (noise * vr.p[i][t + 1]).trace();
    }
  }
  return vr;
}

double cost_to_go(const ValueRecursion& vr, int player, int t,
                  const Mat& init_cov) {
  return (init_cov * vr.p[player][t]).trace() + vr.offset[player][t];
}

CostReport analytic_cost(const JointModel& model, const PolicyProfile& profile,
                         const Mat& sigma_y_init, const Mat& sigma_xbar_init,
                         int t) {
  const int N = model.players();
  CostReport report;
  report.cost_y.resize(N);
  report.cost_xbar.resize(N);
  report.total.resize(N);
  const ValueRecursion vy = value_recursion(model, profile, Branch::kDeviation);
  const ValueRecursion vx = value_recursion(model, profile, Branch::kMeanField);
  for (int i = 0; i < N; ++i) {
    report.cost_y[i] = cost_to_go(vy, i, t, sigma_y_init);
    report.cost_xbar[i] = cost_to_go(vx, i, t, sigma_xbar_init);
    report.total[i] = report.cost_y[i] + report.cost_xbar[i];
  }
  return report;
}

CostReport analytic_cost(const JointModel& model, const PolicyProfile& profile) {
  return analytic_cost(model, profile, model.noise_cov(Branch::kDeviation),
                       model.noise_cov(Branch::kMeanField), 0);
}

}  // namespace mftg
