#include "mftg/simulate.hpp"

#include <cmath>

#include "mftg/parallel.hpp"
#include "mftg/value.hpp"

namespace mftg {

namespace {

// Substream tags so the two simulators share common-noise draws for the same
// (seed, run_id) while idiosyncratic channels stay independent.
constexpr uint64_t kTagDeviation = 0;
constexpr uint64_t kTagCommon = 1;
constexpr uint64_t kTagAgent = 2;

Mat stage_cost_matrix(const JointModel& model, const PolicyProfile& profile,
                      int i, int s, Branch br) {
  if (s == model.horizon()) return model.q(i, s, br);
  const Mat& k = profile.gain(i, s, br);
  return model.q(i, s, br) + k.transpose() * model.r(i, s, br) * k;
}

}  // namespace

Trajectory simulate_mean_field(const JointModel& model,
                               const PolicyProfile& profile, uint64_t seed,
                               uint64_t run_id) {
  const int T = model.horizon();
  const int n = model.n();
  const NoiseSampler dev_noise(model.noise_cov(Branch::kDeviation));
  const NoiseSampler common_noise(model.noise_cov(Branch::kMeanField));

  Trajectory traj;
  traj.population = 1;
  traj.x.assign(T + 1, Mat(n, 1));
  traj.xbar = Mat(n, T + 1);

  Vec y = dev_noise.sample(substream_seed(seed, {run_id, kTagDeviation, 0}));
  Vec xbar = common_noise.sample(substream_seed(seed, {run_id, kTagCommon, 0}));
  traj.x[0].col(0) = y + xbar;
  traj.xbar.col(0) = xbar;
  for (int t = 0; t < T; ++t) {
    y = closed_loop(model, profile, t, Branch::kDeviation) * y +
        dev_noise.sample(
            substream_seed(seed, {run_id, kTagDeviation, uint64_t(t) + 1}));
    xbar = closed_loop(model, profile, t, Branch::kMeanField) * xbar +
           common_noise.sample(
               substream_seed(seed, {run_id, kTagCommon, uint64_t(t) + 1}));
    traj.x[t + 1].col(0) = y + xbar;
    traj.xbar.col(t + 1) = xbar;
  }

  const int N = model.players();
  traj.cost_y.resize(N);
  traj.cost_xbar.resize(N);
  traj.cost_total.resize(N);
  for (int i = 0; i < N; ++i) {
    const auto [cy, cx] = sample_path_cost(traj, model, profile, i, 0);
    traj.cost_y[i] = cy;
    traj.cost_xbar[i] = cx;
    traj.cost_total[i] = cy + cx;
  }
  return traj;
}

Trajectory simulate_finite_population(const JointModel& model,
                                      const PolicyProfile& profile,
                                      int num_agents, uint64_t seed,
                                      uint64_t run_id, const TeamSpec* teams) {
  (void)teams;
  const int T = model.horizon();
  const int n = model.n();
  const int N = model.players();
  const int M = num_agents;
  const NoiseSampler agent_noise(model.spec.sigma);
  const NoiseSampler common_noise(model.spec.sigma0);

  Trajectory traj;
  traj.population = M;
  traj.x.assign(T + 1, Mat(n, M));
  traj.xbar = Mat(n, T + 1);

  auto agent_draws = [&](int t) {
    Mat w(n, M);
    for (int j = 0; j < M; ++j)
      w.col(j) = agent_noise.sample(
          substream_seed(seed, {run_id, kTagAgent, uint64_t(t), uint64_t(j)}));
    return w;
  };

  {
    const Vec w0 =
        common_noise.sample(substream_seed(seed, {run_id, kTagCommon, 0}));
    traj.x[0] = agent_draws(0).colwise() + w0;
    traj.xbar.col(0) = traj.x[0].rowwise().mean();
  }
  for (int t = 0; t < T; ++t) {
    const Vec xtil = traj.xbar.col(t);
    const Mat y = traj.x[t].colwise() - xtil;
    // Literal joint dynamics: per-agent feedback on the deviation plus the
    // shared mean-field feedback, with the mean control of each player
    // entering through Btil = B + Bbar.
    Mat next = model.spec.a[t] * traj.x[t];
    Vec mean_drive = model.spec.a_bar[t] * xtil;
    for (int i = 0; i < N; ++i) {
      next -= model.spec.b[i][t] * (profile.k[i][t] * y);
      mean_drive -= model.b_tilde[i][t] * (profile.k_bar[i][t] * xtil);
    }
    const Vec w0 = common_noise.sample(
        substream_seed(seed, {run_id, kTagCommon, uint64_t(t) + 1}));
    next += agent_draws(t + 1);
    next.colwise() += Vec(mean_drive + w0);
    traj.x[t + 1] = next;
    traj.xbar.col(t + 1) = next.rowwise().mean();
  }

  traj.cost_y.resize(N);
  traj.cost_xbar.resize(N);
  traj.cost_total.resize(N);
  for (int i = 0; i < N; ++i) {
    const auto [cy, cx] = sample_path_cost(traj, model, profile, i, 0);
    traj.cost_y[i] = cy;
    traj.cost_xbar[i] = cx;
    traj.cost_total[i] = cy + cx;
  }
  return traj;
}

std::pair<double, double> sample_path_cost(const Trajectory& traj,
                                           const JointModel& model,
                                           const PolicyProfile& profile, int i,
                                           int t) {
  const int T = model.horizon();
  const double inv_m = 1.0 / static_cast<double>(traj.x[0].cols());
  double cost_y = 0.0;
  double cost_xbar = 0.0;
  for (int s = t; s <= T; ++s) {
    const Mat y = traj.deviations(s);
    const Mat my = stage_cost_matrix(model, profile, i, s, Branch::kDeviation);
    cost_y += inv_m * y.cwiseProduct(my * y).sum();
    const Vec xb = traj.xbar.col(s);
    const Mat mx = stage_cost_matrix(model, profile, i, s, Branch::kMeanField);
    cost_xbar += xb.dot(mx * xb);
  }
  return {cost_y, cost_xbar};
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

EpsNashTable eps_nash_gap(const JointModel& model, const PolicyProfile& profile,
                          const std::vector<int>& m_grid,
                          const std::vector<int>& runs_per_m, uint64_t seed,
                          const TeamSpec* teams) {
  const int N = model.players();
  const CostReport limit = analytic_cost(model, profile);

  struct Acc {
    std::vector<double> sum, sumsq;
  };
  EpsNashTable table;
  for (size_t g = 0; g < m_grid.size(); ++g) {
    const int m = m_grid[g];
    const int runs = runs_per_m[g];
    Acc init{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    const Acc acc = chunked_reduce<Acc>(
        runs, init,
        [&](int begin, int end) {
          Acc part{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
          for (int run = begin; run < end; ++run) {
            const Trajectory traj = simulate_finite_population(
                model, profile, m, seed,
                substream_seed(seed, {uint64_t(g), uint64_t(run)}), teams);
            for (int i = 0; i < N; ++i) {
              part.sum[i] += traj.cost_total[i];
              part.sumsq[i] += traj.cost_total[i] * traj.cost_total[i];
            }
          }
          return part;
        },
        [N](Acc& total, const Acc& part) {
          for (int i = 0; i < N; ++i) {
            total.sum[i] += part.sum[i];
            total.sumsq[i] += part.sumsq[i];
          }
        });

    EpsNashRow row;
    row.population = m;
    row.gap.resize(N);
    row.se.resize(N);
    for (int i = 0; i < N; ++i) {
      const double mean = acc.sum[i] / runs;
      const double var =
          std::max(0.0, acc.sumsq[i] / runs - mean * mean) * runs / (runs - 1);
      row.gap[i] = std::abs(mean - limit.total[i]);
      row.se[i] = std::sqrt(var / runs);
    }
    table.rows.push_back(std::move(row));
  }

  table.slope.resize(N);
  table.slope_applicable.resize(N);
  for (int i = 0; i < N; ++i) {
    std::vector<double> lx, ly;
    int clear = 0;
    for (const auto& row : table.rows) {
      lx.push_back(std::log(static_cast<double>(row.population)));
      ly.push_back(std::log(std::max(row.gap[i], 1e-300)));
      if (row.gap[i] > 3.0 * row.se[i] && row.gap[i] > 0.0) ++clear;
    }
    table.slope[i] = ols_slope(lx, ly);
    table.slope_applicable[i] = clear >= 2;
  }
  return table;
}

}  // namespace mftg
