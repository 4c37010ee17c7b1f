#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mftg/game.hpp"
#include "mftg/types.hpp"

namespace mftg::test {

inline Mat random_mat(std::mt19937_64& eng, int rows, int cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = u(eng);
  return m;
}

inline Mat random_psd(std::mt19937_64& eng, int n, double scale, double ridge) {
  const Mat g = random_mat(eng, n, n, scale);
  return Mat(g * g.transpose() + ridge * Mat::Identity(n, n));
}

struct RandomSpecOptions {
  int max_players = 3;
  int max_state_dim = 4;
  int max_control_dim = 2;
  int max_horizon = 5;
  bool zero_b_bar = false;  // degenerate case: no mean-field control channel
  bool tie_r_bar = false;   // r_bar = r
  double noise_scale = 1.0;
  double r_ridge = 0.3;     // keeps the stage systems comfortably invertible
};

// Well-posed random instance: Q, Qbar PSD; R, Rbar PD; A scaled to keep
// closed loops tame over short horizons.
inline GameSpec random_spec(uint64_t seed, const RandomSpecOptions& opts = {}) {
  std::mt19937_64 eng(seed);
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(eng() % static_cast<uint64_t>(hi - lo + 1));
  };
  GameSpec spec;
  spec.num_players = pick(1, opts.max_players);
  spec.state_dim = pick(1, opts.max_state_dim);
  spec.horizon = pick(1, opts.max_horizon);
  const int N = spec.num_players;
  const int n = spec.state_dim;
  const int T = spec.horizon;
  for (int i = 0; i < N; ++i)
    spec.control_dims.push_back(pick(1, opts.max_control_dim));

  const double a_scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int t = 0; t < T; ++t) {
    spec.a.push_back(random_mat(eng, n, n, a_scale));
    spec.a_bar.push_back(random_mat(eng, n, n, 0.5 * a_scale));
  }
  for (int i = 0; i < N; ++i) {
    const int p = spec.control_dims[i];
    MatSeq b, b_bar, q, q_bar, r, r_bar;
    for (int t = 0; t < T; ++t) {
      b.push_back(random_mat(eng, n, p, 0.8));
      b_bar.push_back(opts.zero_b_bar ? Mat::Zero(n, p)
                                      : random_mat(eng, n, p, 0.4));
      r.push_back(random_psd(eng, p, 0.5, opts.r_ridge));
      r_bar.push_back(opts.tie_r_bar ? r.back()
                                     : random_psd(eng, p, 0.5, opts.r_ridge));
    }
    for (int t = 0; t <= T; ++t) {
      q.push_back(random_psd(eng, n, 0.6, 0.05));
      q_bar.push_back(random_psd(eng, n, 0.6, 0.05));
    }
    spec.b.push_back(std::move(b));
    spec.b_bar.push_back(std::move(b_bar));
    spec.q.push_back(std::move(q));
    spec.q_bar.push_back(std::move(q_bar));
    spec.r.push_back(std::move(r));
    spec.r_bar.push_back(std::move(r_bar));
  }
  spec.sigma = random_psd(eng, n, 0.4 * opts.noise_scale, 0.1 * opts.noise_scale);
  spec.sigma0 =
      random_psd(eng, n, 0.4 * opts.noise_scale, 0.1 * opts.noise_scale);
  if (opts.noise_scale == 0.0) {
    spec.sigma = Mat::Zero(n, n);
    spec.sigma0 = Mat::Zero(n, n);
  }
  return spec;
}

// Textbook LQR best response of one player against the fixed others:
// drift A_t - sum_{j != i} B^j K^j, input B^i, costs (Q^i, R^i) of the
// branch. Deliberately independent of the coupled stage solve.
inline MatSeq best_response(const JointModel& model,
                            const PolicyProfile& profile, int player,
                            Branch br) {
  const int T = model.horizon();
  MatSeq gains(T);
  Mat p_next = model.q(player, T, br);
  for (int t = T - 1; t >= 0; --t) {
    Mat drift = model.a(t, br);
    for (int j = 0; j < model.players(); ++j)
      if (j != player) drift -= model.b(j, t, br) * profile.gain(j, t, br);
    const Mat& bi = model.b(player, t, br);
    const Mat h = model.r(player, t, br) + bi.transpose() * p_next * bi;
    const Mat k = h.ldlt().solve(bi.transpose() * p_next * drift);
    const Mat closed = drift - bi * k;
    p_next = symmetrized(model.q(player, t, br) +
                         k.transpose() * model.r(player, t, br) * k +
                         closed.transpose() * p_next * closed);
    gains[t] = k;
  }
  return gains;
}

inline double max_best_response_gap(const JointModel& model,
                                    const PolicyProfile& profile, Branch br) {
  double worst = 0.0;
  for (int i = 0; i < model.players(); ++i) {
    const MatSeq br_gains = best_response(model, profile, i, br);
    for (int t = 0; t < model.horizon(); ++t)
      worst = std::max(worst, (br_gains[t] - profile.gain(i, t, br)).norm());
  }
  return worst;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe out;
  const double count = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= count;
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  var /= (count - 1.0);
  out.se = std::sqrt(var / count);
  return out;
}

// R^2 of the least-squares fit log(y_k) ~ alpha + beta k.
inline double r_squared_loglinear(const std::vector<double>& ys) {
  const int m = static_cast<int>(ys.size());
  std::vector<double> logs(m);
  for (int k = 0; k < m; ++k) logs[k] = std::log(std::max(ys[k], 1e-300));
  double xbar = (m - 1) / 2.0, ybar = 0.0;
  for (double v : logs) ybar += v;
  ybar /= m;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int k = 0; k < m; ++k) {
    sxy += (k - xbar) * (logs[k] - ybar);
    sxx += (k - xbar) * (k - xbar);
    syy += (logs[k] - ybar) * (logs[k] - ybar);
  }
  if (syy == 0.0) return 1.0;
  const double beta = sxy / sxx;
  double ss_res = 0.0;
  for (int k = 0; k < m; ++k) {
    const double fit = ybar + beta * (k - xbar);
    ss_res += (logs[k] - fit) * (logs[k] - fit);
  }
  return 1.0 - ss_res / syy;
}

inline double stddev(const std::vector<double>& xs) {
  const MeanSe ms = mean_and_se(xs);
  return ms.se * std::sqrt(static_cast<double>(xs.size()));
}

inline void expect_mat_near(const Mat& a, const Mat& b, double tol,
                            const std::string& what = "") {
  ASSERT_EQ(a.rows(), b.rows()) << what;
  ASSERT_EQ(a.cols(), b.cols()) << what;
  EXPECT_LE((a - b).norm(), tol)
      << what << "\nlhs:\n"
      << a << "\nrhs:\n"
      << b;
}

}  // namespace mftg::test
