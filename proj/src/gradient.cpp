#include "mftg/gradient.hpp"

#include <cmath>

#include "mftg/parallel.hpp"
#include "mftg/rng.hpp"
#include "mftg/simulate.hpp"

namespace mftg {

Mat gradient_bracket(const JointModel& model, const PolicyProfile& profile,
                     const Mat& p_next, int i, int t, Branch br) {
  const Mat& b = model.b(i, t, br);
  Mat drift = model.a(t, br);
  for (int j = 0; j < model.players(); ++j) {
    if (j == i) continue;
    drift -= model.b(j, t, br) * profile.gain(j, t, br);
  }
  const Mat bt_p = b.transpose() * p_next;
  return (model.r(i, t, br) + bt_p * b) * profile.gain(i, t, br) -
         bt_p * drift;
}

Mat analytic_gradient(const JointModel& model, const PolicyProfile& profile,
                      int i, int t, Branch br, double sigma) {
  const ValueRecursion vr = value_recursion(model, profile, br);
  return 2.0 * sigma *
         gradient_bracket(model, profile, vr.p[i][t + 1], i, t, br);
}

Mat analytic_natural_gradient(const JointModel& model,
                              const PolicyProfile& profile, int i, int t,
                              Branch br) {
  const ValueRecursion vr = value_recursion(model, profile, br);
  return 2.0 * gradient_bracket(model, profile, vr.p[i][t + 1], i, t, br);
}

double StageOracle::operator()(const Mat& k) const {
  const Mat l = a_other - b * k;
  const Mat m = q + k.transpose() * r * k + l.transpose() * p_next * l;
  return (sigma * m).trace() + tail;
}

StageOracle make_expected_cost_oracle(const JointModel& model,
                                      const PolicyProfile& profile,
                                      const ValueRecursion& vr, int i, int t,
                                      Branch br, double sigma) {
  StageOracle oracle;
  oracle.b = model.b(i, t, br);
  oracle.a_other = model.a(t, br);
  for (int j = 0; j < model.players(); ++j) {
    if (j == i) continue;
    oracle.a_other -= model.b(j, t, br) * profile.gain(j, t, br);
  }
  oracle.q = model.q(i, t, br);
  oracle.r = model.r(i, t, br);
  oracle.p_next = vr.p[i][t + 1];
  oracle.sigma = sigma * Mat::Identity(model.n(), model.n());
  oracle.tail = vr.offset[i][t];
  return oracle;
}

namespace {

Mat sphere_direction(uint64_t seed, int rows, int cols, double radius) {
  Mat e = draw_normal_matrix(seed, rows, cols);
  const double norm = e.norm();
  if (norm < 1e-300) {
    e.setZero();
    e(0, 0) = 1.0;
    return radius * e;
  }
  return (radius / norm) * e;
}

}  // namespace

GradientEstimate zero_order_gradient(const CostOracle& oracle, const Mat& k0,
                                     double sigma,
                                     const ZeroOrderOptions& opt) {
  if (opt.radius <= 0.0) throw InvalidRadius(opt.radius);
  if (opt.num_directions < 1)
    throw std::invalid_argument("mini-batch size must be >= 1");
  const int rows = static_cast<int>(k0.rows());
  const int cols = static_cast<int>(k0.cols());
  const double d = static_cast<double>(rows * cols);

  const Mat acc = chunked_reduce<Mat>(
      opt.num_directions, Mat::Zero(rows, cols),
      [&](int begin, int end) {
        Mat part = Mat::Zero(rows, cols);
        for (int j = begin; j < end; ++j) {
          const Mat e = sphere_direction(
              substream_seed(opt.seed, {uint64_t(j), 0}), rows, cols,
              opt.radius);
          const uint64_t call_seed = substream_seed(opt.seed, {uint64_t(j), 1});
          double w;
          if (opt.antithetic) {
            w = 0.5 * (oracle(k0 + e, call_seed) - oracle(k0 - e, call_seed));
          } else {
            w = oracle(k0 + e, call_seed);
          }
          part += w * e;
        }
        return part;
      },
      [](Mat& total, const Mat& part) { total += part; });

  GradientEstimate est;
  est.raw = (d / (opt.num_directions * opt.radius * opt.radius)) * acc;
  est.natural = est.raw / sigma;
  est.mode = GradientMode::kZeroOrderExpected;
  est.num_directions = opt.num_directions;
  est.radius = opt.radius;
  est.seed = opt.seed;
  return est;
}

BiasProbeTable smoothed_gradient_bias_probe(const CostOracle& oracle,
                                            const Mat& k0, const Mat& analytic,
                                            const std::vector<double>& radii,
                                            int num_directions, int repeats,
                                            bool antithetic, uint64_t seed) {
  BiasProbeTable table;
  for (size_t ri = 0; ri < radii.size(); ++ri) {
    ZeroOrderOptions opt;
    opt.num_directions = num_directions;
    opt.radius = radii[ri];
    opt.antithetic = antithetic;
    Mat mean = Mat::Zero(k0.rows(), k0.cols());
    double sumsq = 0.0;
    std::vector<Mat> estimates(repeats);
    for (int rep = 0; rep < repeats; ++rep) {
      opt.seed = substream_seed(seed, {uint64_t(ri), uint64_t(rep)});
      estimates[rep] = zero_order_gradient(oracle, k0, 1.0, opt).raw;
      mean += estimates[rep];
    }
    mean /= static_cast<double>(repeats);
    for (int rep = 0; rep < repeats; ++rep)
      sumsq += (estimates[rep] - mean).squaredNorm();
    // Scatter of the repeat mean, aggregated over entries.
    const double se =
        repeats > 1
            ? std::sqrt(sumsq / (repeats - 1) / static_cast<double>(repeats))
            : 0.0;
    BiasProbeRow row;
    row.radius = radii[ri];
    row.bias = (mean - analytic).norm();
    row.noise_floor = 3.0 * se;
    table.rows.push_back(row);
  }

  // rounding dust on a deterministic oracle reports se = 0; such rows carry
  // no slope information
  const double numeric_floor = 1e-11 * (1.0 + analytic.norm());
  std::vector<double> lx, ly;
  for (const auto& row : table.rows) {
    if (row.bias > std::max(row.noise_floor, numeric_floor)) {
      lx.push_back(std::log(row.radius));
      ly.push_back(std::log(row.bias));
    }
  }
  if (lx.size() >= 2) {
    table.slope = ols_slope(lx, ly);
    table.slope_valid = true;
  }
  return table;
}

BiasProbeTable smoothed_gradient_bias_probe(const JointModel& model,
                                            const PolicyProfile& profile,
                                            int i, int t, Branch br,
                                            double sigma,
                                            const std::vector<double>& radii,
                                            int num_directions, int repeats,
                                            uint64_t seed) {
  const ValueRecursion vr = value_recursion(model, profile, br);
  const StageOracle stage =
      make_expected_cost_oracle(model, profile, vr, i, t, br, sigma);
  const CostOracle oracle = [&stage](const Mat& k, uint64_t) {
    return stage(k);
  };
  const Mat analytic =
      2.0 * sigma * gradient_bracket(model, profile, vr.p[i][t + 1], i, t, br);
  return smoothed_gradient_bias_probe(oracle, profile.gain(i, t, br), analytic,
                                      radii, num_directions, repeats,
                                      /*antithetic=*/true, seed);
}

}  // namespace mftg
