#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mftg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// One matrix per timestep.
using MatSeq = std::vector<Mat>;
// Outer index: player. Inner index: timestep.
using PlayerMatSeq = std::vector<MatSeq>;

inline Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

// Largest singular value.
double spectral_norm(const Mat& m);
double min_singular_value(const Mat& m);

// sigma_min / sigma_max; zero matrix maps to 0.
double reciprocal_condition(const Mat& m);

bool is_symmetric(const Mat& m, double tol = 1e-9);

// PD requires lambda_min > 1e-10; PSD tolerates lambda_min down to
// -1e-10 * max(1, lambda_max). Both require symmetry.
bool is_psd(const Mat& m);
bool is_pd(const Mat& m);

}  // namespace mftg
