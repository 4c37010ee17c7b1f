#include "mftg/types.hpp"

namespace mftg {

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

double min_singular_value(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const auto sv = m.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

double reciprocal_condition(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const auto sv = m.jacobiSvd().singularValues();
  const double smax = sv(0);
  if (smax <= 0.0) return 0.0;
  return sv(sv.size() - 1) / smax;
}

bool is_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

namespace {

bool eig_bounds(const Mat& m, double* lmin, double* lmax) {
  if (!is_symmetric(m)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(m), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  *lmin = ev(0);
  *lmax = ev(ev.size() - 1);
  return true;
}

}  // namespace

bool is_psd(const Mat& m) {
  double lmin, lmax;
  if (!eig_bounds(m, &lmin, &lmax)) return false;
  return lmin > -1e-10 * std::max(1.0, lmax);
}

bool is_pd(const Mat& m) {
  double lmin, lmax;
  if (!eig_bounds(m, &lmin, &lmax)) return false;
  return lmin > 1e-10;
}

}  // namespace mftg
