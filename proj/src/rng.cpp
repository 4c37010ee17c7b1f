#include "mftg/rng.hpp"

#include <random>

#include <Eigen/Eigenvalues>

namespace mftg {

uint64_t substream_seed(uint64_t master, std::initializer_list<uint64_t> words) {
  uint64_t h = master;
  for (uint64_t w : words) {
    SplitMix64 mixer(h ^ (w + 0x9e3779b97f4a7c15ULL));
    h = mixer();
  }
  // One extra scramble so substream_seed(m, {0}) != m.
  SplitMix64 finisher(h);
  return finisher();
}

Vec draw_normals(uint64_t seed, int count) {
  SplitMix64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec out(count);
  for (int i = 0; i < count; ++i) out[i] = normal(engine);
  return out;
}

Mat draw_normal_matrix(uint64_t seed, int rows, int cols) {
  SplitMix64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat out(rows, cols);
  // Column-major fill matches Eigen storage, keeps reshapes stable.
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) out(r, c) = normal(engine);
  return out;
}

Mat covariance_factor(const Mat& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(sigma));
  Vec lambda = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

NoiseSampler::NoiseSampler(const Mat& sigma)
    : factor_(covariance_factor(sigma)), zero_(sigma.norm() == 0.0) {}

Vec NoiseSampler::sample(uint64_t seed) const {
  if (zero_) return Vec::Zero(dim());
  return factor_ * draw_normals(seed, dim());
}

Mat NoiseSampler::sample_matrix(uint64_t seed, int count) const {
  if (zero_) return Mat::Zero(dim(), count);
  return factor_ * draw_normal_matrix(seed, dim(), count);
}

}  // namespace mftg
