#pragma once

#include <cstdint>
#include <initializer_list>

#include "mftg/types.hpp"

namespace mftg {

// splitmix64: tiny counter-based generator used both as the base engine and
// as the seed mixer for substreams. Satisfies UniformRandomBitGenerator so it
// can drive std::normal_distribution directly.
class SplitMix64 {
 public:
  using result_type = uint64_t;
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~uint64_t{0}; }
  result_type operator()() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

// Deterministic substream derivation: mixes the master seed with an arbitrary
// tuple of indices (run, agent, timestep, ...) so that every logical noise
// source has its own independent stream regardless of evaluation order.
uint64_t substream_seed(uint64_t master, std::initializer_list<uint64_t> words);

inline uint64_t substream_seed(uint64_t master, uint64_t a) {
  return substream_seed(master, {a});
}
inline uint64_t substream_seed(uint64_t master, uint64_t a, uint64_t b) {
  return substream_seed(master, {a, b});
}
inline uint64_t substream_seed(uint64_t master, uint64_t a, uint64_t b,
                               uint64_t c) {
  return substream_seed(master, {a, b, c});
}
inline uint64_t substream_seed(uint64_t master, uint64_t a, uint64_t b,
                               uint64_t c, uint64_t d) {
  return substream_seed(master, {a, b, c, d});
}

// Standard normal draws from a fresh engine seeded with `seed`.
Vec draw_normals(uint64_t seed, int count);
Mat draw_normal_matrix(uint64_t seed, int rows, int cols);

// Symmetric square root V diag(sqrt(max(lambda,0))) V^T. Works for singular
// PSD covariances, which show up when a noise channel is switched off.
Mat covariance_factor(const Mat& sigma);

// Draws correlated vectors x ~ N(0, sigma) via a precomputed factor.
class NoiseSampler {
 public:
  NoiseSampler() = default;
  explicit NoiseSampler(const Mat& sigma);
  int dim() const { return static_cast<int>(factor_.rows()); }
  bool zero() const { return zero_; }
  Vec sample(uint64_t seed) const;
  // One seed, `count` iid columns.
  Mat sample_matrix(uint64_t seed, int count) const;

 private:
  Mat factor_;
  bool zero_ = true;
};

}  // namespace mftg
