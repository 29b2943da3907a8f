#pragma once

// Keyed random streams. Every stream is a pure function of (seed, index), so
// trials can run in any order or on any thread and still draw the same numbers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "leiblab/linalg.hpp"

namespace leiblab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Key for the index-th child stream of seed.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t key) : engine_(key) {}
  Rng(std::uint64_t seed, std::uint64_t index) : engine_(stream_key(seed, index)) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  /// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
  Complex complex_gaussian() {
    const double re = gaussian(), im = gaussian();
    return Complex(re, im) * M_SQRT1_2;
  }

  CMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_gaussian();
    return m;
  }

  CMatrix gaussian_matrix(Eigen::Index dim) { return gaussian_matrix(dim, dim); }

  /// G G* / trace(G G*) with G square Gaussian.
  CMatrix wishart_density(Eigen::Index dim) {
    const CMatrix g = gaussian_matrix(dim);
    CMatrix w = g * g.adjoint();
    w = (w + w.adjoint()) / 2.0;
    return w / w.trace().real();
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace leiblab
