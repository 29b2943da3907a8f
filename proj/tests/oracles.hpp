#pragma once

// Slow reference implementations used only by the tests. They avoid the
// library's code paths on purpose: naive loops, brute-force grids, explicit
// parametrizations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Complex naive_trace_product(const Mat& rho, const Mat& a) {
  Complex acc = 0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index k = 0; k < rho.cols(); ++k) acc += rho(i, k) * a(k, i);
  return acc;
}

/// Largest singular value via power iteration on M*M, many sweeps.
inline double power_norm(const Mat& m, int sweeps = 4000) {
  if (m.norm() == 0) return 0;
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += Complex(0.1 * static_cast<double>(i), 0.03 * static_cast<double>(i * i));
  v.normalize();
  const Mat g = m.adjoint() * m;
  double lambda = 0;
  for (int k = 0; k < sweeps; ++k) {
    Eigen::VectorXcd w = g * v;
    const double nw = w.norm();
    if (nw == 0) return 0;
    v = w / nw;
    lambda = nw;
  }
  return std::sqrt(lambda);
}

inline Mat naive_kron(const Mat& x, const Mat& y) {
  Mat out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = x(i / y.rows(), j / y.cols()) * y(i % y.rows(), j % y.cols());
  return out;
}

/// mu(C* C)^{1/2} with explicit loops.
inline double naive_mu_norm(const Mat& rho, const Mat& c) {
  return std::sqrt(std::max(0.0, naive_trace_product(rho, c.adjoint() * c).real()));
}

inline double naive_sigma(const Mat& rho, const Mat& a) {
  const Eigen::Index d = a.rows();
  const Complex m = naive_trace_product(rho, a);
  const Mat centered = a - m * Mat::Identity(d, d);
  return std::max(naive_mu_norm(rho, centered), naive_mu_norm(rho, centered.adjoint()));
}

/// min over a square grid of ||A - alpha I||, refined by successive zooms.
inline double grid_delta_min(const Mat& a, int levels = 10, int points = 41) {
  const Eigen::Index d = a.rows();
  const double radius = power_norm(a, 500) + 1.0;
  double cx = 0, cy = 0, half = radius;
  double best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < levels; ++level) {
    double bx = cx, by = cy;
    for (int i = 0; i < points; ++i) {
      for (int j = 0; j < points; ++j) {
        const double x = cx - half + 2 * half * i / (points - 1);
        const double y = cy - half + 2 * half * j / (points - 1);
        const Mat shifted = a - Complex(x, y) * Mat::Identity(d, d);
        const double v = Eigen::JacobiSVD<Mat>(shifted).singularValues()(0);
        if (v < best) {
          best = v;
          bx = x;
          by = y;
        }
      }
    }
    cx = bx;
    cy = by;
    half *= 4.0 / (points - 1);
  }
  return best;
}

/// max of sqrt(mu(A*A) - |mu(A)|^2) over 2x2 densities parametrized by the
/// Bloch ball, brute-force on a spherical grid with radial samples.
inline double bloch_delta_max(const Mat& a, int grid = 120) {
  double best = 0;
  const double pi = std::acos(-1.0);
  for (int i = 0; i <= grid; ++i) {
    const double theta = pi * i / grid;
    for (int j = 0; j < 2 * grid; ++j) {
      const double phi = pi * j / grid;
      for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double x = r * std::sin(theta) * std::cos(phi), y = r * std::sin(theta) * std::sin(phi),
                     z = r * std::cos(theta);
        Mat rho(2, 2);
        rho << Complex(0.5 * (1 + z), 0), Complex(0.5 * x, -0.5 * y), Complex(0.5 * x, 0.5 * y), Complex(0.5 * (1 - z), 0);
        const Complex m = naive_trace_product(rho, a);
        const double v = naive_trace_product(rho, a.adjoint() * a).real() - std::norm(m);
        best = std::max(best, std::sqrt(std::max(v, 0.0)));
      }
    }
  }
  return best;
}

}  // namespace oracle
