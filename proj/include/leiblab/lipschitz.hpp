#pragma once

// Lipschitz seminorm of a function on a finite metric space:
// L(f) = max over x != y of |f(x) - f(y)| / d(x, y).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>

#include <Eigen/Dense>

#include "leiblab/errors.hpp"
#include "leiblab/matrix_io.hpp"

namespace leiblab {

inline constexpr double kTriangleTol = 1e-12;

class FiniteMetric {
 public:
  /// Validates symmetry, zero diagonal, positive off-diagonal entries and
  /// the triangle inequality (slack 1e-12 times the largest distance).
  explicit FiniteMetric(Eigen::MatrixXd distances) : d_(std::move(distances)) {
    const Eigen::Index n = d_.rows();
    if (n < 1 || d_.cols() != n) throw MalformedInput("FiniteMetric: expected a non-empty square distance matrix");
    if (!d_.allFinite()) throw MalformedInput("FiniteMetric: distances must be finite");
    const double scale = std::max(1.0, d_.maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d_(i, i) != 0.0) fail("nonzero diagonal entry", i, i);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        if (!(d_(i, j) > 0.0)) fail("distance between distinct points is not positive", i, j);
        if (std::abs(d_(i, j) - d_(j, i)) > kTriangleTol * scale) fail("distance matrix is not symmetric", i, j);
      }
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
          if (d_(i, k) > d_(i, j) + d_(j, k) + kTriangleTol * scale) {
            std::ostringstream os;
            os << "FiniteMetric: triangle inequality fails: d(" << i << "," << k << ") = " << d_(i, k) << " > d(" << i
               << "," << j << ") + d(" << j << "," << k << ")";
            throw MalformedInput(os.str());
          }
  }

  /// Euclidean distances between the rows of `coords`.
  static FiniteMetric euclidean(const Eigen::MatrixXd& coords) {
    const Eigen::Index n = coords.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (coords.row(i) - coords.row(j)).norm();
    return FiniteMetric(std::move(d));
  }

  Eigen::Index points() const { return d_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return d_(i, j); }
  const Eigen::MatrixXd& distances() const { return d_; }

 private:
  [[noreturn]] static void fail(const char* what, Eigen::Index i, Eigen::Index j) {
    std::ostringstream os;
    os << "FiniteMetric: " << what << " at (" << i << ", " << j << ")";
    throw MalformedInput(os.str());
  }

  Eigen::MatrixXd d_;
};

template <class Real>
using BasicCVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <class Real>
Real lipschitz_seminorm(const FiniteMetric& m, const BasicCVector<Real>& f) {
  if (f.size() != m.points()) {
    std::ostringstream os;
    os << "lipschitz_seminorm: function has " << f.size() << " values for " << m.points() << " points";
    throw DimensionMismatch(os.str());
  }
  Real best = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    for (Eigen::Index j = i + 1; j < f.size(); ++j)
      best = std::max(best, std::abs(f(i) - f(j)) / static_cast<Real>(m(i, j)));
  return best;
}

inline double lipschitz_seminorm(const FiniteMetric& m, const Eigen::VectorXcd& f) {
  return lipschitz_seminorm<double>(m, f);
}

inline Json metric_to_json(const FiniteMetric& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.points(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.points(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return Json{{"points", m.points()}, {"distances", std::move(rows)}};
}

inline FiniteMetric metric_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("points") || !j.contains("distances"))
    throw MalformedInput("metric: expected an object with fields points, distances");
  const auto n = j.at("points").get<Eigen::Index>();
  const Json& rows = j.at("distances");
  if (n < 1 || !rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n)
    throw MalformedInput("metric: distances must have `points` rows");
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& r = rows[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != n)
      throw MalformedInput("metric: every row must have `points` entries");
    for (Eigen::Index k = 0; k < n; ++k) d(i, k) = r[static_cast<std::size_t>(k)].get<double>();
  }
  return FiniteMetric(std::move(d));
}

}  // namespace leiblab
