#pragma once

// Dense complex linear algebra used by every other module: operator norms,
// Hermitian and normal spectral decompositions, inverses, Kronecker
// products and positivity tests. Backed by Eigen.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "leiblab/errors.hpp"

namespace leiblab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

template <class Real>
using BasicCMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

namespace linalg {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kNormalTol = 1e-9;
inline constexpr double kSchurResidueTol = 1e-9;
inline constexpr double kSingularTol = 1e-12;
/// Condition cap used when drawing invertible elements for random searches.
inline constexpr double kSearchConditionCap = 1e4;
inline constexpr double kInvertibleConditionCap = 1e10;

/// Eigenvalues with the unitary that diagonalizes the input:
/// input = transform * diag(eigenvalues) * transform^*.
struct SpectralData {
  CVector eigenvalues;
  CMatrix transform;
};

struct InverseResult {
  CMatrix inverse;
  double condition = 1.0;
};

inline CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }

template <class Derived>
void require_well_formed(const Eigen::MatrixBase<Derived>& m, const char* where) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << where << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw MalformedInput(os.str());
  }
  if (!m.allFinite()) throw MalformedInput(std::string(where) + ": matrix has NaN or Inf entries");
}

template <class A, class B>
void require_same_dim(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs " << b.rows()
       << "x" << b.cols() << ")";
    throw DimensionMismatch(os.str());
  }
}

/// Largest singular value. Works for any complex scalar type Eigen supports,
/// including std::complex<long double> for refined re-evaluation.
template <class Derived>
auto spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  require_well_formed(m, "spectral_norm");
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dense dense = m;
  if (dense.isZero(Real(0))) return Real(0);
  // Not BDCSVD: Eigen 3.4.0 gets the top value wrong on some rank-deficient inputs.
  Eigen::JacobiSVD<Dense> svd(dense);
  return svd.singularValues()(0);
}

template <class Derived>
auto singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require_well_formed(m, "singular_values");
  const Dense dense = m;
  Eigen::JacobiSVD<Dense> svd(dense);
  return svd.singularValues().eval();
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
inline SpectralData eig_hermitian(const CMatrix& h) {
  require_well_formed(h, "eig_hermitian");
  const double scale = spectral_norm(h);
  const double skew = spectral_norm(CMatrix(h - h.adjoint()));
  if (skew > kHermitianTol * scale) {
    std::ostringstream os;
    os << "eig_hermitian: input is not Hermitian (||H - H*|| = " << skew << ", ||H|| = " << scale << ")";
    throw DomainError(os.str());
  }
  const CMatrix sym = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw DomainError("eig_hermitian: eigensolver did not converge");
  return {solver.eigenvalues().cast<Complex>(), solver.eigenvectors()};
}

inline double normality_residue(const CMatrix& n) {
  return spectral_norm(CMatrix(n.adjoint() * n - n * n.adjoint()));
}

/// Spectral decomposition of a normal matrix through its complex Schur form.
/// For normal input the triangular factor is diagonal; the strictly upper
/// part is checked against a residue bound. Eigenvalues are sorted by
/// (real, imaginary).
inline SpectralData decompose_normal(const CMatrix& n) {
  require_well_formed(n, "decompose_normal");
  const double scale = spectral_norm(n);
  const double residue = normality_residue(n);
  if (residue > kNormalTol * scale * scale) {
    std::ostringstream os;
    os << "decompose_normal: input is not normal (normality residue ||N*N - NN*|| = " << residue
       << ", bound " << kNormalTol * scale * scale << ")";
    throw DomainError(os.str());
  }
  Eigen::ComplexSchur<CMatrix> schur(n);
  if (schur.info() != Eigen::Success) throw DomainError("decompose_normal: Schur iteration did not converge");
  const CMatrix& t = schur.matrixT();
  const CMatrix upper = t.triangularView<Eigen::StrictlyUpper>();
  const double off = upper.size() ? spectral_norm(upper) : 0.0;
  if (off > kSchurResidueTol * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "decompose_normal: triangular factor is not diagonal (residue " << off << ")";
    throw DomainError(os.str());
  }
  const Eigen::Index dim = n.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const Complex x = t(a, a), y = t(b, b);
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  SpectralData out{CVector(dim), CMatrix(dim, dim)};
  for (Eigen::Index k = 0; k < dim; ++k) {
    out.eigenvalues(k) = t(order[k], order[k]);
    out.transform.col(k) = schur.matrixU().col(order[k]);
  }
  return out;
}

inline CMatrix reconstruct(const SpectralData& s) {
  return s.transform * s.eigenvalues.asDiagonal() * s.transform.adjoint();
}

/// Continuous functional calculus F(N) for normal N. F may signal that it is
/// undefined at a point by throwing DomainError or by returning a non-finite value.
template <class F>
CMatrix apply_function(const SpectralData& spectrum, F&& f) {
  CVector mapped(spectrum.eigenvalues.size());
  for (Eigen::Index k = 0; k < mapped.size(); ++k) {
    const Complex z = spectrum.eigenvalues(k);
    const Complex w = f(z);
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
      std::ostringstream os;
      os << "apply_function: function undefined at eigenvalue " << z;
      throw DomainError(os.str());
    }
    mapped(k) = w;
  }
  return spectrum.transform * mapped.asDiagonal() * spectrum.transform.adjoint();
}

template <class F>
CMatrix apply_function(const CMatrix& n, F&& f) {
  return apply_function(decompose_normal(n), std::forward<F>(f));
}

/// Inverse with a condition estimate from the singular values. One step of
/// iterative refinement is applied to the LU inverse.
inline InverseResult matrix_inverse(const CMatrix& m) {
  require_well_formed(m, "matrix_inverse");
  const auto sv = singular_values(m);
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smax == 0.0 || smin < kSingularTol * smax) {
    const double cond = smax == 0.0 ? INFINITY : smax / smin;
    std::ostringstream os;
    os << "matrix_inverse: singular matrix (smallest singular value " << smin << ", norm " << smax << ")";
    throw SingularMatrix(os.str(), cond);
  }
  Eigen::PartialPivLU<CMatrix> lu(m);
  CMatrix inv = lu.inverse();
  const CMatrix residual = identity(m.rows()) - m * inv;
  inv += inv * residual;
  return {std::move(inv), smax / smin};
}

/// Inverse computed and refined in extended precision; the residual
/// ||M X - I|| is evaluated in long double.
struct RefinedInverse {
  BasicCMatrix<long double> inverse;
  long double residual = 0;
};

inline RefinedInverse refined_inverse(const BasicCMatrix<long double>& m, int sweeps = 3) {
  using LMatrix = BasicCMatrix<long double>;
  const LMatrix id = LMatrix::Identity(m.rows(), m.cols());
  Eigen::PartialPivLU<LMatrix> lu(m);
  LMatrix inv = lu.inverse();
  for (int s = 0; s < sweeps; ++s) inv += inv * (id - m * inv);
  RefinedInverse out;
  out.residual = spectral_norm(LMatrix(m * inv - id));
  out.inverse = std::move(inv);
  return out;
}

template <class DA, class DB>
auto kron(const Eigen::MatrixBase<DA>& x, const Eigen::MatrixBase<DB>& y) {
  using Scalar = typename DA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    for (Eigen::Index k = 0; k < x.cols(); ++k)
      out.block(j * y.rows(), k * y.cols(), y.rows(), y.cols()) = x(j, k) * y;
  return out;
}

/// True iff the smallest eigenvalue is >= -tol * max(||H||, 1).
inline bool is_psd(const CMatrix& h, double tol) {
  const SpectralData s = eig_hermitian(h);
  const double scale = std::max(spectral_norm(h), 1.0);
  return s.eigenvalues(0).real() >= -tol * scale;
}

/// Principal square root of a positive semidefinite matrix.
inline CMatrix psd_sqrt(const CMatrix& h) {
  const SpectralData s = eig_hermitian(h);
  CVector roots(s.eigenvalues.size());
  for (Eigen::Index k = 0; k < roots.size(); ++k) roots(k) = std::sqrt(std::max(s.eigenvalues(k).real(), 0.0));
  return s.transform * roots.asDiagonal() * s.transform.adjoint();
}

inline double max_eigenvalue_psd(const CMatrix& h) {
  return eig_hermitian(h).eigenvalues(h.rows() - 1).real();
}

}  // namespace linalg
}  // namespace leiblab
