#pragma once

// The conditional expectation E = id_n (x) mu from M_n(M_d) onto M_n (x) 1,
// its M_n-valued inner product and norm, the seminorms L0~ and sigma^E, and
// the matricial family sigma_n^mu.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "leiblab/errors.hpp"
#include "leiblab/linalg.hpp"
#include "leiblab/matrix_io.hpp"
#include "leiblab/ncprob.hpp"
#include "leiblab/parallel.hpp"
#include "leiblab/random.hpp"

namespace leiblab::condexp {

using ncprob::State;

/// An element of M_n(M_d): an (n d) x (n d) matrix of d x d blocks.
class ModuleElement {
 public:
  ModuleElement(CMatrix value, Eigen::Index n, Eigen::Index d) : value_(std::move(value)), n_(n), d_(d) {
    if (n < 1 || d < 1) throw MalformedInput("ModuleElement: n and d must be positive");
    linalg::require_well_formed(value_, "ModuleElement");
    if (value_.rows() != n * d) {
      std::ostringstream os;
      os << "ModuleElement: matrix of dim " << value_.rows() << " is not " << n << " x " << d << " blocks";
      throw DimensionMismatch(os.str());
    }
  }

  const CMatrix& value() const { return value_; }
  Eigen::Index n() const { return n_; }
  Eigen::Index d() const { return d_; }
  auto block(Eigen::Index j, Eigen::Index k) const { return value_.block(j * d_, k * d_, d_, d_); }

  ModuleElement adjoint() const { return {value_.adjoint(), n_, d_}; }
  ModuleElement operator*(const ModuleElement& o) const { return {value_ * o.value_, n_, d_}; }
  ModuleElement operator-(const ModuleElement& o) const { return {value_ - o.value_, n_, d_}; }
  ModuleElement operator+(const ModuleElement& o) const { return {value_ + o.value_, n_, d_}; }

 private:
  CMatrix value_;
  Eigen::Index n_;
  Eigen::Index d_;
};

inline Json module_element_to_json(const ModuleElement& a) {
  Json j = matrix_to_json(a.value());
  j["n"] = a.n();
  j["d"] = a.d();
  return j;
}

inline ModuleElement module_element_from_json(const Json& j) {
  if (!j.contains("n") || !j.contains("d")) throw MalformedInput("module element: missing n or d header");
  return {matrix_from_json(j), j.at("n").get<Eigen::Index>(), j.at("d").get<Eigen::Index>()};
}

class CondExp {
 public:
  CondExp(Eigen::Index n, State state) : n_(n), state_(std::move(state)) {
    if (n < 1) throw MalformedInput("CondExp: n must be positive");
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index d() const { return state_.dim(); }
  Eigen::Index total_dim() const { return n_ * d(); }
  const State& state() const { return state_; }

  /// X (x) I_d.
  ModuleElement embed(const CMatrix& x) const {
    if (x.rows() != n_ || x.cols() != n_) throw DimensionMismatch("CondExp::embed: expected an n x n matrix");
    return {linalg::kron(x, linalg::identity(d())), n_, d()};
  }

  void require_compatible(const ModuleElement& a, const char* where) const {
    if (a.n() != n_ || a.d() != d()) {
      std::ostringstream os;
      os << where << ": element has (n, d) = (" << a.n() << ", " << a.d() << "), expected (" << n_ << ", " << d()
         << ")";
      throw DimensionMismatch(os.str());
    }
  }

 private:
  Eigen::Index n_;
  State state_;
};

/// Entry (j, k) is mu(block_jk(A)).
inline CMatrix cond_exp(const CondExp& e, const ModuleElement& a) {
  e.require_compatible(a, "cond_exp");
  CMatrix out(e.n(), e.n());
  const CMatrix& rho = e.state().rho();
  for (Eigen::Index j = 0; j < e.n(); ++j)
    for (Eigen::Index k = 0; k < e.n(); ++k) out(j, k) = rho.cwiseProduct(a.block(j, k).transpose()).sum();
  return out;
}

/// <A, B>_E = E(A* B).
inline CMatrix e_inner(const CondExp& e, const ModuleElement& a, const ModuleElement& b) {
  e.require_compatible(b, "e_inner");
  return cond_exp(e, a.adjoint() * b);
}

/// ||A||_E = ||E(A*A)||^{1/2}.
inline double e_norm(const CondExp& e, const ModuleElement& a) {
  const CMatrix gram = e_inner(e, a, a);
  return std::sqrt(std::max(linalg::max_eigenvalue_psd(gram), 0.0));
}

/// A - E(A) (x) I_d.
inline ModuleElement centered(const CondExp& e, const ModuleElement& a) { return a - e.embed(cond_exp(e, a)); }

inline double l0_tilde(const CondExp& e, const ModuleElement& a) { return e_norm(e, centered(e, a)); }

inline double sigma_e(const CondExp& e, const ModuleElement& a) {
  return std::max(l0_tilde(e, a), l0_tilde(e, a.adjoint()));
}

/// E(A*A) - E(A*) E(A), positive semidefinite for every A.
inline CMatrix schwarz_gap(const CondExp& e, const ModuleElement& a) {
  const CMatrix ea = cond_exp(e, a);
  return e_inner(e, a, a) - ea.adjoint() * ea;
}

/// sigma_n^mu(A) for A in M_n(M_d).
inline double matricial_family(const State& s, const ModuleElement& a, Eigen::Index n) {
  return sigma_e(CondExp(n, s), a);
}

/// max(||A - alpha (x) 1||_E, ||A* - alpha* (x) 1||_E).
inline double block_unitization_formula(const CondExp& e, const ModuleElement& a, const CMatrix& alpha) {
  const ModuleElement shifted = a - e.embed(alpha);
  return std::max(e_norm(e, shifted), e_norm(e, shifted.adjoint()));
}

/// ||[D_n, (A, alpha)]|| on (H (+) C)^n, with D_n = diag(D, ..., D).
inline double dirac_norm_blocks(const State& s, const ModuleElement& a, const CMatrix& alpha) {
  ncprob::require_faithful(s, "dirac_norm_blocks");
  const Eigen::Index n = a.n();
  if (a.d() != s.dim()) throw DimensionMismatch("dirac_norm_blocks: block size differs from the state dimension");
  if (alpha.rows() != n || alpha.cols() != n) throw DimensionMismatch("dirac_norm_blocks: alpha must be n x n");
  const ncprob::SectionTwoDirac dirac{ncprob::GnsSpace(s)};
  const Eigen::Index k = dirac.matrix().rows();
  const CMatrix dn = linalg::kron(linalg::identity(n), dirac.matrix());
  CMatrix act = CMatrix::Zero(n * k, n * k);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      act.block(r * k, c * k, k, k) = dirac.action({CMatrix(a.block(r, c)), alpha(r, c)});
  return linalg::spectral_norm(CMatrix(dn * act - act * dn));
}

/// ||[E^, A^]|| in the Hilbert space completing M_n(M_d) for the scalar inner
/// product trace(tau <a, b>_E), i.e. the GNS space of tau (x) mu.
inline double localized_commutator_norm(const CondExp& e, const ModuleElement& a, const CMatrix& tau) {
  e.require_compatible(a, "localized_commutator_norm");
  const Eigen::Index m = e.total_dim();
  const CMatrix sqrt_omega = linalg::kron(linalg::psd_sqrt(tau), linalg::psd_sqrt(e.state().rho()));
  const CMatrix inv_sqrt_omega = linalg::matrix_inverse(sqrt_omega).inverse;
  const Eigen::Index dim = m * m;
  CMatrix e_hat(dim, dim);
  CMatrix basis = CMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < dim; ++i) {
    basis.setZero();
    basis(i % m, i / m) = 1.0;
    const ModuleElement pre(basis * inv_sqrt_omega, e.n(), e.d());
    const CMatrix image = e.embed(cond_exp(e, pre)).value() * sqrt_omega;
    e_hat.col(i) = Eigen::Map<const CVector>(image.data(), image.size());
  }
  const CMatrix a_hat = linalg::kron(linalg::identity(m), a.value());
  return linalg::spectral_norm(CMatrix(e_hat * a_hat - a_hat * e_hat));
}

struct LocalizedBound {
  double sup_sampled = 0;
  double bound = 0;
  std::size_t argmax_sample = 0;
  std::size_t rejected = 0;
};

inline constexpr double kLocalizationFloor = 1e-6;

/// Draws faithful states tau on M_n as normalized Wishart matrices from
/// keyed streams (seed, sample) and reports the largest localized commutator
/// norm next to sigma^E(A). The result does not depend on `threads`.
inline LocalizedBound localized_norm_bound(const CondExp& e, const ModuleElement& a, std::size_t samples,
                                           std::uint64_t seed, unsigned threads = 1) {
  ncprob::require_faithful(e.state(), "localized_norm_bound");
  e.require_compatible(a, "localized_norm_bound");
  std::vector<double> values(samples, 0.0);
  std::vector<std::size_t> rejects(samples, 0);
  parallel_for(samples, threads, [&](std::size_t i) {
    Rng rng(seed, i);
    CMatrix tau;
    for (;;) {
      tau = rng.wishart_density(e.n());
      if (linalg::eig_hermitian(tau).eigenvalues(0).real() >= kLocalizationFloor) break;
      ++rejects[i];
    }
    values[i] = localized_commutator_norm(e, a, tau);
  });
  LocalizedBound out;
  out.bound = sigma_e(e, a);
  for (std::size_t i = 0; i < samples; ++i) {
    out.rejected += rejects[i];
    if (values[i] > out.sup_sampled) {
      out.sup_sampled = values[i];
      out.argmax_sample = i;
    }
  }
  return out;
}

}  // namespace leiblab::condexp
