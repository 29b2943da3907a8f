#pragma once

// States on M_d, the standard-deviation seminorms L0 and sigma^mu, and their
// realizations as commutator norms with Dirac operators on the GNS space.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "leiblab/errors.hpp"
#include "leiblab/linalg.hpp"
#include "leiblab/matrix_io.hpp"

namespace leiblab::ncprob {

inline constexpr double kDensityTol = 1e-12;
inline constexpr double kFaithfulFloor = 1e-10;

enum class Faithfulness { required, allow_degenerate };

/// A state mu(A) = trace(rho A) on M_d given by a density matrix.
class State {
 public:
  static State from_density(const CMatrix& rho, Faithfulness policy = Faithfulness::required) {
    linalg::require_well_formed(rho, "State");
    const Eigen::Index d = rho.rows();
    const double skew = linalg::spectral_norm(CMatrix(rho - rho.adjoint()));
    if (skew > kDensityTol) {
      std::ostringstream os;
      os << "State: density is not Hermitian (||rho - rho*|| = " << skew << " > " << kDensityTol << ")";
      throw DomainError(os.str());
    }
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0)) > kDensityTol) {
      std::ostringstream os;
      os << "State: trace(rho) = " << tr << " differs from 1 by more than " << kDensityTol;
      throw DomainError(os.str());
    }
    State s;
    s.rho_ = (rho + rho.adjoint()) / 2.0;
    const auto spectrum = linalg::eig_hermitian(s.rho_);
    s.min_eigenvalue_ = spectrum.eigenvalues(0).real();
    if (s.min_eigenvalue_ < -kDensityTol) {
      std::ostringstream os;
      os << "State: density is not positive (min eigenvalue " << s.min_eigenvalue_ << " < " << -kDensityTol << ")";
      throw DomainError(os.str());
    }
    s.faithful_ = s.min_eigenvalue_ >= kFaithfulFloor;
    if (!s.faithful_ && policy == Faithfulness::required) {
      std::ostringstream os;
      os << "State: density is not faithful (min eigenvalue " << s.min_eigenvalue_ << " < " << kFaithfulFloor << ")";
      throw DomainError(os.str());
    }
    const CMatrix uniform = linalg::identity(d) / static_cast<double>(d);
    s.tracial_ = linalg::spectral_norm(CMatrix(s.rho_ - uniform)) <= kDensityTol;
    return s;
  }

  /// The unique tracial state I/d, constructed exactly.
  static State tracial(Eigen::Index d) {
    if (d < 1) throw MalformedInput("State::tracial: dim must be positive");
    State s;
    s.rho_ = linalg::identity(d) / static_cast<double>(d);
    s.min_eigenvalue_ = 1.0 / static_cast<double>(d);
    s.faithful_ = true;
    s.tracial_ = true;
    return s;
  }

  Eigen::Index dim() const { return rho_.rows(); }
  const CMatrix& rho() const { return rho_; }
  bool faithful() const { return faithful_; }
  bool tracial() const { return tracial_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  State() = default;
  CMatrix rho_;
  double min_eigenvalue_ = 0;
  bool faithful_ = false;
  bool tracial_ = false;
};

inline Json state_to_json(const State& s) {
  Json j = matrix_to_json(s.rho());
  j["faithful"] = s.faithful();
  j["tracial"] = s.tracial();
  return j;
}

/// Reads a state; declared flags must agree with the density.
inline State state_from_json(const Json& j, Faithfulness policy = Faithfulness::required) {
  const CMatrix rho = matrix_from_json(j);
  State s = State::from_density(rho, policy);
  if (j.contains("faithful") && j.at("faithful").get<bool>() != s.faithful()) {
    std::ostringstream os;
    os << "State: declared faithful=" << j.at("faithful").get<bool>() << " but min eigenvalue is "
       << s.min_eigenvalue() << " (floor " << kFaithfulFloor << ")";
    throw DomainError(os.str());
  }
  if (j.contains("tracial") && j.at("tracial").get<bool>() != s.tracial()) {
    std::ostringstream os;
    os << "State: declared tracial=" << j.at("tracial").get<bool>()
       << " but ||rho - I/d|| bound " << kDensityTol << " says otherwise";
    throw DomainError(os.str());
  }
  return s;
}

namespace kernel {

// Precision-generic formulas shared by the public API and by the refined
// (long double) re-verification path of the search harness.

template <class Real>
std::complex<Real> expectation(const BasicCMatrix<Real>& rho, const BasicCMatrix<Real>& a) {
  return rho.cwiseProduct(a.transpose()).sum();
}

template <class Real>
Real mu_norm_squared(const BasicCMatrix<Real>& rho, const BasicCMatrix<Real>& c) {
  const BasicCMatrix<Real> gram = c.adjoint() * c;
  return expectation<Real>(rho, gram).real();
}

template <class Real>
Real l0(const BasicCMatrix<Real>& rho, const BasicCMatrix<Real>& a) {
  const std::complex<Real> m = expectation<Real>(rho, a);
  BasicCMatrix<Real> centered = a;
  centered.diagonal().array() -= m;
  return std::sqrt(std::max(mu_norm_squared<Real>(rho, centered), Real(0)));
}

template <class Real>
Real sigma(const BasicCMatrix<Real>& rho, const BasicCMatrix<Real>& a) {
  const Real x = l0<Real>(rho, a);
  const Real y = l0<Real>(rho, BasicCMatrix<Real>(a.adjoint()));
  return std::max(x, y);
}

}  // namespace kernel

inline Complex expectation(const State& s, const CMatrix& a) {
  linalg::require_same_dim(s.rho(), a, "expectation");
  return kernel::expectation<double>(s.rho(), a);
}

/// ||C||_mu = mu(C*C)^{1/2}.
inline double mu_norm(const State& s, const CMatrix& c) {
  linalg::require_same_dim(s.rho(), c, "mu_norm");
  const double sq = kernel::mu_norm_squared<double>(s.rho(), c);
  if (sq < -1e-14 * std::max(1.0, c.squaredNorm())) {
    std::ostringstream os;
    os << "mu_norm: negative squared norm " << sq;
    throw InternalConsistency(os.str());
  }
  return std::sqrt(std::max(sq, 0.0));
}

/// L0(A) = ||A - mu(A)||_mu, cross-checked against the variance formula.
inline double l0(const State& s, const CMatrix& a) {
  linalg::require_same_dim(s.rho(), a, "l0");
  const Complex m = expectation(s, a);
  CMatrix centered = a;
  centered.diagonal().array() -= m;
  const double value = mu_norm(s, centered);
  const double variance = kernel::mu_norm_squared<double>(s.rho(), a) - std::norm(m);
  // Squared comparison: the variance route loses half the digits near zero.
  const double scale = 1.0 + linalg::spectral_norm(a);
  if (std::abs(value * value - variance) > 1e-10 * scale * scale) {
    std::ostringstream os;
    os << "l0: centered norm^2 " << value * value << " disagrees with variance " << variance;
    throw InternalConsistency(os.str());
  }
  return value;
}

inline double sigma_mu(const State& s, const CMatrix& a) {
  return std::max(l0(s, a), l0(s, CMatrix(a.adjoint())));
}

/// True iff sigma^mu(A) <= tol (1 + ||A||): mu is definite on A.
inline bool is_definite_null(const State& s, const CMatrix& a, double tol) {
  return sigma_mu(s, a) <= tol * (1.0 + linalg::spectral_norm(a));
}

inline void require_faithful(const State& s, const char* where) {
  if (!s.faithful()) {
    std::ostringstream os;
    os << where << ": requires a faithful state (min eigenvalue " << s.min_eigenvalue() << " < "
       << kFaithfulFloor << ")";
    throw DomainError(os.str());
  }
}

/// Coordinates of L^2(M_d, mu): A is sent to vec(A rho^{1/2}) (column-major),
/// which turns <A,B>_mu into the Euclidean inner product on C^{d^2}.
class GnsSpace {
 public:
  explicit GnsSpace(State state) : state_(std::move(state)) {
    require_faithful(state_, "GnsSpace");
    sqrt_rho_ = linalg::psd_sqrt(state_.rho());
    unit_ = embed(linalg::identity(dim()));
    dirac_e_ = unit_ * unit_.adjoint();
  }

  const State& state() const { return state_; }
  Eigen::Index dim() const { return state_.dim(); }
  Eigen::Index hilbert_dim() const { return dim() * dim(); }
  const CMatrix& sqrt_rho() const { return sqrt_rho_; }

  CVector embed(const CMatrix& a) const {
    linalg::require_same_dim(state_.rho(), a, "GnsSpace::embed");
    const CMatrix x = a * sqrt_rho_;
    return Eigen::Map<const CVector>(x.data(), x.size());
  }

  /// Left multiplication by A in embed coordinates: vec(AX) = (I (x) A) vec(X).
  CMatrix left_rep(const CMatrix& a) const {
    linalg::require_same_dim(state_.rho(), a, "GnsSpace::left_rep");
    return linalg::kron(linalg::identity(dim()), a);
  }

  /// embed(1), a unit vector.
  const CVector& unit() const { return unit_; }

  /// Orthogonal projection onto the span of embed(1).
  const CMatrix& dirac_E() const { return dirac_e_; }

 private:
  State state_;
  CMatrix sqrt_rho_;
  CVector unit_;
  CMatrix dirac_e_;
};

/// ||[E, pi(A)]|| computed in GNS coordinates.
inline double dirac_norm_projection(const GnsSpace& gns, const CMatrix& a) {
  const CMatrix rep = gns.left_rep(a);
  const CMatrix comm = gns.dirac_E() * rep - rep * gns.dirac_E();
  return linalg::spectral_norm(comm);
}

inline double dirac_norm_projection(const State& s, const CMatrix& a) {
  require_faithful(s, "dirac_norm_projection");
  return dirac_norm_projection(GnsSpace(s), a);
}

/// (A, alpha) in A (+) C.
struct UnitizedElement {
  CMatrix a;
  Complex alpha;
};

/// D = <xi,eta>_c - <eta,xi>_c on K = H (+) C, with xi = embed(1) and eta the
/// unit of the extra summand. The last coordinate is eta.
class SectionTwoDirac {
 public:
  explicit SectionTwoDirac(GnsSpace gns) : gns_(std::move(gns)) {
    const Eigen::Index h = gns_.hilbert_dim();
    CVector xi = CVector::Zero(h + 1);
    xi.head(h) = gns_.unit();
    CVector eta = CVector::Zero(h + 1);
    eta(h) = 1.0;
    matrix_ = xi * eta.adjoint() - eta * xi.adjoint();
  }

  const GnsSpace& gns() const { return gns_; }
  const CMatrix& matrix() const { return matrix_; }

  /// Block action of (A, alpha) on H (+) C.
  CMatrix action(const UnitizedElement& x) const {
    const Eigen::Index h = gns_.hilbert_dim();
    CMatrix out = CMatrix::Zero(h + 1, h + 1);
    out.topLeftCorner(h, h) = gns_.left_rep(x.a);
    out(h, h) = x.alpha;
    return out;
  }

 private:
  GnsSpace gns_;
  CMatrix matrix_;
};

inline double dirac_norm_unitization(const SectionTwoDirac& dirac, const UnitizedElement& x) {
  const CMatrix act = dirac.action(x);
  return linalg::spectral_norm(CMatrix(dirac.matrix() * act - act * dirac.matrix()));
}

inline double dirac_norm_unitization(const State& s, const UnitizedElement& x) {
  require_faithful(s, "dirac_norm_unitization");
  return dirac_norm_unitization(SectionTwoDirac(GnsSpace(s)), x);
}

/// max(||A - alpha||_mu, ||A* - conj(alpha)||_mu).
inline double unitization_formula(const State& s, const UnitizedElement& x) {
  CMatrix shifted = x.a;
  shifted.diagonal().array() -= x.alpha;
  return std::max(mu_norm(s, shifted), mu_norm(s, CMatrix(shifted.adjoint())));
}

struct QuotientReport {
  double value_at_mean = 0;   // g(mu(A))
  double min_candidate = 0;   // min over candidates of g(alpha)
  Complex argmin_candidate;
  double gap = 0;             // min_candidate - value_at_mean
};

/// Evaluates g(alpha) = max(||A-alpha||_mu, ||A*-conj(alpha)||_mu) at mu(A) and
/// at every candidate scalar.
inline QuotientReport quotient_optimality(const State& s, const CMatrix& a, std::span<const Complex> candidates) {
  require_faithful(s, "quotient_optimality");
  linalg::require_same_dim(s.rho(), a, "quotient_optimality");
  QuotientReport r;
  const Complex mean = expectation(s, a);
  r.value_at_mean = unitization_formula(s, {a, mean});
  r.min_candidate = std::numeric_limits<double>::infinity();
  for (const Complex& c : candidates) {
    const double g = unitization_formula(s, {a, c});
    if (g < r.min_candidate) {
      r.min_candidate = g;
      r.argmin_candidate = c;
    }
  }
  if (candidates.empty()) {
    r.min_candidate = r.value_at_mean;
    r.argmin_candidate = mean;
  }
  r.gap = r.min_candidate - r.value_at_mean;
  return r;
}

/// The tensor-square setting nu = mu (x) mu on M_d (x) M_d.
class IndependentCopies {
 public:
  explicit IndependentCopies(State state) : state_(std::move(state)) {
    if (!state_.tracial()) throw DomainError("IndependentCopies: the identity is asserted only for the tracial state");
    product_state_ = linalg::kron(state_.rho(), state_.rho());
    omega0_ = linalg::identity(state_.dim() * state_.dim());
  }

  const State& state() const { return state_; }
  const CMatrix& product_state() const { return product_state_; }
  const CMatrix& omega0() const { return omega0_; }

  /// lhs = ||1 (x) A - A (x) 1||_nu^2, rhs = 2 (mu(A*A) - |mu(A)|^2).
  std::pair<double, double> identity(const CMatrix& a) const {
    linalg::require_same_dim(state_.rho(), a, "independent_copies_identity");
    const CMatrix id = linalg::identity(state_.dim());
    const CMatrix x = linalg::kron(id, a) - linalg::kron(a, id);
    const double lhs = kernel::mu_norm_squared<double>(product_state_, x);
    const Complex m = expectation(state_, a);
    const double rhs = 2.0 * (kernel::mu_norm_squared<double>(state_.rho(), a) - std::norm(m));
    return {lhs, rhs};
  }

 private:
  State state_;
  CMatrix product_state_;
  CMatrix omega0_;
};

inline std::pair<double, double> independent_copies_identity(const State& s, const CMatrix& a) {
  return IndependentCopies(s).identity(a);
}

/// Lipschitz functions with exactly known constants.
class LipschitzFn {
 public:
  struct PiecewiseLinear {
    std::vector<double> breakpoints;
    std::vector<double> values;
  };
  struct Reciprocal {
    double min_modulus;
  };
  struct Conjugation {};
  struct Affine {
    Complex a;
    Complex b;
  };

  /// Linear interpolation between (breakpoints, values), constant beyond the ends.
  static LipschitzFn piecewise_linear(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2 || breakpoints.size() != values.size())
      throw MalformedInput("LipschitzFn: piecewise-linear needs >= 2 breakpoints and matching values");
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      if (!(breakpoints[k] > breakpoints[k - 1]))
        throw MalformedInput("LipschitzFn: breakpoints must be strictly increasing");
    double lip = 0;
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      lip = std::max(lip, std::abs(values[k] - values[k - 1]) / (breakpoints[k] - breakpoints[k - 1]));
    return LipschitzFn(PiecewiseLinear{std::move(breakpoints), std::move(values)}, lip);
  }

  /// z -> 1/z on {|z| >= m}.
  static LipschitzFn reciprocal(double min_modulus) {
    if (!(min_modulus > 0)) throw MalformedInput("LipschitzFn: reciprocal needs a positive modulus bound");
    return LipschitzFn(Reciprocal{min_modulus}, 1.0 / (min_modulus * min_modulus));
  }

  static LipschitzFn conjugation() { return LipschitzFn(Conjugation{}, 1.0); }

  static LipschitzFn affine(Complex a, Complex b) { return LipschitzFn(Affine{a, b}, std::abs(a)); }

  double lip_constant() const { return lip_; }

  bool requires_real_spectrum() const { return std::holds_alternative<PiecewiseLinear>(fn_); }

  std::string kind() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PiecewiseLinear>) return "piecewise-linear-real";
          else if constexpr (std::is_same_v<T, Reciprocal>) return "reciprocal";
          else if constexpr (std::is_same_v<T, Conjugation>) return "conjugation";
          else return "affine";
        },
        fn_);
  }

  const auto& variant() const { return fn_; }

  Complex operator()(Complex z) const {
    return std::visit([z](const auto& f) { return eval(f, z); }, fn_);
  }

 private:
  using Variant = std::variant<PiecewiseLinear, Reciprocal, Conjugation, Affine>;

  LipschitzFn(Variant fn, double lip) : fn_(std::move(fn)), lip_(lip) {}

  static Complex eval(const PiecewiseLinear& f, Complex z) {
    if (std::abs(z.imag()) > 1e-9 * (1.0 + std::abs(z))) {
      std::ostringstream os;
      os << "LipschitzFn: piecewise-linear function undefined at non-real point " << z;
      throw DomainError(os.str());
    }
    const double x = z.real();
    const auto& xs = f.breakpoints;
    const auto& ys = f.values;
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
  }
  static Complex eval(const Reciprocal& f, Complex z) {
    if (std::abs(z) < f.min_modulus * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "LipschitzFn: reciprocal undefined at " << z << " (|z| < " << f.min_modulus << ")";
      throw DomainError(os.str());
    }
    return 1.0 / z;
  }
  static Complex eval(const Conjugation&, Complex z) { return std::conj(z); }
  static Complex eval(const Affine& f, Complex z) { return f.a * z + f.b; }

  Variant fn_;
  double lip_;
};

/// F(N) for normal N, enforcing the real-spectrum requirement of
/// piecewise-linear functions.
inline CMatrix apply_lipschitz(const CMatrix& n, const LipschitzFn& f) {
  const linalg::SpectralData spectrum = linalg::decompose_normal(n);
  if (f.requires_real_spectrum()) {
    const double scale = 1.0 + linalg::spectral_norm(n);
    if (linalg::spectral_norm(CMatrix(n - n.adjoint())) > linalg::kHermitianTol * scale)
      throw DomainError("markov: piecewise-linear functions need a Hermitian argument");
  }
  return linalg::apply_function(spectrum, [&f](Complex z) { return f(z); });
}

/// Lip(F) sigma^mu(N) - sigma^mu(F(N)).
inline double markov_margin(const State& s, const CMatrix& n, const LipschitzFn& f) {
  const CMatrix fn = apply_lipschitz(n, f);
  return f.lip_constant() * sigma_mu(s, n) - sigma_mu(s, fn);
}

}  // namespace leiblab::ncprob
