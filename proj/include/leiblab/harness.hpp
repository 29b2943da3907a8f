#pragma once

// Randomized property suites. Each suite maps a trial index to a list of
// margins (right-hand side minus left-hand side of an inequality), folds them
// in trial order into a MarginReport, and re-runs every violating trial on a
// refined path (long double linear algebra, solvers at tol/100) before
// classifying it as confirmed or as a numerical artifact.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "leiblab/condexp.hpp"
#include "leiblab/duality.hpp"
#include "leiblab/errors.hpp"
#include "leiblab/instances.hpp"
#include "leiblab/linalg.hpp"
#include "leiblab/lipschitz.hpp"
#include "leiblab/matrix_io.hpp"
#include "leiblab/ncprob.hpp"
#include "leiblab/parallel.hpp"
#include "leiblab/random.hpp"
#include "leiblab/shiftlab.hpp"

namespace leiblab::harness {

using ncprob::LipschitzFn;
using ncprob::State;
using condexp::CondExp;

enum class Suite {
  leibniz,
  strong,
  markov,
  audenaert,
  quotient,
  tracial_copies,
  matricial,
  search_l0_strong,
  shift,
  lipschitz_metric
};

inline const std::vector<std::pair<Suite, std::string>>& suite_names() {
  static const std::vector<std::pair<Suite, std::string>> names = {
      {Suite::leibniz, "leibniz"},
      {Suite::strong, "strong"},
      {Suite::markov, "markov"},
      {Suite::audenaert, "audenaert"},
      {Suite::quotient, "quotient"},
      {Suite::tracial_copies, "tracial-copies"},
      {Suite::matricial, "matricial"},
      {Suite::search_l0_strong, "search-l0-strong"},
      {Suite::shift, "shift"},
      {Suite::lipschitz_metric, "lipschitz-metric"}};
  return names;
}

inline std::string to_string(Suite s) {
  for (const auto& [suite, name] : suite_names())
    if (suite == s) return name;
  return "unknown";
}

inline Suite parse_suite(const std::string& name) {
  for (const auto& [suite, n] : suite_names())
    if (n == name) return suite;
  std::string known;
  for (const auto& entry : suite_names()) known += (known.empty() ? "" : ", ") + entry.second;
  throw ConfigError("unknown suite '" + name + "' (expected one of: " + known + ")");
}

/// Tolerance used when none is given.
inline double default_tol(Suite s) {
  switch (s) {
    case Suite::leibniz:
    case Suite::quotient: return 1e-10;
    case Suite::audenaert: return 1e-6;
    case Suite::tracial_copies:
    case Suite::shift:
    case Suite::lipschitz_metric: return 1e-12;
    default: return 1e-9;
  }
}

enum class StateKind { tracial, random_faithful, fixed_from_file };

struct SuiteConfig {
  Suite suite = Suite::leibniz;
  long dim = 3;
  long n = 1;  // matricial level
  long trials = 100;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  StateKind state_kind = StateKind::random_faithful;
  std::string state_path;  // fixed_from_file
  long window = 64;        // shift suite
  std::string expr;        // shift suite, optional
  unsigned threads = 1;
};

/// "tracial", "random" or "@path".
inline void set_state_arg(SuiteConfig& cfg, const std::string& arg) {
  if (arg == "tracial") cfg.state_kind = StateKind::tracial;
  else if (arg == "random") cfg.state_kind = StateKind::random_faithful;
  else if (arg.size() > 1 && arg[0] == '@') {
    cfg.state_kind = StateKind::fixed_from_file;
    cfg.state_path = arg.substr(1);
  } else throw ConfigError("--state must be tracial, random or @file, got '" + arg + "'");
}

inline void validate(const SuiteConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (cfg.trials < 1) fail("trials must be >= 1");
  if (cfg.dim < 1) fail("dim must be >= 1");
  if (cfg.n < 1) fail("n must be >= 1");
  if (!(cfg.tol > 0) || !std::isfinite(cfg.tol)) fail("tol must be a positive number");
  if (cfg.threads < 1) fail("threads must be >= 1");
  if (cfg.state_kind == StateKind::fixed_from_file && cfg.state_path.empty()) fail("state file path is empty");
  if (cfg.suite == Suite::tracial_copies && cfg.state_kind != StateKind::tracial)
    fail("tracial-copies needs the tracial state (--state tracial)");
  if (cfg.suite == Suite::search_l0_strong && cfg.state_kind == StateKind::random_faithful && cfg.dim < 2)
    fail("search-l0-strong with random states needs dim >= 2 (every state on M_1 is tracial)");
  if (cfg.suite == Suite::lipschitz_metric && cfg.dim < 2) fail("lipschitz-metric needs dim >= 2 points");
  if (cfg.suite == Suite::shift && cfg.window < 4) fail("shift window must be >= 4");
}

// ---------------------------------------------------------------------------
// Measurements

/// One inequality evaluated on one trial; conformance is margin >= -tol * scale.
struct Measurement {
  double margin = 0;
  double scale = 1;
  double tol = 0;
  bool present = false;

  bool passes() const { return margin >= -tol * scale; }
  double relative() const { return margin / scale; }
};

template <class Real>
Measurement measure(Real rhs, Real lhs, Real scale, double tol) {
  return {static_cast<double>(rhs - lhs), static_cast<double>(scale), tol, true};
}

/// An identity lhs = rhs, as the margin -|lhs - rhs|.
template <class Real>
Measurement measure_equal(Real lhs, Real rhs, Real scale, double tol) {
  return {-static_cast<double>(std::abs(lhs - rhs)), static_cast<double>(scale), tol, true};
}

// ---------------------------------------------------------------------------
// Precision paths. Standard calls the public module API; Refined recomputes
// the same quantities in long double.

inline constexpr double kDeltaSolverTol = 1e-9;
inline constexpr double kDeltaCheckFloor = 1e-6;

struct StandardPath {
  using Real = double;
  using Matrix = CMatrix;
  static constexpr bool refined = false;

  static Matrix lift(const CMatrix& m) { return m; }
  static CMatrix narrow(const Matrix& m) { return m; }
  static Real norm(const Matrix& m) { return linalg::spectral_norm(m); }
  static Matrix inverse(const Matrix& m) { return linalg::matrix_inverse(m).inverse; }
  static Real l0(const State& s, const Matrix& a) { return ncprob::l0(s, a); }
  static Real sigma(const State& s, const Matrix& a) { return ncprob::sigma_mu(s, a); }
  static Real unitization(const State& s, const Matrix& a, Complex alpha) {
    return ncprob::unitization_formula(s, {a, alpha});
  }
  static condexp::ModuleElement element(const CondExp& e, const Matrix& a) { return {a, e.n(), e.d()}; }
  static Matrix embed(const CondExp& e, const CMatrix& x) { return e.embed(x).value(); }
  static Real e_norm(const CondExp& e, const Matrix& a) { return condexp::e_norm(e, element(e, a)); }
  static Real l0_tilde(const CondExp& e, const Matrix& a) { return condexp::l0_tilde(e, element(e, a)); }
  static Real sigma_e(const CondExp& e, const Matrix& a) { return condexp::sigma_e(e, element(e, a)); }
  static Matrix apply(const Matrix& n, const LipschitzFn& f) { return ncprob::apply_lipschitz(n, f); }
  static std::pair<Real, Real> copies(const State& s, const Matrix& a) {
    return ncprob::independent_copies_identity(s, a);
  }
  static double delta(const CMatrix& a) { return duality::delta_min(a, kDeltaSolverTol).value; }
};

struct RefinedPath {
  using Real = long double;
  using LComplex = std::complex<long double>;
  using Matrix = BasicCMatrix<long double>;
  static constexpr bool refined = true;

  static Matrix lift(const CMatrix& m) { return m.cast<LComplex>(); }
  static CMatrix narrow(const Matrix& m) { return m.cast<Complex>(); }
  static Real norm(const Matrix& m) { return linalg::spectral_norm(m); }
  static Matrix inverse(const Matrix& m) { return linalg::refined_inverse(m).inverse; }
  /// The density renormalized to trace one in long double, so that e.g. I/3
  /// does not carry the rounding of 1/3 into the identities.
  static Matrix rho(const State& s) {
    Matrix r = lift(s.rho());
    r = (r + r.adjoint()) / Real(2);
    return r / r.trace().real();
  }
  static Real mu_norm(const Matrix& rho, const Matrix& c) {
    return std::sqrt(std::max(ncprob::kernel::mu_norm_squared<Real>(rho, c), Real(0)));
  }
  static Real l0(const State& s, const Matrix& a) { return ncprob::kernel::l0<Real>(rho(s), a); }
  static Real sigma(const State& s, const Matrix& a) { return ncprob::kernel::sigma<Real>(rho(s), a); }
  static Real unitization(const State& s, const Matrix& a, Complex alpha) {
    const Matrix r = rho(s);
    Matrix shifted = a;
    shifted.diagonal().array() -= LComplex(alpha.real(), alpha.imag());
    return std::max(mu_norm(r, shifted), mu_norm(r, Matrix(shifted.adjoint())));
  }
  static Matrix cond_exp(const CondExp& e, const Matrix& a) {
    const Matrix r = rho(e.state());
    const Eigen::Index d = e.d();
    Matrix out(e.n(), e.n());
    for (Eigen::Index j = 0; j < e.n(); ++j)
      for (Eigen::Index k = 0; k < e.n(); ++k) out(j, k) = r.cwiseProduct(a.block(j * d, k * d, d, d).transpose()).sum();
    return out;
  }
  static Matrix embed(const CondExp& e, const CMatrix& x) { return embed_l(e, lift(x)); }
  static Matrix embed_l(const CondExp& e, const Matrix& x) { return linalg::kron(x, Matrix::Identity(e.d(), e.d())); }
  /// ||E(A*A)||^{1/2}; the Gram matrix is positive, so its norm is its top eigenvalue.
  static Real e_norm(const CondExp& e, const Matrix& a) {
    const Matrix gram = cond_exp(e, Matrix(a.adjoint() * a));
    return std::sqrt(std::max(norm(gram), Real(0)));
  }
  static Real l0_tilde(const CondExp& e, const Matrix& a) {
    return e_norm(e, Matrix(a - embed_l(e, cond_exp(e, a))));
  }
  static Real sigma_e(const CondExp& e, const Matrix& a) {
    return std::max(l0_tilde(e, a), l0_tilde(e, Matrix(a.adjoint())));
  }
  static Matrix apply(const Matrix& n, const LipschitzFn& f) {
    if (std::holds_alternative<LipschitzFn::Reciprocal>(f.variant())) return inverse(n);
    if (!f.requires_real_spectrum())
      throw InternalConsistency("refined path: only piecewise-linear and reciprocal functions are supported");
    const Matrix h = (n + n.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw DomainError("refined path: eigensolver did not converge");
    Eigen::Matrix<LComplex, Eigen::Dynamic, 1> values(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) {
      const Complex fk = f(Complex(static_cast<double>(es.eigenvalues()(k)), 0.0));
      values(k) = LComplex(fk.real(), fk.imag());
    }
    return es.eigenvectors() * values.asDiagonal() * es.eigenvectors().adjoint();
  }
  static std::pair<Real, Real> copies(const State& s, const Matrix& a) {
    const Matrix r = rho(s);
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    const Matrix x = linalg::kron(id, a) - linalg::kron(a, id);
    const Real lhs = ncprob::kernel::mu_norm_squared<Real>(linalg::kron(r, r), x);
    const LComplex m = ncprob::kernel::expectation<Real>(r, a);
    const Real rhs = 2 * (ncprob::kernel::mu_norm_squared<Real>(r, a) - std::norm(m));
    return {lhs, rhs};
  }
  static double delta(const CMatrix& a) { return duality::delta_min(a, kDeltaSolverTol / 100).value; }
};

template <class P, class L>
Measurement leibniz_margin(L&& seminorm, const typename P::Matrix& a, const typename P::Matrix& b, double tol) {
  using Real = typename P::Real;
  const Real na = P::norm(a), nb = P::norm(b);
  const Real rhs = seminorm(a) * nb + na * seminorm(b);
  const Real lhs = seminorm(typename P::Matrix(a * b));
  return measure<Real>(rhs, lhs, (1 + na) * (1 + nb), tol);
}

template <class P, class L>
Measurement strong_margin(L&& seminorm, const typename P::Matrix& a, double tol) {
  using Real = typename P::Real;
  const typename P::Matrix inv = P::inverse(a);
  const Real ni = P::norm(inv);
  return measure<Real>(ni * ni * seminorm(a), seminorm(inv), ni * ni * (1 + P::norm(a)), tol);
}

// ---------------------------------------------------------------------------
// Trial plumbing

inline constexpr double kNonTracialThreshold = 0.05;
inline constexpr double kNormalityFloor = 0.01;
inline constexpr int kResampleCap = 10000;

/// Independent sub-streams of one trial; each kind of object has its own
/// role so that suites drawing the same objects see the same values.
enum Role : std::uint64_t {
  kStateRole = 1,
  kPairRole,
  kInvertibleRole,
  kLevelRole,
  kBlockRole,
  kFunctionRole,
  kProbeRole
};

struct Streams {
  std::uint64_t key;
  Rng operator()(Role r) const { return Rng(key, r); }
};

struct Context {
  SuiteConfig cfg;
  std::optional<State> fixed_state;

  Eigen::Index d() const { return cfg.dim; }
  Eigen::Index n() const { return cfg.n; }
};

inline State draw_state(const Context& ctx, const Streams& st, bool reject_tracial) {
  switch (ctx.cfg.state_kind) {
    case StateKind::tracial: return State::tracial(ctx.d());
    case StateKind::fixed_from_file: return *ctx.fixed_state;
    case StateKind::random_faithful: break;
  }
  Rng rng = st(kStateRole);
  const CMatrix uniform = linalg::identity(ctx.d()) / static_cast<double>(ctx.d());
  for (int attempt = 0; attempt < kResampleCap; ++attempt) {
    State s = random_faithful_state(rng, ctx.d());
    if (reject_tracial && linalg::spectral_norm(CMatrix(s.rho() - uniform)) < kNonTracialThreshold) continue;
    return s;
  }
  throw DomainError("draw_state: no non-tracial state within the resampling cap");
}

/// Invertible with cond <= 1e4 and ||A*A - AA*|| >= 0.01 ||A||^2.
inline CMatrix draw_non_normal_invertible(Rng& rng, Eigen::Index d) {
  for (int attempt = 0; attempt < kResampleCap; ++attempt) {
    CMatrix a = random_invertible(rng, d);
    const double norm = linalg::spectral_norm(a);
    if (linalg::normality_residue(a) >= kNormalityFloor * norm * norm) return a;
  }
  throw DomainError("draw_non_normal_invertible: no draw met the normality floor within the resampling cap");
}

inline Json module_json(const CMatrix& a, Eigen::Index n, Eigen::Index d) {
  return condexp::module_element_to_json({a, n, d});
}

using TrialFn = std::function<void(std::uint64_t trial, std::vector<Measurement>& out, Json* instance)>;

struct SuitePlan {
  std::vector<std::string> checks;
  Json sampling;
  std::uint64_t trial_count = 0;
  TrialFn standard;
  TrialFn refined;
};

inline Json state_note(const Context& ctx) {
  switch (ctx.cfg.state_kind) {
    case StateKind::tracial: return "tracial state I/d";
    case StateKind::fixed_from_file: return "fixed state read from " + ctx.cfg.state_path;
    case StateKind::random_faithful: break;
  }
  return "normalized Wishart G G*/trace with G square standard complex Gaussian, redrawn if not faithful";
}

inline Json base_sampling(const Context& ctx) {
  return Json{{"streams", "trial t draws from mt19937_64 streams keyed by splitmix64(seed, t, role)"},
              {"matrix", "i.i.d. standard complex Gaussian entries, real and imaginary parts N(0, 1/2)"},
              {"state", state_note(ctx)},
              {"margin", "right-hand side minus left-hand side; a check passes when margin >= -tol * scale"}};
}

// ---------------------------------------------------------------------------
// Suites

template <class P>
void leibniz_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, false);
  Rng pr = st(kPairRole);
  const CMatrix a = random_matrix(pr, ctx.d()), b = random_matrix(pr, ctx.d());
  const auto A = P::lift(a), B = P::lift(b);
  const double tol = ctx.cfg.tol;
  out[0] = leibniz_margin<P>([&](const auto& x) { return P::l0(s, x); }, A, B, tol);
  out[1] = leibniz_margin<P>([&](const auto& x) { return P::sigma(s, x); }, A, B, tol);
  const CondExp e(ctx.n(), s);
  CMatrix x = a, y = b;
  if (ctx.n() > 1) {
    Rng br = st(kBlockRole);
    x = random_matrix(br, ctx.n() * ctx.d());
    y = random_matrix(br, ctx.n() * ctx.d());
  }
  const auto X = P::lift(x), Y = P::lift(y);
  out[2] = leibniz_margin<P>([&](const auto& z) { return P::l0_tilde(e, z); }, X, Y, tol);
  out[3] = leibniz_margin<P>([&](const auto& z) { return P::sigma_e(e, z); }, X, Y, tol);
  if (instance)
    *instance = {{"state", ncprob::state_to_json(s)},
                 {"A", matrix_to_json(a)},
                 {"B", matrix_to_json(b)},
                 {"X", module_json(x, ctx.n(), ctx.d())},
                 {"Y", module_json(y, ctx.n(), ctx.d())}};
}

template <class P>
void strong_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, false);
  Rng ir = st(kInvertibleRole);
  const CMatrix c = random_invertible(ir, ctx.d());
  out[0] = strong_margin<P>([&](const auto& z) { return P::sigma(s, z); }, P::lift(c), ctx.cfg.tol);
  const CondExp e(ctx.n(), s);
  CMatrix y = c;
  if (ctx.n() > 1) {
    Rng br = st(kBlockRole);
    y = random_invertible(br, ctx.n() * ctx.d());
  }
  out[1] = strong_margin<P>([&](const auto& z) { return P::sigma_e(e, z); }, P::lift(y), ctx.cfg.tol);
  if (instance)
    *instance = {{"state", ncprob::state_to_json(s)}, {"A", matrix_to_json(c)}, {"Y", module_json(y, ctx.n(), ctx.d())}};
}

template <class P>
void matricial_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, false);
  Eigen::Index level = 1;
  if (ctx.n() > 1) {
    Rng lr = st(kLevelRole);
    level = lr.uniform_int(1, static_cast<int>(ctx.n()));
  }
  const Eigen::Index m = level * ctx.d();
  Rng pr = st(kPairRole);
  const CMatrix a = random_matrix(pr, m), b = random_matrix(pr, m);
  Rng ir = st(kInvertibleRole);
  const CMatrix c = random_invertible(ir, m);
  const CondExp e(level, s);
  auto sigma_n = [&](const auto& z) { return P::sigma_e(e, z); };
  out[0] = leibniz_margin<P>(sigma_n, P::lift(a), P::lift(b), ctx.cfg.tol);
  out[1] = strong_margin<P>(sigma_n, P::lift(c), ctx.cfg.tol);
  if (instance)
    *instance = {{"state", ncprob::state_to_json(s)},
                 {"level", level},
                 {"A", module_json(a, level, ctx.d())},
                 {"B", module_json(b, level, ctx.d())},
                 {"C", module_json(c, level, ctx.d())}};
}

/// Every eleventh trial (index 10 mod 11) is a normal invertible N with
/// F(z) = 1/z; the others are Hermitian N with a random piecewise-linear F.
inline bool markov_reciprocal_trial(std::uint64_t trial) { return trial % 11 == 10; }

inline constexpr double kReciprocalMinModulus = 0.25;

template <class P>
void markov_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, false);
  Rng fr = st(kFunctionRole);
  const Eigen::Index d = ctx.d();
  CMatrix n;
  std::optional<LipschitzFn> f;
  if (markov_reciprocal_trial(trial)) {
    const CMatrix u = random_unitary(fr, d);
    CVector z(d);
    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d; ++k) {
      do z(k) = fr.complex_gaussian();
      while (std::abs(z(k)) < kReciprocalMinModulus);
      smallest = std::min(smallest, std::abs(z(k)));
    }
    n = u * z.asDiagonal() * u.adjoint();
    f = LipschitzFn::reciprocal(smallest * (1 - 1e-9));
  } else {
    n = random_hermitian(fr, d);
    const auto spectrum = linalg::eig_hermitian(n);
    f = random_piecewise_linear(fr, spectrum.eigenvalues(0).real(), spectrum.eigenvalues(d - 1).real());
  }
  using Real = typename P::Real;
  const auto N = P::lift(n);
  const auto FN = P::apply(N, *f);
  const Real lip = static_cast<Real>(f->lip_constant());
  out[0] = measure<Real>(lip * P::sigma(s, N), P::sigma(s, FN), (1 + lip) * (1 + P::norm(N)), ctx.cfg.tol);
  const double floor = std::max(ctx.cfg.tol, kDeltaCheckFloor);
  const double lipd = f->lip_constant();
  out[1] = measure<double>(lipd * P::delta(n), P::delta(P::narrow(FN)), 1.0, floor);
  if (instance) {
    Json fj = {{"kind", f->kind()}, {"lip", f->lip_constant()}};
    if (const auto* pl = std::get_if<LipschitzFn::PiecewiseLinear>(&f->variant())) {
      fj["breakpoints"] = pl->breakpoints;
      fj["values"] = pl->values;
    }
    *instance = {{"state", ncprob::state_to_json(s)}, {"N", matrix_to_json(n)}, {"F", fj}};
  }
}

inline constexpr int kAudenaertMixedStates = 8;
inline constexpr int kAudenaertPureStates = 4;
inline constexpr double kDiagonalCheckTol = 1e-8;

template <class P>
void audenaert_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const Eigen::Index d = ctx.d();
  Rng pr = st(kPairRole);
  const CMatrix a = random_matrix(pr, d);
  const double tol = ctx.cfg.tol;
  double lo = 0, hi = 0, at_argmax = 0;
  CMatrix argmax_rho;
  if constexpr (P::refined) {
    lo = duality::delta_min(a, std::max(tol / 1000, 1e-12)).value;
    const auto mx = duality::delta_max_states(a, std::max(tol / 1000, 1e-10));
    hi = mx.value;
    argmax_rho = mx.argmax;
    at_argmax = ncprob::sigma_mu(State::from_density(mx.argmax, ncprob::Faithfulness::allow_degenerate), a);
  } else {
    const auto cert = duality::certify_duality(a, std::max(tol / 10, 1e-8));
    lo = cert.delta_min;
    hi = cert.delta_max;
    argmax_rho = cert.argmax_rho;
    at_argmax = cert.sigma_at_argmax;
  }
  const double solver_tol = P::refined ? std::max(tol / 1000, 1e-12) : std::max(tol / 10, 1e-12);
  out[0] = measure_equal<double>(lo, hi, 1.0, tol);
  Rng probe = st(kProbeRole);
  double worst = at_argmax;
  for (int k = 0; k < kAudenaertMixedStates + kAudenaertPureStates; ++k) {
    CMatrix rho;
    if (k < kAudenaertMixedStates) {
      rho = probe.wishart_density(d);
    } else {
      CVector v = probe.gaussian_matrix(d, 1);
      v.normalize();
      rho = v * v.adjoint();
    }
    const State s = State::from_density(rho, ncprob::Faithfulness::allow_degenerate);
    worst = std::max(worst, ncprob::sigma_mu(s, a));
  }
  out[1] = measure<double>(lo, worst, 1.0, tol);
  out[2] = measure_equal<double>(lo, duality::delta_min(CMatrix(a.adjoint()), solver_tol).value, 1.0, tol);
  CVector diag(d);
  for (Eigen::Index k = 0; k < d; ++k) diag(k) = probe.gaussian();
  const double spread = (diag.real().maxCoeff() - diag.real().minCoeff()) / 2;
  const double diag_tol = P::refined ? 1e-12 : 1e-10;
  out[3] = measure_equal<double>(duality::delta_min(CMatrix(diag.asDiagonal()), diag_tol).value, spread, 1.0,
                                 kDiagonalCheckTol);
  const auto sv = linalg::singular_values(a);
  if (sv(d - 1) > 0 && sv(0) / sv(d - 1) <= linalg::kSearchConditionCap) {
    const CMatrix inv = linalg::matrix_inverse(a).inverse;
    const double ni = linalg::spectral_norm(inv);
    out[4] = measure<double>(ni * ni * lo, duality::delta_min(inv, solver_tol).value, ni * ni * (1 + sv(0)), tol);
  }
  if (instance)
    *instance = {{"A", matrix_to_json(a)},
                 {"delta_min", lo},
                 {"delta_max", hi},
                 {"argmax_rho", matrix_to_json(argmax_rho)},
                 {"diagonal", matrix_to_json(CMatrix(diag.asDiagonal()))}};
}

inline constexpr int kQuotientWide = 48;
inline constexpr int kQuotientNear = 16;
inline constexpr double kQuotientNearRadius = 1e-3;

template <class P>
void quotient_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  using Real = typename P::Real;
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, false);
  Rng pr = st(kPairRole);
  const CMatrix a = random_matrix(pr, ctx.d());
  const auto A = P::lift(a);
  const double na = linalg::spectral_norm(a);
  const Complex mean = ncprob::expectation(s, a);
  Rng probe = st(kProbeRole);
  Real best = std::numeric_limits<Real>::infinity();
  for (int k = 0; k < kQuotientWide + kQuotientNear; ++k) {
    const double radius = k < kQuotientWide ? 1 + na : kQuotientNearRadius * (1 + na);
    best = std::min(best, P::unitization(s, A, mean + radius * probe.complex_gaussian()));
  }
  out[0] = measure<Real>(best, P::unitization(s, A, mean), 1 + P::norm(A), ctx.cfg.tol);

  const CondExp e(ctx.n(), s);
  CMatrix x = a;
  if (ctx.n() > 1) {
    Rng br = st(kBlockRole);
    x = random_matrix(br, ctx.n() * ctx.d());
  }
  const auto X = P::lift(x);
  const double nx = linalg::spectral_norm(x);
  const CMatrix ex = condexp::cond_exp(e, {x, ctx.n(), ctx.d()});
  Real best_e = std::numeric_limits<Real>::infinity();
  for (int k = 0; k < kQuotientWide + kQuotientNear; ++k) {
    const double radius = k < kQuotientWide ? 1 + nx : kQuotientNearRadius * (1 + nx);
    const CMatrix dd = ex + radius * probe.gaussian_matrix(ctx.n());
    best_e = std::min(best_e, P::e_norm(e, typename P::Matrix(X - P::embed(e, dd))));
  }
  out[1] = measure<Real>(best_e, P::l0_tilde(e, X), 1 + P::norm(X), ctx.cfg.tol);
  if (instance)
    *instance = {{"state", ncprob::state_to_json(s)}, {"A", matrix_to_json(a)}, {"X", module_json(x, ctx.n(), ctx.d())}};
}

template <class P>
void tracial_copies_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  using Real = typename P::Real;
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, false);
  Rng pr = st(kPairRole);
  const CMatrix a = random_matrix(pr, ctx.d());
  const auto A = P::lift(a);
  const auto [lhs, rhs] = P::copies(s, A);
  const Real na = P::norm(A);
  out[0] = measure_equal<Real>(lhs, rhs, 1 + na * na, ctx.cfg.tol);
  if (instance) *instance = {{"state", ncprob::state_to_json(s)}, {"A", matrix_to_json(a)}};
}

template <class P>
void search_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const State s = draw_state(ctx, st, true);
  Rng ir = st(kInvertibleRole);
  const CMatrix a = draw_non_normal_invertible(ir, ctx.d());
  out[0] = strong_margin<P>([&](const auto& z) { return P::l0(s, z); }, P::lift(a), ctx.cfg.tol);
  if (instance) {
    const CMatrix inv = linalg::matrix_inverse(a).inverse;
    *instance = {{"state", ncprob::state_to_json(s)},
                 {"A", matrix_to_json(a)},
                 {"A_inverse", matrix_to_json(inv)},
                 {"l0_A", ncprob::l0(s, a)},
                 {"l0_A_inverse", ncprob::l0(s, inv)},
                 {"normality_residue", linalg::normality_residue(a)},
                 {"condition", linalg::matrix_inverse(a).condition}};
  }
}

template <class P>
void lipschitz_trial(const Context& ctx, std::uint64_t trial, std::vector<Measurement>& out, Json* instance) {
  using Real = typename P::Real;
  using Vec = BasicCVector<Real>;
  using LComplex = std::complex<Real>;
  const Streams st{stream_key(ctx.cfg.seed, trial)};
  const Eigen::Index m = ctx.d();
  Rng pr = st(kPairRole);
  Eigen::MatrixXd coords(m, 2);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < 2; ++k) coords(i, k) = pr.uniform();
  const FiniteMetric metric = FiniteMetric::euclidean(coords);
  const CVector fd = pr.gaussian_matrix(m, 1), gd = pr.gaussian_matrix(m, 1);
  const Vec f = fd.cast<LComplex>(), g = gd.cast<LComplex>();
  auto L = [&](const Vec& v) { return lipschitz_seminorm<Real>(metric, v); };
  auto sup = [](const Vec& v) { return v.cwiseAbs().maxCoeff(); };
  const double tol = ctx.cfg.tol;
  const Vec fg = f.cwiseProduct(g);
  out[0] = measure<Real>(L(f) * sup(g) + sup(f) * L(g), L(fg), (1 + sup(f)) * (1 + sup(g)), tol);
  Vec h(m), hinv(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    h(i) = g(i) * (Real(1) + Real(1) / std::abs(g(i)));
    hinv(i) = Real(1) / h(i);
  }
  out[1] = measure<Real>(sup(hinv) * sup(hinv) * L(h), L(hinv), sup(hinv) * sup(hinv) * (1 + sup(h)), tol);
  Rng fr = st(kFunctionRole);
  const Eigen::VectorXd r = fd.real();
  const LipschitzFn F = random_piecewise_linear(fr, r.minCoeff(), r.maxCoeff());
  Vec rv(m), fr_v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    rv(i) = LComplex(r(i), 0);
    const Complex y = F(Complex(r(i), 0));
    fr_v(i) = LComplex(y.real(), y.imag());
  }
  const Real lip = static_cast<Real>(F.lip_constant());
  out[2] = measure<Real>(lip * L(rv), L(fr_v), (1 + lip) * (1 + sup(rv)), tol);
  if (instance)
    *instance = {{"metric", metric_to_json(metric)},
                 {"f", matrix_to_json(CMatrix(fd.asDiagonal()))},
                 {"g", matrix_to_json(CMatrix(gd.asDiagonal()))}};
}

inline const std::vector<std::string>& shift_commutator_exprs() {
  static const std::vector<std::string> exprs = {"B", "B'", "J", "P", "J*B*P + B*P*J", "2i*B - J*P"};
  return exprs;
}

/// Exact shift-model identities; a single trial whose margins are minus the
/// number of failing entries.
inline void shift_trial(const Context& ctx, std::vector<Measurement>& out, Json* instance) {
  using namespace shiftlab;
  const Index w = ctx.cfg.window;
  const double tol = ctx.cfg.tol;
  auto failures = [tol](std::size_t count) { return Measurement{0.0 - static_cast<double>(count), 1.0, tol, true}; };
  Json reports = Json::array();
  auto take = [&](const Report& r) {
    if (instance) reports.push_back(report_to_json(r, true));
    return r.failures();
  };
  out[0] = failures(take(verify_example_61(w)));
  out[1] = failures(take(verify_block_unitary(w)));
  out[2] = failures(take(verify_generator_relations(w)));
  const GammaWitness gb = gamma_seminorm_witness(ShiftOp::B(), w);
  const GammaWitness gbinv = gamma_seminorm_witness(ShiftOp::Binv(), w);
  const auto exact = gbinv.lower_bound_exact();
  const bool binv_ok = !gbinv.vanishing && exact && *exact == Rational(1);
  out[3] = failures((gb.vanishing ? 0u : 1u) + (binv_ok ? 0u : 1u));
  std::size_t ls = 0;
  for (const auto& expr : shift_commutator_exprs()) ls += take(ls_commutator_identity(parse_expression(expr), w));
  out[4] = failures(ls);
  Json expr_json;
  if (!ctx.cfg.expr.empty()) {
    const ShiftOp op = parse_expression(ctx.cfg.expr);
    out[5] = failures(take(verify_adjoint(op, w)) + take(ls_commutator_identity(op, w)));
    const GammaWitness gw = gamma_seminorm_witness(op, w);
    expr_json = {{"expression", op.to_string()},
                 {"gamma_vanishing_on_window", gw.vanishing},
                 {"gamma_lower_bound_squared", gw.lower_bound_squared.str()},
                 {"gamma_lower_bound", gw.lower_bound()},
                 {"gamma_witness_index", gw.witness_index},
                 {"gamma_witness_image", gw.witness_image.to_string()}};
  }
  if (instance) {
    *instance = {{"window", w},
                 {"reports", std::move(reports)},
                 {"gamma_B", {{"vanishing", gb.vanishing}}},
                 {"gamma_B_inverse",
                  {{"vanishing", gbinv.vanishing},
                   {"lower_bound_squared", gbinv.lower_bound_squared.str()},
                   {"witness_index", gbinv.witness_index},
                   {"witness_image", gbinv.witness_image.to_string()}}}};
    if (!expr_json.is_null()) (*instance)["expression"] = std::move(expr_json);
  }
}

using PathFn = void (*)(const Context&, std::uint64_t, std::vector<Measurement>&, Json*);

inline void bind_paths(SuitePlan& plan, const std::shared_ptr<const Context>& ctx, PathFn standard, PathFn refined) {
  plan.standard = [ctx, standard](std::uint64_t t, std::vector<Measurement>& out, Json* inst) {
    standard(*ctx, t, out, inst);
  };
  plan.refined = [ctx, refined](std::uint64_t t, std::vector<Measurement>& out, Json* inst) {
    refined(*ctx, t, out, inst);
  };
}

inline SuitePlan make_plan(const std::shared_ptr<const Context>& ctx) {
  const SuiteConfig& cfg = ctx->cfg;
  SuitePlan plan;
  plan.trial_count = static_cast<std::uint64_t>(cfg.trials);
  plan.sampling = base_sampling(*ctx);
  Json& notes = plan.sampling;
  switch (cfg.suite) {
    case Suite::leibniz:
      plan.checks = {"l0-leibniz", "sigma-leibniz", "l0-tilde-leibniz", "sigma-e-leibniz"};
      notes["pair"] = "A, B Gaussian in M_d; X, Y Gaussian in M_n(M_d), equal to A, B when n = 1";
      notes["scale"] = "(1 + ||A||)(1 + ||B||)";
      bind_paths(plan, ctx, &leibniz_trial<StandardPath>, &leibniz_trial<RefinedPath>);
      break;
    case Suite::strong:
      plan.checks = {"sigma-strong", "sigma-e-strong"};
      notes["invertible"] = "G + lambda I with cond <= 1e4; the M_n(M_d) element equals the M_d one when n = 1";
      notes["scale"] = "||A^-1||^2 (1 + ||A||)";
      bind_paths(plan, ctx, &strong_trial<StandardPath>, &strong_trial<RefinedPath>);
      break;
    case Suite::matricial:
      plan.checks = {"sigma-n-leibniz", "sigma-n-strong"};
      notes["level"] = "uniform in 1..n per trial (always 1 when n = 1)";
      notes["elements"] = "A, B Gaussian and C invertible (cond <= 1e4) in M_level(M_d)";
      bind_paths(plan, ctx, &matricial_trial<StandardPath>, &matricial_trial<RefinedPath>);
      break;
    case Suite::markov:
      plan.checks = {"sigma-markov", "delta-markov"};
      notes["hermitian_trials"] =
          "N = (G + G*)/2, F piecewise linear with 5-9 breakpoints spanning the spectrum and Gaussian values";
      notes["reciprocal_trials"] =
          "trial index = 10 mod 11: N = U diag(z) U*, U Haar, z complex Gaussian redrawn while |z| < 0.25, "
          "F(z) = 1/z with Lip = 1/min|z|^2";
      notes["delta_check"] = "absolute floor max(tol, 1e-6), solver tol 1e-9";
      bind_paths(plan, ctx, &markov_trial<StandardPath>, &markov_trial<RefinedPath>);
      break;
    case Suite::audenaert:
      plan.checks = {"duality-gap", "weak-duality", "delta-star", "diagonal-closed-form", "delta-strong"};
      notes["probe_states"] = "8 normalized Wishart and 4 Haar-random pure states per trial, plus the argmax";
      notes["diagonal"] = "real Gaussian diagonal, compared with (max - min)/2 at 1e-8";
      notes["solver_tol"] = "max(tol/10, 1e-8) for the certificate, tol/1000 on re-verification";
      bind_paths(plan, ctx, &audenaert_trial<StandardPath>, &audenaert_trial<RefinedPath>);
      break;
    case Suite::quotient:
      plan.checks = {"scalar-quotient", "module-quotient"};
      notes["candidates"] =
          "48 Gaussian perturbations of mu(A) (resp. E(X)) at scale 1 + ||A|| and 16 at scale 1e-3 (1 + ||A||)";
      bind_paths(plan, ctx, &quotient_trial<StandardPath>, &quotient_trial<RefinedPath>);
      break;
    case Suite::tracial_copies:
      plan.checks = {"independent-copies"};
      notes["scale"] = "1 + ||A||^2";
      bind_paths(plan, ctx, &tracial_copies_trial<StandardPath>, &tracial_copies_trial<RefinedPath>);
      break;
    case Suite::search_l0_strong:
      plan.checks = {"l0-strong"};
      notes["non_tracial_rejection"] = "random states redrawn while ||rho - I/d|| < 0.05";
      notes["invertible"] =
          "G + lambda I with cond <= 1e4, redrawn while ||A*A - AA*|| < 0.01 ||A||^2 (non-normal bias)";
      notes["scale"] = "||A^-1||^2 (1 + ||A||)";
      notes["reverification"] = "long double with iteratively refined inverse";
      bind_paths(plan, ctx, &search_trial<StandardPath>, &search_trial<RefinedPath>);
      break;
    case Suite::lipschitz_metric:
      plan.checks = {"lip-leibniz", "lip-strong", "lip-markov"};
      notes["metric"] = "dim points uniform in the unit square with Euclidean distance";
      notes["functions"] = "f, g complex Gaussian; h = g (1 + 1/|g|); F piecewise linear on the range of Re f";
      bind_paths(plan, ctx, &lipschitz_trial<StandardPath>, &lipschitz_trial<RefinedPath>);
      break;
    case Suite::shift: {
      plan.checks = {"shift-example", "block-unitary", "generator-relations", "gamma-witnesses", "ls-commutator"};
      if (!cfg.expr.empty()) plan.checks.push_back("expression");
      plan.trial_count = 1;
      plan.sampling = Json{{"exact", "Gaussian-rational arithmetic on finitely supported vectors"},
                           {"window", cfg.window},
                           {"trials", "the shift suite is exact and runs once"},
                           {"margin", "minus the number of failing entries"}};
      auto run = [ctx](std::uint64_t, std::vector<Measurement>& out, Json* inst) { shift_trial(*ctx, out, inst); };
      plan.standard = run;
      plan.refined = run;
      break;
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Report

struct CheckSummary {
  std::string name;
  std::size_t count = 0;
  std::size_t failures = 0;
  double tol = 0;
  double min_relative = std::numeric_limits<double>::infinity();
  double min_margin = 0;
  double min_scale = 1;
  std::uint64_t argmin_trial = 0;
  double mean_relative = 0;
  std::array<double, 5> percentiles{};  // p1, p5, p50, p95, p99 of margin / scale
};

struct Violation {
  std::uint64_t trial = 0;
  std::string check;
  Measurement original;
  std::optional<Measurement> refined;
  bool confirmed = false;
  std::string note;
};

struct TrialError {
  std::uint64_t trial = 0;
  std::string message;
};

struct MarginReport {
  Json config;
  Json sampling;
  std::uint64_t trials = 0;
  std::vector<std::string> check_names;
  std::vector<CheckSummary> checks;
  std::vector<std::vector<Measurement>> per_trial;  // empty for errored trials
  std::optional<std::pair<std::size_t, std::uint64_t>> binding;  // (check, trial) of min margin / scale
  Json argmin_instance;
  std::vector<Violation> violations;
  std::vector<TrialError> errors;
  std::string digest;
  double seconds = 0;

  std::size_t confirmed() const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [](const Violation& v) { return v.confirmed; }));
  }
  bool pass() const { return confirmed() == 0; }

  const Measurement* min_measurement() const {
    if (!binding) return nullptr;
    return &per_trial[binding->second][binding->first];
  }
};

inline constexpr std::size_t kListedViolations = 100;
inline constexpr std::size_t kListedErrors = 100;

inline Json measurement_json(const Measurement& m) {
  return Json{{"margin", m.margin}, {"scale", m.scale}, {"tol", m.tol}, {"relative", m.relative()}};
}

/// Report body. The digest is the SHA-256 of this object without the
/// digest and timing fields, serialized compactly with sorted keys.
inline Json report_to_json(const MarginReport& r, bool with_digest_and_timing = true) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json j = {{"name", c.name}, {"count", c.count}, {"failures", c.failures}, {"tol", c.tol}};
    if (c.count > 0) {
      j["min_relative_margin"] = c.min_relative;
      j["min_margin"] = c.min_margin;
      j["scale_at_min"] = c.min_scale;
      j["argmin_trial"] = c.argmin_trial;
      j["mean_relative_margin"] = c.mean_relative;
      j["percentiles"] = {{"p1", c.percentiles[0]},
                          {"p5", c.percentiles[1]},
                          {"p50", c.percentiles[2]},
                          {"p95", c.percentiles[3]},
                          {"p99", c.percentiles[4]}};
    }
    checks.push_back(std::move(j));
  }
  Json min_margin = nullptr;
  if (const Measurement* m = r.min_measurement()) {
    min_margin = measurement_json(*m);
    min_margin["check"] = r.check_names[r.binding->first];
    min_margin["trial"] = r.binding->second;
  }
  Json violations = Json::array();
  std::size_t artifacts = 0;
  for (std::size_t k = 0; k < r.violations.size(); ++k) {
    const Violation& v = r.violations[k];
    if (!v.confirmed) ++artifacts;
    if (k >= kListedViolations) continue;
    Json j = {{"trial", v.trial},
              {"check", v.check},
              {"status", v.confirmed ? "confirmed" : "numerical-artifact"},
              {"original", measurement_json(v.original)}};
    j["refined"] = v.refined ? measurement_json(*v.refined) : Json(nullptr);
    if (!v.note.empty()) j["note"] = v.note;
    violations.push_back(std::move(j));
  }
  Json errors = Json::array();
  for (std::size_t k = 0; k < r.errors.size() && k < kListedErrors; ++k)
    errors.push_back({{"trial", r.errors[k].trial}, {"message", r.errors[k].message}});
  Json out = {{"config", r.config},
              {"sampling", r.sampling},
              {"trials", r.trials},
              {"completed_trials", r.trials - r.errors.size()},
              {"checks", std::move(checks)},
              {"min_margin", std::move(min_margin)},
              {"argmin_instance", r.argmin_instance},
              {"violation_count", r.violations.size()},
              {"confirmed_violations", r.confirmed()},
              {"numerical_artifacts", artifacts},
              {"violations", std::move(violations)},
              {"error_count", r.errors.size()},
              {"errors", std::move(errors)},
              {"pass", r.pass()}};
  if (with_digest_and_timing) {
    out["digest"] = r.digest;
    out["timing"] = {{"seconds", r.seconds}};
  }
  return out;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InternalConsistency("sha256: OpenSSL digest failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return os.str();
}

inline std::string report_digest(const MarginReport& r) { return sha256_hex(report_to_json(r, false).dump()); }

/// Rows trial,margin,scale,pass for the binding (smallest margin / scale)
/// check of each trial; errored trials are written with nan and "error".
inline void write_csv(std::ostream& os, const MarginReport& r) {
  os << "trial,margin,scale,pass\n";
  os << std::setprecision(17);
  for (std::uint64_t t = 0; t < r.per_trial.size(); ++t) {
    const auto& row = r.per_trial[t];
    const Measurement* worst = nullptr;
    bool pass = true;
    for (const auto& m : row) {
      if (!m.present) continue;
      pass = pass && m.passes();
      if (!worst || m.relative() < worst->relative()) worst = &m;
    }
    if (!worst) {
      os << t << ",nan,nan,error\n";
      continue;
    }
    os << t << ',' << worst->margin << ',' << worst->scale << ',' << (pass ? "true" : "false") << '\n';
  }
}

inline Json config_to_json(const Context& ctx) {
  const SuiteConfig& c = ctx.cfg;
  Json state;
  switch (c.state_kind) {
    case StateKind::tracial: state = {{"kind", "tracial"}}; break;
    case StateKind::random_faithful: state = {{"kind", "random-faithful"}}; break;
    case StateKind::fixed_from_file:
      state = {{"kind", "fixed-from-file"}, {"density", ncprob::state_to_json(*ctx.fixed_state)}};
      break;
  }
  Json j = {{"suite", to_string(c.suite)}, {"dim", c.dim}, {"n", c.n}, {"trials", c.trials},
            {"seed", c.seed},             {"tol", c.tol}, {"state", state}};
  if (c.suite == Suite::shift) {
    j["window"] = c.window;
    j["expr"] = c.expr;
  }
  return j;
}

inline std::shared_ptr<const Context> make_context(const SuiteConfig& cfg) {
  validate(cfg);
  auto ctx = std::make_shared<Context>();
  ctx->cfg = cfg;
  if (cfg.state_kind == StateKind::fixed_from_file) {
    try {
      ctx->fixed_state = ncprob::state_from_json(read_json_file(cfg.state_path));
    } catch (const Error& e) {
      throw ConfigError(std::string("state file: ") + e.what());
    }
    if (ctx->fixed_state->dim() != cfg.dim)
      throw ConfigError("state file: density has dimension " + std::to_string(ctx->fixed_state->dim()) +
                        " but dim is " + std::to_string(cfg.dim));
  }
  if (cfg.suite == Suite::shift && !cfg.expr.empty()) {
    try {
      shiftlab::parse_expression(cfg.expr);
    } catch (const MalformedInput& e) {
      throw ConfigError(std::string("--expr: ") + e.what());
    }
  }
  return ctx;
}

inline std::array<double, 5> percentiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::array<double, 5> out{};
  const double ps[5] = {1, 5, 50, 95, 99};
  for (int k = 0; k < 5; ++k) {
    const auto rank = static_cast<std::size_t>(std::ceil(ps[k] / 100 * static_cast<double>(values.size())));
    out[static_cast<std::size_t>(k)] = values[std::max<std::size_t>(rank, 1) - 1];
  }
  return out;
}

inline MarginReport run_suite(const SuiteConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto ctx = make_context(cfg);
  const SuitePlan plan = make_plan(ctx);
  const std::size_t count = static_cast<std::size_t>(plan.trial_count);
  const std::size_t nchecks = plan.checks.size();

  MarginReport r;
  r.config = config_to_json(*ctx);
  r.sampling = plan.sampling;
  r.trials = plan.trial_count;
  r.check_names = plan.checks;
  r.per_trial.assign(count, {});
  std::vector<std::string> messages(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    std::vector<Measurement> row(nchecks);
    try {
      plan.standard(i, row, nullptr);
      r.per_trial[i] = std::move(row);
    } catch (const Error& e) {
      messages[i] = e.what();
    }
  });

  r.checks.resize(nchecks);
  std::vector<std::vector<double>> relative(nchecks);
  std::vector<std::pair<std::uint64_t, std::size_t>> failing;
  for (std::size_t k = 0; k < nchecks; ++k) r.checks[k].name = plan.checks[k];
  for (std::uint64_t t = 0; t < count; ++t) {
    if (!messages[t].empty()) r.errors.push_back({t, messages[t]});
    const auto& row = r.per_trial[t];
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Measurement& m = row[k];
      if (!m.present) continue;
      CheckSummary& c = r.checks[k];
      if (c.count == 0) c.tol = m.tol;
      ++c.count;
      const double rel = m.relative();
      relative[k].push_back(rel);
      c.mean_relative += rel;
      if (rel < c.min_relative) {
        c.min_relative = rel;
        c.min_margin = m.margin;
        c.min_scale = m.scale;
        c.argmin_trial = t;
      }
      if (!r.binding || rel < r.per_trial[r.binding->second][r.binding->first].relative()) r.binding = {{k, t}};
      if (!m.passes()) {
        ++c.failures;
        failing.push_back({t, k});
      }
    }
  }
  for (std::size_t k = 0; k < nchecks; ++k) {
    CheckSummary& c = r.checks[k];
    if (c.count == 0) continue;
    c.mean_relative /= static_cast<double>(c.count);
    c.percentiles = percentiles(std::move(relative[k]));
  }

  r.violations.resize(failing.size());
  parallel_for(failing.size(), cfg.threads, [&](std::size_t i) {
    const auto [t, k] = failing[i];
    Violation& v = r.violations[i];
    v.trial = t;
    v.check = plan.checks[k];
    v.original = r.per_trial[t][k];
    std::vector<Measurement> row(nchecks);
    try {
      plan.refined(t, row, nullptr);
      if (row[k].present) {
        v.refined = row[k];
        // Confirmed only if the refined value fails the original tolerance.
        v.confirmed = !Measurement{row[k].margin, row[k].scale, v.original.tol, true}.passes();
      } else {
        v.note = "refined path did not evaluate this check";
      }
    } catch (const Error& e) {
      v.note = std::string("refined path failed: ") + e.what();
    }
  });

  if (r.binding) {
    std::vector<Measurement> row(nchecks);
    plan.standard(r.binding->second, row, &r.argmin_instance);
    r.argmin_instance["trial"] = r.binding->second;
  }
  r.digest = report_digest(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// The open-question search: run_suite with the search-l0-strong suite.
inline MarginReport search_l0_strong(SuiteConfig cfg) {
  cfg.suite = Suite::search_l0_strong;
  return run_suite(cfg);
}

}  // namespace leiblab::harness
