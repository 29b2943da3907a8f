#pragma once

// Maximal deviation: Delta(A) = min_alpha ||A - alpha|| computed directly, and
// max_rho ||A - mu(A)||_mu computed over density matrices, so that the two
// sides of the min-max identity can be compared numerically.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "leiblab/errors.hpp"
#include "leiblab/linalg.hpp"
#include "leiblab/matrix_io.hpp"
#include "leiblab/ncprob.hpp"
#include "leiblab/random.hpp"

namespace leiblab::duality {

struct SolverOptions {
  int starts = 5;
  std::uint64_t seed = 0;
  long nelder_mead_cap = 20000;  // function evaluations per start
  long frank_wolfe_cap = 100000;
};

struct MinResult {
  double value = 0;
  Complex argmin;
  long evaluations = 0;
  double simplex_diameter = 0;
};

struct MaxResult {
  double value = 0;
  CMatrix argmax;
  long iterations = 0;
  double fw_gap = 0;  // upper bound on (max variance) - (variance at argmax)
};

namespace detail {

using Point = std::array<double, 2>;

template <class F>
struct NelderMead {
  F f;
  long evaluations = 0;

  double eval(const Point& p) {
    ++evaluations;
    return f(p);
  }

  /// Standard reflection/expansion/contraction/shrink in the plane. Returns
  /// the best vertex; `diameter` receives the final simplex diameter.
  Point run(Point start, double size, double xtol, long cap, double& best, double& diameter) {
    std::array<Point, 3> x{start, Point{start[0] + size, start[1]}, Point{start[0], start[1] + size}};
    std::array<double, 3> fx{};
    for (int i = 0; i < 3; ++i) fx[i] = eval(x[i]);
    const long limit = evaluations + cap;
    auto diam = [&] {
      double dmax = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) dmax = std::max(dmax, std::hypot(x[i][0] - x[j][0], x[i][1] - x[j][1]));
      return dmax;
    };
    while (evaluations < limit) {
      std::array<int, 3> idx{0, 1, 2};
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
      const int lo = idx[0], mid = idx[1], hi = idx[2];
      if (diam() <= xtol) break;
      const Point c{(x[lo][0] + x[mid][0]) / 2, (x[lo][1] + x[mid][1]) / 2};
      auto along = [&](double t) { return Point{c[0] + t * (x[hi][0] - c[0]), c[1] + t * (x[hi][1] - c[1])}; };
      const Point r = along(-1.0);
      const double fr = eval(r);
      if (fr < fx[lo]) {
        const Point e = along(-2.0);
        const double fe = eval(e);
        if (fe < fr) x[hi] = e, fx[hi] = fe;
        else x[hi] = r, fx[hi] = fr;
      } else if (fr < fx[mid]) {
        x[hi] = r, fx[hi] = fr;
      } else {
        const bool outside = fr < fx[hi];
        const Point k = along(outside ? -0.5 : 0.5);
        const double fk = eval(k);
        if (fk < (outside ? fr : fx[hi])) {
          x[hi] = k, fx[hi] = fk;
        } else {
          for (int i : {mid, hi}) {
            x[i] = Point{(x[i][0] + x[lo][0]) / 2, (x[i][1] + x[lo][1]) / 2};
            fx[i] = eval(x[i]);
          }
        }
      }
    }
    const int b = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    best = fx[b];
    diameter = diam();
    return x[b];
  }
};

/// Golden-section minimization of a convex function of one variable on [lo, hi].
template <class F>
double golden_section(F&& f, double lo, double hi, double xtol, double& fbest) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - phi * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + phi * (b - a), fd = f(d);
    }
  }
  const double x = (a + b) / 2;
  fbest = f(x);
  return x;
}

}  // namespace detail

/// Minimizes the convex function alpha -> ||A - alpha 1|| over the disk
/// |alpha| <= 2||A|| by multi-start Nelder-Mead followed by alternating
/// golden-section polishing along Re and Im.
inline MinResult delta_min(const CMatrix& a, double tol, const SolverOptions& opt = {}) {
  linalg::require_well_formed(a, "delta_min");
  if (!(tol >= 1e-12)) throw MalformedInput("delta_min: tol must be >= 1e-12");
  const double norm = linalg::spectral_norm(a);
  MinResult out;
  if (norm == 0.0) return out;
  const Eigen::Index d = a.rows();
  CMatrix shifted = a;
  const CVector diag = a.diagonal();
  auto g = [&](const detail::Point& p) {
    shifted.diagonal() = diag.array() - Complex(p[0], p[1]);
    return linalg::spectral_norm(shifted);
  };
  detail::NelderMead<decltype(g)> nm{g};
  const double radius = 2.0 * norm;
  const double xtol = std::max(tol * 1e-3, 1e-14 * norm);
  Rng rng(opt.seed, 0x64656c7461ULL);
  const Complex center = a.trace() / static_cast<double>(d);
  double best = std::numeric_limits<double>::infinity();
  detail::Point best_x{center.real(), center.imag()};
  double best_diam = 0;
  for (int s = 0; s < std::max(1, opt.starts); ++s) {
    detail::Point start{center.real(), center.imag()};
    if (s > 0) {
      const double r = norm * std::sqrt(rng.uniform()), th = 2 * M_PI * rng.uniform();
      start = {r * std::cos(th), r * std::sin(th)};
    }
    double size = 0.25 * norm, fval = 0, diam = 0;
    detail::Point x = start;
    // Restart from the incumbent with a fresh simplex until it stops improving.
    double prev = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 20; ++round) {
      x = nm.run(x, size, xtol, opt.nelder_mead_cap, fval, diam);
      if (prev - fval <= xtol) break;
      prev = fval;
      size = std::max(10 * diam, 10 * xtol);
    }
    if (fval < best) best = fval, best_x = x, best_diam = diam;
  }
  // Polish.
  double h = std::max(best_diam * 4, 4 * xtol);
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (int axis = 0; axis < 2; ++axis) {
      double fnew = 0;
      detail::Point p = best_x;
      auto along = [&](double t) {
        p[axis] = t;
        return g(p);
      };
      const double t = detail::golden_section(along, best_x[axis] - h, best_x[axis] + h, xtol / 4, fnew);
      if (fnew < best) best = fnew, best_x[axis] = t;
    }
    h /= 2;
  }
  if (std::hypot(best_x[0], best_x[1]) > radius * (1 + 1e-12)) {
    throw SolverError("delta_min: minimizer left the disk |alpha| <= 2||A||", best, nm.evaluations);
  }
  if (best_diam > std::max(tol, 1e3 * xtol)) {
    std::ostringstream os;
    os << "delta_min: simplex diameter " << best_diam << " did not shrink below tolerance " << tol;
    throw SolverError(os.str(), best, nm.evaluations);
  }
  out.value = best;
  out.argmin = Complex(best_x[0], best_x[1]);
  out.evaluations = nm.evaluations;
  out.simplex_diameter = best_diam;
  return out;
}

/// Variance mu(A*A) - |mu(A)|^2 at a density matrix.
inline double variance(const CMatrix& rho, const CMatrix& a) {
  const Complex c = ncprob::kernel::expectation<double>(rho, a);
  return ncprob::kernel::mu_norm_squared<double>(rho, a) - std::norm(c);
}

/// Maximizes the concave function V(rho) = mu(A*A) - |mu(A)|^2 over density
/// matrices with away-step Frank-Wolfe. The linear subproblem is solved by a
/// top eigenvector of the gradient G = A*A - (conj(c) A + c A*), c = tr(rho A),
/// and every step uses exact line search (V is quadratic along any segment).
/// Stops once the Frank-Wolfe gap certifies sqrt(V*) - sqrt(V) <= tol.
inline MaxResult delta_max_states(const CMatrix& a, double tol, const SolverOptions& opt = {}) {
  linalg::require_well_formed(a, "delta_max_states");
  if (!(tol >= 1e-10)) throw MalformedInput("delta_max_states: tol must be >= 1e-10");
  const Eigen::Index d = a.rows();
  const CMatrix gram = a.adjoint() * a;
  std::vector<CVector> atoms;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < d; ++i) {
    atoms.push_back(CVector::Unit(d, i));
    weights.push_back(1.0 / static_cast<double>(d));
  }
  auto assemble = [&] {
    CMatrix rho = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < atoms.size(); ++i) rho += weights[i] * atoms[i] * atoms[i].adjoint();
    return CMatrix((rho + rho.adjoint()) / 2.0);
  };
  MaxResult out;
  CMatrix rho = assemble();
  for (long k = 0;; ++k) {
    const Complex c = ncprob::kernel::expectation<double>(rho, a);
    const double v = std::max(variance(rho, a), 0.0);
    CMatrix grad = gram - (std::conj(c) * a + c * a.adjoint());
    grad = (grad + grad.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(grad);
    const double top = eig.eigenvalues()(d - 1);
    const double at_rho = ncprob::kernel::expectation<double>(rho, grad).real();
    const double gap = std::max(top - at_rho, 0.0);
    out.iterations = k;
    out.fw_gap = gap;
    out.value = std::sqrt(v);
    if (gap <= tol * (2.0 * std::sqrt(v) + tol)) break;
    if (k >= opt.frank_wolfe_cap) {
      std::ostringstream os;
      os << "delta_max_states: Frank-Wolfe gap " << gap << " above tolerance after " << k << " iterations";
      throw SolverError(os.str(), std::sqrt(v), k);
    }
    // Away atom: the active atom with the smallest gradient pairing.
    std::size_t away = 0;
    double away_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double val = atoms[i].dot(grad * atoms[i]).real();
      if (val < away_val) away_val = val, away = i;
    }
    const CVector s = eig.eigenvectors().col(d - 1);
    const bool fw_step = gap >= at_rho - away_val;
    CMatrix dir;
    double step_max;
    if (fw_step) {
      dir = s * s.adjoint() - rho;
      step_max = 1.0;
    } else {
      dir = rho - atoms[away] * atoms[away].adjoint();
      const double wa = weights[away];
      step_max = wa < 1.0 ? wa / (1.0 - wa) : std::numeric_limits<double>::infinity();
    }
    const double slope = ncprob::kernel::expectation<double>(dir, gram).real() -
                         2.0 * (std::conj(c) * ncprob::kernel::expectation<double>(dir, a)).real();
    const double curv = std::norm(ncprob::kernel::expectation<double>(dir, a));
    double step = curv > 0 ? slope / (2.0 * curv) : step_max;
    step = std::clamp(step, 0.0, step_max);
    if (fw_step) {
      for (double& w : weights) w *= (1.0 - step);
      std::size_t match = atoms.size();
      for (std::size_t i = 0; i < atoms.size(); ++i)
        if (std::norm(atoms[i].dot(s)) > 1.0 - 1e-13) match = i;
      if (match < atoms.size()) {
        weights[match] += step;
      } else {
        atoms.push_back(s);
        weights.push_back(step);
      }
    } else {
      for (double& w : weights) w *= (1.0 + step);
      weights[away] = step == step_max ? 0.0 : weights[away] - step;
    }
    for (std::size_t i = atoms.size(); i-- > 0;) {
      if (weights[i] <= 1e-16) {
        atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(i));
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    double total = 0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    rho = assemble();
  }
  out.argmax = rho;
  return out;
}

struct DualityCertificate {
  double delta_min = 0;
  Complex argmin_alpha;
  double delta_max = 0;
  CMatrix argmax_rho;
  double gap = 0;
  long min_evaluations = 0;
  long max_iterations = 0;
  double sigma_at_argmax = 0;
  double tol = 0;
  bool certified = false;
  std::vector<std::string> failures;
};

/// Runs both solvers and checks |min - max| <= 10 tol, together with
/// sigma^mu(argmax) <= Delta + 10 tol.
inline DualityCertificate certify_duality(const CMatrix& a, double tol, const SolverOptions& opt = {}) {
  if (!(tol >= 1e-8)) throw MalformedInput("certify_duality: tol must be >= 1e-8");
  DualityCertificate cert;
  cert.tol = tol;
  const MinResult lo = delta_min(a, tol, opt);
  const MaxResult hi = delta_max_states(a, tol, opt);
  cert.delta_min = lo.value;
  cert.argmin_alpha = lo.argmin;
  cert.min_evaluations = lo.evaluations;
  cert.delta_max = hi.value;
  cert.argmax_rho = hi.argmax;
  cert.max_iterations = hi.iterations;
  cert.gap = std::abs(lo.value - hi.value);
  const auto state = ncprob::State::from_density(hi.argmax, ncprob::Faithfulness::allow_degenerate);
  cert.sigma_at_argmax = ncprob::sigma_mu(state, a);
  if (cert.gap > 10 * tol) {
    std::ostringstream os;
    os << "duality gap " << cert.gap << " exceeds " << 10 * tol;
    cert.failures.push_back(os.str());
  }
  if (cert.delta_max > cert.delta_min + 10 * tol) {
    std::ostringstream os;
    os << "weak duality violated: max " << cert.delta_max << " > min " << cert.delta_min;
    cert.failures.push_back(os.str());
  }
  if (cert.sigma_at_argmax > cert.delta_min + 10 * tol) {
    std::ostringstream os;
    os << "sigma at argmax " << cert.sigma_at_argmax << " exceeds Delta " << cert.delta_min;
    cert.failures.push_back(os.str());
  }
  cert.certified = cert.failures.empty();
  return cert;
}

inline Json certificate_to_json(const DualityCertificate& c) {
  return Json{{"delta_min", c.delta_min},
              {"argmin_alpha", {{"re", c.argmin_alpha.real()}, {"im", c.argmin_alpha.imag()}}},
              {"delta_max", c.delta_max},
              {"argmax_rho", matrix_to_json(c.argmax_rho)},
              {"gap", c.gap},
              {"iterations", {{"delta_min", c.min_evaluations}, {"delta_max", c.max_iterations}}},
              {"sigma_at_argmax", c.sigma_at_argmax},
              {"tol", c.tol},
              {"certified", c.certified},
              {"failures", c.failures}};
}

/// Lip(F) Delta(N) - Delta(F(N)).
inline double delta_markov_margin(const CMatrix& n, const ncprob::LipschitzFn& f, double tol,
                                  const SolverOptions& opt = {}) {
  const CMatrix fn = ncprob::apply_lipschitz(n, f);
  return f.lip_constant() * delta_min(n, tol, opt).value - delta_min(fn, tol, opt).value;
}

}  // namespace leiblab::duality
