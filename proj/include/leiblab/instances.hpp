#pragma once

// Random inputs for the property suites. Every generator draws only from the
// Rng it is handed, so an instance is a pure function of its stream key.

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "leiblab/errors.hpp"
#include "leiblab/linalg.hpp"
#include "leiblab/ncprob.hpp"
#include "leiblab/random.hpp"

namespace leiblab {

enum class InstanceKind { matrix, hermitian, unitary, invertible, state_faithful, state_tracial, lipschitz_pl };

using Instance = std::variant<CMatrix, ncprob::State, ncprob::LipschitzFn>;

/// i.i.d. standard complex Gaussian entries.
inline CMatrix random_matrix(Rng& rng, Eigen::Index d) { return rng.gaussian_matrix(d); }

/// (G + G*) / 2 for Gaussian G.
inline CMatrix random_hermitian(Rng& rng, Eigen::Index d) {
  const CMatrix g = rng.gaussian_matrix(d);
  return (g + g.adjoint()) / 2.0;
}

/// Q from a Householder QR of a Gaussian matrix, with column phases fixed so
/// that R has a positive diagonal (Haar distributed).
inline CMatrix random_unitary(Rng& rng, Eigen::Index d) {
  const CMatrix g = rng.gaussian_matrix(d);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * linalg::identity(d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex rk = r(k, k);
    if (std::abs(rk) > 0) q.col(k) *= rk / std::abs(rk);
  }
  return q;
}

/// G + lambda I with lambda = 0 unless cond(G) exceeds the cap, in which case
/// lambda doubles from ||G|| / 100 until the condition number is within it.
inline CMatrix random_invertible(Rng& rng, Eigen::Index d, double cap = linalg::kSearchConditionCap) {
  const CMatrix g = rng.gaussian_matrix(d);
  const double norm = linalg::spectral_norm(g);
  double lambda = 0;
  for (int step = 0; step < 200; ++step) {
    CMatrix a = g;
    a.diagonal().array() += lambda;
    const auto sv = linalg::singular_values(a);
    const double smin = sv(sv.size() - 1);
    if (smin > 0 && sv(0) / smin <= cap) return a;
    lambda = lambda == 0 ? std::max(norm, 1.0) / 100 : 2 * lambda;
  }
  throw InternalConsistency("random_invertible: shift search did not reach the condition cap");
}

/// Normalized Wishart density G G* / trace, redrawn in the measure-zero event
/// that it falls below the faithfulness floor.
inline ncprob::State random_faithful_state(Rng& rng, Eigen::Index d) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto s = ncprob::State::from_density(rng.wishart_density(d), ncprob::Faithfulness::allow_degenerate);
    if (s.faithful()) return s;
  }
  throw InternalConsistency("random_faithful_state: no faithful draw in 1000 attempts");
}

/// 5 to 9 sorted breakpoints: the two ends sit just outside [lo, hi] and the
/// interior ones are uniform on it. Values are standard Gaussian.
inline ncprob::LipschitzFn random_piecewise_linear(Rng& rng, double lo, double hi) {
  const int count = rng.uniform_int(5, 9);
  const double width = std::max(hi - lo, 1e-3);
  for (;;) {
    std::vector<double> xs;
    xs.push_back(lo - 0.05 * width * (1 + rng.uniform()));
    for (int k = 0; k < count - 2; ++k) xs.push_back(lo + width * rng.uniform());
    xs.push_back(hi + 0.05 * width * (1 + rng.uniform()));
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) continue;
    std::vector<double> ys;
    for (int k = 0; k < count; ++k) ys.push_back(rng.gaussian());
    return ncprob::LipschitzFn::piecewise_linear(std::move(xs), std::move(ys));
  }
}

inline InstanceKind parse_instance_kind(const std::string& name) {
  if (name == "matrix") return InstanceKind::matrix;
  if (name == "hermitian") return InstanceKind::hermitian;
  if (name == "unitary") return InstanceKind::unitary;
  if (name == "invertible") return InstanceKind::invertible;
  if (name == "state-faithful") return InstanceKind::state_faithful;
  if (name == "state-tracial") return InstanceKind::state_tracial;
  if (name == "lipschitz-pl") return InstanceKind::lipschitz_pl;
  throw ConfigError("unknown instance kind '" + name + "'");
}

/// lipschitz-pl spans [-2 sqrt(dim), 2 sqrt(dim)], the bulk of the spectrum of
/// a dim x dim random Hermitian matrix.
inline Instance random_instance(InstanceKind kind, Eigen::Index dim, Rng& rng) {
  if (dim < 1) throw ConfigError("random_instance: dim must be positive");
  switch (kind) {
    case InstanceKind::matrix: return random_matrix(rng, dim);
    case InstanceKind::hermitian: return random_hermitian(rng, dim);
    case InstanceKind::unitary: return random_unitary(rng, dim);
    case InstanceKind::invertible: return random_invertible(rng, dim);
    case InstanceKind::state_faithful: return random_faithful_state(rng, dim);
    case InstanceKind::state_tracial: return ncprob::State::tracial(dim);
    case InstanceKind::lipschitz_pl: {
      const double r = 2 * std::sqrt(static_cast<double>(dim));
      return random_piecewise_linear(rng, -r, r);
    }
  }
  throw ConfigError("random_instance: unknown kind");
}

}  // namespace leiblab
