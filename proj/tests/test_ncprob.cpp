#include <gtest/gtest.h>

#include <numbers>

#include "leiblab/ncprob.hpp"
#include "leiblab/random.hpp"
#include "oracles.hpp"

using namespace leiblab;
using namespace leiblab::ncprob;
using linalg::identity;
using linalg::spectral_norm;

namespace {

CMatrix diag(std::initializer_list<Complex> values) {
  CVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const auto& z : values) v(k++) = z;
  return v.asDiagonal();
}

CMatrix nilpotent() {
  CMatrix m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}

State random_state(Rng& rng, Eigen::Index d) { return State::from_density(rng.wishart_density(d)); }

CMatrix random_unitary(Rng& rng, Eigen::Index d) {
  Eigen::HouseholderQR<CMatrix> qr(rng.gaussian_matrix(d));
  return qr.householderQ() * identity(d);
}

}  // namespace

TEST(State, Validation) {
  EXPECT_THROW(State::from_density(diag({0.6, 0.6})), DomainError);
  EXPECT_THROW(State::from_density(diag({1.5, -0.5})), DomainError);
  EXPECT_THROW(State::from_density(diag({1.0, 0.0})), DomainError);
  CMatrix skew = identity(2) / 2.0;
  skew(0, 1) = 0.1;
  EXPECT_THROW(State::from_density(skew), DomainError);
  const State degenerate = State::from_density(diag({1.0, 0.0}), Faithfulness::allow_degenerate);
  EXPECT_FALSE(degenerate.faithful());
  EXPECT_TRUE(State::from_density(identity(3) / 3.0).tracial());
  EXPECT_FALSE(State::from_density(diag({0.75, 0.25})).tracial());
  const State t = State::tracial(3);
  EXPECT_TRUE(t.tracial());
  EXPECT_EQ(t.rho(), CMatrix(identity(3) / 3.0));
}

TEST(State, JsonRoundTripAndFlagCheck) {
  Rng rng(30, 0);
  const State s = random_state(rng, 3);
  const State back = state_from_json(Json::parse(state_to_json(s).dump()));
  EXPECT_EQ(back.rho(), s.rho());
  Json lie = state_to_json(s);
  lie["tracial"] = true;
  EXPECT_THROW(state_from_json(lie), DomainError);
}

TEST(Expectation, Examples) {
  Rng rng(31, 0);
  const CMatrix a = rng.gaussian_matrix(4);
  EXPECT_NEAR(std::abs(expectation(State::tracial(4), a) - a.trace() / 4.0), 0.0, 1e-15);
  const State pure = State::from_density(diag({1.0, 0.0}), Faithfulness::allow_degenerate);
  EXPECT_EQ(expectation(pure, diag({Complex(2, 1), 7.0})), Complex(2, 1));
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng r(32, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 5);
    const State s = random_state(r, d);
    const CMatrix x = r.gaussian_matrix(d);
    EXPECT_NEAR(std::abs(expectation(s, x) - oracle::naive_trace_product(s.rho(), x)), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(expectation(s, identity(d)) - 1.0), 0.0, 1e-12);
  }
  EXPECT_THROW(expectation(State::tracial(2), identity(3)), DimensionMismatch);
}

TEST(MuNorm, Examples) {
  EXPECT_NEAR(mu_norm(State::tracial(3), identity(3)), 1.0, 1e-15);
  EXPECT_NEAR(mu_norm(State::tracial(2), nilpotent()), std::sqrt(0.5), 1e-15);
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng(33, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 4);
    const State s = random_state(rng, d);
    const CMatrix a = rng.gaussian_matrix(d);
    const GnsSpace gns(s);
    EXPECT_NEAR(mu_norm(s, a), gns.embed(a).norm(), 1e-12 * (1 + gns.embed(a).norm()));
    EXPECT_NEAR(mu_norm(s, a), oracle::naive_mu_norm(s.rho(), a), 1e-12 * (1 + mu_norm(s, a)));
  }
}

TEST(L0, Examples) {
  Rng rng(34, 0);
  const State s = random_state(rng, 3);
  EXPECT_NEAR(l0(s, Complex(2, -1) * identity(3)), 0.0, 1e-7);
  EXPECT_NEAR(l0(State::from_density(diag({0.5, 0.5})), diag({0.0, 1.0})), 0.5, 1e-15);
  EXPECT_NEAR(l0(State::from_density(diag({0.75, 0.25})), nilpotent()), 0.5, 1e-15);
}

TEST(SigmaMu, Examples) {
  Rng rng(35, 0);
  const State s = random_state(rng, 4);
  const CMatrix g = rng.gaussian_matrix(4);
  const CMatrix h = (g + g.adjoint()) / 2.0;
  EXPECT_EQ(sigma_mu(s, h), std::max(l0(s, h), l0(s, CMatrix(h.adjoint()))));
  EXPECT_NEAR(sigma_mu(s, h), l0(s, h), 1e-12 * (1 + l0(s, h)));
  EXPECT_NEAR(sigma_mu(State::from_density(diag({0.75, 0.25})), nilpotent()), std::sqrt(3.0) / 2.0, 1e-15);
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng r(36, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 5);
    const State st = random_state(r, d);
    const CMatrix a = r.gaussian_matrix(d);
    EXPECT_NEAR(sigma_mu(st, a), oracle::naive_sigma(st.rho(), a), 1e-11 * (1 + sigma_mu(st, a)));
  }
}

TEST(SigmaMu, StarInvarianceIsBitwise) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng(37, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 4);
    const State s = random_state(rng, d);
    const CMatrix a = rng.gaussian_matrix(d);
    EXPECT_EQ(sigma_mu(s, a), sigma_mu(s, CMatrix(a.adjoint())));
  }
}

TEST(SeminormProperties, TranslationHomogeneityTriangle) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(38, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 4);
    const State s = random_state(rng, d);
    const CMatrix a = rng.gaussian_matrix(d), b = rng.gaussian_matrix(d);
    const Complex c = rng.complex_gaussian() * 3.0;
    const double na = spectral_norm(a);
    EXPECT_NEAR(l0(s, CMatrix(a + c * identity(d))), l0(s, a), 1e-12 * (1 + na + std::abs(c)));
    EXPECT_NEAR(l0(s, CMatrix(c * a)), std::abs(c) * l0(s, a), 1e-10 * (1 + std::abs(c) * l0(s, a)));
    EXPECT_NEAR(sigma_mu(s, CMatrix(c * a)), std::abs(c) * sigma_mu(s, a), 1e-10 * (1 + std::abs(c) * sigma_mu(s, a)));
    EXPECT_LE(l0(s, CMatrix(a + b)), (l0(s, a) + l0(s, b)) * (1 + 1e-10) + 1e-10);
    EXPECT_LE(sigma_mu(s, CMatrix(a + b)), (sigma_mu(s, a) + sigma_mu(s, b)) * (1 + 1e-10) + 1e-10);
  }
}

TEST(SeminormProperties, LeibnizAndStrongLeibniz) {
  for (std::uint64_t t = 0; t < 300; ++t) {
    Rng rng(39, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 3);
    const State s = random_state(rng, d);
    const CMatrix a = rng.gaussian_matrix(d), b = rng.gaussian_matrix(d);
    const double na = spectral_norm(a), nb = spectral_norm(b);
    const double scale = (1 + na) * (1 + nb);
    EXPECT_GE(na * l0(s, b) + l0(s, a) * nb - l0(s, CMatrix(a * b)), -1e-10 * scale);
    EXPECT_GE(na * sigma_mu(s, b) + sigma_mu(s, a) * nb - sigma_mu(s, CMatrix(a * b)), -1e-10 * scale);
    const auto inv = linalg::matrix_inverse(a);
    if (inv.condition > 1e4) continue;
    const double ni = spectral_norm(inv.inverse);
    EXPECT_GE(ni * ni * sigma_mu(s, a) - sigma_mu(s, inv.inverse), -1e-9 * ni * ni * (1 + na));
  }
}

TEST(SeminormProperties, UnitaryL0Symmetry) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng(40, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 4);
    const State s = random_state(rng, d);
    const CMatrix u = random_unitary(rng, d);
    const double want = std::sqrt(std::max(0.0, 1 - std::norm(expectation(s, u))));
    EXPECT_NEAR(l0(s, u), want, 1e-12);
    EXPECT_NEAR(l0(s, CMatrix(u.adjoint())), want, 1e-12);
  }
}

TEST(GnsSpace, Invariants) {
  Rng rng(41, 0);
  const State s = random_state(rng, 3);
  const GnsSpace gns(s);
  const CMatrix a = rng.gaussian_matrix(3), b = rng.gaussian_matrix(3);
  const Complex ip = gns.embed(a).dot(gns.embed(b));
  const Complex want = oracle::naive_trace_product(s.rho(), CMatrix(a.adjoint() * b));
  EXPECT_NEAR(std::abs(ip - want), 0.0, 1e-12 * (1 + std::abs(want)));
  EXPECT_LE(spectral_norm(CMatrix(gns.left_rep(CMatrix(a * b)) - gns.left_rep(a) * gns.left_rep(b))), 1e-10 * (1 + spectral_norm(CMatrix(a * b))));
  const CMatrix& e = gns.dirac_E();
  EXPECT_LE(spectral_norm(CMatrix(e - e.adjoint())), 1e-12);
  EXPECT_LE(spectral_norm(CMatrix(e * e - e)), 1e-12);
  const CVector lhs = e * gns.embed(a);
  const CVector rhs = expectation(s, a) * gns.unit();
  EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1 + rhs.norm()));
  EXPECT_THROW(GnsSpace(State::from_density(diag({1.0, 0.0}), Faithfulness::allow_degenerate)), DomainError);
}

TEST(DiracNormProjection, Examples) {
  Rng rng(42, 0);
  const State s = random_state(rng, 3);
  const CMatrix a = rng.gaussian_matrix(3);
  EXPECT_NEAR(dirac_norm_projection(s, identity(3)), 0.0, 1e-14);
  const Complex m = expectation(s, a);
  EXPECT_NEAR(dirac_norm_projection(s, a), dirac_norm_projection(s, CMatrix(a - m * identity(3))), 1e-12);
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng r(43, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 5);
    const State st = random_state(r, d);
    const CMatrix x = r.gaussian_matrix(d);
    const double sigma = sigma_mu(st, x);
    EXPECT_NEAR(dirac_norm_projection(st, x), sigma, 1e-9 * (1 + sigma));
  }
}

TEST(SectionTwoDirac, Invariants) {
  Rng rng(44, 0);
  const SectionTwoDirac dirac{GnsSpace(random_state(rng, 3))};
  const CMatrix& dm = dirac.matrix();
  EXPECT_LE(spectral_norm(CMatrix(dm + dm.adjoint())), 1e-12);
  const Eigen::Index h = dm.rows() - 1;
  CMatrix proj = CMatrix::Zero(h + 1, h + 1);
  proj.topLeftCorner(h, h) = dirac.gns().dirac_E();
  proj(h, h) = 1.0;
  EXPECT_LE(spectral_norm(CMatrix(dm * dm + proj)), 1e-12);
}

TEST(DiracNormUnitization, Examples) {
  Rng rng(45, 0);
  const State s = random_state(rng, 2);
  EXPECT_NEAR(dirac_norm_unitization(s, {identity(2), 1.0}), 0.0, 1e-14);
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng r(46, t);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 4);
    const State st = random_state(r, d);
    const UnitizedElement x{r.gaussian_matrix(d), r.complex_gaussian()};
    CMatrix shifted = x.a - x.alpha * identity(d);
    const double want = std::max(oracle::naive_mu_norm(st.rho(), shifted), oracle::naive_mu_norm(st.rho(), CMatrix(shifted.adjoint())));
    EXPECT_NEAR(dirac_norm_unitization(st, x), want, 1e-9);
  }
}

TEST(DiracNormUnitization, ThreePointClosedForm) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng(47, t);
    const Complex a1 = rng.complex_gaussian(), a2 = rng.complex_gaussian();
    const double n = std::sqrt(std::norm(a1) + std::norm(a2));
    const double w1 = std::norm(a1 / n), w2 = 1.0 - w1;
    const double f1 = rng.gaussian(), f2 = rng.gaussian(), f3 = rng.gaussian();
    const State s = State::from_density(diag({w1, w2}));
    const double want = std::sqrt((f1 - f3) * (f1 - f3) * w1 + (f2 - f3) * (f2 - f3) * w2);
    EXPECT_NEAR(dirac_norm_unitization(s, {diag({f1, f2}), f3}), want, 1e-12 * (1 + want));
  }
}

TEST(QuotientOptimality, Examples) {
  Rng rng(48, 0);
  const State s = random_state(rng, 3);
  const CMatrix a = rng.gaussian_matrix(3);
  const std::vector<Complex> self{expectation(s, a)};
  EXPECT_EQ(quotient_optimality(s, a, self).gap, 0.0);
  const CMatrix h = (a + a.adjoint()) / 2.0;
  std::vector<Complex> grid;
  const double m = expectation(s, h).real();
  for (int k = -50; k <= 50; ++k) grid.emplace_back(m + 0.01 * k, 0.0);
  EXPECT_GE(quotient_optimality(s, h, grid).gap, -1e-14);
  std::vector<Complex> disk;
  const double radius = 2 * spectral_norm(a);
  for (int k = 0; k < 1000; ++k) {
    const double r = radius * std::sqrt(rng.uniform()), th = 2 * std::numbers::pi * rng.uniform();
    disk.push_back(std::polar(r, th));
  }
  EXPECT_GE(quotient_optimality(s, a, disk).gap, -1e-10);
}

TEST(IndependentCopies, Examples) {
  const auto [l0v, r0v] = independent_copies_identity(State::tracial(3), identity(3));
  EXPECT_NEAR(l0v, 0.0, 1e-15);
  EXPECT_NEAR(r0v, 0.0, 1e-15);
  const auto [l, r] = independent_copies_identity(State::tracial(2), nilpotent());
  EXPECT_NEAR(l, 1.0, 1e-15);
  EXPECT_NEAR(r, 1.0, 1e-15);
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng(49, t);
    const CMatrix a = rng.gaussian_matrix(3);
    const CMatrix x = oracle::naive_kron(identity(3), a) - oracle::naive_kron(a, identity(3));
    const CMatrix nu = oracle::naive_kron(identity(3) / 3.0, identity(3) / 3.0);
    const double direct = oracle::naive_trace_product(nu, CMatrix(x.adjoint() * x)).real();
    const auto [lhs, rhs] = independent_copies_identity(State::tracial(3), a);
    const double scale = 1 + std::pow(spectral_norm(a), 2);
    EXPECT_NEAR(lhs, direct, 1e-12 * scale);
    EXPECT_NEAR(lhs, rhs, 1e-12 * scale);
  }
  Rng rng(50, 0);
  EXPECT_THROW(independent_copies_identity(random_state(rng, 2), nilpotent()), DomainError);
}

TEST(IsDefiniteNull, Examples) {
  Rng rng(51, 0);
  const State s = random_state(rng, 3);
  EXPECT_TRUE(is_definite_null(s, CMatrix(5.0 * identity(3)), 1e-12));
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  EXPECT_FALSE(is_definite_null(State::tracial(2), x, 1e-8));
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng r(52, t);
    EXPECT_FALSE(is_definite_null(random_state(r, 3), r.gaussian_matrix(3), 1e-8));
  }
}

TEST(LipschitzFn, Constants) {
  const auto pl = LipschitzFn::piecewise_linear({0, 1, 3}, {0, 2, 1});
  EXPECT_EQ(pl.lip_constant(), 2.0);
  EXPECT_EQ(pl(Complex(0.5)), Complex(1.0));
  EXPECT_EQ(pl(Complex(-4.0)), Complex(0.0));
  EXPECT_EQ(pl(Complex(9.0)), Complex(1.0));
  EXPECT_EQ(LipschitzFn::reciprocal(0.5).lip_constant(), 4.0);
  EXPECT_EQ(LipschitzFn::conjugation().lip_constant(), 1.0);
  EXPECT_EQ(LipschitzFn::affine(Complex(3, 4), 1.0).lip_constant(), 5.0);
  EXPECT_THROW(LipschitzFn::piecewise_linear({0, 0}, {1, 2}), MalformedInput);
  EXPECT_THROW(LipschitzFn::reciprocal(0.5)(Complex(0.1)), DomainError);
}

TEST(MarkovMargin, Examples) {
  Rng rng(53, 0);
  const State s = random_state(rng, 3);
  const CMatrix u = random_unitary(rng, 3);
  CVector ev(3);
  ev << Complex(1, 2), Complex(-0.5, 0.3), Complex(2, -1);
  const CMatrix n = u * ev.asDiagonal() * u.adjoint();
  EXPECT_NEAR(markov_margin(s, n, LipschitzFn::affine(Complex(2, -1), 3.0)), 0.0, 1e-12 * (1 + sigma_mu(s, n)));
  const auto flat = LipschitzFn::piecewise_linear({-10, 10}, {1, 1});
  const CMatrix h = (n + n.adjoint()) / 2.0;
  EXPECT_NEAR(markov_margin(s, h, flat), flat.lip_constant() * sigma_mu(s, h), 1e-12);
  double mmin = INFINITY;
  for (Eigen::Index k = 0; k < 3; ++k) mmin = std::min(mmin, std::abs(ev(k)));
  EXPECT_GE(markov_margin(s, n, LipschitzFn::reciprocal(mmin)), -1e-9);
  EXPECT_THROW(markov_margin(s, n, LipschitzFn::piecewise_linear({0, 1}, {0, 1})), DomainError);
  CMatrix jordan(3, 3);
  jordan << 1, 1, 0, 0, 1, 0, 0, 0, 2;
  EXPECT_THROW(markov_margin(s, jordan, LipschitzFn::conjugation()), DomainError);
}
