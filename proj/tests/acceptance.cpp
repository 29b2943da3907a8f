// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--quick]
//
// --quick divides every trial count by 10 (smoke run, not the acceptance scale).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "leiblab/harness.hpp"

namespace {

using namespace leiblab;
using namespace leiblab::harness;
using Clock = std::chrono::steady_clock;

long g_divisor = 1;
int g_failed = 0;

long scaled(long trials) { return std::max(1L, trials / g_divisor); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void verdict(const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++g_failed;
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

SuiteConfig config(Suite suite, long dim, long n, long trials, std::uint64_t seed, double tol) {
  SuiteConfig c;
  c.suite = suite;
  c.dim = dim;
  c.n = n;
  c.trials = scaled(trials);
  c.seed = seed;
  c.tol = tol;
  c.threads = default_threads();
  if (suite == Suite::tracial_copies) c.state_kind = StateKind::tracial;
  return c;
}

// Every check of every trial met, no trial errors.
struct Tally {
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  std::string worst_check;
  std::uint64_t trials = 0;
  std::size_t failures = 0;
  std::size_t errors = 0;
  std::size_t confirmed = 0;

  void add(const MarginReport& r, const std::string& label) {
    trials += r.trials;
    errors += r.errors.size();
    confirmed += r.confirmed();
    if (!r.errors.empty()) ok = false;
    for (const auto& c : r.checks) {
      failures += c.failures;
      if (c.failures > 0) ok = false;
      if (c.count > 0 && c.min_relative < worst) {
        worst = c.min_relative;
        worst_check = label + "/" + c.name;
      }
    }
  }

  std::string detail() const {
    return std::to_string(trials) + " trials, " + std::to_string(failures) + " failing checks, " +
           std::to_string(errors) + " errors, min margin/scale " + fmt(worst) + " (" + worst_check + ")";
  }
};

void dirac_realization() {
  const auto start = Clock::now();
  double worst = 0;
  const long count = scaled(500);
  for (long t = 0; t < count; ++t) {
    Rng rng(101, static_cast<std::uint64_t>(t));
    const Eigen::Index d = 2 + t % 5;
    const auto s = random_faithful_state(rng, d);
    const CMatrix a = rng.gaussian_matrix(d);
    const double sigma = ncprob::sigma_mu(s, a);
    worst = std::max(worst, std::abs(ncprob::dirac_norm_projection(s, a) - sigma) / (1 + sigma));
  }
  const double secs = seconds_since(start);
  verdict("dirac-realization", worst <= 1e-9 && secs < 60,
          std::to_string(count) + " pairs, d 2..6, max |commutator - sigma|/(1+sigma) " + fmt(worst) + ", " +
              fmt(secs) + " s");
}

void unitization_realization() {
  double worst = 0;
  const long count = scaled(500);
  for (long t = 0; t < count; ++t) {
    Rng rng(102, static_cast<std::uint64_t>(t));
    const Eigen::Index d = 2 + t % 5;
    const auto s = random_faithful_state(rng, d);
    const ncprob::UnitizedElement x{rng.gaussian_matrix(d), rng.complex_gaussian()};
    worst = std::max(worst, std::abs(ncprob::dirac_norm_unitization(s, x) - ncprob::unitization_formula(s, x)));
  }
  // Three points: D has alpha_1, alpha_2 in its last column and -alpha in its
  // last row; f acts diagonally.
  double worst_closed = 0;
  const long closed = scaled(100);
  for (long t = 0; t < closed; ++t) {
    Rng rng(103, static_cast<std::uint64_t>(t));
    const double a1 = rng.gaussian(), a2 = rng.gaussian();
    const double f1 = rng.gaussian(), f2 = rng.gaussian(), f3 = rng.gaussian();
    CMatrix dm = CMatrix::Zero(3, 3);
    dm(0, 2) = a1;
    dm(1, 2) = a2;
    dm(2, 0) = -a1;
    dm(2, 1) = -a2;
    CMatrix f = CMatrix::Zero(3, 3);
    f(0, 0) = f1;
    f(1, 1) = f2;
    f(2, 2) = f3;
    const double closed_form = std::sqrt((f1 - f3) * (f1 - f3) * a1 * a1 + (f2 - f3) * (f2 - f3) * a2 * a2);
    const double direct = linalg::spectral_norm(CMatrix(dm * f - f * dm));
    // Same number from the two-point state with weights alpha_i^2 / |alpha|^2.
    const double norm = std::hypot(a1, a2);
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = a1 * a1 / (norm * norm);
    rho(1, 1) = 1.0 - rho(0, 0).real();
    CMatrix g = CMatrix::Zero(2, 2);
    g(0, 0) = f1;
    g(1, 1) = f2;
    const double via_state =
        norm * ncprob::dirac_norm_unitization(ncprob::State::from_density(rho), {g, Complex(f3)});
    worst_closed = std::max({worst_closed, std::abs(direct - closed_form), std::abs(via_state - closed_form)});
  }
  verdict("unitization-realization", worst <= 1e-9 && worst_closed <= 1e-12,
          std::to_string(count) + " pairs, max |commutator - formula| " + fmt(worst) + "; three-point form on " +
              std::to_string(closed) + " cases, max error " + fmt(worst_closed));
}

void suite_group(const std::string& name, const std::vector<std::pair<std::string, SuiteConfig>>& runs,
                 double max_seconds = 0) {
  const auto start = Clock::now();
  Tally tally;
  for (const auto& [label, cfg] : runs) tally.add(run_suite(cfg), label);
  const double secs = seconds_since(start);
  const bool in_time = max_seconds <= 0 || secs < max_seconds;
  verdict(name, tally.ok && in_time, tally.detail() + ", " + fmt(secs) + " s");
}

void shift_exactness() {
  const auto start = Clock::now();
  SuiteConfig cfg = config(Suite::shift, 1, 1, 1, 0, default_tol(Suite::shift));
  cfg.window = 64;
  const MarginReport r = run_suite(cfg);
  Tally tally;
  tally.add(r, "shift");

  using namespace shiftlab;
  const ShiftExampleOps ops;
  const FinVec e0 = FinVec::basis(0);
  bool identities = (ops.R.adjoint() * ops.R)(e0) == GaussRational(2) * e0;
  identities &= ops.R.adjoint()(e0).is_zero();
  const ShiftOp vtw = ops.V * ops.T * ops.W;
  for (Index n = -64; n <= 64; ++n) identities &= ops.S.adjoint()(FinVec::basis(n)) == vtw(FinVec::basis(n));
  // L(U) = 0 and L(U^-1) = 1: the witness attains 1 and U^-1 is an isometry.
  const GammaWitness u = gamma_seminorm_witness(ShiftOp::B(), 64);
  const GammaWitness uinv = gamma_seminorm_witness(ShiftOp::Binv(), 64);
  identities &= u.vanishing && !uinv.vanishing;
  identities &= uinv.lower_bound_exact() == std::optional<Rational>(Rational(1));
  for (Index n = -64; n <= 64; ++n) identities &= ShiftOp::Binv()(FinVec::basis(n)).norm_squared() == 1;
  const double secs = seconds_since(start);
  verdict("shift-exactness", tally.ok && identities && secs < 10,
          std::string("window 64, ") + std::to_string(tally.failures) + " failing identity groups, named identities " +
              (identities ? "exact" : "NOT reproduced") + ", " + fmt(secs) + " s");
}

void open_question_search() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (long d : {2L, 3L, 4L}) {
    const MarginReport r = run_suite(config(Suite::search_l0_strong, d, 1, 100000, 110 + d, 1e-9));
    const auto& c = r.checks.front();
    const bool consistent = r.errors.empty() && c.failures == 0;
    const bool counterexample = r.confirmed() > 0;
    ok &= consistent || counterexample;
    detail += "d=" + std::to_string(d) + " " + std::to_string(r.trials) + " trials min " + fmt(c.min_relative) +
              (counterexample ? " CONFIRMED COUNTEREXAMPLE" : "") + "; ";
  }
  verdict("strong-leibniz-search", ok, detail + fmt(seconds_since(start)) + " s");
}

void determinism() {
  bool ok = true;
  std::string detail;
  for (auto cfg : {config(Suite::leibniz, 3, 2, 1000, 120, 1e-10), config(Suite::markov, 3, 1, 220, 121, 1e-9),
                   config(Suite::search_l0_strong, 3, 1, 1000, 122, 1e-9)}) {
    const std::string first = run_suite(cfg).digest;
    cfg.threads = cfg.threads == 1 ? 2 : 1;
    const std::string second = run_suite(cfg).digest;
    ok &= first == second && first.size() == 64;
    detail += to_string(cfg.suite) + " " + first.substr(0, 12) + (first == second ? " == " : " != ") +
              second.substr(0, 12) + "; ";
  }
  verdict("determinism", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) g_divisor = 10;
    else {
      std::cerr << "usage: acceptance [--quick]\n";
      return 2;
    }
  }
  const auto start = Clock::now();
  try {
    dirac_realization();
    unitization_realization();
    suite_group("leibniz", {{"d4n2", config(Suite::leibniz, 4, 2, 10000, 103, 1e-10)},
                            {"d2n4", config(Suite::leibniz, 2, 4, 10000, 104, 1e-10)}});
    suite_group("strong-leibniz", {{"strong", config(Suite::strong, 4, 2, 10000, 105, 1e-9)},
                                   {"matricial", config(Suite::matricial, 4, 2, 10000, 106, 1e-9)}});
    suite_group("tracial-copies", {{"d2", config(Suite::tracial_copies, 2, 1, 1000, 107, 1e-12)},
                                   {"d3", config(Suite::tracial_copies, 3, 1, 1000, 108, 1e-12)}});
    {
      std::vector<std::pair<std::string, SuiteConfig>> runs;
      for (long d = 2; d <= 6; ++d)
        runs.push_back({"d" + std::to_string(d), config(Suite::audenaert, d, 1, 40, 109 + d, 1e-6)});
      suite_group("duality", runs, 300);
    }
    suite_group("markov", {{"d3", config(Suite::markov, 3, 1, 11000, 115, 1e-9)}});
    suite_group("quotient", {{"d4n2", config(Suite::quotient, 4, 2, 1000, 116, 1e-10)}});
    shift_exactness();
    open_question_search();
    determinism();
  } catch (const std::exception& e) {
    std::cout << "FAIL aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " FAILED") << " in "
            << fmt(seconds_since(start)) << " s" << std::endl;
  return g_failed == 0 ? 0 : 1;
}
