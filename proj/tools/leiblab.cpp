// leiblab: command-line front end for the property suites.
//
//   leiblab verify <suite> --dim D [--n N] --trials T --seed S [--tol E]
//                  [--state tracial|random|@file] [--out path] [--csv path]
//   leiblab audenaert --dim D --trials T --tol E
//   leiblab search l0-strong --dim D --trials T --seed S --out path
//   leiblab shift --window W [--expr "<operator expression>"]
//
// Exit status: 0 all checks met, 1 confirmed violation, 2 usage, config or
// input error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "leiblab/harness.hpp"

namespace {

using namespace leiblab;
using namespace leiblab::harness;

struct Options {
  SuiteConfig cfg;
  std::optional<double> tol;
  std::string state;
  std::string out;
  std::string csv;
  std::string suite_name;
  std::string search_target;
};

void add_run_options(CLI::App* app, Options& o, bool with_state) {
  app->add_option("--dim", o.cfg.dim, "matrix dimension (number of points for lipschitz-metric)")->required();
  app->add_option("--trials", o.cfg.trials, "number of trials")->required();
  app->add_option("--seed", o.cfg.seed, "64-bit seed");
  app->add_option("--tol", o.tol, "tolerance; a check passes when margin >= -tol * scale");
  if (with_state) app->add_option("--state", o.state, "tracial, random or @file with a density matrix");
  app->add_option("--out", o.out, "write the JSON report here instead of stdout");
  app->add_option("--csv", o.csv, "write per-trial rows trial,margin,scale,pass here");
  app->add_option("--threads", o.cfg.threads, "worker threads (does not change the report)");
}

void summarize(std::ostream& os, const MarginReport& r) {
  os << "suite " << r.config.at("suite").get<std::string>() << ": " << r.trials << " trials, "
     << r.violations.size() << " violations (" << r.confirmed() << " confirmed), " << r.errors.size()
     << " trial errors\n";
  for (const auto& c : r.checks) {
    os << "  " << std::left << std::setw(22) << c.name << std::right;
    if (c.count == 0) {
      os << "not evaluated\n";
      continue;
    }
    os << "min margin/scale " << std::setprecision(6) << c.min_relative << " at trial " << c.argmin_trial << ", "
       << c.failures << " below -tol\n";
  }
  os << "digest " << r.digest << '\n';
}

int emit(const Options& o, const MarginReport& r) {
  const Json j = report_to_json(r);
  if (o.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(o.out, j);
  }
  if (!o.csv.empty()) {
    std::ofstream f(o.csv);
    if (!f) throw ConfigError("cannot write " + o.csv);
    write_csv(f, r);
  }
  summarize(std::cerr, r);
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standard-deviation seminorm property suites"};
  app.require_subcommand(1);
  Options o;
  o.cfg.threads = default_threads();

  std::string suite_list;
  for (const auto& entry : suite_names()) suite_list += (suite_list.empty() ? "" : ", ") + entry.second;

  CLI::App* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", o.suite_name, suite_list)->required();
  verify->add_option("--n", o.cfg.n, "matricial level");
  verify->add_option("--window", o.cfg.window, "shift suite window");
  verify->add_option("--expr", o.cfg.expr, "shift suite operator expression");
  add_run_options(verify, o, true);

  CLI::App* audenaert = app.add_subcommand("audenaert", "certify the min-max identity for maximal deviation");
  add_run_options(audenaert, o, false);

  CLI::App* search = app.add_subcommand("search", "counterexample search");
  search->add_option("target", o.search_target, "l0-strong")->required();
  add_run_options(search, o, true);

  CLI::App* shift = app.add_subcommand("shift", "exact shift-operator identities");
  shift->add_option("--window", o.cfg.window, "indices |n| <= window are checked")->required();
  shift->add_option("--expr", o.cfg.expr, "operator expression, e.g. \"J*B*P + B*P*J\"");
  shift->add_option("--out", o.out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      o.cfg.suite = parse_suite(o.suite_name);
    } else if (audenaert->parsed()) {
      o.cfg.suite = Suite::audenaert;
    } else if (search->parsed()) {
      if (o.search_target != "l0-strong") throw ConfigError("search: unknown target '" + o.search_target + "'");
      o.cfg.suite = Suite::search_l0_strong;
    } else {
      o.cfg.suite = Suite::shift;
      o.cfg.trials = 1;
    }
    o.cfg.tol = o.tol.value_or(default_tol(o.cfg.suite));
    if (o.cfg.suite == Suite::tracial_copies) o.cfg.state_kind = StateKind::tracial;
    if (!o.state.empty()) set_state_arg(o.cfg, o.state);
    return emit(o, run_suite(o.cfg));
  } catch (const Error& e) {
    std::cerr << "leiblab: " << e.what() << '\n';
    return 2;
  }
}
