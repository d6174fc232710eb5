#include "cpa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "cpa/bounds.hpp"
#include "cpa/error.hpp"
#include "cpa/model.hpp"
#include "cpa/pointprocess.hpp"
#include "cpa/verify.hpp"

namespace cpa {

using nlohmann::json;

namespace {

const char* kLatticeConvention =
    "convention: lattice values are full norms ||F - G_ell|| (twice the total variation distance)";
const char* kProcessConvention =
    "convention: point-process values bound d_TV(P^xi, P^zeta) (half the norm)";

ModelSpec load_model(const std::string& input) {
  if (input.empty()) throw ValidationError("--input is required");
  if (input == "paper-example") return paper_example_model();
  return parse_model(read_json_file(input));
}

Cell order_cell(int order) {
  if (order < 0) return std::monostate{};
  return static_cast<long long>(order);
}

Cell value_cell(const BoundReport& b) {
  if (!b.applicable) return std::monostate{};
  return b.value;
}

void check_common(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw ValidationError("--tol must be > 0");
}

}  // namespace

Table cmd_bounds(const RunConfig& cfg) {
  check_common(cfg);
  const int lmax = cfg.lmax < 0 ? 4 : cfg.lmax;
  const ModelSpec spec = load_model(cfg.input);
  const Coefficients c = coefficients(spec, cfg.parallel);

  Table t;
  t.title = "bounds";
  t.convention = kLatticeConvention;
  t.columns = {"bound", "formula", "kind", "ell", "applicable", "value", "printed", "condition"};
  t.meta = {{"n", spec.n()},          {"d", spec.d()},         {"lambda", c.lambda},
            {"alpha0", c.alpha0},     {"beta0", c.beta0},      {"alpha1", c.alpha1},
            {"beta1", c.beta1},       {"max_p", c.max_p},      {"sum_p2", c.sum_p2},
            {"theta", c.theta},       {"lmax", lmax}};

  auto add = [&t](const BoundReport& b) {
    t.rows.push_back({b.name, b.label, to_string(b.kind), order_cell(b.order), b.applicable,
                      value_cell(b), format_outward(b.applicable ? b.value : NAN, b.kind),
                      b.condition});
  };
  for (const BoundReport& b : upper_bounds(spec, lmax, cfg.parallel)) add(b);
  for (const BoundReport& b : lower_bounds(spec)) add(b);
  return t;
}

Table cmd_exact(const RunConfig& cfg) {
  check_common(cfg);
  ModelSpec spec = [&] {
    if (!cfg.input.empty()) return load_model(cfg.input);
    if (cfg.n < 1 || cfg.d < 1) throw ValidationError("--n and --d must be >= 1");
    std::mt19937_64 rng(cfg.seed);
    return random_model(cfg.n, cfg.d, rng);
  }();
  const int requested = cfg.lmax < 0 ? 2 : cfg.lmax;
  const int lmax = std::min(requested, spec.n());

  ExactOptions eo;
  eo.tol = cfg.tol;
  eo.parallel = cfg.parallel;
  const auto exact = exact_tv_orders(spec, lmax, eo);
  const auto ub = upper_bounds(spec, lmax, cfg.parallel);

  Table t;
  t.title = "exact";
  t.convention = kLatticeConvention;
  t.columns = {"ell", "distance", "error_bar", "best_bound", "best_value", "dominates", "trend"};
  t.meta = {{"n", spec.n()}, {"d", spec.d()}, {"lambda", spec.lambda()}, {"tol", cfg.tol},
            {"lmax", lmax}};
  if (cfg.input.empty()) t.meta["seed"] = cfg.seed;
  if (requested > lmax) t.meta["note"] = "lmax clamped to n";

  for (const ExactTvResult& e : exact) {
    const BoundReport* best = nullptr;
    for (const BoundReport& b : ub) {
      const int ell = b.order < 0 ? 0 : b.order;
      if (ell != e.ell || !b.applicable) continue;
      if (!best || b.value < best->value) best = &b;
    }
    std::string trend;
    if (e.ell > 0) {
      const double prev = exact[static_cast<std::size_t>(e.ell - 1)].distance;
      trend = e.distance < prev ? "decreasing" : "FLAG: not decreasing";
    }
    std::vector<Cell> row{static_cast<long long>(e.ell), e.distance, e.error_bar};
    if (best) {
      row.push_back(best->name);
      row.push_back(best->value);
      row.push_back(best->value >= e.distance - e.error_bar);
    } else {
      row.push_back(std::monostate{});
      row.push_back(std::monostate{});
      row.push_back(std::monostate{});
    }
    row.push_back(trend);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_pointprocess(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  const PointProcessSpec spec = parse_point_process(read_json_file(cfg.input));
  PpOptions po;
  po.resolution = cfg.resolution;
  po.parallel = cfg.parallel;
  const PpCoefficients c = pp_coefficients(spec, po);

  Table t;
  t.title = "pointprocess";
  t.convention = kProcessConvention;
  t.columns = {"bound", "formula", "applicable", "value", "condition"};
  t.meta = {{"n", spec.n()},
            {"lambda", c.lambda},
            {"alpha1", c.alpha1},
            {"beta1", c.beta1},
            {"sum_p2", c.sum_p2},
            {"phi", c.phi},
            {"ratio_integral", c.ratio_integral},
            {"resolution", c.resolution}};
  for (const BoundReport& b : pp_bounds(c)) {
    t.rows.push_back({b.name, b.label, b.applicable, value_cell(b), b.condition});
  }
  return t;
}

namespace {

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SuiteOptions so;
  so.seed = cfg.seed;
  so.instances = cfg.instances;
  so.parallel = cfg.parallel;
  if (so.instances < 1) throw ValidationError("--instances must be >= 1");
  const SuiteResult res = run_suite(cfg.suite, so);

  if (cfg.format == Format::json) {
    out << res.to_json().dump(2) << '\n';
  } else {
    Table t;
    t.title = "verify " + res.suite;
    t.columns = {"property", "checked", "failed"};
    t.meta = {{"seed", res.seed}, {"result", res.passed() ? "pass" : "FAIL"}};
    for (const auto& p : res.properties) {
      t.rows.push_back({p.name, static_cast<long long>(p.checked),
                        static_cast<long long>(p.failed)});
    }
    out << render(t, cfg.format);
    std::ostream& dump = cfg.format == Format::csv ? err : out;
    for (const auto& p : res.properties) {
      if (p.failed > 0) {
        dump << "first counterexample for " << p.name << ": " << p.first_counterexample.dump()
             << '\n';
      }
    }
  }
  return res.passed() ? kExitOk : kExitVerification;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compound Poisson approximation bounds for generalized multinomial sums"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string format = "text";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format: text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    sub->add_flag("--parallel", cfg.parallel,
                  "Parallel reductions (results may differ in the last bits)");
  };

  CLI::App* bounds = app.add_subcommand("bounds", "Evaluate every bound for a model");
  bounds->add_option("--input", cfg.input, "Model JSON file, or paper-example")->required();
  bounds->add_option("--lmax", cfg.lmax, "Largest expansion order (default 4)")
      ->check(CLI::NonNegativeNumber);
  bounds->add_option("--tol", cfg.tol, "Truncation tolerance");
  common(bounds);

  CLI::App* table1 = app.add_subcommand("table1", "Bounds for the n = d = 1000 example");
  common(table1);

  CLI::App* exact = app.add_subcommand("exact", "Exact ||F - G_ell|| next to the best bound");
  exact->add_option("--input", cfg.input, "Model JSON file (default: random instance)");
  exact->add_option("--n", cfg.n, "Trials of the random instance");
  exact->add_option("--d", cfg.d, "Categories of the random instance");
  exact->add_option("--seed", cfg.seed, "Seed of the random instance");
  exact->add_option("--lmax", cfg.lmax, "Largest expansion order (default 2)")
      ->check(CLI::NonNegativeNumber);
  exact->add_option("--tol", cfg.tol, "Truncation tolerance (default 1e-12)");
  common(exact);

  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", cfg.suite, "measure-algebra, newton, charlier, lemmas or bounds-vs-oracle")
      ->required();
  verify->add_option("--seed", cfg.seed, "Seed for random instances");
  verify->add_option("--instances", cfg.instances, "Random instances per property (default 200)");
  common(verify);

  CLI::App* pp = app.add_subcommand("pointprocess", "Point-process approximation bounds");
  pp->add_option("--input", cfg.input, "Point-process JSON file")->required();
  pp->add_option("--resolution", cfg.resolution, "Quadrature cells for exponential densities");
  common(pp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      for (CLI::App* sub : app.get_subcommands()) out << sub->help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    cfg.format = parse_format(format);
    if (bounds->parsed()) {
      cfg.subcommand = "bounds";
      out << render(cmd_bounds(cfg), cfg.format);
    } else if (table1->parsed()) {
      cfg.subcommand = "table1";
      cfg.input = "paper-example";
      cfg.lmax = 4;
      Table t = cmd_bounds(cfg);
      t.title = "table1";
      out << render(t, cfg.format);
    } else if (exact->parsed()) {
      cfg.subcommand = "exact";
      out << render(cmd_exact(cfg), cfg.format);
    } else if (verify->parsed()) {
      cfg.subcommand = "verify";
      return run_verify(cfg, out, err);
    } else if (pp->parsed()) {
      cfg.subcommand = "pointprocess";
      out << render(cmd_pointprocess(cfg), cfg.format);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const ConvergenceError& e) {
    err << "resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace cpa
