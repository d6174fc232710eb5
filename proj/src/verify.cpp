#include "cpa/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "cpa/bounds.hpp"
#include "cpa/error.hpp"
#include "cpa/io.hpp"
#include "cpa/model.hpp"
#include "cpa/poisson.hpp"
#include "cpa/smoothness.hpp"

namespace cpa {

using nlohmann::json;

void PropertyResult::record(bool ok, const json& witness) {
  ++checked;
  if (ok) return;
  if (failed == 0) first_counterexample = witness;
  ++failed;
}

bool SuiteResult::passed() const {
  for (const auto& p : properties) {
    if (p.failed > 0) return false;
  }
  return true;
}

PropertyResult& SuiteResult::property(const std::string& name) {
  for (auto& p : properties) {
    if (p.name == name) return p;
  }
  properties.push_back(PropertyResult{name, 0, 0, nullptr});
  return properties.back();
}

json SuiteResult::to_json() const {
  json props = json::array();
  for (const auto& p : properties) {
    props.push_back({{"name", p.name},
                     {"checked", p.checked},
                     {"failed", p.failed},
                     {"first_counterexample", p.first_counterexample}});
  }
  return {{"suite", suite}, {"seed", seed}, {"passed", passed()}, {"properties", props}};
}

json measure_to_json(const SignedMeasure& v) {
  json atoms = json::array();
  for (const Atom& a : v.atoms()) {
    const LatticePoint x = v.point(a.key);
    json row(std::vector<std::uint32_t>(x.coords().begin(), x.coords().end()));
    row.push_back(a.weight);
    atoms.push_back(std::move(row));
  }
  return {{"dim", v.dim()}, {"atoms", atoms}, {"budget", v.trunc_budget()}};
}

SignedMeasure elementary_symmetric_bruteforce(const std::vector<SignedMeasure>& v, int k) {
  const int n = static_cast<int>(v.size());
  if (n > 20) throw ResourceError("subset enumeration limited to n <= 20");
  const int dim = v.empty() ? 1 : v.front().dim();
  SignedMeasure sum = zero_measure(dim);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    SignedMeasure prod = dirac(LatticePoint::origin(dim));
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) prod = convolve(prod, v[static_cast<std::size_t>(j)]);
    }
    sum = sum + prod;
  }
  return sum;
}

namespace {

constexpr double kRound = 1e-12;

SignedMeasure random_measure(int dim, std::mt19937_64& rng, double scale,
                             std::uint32_t max_coord = 4) {
  std::uniform_int_distribution<int> atoms(1, 6);
  std::uniform_int_distribution<std::uint32_t> coord(0, max_coord);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::vector<std::pair<LatticePoint, double>> pts;
  const int m = atoms(rng);
  for (int i = 0; i < m; ++i) {
    std::vector<std::uint32_t> x(static_cast<std::size_t>(dim));
    for (auto& c : x) c = coord(rng);
    const LatticePoint p(x);
    bool dup = false;
    for (const auto& q : pts) dup = dup || q.first == p;
    if (!dup) pts.emplace_back(p, w(rng));
  }
  SignedMeasure v = SignedMeasure::from_points(dim, pts);
  const double norm = tv_norm(v);
  return norm > 0.0 ? (scale / norm) * v : v;
}

double dist(const SignedMeasure& a, const SignedMeasure& b) { return tv_norm(a - b); }

}  // namespace

SuiteResult verify_measure_algebra(const SuiteOptions& opts) {
  SuiteResult res{"measure-algebra", opts.seed, {}};
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> dims(1, 3);
  std::uniform_real_distribution<double> scale(0.1, 2.0);
  for (int it = 0; it < opts.instances; ++it) {
    const int dim = dims(rng);
    const SignedMeasure u = random_measure(dim, rng, scale(rng));
    const SignedMeasure v = random_measure(dim, rng, scale(rng));
    const SignedMeasure w = random_measure(dim, rng, scale(rng));
    const double nu = tv_norm(u), nv = tv_norm(v), nw = tv_norm(w);
    auto witness = [&] {
      return json{{"U", measure_to_json(u)}, {"V", measure_to_json(v)}, {"W", measure_to_json(w)}};
    };

    const SignedMeasure vw = convolve(v, w);
    res.property("commutative").record(dist(vw, convolve(w, v)) <= kRound * nv * nw, witness());
    res.property("associative").record(
        dist(convolve(convolve(u, v), w), convolve(u, vw)) <= kRound * nu * nv * nw, witness());
    res.property("distributive").record(
        dist(convolve(u, v + w), convolve(u, v) + convolve(u, w)) <= kRound * nu * (nv + nw),
        witness());
    res.property("norm_submultiplicative").record(tv_norm(vw) <= nv * nw * (1.0 + kRound),
                                                  witness());
    res.property("mass_multiplicative")
        .record(std::abs(total_mass(vw) - total_mass(v) * total_mass(w)) <= kRound * nv * nw,
                witness());

    // The exponential fills a box of side ~ max_coord * order, so keep it small.
    const int edim = std::min(dim, 2);
    const SignedMeasure a = random_measure(edim, rng, 0.5 * scale(rng), 2);
    const SignedMeasure b = random_measure(edim, rng, 0.5 * scale(rng), 2);
    auto ewitness = [&] { return json{{"V", measure_to_json(a)}, {"W", measure_to_json(b)}}; };
    const SignedMeasure ev = exp_measure(a, 1e-14);
    const SignedMeasure emv = exp_measure(-1.0 * a, 1e-14);
    const SignedMeasure prod = convolve(ev, emv);
    const SignedMeasure d0 = dirac(LatticePoint::origin(edim));
    res.property("exp_inverse")
        .record(dist(prod, d0) <= prod.trunc_budget() + kRound * tv_norm(ev) * tv_norm(emv),
                ewitness());
    const SignedMeasure lhs = exp_measure(a + b, 1e-14);
    const SignedMeasure rhs = convolve(ev, exp_measure(b, 1e-14));
    res.property("exp_additive")
        .record(dist(lhs, rhs) <= lhs.trunc_budget() + rhs.trunc_budget() +
                                      kRound * tv_norm(lhs),
                ewitness());
    res.property("exp_mass").record(
        std::abs(total_mass(ev) - std::exp(total_mass(a))) <=
            ev.trunc_budget() + kRound * tv_norm(ev),
        ewitness());
  }
  return res;
}

SuiteResult verify_newton(const SuiteOptions& opts) {
  SuiteResult res{"newton", opts.seed, {}};
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> ns(1, 6);
  std::uniform_int_distribution<int> ds(1, 2);
  std::uniform_real_distribution<double> pmax(0.05, 0.9);
  ExactOptions eo;
  eo.parallel = opts.parallel;

  for (int it = 0; it < opts.instances; ++it) {
    const int n = ns(rng);
    const int d = ds(rng);
    const ModelSpec spec = random_model(n, d, rng, pmax(rng));
    const json witness = model_to_json(spec);

    const Expansion ex(spec, n, eo);
    std::vector<SignedMeasure> vs;
    for (int j = 0; j < n; ++j) vs.push_back(ex.V(j));
    for (int k = 1; k <= n; ++k) {
      const SignedMeasure brute = elementary_symmetric_bruteforce(vs, k);
      const SignedMeasure& mk = ex.M(k);
      const double scale = std::max(tv_norm(brute), 1e-300);
      const double err = dist(mk, brute);
      const bool ok = err <= 1e-10 * scale + mk.trunc_budget();
      json w = witness;
      w["k"] = k;
      w["difference"] = err;
      res.property("newton_vs_subsets").record(ok, w);
    }

    const SignedMeasure f = build_F(spec, eo);
    for (int ell = 0; ell <= n; ++ell) {
      const SignedMeasure g = build_G_ell(spec, ell, eo);
      json w = witness;
      w["ell"] = ell;
      const double mass_err = std::abs(total_mass(g) - 1.0);
      w["mass_error"] = mass_err;
      res.property("mass_of_G_ell").record(mass_err <= g.trunc_budget() + kRound, w);
      if (ell == n && n <= 4) {
        const double err = dist(g, f);
        w["difference"] = err;
        res.property("G_n_equals_F")
            .record(err <= g.trunc_budget() + f.trunc_budget() + kRound, w);
      }
    }
  }
  return res;
}

SuiteResult verify_charlier(const SuiteOptions& opts) {
  SuiteResult res{"charlier", opts.seed, {}};
  for (double t : {0.5, 1.0, 2.0, 7.0}) {
    for (int i = 0; i <= 5; ++i) {
      for (int j = 0; j <= 5; ++j) {
        const OrthogonalityReport r = verify_orthogonality(i, j, t);
        res.property("orthogonality")
            .record(r.pass, {{"i", i}, {"j", j}, {"t", t}, {"M", r.M}, {"sum", r.sum},
                             {"expected", r.expected}, {"tail", r.tail},
                             {"rounding", r.rounding}});
      }
    }
  }
  for (double t : {0.5, 2.0, 7.0}) {
    for (int j = 0; j <= 5; ++j) {
      for (long m = 0; m <= 30; ++m) {
        const double lhs = poisson_difference(j, m, t);
        const double rhs = std::pow(t, -j) * poisson_pmf(m, t) * charlier(j, static_cast<double>(m), t);
        double scale = 0.0;
        double binom = 1.0;
        for (int i = 0; i <= j; ++i) {
          scale += binom * poisson_pmf(m - i, t);
          binom = binom * (j - i) / (i + 1);
        }
        const bool ok = std::abs(lhs - rhs) <= 1e-12 * scale + 1e-300;
        res.property("difference_identity")
            .record(ok, {{"j", j}, {"m", m}, {"t", t}, {"difference", lhs}, {"charlier_form", rhs}});
      }
    }
  }
  return res;
}

SuiteResult verify_lemmas(const SuiteOptions& opts) {
  SuiteResult res{"lemmas", opts.seed, {}};
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> ks(1, 4);
  std::uniform_int_distribution<int> ds(1, 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const FactorialCheck fc = check_factorial_inequality(12);
  auto& fprop = res.property("factorial_inequality");
  fprop.checked = fc.cases;
  fprop.failed = fc.violations;
  if (fc.violations > 0) {
    fprop.first_counterexample = {{"k", fc.first_k}, {"m1", fc.first_m1}, {"m2", fc.first_m2}};
  }

  auto inst_json = [](const SmoothnessInstance& s) {
    json c = json::array();
    for (int j = 0; j < s.k(); ++j) {
      json row = json::array();
      for (int r = 0; r < s.d(); ++r) row.push_back(s.coeff(j, r));
      c.push_back(row);
    }
    return json{{"coeff", c}, {"lambda", s.lambdas()}};
  };

  for (int it = 0; it < opts.instances; ++it) {
    const SmoothnessInstance s = random_smoothness_instance(ks(rng), ds(rng), rng, false);
    const NormValue exact = norm_product_exact(s, false);
    const double mid = charlier_middle(s);
    const double right = charlier_right(s);
    json w = inst_json(s);
    w["exact"] = exact.norm;
    w["error_bar"] = exact.error_bar;
    w["middle"] = mid;
    w["right"] = right;
    res.property("charlier_exact_le_middle")
        .record(exact.norm - exact.error_bar <= mid * (1.0 + kRound), w);
    res.property("charlier_middle_le_right").record(mid <= right * (1.0 + kRound), w);
    if (s.k() == 1) {
      double sq = 0.0;
      for (int r = 0; r < s.d(); ++r) sq += s.coeff(0, r) * s.coeff(0, r) / s.lambda(r);
      res.property("single_factor_bound")
          .record(exact.norm - exact.error_bar <= std::sqrt(sq) * (1.0 + kRound), w);
    }
  }

  for (int it = 0; it < opts.instances; ++it) {
    const SmoothnessInstance s = random_smoothness_instance(ks(rng), ds(rng), rng, true);
    const NormValue exact = norm_product_exact(s, true);
    const double cor = squares_bound(s);
    SplitParams sp;
    for (int j = 0; j < s.k(); ++j) {
      sp.u.push_back(0.5 * unif(rng));
      sp.v.push_back(0.05 + 2.0 * unif(rng));
      sp.w.push_back(0.5 + 6.0 * unif(rng));
    }
    const double split = split_bound(s, sp);
    json w = inst_json(s);
    w["exact"] = exact.norm;
    w["error_bar"] = exact.error_bar;
    w["squares_bound"] = cor;
    w["split_bound"] = split;
    w["split"] = {{"u", sp.u}, {"v", sp.v}, {"w", sp.w}};
    res.property("squares_bound").record(exact.norm - exact.error_bar <= cor * (1.0 + kRound), w);
    res.property("split_bound").record(exact.norm - exact.error_bar <= split * (1.0 + kRound), w);
  }

  const ExpansionConstants ec = expansion_constants();
  res.property("expansion_constants")
      .record(ec.C <= 2.473 && ec.w0 <= 1.256 && ec.C * ec.w0 <= 3.11,
              {{"C", ec.C}, {"w0", ec.w0}});
  for (int it = 0; it < opts.instances; ++it) {
    const SingleTrial s = random_single_trial(ds(rng), rng);
    const NormValue exact = expansion_norm_exact(s);
    const double b = expansion_bound(s, ec);
    const double f = expansion_bound_final(s);
    json w = {{"p", s.p}, {"lambda", s.lambda}, {"exact", exact.norm},
              {"error_bar", exact.error_bar}, {"bound", b}, {"bound_final", f}};
    res.property("expansion_bound").record(exact.norm - exact.error_bar <= b * (1.0 + kRound), w);
    res.property("expansion_bound_final")
        .record(exact.norm - exact.error_bar <= f * (1.0 + kRound), w);
  }
  return res;
}

SuiteResult verify_bounds_vs_oracle(const SuiteOptions& opts) {
  SuiteResult res{"bounds-vs-oracle", opts.seed, {}};
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> ns(1, 8);
  std::uniform_int_distribution<int> ds(1, 3);
  const double pmax_choices[] = {0.05, 0.2, 0.5, 0.9};
  std::uniform_int_distribution<int> pick(0, 3);
  ExactOptions eo;
  eo.parallel = opts.parallel;

  for (int it = 0; it < opts.instances; ++it) {
    const ModelSpec spec = random_model(ns(rng), ds(rng), rng, pmax_choices[pick(rng)]);
    const auto exact = exact_tv_orders(spec, 2, eo);
    const auto ub = upper_bounds(spec, 2, opts.parallel);
    const auto lb = lower_bounds(spec);
    for (const BoundReport& b : ub) {
      if (!b.applicable) continue;
      const int ell = b.order < 0 ? 0 : b.order;
      if (ell >= static_cast<int>(exact.size())) continue;
      const ExactTvResult& e = exact[static_cast<std::size_t>(ell)];
      const bool ok = b.value >= e.distance - e.error_bar - kRound;
      json w = model_to_json(spec);
      w["bound"] = b.name;
      w["ell"] = ell;
      w["value"] = b.value;
      w["exact"] = e.distance;
      w["error_bar"] = e.error_bar;
      res.property("upper_" + b.name).record(ok, w);
    }
    for (const BoundReport& b : lb) {
      const ExactTvResult& e = exact.front();
      json w = model_to_json(spec);
      w["bound"] = b.name;
      w["value"] = b.value;
      w["exact"] = e.distance;
      w["error_bar"] = e.error_bar;
      res.property("lower_" + b.name).record(b.value <= e.distance + e.error_bar + kRound, w);
    }
  }
  return res;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"measure-algebra", "newton", "charlier", "lemmas",
                                              "bounds-vs-oracle"};
  return names;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
  if (name == "measure-algebra") return verify_measure_algebra(opts);
  if (name == "newton") return verify_newton(opts);
  if (name == "charlier") return verify_charlier(opts);
  if (name == "lemmas") return verify_lemmas(opts);
  if (name == "bounds-vs-oracle") return verify_bounds_vs_oracle(opts);
  throw ValidationError("unknown suite \"" + name +
                        "\" (measure-algebra, newton, charlier, lemmas, bounds-vs-oracle)");
}

}  // namespace cpa
