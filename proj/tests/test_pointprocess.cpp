#include <doctest.h>

#include <cmath>
#include <string>

#include "cpa/bounds.hpp"
#include "cpa/error.hpp"
#include "cpa/model.hpp"
#include "cpa/pointprocess.hpp"

using namespace cpa;

namespace {

const double kK = std::pow(2.0, 1.5);

const BoundReport& find(const std::vector<BoundReport>& bs, const std::string& name) {
  for (const BoundReport& b : bs) {
    if (b.name == name) return b;
  }
  FAIL("missing bound " << name);
  return bs.front();
}

// Composite Simpson over (0, log(1e10)/t_min) with `intervals` subintervals.
std::pair<double, double> simpson_oracle(const std::vector<double>& p, const std::vector<double>& t,
                                         int intervals) {
  double lam = 0;
  for (double x : p) lam += x;
  const double top = std::log(1e10) / std::min(t[0], t[1]);
  const double h = top / intervals;
  double a1 = 0, b1 = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double ia = 0, ib = 0;
    for (int i = 0; i <= intervals; ++i) {
      const double x = i * h;
      double mix = 0;
      for (std::size_t s = 0; s < p.size(); ++s) mix += p[s] * t[s] * std::exp(-t[s] * x);
      mix /= lam;
      const double hj = t[j] * std::exp(-t[j] * x);
      const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      ia += w * hj * std::min(hj / (kK * lam * mix), 2.0);
      ib += w * hj * std::min(hj / (lam * mix), 1.0);
    }
    const double g = g_scalar(2 * p[j]);
    a1 += g * p[j] * p[j] * ia * h / 3;
    b1 += p[j] * p[j] * ib * h / 3;
  }
  return {a1, b1};
}

PointProcessSpec tabulated_exponentials(const std::vector<double>& p, const std::vector<double>& t,
                                        bool mixture) {
  const int cells = 20000;
  const double top = std::log(1e10) / std::min(t[0], t[1]);
  Grid grid;
  for (int i = 0; i < cells; ++i) {
    grid.x.push_back((i + 0.5) * top / cells);
    grid.weights.push_back(top / cells);
  }
  double lam = 0;
  for (double x : p) lam += x;
  std::vector<std::vector<double>> dens(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    for (double x : grid.x) dens[j].push_back(t[j] * std::exp(-t[j] * x));
  }
  for (auto& d : dens) {
    double s = 0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * grid.weights[i];
    for (double& v : d) v /= s;
  }
  if (mixture) {
    std::vector<double> m(grid.x.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += p[j] * dens[j][i] / lam;
    }
    for (auto& d : dens) d = m;
  }
  return PointProcessSpec::tabulated(p, grid, dens);
}

}  // namespace

TEST_CASE("two-rate example against adaptive quadrature reference") {
  // scipy quad with kinks as breakpoints
  const double ref_alpha1 = 0.04090734531537645;
  const double ref_beta1 = 0.0199634068139964;
  const double ref_ratio = 1.3623925445;
  const auto spec = PointProcessSpec::exponential({0.1, 0.1}, {1.0, 5.0});
  const PpCoefficients c = pp_coefficients(spec);
  CHECK(c.alpha1 == doctest::Approx(ref_alpha1).epsilon(1e-6));
  CHECK(c.beta1 == doctest::Approx(ref_beta1).epsilon(1e-6));
  for (double r : c.ratio_integral) CHECK(r == doctest::Approx(ref_ratio).epsilon(1e-6));
}

TEST_CASE("two-rate example against a fine Simpson rule") {
  const std::vector<double> p{0.1, 0.1}, t{1.0, 5.0};
  const auto [a1, b1] = simpson_oracle(p, t, 1000000);
  const PpCoefficients c = pp_coefficients(PointProcessSpec::exponential(p, t));
  CHECK(c.alpha1 == doctest::Approx(a1).epsilon(1e-6));
  CHECK(c.beta1 == doctest::Approx(b1).epsilon(1e-6));
}

TEST_CASE("identical sources") {
  for (const std::vector<double>& p : {std::vector<double>{0.1, 0.2, 0.3}, {0.6, 0.7}}) {
    const std::vector<double> t(p.size(), 2.0);
    const auto spec = PointProcessSpec::exponential(p, t);
    const PpCoefficients c = pp_coefficients(spec);
    double s2 = 0, lam = 0;
    for (double x : p) {
      s2 += x * x;
      lam += x;
    }
    CHECK(c.beta1 == doctest::Approx(s2 * std::min(1.0 / lam, 1.0)).epsilon(1e-9));
    for (double phi : c.phi) CHECK(phi == doctest::Approx(1.0).epsilon(1e-12));
    const auto bs = pp_bounds(c);
    CHECK(find(bs, "pp_barbour").value == doctest::Approx(barbour_c(lam) / lam * s2).epsilon(1e-9));
  }
}

TEST_CASE("coefficient inequalities on an exponential family") {
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> family{
      {{0.1, 0.1}, {1.0, 5.0}},
      {{0.3, 0.05, 0.2}, {0.5, 1.0, 3.0}},
      {{0.9, 0.4}, {2.0, 2.5}},
      {{0.02, 0.02, 0.02, 0.5}, {1.0, 10.0, 0.3, 4.0}}};
  for (const auto& [p, t] : family) {
    const PpCoefficients c = pp_coefficients(PointProcessSpec::exponential(p, t));
    CHECK(c.beta1 <= c.sum_p2 * (1 + 1e-9));
    for (std::size_t j = 0; j < p.size(); ++j) {
      CHECK(c.ratio_integral[j] <= c.phi[j] * (1 + 1e-9));
      CHECK(c.phi[j] <= c.phi[j] * c.phi[j] + 1e-12);
    }
  }
}

TEST_CASE("grid refinement is stable") {
  const auto spec = PointProcessSpec::exponential({0.1, 0.1}, {1.0, 5.0});
  PpOptions coarse, fine;
  coarse.resolution = 100000;
  fine.resolution = 400000;
  const PpCoefficients a = pp_coefficients(spec, coarse);
  const PpCoefficients b = pp_coefficients(spec, fine);
  CHECK(std::abs(a.alpha1 - b.alpha1) <= 1e-5 * b.alpha1);
  CHECK(std::abs(a.beta1 - b.beta1) <= 1e-5 * b.beta1);
  const auto ba = pp_bounds(a), bb = pp_bounds(b);
  for (std::size_t i = 0; i < ba.size(); ++i) {
    CHECK(ba[i].name == bb[i].name);
    CHECK(std::abs(ba[i].value - bb[i].value) <= 1e-5 * bb[i].value);
  }
}

TEST_CASE("applicability gating") {
  const auto spec = PointProcessSpec::exponential({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
  const PpCoefficients c = pp_coefficients(spec);
  CHECK(c.alpha1 >= 1.0 / std::pow(2.0, 1.5));
  const auto bs = pp_bounds(c);
  const BoundReport& a = find(bs, "pp_alpha1");
  CHECK_FALSE(a.applicable);
  CHECK(std::isnan(a.value));
  CHECK(bs.back().name == "pp_alpha1");
  for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
    CHECK(bs[i].applicable);
    if (bs[i + 1].applicable) CHECK(bs[i].value <= bs[i + 1].value);
  }
  const auto small = pp_bounds(PointProcessSpec::exponential({0.1, 0.1}, {1.0, 5.0}));
  CHECK(find(small, "pp_alpha1").applicable);
  CHECK(small.size() == 4);
}

TEST_CASE("lattice cross-check: d_TV is half the norm") {
  const ModelSpec model({0.2, 0.1, 0.15}, {{0.5, 0.5, 0.0}, {0.1, 0.3, 0.6}, {0.2, 0.2, 0.6}});
  Grid grid{{0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}};
  std::vector<std::vector<double>> dens;
  for (int j = 0; j < model.n(); ++j) {
    const auto row = model.q_row(j);
    dens.emplace_back(row.begin(), row.end());
  }
  const auto spec = PointProcessSpec::tabulated({0.2, 0.1, 0.15}, grid, dens);
  const PpCoefficients pc = pp_coefficients(spec);
  const Coefficients lc = coefficients(model);
  CHECK(pc.alpha1 == doctest::Approx(lc.alpha1).epsilon(1e-14));
  CHECK(pc.beta1 == doctest::Approx(lc.beta1).epsilon(1e-14));
  const auto lattice = upper_bounds(model, 0);
  double lattice_alpha1 = 0;
  for (const auto& b : lattice) {
    if (b.name == "alpha1") lattice_alpha1 = b.value;
  }
  CHECK(2.0 * find(pp_bounds(pc), "pp_alpha1").value ==
        doctest::Approx(lattice_alpha1).epsilon(1e-14));
  CHECK(2.0 * find(pp_bounds(pc), "pp_le_cam").value ==
        doctest::Approx(2.0 * lc.sum_p2).epsilon(1e-14));
}

TEST_CASE("mixture replacement is not monotone") {
  // Counterexamples confirmed with scipy quadrature: the mixture raises beta~1
  // for p = (0.1, 0.1), t = (1, 5) and alpha~1 for p = (0.05, 0.05, 0.05), t = (1, 2, 4).
  auto mixed_closed_form = [](const std::vector<double>& p) {
    double lam = 0, a = 0, b = 0;
    for (double x : p) lam += x;
    for (double x : p) {
      a += g_scalar(2 * x) * x * x * std::min(1.0 / (kK * lam), 2.0);
      b += x * x * std::min(1.0 / lam, 1.0);
    }
    return std::pair{a, b};
  };
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> family{
      {{0.1, 0.1}, {1.0, 5.0}}, {{0.9, 0.8}, {1.0, 3.0}}, {{0.05, 0.05, 0.05}, {1.0, 2.0, 4.0}}};
  std::vector<PpCoefficients> orig, mixed;
  for (const auto& [p, t] : family) {
    orig.push_back(pp_coefficients(tabulated_exponentials(p, t, false)));
    mixed.push_back(pp_coefficients(tabulated_exponentials(p, t, true)));
    const auto [a, b] = mixed_closed_form(p);
    CHECK(mixed.back().alpha1 == doctest::Approx(a).epsilon(1e-9));
    CHECK(mixed.back().beta1 == doctest::Approx(b).epsilon(1e-9));
  }
  CHECK(mixed[0].beta1 > orig[0].beta1);
  CHECK(mixed[1].beta1 < orig[1].beta1);
  CHECK(mixed[1].alpha1 < orig[1].alpha1);
  CHECK(mixed[2].alpha1 > orig[2].alpha1);
}

TEST_CASE("point-process validation") {
  CHECK_THROWS_AS(PointProcessSpec::exponential({0.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(PointProcessSpec::exponential({0.5}, {-1.0}), ValidationError);
  CHECK_THROWS_AS(PointProcessSpec::exponential({0.5, 0.5}, {1.0}), ValidationError);
  Grid grid{{0.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(PointProcessSpec::tabulated({0.5}, grid, {{0.5, 0.6}}), ValidationError);
  CHECK_NOTHROW(PointProcessSpec::tabulated({0.5}, grid, {{0.5, 0.5}}));
}
