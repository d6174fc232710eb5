#include <doctest.h>

#include <cmath>
#include <random>

#include "cpa/error.hpp"
#include "cpa/measure.hpp"
#include "cpa/poisson.hpp"

using namespace cpa;

namespace {

SignedMeasure random_measure(int dim, std::mt19937_64& rng, int atoms, std::uint32_t max_coord) {
  std::uniform_int_distribution<std::uint32_t> coord(0, max_coord);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::vector<std::pair<LatticePoint, double>> pts;
  for (int a = 0; a < atoms; ++a) {
    std::vector<std::uint32_t> c(static_cast<std::size_t>(dim));
    for (auto& x : c) x = coord(rng);
    pts.emplace_back(LatticePoint(c), w(rng));
  }
  return SignedMeasure::from_points(dim, pts);
}

double diff_norm(const SignedMeasure& a, const SignedMeasure& b) { return tv_norm(a - b); }

}  // namespace

TEST_CASE("dirac at the origin is the convolution identity") {
  std::mt19937_64 rng(3);
  const SignedMeasure v = random_measure(2, rng, 6, 4);
  const SignedMeasure e = dirac(LatticePoint::origin(2));
  CHECK(diff_norm(convolve(v, e), v) == 0.0);
  CHECK(diff_norm(convolve(e, v), v) == 0.0);
}

TEST_CASE("binomial square") {
  const SignedMeasure d0 = dirac(LatticePoint{0});
  const SignedMeasure d1 = dirac(LatticePoint{1});
  const SignedMeasure b = d0 + 0.1 * (d1 - d0);
  const SignedMeasure sq = convolve(b, b);
  CHECK(sq.size() == 3);
  CHECK(sq.weight(LatticePoint{0}) == doctest::Approx(0.81).epsilon(1e-15));
  CHECK(sq.weight(LatticePoint{1}) == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(sq.weight(LatticePoint{2}) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(total_mass(sq) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("linear_combine weights and budgets") {
  const SignedMeasure a = SignedMeasure::from_points(1, {{LatticePoint{0}, 1.0}}, 0.01);
  const SignedMeasure b = SignedMeasure::from_points(1, {{LatticePoint{1}, 2.0}}, 0.02);
  const SignedMeasure c = linear_combine({{2.0, a}, {-3.0, b}});
  CHECK(c.weight(LatticePoint{0}) == 2.0);
  CHECK(c.weight(LatticePoint{1}) == -6.0);
  CHECK(c.trunc_budget() == doctest::Approx(0.08));
  // cancellation removes the atom
  CHECK((a - a).is_zero());
}

TEST_CASE("dimension mismatch is a validation error") {
  CHECK_THROWS_AS(dirac(LatticePoint{0}) + dirac(LatticePoint{0, 0}), ValidationError);
  CHECK_THROWS_AS(convolve(dirac(LatticePoint{0}), dirac(LatticePoint{0, 0})), ValidationError);
}

TEST_CASE("atoms are ordered lexicographically") {
  const SignedMeasure v = SignedMeasure::from_points(
      2, {{LatticePoint{2, 0}, 1.0}, {LatticePoint{0, 5}, 1.0}, {LatticePoint{1, 1}, 1.0}});
  std::vector<LatticePoint> pts;
  for (const Atom& a : v.atoms()) pts.push_back(v.point(a.key));
  CHECK(pts[0] == LatticePoint{0, 5});
  CHECK(pts[1] == LatticePoint{1, 1});
  CHECK(pts[2] == LatticePoint{2, 0});
}

TEST_CASE("exp of the zero measure is delta_0") {
  const SignedMeasure e = exp_measure(zero_measure(3), 1e-12);
  CHECK(e.size() == 1);
  CHECK(e.weight(LatticePoint::origin(3)) == 1.0);
}

TEST_CASE("exp of a scaled unit jump is the Poisson law") {
  for (double t : {0.5, 1.0, 3.0}) {
    const SignedMeasure gen = t * (dirac(LatticePoint{1}) - dirac(LatticePoint{0}));
    const SignedMeasure e = exp_measure(gen, 1e-13);
    for (std::uint32_t m = 0; m < 12; ++m) {
      CHECK(std::abs(e.weight(LatticePoint{m}) - poisson_pmf(m, t)) <= e.trunc_budget() + 1e-13);
    }
    const double rate = t;
    const SignedMeasure pp = poisson_product(std::span<const double>(&rate, 1), 1e-13);
    CHECK(diff_norm(e, pp) <= e.trunc_budget() + pp.trunc_budget() + 1e-12);
  }
}

TEST_CASE("g series") {
  const SeriesSpec g = g_series();
  CHECK(g.coefficient(0) == doctest::Approx(1.0));
  CHECK(g.partial_sum(0.0, 20) == 1.0);
  const SignedMeasure gz = series_apply(g, zero_measure(2), 1e-12);
  CHECK(gz.weight(LatticePoint::origin(2)) == 1.0);
  // ||g(-R)|| <= g(2p) for R = p(delta_1 - delta_0)
  for (double p : {0.05, 0.3, 0.7}) {
    const SignedMeasure r = p * (dirac(LatticePoint{1}) - dirac(LatticePoint{0}));
    const SignedMeasure v = series_apply(g, -1.0 * r, 1e-13);
    const double g2p = 2 * (std::exp(2 * p) * (2 * p - 1) + 1) / (4 * p * p);
    CHECK(tv_norm(v) <= g2p + v.trunc_budget() + 1e-13);
  }
}

TEST_CASE("series tail is certified") {
  const SeriesSpec e = exp_series();
  for (double r : {0.3, 1.0, 2.5}) {
    const int order = e.truncation_order(r, 1e-12);
    CHECK(std::abs(std::exp(r) - e.partial_sum(r, order)) <= 1e-12 + 1e-15 * std::exp(r));
  }
}

TEST_CASE("prune moves small atoms into the budget") {
  const SignedMeasure v = SignedMeasure::from_points(
      1, {{LatticePoint{0}, 1.0}, {LatticePoint{1}, 1e-20}, {LatticePoint{2}, -3e-20}});
  const SignedMeasure p = prune(v, 1e-18);
  CHECK(p.size() == 1);
  CHECK(p.trunc_budget() == doctest::Approx(4e-20));
}

TEST_CASE("algebra properties on random measures") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 50; ++it) {
    const int dim = 1 + it % 3;
    const SignedMeasure a = random_measure(dim, rng, 5, 3);
    const SignedMeasure b = random_measure(dim, rng, 4, 3);
    const SignedMeasure c = random_measure(dim, rng, 3, 3);
    const double scale = tv_norm(a) * tv_norm(b) * tv_norm(c) + 1.0;
    CHECK(diff_norm(convolve(a, b), convolve(b, a)) <= 1e-14 * scale);
    CHECK(diff_norm(convolve(convolve(a, b), c), convolve(a, convolve(b, c))) <= 1e-13 * scale);
    CHECK(diff_norm(convolve(a, b + c), convolve(a, b) + convolve(a, c)) <= 1e-13 * scale);
    CHECK(tv_norm(convolve(a, b)) <= tv_norm(a) * tv_norm(b) * (1 + 1e-14));
    CHECK(total_mass(convolve(a, b)) ==
          doctest::Approx(total_mass(a) * total_mass(b)).epsilon(1e-12).scale(scale));
  }
}

TEST_CASE("exp is multiplicative for commuting measures") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 20; ++it) {
    SignedMeasure a = random_measure(1, rng, 3, 2);
    SignedMeasure b = random_measure(1, rng, 3, 2);
    a = (0.5 / tv_norm(a)) * a;
    b = (0.5 / tv_norm(b)) * b;
    const SignedMeasure lhs = exp_measure(a + b, 1e-13);
    const SignedMeasure rhs = convolve(exp_measure(a, 1e-13), exp_measure(b, 1e-13));
    CHECK(diff_norm(lhs, rhs) <= lhs.trunc_budget() + rhs.trunc_budget() + 1e-12);
    const SignedMeasure inv = convolve(exp_measure(a, 1e-13), exp_measure(-1.0 * a, 1e-13));
    CHECK(diff_norm(inv, dirac(LatticePoint{0})) <= inv.trunc_budget() + 1e-12);
  }
}

TEST_CASE("power matches repeated convolution") {
  const SignedMeasure b = dirac(LatticePoint{0}) + 0.3 * (dirac(LatticePoint{1}) - dirac(LatticePoint{0}));
  const SignedMeasure b5 = power(b, 5);
  for (std::uint32_t k = 0; k <= 5; ++k) {
    const double binom = std::tgamma(6.0) / (std::tgamma(k + 1.0) * std::tgamma(6.0 - k));
    CHECK(b5.weight(LatticePoint{k}) ==
          doctest::Approx(binom * std::pow(0.3, k) * std::pow(0.7, 5 - k)).epsilon(1e-13));
  }
  CHECK(power(b, 0).weight(LatticePoint{0}) == 1.0);
}
