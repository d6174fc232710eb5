#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "cpa/bounds.hpp"
#include "cpa/error.hpp"
#include "cpa/poisson.hpp"
#include "cpa/smoothness.hpp"

using namespace cpa;
using boost::multiprecision::cpp_rational;

namespace {

cpp_rational charlier_rational(int j, int x, const cpp_rational& t) {
  cpp_rational sum = 0;
  for (int i = 0; i <= j; ++i) {
    cpp_rational binom_j = 1, binom_x = 1, fact = 1, power = 1;
    for (int l = 1; l <= i; ++l) {
      binom_j = binom_j * (j - l + 1) / l;
      binom_x = binom_x * (x - l + 1) / l;
      fact *= l;
    }
    for (int l = 0; l < j - i; ++l) power *= -t;
    sum += binom_j * binom_x * fact * power;
  }
  return sum;
}

}  // namespace

TEST_CASE("charlier low degrees") {
  for (double x : {0.0, 1.5, 4.0, 9.0}) {
    for (double t : {0.5, 2.0}) {
      CHECK(charlier(0, x, t) == 1.0);
      CHECK(charlier(1, x, t) == doctest::Approx(x - t).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(charlier(2, 1.0, 0.0), ValidationError);
}

TEST_CASE("charlier against rational arithmetic") {
  std::mt19937_64 rng(20);
  std::uniform_int_distribution<int> jd(0, 6), xd(0, 60), num(1, 28);
  for (int it = 0; it < 20; ++it) {
    const int j = jd(rng), x = xd(rng);
    const cpp_rational t(num(rng), 4);
    const double exact = static_cast<double>(charlier_rational(j, x, t));
    const double got = charlier(j, x, static_cast<double>(t));
    CHECK(std::abs(got - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("charlier generates Poisson differences") {
  for (double t : {0.5, 2.0, 7.0}) {
    // Delta^j po(m) = Delta^{j-1} po(m-1) - Delta^{j-1} po(m), built up by table
    std::vector<std::vector<double>> diff(6, std::vector<double>(31, 0.0));
    for (long m = 0; m <= 30; ++m) diff[0][static_cast<std::size_t>(m)] = poisson_pmf(m, t);
    for (std::size_t j = 1; j <= 5; ++j) {
      for (std::size_t m = 0; m <= 30; ++m) {
        diff[j][m] = (m ? diff[j - 1][m - 1] : 0.0) - diff[j - 1][m];
      }
    }
    for (int j = 0; j <= 5; ++j) {
      for (long m = 0; m <= 30; ++m) {
        const double lhs = diff[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
        const double rhs = poisson_pmf(m, t) * charlier(j, static_cast<double>(m), t) / std::pow(t, j);
        const double scale = std::pow(2.0, j) * std::max(1.0, 1.0 / std::pow(t, j)) * 1e-12;
        CHECK(std::abs(lhs - rhs) <= scale);
        CHECK(std::abs(poisson_difference(j, m, t) - lhs) <= 1e-15 * std::pow(2.0, j));
      }
    }
  }
}

TEST_CASE("orthogonality examples") {
  const auto a = verify_orthogonality(0, 0, 1.0);
  CHECK(a.pass);
  CHECK(a.expected == 1.0);
  CHECK(std::abs(a.sum - 1.0) <= 1e-13);
  const auto b = verify_orthogonality(1, 2, 3.0);
  CHECK(b.pass);
  CHECK(b.expected == 0.0);
  CHECK(std::abs(b.sum) <= b.tail + b.rounding);
  const auto c = verify_orthogonality(3, 3, 2.0);
  CHECK(c.pass);
  CHECK(c.expected == 48.0);
  CHECK(std::abs(c.sum - 48.0) <= 1e-10);
  for (int i = 0; i <= 5; ++i) {
    for (int j = 0; j <= 5; ++j) {
      for (double t : {0.5, 1.0, 2.0, 7.0}) CHECK(verify_orthogonality(i, j, t).pass);
    }
  }
}

TEST_CASE("a short orthogonality sum carries a large tail") {
  const auto r = verify_orthogonality(2, 2, 7.0, 10);
  CHECK(r.M == 10);
  CHECK(r.tail > 1e-3);
  CHECK(r.pass);
}

TEST_CASE("single factor norm bound") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 30; ++it) {
    const SmoothnessInstance inst = random_smoothness_instance(1, 1 + it % 3, rng, it % 2 == 0);
    const NormValue nv = norm_product_exact(inst, false);
    double s = 0;
    for (int r = 0; r < inst.d(); ++r) s += inst.coeff(0, r) * inst.coeff(0, r) / inst.lambda(r);
    CHECK(nv.norm - nv.error_bar <= std::sqrt(s) + 1e-12);
    CHECK(charlier_right(inst) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
  }
  const SmoothnessInstance zero({{0.0, 0.0}}, {1.0, 2.0});
  CHECK(norm_product_exact(zero, false).norm == 0.0);
}

TEST_CASE("charlier chain for two factors") {
  std::mt19937_64 rng(32);
  for (int it = 0; it < 30; ++it) {
    const SmoothnessInstance inst = random_smoothness_instance(2, 1 + it % 3, rng, false);
    const NormValue nv = norm_product_exact(inst, false);
    const double mid = charlier_middle(inst);
    CHECK(nv.norm - nv.error_bar <= mid * (1 + 1e-12) + 1e-13);
    CHECK(mid <= charlier_right(inst) * (1 + 1e-12));
  }
  std::mt19937_64 r7(1);
  CHECK_THROWS_AS(charlier_middle(random_smoothness_instance(7, 1, r7, true)), ResourceError);
}

TEST_CASE("split constant for k = 1") {
  const auto c = split_constants(1, SplitParams{{0.5}, {0.1708}, {4.0}});
  REQUIRE(c.size() == 1);
  CHECK(c[0] == doctest::Approx(4.3416).epsilon(1e-4));
  CHECK(std::abs(c[0] - 4.342) <= 1e-3);
  CHECK_THROWS_AS(split_constants(1, SplitParams{{0.7}, {0.2}, {4.0}}), ValidationError);
}

TEST_CASE("squares bound on random nonnegative instances") {
  std::mt19937_64 rng(33);
  for (int it = 0; it < 30; ++it) {
    const SmoothnessInstance inst = random_smoothness_instance(1 + it % 3, 1 + it % 2, rng, true);
    const NormValue nv = norm_product_exact(inst, true);
    CHECK(nv.norm - nv.error_bar <= squares_bound(inst) * (1 + 1e-12));
  }
}

TEST_CASE("log form of f against its integral form") {
  for (double x : {1.05, 1.256, 1.5, 2.0, 5.0, 40.0}) {
    const int cells = 1000;
    double integral = 0.0;
    for (int i = 0; i < cells; ++i) {
      const double t = (i + 0.5) / cells;
      integral += t / (x - t) / cells;
    }
    CHECK(log_form_f(x) == doctest::Approx(integral).epsilon(1e-4));
  }
  CHECK(log_form_f(1.2) > log_form_f(1.3));
}

TEST_CASE("expansion constants") {
  const ExpansionConstants c = expansion_constants();
  CHECK(c.C <= 2.473);
  CHECK(c.w0 <= 1.256);
  CHECK(c.C * c.w0 <= 3.11);
  CHECK(std::abs(log_form_f(c.w0) - 1.0) <= 1e-9);
}

TEST_CASE("first-order expansion bound") {
  std::mt19937_64 rng(34);
  const ExpansionConstants c = expansion_constants();
  for (int it = 0; it < 40; ++it) {
    const SingleTrial inst = random_single_trial(1 + it % 3, rng);
    const NormValue ev = expansion_norm_exact(inst);
    CHECK(ev.norm - ev.error_bar <= expansion_bound(inst, c) * (1 + 1e-12));
    CHECK(expansion_bound(inst, c) <= expansion_bound_final(inst) * (1 + 1e-12));
  }
}

TEST_CASE("factorial inequality") {
  const FactorialCheck fc = check_factorial_inequality(12);
  CHECK(fc.violations == 0);
  CHECK(fc.first_k == -1);
  CHECK(fc.cases > 0);
  CHECK(fc.equalities >= 3);
}
