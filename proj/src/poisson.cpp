#include "cpa/poisson.hpp"

#include <cmath>
#include <limits>

#include "cpa/error.hpp"

namespace cpa {

double poisson_pmf(long m, double t) {
  if (!(t >= 0.0)) throw ValidationError("poisson_pmf: rate must be >= 0");
  if (m < 0) return 0.0;
  if (t == 0.0) return m == 0 ? 1.0 : 0.0;
  // The running product is accurate to about m ulps; fall back to the
  // log-gamma form where it would underflow or lose too much.
  if (t < 600.0 && m < 200) {
    double value = std::exp(-t);
    for (long i = 1; i <= m; ++i) value *= t / static_cast<double>(i);
    return value;
  }
  const double md = static_cast<double>(m);
  return std::exp(-t + md * std::log(t) - std::lgamma(md + 1.0));
}

double poisson_tail_bound(long m, double t) {
  if (m < 0) return 1.0;
  const double denom = 1.0 - t / static_cast<double>(m + 2);
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return poisson_pmf(m + 1, t) / denom;
}

long poisson_truncation_point(double t, double tol) {
  if (!(tol > 0.0)) throw ValidationError("poisson_truncation_point: tol must be > 0");
  if (!(t >= 0.0)) throw ValidationError("poisson_truncation_point: rate must be >= 0");
  long m = static_cast<long>(std::floor(t));
  if (m > 0) --m;
  // Below floor(t) - 1 the majorant is infinite; above it, decreasing.
  while (poisson_tail_bound(m, t) > tol) ++m;
  return m;
}

}  // namespace cpa
