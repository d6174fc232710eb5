#include "cpa/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cpa/bounds.hpp"
#include "cpa/error.hpp"
#include "cpa/poisson.hpp"

namespace cpa {

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

double log_factorial(int k) { return std::lgamma(k + 1.0); }

double factorial(int k) { return std::exp(log_factorial(k)); }

}  // namespace

double charlier(int j, double x, double t) {
  if (j < 0) throw ValidationError("charlier: degree must be >= 0");
  if (!(t > 0.0)) throw ValidationError("charlier: t must be > 0");
  double sum = 0.0;
  double falling = 1.0;  // x (x-1) ... (x-i+1) = C(x,i) i!
  for (int i = 0; i <= j; ++i) {
    if (i > 0) falling *= x - i + 1;
    sum += binomial(j, i) * falling * std::pow(-t, j - i);
  }
  return sum;
}

double poisson_difference(int j, long m, double t) {
  if (j < 0) throw ValidationError("poisson_difference: j must be >= 0");
  double sum = 0.0;
  for (int i = 0; i <= j; ++i) {
    const double sign = ((j - i) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binomial(j, i) * poisson_pmf(m - i, t);
  }
  return sum;
}

namespace {

// log of po(m,t) (m+t)^s
double log_majorant(long m, double t, int s) {
  return -t + m * std::log(t) - std::lgamma(m + 1.0) + s * std::log(m + t);
}

double majorant_ratio(long m, double t, int s) {
  return t / (m + 1.0) * std::pow((m + 1.0 + t) / (m + t), s);
}

double certified_tail(long M, double t, int s) {
  const long m = M + 1;
  const double rho = majorant_ratio(m, t, s);
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  return std::exp(log_majorant(m, t, s)) / (1.0 - rho);
}

}  // namespace

OrthogonalityReport verify_orthogonality(int i, int j, double t, long M, double tol) {
  if (i < 0 || j < 0) throw ValidationError("verify_orthogonality: degrees must be >= 0");
  if (!(t > 0.0)) throw ValidationError("verify_orthogonality: t must be > 0");
  const int s = i + j;
  if (M < 0) {
    if (!(tol > 0.0)) throw ValidationError("verify_orthogonality: tol must be > 0");
    M = std::max<long>(static_cast<long>(std::ceil(t)), s);
    while (!(certified_tail(M, t, s) <= tol)) ++M;
  }
  OrthogonalityReport rep;
  rep.i = i;
  rep.j = j;
  rep.t = t;
  rep.M = M;
  double abs_sum = 0.0;
  for (long m = 0; m <= M; ++m) {
    const double md = static_cast<double>(m);
    const double term = poisson_pmf(m, t) * charlier(i, md, t) * charlier(j, md, t);
    rep.sum += term;
    abs_sum += std::abs(term);
  }
  rep.expected = (i == j) ? factorial(i) * std::pow(t, i) : 0.0;
  rep.tail = certified_tail(M, t, s);
  rep.rounding = 64.0 * std::numeric_limits<double>::epsilon() *
                 (abs_sum + std::abs(rep.expected));
  rep.pass = std::abs(rep.sum - rep.expected) <= rep.tail + rep.rounding;
  return rep;
}

// ---------------------------------------------------------------------------

SmoothnessInstance::SmoothnessInstance(std::vector<std::vector<double>> coeff,
                                       std::vector<double> lambda)
    : k_(static_cast<int>(coeff.size())),
      d_(static_cast<int>(lambda.size())),
      lambda_(std::move(lambda)) {
  if (k_ < 1) throw ValidationError("smoothness instance needs k >= 1");
  if (d_ < 1) throw ValidationError("smoothness instance needs d >= 1");
  for (int r = 0; r < d_; ++r) {
    const double l = lambda_[static_cast<std::size_t>(r)];
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw ValidationError("lambda[" + std::to_string(r) + "] must be finite and > 0");
    }
  }
  coeff_.reserve(static_cast<std::size_t>(k_) * static_cast<std::size_t>(d_));
  for (int j = 0; j < k_; ++j) {
    const auto& row = coeff[static_cast<std::size_t>(j)];
    if (static_cast<int>(row.size()) != d_) {
      throw ValidationError("coeff[" + std::to_string(j) + "] has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(d_));
    }
    for (double x : row) {
      if (!std::isfinite(x)) throw ValidationError("coefficients must be finite");
      coeff_.push_back(x);
    }
  }
}

double SmoothnessInstance::p(int j) const {
  double s = 0.0;
  for (int r = 0; r < d_; ++r) s += std::abs(coeff(j, r));
  return s;
}

SignedMeasure SmoothnessInstance::R(int j) const {
  std::vector<std::pair<LatticePoint, double>> pts;
  double total = 0.0;
  for (int r = 0; r < d_; ++r) {
    const double c = coeff(j, r);
    if (c == 0.0) continue;
    pts.emplace_back(LatticePoint::unit(d_, r), c);
    total += c;
  }
  pts.emplace_back(LatticePoint::origin(d_), -total);
  return SignedMeasure::from_points(d_, pts);
}

SmoothnessInstance random_smoothness_instance(int k, int d, std::mt19937_64& rng,
                                              bool nonnegative) {
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  std::uniform_real_distribution<double> c(nonnegative ? 0.0 : -0.5, 0.5);
  std::vector<double> lambda(static_cast<std::size_t>(d));
  for (double& l : lambda) l = lam(rng);
  std::vector<std::vector<double>> coeff(static_cast<std::size_t>(k),
                                         std::vector<double>(static_cast<std::size_t>(d)));
  for (auto& row : coeff) {
    for (double& x : row) x = c(rng);
  }
  return SmoothnessInstance(std::move(coeff), std::move(lambda));
}

NormValue norm_product_exact(const SmoothnessInstance& inst, bool squares, double tol) {
  SignedMeasure prod = dirac(LatticePoint::origin(inst.d()));
  for (int j = 0; j < inst.k(); ++j) {
    const SignedMeasure r = inst.R(j);
    prod = convolve(prod, r);
    if (squares) prod = convolve(prod, r);
  }
  const SignedMeasure g = poisson_product(inst.lambdas(), tol);
  const SignedMeasure out = convolve(prod, g);
  return {tv_norm(out), out.trunc_budget()};
}

double charlier_middle(const SmoothnessInstance& inst) {
  const int k = inst.k();
  const int d = inst.d();
  if (k > 6) throw ResourceError("charlier_middle enumerates [d]^k x S_k; k must be <= 6");
  std::vector<std::vector<double>> a(static_cast<std::size_t>(k),
                                     std::vector<double>(static_cast<std::size_t>(d)));
  for (int j = 0; j < k; ++j) {
    for (int r = 0; r < d; ++r) {
      a[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] =
          inst.coeff(j, r) / std::sqrt(inst.lambda(r));
    }
  }
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  std::vector<int> perm(static_cast<std::size_t>(k));
  double total = 0.0;
  while (true) {
    std::iota(perm.begin(), perm.end(), 0);
    double inner = 0.0;
    do {
      double prod = 1.0;
      for (int j = 0; j < k; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        prod *= a[sj][static_cast<std::size_t>(idx[static_cast<std::size_t>(perm[sj])])];
      }
      inner += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    total += inner * inner;

    int pos = k - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == d) {
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return std::sqrt(total / factorial(k));
}

double charlier_right(const SmoothnessInstance& inst) {
  double prod = std::sqrt(factorial(inst.k()));
  for (int j = 0; j < inst.k(); ++j) {
    double s = 0.0;
    for (int r = 0; r < inst.d(); ++r) s += inst.coeff(j, r) * inst.coeff(j, r) / inst.lambda(r);
    prod *= std::sqrt(s);
  }
  return prod;
}

std::vector<double> split_constants(int k, const SplitParams& params) {
  const auto sk = static_cast<std::size_t>(k);
  if (k < 1) throw ValidationError("split_constants: k must be >= 1");
  if (params.u.size() != sk || params.v.size() != sk || params.w.size() != sk) {
    throw ValidationError("split parameters must have k entries each");
  }
  const double ck = std::exp(log_factorial(2 * k) / (2.0 * k));
  const double ckp = std::exp(log_factorial(2 * k - 1) / (4.0 * k));
  std::vector<double> out(sk);
  for (std::size_t j = 0; j < sk; ++j) {
    const double u = params.u[j], v = params.v[j], w = params.w[j];
    if (!(u >= 0.0 && u <= 0.5)) throw ValidationError("split parameter u must lie in [0, 1/2]");
    if (!(v > 0.0) || !(w > 0.0)) throw ValidationError("split parameters v, w must be > 0");
    out[j] = std::max(ck + ckp * u / v, (2.0 * (1.0 - u) + ckp * u * v) * w);
  }
  return out;
}

double split_bound(const SmoothnessInstance& inst, const SplitParams& params) {
  const auto cs = split_constants(inst.k(), params);
  double prod = 1.0;
  for (int j = 0; j < inst.k(); ++j) {
    const double cap = 4.0 * inst.p(j) / params.w[static_cast<std::size_t>(j)];
    double s = 0.0;
    for (int r = 0; r < inst.d(); ++r) {
      const double a = std::abs(inst.coeff(j, r));
      s += a * std::min(a / inst.lambda(r), cap);
    }
    prod *= cs[static_cast<std::size_t>(j)] * s;
  }
  return prod;
}

double squares_bound(const SmoothnessInstance& inst) {
  double prod = D_constant(inst.k()) * factorial(inst.k());
  for (int j = 0; j < inst.k(); ++j) {
    const double pj = inst.p(j);
    double s = 0.0;
    for (int r = 0; r < inst.d(); ++r) {
      const double a = std::abs(inst.coeff(j, r));
      s += a * std::min(a / inst.lambda(r), pj);
    }
    prod *= s;
  }
  return prod;
}

// ---------------------------------------------------------------------------

double log_form_f(double x) {
  if (!(x > 1.0)) throw ValidationError("f is defined on (1, inf)");
  return x * std::log1p(1.0 / (x - 1.0)) - 1.0;
}

ExpansionConstants expansion_constants(double u, double v, double w) {
  if (!(u >= 0.0 && u <= 0.5)) throw ValidationError("u must lie in [0, 1/2]");
  if (!(v > 0.0) || !(w > 0.0)) throw ValidationError("v, w must be > 0");
  ExpansionConstants c;
  c.C = std::max((std::sqrt(2.0) + u / v) * (2.0 / w), 4.0 * (1.0 - u) + 2.0 * u * v);

  // f decreases from +inf at 1 to 0 at infinity.
  const double target = 2.0 / w;
  double lo = 1.0;
  double hi = 2.0;
  while (log_form_f(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceError("w0 bracket not found");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (log_form_f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  c.w0 = hi;
  return c;
}

SingleTrial random_single_trial(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SingleTrial s;
  s.p.resize(static_cast<std::size_t>(d));
  double total = 0.0;
  for (double& x : s.p) {
    x = unif(rng);
    total += x;
  }
  const double mass = unif(rng);
  for (double& x : s.p) x *= mass / total;
  s.lambda.resize(static_cast<std::size_t>(d));
  for (std::size_t r = 0; r < s.lambda.size(); ++r) {
    // Every fourth draw sits on the boundary lambda_r = p_r.
    const double extra = unif(rng) < 0.25 ? 0.0 : 3.0 * unif(rng);
    s.lambda[r] = s.p[r] + extra;
    if (!(s.lambda[r] > 0.0)) s.lambda[r] = 1e-3;
  }
  return s;
}

namespace {

void check_single_trial(const SingleTrial& s) {
  if (s.p.empty() || s.p.size() != s.lambda.size()) {
    throw ValidationError("single trial needs matching, nonempty p and lambda");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < s.p.size(); ++r) {
    if (!(s.p[r] >= 0.0)) throw ValidationError("p_r must be >= 0");
    if (!(s.lambda[r] > 0.0) || s.lambda[r] < s.p[r]) {
      throw ValidationError("lambda_r must be > 0 and >= p_r");
    }
    total += s.p[r];
  }
  if (total > 1.0) throw ValidationError("sum_r p_r must be <= 1");
}

double single_total(const SingleTrial& s) {
  return std::accumulate(s.p.begin(), s.p.end(), 0.0);
}

}  // namespace

NormValue expansion_norm_exact(const SingleTrial& inst, double tol) {
  check_single_trial(inst);
  const int d = static_cast<int>(inst.p.size());
  std::vector<std::pair<LatticePoint, double>> pts;
  pts.emplace_back(LatticePoint::origin(d), -single_total(inst));
  for (int r = 0; r < d; ++r) {
    pts.emplace_back(LatticePoint::unit(d, r), inst.p[static_cast<std::size_t>(r)]);
  }
  const SignedMeasure r = SignedMeasure::from_points(d, pts);
  const SignedMeasure delta0 = dirac(LatticePoint::origin(d));
  const SignedMeasure e = exp_measure(-1.0 * r, tol);
  const SignedMeasure a = convolve(delta0 + r, e) - delta0;
  const SignedMeasure out = convolve(a, poisson_product(inst.lambda, tol));
  return {tv_norm(out), out.trunc_budget()};
}

double expansion_bound(const SingleTrial& inst, const ExpansionConstants& c) {
  check_single_trial(inst);
  const double p = single_total(inst);
  double s = 0.0;
  for (std::size_t r = 0; r < inst.p.size(); ++r) {
    s += inst.p[r] * std::min(c.w0 * inst.p[r] / inst.lambda[r], p);
  }
  return c.C * s;
}

double expansion_bound_final(const SingleTrial& inst) {
  check_single_trial(inst);
  const double p = single_total(inst);
  double s = 0.0;
  for (std::size_t r = 0; r < inst.p.size(); ++r) {
    s += inst.p[r] * std::min(inst.p[r] / inst.lambda[r], p);
  }
  return 3.11 * s;
}

FactorialCheck check_factorial_inequality(int kmax) {
  FactorialCheck out;
  for (int k = 1; k <= kmax; ++k) {
    const double l2k = log_factorial(2 * k);
    const double l2k1 = log_factorial(2 * k - 1);
    for (int m1 = 0; m1 <= k; ++m1) {
      for (int m2 = 0; m1 + m2 <= k; ++m2) {
        const double lhs = log_factorial(2 * m1 + m2);
        const double rhs = m1 * l2k / k + m2 * l2k1 / (2.0 * k);
        const double slack = 1e-12 * std::max(1.0, std::abs(rhs));
        ++out.cases;
        if (std::abs(lhs - rhs) <= slack) ++out.equalities;
        if (lhs > rhs + slack) {
          if (out.violations == 0) {
            out.first_k = k;
            out.first_m1 = m1;
            out.first_m2 = m2;
          }
          ++out.violations;
        }
      }
    }
  }
  return out;
}

}  // namespace cpa
