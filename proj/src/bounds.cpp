#include "cpa/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

#include "cpa/error.hpp"

namespace cpa {

namespace {

const double kTwoPow32 = std::pow(2.0, 1.5);

double log_factorial(int k) { return std::lgamma(k + 1.0); }

// Per-trial pieces of the coefficient sums.
struct RowSums {
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double sum_p2 = 0.0;
  double magic = 0.0;  // sum_j p_j^2 (sum_r q_{j,r} / sqrt(lambda_r))^2
  double barbour = 0.0;

  void add(const RowSums& o) {
    alpha0 += o.alpha0;
    beta0 += o.beta0;
    alpha1 += o.alpha1;
    beta1 += o.beta1;
    sum_p2 += o.sum_p2;
    magic += o.magic;
    barbour += o.barbour;
  }
};

RowSums sum_rows(const ModelSpec& spec, int begin, int end, double c_lambda) {
  RowSums acc;
  const auto lam = spec.lambda_r();
  for (int j = begin; j < end; ++j) {
    const double pj = spec.p(j);
    if (pj == 0.0) continue;
    const auto q = spec.q_row(j);
    double s_a1 = 0.0, s_b1 = 0.0, s_sq = 0.0, s_root = 0.0;
    for (int r = 0; r < spec.d(); ++r) {
      const double qr = q[static_cast<std::size_t>(r)];
      if (qr == 0.0) continue;
      const double lr = lam[static_cast<std::size_t>(r)];
      s_a1 += qr * std::min(qr / (kTwoPow32 * lr), 2.0);
      s_b1 += qr * std::min(qr / lr, 1.0);
      s_sq += qr * qr / lr;
      s_root += qr / std::sqrt(lr);
    }
    const double p2 = pj * pj;
    const double gp = g_scalar(2.0 * pj);
    acc.alpha0 += gp * p2 * std::min(s_sq / kTwoPow32, 1.0);
    acc.beta0 += p2 * std::min(s_sq, 1.0);
    acc.alpha1 += gp * p2 * s_a1;
    acc.beta1 += p2 * s_b1;
    acc.sum_p2 += p2;
    acc.magic += p2 * s_root * s_root;
    acc.barbour += p2 * std::min(c_lambda * s_sq, 1.0);
  }
  return acc;
}

RowSums sum_all_rows(const ModelSpec& spec, bool parallel) {
  const double c_lambda = barbour_c(spec.lambda());
  if (!parallel) return sum_rows(spec, 0, spec.n(), c_lambda);
  const int workers = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const int chunk = (spec.n() + workers - 1) / workers;
  std::vector<std::future<RowSums>> jobs;
  for (int begin = 0; begin < spec.n(); begin += chunk) {
    const int end = std::min(spec.n(), begin + chunk);
    jobs.push_back(std::async(std::launch::async, [&spec, begin, end, c_lambda] {
      return sum_rows(spec, begin, end, c_lambda);
    }));
  }
  RowSums total;
  for (auto& job : jobs) total.add(job.get());
  return total;
}

BoundReport upper(std::string name, std::string label, double value,
                  int order = -1) {
  BoundReport b;
  b.name = std::move(name);
  b.label = std::move(label);
  b.kind = BoundKind::upper;
  b.order = order;
  b.value = value;
  return b;
}

BoundReport gated(BoundReport b, bool ok, std::string condition) {
  b.condition = std::move(condition);
  b.applicable = ok;
  if (!ok) b.value = std::numeric_limits<double>::quiet_NaN();
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar pieces

double g_scalar(double x) {
  if (std::abs(x) >= 0.5) {
    return 2.0 * (std::exp(x) * (x - 1.0) + 1.0) / (x * x);
  }
  // 2 sum_{m=2}^{31} (m-1)/m! x^{m-2}
  double sum = 0.0;
  double coeff = 1.0;  // 1/m!
  double xm = 1.0;
  for (int m = 2; m <= 31; ++m) {
    coeff /= m;
    sum += (m - 1) * coeff * xm;
    xm *= x;
  }
  return 2.0 * sum;
}

double g_at_two() { return (std::exp(2.0) + 1.0) / 2.0; }

double barbour_c(double lambda) {
  const double l = lambda > 0.0 ? std::log(2.0 * lambda) : 0.0;
  return 0.5 + std::max(l, 0.0);
}

namespace {

Coefficients from_row_sums(const ModelSpec& spec, const RowSums& s) {
  double max_p = 0.0;
  for (double p : spec.p()) max_p = std::max(max_p, p);
  Coefficients c;
  c.alpha0 = s.alpha0;
  c.beta0 = s.beta0;
  c.alpha1 = s.alpha1;
  c.beta1 = s.beta1;
  c.lambda = spec.lambda();
  c.sum_p2 = s.sum_p2;
  c.max_p = max_p;
  c.theta = spec.lambda() > 0.0 ? s.sum_p2 / spec.lambda() : 0.0;
  return c;
}

}  // namespace

Coefficients coefficients(const ModelSpec& spec, bool parallel) {
  return from_row_sums(spec, sum_all_rows(spec, parallel));
}

double alpha0(const ModelSpec& spec) { return coefficients(spec).alpha0; }
double beta0(const ModelSpec& spec) { return coefficients(spec).beta0; }
double alpha1(const ModelSpec& spec) { return coefficients(spec).alpha1; }
double beta1(const ModelSpec& spec) { return coefficients(spec).beta1; }

// ---------------------------------------------------------------------------
// Order constants

const std::vector<SplitRow>& split_table() {
  static const std::vector<SplitRow> table{
      {0.5000, 0.1708}, {0.5000, 0.2574}, {0.5000, 0.3589},
      {0.5000, 0.4666}, {0.4500, 0.5192}, {0.3000, 0.4414},
      {0.1996, 0.4099}, {0.1500, 0.5002}, {0.0500, 0.4560}};
  return table;
}

double D_constant(int k, bool rounded) {
  if (k < 1) throw ValidationError("D_constant: k must be >= 1");
  if (k >= 10) return std::exp(0.5 * log_factorial(2 * k) - log_factorial(k));
  const SplitRow row = split_table()[static_cast<std::size_t>(k - 1)];
  constexpr double w = 4.0;
  const double ck = std::exp(log_factorial(2 * k) / (2.0 * k));
  const double ckp = std::exp(log_factorial(2 * k - 1) / (4.0 * k));
  const double big_c = std::max(ck + ckp * row.u / row.v,
                                (2.0 * (1.0 - row.u) + ckp * row.u * row.v) * w);
  const double d = std::exp(k * std::log(big_c) - log_factorial(k));
  return rounded ? std::ceil(d * 1000.0) / 1000.0 : d;
}

namespace {

double log_D_prime(int k) {
  if (k == 1) return std::log(3.11);
  // D_k itself overflows near k = 1000.
  const double log_d =
      k >= 10 ? 0.5 * log_factorial(2 * k) - log_factorial(k) : std::log(D_constant(k));
  return log_d + k * std::log(g_at_two() / 2.0);
}

}  // namespace

double D_prime(int k) { return std::exp(log_D_prime(k)); }

double h1(int ell, double x) {
  if (ell < 0) throw ValidationError("h1: ell must be >= 0");
  if (x <= 0.0) return 0.0;
  constexpr int kMaxTerms = 10'000'000;
  const double lx = std::log(x);
  double sum = 0.0;
  for (int k = ell + 1; k < ell + 1 + kMaxTerms; ++k) {
    const double term = std::exp(log_D_prime(k) + k * lx);
    sum += term;
    // From k = 10 on the terms decrease geometrically for x < 1/g(2).
    if (k >= 10 && term < 1e-15 * sum) return sum;
  }
  throw ConvergenceError("h1: series did not settle (x too close to 1/g(2))");
}

double h2(int ell, double x) {
  if (ell < 0) throw ValidationError("h2: ell must be >= 0");
  double sum = 2.0;
  for (int k = 1; k <= ell; ++k) sum += D_prime(k) * std::pow(x, k);
  return sum;
}

std::optional<double> published_c_cap(int ell) {
  static constexpr double caps[] = {15.6, 113.0, 633.8, 3204.8, 15945.6};
  if (ell < 0 || ell > 4) return std::nullopt;
  return caps[ell];
}

OrderConstants order_constants(int ell) {
  if (ell < 0) throw ValidationError("order_constants: ell must be >= 0");
  OrderConstants oc;
  oc.order = ell;
  for (int k = 1; k <= 9; ++k) {
    oc.D_raw.push_back(D_constant(k, false));
    oc.D.push_back(D_constant(k, true));
  }
  oc.published_cap = published_c_cap(ell);

  const double radius = 1.0 / g_at_two();
  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  for (int s = 1; s <= 30 && !bracketed; ++s) {
    const double cand = radius * (1.0 - std::ldexp(1.0, -s));
    double value = 0.0;
    try {
      value = h1(ell, cand) - h2(ell, cand);
    } catch (const ConvergenceError&) {
      break;
    }
    if (value > 0.0) {
      hi = cand;
      bracketed = true;
    } else {
      lo = cand;
    }
  }
  if (!bracketed) {
    throw ConvergenceError("order_constants: no bracket for x_ell with ell = " +
                           std::to_string(ell));
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (h1(ell, mid) < h2(ell, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  oc.x = 0.5 * (lo + hi);
  oc.c = h2(ell, oc.x) / std::pow(oc.x, ell + 1);
  return oc;
}

// ---------------------------------------------------------------------------
// Bound lists

std::vector<BoundReport> upper_bounds(const ModelSpec& spec, int ell_max, bool parallel) {
  if (ell_max < 0) throw ValidationError("upper_bounds: ell_max must be >= 0");
  const RowSums s = sum_all_rows(spec, parallel);
  const Coefficients c = from_row_sums(spec, s);
  const double e = std::numbers::e;
  std::vector<BoundReport> out;

  out.push_back(upper("le_cam", "2 sum p_j^2", 2.0 * s.sum_p2));
  out.push_back(gated(upper("magic_factor", "9 sum p_j^2 (sum_r q_jr/sqrt(lambda_r))^2",
                            9.0 * s.magic),
                      c.max_p <= 0.25, "max p_j <= 1/4"));
  out.push_back(upper("barbour", "2 sum p_j^2 min{c_lambda sum_r q_jr^2/lambda_r, 1}",
                      2.0 * s.barbour));
  {
    const bool ok = c.alpha0 < 1.0 / (2.0 * e);
    out.push_back(gated(upper("alpha0", "2 alpha0 / (1 - 2 e alpha0)",
                              ok ? 2.0 * c.alpha0 / (1.0 - 2.0 * c.alpha0 * e) : 0.0),
                        ok, "alpha0 < 1/(2e)"));
  }
  out.push_back(upper("beta0", "17.6 beta0", 17.6 * c.beta0));
  const bool alpha1_ok = c.alpha1 < 1.0 / kTwoPow32;
  out.push_back(gated(upper("alpha1", "2 alpha1 / (1 - 2^{3/2} alpha1)",
                            alpha1_ok ? 2.0 * c.alpha1 / (1.0 - kTwoPow32 * c.alpha1) : 0.0),
                      alpha1_ok, "alpha1 < 2^{-3/2}"));
  out.push_back(upper("beta1", "15.6 beta1", 15.6 * c.beta1));

  for (int ell = 0; ell <= ell_max; ++ell) {
    const bool in_range = ell <= spec.n();
    const int m = ell + 1;
    {
      const double factor = std::exp(0.5 * log_factorial(2 * m) - log_factorial(m)) *
                            std::pow(2.0, 0.5 * m);
      const bool ok = alpha1_ok && in_range;
      const double v = ok ? factor * std::pow(c.alpha1, m) / (1.0 - kTwoPow32 * c.alpha1) : 0.0;
      out.push_back(gated(upper("alpha1_order",
                                "sqrt((2(l+1))!)/(l+1)! 2^{(l+1)/2} alpha1^{l+1}/(1 - 2^{3/2} alpha1)",
                                v, ell),
                          ok, in_range ? "alpha1 < 2^{-3/2}" : "ell <= n"));
    }
    {
      BoundReport b = upper("beta1_order", "c_l beta1^{l+1}, c_l recomputed", 0.0, ell);
      if (!in_range) {
        out.push_back(gated(b, false, "ell <= n"));
      } else {
        try {
          const OrderConstants oc = order_constants(ell);
          b.value = oc.c * std::pow(c.beta1, m);
          out.push_back(b);
        } catch (const ConvergenceError&) {
          out.push_back(gated(b, false, "x_ell bracket in (0, 1/g(2))"));
        }
      }
    }
    if (const auto cap = published_c_cap(ell)) {
      BoundReport b = upper("beta1_order_cap", "c_l beta1^{l+1}, published cap on c_l",
                            *cap * std::pow(c.beta1, m), ell);
      out.push_back(in_range ? b : gated(b, false, "ell <= n"));
    }
  }

  if (spec.d() == 1) {
    const double lam = spec.lambda();
    const double factor = lam > 0.0 ? -std::expm1(-lam) / lam : 1.0;
    out.push_back(upper("bernoulli_stein", "2 (1 - e^{-lambda})/lambda sum p_j^2",
                        2.0 * factor * s.sum_p2));
    const bool ok = c.theta < 1.0;
    const double v =
        ok ? 3.0 * c.theta / (2.0 * e * std::pow(1.0 - std::sqrt(c.theta), 1.5)) : 0.0;
    out.push_back(gated(upper("bernoulli_theta", "3 theta / (2e (1 - sqrt(theta))^{3/2})", v),
                        ok, "theta < 1"));
  }
  return out;
}

double lower_bound_for_subset(const ModelSpec& spec, const std::vector<int>& subset) {
  if (subset.empty()) throw ValidationError("lower bound: category subset is empty");
  double lam = 0.0;
  double sum_sq = 0.0;
  for (int j = 0; j < spec.n(); ++j) {
    double y = 0.0;
    for (int r : subset) {
      if (r < 0 || r >= spec.d()) throw ValidationError("lower bound: category out of range");
      y += spec.q(j, r);
    }
    const double pt = spec.p(j) * y;
    lam += pt;
    sum_sq += pt * pt;
  }
  const double inv = lam > 0.0 ? 1.0 / lam : std::numeric_limits<double>::infinity();
  return std::min(inv, 1.0) * sum_sq / 7.0;
}

std::vector<BoundReport> lower_bounds(const ModelSpec& spec) {
  std::vector<int> all(static_cast<std::size_t>(spec.d()));
  for (int r = 0; r < spec.d(); ++r) all[static_cast<std::size_t>(r)] = r;

  // Single categories: sum_j p_j^2 q_{j,r}^2, accumulated column-wise.
  std::vector<double> col(static_cast<std::size_t>(spec.d()), 0.0);
  for (int j = 0; j < spec.n(); ++j) {
    const double p2 = spec.p(j) * spec.p(j);
    const auto q = spec.q_row(j);
    for (int r = 0; r < spec.d(); ++r) {
      col[static_cast<std::size_t>(r)] += p2 * q[static_cast<std::size_t>(r)] *
                                          q[static_cast<std::size_t>(r)];
    }
  }
  double best = 0.0;
  for (int r = 0; r < spec.d(); ++r) {
    const double lr = spec.lambda_r(r);
    const double inv = lr > 0.0 ? 1.0 / lr : std::numeric_limits<double>::infinity();
    best = std::max(best, std::min(inv, 1.0) * col[static_cast<std::size_t>(r)] / 7.0);
  }

  BoundReport all_report;
  all_report.name = "lower_all";
  all_report.label = "(1/7) min{1/lambda, 1} sum p_j^2";
  all_report.kind = BoundKind::lower;
  all_report.value = lower_bound_for_subset(spec, all);

  BoundReport single;
  single.name = "lower_single";
  single.label = "(1/7) max_r min{1/lambda_r, 1} sum_j p_j^2 q_jr^2";
  single.kind = BoundKind::lower;
  single.value = best;
  return {all_report, single};
}

std::string to_string(BoundKind kind) {
  return kind == BoundKind::upper ? "upper" : "lower";
}

}  // namespace cpa
