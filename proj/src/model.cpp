#include "cpa/model.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "cpa/error.hpp"
#include "cpa/poisson.hpp"

namespace cpa {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SignedMeasure checked_convolve(const SignedMeasure& a, const SignedMeasure& b,
                               double cap) {
  const double predicted = predicted_support(a, b);
  if (predicted > cap) {
    throw ResourceError("predicted support " + fmt_double(predicted) +
                        " exceeds cap " + fmt_double(cap));
  }
  return convolve(a, b);
}

SignedMeasure origin_dirac(int d) { return dirac(LatticePoint::origin(d)); }

// delta_0 + R_j, assembled directly from the trial's probabilities.
SignedMeasure build_Fj(const ModelSpec& spec, int j) {
  const int d = spec.d();
  std::vector<std::pair<LatticePoint, double>> pts;
  pts.emplace_back(LatticePoint::origin(d), 1.0 - spec.p(j));
  for (int r = 0; r < d; ++r) {
    pts.emplace_back(LatticePoint::unit(d, r), spec.p(j) * spec.q(j, r));
  }
  return SignedMeasure::from_points(d, pts);
}

double binomial_double(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec::ModelSpec(std::vector<double> p, std::vector<std::vector<double>> q)
    : n_(static_cast<int>(p.size())), d_(0), p_(std::move(p)) {
  if (n_ < 1) throw ValidationError("p: need at least one trial (n >= 1)");
  if (q.size() != p_.size()) {
    throw ValidationError("q: expected " + std::to_string(n_) + " rows, got " +
                          std::to_string(q.size()));
  }
  d_ = static_cast<int>(q.front().size());
  if (d_ < 1) throw ValidationError("q[0]: need at least one category (d >= 1)");

  q_.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_));
  for (int j = 0; j < n_; ++j) {
    const double pj = p_[static_cast<std::size_t>(j)];
    if (!(pj >= 0.0 && pj <= 1.0)) {
      throw ValidationError("p[" + std::to_string(j) + "] = " + fmt_double(pj) +
                            " outside [0,1]");
    }
    const auto& row = q[static_cast<std::size_t>(j)];
    if (static_cast<int>(row.size()) != d_) {
      throw ValidationError("q[" + std::to_string(j) + "]: row length " +
                            std::to_string(row.size()) + ", expected d = " +
                            std::to_string(d_));
    }
    double sum = 0.0;
    for (int r = 0; r < d_; ++r) {
      const double x = row[static_cast<std::size_t>(r)];
      if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("q[" + std::to_string(j) + "][" + std::to_string(r) +
                              "] = " + fmt_double(x) + " outside [0,1]");
      }
      sum += x;
      q_.push_back(x);
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw ValidationError("q[" + std::to_string(j) + "]: row sums to " +
                            fmt_double(sum) + ", expected 1 within 1e-12");
    }
  }

  lambda_r_.assign(static_cast<std::size_t>(d_), 0.0);
  lambda_ = 0.0;
  for (int j = 0; j < n_; ++j) {
    lambda_ += p_[static_cast<std::size_t>(j)];
    for (int r = 0; r < d_; ++r) {
      lambda_r_[static_cast<std::size_t>(r)] += p_[static_cast<std::size_t>(j)] * this->q(j, r);
    }
  }
  if (lambda_ > 0.0) {
    for (int r = 0; r < d_; ++r) {
      if (!(lambda_r_[static_cast<std::size_t>(r)] > 0.0)) {
        throw ValidationError("category " + std::to_string(r) +
                              " has lambda_r = 0; every category needs positive mass");
      }
    }
  }
}

ModelSpec paper_example_model() {
  constexpr int n = 1000;
  constexpr int d = 1000;
  std::vector<double> p(n);
  std::vector<std::vector<double>> q(n, std::vector<double>(d));
  for (int j = 0; j < n; ++j) {
    auto& row = q[static_cast<std::size_t>(j)];
    double sum = 0.0;
    for (int r = 0; r < d; ++r) {
      const double pjr = 1e-4 / (std::sqrt(std::abs(static_cast<double>(j - r))) + 0.1);
      row[static_cast<std::size_t>(r)] = pjr;
      sum += pjr;
    }
    for (double& x : row) x /= sum;
    p[static_cast<std::size_t>(j)] = sum;
  }
  return ModelSpec(std::move(p), std::move(q));
}

ModelSpec random_model(int n, int d, std::mt19937_64& rng, double p_max) {
  if (n < 1 || d < 1) throw ValidationError("random_model: n and d must be >= 1");
  if (!(p_max > 0.0 && p_max <= 1.0)) throw ValidationError("random_model: p_max in (0,1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (;;) {
    std::vector<double> p(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> q(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(d)));
    for (int j = 0; j < n; ++j) {
      p[static_cast<std::size_t>(j)] = p_max * unit(rng);
      auto& row = q[static_cast<std::size_t>(j)];
      const bool sparse = d > 1 && unit(rng) < 0.25;
      double sum = 0.0;
      for (int r = 0; r < d; ++r) {
        double x = expo(rng);
        if (sparse && unit(rng) < 0.5) x = 0.0;
        row[static_cast<std::size_t>(r)] = x;
        sum += x;
      }
      if (sum == 0.0) {
        row[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, d - 1)(rng))] = 1.0;
        sum = 1.0;
      }
      for (double& x : row) x /= sum;
    }
    bool ok = true;
    for (int r = 0; r < d && ok; ++r) {
      double lr = 0.0;
      for (int j = 0; j < n; ++j) {
        lr += p[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
      }
      ok = lr > 0.0;
    }
    if (ok) return ModelSpec(std::move(p), std::move(q));
  }
}

// ---------------------------------------------------------------------------
// Constructions

SignedMeasure build_F(const ModelSpec& spec, const ExactOptions& opts) {
  const double predicted =
      std::min(binomial_double(spec.n() + spec.d(), spec.d()),
               std::pow(spec.n() + 1.0, spec.d()));
  if (predicted > opts.support_cap) {
    throw ResourceError("build_F: predicted support " + fmt_double(predicted) +
                        " exceeds cap " + fmt_double(opts.support_cap));
  }
  SignedMeasure f = origin_dirac(spec.d());
  for (int j = 0; j < spec.n(); ++j) f = convolve(f, build_Fj(spec, j));
  return f;
}

SignedMeasure build_R(const ModelSpec& spec, int j) {
  if (j < 0 || j >= spec.n()) throw ValidationError("build_R: trial index out of range");
  const int d = spec.d();
  if (spec.p(j) == 0.0) return zero_measure(d);
  std::vector<std::pair<LatticePoint, double>> pts;
  pts.emplace_back(LatticePoint::origin(d), -spec.p(j));
  for (int r = 0; r < d; ++r) {
    pts.emplace_back(LatticePoint::unit(d, r), spec.p(j) * spec.q(j, r));
  }
  return SignedMeasure::from_points(d, pts);
}

SignedMeasure build_G0(const ModelSpec& spec, double tol) {
  if (!(tol > 0.0)) throw ValidationError("build_G0: tol must be > 0");
  if (spec.degenerate()) return origin_dirac(spec.d());
  return poisson_product(spec.lambda_r(), tol);
}

SignedMeasure build_V(const ModelSpec& spec, int j, double tol) {
  if (j < 0 || j >= spec.n()) throw ValidationError("build_V: trial index out of range");
  if (spec.p(j) == 0.0) return zero_measure(spec.d());
  const SignedMeasure r = build_R(spec, j);
  const SignedMeasure e = exp_measure(-1.0 * r, tol);
  return convolve(build_Fj(spec, j), e) - origin_dirac(spec.d());
}

Expansion::Expansion(const ModelSpec& spec, int max_order, const ExactOptions& opts)
    : max_order_(max_order) {
  if (max_order < 0 || max_order > spec.n()) {
    throw ValidationError("expansion order must lie in [0, n]");
  }
  const int n = spec.n();
  const int d = spec.d();

  if (opts.parallel) {
    std::vector<std::future<SignedMeasure>> jobs;
    jobs.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      jobs.push_back(std::async(std::launch::async, [&spec, j, &opts] {
        return prune(build_V(spec, j, opts.tol), opts.prune_eps);
      }));
    }
    for (auto& job : jobs) v_.push_back(job.get());
  } else {
    for (int j = 0; j < n; ++j) v_.push_back(prune(build_V(spec, j, opts.tol), opts.prune_eps));
  }

  gamma_.push_back(static_cast<double>(n) * origin_dirac(d));
  std::vector<SignedMeasure> powers = v_;
  for (int k = 1; k <= max_order; ++k) {
    if (k > 1) {
      for (int j = 0; j < n; ++j) {
        auto& pj = powers[static_cast<std::size_t>(j)];
        pj = prune(checked_convolve(pj, v_[static_cast<std::size_t>(j)], opts.support_cap),
                   opts.prune_eps);
      }
    }
    std::vector<WeightedMeasure> terms;
    for (const auto& pj : powers) terms.push_back({1.0, pj});
    gamma_.push_back(linear_combine(terms));
  }

  m_.push_back(origin_dirac(d));
  for (int k = 1; k <= max_order; ++k) {
    std::vector<SignedMeasure> products;
    products.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
      products.push_back(checked_convolve(m_[static_cast<std::size_t>(k - i)],
                                          gamma_[static_cast<std::size_t>(i)],
                                          opts.support_cap));
    }
    std::vector<WeightedMeasure> terms;
    for (int i = 1; i <= k; ++i) {
      const double sign = (i % 2 == 1) ? 1.0 : -1.0;
      terms.push_back({sign / k, products[static_cast<std::size_t>(i - 1)]});
    }
    m_.push_back(prune(linear_combine(terms), opts.prune_eps));
  }
}

SignedMeasure gamma_sum(const ModelSpec& spec, int k, double tol) {
  if (k < 0 || k > spec.n()) throw ValidationError("gamma_sum: k must lie in [0, n]");
  ExactOptions opts;
  opts.tol = tol;
  return Expansion(spec, k, opts).gamma(k);
}

SignedMeasure newton_M(const ModelSpec& spec, int k, double tol) {
  if (k < 0 || k > spec.n()) throw ValidationError("newton_M: k must lie in [0, n]");
  ExactOptions opts;
  opts.tol = tol;
  return Expansion(spec, k, opts).M(k);
}

namespace {

// H_k = M_k G_0 for k = 0..ell_max.
std::vector<SignedMeasure> build_H(const ModelSpec& spec, int ell_max,
                                   const ExactOptions& opts) {
  const SignedMeasure g0 = build_G0(spec, opts.tol);
  std::vector<SignedMeasure> h{g0};
  if (ell_max == 0) return h;
  const Expansion ex(spec, ell_max, opts);
  for (int k = 1; k <= ell_max; ++k) {
    h.push_back(prune(checked_convolve(ex.M(k), g0, opts.support_cap), opts.prune_eps));
  }
  return h;
}

void check_g0_cap(const ModelSpec& spec, const ExactOptions& opts) {
  if (spec.degenerate()) return;
  double predicted = 1.0;
  for (double t : spec.lambda_r()) {
    predicted *= static_cast<double>(poisson_truncation_point(t, opts.tol / spec.d())) + 1.0;
  }
  if (predicted > opts.support_cap) {
    throw ResourceError("G_0: predicted support " + fmt_double(predicted) +
                        " exceeds cap " + fmt_double(opts.support_cap));
  }
}

}  // namespace

SignedMeasure build_G_ell(const ModelSpec& spec, int ell, const ExactOptions& opts) {
  if (ell < 0 || ell > spec.n()) throw ValidationError("build_G_ell: ell must lie in [0, n]");
  check_g0_cap(spec, opts);
  const auto h = build_H(spec, ell, opts);
  std::vector<WeightedMeasure> terms;
  for (const auto& hk : h) terms.push_back({1.0, hk});
  return linear_combine(terms);
}

ExactTvResult exact_tv(const ModelSpec& spec, int ell, const ExactOptions& opts) {
  if (ell < 0 || ell > spec.n()) throw ValidationError("exact_tv: ell must lie in [0, n]");
  return exact_tv_orders(spec, ell, opts).back();
}

std::vector<ExactTvResult> exact_tv_orders(const ModelSpec& spec, int ell_max,
                                           const ExactOptions& opts) {
  if (ell_max < 0) throw ValidationError("exact_tv: ell must be >= 0");
  ell_max = std::min(ell_max, spec.n());
  const SignedMeasure f = build_F(spec, opts);
  check_g0_cap(spec, opts);
  const auto h = build_H(spec, ell_max, opts);

  std::vector<ExactTvResult> out;
  SignedMeasure g = h.front();
  for (int ell = 0; ell <= ell_max; ++ell) {
    if (ell > 0) g = g + h[static_cast<std::size_t>(ell)];
    const SignedMeasure diff = f - g;
    out.push_back({tv_norm(diff), diff.trunc_budget(), ell});
  }
  return out;
}

SignedMeasure marginalize(const SignedMeasure& v, std::span<const int> coords) {
  if (coords.empty()) throw ValidationError("marginalize: coordinate set J is empty");
  std::vector<bool> seen(static_cast<std::size_t>(v.dim()), false);
  for (int r : coords) {
    if (r < 0 || r >= v.dim()) throw ValidationError("marginalize: coordinate out of range");
    if (seen[static_cast<std::size_t>(r)]) {
      throw ValidationError("marginalize: repeated coordinate in J");
    }
    seen[static_cast<std::size_t>(r)] = true;
  }
  std::vector<std::pair<LatticePoint, double>> pts;
  pts.reserve(v.size());
  for (const Atom& a : v.atoms()) {
    const LatticePoint x = v.point(a.key);
    std::uint32_t s = 0;
    for (int r : coords) s += x[r];
    pts.emplace_back(LatticePoint{s}, a.weight);
  }
  return SignedMeasure::from_points(1, pts, v.trunc_budget());
}

}  // namespace cpa
