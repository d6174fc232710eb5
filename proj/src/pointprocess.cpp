#include "cpa/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <thread>

#include "cpa/error.hpp"

namespace cpa {

namespace {

const double kTwoPow32 = std::pow(2.0, 1.5);

void check_p(const std::vector<double>& p) {
  if (p.empty()) throw ValidationError("point process needs at least one source");
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0 && p[j] <= 1.0)) {
      throw ValidationError("p[" + std::to_string(j) + "] must lie in (0, 1]");
    }
  }
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// D(x) = sum_i p_i (t_i/t_j) e^{(t_j - t_i) x}; h_j/h = lambda / D.
double ratio_denominator(const std::vector<double>& p, const std::vector<double>& t,
                         std::size_t j, double x) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p[i] * (t[i] / t[j]) * std::exp((t[j] - t[i]) * x);
  }
  return s;
}

double ratio_denominator_slope(const std::vector<double>& p, const std::vector<double>& t,
                               std::size_t j, double x) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p[i] * (t[i] / t[j]) * (t[j] - t[i]) * std::exp((t[j] - t[i]) * x);
  }
  return s;
}

// inf over x >= 0 of the convex function D.
double min_denominator(const std::vector<double>& p, const std::vector<double>& t,
                       std::size_t j) {
  if (ratio_denominator_slope(p, t, j, 0.0) >= 0.0) return ratio_denominator(p, t, j, 0.0);
  bool any_faster = false;
  for (double ti : t) any_faster = any_faster || ti < t[j];
  if (!any_faster) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (t[i] == t[j]) s += p[i];
    }
    return s;
  }
  double hi = 1.0;
  while (ratio_denominator_slope(p, t, j, hi) < 0.0) hi *= 2.0;
  double lo = 0.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = ratio_denominator(p, t, j, a);
  double fb = ratio_denominator(p, t, j, b);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = ratio_denominator(p, t, j, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = ratio_denominator(p, t, j, b);
    }
  }
  return std::min({fa, fb, ratio_denominator(p, t, j, 0.5 * (lo + hi))});
}

struct Partial {
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double ratio = 0.0;
};

// Contribution of source j: integrals over the grid cells (points, weights).
template <class Density, class Mixture>
Partial integrate_source(std::size_t j, double lambda, std::size_t cells,
                         const Density& hj, const Mixture& h,
                         const std::vector<double>& weights) {
  double ia = 0.0, ib = 0.0, ir = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double hm = h(i);
    if (!(hm > 0.0) || !(weights[i] > 0.0)) continue;
    const double v = hj(j, i);
    const double q = v / (lambda * hm);
    ia += weights[i] * v * std::min(q / kTwoPow32, 2.0);
    ib += weights[i] * v * std::min(q, 1.0);
    ir += weights[i] * v * v / hm;
  }
  return {ia, ib, ir};
}

}  // namespace

PointProcessSpec PointProcessSpec::exponential(std::vector<double> p, std::vector<double> rates) {
  check_p(p);
  if (rates.size() != p.size()) {
    throw ValidationError("exponential_rates has " + std::to_string(rates.size()) +
                          " entries, p has " + std::to_string(p.size()));
  }
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (!(rates[j] > 0.0) || !std::isfinite(rates[j])) {
      throw ValidationError("exponential_rates[" + std::to_string(j) + "] must be finite and > 0");
    }
  }
  PointProcessSpec s;
  s.lambda_ = sum_of(p);
  s.p_ = std::move(p);
  s.rates_ = std::move(rates);
  return s;
}

PointProcessSpec PointProcessSpec::tabulated(std::vector<double> p, Grid grid,
                                             std::vector<std::vector<double>> densities) {
  check_p(p);
  if (grid.x.empty() || grid.x.size() != grid.weights.size()) {
    throw ValidationError("grid.x and grid.weights must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < grid.weights.size(); ++i) {
    if (!(grid.weights[i] >= 0.0) || !std::isfinite(grid.weights[i])) {
      throw ValidationError("grid.weights[" + std::to_string(i) + "] must be finite and >= 0");
    }
  }
  if (densities.size() != p.size()) {
    throw ValidationError("densities has " + std::to_string(densities.size()) +
                          " rows, p has " + std::to_string(p.size()));
  }
  for (std::size_t j = 0; j < densities.size(); ++j) {
    const auto& row = densities[j];
    if (row.size() != grid.x.size()) {
      throw ValidationError("densities[" + std::to_string(j) + "] has " +
                            std::to_string(row.size()) + " values, grid has " +
                            std::to_string(grid.x.size()));
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
        throw ValidationError("densities[" + std::to_string(j) + "][" + std::to_string(i) +
                              "] must be finite and >= 0");
      }
      mass += grid.weights[i] * row[i];
    }
    if (std::abs(mass - 1.0) > 1e-6) {
      throw ValidationError("densities[" + std::to_string(j) + "] integrates to " +
                            std::to_string(mass) + ", expected 1 within 1e-6");
    }
  }
  PointProcessSpec s;
  s.lambda_ = sum_of(p);
  s.p_ = std::move(p);
  s.grid_ = std::move(grid);
  s.densities_ = std::move(densities);
  return s;
}

PpCoefficients pp_coefficients(const PointProcessSpec& spec, const PpOptions& opts) {
  const auto n = static_cast<std::size_t>(spec.n());
  const double lambda = spec.lambda();
  const auto& p = spec.p();

  PpCoefficients c;
  c.lambda = lambda;
  c.phi.assign(n, 0.0);
  c.ratio_integral.assign(n, 0.0);
  for (double x : p) c.sum_p2 += x * x;

  std::vector<double> points;
  std::vector<double> weights;
  std::vector<double> mixture;  // h at each cell
  std::vector<std::vector<double>> dens;

  if (spec.is_exponential()) {
    if (opts.resolution < 1) throw ValidationError("resolution must be >= 1");
    const auto& t = spec.rates();
    const double t_min = *std::min_element(t.begin(), t.end());
    const double x_max = std::log(1e10) / t_min;
    const auto cells = static_cast<std::size_t>(opts.resolution);
    const double h = x_max / static_cast<double>(cells);
    points.resize(cells);
    weights.assign(cells, h);
    for (std::size_t i = 0; i < cells; ++i) points[i] = (static_cast<double>(i) + 0.5) * h;
    dens.assign(n, std::vector<double>(cells));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < cells; ++i) dens[j][i] = t[j] * std::exp(-t[j] * points[i]);
    }
    c.resolution = opts.resolution;
    for (std::size_t j = 0; j < n; ++j) c.phi[j] = lambda / min_denominator(p, t, j);
  } else {
    points = spec.grid().x;
    weights = spec.grid().weights;
    dens = spec.densities();
    c.resolution = static_cast<int>(points.size());
  }

  const std::size_t cells = points.size();
  mixture.assign(cells, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p[j] * dens[j][i];
    mixture[i] = s / lambda;
  }
  if (!spec.is_exponential()) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = 0.0;
      for (std::size_t i = 0; i < cells; ++i) {
        if (weights[i] > 0.0 && mixture[i] > 0.0) best = std::max(best, dens[j][i] / mixture[i]);
      }
      c.phi[j] = best;
    }
  }

  auto hj = [&dens](std::size_t j, std::size_t i) { return dens[j][i]; };
  auto hm = [&mixture](std::size_t i) { return mixture[i]; };
  auto run = [&](std::size_t j) {
    return integrate_source(j, lambda, cells, hj, hm, weights);
  };

  std::vector<Partial> parts(n);
  if (opts.parallel && n > 1) {
    std::vector<std::future<Partial>> jobs;
    for (std::size_t j = 0; j < n; ++j) jobs.push_back(std::async(std::launch::async, run, j));
    for (std::size_t j = 0; j < n; ++j) parts[j] = jobs[j].get();
  } else {
    for (std::size_t j = 0; j < n; ++j) parts[j] = run(j);
  }

  for (std::size_t j = 0; j < n; ++j) {
    const double p2 = p[j] * p[j];
    c.alpha1 += g_scalar(2.0 * p[j]) * p2 * parts[j].alpha1;
    c.beta1 += p2 * parts[j].beta1;
    c.ratio_integral[j] = parts[j].ratio;
    c.phi_sum += p2 * c.phi[j] * c.phi[j];
  }
  return c;
}

std::vector<BoundReport> pp_bounds(const PointProcessSpec& spec, const PpOptions& opts) {
  return pp_bounds(pp_coefficients(spec, opts));
}

std::vector<BoundReport> pp_bounds(const PpCoefficients& c) {
  std::vector<BoundReport> out;
  auto make = [](std::string name, std::string label, double value) {
    BoundReport b;
    b.name = std::move(name);
    b.label = std::move(label);
    b.value = value;
    return b;
  };

  BoundReport a = make("pp_alpha1", "alpha~1/(1-2^(3/2) alpha~1)", 0.0);
  a.condition = "alpha~1 < 2^(-3/2)";
  a.applicable = c.alpha1 < 1.0 / kTwoPow32;
  a.value = a.applicable ? c.alpha1 / (1.0 - kTwoPow32 * c.alpha1)
                         : std::numeric_limits<double>::quiet_NaN();
  out.push_back(a);
  out.push_back(make("pp_beta1", "7.8 beta~1", 7.8 * c.beta1));
  out.push_back(make("pp_le_cam", "sum p_j^2", c.sum_p2));
  out.push_back(make("pp_barbour", "(c_lambda/lambda) sum p_j^2 phi_j^2",
                     barbour_c(c.lambda) / c.lambda * c.phi_sum));
  std::stable_sort(out.begin(), out.end(), [](const BoundReport& x, const BoundReport& y) {
    if (x.applicable != y.applicable) return x.applicable;
    return x.applicable && x.value < y.value;
  });
  return out;
}

}  // namespace cpa
