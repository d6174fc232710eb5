#ifndef CPA_POINTPROCESS_HPP
#define CPA_POINTPROCESS_HPP

#include <vector>

#include "cpa/bounds.hpp"

namespace cpa {

/// Tabulated reference measure on the line: atoms x_i with weights
/// nu({x_i}) = weights_i >= 0.
struct Grid {
  std::vector<double> x;
  std::vector<double> weights;
};

/// Bernoulli point process xi = sum_j Z_j delta_{X_j}, P(Z_j = 1) = p_j in
/// (0,1], X_j with density h_j w.r.t. nu. The densities are either
/// exponential, h_j(x) = t_j e^{-t_j x} on (0, inf) w.r.t. Lebesgue measure,
/// or tabulated on a common grid.
class PointProcessSpec {
 public:
  static PointProcessSpec exponential(std::vector<double> p, std::vector<double> rates);
  /// Each density must integrate to 1 within 1e-6 against the grid weights.
  static PointProcessSpec tabulated(std::vector<double> p, Grid grid,
                                    std::vector<std::vector<double>> densities);

  int n() const noexcept { return static_cast<int>(p_.size()); }
  double p(int j) const { return p_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& p() const noexcept { return p_; }
  double lambda() const noexcept { return lambda_; }
  bool is_exponential() const noexcept { return !rates_.empty(); }
  const std::vector<double>& rates() const noexcept { return rates_; }
  const Grid& grid() const noexcept { return grid_; }
  const std::vector<std::vector<double>>& densities() const noexcept { return densities_; }

 private:
  PointProcessSpec() = default;

  std::vector<double> p_;
  double lambda_ = 0.0;
  std::vector<double> rates_;
  Grid grid_;
  std::vector<std::vector<double>> densities_;
};

struct PpOptions {
  /// Midpoint cells on (0, x_max) for exponential densities, where
  /// x_max = log(1e10) / min_j t_j.
  int resolution = 100000;
  bool parallel = false;
};

struct PpCoefficients {
  double alpha1 = 0.0;       // alpha~_1
  double beta1 = 0.0;        // beta~_1
  double lambda = 0.0;
  double sum_p2 = 0.0;
  std::vector<double> phi;            // ess sup h_j / h
  std::vector<double> ratio_integral; // int_{h>0} h_j^2 / h
  double phi_sum = 0.0;               // sum_j p_j^2 phi_j^2
  int resolution = 0;                 // cells used (grid size when tabulated)
};

PpCoefficients pp_coefficients(const PointProcessSpec& spec, const PpOptions& opts = {});

/// d_TV bounds: alpha~_1/(1 - 2^{3/2} alpha~_1) (gated), 7.8 beta~_1, the Le
/// Cam bound sum p_j^2 and (c_lambda/lambda) sum p_j^2 phi_j^2. Applicable
/// bounds come first, sorted by value.
std::vector<BoundReport> pp_bounds(const PointProcessSpec& spec, const PpOptions& opts = {});
std::vector<BoundReport> pp_bounds(const PpCoefficients& c);

}  // namespace cpa

#endif  // CPA_POINTPROCESS_HPP
