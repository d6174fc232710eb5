#ifndef CPA_BOUNDS_HPP
#define CPA_BOUNDS_HPP

#include <optional>
#include <string>
#include <vector>

#include "cpa/model.hpp"

namespace cpa {

/// g(x) = 2 e^x (e^{-x} - 1 + x) / x^2 for x >= 0. Closed form for
/// x >= 0.5, 30-term series below that to avoid cancellation.
double g_scalar(double x);

/// (e^2 + 1) / 2, the value g(2) used in the order constants.
double g_at_two();

/// c_lambda = 1/2 + max{log(2 lambda), 0}.
double barbour_c(double lambda);

/// Coefficients entering the bounds, all summed j-outer, r-inner.
struct Coefficients {
  double alpha0;
  double beta0;
  double alpha1;
  double beta1;
  double lambda;
  double sum_p2;   // sum_j p_j^2
  double max_p;
  double theta;    // sum_j p_j^2 / lambda (0 when lambda = 0)
};

/// With `parallel`, the per-trial sums are split into chunks on worker
/// threads and combined in chunk order; the result can differ from the
/// sequential sum in the last bits.
Coefficients coefficients(const ModelSpec& spec, bool parallel = false);

double alpha0(const ModelSpec& spec);
double beta0(const ModelSpec& spec);
double alpha1(const ModelSpec& spec);
double beta1(const ModelSpec& spec);

enum class BoundKind { upper, lower };

/// One evaluated bound. Lattice bounds are for the full norm ||F - G||;
/// point-process bounds are for d_TV.
struct BoundReport {
  std::string name;        // stable identifier, e.g. "alpha1_order"
  std::string label;       // short human-readable formula
  BoundKind kind = BoundKind::upper;
  int order = -1;          // ell for order-dependent bounds, -1 otherwise
  bool applicable = true;
  double value = 0.0;      // meaningful only when applicable
  std::string condition;   // applicability condition, empty if none
};

/// Constants of the order-ell beta bound ||F - G_ell|| <= c_ell beta1^{ell+1}.
struct OrderConstants {
  int order;
  std::vector<double> D_raw;   // D_1..D_9 straight from the split parameters
  std::vector<double> D;       // D_1..D_9 rounded up to three decimals
  double x;                    // root of h1 = h2 on (0, 1/g(2))
  double c;                    // h2(x) / x^{order+1}
  std::optional<double> published_cap;
};

/// Split parameters (u, v) used for D_k, k = 1..9 (w = 4).
struct SplitRow {
  double u;
  double v;
};
const std::vector<SplitRow>& split_table();

/// C^k / k! with C = max{c_k + c_k' u/v, (2(1-u) + c_k' u v) w}, w = 4, for
/// k <= 9; sqrt((2k)!)/k! for k >= 10. `rounded` rounds k <= 9 up to 1e-3.
double D_constant(int k, bool rounded = true);
/// D_1' = 3.11, D_k' = D_k (g(2)/2)^k for k >= 2.
double D_prime(int k);

/// h1(x) = sum_{k > ell} D_k' x^k, summed until a term falls below 1e-15 of
/// the partial sum. Throws ConvergenceError if that takes too long.
double h1(int ell, double x);
/// h2(x) = 2 + sum_{1 <= k <= ell} D_k' x^k.
double h2(int ell, double x);

/// Bisection for x_ell to 1e-12. Throws ConvergenceError when no bracket
/// can be established inside (0, 1/g(2)).
OrderConstants order_constants(int ell);

/// Caps 15.6, 113.0, 633.8, 3204.8, 15945.6 for ell = 0..4.
std::optional<double> published_c_cap(int ell);

/// Every upper bound, order-dependent ones for ell = 0..ell_max. Bounds
/// whose condition fails are returned with applicable = false.
std::vector<BoundReport> upper_bounds(const ModelSpec& spec, int ell_max,
                                      bool parallel = false);

/// (1/7) min{1/lambda~, 1} sum_j p~_j^2 for J = all categories and the best
/// single category.
std::vector<BoundReport> lower_bounds(const ModelSpec& spec);

/// Value of lower bound for a specific category subset J (zero-based).
double lower_bound_for_subset(const ModelSpec& spec, const std::vector<int>& subset);

std::string to_string(BoundKind kind);

}  // namespace cpa

#endif  // CPA_BOUNDS_HPP
