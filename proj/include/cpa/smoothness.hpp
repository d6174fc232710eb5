#ifndef CPA_SMOOTHNESS_HPP
#define CPA_SMOOTHNESS_HPP

#include <random>
#include <vector>

#include "cpa/measure.hpp"

namespace cpa {

/// Ch(j, x, t) = sum_{i=0}^j C(j,i) C(x,i) i! (-t)^{j-i}, with the
/// generalized binomial C(x,i) = prod_{l=1}^i (x - l + 1)/l.
double charlier(int j, double x, double t);

/// Delta^j po(m,t) from the recursion
/// Delta^j po(m,t) = Delta^{j-1} po(m-1,t) - Delta^{j-1} po(m,t),
/// i.e. sum_i C(j,i) (-1)^{j-i} po(m-i, t).
double poisson_difference(int j, long m, double t);

struct OrthogonalityReport {
  int i = 0;
  int j = 0;
  double t = 0.0;
  long M = 0;              // last summed index
  double sum = 0.0;        // sum_{m<=M} po(m,t) Ch(i,m,t) Ch(j,m,t)
  double expected = 0.0;   // 1{i=j} i! t^i
  double tail = 0.0;       // certified bound on the omitted terms
  double rounding = 0.0;   // floating-point allowance
  bool pass = false;       // |sum - expected| <= tail + rounding
};

/// Truncated orthogonality sum. With M < 0 the cut point is chosen so the
/// certified tail is at most tol. The tail uses |Ch(i,m,t)| <= (m+t)^i and a
/// geometric majorant of the remaining terms.
OrthogonalityReport verify_orthogonality(int i, int j, double t, long M = -1,
                                         double tol = 1e-14);

/// Coefficients p_{j,r} (k rows, d columns, any sign) and intensities
/// lambda_r > 0. Builds R_j = sum_r p_{j,r} (delta_{e_r} - delta_0) and
/// G = exp(sum_r lambda_r (delta_{e_r} - delta_0)).
class SmoothnessInstance {
 public:
  SmoothnessInstance(std::vector<std::vector<double>> coeff, std::vector<double> lambda);

  int k() const noexcept { return k_; }
  int d() const noexcept { return d_; }
  double coeff(int j, int r) const {
    return coeff_[static_cast<std::size_t>(j) * static_cast<std::size_t>(d_) +
                  static_cast<std::size_t>(r)];
  }
  double lambda(int r) const { return lambda_[static_cast<std::size_t>(r)]; }
  const std::vector<double>& lambdas() const noexcept { return lambda_; }
  /// p_j = sum_r |p_{j,r}|
  double p(int j) const;

  SignedMeasure R(int j) const;

 private:
  int k_;
  int d_;
  std::vector<double> coeff_;
  std::vector<double> lambda_;
};

/// Random instance: lambda_r uniform on [0.2, 3], coefficients uniform on
/// [-0.5, 0.5] (or [0, 0.5] when nonnegative).
SmoothnessInstance random_smoothness_instance(int k, int d, std::mt19937_64& rng,
                                              bool nonnegative);

struct NormValue {
  double norm;
  double error_bar;
};

/// ||(prod_j R_j) G||, or ||(prod_j R_j^2) G|| with `squares`. G is
/// truncated at tol; the error bar is the propagated budget.
NormValue norm_product_exact(const SmoothnessInstance& inst, bool squares,
                             double tol = 1e-13);

/// Middle expression of the Charlier norm bound,
/// (1/k! sum_{r in [d]^k} (sum_{sigma in S_k} prod_j a_{j, r_sigma(j)})^2)^{1/2}
/// with a_{j,r} = p_{j,r}/sqrt(lambda_r). Enumerates, so k <= 6.
double charlier_middle(const SmoothnessInstance& inst);
/// sqrt(k!) prod_j (sum_r p_{j,r}^2/lambda_r)^{1/2}
double charlier_right(const SmoothnessInstance& inst);

struct SplitParams {
  std::vector<double> u;  // in [0, 1/2]
  std::vector<double> v;  // > 0
  std::vector<double> w;  // > 0
};

/// C_j = max{c_k + c_k' u_j/v_j, (2(1-u_j) + c_k' u_j v_j) w_j}.
std::vector<double> split_constants(int k, const SplitParams& params);
/// prod_j C_j sum_r |p_{j,r}| min{|p_{j,r}|/lambda_r, 4 p_j/w_j}
double split_bound(const SmoothnessInstance& inst, const SplitParams& params);
/// D_k k! prod_j sum_r |p_{j,r}| min{|p_{j,r}|/lambda_r, p_j}
double squares_bound(const SmoothnessInstance& inst);

/// f(x) = x log(1 + 1/(x-1)) - 1 on (1, inf), evaluated in log form.
double log_form_f(double x);

struct ExpansionConstants {
  double C;
  double w0;
};

/// C = max{(sqrt 2 + u/v)(2/w), 4(1-u) + 2uv} and the root w0 of
/// f(w0) = 2/w, found by bisection to 1e-12.
ExpansionConstants expansion_constants(double u = 0.5, double v = 0.47248, double w = 2.0);

/// Single-trial instance for the first-order expansion bound: p_r >= 0 with
/// sum p_r <= 1 and lambda_r >= p_r.
struct SingleTrial {
  std::vector<double> p;
  std::vector<double> lambda;
};

SingleTrial random_single_trial(int d, std::mt19937_64& rng);

/// ||((delta_0 + R) e^{-R} - delta_0) G||
NormValue expansion_norm_exact(const SingleTrial& inst, double tol = 1e-13);
/// C sum_r p_r min{w0 p_r/lambda_r, p}
double expansion_bound(const SingleTrial& inst, const ExpansionConstants& c);
/// 3.11 sum_r p_r min{p_r/lambda_r, p}
double expansion_bound_final(const SingleTrial& inst);

struct FactorialCheck {
  int cases = 0;
  int violations = 0;
  int equalities = 0;  // cases equal within rounding
  int first_k = -1, first_m1 = -1, first_m2 = -1;  // first violation
};

/// (2 m1 + m2)! <= ((2k)!)^{m1/k} ((2k-1)!)^{m2/(2k)} for every k <= kmax,
/// m1 + m2 <= k, compared in log space.
FactorialCheck check_factorial_inequality(int kmax);

}  // namespace cpa

#endif  // CPA_SMOOTHNESS_HPP
