#ifndef CPA_MODEL_HPP
#define CPA_MODEL_HPP

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "cpa/measure.hpp"

namespace cpa {

/// Generalized multinomial model: n independent trials, trial j succeeds
/// with probability p_j and then lands in category r with probability
/// q_{j,r}. Categories are indexed 0..d-1, trials 0..n-1.
///
/// Invariants checked on construction: p_j, q_{j,r} in [0,1]; each row of q
/// sums to 1 within 1e-12; lambda_r = sum_j p_j q_{j,r} > 0 for every r,
/// unless every p_j is zero (the degenerate model F = G = delta_0).
class ModelSpec {
 public:
  ModelSpec(std::vector<double> p, std::vector<std::vector<double>> q);

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  double p(int j) const { return p_[static_cast<std::size_t>(j)]; }
  double q(int j, int r) const {
    return q_[static_cast<std::size_t>(j) * static_cast<std::size_t>(d_) +
              static_cast<std::size_t>(r)];
  }
  std::span<const double> p() const noexcept { return p_; }
  std::span<const double> q_row(int j) const {
    return std::span<const double>(q_).subspan(
        static_cast<std::size_t>(j) * static_cast<std::size_t>(d_),
        static_cast<std::size_t>(d_));
  }
  std::span<const double> lambda_r() const noexcept { return lambda_r_; }
  double lambda_r(int r) const { return lambda_r_[static_cast<std::size_t>(r)]; }
  double lambda() const noexcept { return lambda_; }
  bool degenerate() const noexcept { return lambda_ == 0.0; }

 private:
  int n_;
  int d_;
  std::vector<double> p_;
  std::vector<double> q_;
  std::vector<double> lambda_r_;
  double lambda_;
};

/// n = d = 1000, p_{j,r} = 1e-4 / (|j - r|^{1/2} + 0.1), p_j = sum_r p_{j,r},
/// q_{j,r} = p_{j,r} / p_j.
ModelSpec paper_example_model();

/// Random model for verification suites: p_j uniform on [0, p_max] (at least
/// one positive), q rows random on the simplex, occasionally sparse.
ModelSpec random_model(int n, int d, std::mt19937_64& rng, double p_max = 0.5);

/// Tuning for the exact (desk-scale) constructions.
struct ExactOptions {
  double tol = 1e-12;          // per exponential / per Poisson product
  double prune_eps = 1e-18;    // atoms below this are dropped into the budget
  double support_cap = 2.0e6;  // refuse constructions predicted to exceed this
  bool parallel = false;       // build V_j concurrently (same result)
};

/// F = prod_j (delta_0 + R_j), R_j = p_j (Q_j - delta_0), Q_j = sum_r q_{j,r} delta_{e_r}.
SignedMeasure build_F(const ModelSpec& spec, const ExactOptions& opts = {});
/// R_j for trial j (zero-based).
SignedMeasure build_R(const ModelSpec& spec, int j);
/// G_0 = exp(lambda (Q - delta_0)) = product of Po(lambda_r).
SignedMeasure build_G0(const ModelSpec& spec, double tol);
/// V_j = F_j exp(-R_j) - delta_0.
SignedMeasure build_V(const ModelSpec& spec, int j, double tol);

/// V_j, power sums Gamma_k = sum_j V_j^k and elementary symmetric sums M_k
/// up to a fixed order, with M_k from Newton's identity
///   M_k = (1/k) sum_{i=1}^k (-1)^{i-1} M_{k-i} Gamma_i.
class Expansion {
 public:
  Expansion(const ModelSpec& spec, int max_order, const ExactOptions& opts = {});

  int max_order() const noexcept { return max_order_; }
  const SignedMeasure& V(int j) const { return v_.at(static_cast<std::size_t>(j)); }
  /// Gamma_k, 1 <= k <= max_order.
  const SignedMeasure& gamma(int k) const { return gamma_.at(static_cast<std::size_t>(k)); }
  /// M_k, 0 <= k <= max_order.
  const SignedMeasure& M(int k) const { return m_.at(static_cast<std::size_t>(k)); }

 private:
  int max_order_;
  std::vector<SignedMeasure> v_;
  std::vector<SignedMeasure> gamma_;
  std::vector<SignedMeasure> m_;
};

SignedMeasure gamma_sum(const ModelSpec& spec, int k, double tol);
SignedMeasure newton_M(const ModelSpec& spec, int k, double tol);

/// G_ell = (sum_{k<=ell} M_k) G_0.
SignedMeasure build_G_ell(const ModelSpec& spec, int ell, const ExactOptions& opts = {});

struct ExactTvResult {
  double distance;   // ||F - G_ell||, full norm
  double error_bar;  // accumulated truncation budget
  int ell;
};

ExactTvResult exact_tv(const ModelSpec& spec, int ell, const ExactOptions& opts = {});
/// exact_tv for ell = 0..ell_max (clamped to n), sharing G_0 and the expansion.
std::vector<ExactTvResult> exact_tv_orders(const ModelSpec& spec, int ell_max,
                                           const ExactOptions& opts = {});

/// Image of v under x -> sum_{r in J} x_r, a measure on Z_+. J holds
/// zero-based coordinate indices and must be nonempty.
SignedMeasure marginalize(const SignedMeasure& v, std::span<const int> coords);

}  // namespace cpa

#endif  // CPA_MODEL_HPP
