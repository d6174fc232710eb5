#ifndef CPA_MEASURE_HPP
#define CPA_MEASURE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cpa {

/// A point of the lattice Z_+^d.
class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(std::vector<std::uint32_t> coords);
  LatticePoint(std::initializer_list<std::uint32_t> coords);

  static LatticePoint origin(int dim);
  /// Unit vector e_r, with r zero-based.
  static LatticePoint unit(int dim, int r);

  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  std::uint32_t operator[](int r) const { return coords_[static_cast<std::size_t>(r)]; }
  std::span<const std::uint32_t> coords() const noexcept { return coords_; }

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;

 private:
  std::vector<std::uint32_t> coords_;
};

LatticePoint operator+(const LatticePoint& a, const LatticePoint& b);

/// One stored atom: packed lattice coordinates and a nonzero weight.
struct Atom {
  std::uint64_t key;
  double weight;
};

/// Finite signed measure on Z_+^d with finitely many atoms.
///
/// Atoms are kept sorted by packed key, and the packing places coordinate 0
/// in the most significant bits, so key order is lexicographic order of the
/// points. Every norm or mass is summed in that order. `trunc_budget` is an
/// upper bound on the total variation norm of whatever was discarded on the
/// way to this value (series tails, pruned atoms, truncated factors); the
/// measure being approximated lies within that distance of this one.
///
/// Each coordinate is packed into 64/d bits, so coordinates are limited to
/// coord_limit(); operations that would exceed it throw ResourceError.
class SignedMeasure {
 public:
  /// The zero measure on Z_+^dim.
  explicit SignedMeasure(int dim = 1);

  static SignedMeasure from_points(
      int dim, std::span<const std::pair<LatticePoint, double>> points,
      double trunc_budget = 0.0);
  static SignedMeasure from_points(
      int dim, std::initializer_list<std::pair<LatticePoint, double>> points,
      double trunc_budget = 0.0);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool is_zero() const noexcept { return atoms_.empty(); }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  double trunc_budget() const noexcept { return budget_; }

  /// Largest coordinate r over all atoms (0 for the zero measure).
  std::span<const std::uint32_t> extent() const noexcept { return extent_; }
  std::uint32_t coord_limit() const noexcept;

  double weight(const LatticePoint& x) const;
  std::uint64_t key(const LatticePoint& x) const;
  LatticePoint point(std::uint64_t key) const;

  /// Copy with the budget raised by `extra` (must be >= 0).
  SignedMeasure with_added_budget(double extra) const;

  /// Assembles a measure from atoms with unique keys in any order. Exact
  /// zeros are dropped.
  static SignedMeasure assemble(int dim, std::vector<Atom> atoms,
                                double trunc_budget);

 private:
  int dim_;
  int bits_;
  std::vector<Atom> atoms_;
  std::vector<std::uint32_t> extent_;
  double budget_ = 0.0;
};

SignedMeasure dirac(const LatticePoint& x);
SignedMeasure zero_measure(int dim);

struct WeightedMeasure {
  double scalar;
  const SignedMeasure& measure;
};

/// sum_i scalar_i * V_i. Budgets combine as sum |scalar_i| * budget_i.
SignedMeasure linear_combine(std::span<const WeightedMeasure> terms);
SignedMeasure linear_combine(std::initializer_list<WeightedMeasure> terms);

SignedMeasure operator+(const SignedMeasure& a, const SignedMeasure& b);
SignedMeasure operator-(const SignedMeasure& a, const SignedMeasure& b);
SignedMeasure operator*(double s, const SignedMeasure& v);

/// Convolution product. Budget: b(V)||W|| + b(W)||V|| + b(V)b(W).
SignedMeasure convolve(const SignedMeasure& v, const SignedMeasure& w);

/// V^m by repeated convolution; V^0 = delta_0.
SignedMeasure power(const SignedMeasure& v, int m);

/// Upper bound on the atom count of convolve(v, w): the smaller of the
/// product of atom counts and the bounding-box volume.
double predicted_support(const SignedMeasure& v, const SignedMeasure& w);

/// Power series sum_m a_m z^m with a certifiable tail.
///
/// `ratio_bound(m)` must bound sup_{i >= m} |a_{i+1} / a_i| and be
/// nonincreasing in m; the tail after the partial sum of order M at
/// radius r is then at most |a_{M+1}| r^{M+1} / (1 - r ratio_bound(M+1)).
struct SeriesSpec {
  std::string name;
  std::function<double(int)> coefficient;
  std::function<double(int)> log_abs_coefficient;
  std::function<double(int)> ratio_bound;
  double radius = std::numeric_limits<double>::infinity();

  /// Certified bound on sum_{m > order} |a_m| r^m.
  double tail_bound(int order, double r) const;
  /// Smallest order whose tail at r is <= tol.
  int truncation_order(double r, double tol) const;
  /// Scalar evaluation of the partial sum of the given order.
  double partial_sum(double z, int order) const;
};

SeriesSpec exp_series();
/// g(z) = 2 e^z (e^{-z} - 1 + z) / z^2 = 2 sum_{m>=2} (m-1)/m! z^{m-2}.
SeriesSpec g_series();

/// sum_{m <= M} a_m V^m with M chosen so the tail at ||V|| + budget(V) is
/// <= tol; the tail bound is added to the budget. Throws ConvergenceError
/// when ||V|| reaches the radius of convergence, ValidationError on tol <= 0.
SignedMeasure series_apply(const SeriesSpec& s, const SignedMeasure& v, double tol);
SignedMeasure exp_measure(const SignedMeasure& v, double tol);

double tv_norm(const SignedMeasure& v);
double total_mass(const SignedMeasure& v);

/// Drops atoms with |weight| < eps, adding their absolute sum to the budget.
SignedMeasure prune(const SignedMeasure& v, double eps);

/// Product of independent Po(rates[r]) laws on Z_+^d, i.e.
/// exp(sum_r rates[r] (delta_{e_r} - delta_0)), built from the pmf and
/// truncated per coordinate so the discarded mass is <= tol.
SignedMeasure poisson_product(std::span<const double> rates, double tol);

}  // namespace cpa

#endif  // CPA_MEASURE_HPP
