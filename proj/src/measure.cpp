#include "cpa/measure.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "cpa/error.hpp"
#include "cpa/poisson.hpp"

namespace cpa {

namespace {

constexpr int kMaxDim = 64;

int bits_for(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw ValidationError("lattice dimension must lie in [1, 64], got " +
                          std::to_string(dim));
  }
  return std::min(32, 64 / dim);
}

std::uint32_t limit_for_bits(int bits) {
  return bits >= 32 ? std::numeric_limits<std::uint32_t>::max()
                    : static_cast<std::uint32_t>((std::uint64_t{1} << bits) - 1);
}

void require_same_dim(const SignedMeasure& a, const SignedMeasure& b,
                      const char* op) {
  if (a.dim() != b.dim()) {
    throw ValidationError(std::string(op) + ": dimension mismatch (" +
                          std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
}

// Merges two sorted atom lists as x + s*y, dropping exact zeros.
std::vector<Atom> merge_scaled(std::span<const Atom> x, double s,
                               std::span<const Atom> y) {
  std::vector<Atom> out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].key < y[j].key)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].key < x[i].key) {
      const double w = s * y[j].weight;
      if (w != 0.0) out.push_back({y[j].key, w});
      ++j;
    } else {
      const double w = x[i].weight + s * y[j].weight;
      if (w != 0.0) out.push_back({x[i].key, w});
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// LatticePoint

LatticePoint::LatticePoint(std::vector<std::uint32_t> coords)
    : coords_(std::move(coords)) {
  if (coords_.empty()) throw ValidationError("lattice point needs dimension >= 1");
}

LatticePoint::LatticePoint(std::initializer_list<std::uint32_t> coords)
    : LatticePoint(std::vector<std::uint32_t>(coords)) {}

LatticePoint LatticePoint::origin(int dim) {
  if (dim < 1) throw ValidationError("lattice point needs dimension >= 1");
  return LatticePoint(std::vector<std::uint32_t>(static_cast<std::size_t>(dim), 0));
}

LatticePoint LatticePoint::unit(int dim, int r) {
  if (r < 0 || r >= dim) throw ValidationError("unit vector index out of range");
  std::vector<std::uint32_t> c(static_cast<std::size_t>(dim), 0);
  c[static_cast<std::size_t>(r)] = 1;
  return LatticePoint(std::move(c));
}

LatticePoint operator+(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim() != b.dim()) throw ValidationError("lattice point dimension mismatch");
  std::vector<std::uint32_t> c(a.coords().begin(), a.coords().end());
  for (int r = 0; r < a.dim(); ++r) c[static_cast<std::size_t>(r)] += b[r];
  return LatticePoint(std::move(c));
}

// ---------------------------------------------------------------------------
// SignedMeasure

SignedMeasure::SignedMeasure(int dim)
    : dim_(dim), bits_(bits_for(dim)), extent_(static_cast<std::size_t>(dim), 0) {}

std::uint32_t SignedMeasure::coord_limit() const noexcept {
  return limit_for_bits(bits_);
}

std::uint64_t SignedMeasure::key(const LatticePoint& x) const {
  if (x.dim() != dim_) throw ValidationError("lattice point dimension mismatch");
  const std::uint32_t limit = coord_limit();
  std::uint64_t k = 0;
  for (int r = 0; r < dim_; ++r) {
    if (x[r] > limit) {
      throw ResourceError("coordinate " + std::to_string(x[r]) +
                          " exceeds packed-key limit " + std::to_string(limit));
    }
    k = (k << bits_) | x[r];
  }
  return k;
}

LatticePoint SignedMeasure::point(std::uint64_t key) const {
  std::vector<std::uint32_t> c(static_cast<std::size_t>(dim_));
  const std::uint64_t mask = limit_for_bits(bits_);
  for (int r = dim_ - 1; r >= 0; --r) {
    c[static_cast<std::size_t>(r)] = static_cast<std::uint32_t>(key & mask);
    key >>= bits_;
  }
  return LatticePoint(std::move(c));
}

double SignedMeasure::weight(const LatticePoint& x) const {
  const std::uint64_t k = key(x);
  const auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), k,
      [](const Atom& a, std::uint64_t key) { return a.key < key; });
  return (it != atoms_.end() && it->key == k) ? it->weight : 0.0;
}

SignedMeasure SignedMeasure::with_added_budget(double extra) const {
  if (!(extra >= 0.0)) throw ValidationError("budget increments must be >= 0");
  SignedMeasure out = *this;
  out.budget_ += extra;
  return out;
}

SignedMeasure SignedMeasure::assemble(int dim, std::vector<Atom> atoms,
                                      double trunc_budget) {
  SignedMeasure m(dim);
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.key < b.key; });
  const std::uint64_t mask = limit_for_bits(m.bits_);
  for (const Atom& a : atoms) {
    std::uint64_t k = a.key;
    for (int r = dim - 1; r >= 0; --r) {
      auto& e = m.extent_[static_cast<std::size_t>(r)];
      e = std::max(e, static_cast<std::uint32_t>(k & mask));
      k >>= m.bits_;
    }
  }
  m.atoms_ = std::move(atoms);
  m.budget_ = trunc_budget;
  return m;
}

SignedMeasure SignedMeasure::from_points(
    int dim, std::span<const std::pair<LatticePoint, double>> points,
    double trunc_budget) {
  if (!(trunc_budget >= 0.0)) throw ValidationError("trunc_budget must be >= 0");
  SignedMeasure shape(dim);
  std::unordered_map<std::uint64_t, double> acc;
  std::vector<std::uint64_t> order;
  for (const auto& [x, w] : points) {
    const std::uint64_t k = shape.key(x);
    auto [it, inserted] = acc.try_emplace(k, 0.0);
    if (inserted) order.push_back(k);
    it->second += w;
  }
  std::vector<Atom> atoms;
  atoms.reserve(order.size());
  for (std::uint64_t k : order) atoms.push_back({k, acc[k]});
  return assemble(dim, std::move(atoms), trunc_budget);
}

SignedMeasure SignedMeasure::from_points(
    int dim, std::initializer_list<std::pair<LatticePoint, double>> points,
    double trunc_budget) {
  return from_points(
      dim, std::span<const std::pair<LatticePoint, double>>(points.begin(), points.size()),
      trunc_budget);
}

// ---------------------------------------------------------------------------
// Algebra

SignedMeasure dirac(const LatticePoint& x) {
  SignedMeasure shape(x.dim());
  return SignedMeasure::assemble(x.dim(), {{shape.key(x), 1.0}}, 0.0);
}

SignedMeasure zero_measure(int dim) { return SignedMeasure(dim); }

SignedMeasure linear_combine(std::span<const WeightedMeasure> terms) {
  if (terms.empty()) throw ValidationError("linear_combine: no terms");
  const int dim = terms.front().measure.dim();
  std::vector<Atom> acc;
  double budget = 0.0;
  for (const auto& t : terms) {
    if (t.measure.dim() != dim) {
      throw ValidationError("linear_combine: dimension mismatch");
    }
    budget += std::abs(t.scalar) * t.measure.trunc_budget();
    if (t.scalar == 0.0) continue;
    acc = merge_scaled(acc, t.scalar, t.measure.atoms());
  }
  return SignedMeasure::assemble(dim, std::move(acc), budget);
}

SignedMeasure linear_combine(std::initializer_list<WeightedMeasure> terms) {
  return linear_combine(std::span<const WeightedMeasure>(terms.begin(), terms.size()));
}

SignedMeasure operator+(const SignedMeasure& a, const SignedMeasure& b) {
  return linear_combine({{1.0, a}, {1.0, b}});
}

SignedMeasure operator-(const SignedMeasure& a, const SignedMeasure& b) {
  return linear_combine({{1.0, a}, {-1.0, b}});
}

SignedMeasure operator*(double s, const SignedMeasure& v) {
  return linear_combine({{s, v}});
}

double predicted_support(const SignedMeasure& v, const SignedMeasure& w) {
  double box = 1.0;
  for (int r = 0; r < v.dim(); ++r) {
    box *= static_cast<double>(v.extent()[static_cast<std::size_t>(r)]) +
           static_cast<double>(w.extent()[static_cast<std::size_t>(r)]) + 1.0;
  }
  return std::min(box, static_cast<double>(v.size()) * static_cast<double>(w.size()));
}

SignedMeasure convolve(const SignedMeasure& v, const SignedMeasure& w) {
  require_same_dim(v, w, "convolve");
  const std::uint32_t limit = v.coord_limit();
  for (int r = 0; r < v.dim(); ++r) {
    const std::uint64_t sum =
        std::uint64_t{v.extent()[static_cast<std::size_t>(r)]} +
        w.extent()[static_cast<std::size_t>(r)];
    if (sum > limit) {
      throw ResourceError("convolve: coordinate range exceeds packed-key limit");
    }
  }
  const double nv = tv_norm(v);
  const double nw = tv_norm(w);
  const double budget = v.trunc_budget() * nw + w.trunc_budget() * nv +
                        v.trunc_budget() * w.trunc_budget();

  // With per-coordinate sums in range, packed keys add without carries.
  std::unordered_map<std::uint64_t, double> acc;
  acc.reserve(static_cast<std::size_t>(std::min(predicted_support(v, w), 4.0e6)));
  for (const Atom& a : v.atoms()) {
    for (const Atom& b : w.atoms()) {
      acc[a.key + b.key] += a.weight * b.weight;
    }
  }
  std::vector<Atom> atoms;
  atoms.reserve(acc.size());
  for (const auto& [k, x] : acc) atoms.push_back({k, x});
  return SignedMeasure::assemble(v.dim(), std::move(atoms), budget);
}

SignedMeasure power(const SignedMeasure& v, int m) {
  if (m < 0) throw ValidationError("power: exponent must be >= 0");
  SignedMeasure out = dirac(LatticePoint::origin(v.dim()));
  for (int i = 0; i < m; ++i) out = convolve(out, v);
  return out;
}

// ---------------------------------------------------------------------------
// Series

double SeriesSpec::tail_bound(int order, double r) const {
  if (r == 0.0) return 0.0;
  const double q = r * ratio_bound(order + 1);
  if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
  const double lead =
      std::exp(log_abs_coefficient(order + 1) + (order + 1) * std::log(r));
  return lead / (1.0 - q);
}

int SeriesSpec::truncation_order(double r, double tol) const {
  constexpr int kMaxOrder = 100000;
  for (int m = 0; m <= kMaxOrder; ++m) {
    if (tail_bound(m, r) <= tol) return m;
  }
  throw ConvergenceError("series '" + name + "': tail not certified below tol");
}

double SeriesSpec::partial_sum(double z, int order) const {
  double sum = 0.0;
  double zm = 1.0;
  for (int m = 0; m <= order; ++m) {
    sum += coefficient(m) * zm;
    zm *= z;
  }
  return sum;
}

SeriesSpec exp_series() {
  SeriesSpec s;
  s.name = "exp";
  s.coefficient = [](int m) { return std::exp(-std::lgamma(m + 1.0)); };
  s.log_abs_coefficient = [](int m) { return -std::lgamma(m + 1.0); };
  s.ratio_bound = [](int m) { return 1.0 / (m + 1.0); };
  return s;
}

SeriesSpec g_series() {
  // Coefficient of z^m is 2 (m+1) / (m+2)! = 2 / ((m+2) m!).
  SeriesSpec s;
  s.name = "g";
  s.coefficient = [](int m) {
    return 2.0 * std::exp(-std::lgamma(m + 1.0)) / (m + 2.0);
  };
  s.log_abs_coefficient = [](int m) {
    return std::log(2.0) - std::log(m + 2.0) - std::lgamma(m + 1.0);
  };
  s.ratio_bound = [](int m) { return (m + 2.0) / ((m + 3.0) * (m + 1.0)); };
  return s;
}

SignedMeasure series_apply(const SeriesSpec& s, const SignedMeasure& v, double tol) {
  if (!(tol > 0.0)) throw ValidationError("series_apply: tol must be > 0");
  const double r = tv_norm(v) + v.trunc_budget();
  if (!(r < s.radius)) {
    throw ConvergenceError("series '" + s.name + "' diverges at norm " +
                           std::to_string(r));
  }
  const int order = s.truncation_order(r, tol);
  const double tail = s.tail_bound(order, r);

  SignedMeasure vm = dirac(LatticePoint::origin(v.dim()));
  SignedMeasure sum = s.coefficient(0) * vm;
  for (int m = 1; m <= order; ++m) {
    vm = convolve(vm, v);
    sum = linear_combine({{1.0, sum}, {s.coefficient(m), vm}});
  }
  return sum.with_added_budget(tail);
}

SignedMeasure exp_measure(const SignedMeasure& v, double tol) {
  return series_apply(exp_series(), v, tol);
}

// ---------------------------------------------------------------------------
// Norms, pruning, closed forms

double tv_norm(const SignedMeasure& v) {
  double s = 0.0;
  for (const Atom& a : v.atoms()) s += std::abs(a.weight);
  return s;
}

double total_mass(const SignedMeasure& v) {
  double s = 0.0;
  for (const Atom& a : v.atoms()) s += a.weight;
  return s;
}

SignedMeasure prune(const SignedMeasure& v, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("prune: eps must be >= 0");
  std::vector<Atom> kept;
  kept.reserve(v.size());
  double dropped = 0.0;
  for (const Atom& a : v.atoms()) {
    if (std::abs(a.weight) < eps) {
      dropped += std::abs(a.weight);
    } else {
      kept.push_back(a);
    }
  }
  return SignedMeasure::assemble(v.dim(), std::move(kept), v.trunc_budget() + dropped);
}

SignedMeasure poisson_product(std::span<const double> rates, double tol) {
  if (rates.empty()) throw ValidationError("poisson_product: no rates");
  if (!(tol > 0.0)) throw ValidationError("poisson_product: tol must be > 0");
  const int dim = static_cast<int>(rates.size());
  SignedMeasure shape(dim);

  double budget = 0.0;
  std::vector<std::vector<double>> marginals;
  for (double t : rates) {
    if (!(t >= 0.0)) throw ValidationError("poisson_product: rates must be >= 0");
    const long cut = poisson_truncation_point(t, tol / dim);
    if (static_cast<std::uint64_t>(cut) > shape.coord_limit()) {
      throw ResourceError("poisson_product: truncation point exceeds key range");
    }
    budget += poisson_tail_bound(cut, t);
    std::vector<double> pmf(static_cast<std::size_t>(cut) + 1);
    for (long m = 0; m <= cut; ++m) pmf[static_cast<std::size_t>(m)] = poisson_pmf(m, t);
    marginals.push_back(std::move(pmf));
  }

  // Expand coordinate by coordinate; keys are built most-significant first.
  std::vector<Atom> atoms{{0, 1.0}};
  const int bits = std::min(32, 64 / dim);
  for (const auto& pmf : marginals) {
    std::vector<Atom> next;
    next.reserve(atoms.size() * pmf.size());
    for (const Atom& a : atoms) {
      for (std::size_t m = 0; m < pmf.size(); ++m) {
        const std::uint64_t k = (a.key << bits) | m;
        next.push_back({k, a.weight * pmf[m]});
      }
    }
    atoms = std::move(next);
  }
  return SignedMeasure::assemble(dim, std::move(atoms), budget);
}

}  // namespace cpa
