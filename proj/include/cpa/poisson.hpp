#ifndef CPA_POISSON_HPP
#define CPA_POISSON_HPP

namespace cpa {

// po(m, t) = e^{-t} t^m / m!, zero for m < 0, with 0^0 = 1.
// Throws ValidationError for t < 0.
double poisson_pmf(long m, double t);

// Certified upper bound on P(X > m) for X ~ Po(t), from the geometric
// majorant po(m+1,t) / (1 - t/(m+2)). Returns +inf when m + 2 <= t.
double poisson_tail_bound(long m, double t);

// Smallest m >= 0 with poisson_tail_bound(m, t) <= tol.
long poisson_truncation_point(double t, double tol);

}  // namespace cpa

#endif  // CPA_POISSON_HPP
