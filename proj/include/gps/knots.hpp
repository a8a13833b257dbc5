#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gps {

// Result of checking a candidate knot sequence. Never throws; every problem
// found is appended to `violations`.
struct KnotDiagnostics {
  std::size_t K = 0;  // total number of knots
  long k = 0;         // interior knots strictly inside (a, b)
  long p = 0;         // number of B-splines, K - d
  int d = 0;          // spline order
  double a = 0.0;
  double b = 0.0;
  // (value, multiplicity) for every distinct knot, in increasing order.
  std::vector<std::pair<double, int>> multiplicities;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

KnotDiagnostics validate(std::span<const double> t, int d);

// Full knot sequence (t_1, ..., t_K) for order-d B-splines. The domain is
// [a, b] = [t_d, t_{K-d+1}]; k = K - 2d knots lie strictly inside it and the
// sequence spans p = k + d B-splines. Immutable once built.
class KnotVector {
 public:
  // Throws std::invalid_argument listing the violations if `t` is not a
  // valid sequence for order d.
  KnotVector(std::vector<double> t, int d);

  std::span<const double> knots() const { return t_; }
  double operator[](std::size_t i) const { return t_[i]; }
  std::size_t size() const { return t_.size(); }

  int order() const { return d_; }
  long num_interior() const { return static_cast<long>(t_.size()) - 2 * d_; }
  long num_basis() const { return static_cast<long>(t_.size()) - d_; }
  double lower() const { return t_[d_ - 1]; }
  double upper() const { return t_[t_.size() - d_]; }

  // Interior knots s_1 < ... < s_k.
  std::span<const double> interior() const {
    return std::span<const double>(t_).subspan(d_, t_.size() - 2 * d_);
  }

  // Knots (t_j) for j = 1+m .. K-m, i.e. the deck of the order-(d-m) basis
  // that carries the m-th derivative. Requires 0 <= m < d.
  KnotVector trimmed(int m) const;

  bool is_clamped() const;
  // Constant first differences across the whole sequence (relative tolerance).
  bool is_uniform(double rel_tol = 1e-10) const;

  friend bool operator==(const KnotVector&, const KnotVector&) = default;

 private:
  std::vector<double> t_;
  int d_;
};

// k + 2 equidistant domain knots with step (b - a) / (k + 1), extended by
// d - 1 auxiliary knots on each side at the same step.
KnotVector place_uniform(double a, double b, long k, int d);

// k + 2 domain knots at equal quantiles (linear interpolation of order
// statistics) of min(a, x_1), x_2, ..., x_{n-1}, max(x_n, b); the boundary
// knots are repeated d times. `x` must be sorted. Tied quantiles are an
// error naming the quantile level.
KnotVector place_quantile_clamped(std::span<const double> x, double a, double b, long k, int d);

// Linear-interpolation ("type 7") sample quantile of sorted data.
double sample_quantile(std::span<const double> sorted, double level);

}  // namespace gps
