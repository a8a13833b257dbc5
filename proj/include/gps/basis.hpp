#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gps/knots.hpp"

namespace gps {

// The d possibly-nonzero B-splines at one abscissa: values[r] is B_{offset+r}.
struct BasisRow {
  std::size_t offset = 0;
  std::vector<double> values;
};

// B-splines of order d on a knot vector, evaluated by the Cox-de Boor
// recursion. Evaluation is restricted to the domain [a, b]; intervals are
// half-open except the last, which is closed at b.
class BasisSpec {
 public:
  explicit BasisSpec(KnotVector kv) : kv_(std::move(kv)) {}

  const KnotVector& knots() const { return kv_; }
  int order() const { return kv_.order(); }
  std::size_t size() const { return static_cast<std::size_t>(kv_.num_basis()); }
  double lower() const { return kv_.lower(); }
  double upper() const { return kv_.upper(); }

  BasisRow eval_row(double x) const;
  // Writes the order() values into `out` and returns the offset.
  std::size_t eval_row_into(double x, std::span<double> out) const;

  // Index i of the knot interval [t_i, t_{i+1}) holding x (0-based).
  std::size_t find_interval(double x) const;

 private:
  KnotVector kv_;
};

// n x p design matrix stored row-compressed: each row keeps its first
// nonzero column and d values.
class DesignMatrix {
 public:
  DesignMatrix(std::size_t rows, std::size_t cols, int order)
      : rows_(rows), cols_(cols), order_(order), offsets_(rows), values_(rows * order) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int order() const { return order_; }

  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * order_, order_);
  }
  std::span<double> row_mut(std::size_t i) {
    return std::span<double>(values_).subspan(i * order_, order_);
  }
  void set_offset(std::size_t i, std::size_t offset) { offsets_[i] = offset; }

  // y = B beta
  std::vector<double> multiply(std::span<const double> beta) const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  int order_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

// Throws DomainError if any x lies outside [a, b].
DesignMatrix design_matrix(const BasisSpec& bs, std::span<const double> x);

// f(x) = sum_j B_j(x) beta_j together with its basis.
class Spline {
 public:
  Spline(BasisSpec basis, std::vector<double> coefficients);

  const BasisSpec& basis() const { return basis_; }
  std::span<const double> coefficients() const { return coef_; }

  double operator()(double x) const;

  // m-th derivative as a spline of order d - m on the knots (t_j), j = 1+m..K-m.
  // Requires 1 <= m <= d - 1.
  Spline derivative(int m = 1) const;

 private:
  BasisSpec basis_;
  std::vector<double> coef_;
};

// Coefficients of f^(m) on the order-(d-m) basis, obtained one order at a
// time from weighted differences: c'_r = (c_{r+1} - c_r) / (gamma / q),
// q = d - s, gamma = t_{r+d} - t_{r+s} at step s.
Spline derivative_coeffs(const BasisSpec& bs, std::span<const double> beta, int m);

// f^(m)(x); m = 0 is the spline itself.
double eval_spline(const BasisSpec& bs, std::span<const double> beta, double x, int m = 0);

}  // namespace gps
