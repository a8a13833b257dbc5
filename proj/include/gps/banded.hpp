#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace gps {

// Rectangular matrix whose row r is nonzero only in columns r .. r + width.
// Holds difference operators, triangular factors and the sparse penalty root.
class UpperBand {
 public:
  UpperBand() = default;
  UpperBand(std::size_t rows, std::size_t cols, std::size_t width)
      : rows_(rows), cols_(cols), width_(width), data_(rows * (width + 1), 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t width() const { return width_; }

  bool in_band(std::size_t r, std::size_t c) const {
    return r < rows_ && c < cols_ && c >= r && c - r <= width_;
  }
  double operator()(std::size_t r, std::size_t c) const {
    return in_band(r, c) ? data_[r * (width_ + 1) + (c - r)] : 0.0;
  }
  // Caller guarantees in_band(r, c).
  double& at(std::size_t r, std::size_t c) { return data_[r * (width_ + 1) + (c - r)]; }

  // Last column index carrying storage in row r.
  std::size_t row_end(std::size_t r) const { return std::min(cols_ - 1, r + width_); }

  std::vector<double> multiply(std::span<const double> x) const;
  Eigen::MatrixXd to_dense() const;
  // (row, col, value) for every stored entry, zeros included.
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

// Symmetric n x n matrix with `width` super- (and sub-) diagonals; only the
// upper band is stored.
class SymBand {
 public:
  SymBand() = default;
  SymBand(std::size_t n, std::size_t width) : n_(n), width_(width), data_(n * (width + 1), 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t width() const { return width_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return (j < n_ && j - i <= width_) ? data_[i * (width_ + 1) + (j - i)] : 0.0;
  }
  // Requires i <= j <= i + width.
  double& at(std::size_t i, std::size_t j) { return data_[i * (width_ + 1) + (j - i)]; }

  std::vector<double> multiply(std::span<const double> x) const;
  Eigen::MatrixXd to_dense() const;
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets() const;

  // this + alpha * other; the result takes the larger bandwidth.
  SymBand added(const SymBand& other, double alpha) const;
  SymBand widened(std::size_t width) const;

 private:
  std::size_t n_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

UpperBand multiply(const UpperBand& a, const UpperBand& b);

// A^T A
SymBand gram_of_rows(const UpperBand& a);

// D^T G D
SymBand sandwich(const UpperBand& d, const SymBand& g);

// Upper factor U of A = U^T U, without pivoting. Throws NumericalError if a
// pivot is not positive.
UpperBand cholesky(const SymBand& a);

// Solves U x = b.
std::vector<double> solve_upper(const UpperBand& u, std::span<const double> b);
// Solves U^T x = b.
std::vector<double> solve_upper_transposed(const UpperBand& u, std::span<const double> b);

// Entries of (U^T U)^{-1} inside the band of U, by the backward recurrence
// from U Sigma = U^{-T}. O(n w^2).
SymBand band_inverse(const UpperBand& u);

// Sequential Givens QR for least squares with banded rows. Rows must be
// added in nondecreasing order of their first column; each row may span at
// most width + 1 columns. The triangular factor R keeps the band.
class BandedLeastSquares {
 public:
  BandedLeastSquares(std::size_t cols, std::size_t width);

  void add_row(std::size_t first_col, std::span<const double> values, double rhs);

  std::size_t cols() const { return r_.cols(); }
  std::size_t width() const { return r_.width(); }
  const UpperBand& factor() const { return r_; }
  std::span<const double> rhs() const { return z_; }
  bool occupied(std::size_t c) const { return occupied_[c] != 0; }
  // Squared norm of the part of the right-hand side orthogonal to range(R).
  double residual_sq() const { return residual_sq_; }

  // First column whose pivot is missing or below rel_tol * max|R_cc|, or
  // cols() if none.
  std::size_t first_deficient_column(double rel_tol) const;

 private:
  UpperBand r_;
  std::vector<double> z_;
  std::vector<char> occupied_;
  std::vector<double> buf_;
  double residual_sq_ = 0.0;
};

}  // namespace gps
