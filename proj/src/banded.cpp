#include "gps/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gps/errors.hpp"

namespace gps {

std::vector<double> UpperBand::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("UpperBand::multiply: size mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (r >= cols_) break;
    double acc = 0.0;
    for (std::size_t c = r; c <= row_end(r); ++c) acc += (*this)(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

Eigen::MatrixXd UpperBand::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
  for (std::size_t r = 0; r < rows_ && r < cols_; ++r) {
    for (std::size_t c = r; c <= row_end(r); ++c) m(r, c) = (*this)(r, c);
  }
  return m;
}

std::vector<std::tuple<std::size_t, std::size_t, double>> UpperBand::triplets() const {
  std::vector<std::tuple<std::size_t, std::size_t, double>> out;
  for (std::size_t r = 0; r < rows_ && r < cols_; ++r) {
    for (std::size_t c = r; c <= row_end(r); ++c) out.emplace_back(r, c, (*this)(r, c));
  }
  return out;
}

std::vector<double> SymBand::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw std::invalid_argument("SymBand::multiply: size mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t end = std::min(n_ - 1, i + width_);
    y[i] += (*this)(i, i) * x[i];
    for (std::size_t j = i + 1; j <= end; ++j) {
      const double v = (*this)(i, j);
      y[i] += v * x[j];
      y[j] += v * x[i];
    }
  }
  return y;
}

Eigen::MatrixXd SymBand::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j <= std::min(n_ - 1, i + width_); ++j) {
      m(i, j) = m(j, i) = (*this)(i, j);
    }
  }
  return m;
}

std::vector<std::tuple<std::size_t, std::size_t, double>> SymBand::triplets() const {
  std::vector<std::tuple<std::size_t, std::size_t, double>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > width_ ? i - width_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + width_);
    for (std::size_t j = lo; j <= hi; ++j) out.emplace_back(i, j, (*this)(i, j));
  }
  return out;
}

SymBand SymBand::widened(std::size_t width) const {
  SymBand out(n_, std::max(width, width_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j <= std::min(n_ - 1, i + width_); ++j) out.at(i, j) = (*this)(i, j);
  }
  return out;
}

SymBand SymBand::added(const SymBand& other, double alpha) const {
  if (other.n_ != n_) throw std::invalid_argument("SymBand::added: size mismatch");
  SymBand out = widened(other.width_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j <= std::min(n_ - 1, i + other.width_); ++j) {
      out.at(i, j) += alpha * other(i, j);
    }
  }
  return out;
}

UpperBand multiply(const UpperBand& a, const UpperBand& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimension mismatch");
  UpperBand c(a.rows(), b.cols(), a.width() + b.width());
  for (std::size_t r = 0; r < a.rows() && r < a.cols(); ++r) {
    for (std::size_t k = r; k <= a.row_end(r); ++k) {
      const double av = a(r, k);
      if (av == 0.0 || k >= b.rows() || k >= b.cols()) continue;
      for (std::size_t col = k; col <= b.row_end(k); ++col) {
        c.at(r, col) += av * b(k, col);
      }
    }
  }
  return c;
}

SymBand gram_of_rows(const UpperBand& a) {
  SymBand s(a.cols(), a.width());
  for (std::size_t r = 0; r < a.rows() && r < a.cols(); ++r) {
    const std::size_t end = a.row_end(r);
    for (std::size_t u = r; u <= end; ++u) {
      const double au = a(r, u);
      for (std::size_t v = u; v <= end; ++v) s.at(u, v) += au * a(r, v);
    }
  }
  return s;
}

SymBand sandwich(const UpperBand& d, const SymBand& g) {
  if (d.rows() != g.size()) throw std::invalid_argument("sandwich: dimension mismatch");
  const std::size_t q = d.rows();
  SymBand s(d.cols(), d.width() + g.width());
  for (std::size_t r = 0; r < q; ++r) {
    const std::size_t lo = r > g.width() ? r - g.width() : 0;
    const std::size_t hi = std::min(q - 1, r + g.width());
    for (std::size_t u = r; u <= d.row_end(r); ++u) {
      const double du = d(r, u);
      if (du == 0.0) continue;
      for (std::size_t s_row = lo; s_row <= hi; ++s_row) {
        const double gw = g(r, s_row) * du;
        if (gw == 0.0) continue;
        for (std::size_t v = std::max(u, s_row); v <= d.row_end(s_row); ++v) {
          s.at(u, v) += gw * d(s_row, v);
        }
      }
    }
  }
  return s;
}

UpperBand cholesky(const SymBand& a) {
  const std::size_t n = a.size();
  const std::size_t w = a.width();
  UpperBand u(n, n, w);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k0 = j > w ? j - w : 0;
    double pivot = a(j, j);
    for (std::size_t k = k0; k < j; ++k) pivot -= u(k, j) * u(k, j);
    if (!(pivot > 0.0)) {
      throw NumericalError("Cholesky breakdown at pivot " + std::to_string(j) +
                           " (matrix not positive definite)");
    }
    const double ujj = std::sqrt(pivot);
    u.at(j, j) = ujj;
    for (std::size_t c = j + 1; c <= std::min(n - 1, j + w); ++c) {
      double v = a(j, c);
      const std::size_t kk = c > w ? std::max(k0, c - w) : k0;
      for (std::size_t k = kk; k < j; ++k) v -= u(k, j) * u(k, c);
      u.at(j, c) = v / ujj;
    }
  }
  return u;
}

std::vector<double> solve_upper(const UpperBand& u, std::span<const double> b) {
  const std::size_t n = u.cols();
  if (u.rows() != n || b.size() != n) throw std::invalid_argument("solve_upper: size mismatch");
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t c = ii + 1; c <= u.row_end(ii); ++c) v -= u(ii, c) * x[c];
    x[ii] = v / u(ii, ii);
  }
  return x;
}

std::vector<double> solve_upper_transposed(const UpperBand& u, std::span<const double> b) {
  const std::size_t n = u.cols();
  if (u.rows() != n || b.size() != n) {
    throw std::invalid_argument("solve_upper_transposed: size mismatch");
  }
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    x[i] /= u(i, i);
    for (std::size_t c = i + 1; c <= u.row_end(i); ++c) x[c] -= u(i, c) * x[i];
  }
  return x;
}

SymBand band_inverse(const UpperBand& u) {
  const std::size_t n = u.cols();
  const std::size_t w = u.width();
  SymBand sigma(n, w);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t end = u.row_end(i);
    const double uii = u(i, i);
    for (std::size_t j = end + 1; j-- > i;) {
      double v = (i == j) ? 1.0 / uii : 0.0;
      for (std::size_t k = i + 1; k <= end; ++k) v -= u(i, k) * sigma(k, j);
      sigma.at(i, j) = v / uii;
    }
  }
  return sigma;
}

BandedLeastSquares::BandedLeastSquares(std::size_t cols, std::size_t width)
    : r_(cols, cols, width), z_(cols, 0.0), occupied_(cols, 0), buf_(width + 1, 0.0) {}

void BandedLeastSquares::add_row(std::size_t first_col, std::span<const double> values,
                                 double rhs) {
  const std::size_t w = r_.width();
  const std::size_t p = r_.cols();
  if (values.size() > w + 1) throw std::invalid_argument("add_row: row wider than band");
  if (first_col >= p) throw std::invalid_argument("add_row: column out of range");
  std::fill(buf_.begin(), buf_.end(), 0.0);
  std::copy(values.begin(), values.end(), buf_.begin());

  auto shift = [&] {
    std::rotate(buf_.begin(), buf_.begin() + 1, buf_.end());
    buf_.back() = 0.0;
  };

  std::size_t c = first_col;
  while (c < p) {
    if (std::all_of(buf_.begin(), buf_.end(), [](double v) { return v == 0.0; })) break;
    if (buf_[0] == 0.0) {
      shift();
      ++c;
      continue;
    }
    if (!occupied_[c]) {
      for (std::size_t k = 0; k <= w && c + k < p; ++k) r_.at(c, c + k) = buf_[k];
      z_[c] = rhs;
      occupied_[c] = 1;
      return;
    }
    const double a = r_(c, c);
    const double b = buf_[0];
    const double rho = std::hypot(a, b);
    const double cs = a / rho;
    const double sn = b / rho;
    for (std::size_t k = 0; k <= w && c + k < p; ++k) {
      const double rk = r_(c, c + k);
      const double bk = buf_[k];
      r_.at(c, c + k) = cs * rk + sn * bk;
      buf_[k] = -sn * rk + cs * bk;
    }
    const double zc = z_[c];
    z_[c] = cs * zc + sn * rhs;
    rhs = -sn * zc + cs * rhs;
    shift();
    ++c;
  }
  residual_sq_ += rhs * rhs;
}

std::size_t BandedLeastSquares::first_deficient_column(double rel_tol) const {
  double scale = 0.0;
  for (std::size_t c = 0; c < cols(); ++c) {
    if (occupied_[c]) scale = std::max(scale, std::abs(r_(c, c)));
  }
  for (std::size_t c = 0; c < cols(); ++c) {
    if (!occupied_[c] || !(std::abs(r_(c, c)) > rel_tol * scale)) return c;
  }
  return cols();
}

}  // namespace gps
