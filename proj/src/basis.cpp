#include "gps/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gps/errors.hpp"

namespace gps {

std::size_t BasisSpec::find_interval(double x) const {
  const auto t = kv_.knots();
  const int d = kv_.order();
  if (!(x >= lower() && x <= upper())) {
    throw DomainError("abscissa " + std::to_string(x) + " outside spline domain [" +
                      std::to_string(lower()) + ", " + std::to_string(upper()) + "]");
  }
  const std::size_t first = d - 1;
  const std::size_t last = t.size() - d - 1;  // last interval ending at b
  auto it = std::upper_bound(t.begin() + first, t.begin() + last + 1, x);
  auto i = static_cast<std::size_t>(it - t.begin()) - 1;
  return std::min(i, last);
}

std::size_t BasisSpec::eval_row_into(double x, std::span<double> out) const {
  const int d = kv_.order();
  const auto t = kv_.knots();
  const std::size_t i = find_interval(x);

  // Triangular scheme over the d active functions; left/right hold the
  // distances from x to the surrounding knots.
  double left[32];
  double right[32];
  if (d > 31) throw std::invalid_argument("B-spline order above 31 is not supported");
  out[0] = 1.0;
  for (int s = 1; s < d; ++s) {
    left[s] = x - t[i + 1 - s];
    right[s] = t[i + s] - x;
    double saved = 0.0;
    for (int r = 0; r < s; ++r) {
      const double denom = right[r + 1] + left[s - r];
      const double temp = denom == 0.0 ? 0.0 : out[r] / denom;
      out[r] = saved + right[r + 1] * temp;
      saved = left[s - r] * temp;
    }
    out[s] = saved;
  }
  return i + 1 - d;
}

BasisRow BasisSpec::eval_row(double x) const {
  BasisRow row;
  row.values.resize(order());
  row.offset = eval_row_into(x, row.values);
  return row;
}

std::vector<double> DesignMatrix::multiply(std::span<const double> beta) const {
  if (beta.size() != cols_) throw std::invalid_argument("DesignMatrix::multiply: size mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    double acc = 0.0;
    for (int c = 0; c < order_; ++c) acc += r[c] * beta[offsets_[i] + c];
    y[i] = acc;
  }
  return y;
}

Eigen::MatrixXd DesignMatrix::to_dense() const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    for (int c = 0; c < order_; ++c) B(i, offsets_[i] + c) = r[c];
  }
  return B;
}

DesignMatrix design_matrix(const BasisSpec& bs, std::span<const double> x) {
  DesignMatrix B(x.size(), bs.size(), bs.order());
  for (std::size_t i = 0; i < x.size(); ++i) {
    B.set_offset(i, bs.eval_row_into(x[i], B.row_mut(i)));
  }
  return B;
}

Spline::Spline(BasisSpec basis, std::vector<double> coefficients)
    : basis_(std::move(basis)), coef_(std::move(coefficients)) {
  if (coef_.size() != basis_.size()) {
    throw std::invalid_argument("Spline: expected " + std::to_string(basis_.size()) +
                                " coefficients, got " + std::to_string(coef_.size()));
  }
}

double Spline::operator()(double x) const {
  double values[32];
  const int d = basis_.order();
  const std::size_t off = basis_.eval_row_into(x, std::span<double>(values, d));
  double acc = 0.0;
  for (int r = 0; r < d; ++r) acc += values[r] * coef_[off + r];
  return acc;
}

Spline Spline::derivative(int m) const { return derivative_coeffs(basis_, coef_, m); }

Spline derivative_coeffs(const BasisSpec& bs, std::span<const double> beta, int m) {
  const int d = bs.order();
  if (m < 1 || m > d - 1) {
    throw std::invalid_argument("derivative order " + std::to_string(m) + " must lie in [1, " +
                                std::to_string(d - 1) + "] for order-" + std::to_string(d) +
                                " B-splines");
  }
  if (beta.size() != bs.size()) {
    throw std::invalid_argument("derivative_coeffs: coefficient count does not match basis");
  }
  const auto t = bs.knots().knots();
  std::vector<double> c(beta.begin(), beta.end());
  for (int s = 1; s <= m; ++s) {
    const int q = d - s;
    for (std::size_t r = 0; r + 1 < c.size(); ++r) {
      const double gamma = t[r + d] - t[r + s];
      if (!(gamma > 0.0)) {
        throw SingularWeightError("zero lag-" + std::to_string(q) + " knot difference at t[" +
                                  std::to_string(r + s) + "]");
      }
      c[r] = (c[r + 1] - c[r]) / (gamma / q);
    }
    c.pop_back();
  }
  return Spline(BasisSpec(bs.knots().trimmed(m)), std::move(c));
}

double eval_spline(const BasisSpec& bs, std::span<const double> beta, double x, int m) {
  if (m == 0) return Spline(bs, std::vector<double>(beta.begin(), beta.end()))(x);
  return derivative_coeffs(bs, beta, m)(x);
}

}  // namespace gps
