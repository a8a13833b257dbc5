#pragma once

// Independent reference helpers for the unit tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gps/knots.hpp"

namespace support {

// All K - d order-d B-splines at x from the full triangular table that
// starts with every order-1 indicator (half-open; closed at the last
// non-degenerate interval ending at `b` when `closed_at` is set).
inline std::vector<double> all_bsplines(std::span<const double> t, int d, double x,
                                        double closed_at = NAN) {
  const std::size_t K = t.size();
  std::vector<double> b(K - 1, 0.0);
  for (std::size_t j = 0; j + 1 < K; ++j) {
    if (t[j] <= x && x < t[j + 1]) b[j] = 1.0;
  }
  if (x == closed_at) {
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t j = K - 1; j-- > 0;) {
      if (t[j] < t[j + 1] && t[j + 1] == closed_at) {
        b[j] = 1.0;
        break;
      }
    }
  }
  for (int q = 2; q <= d; ++q) {
    std::vector<double> next(K - q, 0.0);
    for (std::size_t j = 0; j + q < K; ++j) {
      double v = 0.0;
      if (t[j + q - 1] > t[j]) v += (x - t[j]) / (t[j + q - 1] - t[j]) * b[j];
      if (t[j + q] > t[j + 1]) v += (t[j + q] - x) / (t[j + q] - t[j + 1]) * b[j + 1];
      next[j] = v;
    }
    b = std::move(next);
  }
  return b;
}

// Adaptive Gauss-Kronrod integral over [lo, hi].
inline double integrate(const std::function<double(double)>& f, double lo, double hi) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-15,
                                                                       &err);
}

inline Eigen::MatrixXd dense_design(const gps::KnotVector& kv, const std::vector<double>& x) {
  const auto p = static_cast<Eigen::Index>(kv.num_basis());
  Eigen::MatrixXd b(static_cast<Eigen::Index>(x.size()), p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto row = all_bsplines(kv.knots(), kv.order(), x[i], kv.upper());
    for (Eigen::Index j = 0; j < p; ++j) b(static_cast<Eigen::Index>(i), j) = row[j];
  }
  return b;
}

// Coefficients of the spline that reproduces f (exact when f lies in the
// spline space) by least squares on a dense grid of [a, b].
inline Eigen::VectorXd interpolate(const gps::KnotVector& kv,
                                   const std::function<double(double)>& f) {
  const auto p = static_cast<std::size_t>(kv.num_basis());
  const std::size_t n = 4 * p + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = kv.lower() + (kv.upper() - kv.lower()) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  const Eigen::MatrixXd b = dense_design(kv, xs);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = f(xs[i]);
  return b.colPivHouseholderQr().solve(y);
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Random valid knot vector (clamped or with free auxiliary knots).
inline gps::KnotVector random_knots(std::mt19937_64& rng, int d, long k, bool clamped) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = -1.0 + 2.0 * u(rng);
  const double b = a + 1.0 + 3.0 * u(rng);
  std::vector<double> s;
  for (;;) {
    s.clear();
    for (long i = 0; i < k; ++i) s.push_back(a + (b - a) * u(rng));
    std::sort(s.begin(), s.end());
    bool ok = true;
    double prev = a;
    for (double v : s) {
      ok = ok && v - prev > 0.01 * (b - a) / (k + 1);
      prev = v;
    }
    if (ok && b - prev > 0.01 * (b - a) / (k + 1)) break;
  }
  std::vector<double> t;
  const double step = (b - a) / (k + 1);
  for (int i = d - 1; i >= 1; --i) t.push_back(clamped ? a : a - step * (i + 0.5 * u(rng)));
  std::sort(t.begin(), t.end());
  t.push_back(a);
  t.insert(t.end(), s.begin(), s.end());
  t.push_back(b);
  double edge = b;
  for (int i = 1; i < d; ++i) {
    edge += clamped ? 0.0 : step * (0.5 + u(rng));
    t.push_back(edge);
  }
  return gps::KnotVector(t, d);
}

}  // namespace support
