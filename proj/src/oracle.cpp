#include "gps/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gps/penalty.hpp"
#include "gps/quadrature.hpp"

namespace gps::oracle {

namespace {

// Extended precision keeps the cancellation in the differentiation step
// well below the tolerances the oracle is used with.
using Real = long double;

Real naive(std::span<const double> t, std::size_t j, int d, Real x) {
  if (d == 1) return (t[j] <= x && x < t[j + 1]) ? 1.0L : 0.0L;
  Real v = 0.0L;
  const Real g0 = static_cast<Real>(t[j + d - 1]) - t[j];
  const Real g1 = static_cast<Real>(t[j + d]) - t[j + 1];
  if (g0 > 0.0L) v += (x - t[j]) / g0 * naive(t, j, d - 1, x);
  if (g1 > 0.0L) v += (t[j + d] - x) / g1 * naive(t, j + 1, d - 1, x);
  return v;
}

}  // namespace

double bspline_naive(std::span<const double> t, std::size_t j, int d, double x) {
  return static_cast<double>(naive(t, j, d, x));
}

Eigen::MatrixXd derivative_penalty_by_definition(const KnotVector& kv, int m) {
  const int d = kv.order();
  const auto t = kv.knots();
  const auto p = static_cast<std::size_t>(kv.num_basis());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);

  // Chebyshev sample points and the Vandermonde matrix in u on [-1, 1].
  using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  VectorR u(d);
  for (int i = 0; i < d; ++i) u(i) = std::cos(std::numbers::pi_v<Real> * (i + 0.5L) / d);
  MatrixR vander(d, d);
  for (int i = 0; i < d; ++i) {
    for (int c = 0; c < d; ++c) vander(i, c) = std::pow(u(i), c);
  }
  const auto lu = vander.fullPivLu();
  const GaussRule rule = gauss_legendre(d + 2);

  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double lo = t[i];
    const double hi = t[i + 1];
    if (!(hi > lo) || lo < kv.lower() || hi > kv.upper()) continue;
    const Real half = 0.5L * (static_cast<Real>(hi) - lo);
    const Real mid = 0.5L * (static_cast<Real>(hi) + lo);
    const std::size_t first = i + 1 - d;

    // derivative values of each active B-spline at the quadrature points
    MatrixR dv(d, rule.nodes.size());
    for (int r = 0; r < d; ++r) {
      VectorR samples(d);
      for (int k = 0; k < d; ++k) samples(k) = naive(t, first + r, d, mid + half * u(k));
      VectorR coef = lu.solve(samples);
      for (int s_ = 0; s_ < m; ++s_) {
        for (int c = 0; c + 1 < d; ++c) coef(c) = (c + 1) * coef(c + 1);
        coef(d - 1 - s_) = 0.0;
      }
      const Real chain = std::pow(1.0L / half, m);
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        Real val = 0.0L;
        for (int c = d - 1; c >= 0; --c) val = val * rule.nodes[g] + coef(c);
        dv(r, g) = val * chain;
      }
    }
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        Real acc = 0.0L;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
          acc += rule.weights[g] * dv(r, g) * dv(c, g);
        }
        s(first + r, first + c) += static_cast<double>(half * acc);
      }
    }
  }
  return s;
}

SandwichCheck check_sandwich(const KnotVector& kv, int m) {
  const Eigen::MatrixXd fast = derivative_penalty(kv, m).matrix.to_dense();
  const Eigen::MatrixXd ref = derivative_penalty_by_definition(kv, m);
  SandwichCheck out;
  out.rel_frobenius = (fast - ref).norm() / ref.norm();
  out.max_abs = (fast - ref).cwiseAbs().maxCoeff();
  return out;
}

KnotVector random_knots(std::mt19937_64& rng, int d, long max_interior) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<long> kdist(0, max_interior);
  const double a = -2.0 + 4.0 * unif(rng);
  const double len = 0.5 + 4.5 * unif(rng);
  const double b = a + len;
  const long k = kdist(rng);

  std::vector<double> interior;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    interior.clear();
    for (long i = 0; i < k; ++i) interior.push_back(a + len * unif(rng));
    std::sort(interior.begin(), interior.end());
    double min_gap = len;
    double prev = a;
    for (double s : interior) {
      min_gap = std::min(min_gap, s - prev);
      prev = s;
    }
    min_gap = std::min(min_gap, b - prev);
    if (min_gap > 0.02 * len / (k + 1)) break;
  }

  const bool clamped = unif(rng) < 0.5;
  std::vector<double> t;
  std::vector<double> left;
  double edge = a;
  for (int i = 0; i < d - 1; ++i) {
    if (!clamped) edge -= len / (k + 1) * (0.3 + unif(rng));
    left.push_back(edge);
  }
  t.insert(t.end(), left.rbegin(), left.rend());
  t.push_back(a);
  t.insert(t.end(), interior.begin(), interior.end());
  t.push_back(b);
  edge = b;
  for (int i = 0; i < d - 1; ++i) {
    if (!clamped) edge += len / (k + 1) * (0.3 + unif(rng));
    t.push_back(edge);
  }
  return KnotVector(std::move(t), d);
}

}  // namespace gps::oracle
