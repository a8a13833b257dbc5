#pragma once

// Reference computations that follow the textbook definitions directly and
// share no code path with the banded implementations they are used to check.

#include <cstddef>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "gps/knots.hpp"

namespace gps::oracle {

// B_{j,d}(x) by the plain two-term recursion from order-1 indicators
// (half-open intervals). Exponential in d; only for checking.
double bspline_naive(std::span<const double> t, std::size_t j, int d, double x);

// (S)_{uv} = integral over [a, b] of B_u^(m) B_v^(m). On every knot interval
// each B-spline is sampled at d Chebyshev points, interpolated, and the
// interpolant is differentiated m times (a finite-difference stencil that is
// exact for the polynomial piece); products are then integrated by a
// Gauss-Legendre rule of d + 2 points.
Eigen::MatrixXd derivative_penalty_by_definition(const KnotVector& kv, int m);

struct SandwichCheck {
  double rel_frobenius = 0.0;  // ||S - S_oracle||_F / ||S_oracle||_F
  double max_abs = 0.0;
};

// Compares derivative_penalty(kv, m).matrix with the definition above.
SandwichCheck check_sandwich(const KnotVector& kv, int m);

// Random valid knot vector: order d, 0..max_interior interior knots with a
// minimum relative gap, clamped or free auxiliary knots at random.
KnotVector random_knots(std::mt19937_64& rng, int d, long max_interior = 12);

}  // namespace gps::oracle
