#pragma once

#include <vector>

namespace gps {

// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
// up to 2n - 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

}  // namespace gps
