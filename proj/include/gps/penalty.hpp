#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "gps/banded.hpp"
#include "gps/basis.hpp"
#include "gps/knots.hpp"

namespace gps {

enum class DiffKind { Standard, General };

// (p - m) x p difference operator with m super-diagonals.
struct DiffMatrix {
  DiffKind kind = DiffKind::Standard;
  int order = 0;
  UpperBand band;

  std::size_t rows() const { return band.rows(); }
  std::size_t cols() const { return band.cols(); }
  std::vector<double> apply(std::span<const double> beta) const { return band.multiply(beta); }
  Eigen::MatrixXd to_dense() const { return band.to_dense(); }
};

// Rows of signed binomial coefficients, e.g. (1, -2, 1) for m = 2.
DiffMatrix standard_diff(std::size_t p, int m);

// Knot-weighted first difference used at step i of the general difference
// recursion: a (p - i) x (p - i + 1) matrix with rows (-1, 1) / w_r, where
// w_r = (t_{r+d} - t_{r+i}) / (d - i) in 0-based knot indices.
UpperBand weighted_difference(const KnotVector& kv, int i);

// General difference matrix: the product of weighted differences for steps
// m, ..., 1. Maps spline coefficients to those of f^(m). Requires
// 1 <= m <= d - 1.
DiffMatrix general_diff(const KnotVector& kv, int m);

// Gram matrix of the order-(d-m) B-splines on (t_j), j = 1+m..K-m,
// integrated over [a, b], with its Cholesky factor.
struct GramMatrix {
  SymBand matrix;
  UpperBand factor;  // matrix = factor^T factor
};

GramMatrix gram(const KnotVector& kv, int m);

enum class PenaltyFlavor { Difference, Derivative };

// Symmetric p x p penalty with a banded root: root^T root = matrix.
struct PenaltyMatrix {
  PenaltyFlavor flavor = PenaltyFlavor::Difference;
  int order = 0;
  DiffMatrix diff;
  SymBand matrix;
  UpperBand root;
  std::optional<GramMatrix> gram;  // derivative flavor only

  std::size_t size() const { return matrix.size(); }
};

// S = D^T D with root D.
PenaltyMatrix difference_penalty(DiffMatrix diff);

// Integrated squared m-th derivative, assembled by the sandwich
// S = D^T Sbar D from the general difference matrix and the lower-order
// Gram matrix; the root is K = U D with U the Cholesky factor of Sbar.
PenaltyMatrix derivative_penalty(const KnotVector& kv, int m);

// p x m basis of the null space of the penalty root, normalized so that its
// first m rows are the identity.
Eigen::MatrixXd null_space_basis(const PenaltyMatrix& penalty);

}  // namespace gps
