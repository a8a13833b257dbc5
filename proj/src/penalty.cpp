#include "gps/penalty.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gps/errors.hpp"
#include "gps/quadrature.hpp"

namespace gps {

namespace {

void check_general_order(const KnotVector& kv, int m) {
  const int d = kv.order();
  if (m < 1 || m > d - 1) {
    throw std::invalid_argument("penalty order m = " + std::to_string(m) +
                                " must satisfy 1 <= m <= d - 1 = " + std::to_string(d - 1) +
                                " (no order-" + std::to_string(d) +
                                " difference exists for order-" + std::to_string(d) +
                                " B-splines)");
  }
}

}  // namespace

DiffMatrix standard_diff(std::size_t p, int m) {
  if (m < 1 || static_cast<std::size_t>(m) >= p) {
    throw std::invalid_argument("standard_diff: need 1 <= m < p (m = " + std::to_string(m) +
                                ", p = " + std::to_string(p) + ")");
  }
  // Signed binomial row for an order-m difference.
  std::vector<double> coef{1.0};
  for (int s = 0; s < m; ++s) {
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t i = 0; i < coef.size(); ++i) {
      next[i] -= coef[i];
      next[i + 1] += coef[i];
    }
    coef = std::move(next);
  }
  DiffMatrix d{DiffKind::Standard, m, UpperBand(p - m, p, m)};
  for (std::size_t r = 0; r < p - m; ++r) {
    for (int i = 0; i <= m; ++i) d.band.at(r, r + i) = coef[i];
  }
  return d;
}

UpperBand weighted_difference(const KnotVector& kv, int i) {
  check_general_order(kv, i);
  const int d = kv.order();
  const auto p = static_cast<std::size_t>(kv.num_basis());
  const std::size_t rows = p - i;
  UpperBand delta(rows, rows + 1, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    const double gamma = kv[r + d] - kv[r + i];
    if (!(gamma > 0.0)) {
      throw SingularWeightError("zero lag-" + std::to_string(d - i) +
                                " knot difference t[" + std::to_string(r + d) + "] - t[" +
                                std::to_string(r + i) + "] (repeated interior knot)");
    }
    const double inv = (d - i) / gamma;
    delta.at(r, r) = -inv;
    delta.at(r, r + 1) = inv;
  }
  return delta;
}

DiffMatrix general_diff(const KnotVector& kv, int m) {
  check_general_order(kv, m);
  UpperBand acc = weighted_difference(kv, 1);
  for (int i = 2; i <= m; ++i) acc = multiply(weighted_difference(kv, i), acc);
  return DiffMatrix{DiffKind::General, m, std::move(acc)};
}

GramMatrix gram(const KnotVector& kv, int m) {
  check_general_order(kv, m);
  const BasisSpec lower(kv.trimmed(m));
  const int q = lower.order();
  const std::size_t n = lower.size();
  const GaussRule rule = gauss_legendre(q);

  SymBand s(n, static_cast<std::size_t>(q - 1));
  std::vector<double> values(q);
  const auto t = kv.knots();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double lo = t[i];
    const double hi = t[i + 1];
    if (!(hi > lo) || lo < kv.lower() || hi > kv.upper()) continue;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int g = 0; g < q; ++g) {
      const double x = mid + half * rule.nodes[g];
      const std::size_t off = lower.eval_row_into(x, values);
      const double w = half * rule.weights[g];
      for (int r = 0; r < q; ++r) {
        for (int c = r; c < q; ++c) s.at(off + r, off + c) += w * values[r] * values[c];
      }
    }
  }
  UpperBand u = cholesky(s);
  return GramMatrix{std::move(s), std::move(u)};
}

PenaltyMatrix difference_penalty(DiffMatrix diff) {
  PenaltyMatrix pen;
  pen.flavor = PenaltyFlavor::Difference;
  pen.order = diff.order;
  pen.matrix = gram_of_rows(diff.band);
  pen.root = diff.band;
  pen.diff = std::move(diff);
  return pen;
}

PenaltyMatrix derivative_penalty(const KnotVector& kv, int m) {
  PenaltyMatrix pen;
  pen.flavor = PenaltyFlavor::Derivative;
  pen.order = m;
  pen.diff = general_diff(kv, m);
  pen.gram = gram(kv, m);
  pen.matrix = sandwich(pen.diff.band, pen.gram->matrix);
  pen.root = multiply(pen.gram->factor, pen.diff.band);
  return pen;
}

Eigen::MatrixXd null_space_basis(const PenaltyMatrix& penalty) {
  const UpperBand& d = penalty.diff.band;
  const std::size_t p = d.cols();
  const auto m = static_cast<std::size_t>(penalty.diff.order);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, m);
  for (std::size_t col = 0; col < m; ++col) {
    h(col, col) = 1.0;
    // Row r of D fixes coefficient r + m from the m before it.
    for (std::size_t r = 0; r < d.rows(); ++r) {
      double acc = 0.0;
      for (std::size_t c = r; c < r + m; ++c) acc += d(r, c) * h(c, col);
      h(r + m, col) = -acc / d(r, r + m);
    }
  }
  return h;
}

}  // namespace gps
