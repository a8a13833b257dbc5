#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gps {

// Abscissa outside the spline domain [a, b].
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A lag difference of knots that must be strictly positive is zero.
class SingularWeightError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Incompatible combination of fitting options (e.g. naive P-spline without
// the force flag).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Factorization broke down on a matrix that should have been positive
// definite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The penalized normal equations are singular. The columns
// [first_column, last_column] are the coefficient window where the
// factorization lost rank.
class RankDeficiencyError : public NumericalError {
 public:
  RankDeficiencyError(std::size_t first_column, std::size_t last_column)
      : NumericalError("rank-deficient system: no information on coefficients " +
                       std::to_string(first_column) + ".." + std::to_string(last_column) +
                       " (add data in that knot span, or use lambda > 0)"),
        first_column_(first_column),
        last_column_(last_column) {}

  std::size_t first_column() const { return first_column_; }
  std::size_t last_column() const { return last_column_; }

 private:
  std::size_t first_column_;
  std::size_t last_column_;
};

}  // namespace gps
