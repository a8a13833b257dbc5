#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gps/banded.hpp"
#include "gps/basis.hpp"
#include "gps/knots.hpp"
#include "gps/penalty.hpp"

namespace gps {

// GCV search over log10(lambda). The grid is shifted by
// log10(trace(B^T B) / trace(S)) so that it covers the same range of
// effective degrees of freedom whatever the scale of the penalty.
struct LambdaSearch {
  double log10_lo = -8.0;
  double log10_hi = 8.0;
  int grid_points = 41;
  double tolerance = 1e-3;  // golden-section stopping width in log10 lambda
  bool scale_by_trace = true;
};

struct FitConfig {
  BasisSpec basis;
  PenaltyMatrix penalty;
  std::optional<double> lambda;  // empty: select by GCV
  LambdaSearch search{};
};

struct FitResult {
  std::vector<double> beta;
  double lambda = 0.0;
  double edf = 0.0;
  double gcv = 0.0;
  double rss = 0.0;
  std::vector<double> fitted;
  // Set when every grid candidate gave the same GCV; lambda is then the
  // largest grid value.
  bool flat_gcv = false;
  // Grid evaluated by select_lambda (empty for fixed-lambda fits).
  std::vector<double> grid_lambda;
  std::vector<double> grid_gcv;
};

// Data and basis prepared once for repeated solves at different lambda.
// B^T B + lambda S is factorized as R^T R, with R obtained by Givens
// rotations of the stacked rows [R_B; sqrt(lambda) root], where R_B is the
// triangular factor of B. All factors keep the band structure.
class PenalizedProblem {
 public:
  PenalizedProblem(BasisSpec basis, PenaltyMatrix penalty, std::span<const double> x,
                   std::span<const double> y);

  std::size_t num_obs() const { return y_.size(); }
  std::size_t num_coef() const { return basis_.size(); }
  const BasisSpec& basis() const { return basis_; }
  const PenaltyMatrix& penalty() const { return penalty_; }
  const DesignMatrix& design() const { return design_; }
  const SymBand& normal_matrix() const { return btb_; }
  std::span<const double> response() const { return y_; }

  FitResult solve(double lambda) const;
  double edf(double lambda) const;
  FitResult select_lambda(const LambdaSearch& search = {}) const;

  // Multiplier applied to the log10 grid, see LambdaSearch.
  double lambda_scale(const LambdaSearch& search) const;

 private:
  // Givens factorization of [R_B; sqrt(lambda) root]; throws
  // RankDeficiencyError if a pivot vanishes.
  BandedLeastSquares assemble(double lambda) const;
  double edf_from_factor(const UpperBand& r) const;

  BasisSpec basis_;
  PenaltyMatrix penalty_;
  std::vector<double> y_;
  DesignMatrix design_;
  SymBand btb_;
  BandedLeastSquares data_qr_;
};

FitResult solve(std::span<const double> x, std::span<const double> y, const FitConfig& cfg);
double edf(std::span<const double> x, const FitConfig& cfg, double lambda);
FitResult select_lambda(std::span<const double> x, std::span<const double> y,
                        const FitConfig& cfg);

enum class KnotStrategy { Uniform, Quantile, Given };
enum class PenaltyKind { StandardDifference, GeneralDifference, Derivative };

std::string to_string(KnotStrategy s);
std::string to_string(PenaltyKind k);
KnotStrategy parse_knot_strategy(const std::string& s);
PenaltyKind parse_penalty_kind(const std::string& s);

PenaltyMatrix build_penalty(PenaltyKind kind, const KnotVector& kv, int m);

struct FitOptions {
  KnotStrategy knots = KnotStrategy::Quantile;
  long k = 10;
  int order = 4;
  int penalty_order = 2;
  PenaltyKind penalty = PenaltyKind::GeneralDifference;
  std::optional<double> lambda;
  // Non-uniform knots with the standard difference penalty are refused
  // unless this is set.
  bool force_naive = false;
  std::optional<std::pair<double, double>> domain;  // default [min x, max x]
  std::optional<KnotVector> given_knots;            // KnotStrategy::Given
  LambdaSearch search{};
  std::size_t grid_size = 512;
};

struct CurveFit {
  KnotVector knots;
  FitResult fit;
  std::vector<double> grid_x;
  std::vector<double> grid_y;
};

CurveFit fit_curve(std::span<const double> x, std::span<const double> y, const FitOptions& opt);

}  // namespace gps
