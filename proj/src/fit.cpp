#include "gps/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gps/errors.hpp"

namespace gps {

namespace {

constexpr double kRankTolerance = 1e-12;

std::size_t count_distinct(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

}  // namespace

PenalizedProblem::PenalizedProblem(BasisSpec basis, PenaltyMatrix penalty,
                                   std::span<const double> x, std::span<const double> y)
    : basis_(std::move(basis)),
      penalty_(std::move(penalty)),
      y_(y.begin(), y.end()),
      design_(design_matrix(basis_, x)),
      btb_(basis_.size(), static_cast<std::size_t>(basis_.order() - 1)),
      data_qr_(basis_.size(), static_cast<std::size_t>(basis_.order() - 1)) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  if (x.empty()) throw std::invalid_argument("no observations");
  if (penalty_.size() != basis_.size()) {
    throw std::invalid_argument("penalty dimension " + std::to_string(penalty_.size()) +
                                " does not match basis dimension " +
                                std::to_string(basis_.size()));
  }
  const auto m = static_cast<std::size_t>(penalty_.order);
  if (count_distinct(x) < m + 1) {
    throw std::invalid_argument("need at least " + std::to_string(m + 1) +
                                " distinct x values for penalty order " + std::to_string(m));
  }

  const int d = basis_.order();
  for (std::size_t i = 0; i < design_.rows(); ++i) {
    const auto row = design_.row(i);
    const std::size_t off = design_.offset(i);
    for (int r = 0; r < d; ++r) {
      for (int c = r; c < d; ++c) btb_.at(off + r, off + c) += row[r] * row[c];
    }
  }

  std::vector<std::size_t> order(design_.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return design_.offset(a) < design_.offset(b);
  });
  for (std::size_t i : order) data_qr_.add_row(design_.offset(i), design_.row(i), y_[i]);
}

BandedLeastSquares PenalizedProblem::assemble(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be finite and nonnegative");
  }
  const UpperBand& root = penalty_.root;
  const std::size_t p = num_coef();
  const std::size_t w = std::max(data_qr_.width(), root.width());
  BandedLeastSquares acc(p, w);
  const UpperBand& rb = data_qr_.factor();
  const double sl = std::sqrt(lambda);
  std::vector<double> row(w + 1);
  // Interleave both row sets by leading column to keep fill-in inside the band.
  for (std::size_t c = 0; c < p; ++c) {
    if (data_qr_.occupied(c)) {
      const std::size_t len = rb.row_end(c) - c + 1;
      for (std::size_t k = 0; k < len; ++k) row[k] = rb(c, c + k);
      acc.add_row(c, std::span<const double>(row.data(), len), data_qr_.rhs()[c]);
    }
    if (lambda > 0.0 && c < root.rows()) {
      const std::size_t len = root.row_end(c) - c + 1;
      for (std::size_t k = 0; k < len; ++k) row[k] = sl * root(c, c + k);
      acc.add_row(c, std::span<const double>(row.data(), len), 0.0);
    }
  }
  const std::size_t bad = acc.first_deficient_column(kRankTolerance);
  if (bad < p) throw RankDeficiencyError(bad > w ? bad - w : 0, bad);
  return acc;
}

double PenalizedProblem::edf_from_factor(const UpperBand& r) const {
  const SymBand sigma = band_inverse(r);
  const std::size_t p = num_coef();
  const std::size_t w = btb_.width();
  double trace = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    trace += sigma(i, i) * btb_(i, i);
    for (std::size_t j = i + 1; j <= std::min(p - 1, i + w); ++j) {
      trace += 2.0 * sigma(i, j) * btb_(i, j);
    }
  }
  return trace;
}

double PenalizedProblem::edf(double lambda) const {
  return edf_from_factor(assemble(lambda).factor());
}

FitResult PenalizedProblem::solve(double lambda) const {
  const BandedLeastSquares acc = assemble(lambda);

  FitResult res;
  res.lambda = lambda;
  res.beta = solve_upper(acc.factor(), acc.rhs());
  res.fitted = design_.multiply(res.beta);
  double rss = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double e = y_[i] - res.fitted[i];
    rss += e * e;
  }
  res.rss = rss;
  res.edf = edf_from_factor(acc.factor());
  const double n = static_cast<double>(y_.size());
  res.gcv = n > res.edf ? n * rss / ((n - res.edf) * (n - res.edf))
                        : std::numeric_limits<double>::infinity();
  return res;
}

double PenalizedProblem::lambda_scale(const LambdaSearch& search) const {
  if (!search.scale_by_trace) return 1.0;
  double tb = 0.0;
  double ts = 0.0;
  for (std::size_t i = 0; i < num_coef(); ++i) {
    tb += btb_(i, i);
    ts += penalty_.matrix(i, i);
  }
  return (tb > 0.0 && ts > 0.0) ? tb / ts : 1.0;
}

FitResult PenalizedProblem::select_lambda(const LambdaSearch& search) const {
  if (search.grid_points < 2 || !(search.log10_hi > search.log10_lo)) {
    throw std::invalid_argument("lambda search needs at least two grid points on a proper range");
  }
  const double shift = std::log10(lambda_scale(search));
  auto gcv_at = [&](double s) {
    try {
      return solve(std::pow(10.0, shift + s)).gcv;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const int g = search.grid_points;
  const double step = (search.log10_hi - search.log10_lo) / (g - 1);
  std::vector<double> s(g);
  std::vector<double> score(g);
  for (int i = 0; i < g; ++i) {
    s[i] = search.log10_lo + i * step;
    score[i] = gcv_at(s[i]);
  }

  // Lowest lambda wins ties.
  int best = 0;
  for (int i = 1; i < g; ++i) {
    if (score[i] < score[best]) best = i;
  }
  if (!std::isfinite(score[best])) {
    throw NumericalError("GCV could not be evaluated at any grid value of lambda");
  }

  double mean_sq = 0.0;
  for (double v : y_) mean_sq += v * v;
  mean_sq /= static_cast<double>(y_.size());
  const auto [lo_it, hi_it] = std::minmax_element(score.begin(), score.end());
  const bool flat = std::isfinite(*hi_it) && (*hi_it - *lo_it) <= 1e-12 * mean_sq;

  double winner = s[best];
  if (flat) {
    winner = s[g - 1];
  } else {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = s[std::max(best - 1, 0)];
    double b = s[std::min(best + 1, g - 1)];
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = gcv_at(c);
    double fd = gcv_at(d);
    while (b - a > search.tolerance) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = gcv_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = gcv_at(d);
      }
    }
    const double mid = 0.5 * (a + b);
    const double fmid = gcv_at(mid);
    double fbest = score[best];
    for (auto [sv, fv] : {std::pair{c, fc}, std::pair{d, fd}, std::pair{mid, fmid}}) {
      if (fv < fbest) {
        fbest = fv;
        winner = sv;
      }
    }
  }

  FitResult res = solve(std::pow(10.0, shift + winner));
  res.flat_gcv = flat;
  res.grid_lambda.resize(g);
  for (int i = 0; i < g; ++i) res.grid_lambda[i] = std::pow(10.0, shift + s[i]);
  res.grid_gcv = std::move(score);
  return res;
}

FitResult solve(std::span<const double> x, std::span<const double> y, const FitConfig& cfg) {
  if (!cfg.lambda) throw std::invalid_argument("solve: lambda must be fixed");
  return PenalizedProblem(cfg.basis, cfg.penalty, x, y).solve(*cfg.lambda);
}

double edf(std::span<const double> x, const FitConfig& cfg, double lambda) {
  // The response does not enter the hat-matrix trace.
  const std::vector<double> zeros(x.size(), 0.0);
  return PenalizedProblem(cfg.basis, cfg.penalty, x, zeros).edf(lambda);
}

FitResult select_lambda(std::span<const double> x, std::span<const double> y,
                        const FitConfig& cfg) {
  return PenalizedProblem(cfg.basis, cfg.penalty, x, y).select_lambda(cfg.search);
}

std::string to_string(KnotStrategy s) {
  switch (s) {
    case KnotStrategy::Uniform: return "uniform";
    case KnotStrategy::Quantile: return "quantile";
    case KnotStrategy::Given: return "file";
  }
  return "?";
}

std::string to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::StandardDifference: return "standard";
    case PenaltyKind::GeneralDifference: return "general";
    case PenaltyKind::Derivative: return "derivative";
  }
  return "?";
}

KnotStrategy parse_knot_strategy(const std::string& s) {
  if (s == "uniform") return KnotStrategy::Uniform;
  if (s == "quantile") return KnotStrategy::Quantile;
  if (s == "file") return KnotStrategy::Given;
  throw std::invalid_argument("unknown knot strategy '" + s + "' (uniform|quantile|file)");
}

PenaltyKind parse_penalty_kind(const std::string& s) {
  if (s == "standard" || s == "difference-standard") return PenaltyKind::StandardDifference;
  if (s == "general" || s == "difference-general") return PenaltyKind::GeneralDifference;
  if (s == "derivative") return PenaltyKind::Derivative;
  throw std::invalid_argument("unknown penalty flavor '" + s +
                              "' (standard|general|derivative)");
}

PenaltyMatrix build_penalty(PenaltyKind kind, const KnotVector& kv, int m) {
  switch (kind) {
    case PenaltyKind::StandardDifference:
      return difference_penalty(standard_diff(static_cast<std::size_t>(kv.num_basis()), m));
    case PenaltyKind::GeneralDifference:
      return difference_penalty(general_diff(kv, m));
    case PenaltyKind::Derivative:
      return derivative_penalty(kv, m);
  }
  throw std::invalid_argument("unknown penalty kind");
}

CurveFit fit_curve(std::span<const double> x, std::span<const double> y, const FitOptions& opt) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("need at least two observations");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const double a = opt.domain ? opt.domain->first : *xmin;
  const double b = opt.domain ? opt.domain->second : *xmax;

  std::optional<KnotVector> kv;
  switch (opt.knots) {
    case KnotStrategy::Uniform:
      kv = place_uniform(a, b, opt.k, opt.order);
      break;
    case KnotStrategy::Quantile: {
      std::vector<double> sorted(x.begin(), x.end());
      std::sort(sorted.begin(), sorted.end());
      kv = place_quantile_clamped(sorted, a, b, opt.k, opt.order);
      break;
    }
    case KnotStrategy::Given:
      if (!opt.given_knots) throw ConfigError("knot strategy 'file' needs a knot vector");
      if (opt.given_knots->order() != opt.order) {
        throw ConfigError("knot vector order " + std::to_string(opt.given_knots->order()) +
                          " does not match requested order " + std::to_string(opt.order));
      }
      kv = *opt.given_knots;
      break;
  }

  if (opt.penalty == PenaltyKind::StandardDifference && !kv->is_uniform() && !opt.force_naive) {
    throw ConfigError(
        "standard difference penalty on non-uniform knots is the naive P-spline: its "
        "lambda -> infinity limit is not a polynomial. Use uniform knots, the general "
        "difference penalty, or force the combination explicitly");
  }

  BasisSpec basis(*kv);
  PenalizedProblem problem(basis, build_penalty(opt.penalty, *kv, opt.penalty_order), x, y);
  CurveFit out{*kv, opt.lambda ? problem.solve(*opt.lambda) : problem.select_lambda(opt.search),
               {}, {}};

  const Spline f(basis, out.fit.beta);
  const std::size_t g = std::max<std::size_t>(opt.grid_size, 2);
  out.grid_x.resize(g);
  out.grid_y.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    double xi = basis.lower() + (basis.upper() - basis.lower()) * static_cast<double>(i) /
                                    static_cast<double>(g - 1);
    if (i == g - 1) xi = basis.upper();
    out.grid_x[i] = xi;
    out.grid_y[i] = f(xi);
  }
  return out;
}

}  // namespace gps
