#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gps/errors.hpp"
#include "gps/fit.hpp"
#include "support.hpp"

using gps::KnotVector;

namespace {

struct Data {
  std::vector<double> x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::uint64_t seed, double noise = 0.1) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(2.0, 1.0);
  std::normal_distribution<double> e(0.0, noise);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = g(rng), v = g(rng);
    d.x.push_back(u / (u + v));
  }
  std::sort(d.x.begin(), d.x.end());
  for (double x : d.x) d.y.push_back(std::sin(6.0 * x) + e(rng));
  return d;
}

gps::PenalizedProblem problem(const KnotVector& kv, gps::PenaltyKind kind, int m, const Data& d) {
  return gps::PenalizedProblem(gps::BasisSpec(kv), gps::build_penalty(kind, kv, m), d.x, d.y);
}

KnotVector quantile_knots(const Data& d, long k, int order = 4) {
  return gps::place_quantile_clamped(d.x, d.x.front(), d.x.back(), k, order);
}

struct Dense {
  Eigen::VectorXd beta;
  double edf;
};

// Dense QR least squares on the stacked system [B; sqrt(lambda) K] and an
// explicit edf trace.
Dense dense_fit(const gps::PenalizedProblem& pr, double lambda) {
  const Eigen::MatrixXd b = pr.design().to_dense();
  const Eigen::MatrixXd k = pr.penalty().root.to_dense();
  const auto y = pr.response();
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd stacked(n + k.rows(), b.cols());
  stacked << b, std::sqrt(lambda) * k;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(stacked.rows());
  rhs.head(n) = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  Dense out;
  out.beta = qr.solve(rhs);
  Eigen::MatrixXd bn = Eigen::MatrixXd::Zero(stacked.rows(), b.cols());
  bn.topRows(n) = b;
  // edf = trace((A^T A)^{-1} B^T B) with A the stacked matrix
  out.edf = qr.solve(bn).trace();
  return out;
}

Eigen::VectorXd as_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double objective(const gps::PenalizedProblem& pr, const Eigen::VectorXd& beta, double lambda) {
  const Eigen::MatrixXd b = pr.design().to_dense();
  const auto y = pr.response();
  const Eigen::VectorXd r =
      Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) - b * beta;
  return r.squaredNorm() + lambda * beta.dot(pr.penalty().matrix.to_dense() * beta);
}

}  // namespace

TEST_CASE("banded solver matches a dense solve") {
  const Data d = make_data(300, 1);
  const KnotVector kv = quantile_knots(d, 12);
  for (auto kind : {gps::PenaltyKind::GeneralDifference, gps::PenaltyKind::Derivative,
                    gps::PenaltyKind::StandardDifference}) {
    for (int m = 1; m <= 3; ++m) {
      const auto pr = problem(kv, kind, m, d);
      for (double rel : {1e-6, 1e-2, 1.0, 1e3}) {
        const double lambda = rel * pr.lambda_scale({});
        const gps::FitResult f = pr.solve(lambda);
        const Dense ref = dense_fit(pr, lambda);
        CHECK((as_vec(f.beta) - ref.beta).cwiseAbs().maxCoeff() <
              1e-9 * (1.0 + ref.beta.cwiseAbs().maxCoeff()));
        CHECK(f.edf == doctest::Approx(ref.edf).epsilon(1e-9));
        const double n = static_cast<double>(d.x.size());
        CHECK(f.gcv == doctest::Approx(n * f.rss / ((n - f.edf) * (n - f.edf))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("solution satisfies the normal equations and minimizes the objective") {
  const Data d = make_data(200, 2);
  const KnotVector kv = quantile_knots(d, 15);
  const auto pr = problem(kv, gps::PenaltyKind::Derivative, 2, d);
  const double lambda = 1e-3;
  const gps::FitResult f = pr.solve(lambda);
  const Eigen::VectorXd beta = as_vec(f.beta);
  const Eigen::MatrixXd b = pr.design().to_dense();
  const Eigen::MatrixXd s = pr.penalty().matrix.to_dense();
  const Eigen::VectorXd rhs = b.transpose() * as_vec(d.y);
  const Eigen::VectorXd res = (b.transpose() * b + lambda * s) * beta - rhs;
  CHECK(res.cwiseAbs().maxCoeff() < 1e-10 * rhs.cwiseAbs().maxCoeff());

  const double base = objective(pr, beta, lambda);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1e-3);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd pert = beta;
    for (Eigen::Index j = 0; j < pert.size(); ++j) pert(j) += z(rng);
    CHECK(objective(pr, pert, lambda) > base);
  }
}

TEST_CASE("lambda = 0 with as many points as coefficients interpolates") {
  const KnotVector kv = gps::place_uniform(0.0, 1.0, 6, 4);
  const std::size_t p = kv.num_basis();
  Data d;
  for (std::size_t i = 0; i < p; ++i) {
    d.x.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(p));
    d.y.push_back(std::cos(3.0 * d.x.back()) + (i % 2 ? 0.2 : -0.1));
  }
  const auto pr = problem(kv, gps::PenaltyKind::GeneralDifference, 2, d);
  const gps::FitResult f = pr.solve(0.0);
  for (std::size_t i = 0; i < p; ++i) CHECK(f.fitted[i] == doctest::Approx(d.y[i]).epsilon(1e-10));
  CHECK(f.edf == doctest::Approx(static_cast<double>(p)).epsilon(1e-10));
  CHECK(f.rss < 1e-20);
}

TEST_CASE("edf runs from p down to m and decreases with lambda") {
  const Data d = make_data(500, 4);
  const KnotVector kv = quantile_knots(d, 10);
  for (int m = 1; m <= 3; ++m) {
    for (auto kind : {gps::PenaltyKind::GeneralDifference, gps::PenaltyKind::Derivative}) {
      const auto pr = problem(kv, kind, m, d);
      const double scale = pr.lambda_scale({});
      CHECK(pr.edf(0.0) == doctest::Approx(static_cast<double>(pr.num_coef())).epsilon(1e-10));
      CHECK(std::abs(pr.edf(1e12 * scale) - m) < 1e-3);
      double prev = pr.edf(0.0);
      for (double e = -6; e <= 10; e += 0.5) {
        const double cur = pr.edf(std::pow(10.0, e) * scale);
        CHECK(cur <= prev + 1e-10);
        CHECK(cur >= m - 1e-8);
        prev = cur;
      }
    }
  }
}

TEST_CASE("large lambda tends to the polynomial least-squares fit") {
  const Data d = make_data(400, 5, 0.5);
  const KnotVector kv = quantile_knots(d, 20);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(d.x.size()), 2);
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    v(static_cast<Eigen::Index>(i), 0) = 1.0;
    v(static_cast<Eigen::Index>(i), 1) = d.x[i];
  }
  const Eigen::VectorXd line = v * v.colPivHouseholderQr().solve(as_vec(d.y));

  std::vector<double> gaps;
  for (double lambda : {1e4, 1e6, 1e8}) {
    const auto pr = problem(kv, gps::PenaltyKind::GeneralDifference, 2, d);
    const gps::FitResult f = pr.solve(lambda);
    gaps.push_back((as_vec(f.fitted) - line).cwiseAbs().maxCoeff());
  }
  CHECK(gaps[2] < 1e-4);
  // the distance to the limit shrinks like 1 / lambda
  CHECK(gaps[1] < 0.05 * gaps[0]);
  CHECK(gaps[2] < 0.05 * gaps[1]);

  const auto naive = problem(kv, gps::PenaltyKind::StandardDifference, 2, d);
  CHECK((as_vec(naive.solve(1e8).fitted) - line).cwiseAbs().maxCoeff() > 1e-2);
  const auto deriv = problem(kv, gps::PenaltyKind::Derivative, 2, d);
  CHECK((as_vec(deriv.solve(1e8 * deriv.lambda_scale({})).fitted) - line).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("GCV selection lands on a local minimum of the grid") {
  const Data d = make_data(300, 6, 0.3);
  const KnotVector kv = quantile_knots(d, 25);
  const auto pr = problem(kv, gps::PenaltyKind::GeneralDifference, 2, d);
  const gps::FitResult f = pr.select_lambda();
  REQUIRE(f.grid_lambda.size() == 41);
  REQUIRE(f.grid_gcv.size() == 41);
  CHECK_FALSE(f.flat_gcv);
  const auto best = std::min_element(f.grid_gcv.begin(), f.grid_gcv.end()) - f.grid_gcv.begin();
  CHECK(f.gcv <= f.grid_gcv[best] + 1e-15);
  if (best > 0) CHECK(f.gcv <= f.grid_gcv[best - 1]);
  if (best + 1 < 41) CHECK(f.gcv <= f.grid_gcv[best + 1]);
  CHECK(f.edf > 3.0);
  CHECK(f.edf < static_cast<double>(pr.num_coef()));
  for (std::size_t i = 1; i < f.grid_lambda.size(); ++i) {
    CHECK(f.grid_lambda[i] > f.grid_lambda[i - 1]);
  }
}

TEST_CASE("data in the null space give a flat GCV curve") {
  Data d;
  for (int i = 0; i < 100; ++i) {
    d.x.push_back(i / 99.0);
    d.y.push_back(2.0 - 3.0 * d.x.back());
  }
  const KnotVector kv = gps::place_uniform(0.0, 1.0, 8, 4);
  const auto pr = problem(kv, gps::PenaltyKind::GeneralDifference, 2, d);
  const gps::FitResult f = pr.select_lambda();
  CHECK(f.flat_gcv);
  CHECK(f.rss < 1e-20);
  CHECK(f.lambda == doctest::Approx(f.grid_lambda.back()));
  CHECK(f.edf == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("input validation") {
  const KnotVector kv = gps::place_uniform(0.0, 1.0, 5, 4);
  Data d{{0.1, 0.1, 0.1, 0.5}, {1, 2, 3, 4}};
  CHECK_THROWS_AS(problem(kv, gps::PenaltyKind::GeneralDifference, 3, d), std::invalid_argument);

  Data out{{0.1, 0.2, 1.5}, {1, 2, 3}};
  CHECK_THROWS_AS(problem(kv, gps::PenaltyKind::GeneralDifference, 1, out), gps::DomainError);

  Data ok = make_data(50, 7);
  const auto pr = problem(kv, gps::PenaltyKind::GeneralDifference, 2, ok);
  CHECK_THROWS_AS(pr.solve(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(pr.solve(std::nan("")), std::invalid_argument);

  // unpenalized fit with empty basis support is rank deficient
  Data clustered;
  for (int i = 0; i < 40; ++i) {
    clustered.x.push_back(0.01 * i / 39.0);
    clustered.y.push_back(i);
  }
  clustered.x.push_back(1.0);
  clustered.y.push_back(0.0);
  const auto sparse = problem(kv, gps::PenaltyKind::GeneralDifference, 2, clustered);
  CHECK_THROWS_AS(sparse.solve(0.0), gps::RankDeficiencyError);
  CHECK_NOTHROW(sparse.solve(1.0));
}

TEST_CASE("fit_curve end to end") {
  const Data d = make_data(400, 8);
  gps::FitOptions opt;
  opt.k = 15;
  const gps::CurveFit cf = gps::fit_curve(d.x, d.y, opt);
  CHECK(cf.knots.num_basis() == 19);
  CHECK(cf.grid_x.size() == opt.grid_size);
  CHECK(cf.grid_x.front() == cf.knots.lower());
  CHECK(cf.grid_x.back() == cf.knots.upper());
  double err = 0.0;
  for (std::size_t i = 0; i < cf.grid_x.size(); ++i) {
    err = std::max(err, std::abs(cf.grid_y[i] - std::sin(6.0 * cf.grid_x[i])));
  }
  CHECK(err < 0.1);

  gps::FitOptions naive = opt;
  naive.penalty = gps::PenaltyKind::StandardDifference;
  CHECK_THROWS_AS(gps::fit_curve(d.x, d.y, naive), gps::ConfigError);
  naive.force_naive = true;
  CHECK_NOTHROW(gps::fit_curve(d.x, d.y, naive));
  naive.knots = gps::KnotStrategy::Uniform;
  naive.force_naive = false;
  CHECK_NOTHROW(gps::fit_curve(d.x, d.y, naive));

  gps::FitOptions fixed = opt;
  fixed.lambda = 0.5;
  CHECK(gps::fit_curve(d.x, d.y, fixed).fit.lambda == 0.5);
  CHECK(gps::fit_curve(d.x, d.y, fixed).fit.grid_lambda.empty());

  CHECK(gps::parse_penalty_kind(gps::to_string(gps::PenaltyKind::Derivative)) ==
        gps::PenaltyKind::Derivative);
  CHECK_THROWS(gps::parse_knot_strategy("bogus"));
}
