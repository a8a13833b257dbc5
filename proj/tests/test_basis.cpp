#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gps/basis.hpp"
#include "gps/errors.hpp"
#include "gps/penalty.hpp"
#include "support.hpp"

using gps::BasisSpec;
using gps::KnotVector;

namespace {

const KnotVector& worked() {
  static const KnotVector kv({0, 0, 0, 0, 1, 3, 4, 4, 4, 4}, 4);
  return kv;
}

// Full row of length p from the compressed row.
std::vector<double> expand(const BasisSpec& bs, double x) {
  const auto row = bs.eval_row(x);
  std::vector<double> full(bs.size(), 0.0);
  for (std::size_t r = 0; r < row.values.size(); ++r) full[row.offset + r] = row.values[r];
  return full;
}

}  // namespace

TEST_CASE("order 1 basis is the interval indicator") {
  const BasisSpec bs(KnotVector({0, 1, 2, 3, 4}, 1));
  const auto row = bs.eval_row(2.5);
  CHECK(row.offset == 2);
  REQUIRE(row.values.size() == 1);
  CHECK(row.values[0] == 1.0);
  CHECK(bs.eval_row(2.0).offset == 2);  // half-open on the left
  CHECK(bs.eval_row(4.0).offset == 3);  // closed at b
}

TEST_CASE("uniform cubic basis at an interior knot") {
  const BasisSpec bs(gps::place_uniform(0.0, 5.0, 4, 4));  // integer knots
  const auto full = expand(bs, 2.0);
  // B-splines with support [-1, 3], [0, 4], [1, 5] are nonzero at 2
  std::vector<double> nonzero;
  for (double v : full) {
    if (v != 0.0) nonzero.push_back(v);
  }
  REQUIRE(nonzero.size() == 3);
  CHECK(nonzero[0] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(nonzero[1] == doctest::Approx(4.0 / 6).epsilon(1e-14));
  CHECK(nonzero[2] == doctest::Approx(1.0 / 6).epsilon(1e-14));
}

TEST_CASE("clamped basis at the boundaries") {
  const BasisSpec bs(worked());
  const auto left = expand(bs, 0.0);
  CHECK(left[0] == 1.0);
  for (std::size_t j = 1; j < left.size(); ++j) CHECK(left[j] == 0.0);
  const auto right = expand(bs, 4.0);
  CHECK(right.back() == 1.0);
  for (std::size_t j = 0; j + 1 < right.size(); ++j) CHECK(right[j] == 0.0);
}

TEST_CASE("design row at x = 2 matches the full Cox-de Boor table") {
  const BasisSpec bs(worked());
  const auto fast = expand(bs, 2.0);
  const auto ref = support::all_bsplines(worked().knots(), 4, 2.0);
  REQUIRE(ref.size() == fast.size());
  for (std::size_t j = 0; j < ref.size(); ++j) CHECK(std::abs(fast[j] - ref[j]) < 1e-15);
}

TEST_CASE("design matrix rows agree with the reference on random knots") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 6;
    const KnotVector kv = support::random_knots(rng, d, trial % 9, trial % 2 == 0);
    const BasisSpec bs(kv);
    std::vector<double> x(40);
    for (double& v : x) v = kv.lower() + (kv.upper() - kv.lower()) * u(rng);
    x.push_back(kv.lower());
    x.push_back(kv.upper());
    std::sort(x.begin(), x.end());
    const gps::DesignMatrix b = gps::design_matrix(bs, x);
    const Eigen::MatrixXd dense = b.to_dense();
    const Eigen::MatrixXd ref = support::dense_design(kv, x);
    CHECK((dense - ref).cwiseAbs().maxCoeff() < 1e-13);
    for (std::size_t i = 1; i < x.size(); ++i) CHECK(b.offset(i) >= b.offset(i - 1));
  }
}

TEST_CASE("partition of unity and local support") {
  std::mt19937_64 rng(5);
  for (bool clamped : {true, false}) {
    for (int d = 1; d <= 6; ++d) {
      const KnotVector kv = clamped ? support::random_knots(rng, d, 7, true)
                                    : gps::place_uniform(-1.0, 2.0, 7, d);
      const BasisSpec bs(kv);
      double worst = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const double x = kv.lower() + (kv.upper() - kv.lower()) * i / 1000.0;
        const auto row = bs.eval_row(x);
        CHECK(row.values.size() == static_cast<std::size_t>(d));
        double s = 0.0;
        for (double v : row.values) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0 + 1e-12);
          s += v;
        }
        worst = std::max(worst, std::abs(s - 1.0));
      }
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("evaluation outside the domain is rejected") {
  const BasisSpec bs(worked());
  CHECK_THROWS_AS(bs.eval_row(-1e-9), gps::DomainError);
  CHECK_THROWS_AS(bs.eval_row(4.0 + 1e-9), gps::DomainError);
  CHECK_THROWS_AS(bs.eval_row(NAN), gps::DomainError);
  const std::vector<double> x{1.0, 5.0};
  CHECK_THROWS_AS(gps::design_matrix(bs, x), gps::DomainError);
}

TEST_CASE("design matrix at a single boundary point") {
  const BasisSpec bs(worked());
  const std::vector<double> x{0.0};
  const Eigen::MatrixXd b = gps::design_matrix(bs, x).to_dense();
  CHECK(b(0, 0) == 1.0);
  CHECK(b.row(0).tail(5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("derivative coefficients of a constant spline vanish") {
  const BasisSpec bs(worked());
  const std::vector<double> beta(6, 2.5);
  for (int m = 1; m <= 3; ++m) {
    const gps::Spline dm = gps::derivative_coeffs(bs, beta, m);
    CHECK(dm.coefficients().size() == 6 - static_cast<std::size_t>(m));
    for (double c : dm.coefficients()) CHECK(c == 0.0);
    CHECK(gps::eval_spline(bs, beta, 1.7, m) == 0.0);
  }
}

TEST_CASE("the identity spline has unit first-derivative coefficients") {
  const KnotVector& kv = worked();
  const BasisSpec bs(kv);
  const auto beta = support::to_std(support::interpolate(kv, [](double x) { return x; }));
  const gps::Spline d1 = gps::derivative_coeffs(bs, beta, 1);
  for (double c : d1.coefficients()) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d1.basis().order() == 3);
  CHECK(d1.basis().size() == 5);
}

TEST_CASE("one recursion step equals the order-1 general difference") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d = 2; d <= 6; ++d) {
    const KnotVector kv = support::random_knots(rng, d, 6, d % 2 == 0);
    const BasisSpec bs(kv);
    std::vector<double> beta(bs.size());
    for (double& b : beta) b = u(rng);
    for (int m = 1; m < d; ++m) {
      const auto direct = gps::general_diff(kv, m).apply(beta);
      const gps::Spline dm = gps::derivative_coeffs(bs, beta, m);
      REQUIRE(direct.size() == dm.coefficients().size());
      for (std::size_t r = 0; r < direct.size(); ++r) {
        CHECK(std::abs(direct[r] - dm.coefficients()[r]) <= 1e-12 * (1.0 + std::abs(direct[r])));
      }
    }
  }
}

TEST_CASE("order telescoping: m single steps equal one order-m call") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d = 3; d <= 6; ++d) {
    const KnotVector kv = support::random_knots(rng, d, 5, false);
    const BasisSpec bs(kv);
    std::vector<double> beta(bs.size());
    for (double& b : beta) b = u(rng);
    gps::Spline step(bs, beta);
    for (int m = 1; m < d; ++m) {
      step = step.derivative(1);
      const gps::Spline once = gps::derivative_coeffs(bs, beta, m);
      REQUIRE(step.coefficients().size() == once.coefficients().size());
      for (std::size_t r = 0; r < once.coefficients().size(); ++r) {
        CHECK(step.coefficients()[r] == doctest::Approx(once.coefficients()[r]).epsilon(1e-12));
      }
      CHECK(step.basis().knots() == once.basis().knots());
    }
  }
}

TEST_CASE("eval_spline: last clamped B-spline equals 1 at b") {
  const BasisSpec bs(worked());
  const std::vector<double> beta{0, 0, 0, 0, 0, 1};
  CHECK(gps::eval_spline(bs, beta, 4.0) == 1.0);
}

TEST_CASE("analytic derivatives match finite differences") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 5;
    const KnotVector kv = support::random_knots(rng, d, 8, trial % 3 == 0);
    const BasisSpec bs(kv);
    std::vector<double> beta(bs.size());
    for (double& b : beta) b = u(rng);
    for (int i = 0; i < 20; ++i) {
      const double x = kv.lower() + (kv.upper() - kv.lower()) * (0.5 + 0.5 * u(rng));
      double gap = INFINITY;
      for (double t : kv.knots()) gap = std::min(gap, std::abs(x - t));
      if (gap < 1e-4) continue;
      for (int m = 1; m < d; ++m) {
        const double fd = (gps::eval_spline(bs, beta, x + h, m - 1) -
                           gps::eval_spline(bs, beta, x - h, m - 1)) /
                          (2 * h);
        const double exact = gps::eval_spline(bs, beta, x, m);
        // O(h^2) truncation plus rounding that grows with the derivative order
        CHECK(std::abs(fd - exact) <= 1e-4 * std::pow(10.0, m - 1) * (1.0 + std::abs(exact)));
      }
    }
  }
}

TEST_CASE("derivative order bounds") {
  const BasisSpec bs(worked());
  const std::vector<double> beta(6, 1.0);
  CHECK_THROWS_AS(gps::derivative_coeffs(bs, beta, 4), std::invalid_argument);
  CHECK_THROWS_AS(gps::derivative_coeffs(bs, beta, 0), std::invalid_argument);
  CHECK_THROWS_AS(gps::eval_spline(bs, beta, 1.0, 4), std::invalid_argument);
  const std::vector<double> short_beta(5, 1.0);
  CHECK_THROWS_AS(gps::eval_spline(bs, short_beta, 1.0), std::invalid_argument);
}
