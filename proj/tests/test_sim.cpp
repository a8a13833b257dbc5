#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "gps/errors.hpp"
#include "gps/sim.hpp"
#include "support.hpp"

namespace sim = gps::sim;

namespace {

// Kolmogorov distance between a sample and a continuous cdf.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST_CASE("replicate seeds are distinct and stable") {
  CHECK(sim::splitmix64(0) == 0xe220a8397b1dcdafULL);
  std::set<std::uint64_t> seen;
  for (std::uint64_t l = 0; l < 1000; ++l) seen.insert(sim::replicate_seed(42, l));
  CHECK(seen.size() == 1000);
  CHECK(sim::replicate_seed(42, 7) == sim::replicate_seed(42, 7));
  CHECK(sim::replicate_seed(42, 7) != sim::replicate_seed(43, 7));
}

TEST_CASE("random curves") {
  for (int d = 2; d <= 6; ++d) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const sim::RandomCurve rc = sim::random_spline(d, seed);
      CHECK(rc.spline.coefficients().size() == static_cast<std::size_t>(3 * d));
      CHECK(rc.spline.basis().lower() == 0.0);
      CHECK(rc.spline.basis().upper() == 1.0);
      for (double c : rc.spline.coefficients()) CHECK(std::abs(c) <= 1.0);
      CHECK(std::is_sorted(rc.extrema.begin(), rc.extrema.end()));
      if (d >= 3) {
        const gps::Spline df = rc.spline.derivative(1);
        for (double e : rc.extrema) {
          CHECK(e > 0.0);
          CHECK(e < 1.0);
          CHECK(std::abs(df(e)) < 1e-10);
        }
      }
    }
  }
  // same seed, same curve
  const auto a = sim::random_spline(4, 99), b = sim::random_spline(4, 99);
  CHECK(std::equal(a.spline.coefficients().begin(), a.spline.coefficients().end(),
                   b.spline.coefficients().begin()));
}

TEST_CASE("local extrema of known splines") {
  const gps::KnotVector kv = gps::place_uniform(0.0, 1.0, 6, 4);
  const gps::BasisSpec bs(kv);
  CHECK(sim::local_extrema(gps::Spline(bs, std::vector<double>(bs.size(), 0.7))).empty());

  // (x - 0.3)^2 (x - 0.8) has extrema at 0.3 and 1.1/1.5 ... within (0, 1)
  auto f = [](double x) { return (x - 0.3) * (x - 0.3) * (x - 0.8); };
  const Eigen::VectorXd c = support::interpolate(kv, f);
  const gps::Spline s(bs, support::to_std(c));
  const auto ex = sim::local_extrema(s);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0] == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(ex[1] == doctest::Approx(1.9 / 3.0).epsilon(1e-9));
}

TEST_CASE("tent density") {
  const std::vector<double> ex{0.2, 0.5, 0.55};
  const sim::TentDensity td(ex);
  const auto& bp = td.breakpoints();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    total += support::integrate([&](double x) { return td.pdf(x); }, bp[i], bp[i + 1]);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(td.cdf(0.0) == 0.0);
  CHECK(td.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  // isolated peak sits at four times the floor
  CHECK(td.pdf(0.2) / td.pdf(0.9) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(td.pdf(0.12) == doctest::Approx(td.pdf(0.9)).epsilon(1e-12));
  // overlapping triangles add up
  CHECK(td.pdf(0.5) > 4.0 * td.pdf(0.9));
  for (int i = 0; i <= 1000; ++i) {
    const double u = i / 1000.0;
    CHECK(td.cdf(td.quantile(u)) == doctest::Approx(u).epsilon(1e-12).scale(1.0));
    const double x = i / 1000.0;
    CHECK(td.quantile(td.cdf(x)) == doctest::Approx(x).epsilon(1e-10).scale(1.0));
  }

  std::mt19937_64 rng(5);
  const auto xs = sim::sample_tent(ex, 20000, rng);
  CHECK(ks_distance(xs, [&](double x) { return td.cdf(x); }) < 1.63 / std::sqrt(20000.0));
  const auto flat = sim::sample_tent({}, 20000, rng);
  CHECK(ks_distance(flat, [](double x) { return x; }) < 1.63 / std::sqrt(20000.0));

  // an extremum near the edge is clipped to the domain
  const sim::TentDensity edge(std::vector<double>{0.02});
  CHECK(edge.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(edge.pdf(0.0) > edge.pdf(0.5));
}

TEST_CASE("sample standard deviation") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(sim::sample_sd(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("study configuration") {
  sim::StudyConfig cfg;
  cfg.study = sim::StudyKind::RandomCurves;
  cfg.order = 5;
  const auto r = sim::resolve(cfg);
  CHECK(r.n == 1000);
  CHECK(r.k == 145);
  CHECK(r.penalty_orders == std::vector<int>{1, 2, 3, 4});
  CHECK(sim::resolve(sim::StudyConfig{}).n == 500);
  CHECK(sim::resolve(sim::StudyConfig{}).penalty_orders == std::vector<int>{2});

  cfg.penalty_orders = {5};
  CHECK_THROWS_AS(sim::resolve(cfg), gps::ConfigError);
  cfg.penalty_orders = {};
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(sim::resolve(cfg), gps::ConfigError);
  CHECK_THROWS_AS(sim::parse_study("spiral"), gps::ConfigError);
  for (auto s : {sim::StudyKind::UCurve, sim::StudyKind::Mixture1, sim::StudyKind::Mixture2,
                 sim::StudyKind::RandomCurves}) {
    CHECK(sim::parse_study(sim::to_string(s)) == s);
  }
}

TEST_CASE("replicates are reproducible and independent of threading") {
  sim::StudyConfig cfg;
  cfg.study = sim::StudyKind::RandomCurves;
  cfg.N = 6;
  cfg.n = 200;
  cfg.seed = 17;
  const auto serial = sim::run_study(cfg);
  cfg.threads = 3;
  const auto parallel = sim::run_study(cfg);
  REQUIRE(serial.replicates.size() == 6);
  for (std::size_t l = 0; l < 6; ++l) {
    const auto& a = serial.replicates[l];
    const auto& b = parallel.replicates[l];
    CHECK(a.seed == sim::replicate_seed(17, l));
    CHECK(a.x == b.x);
    CHECK(a.g == b.g);
    REQUIRE(a.fits.size() == b.fits.size());
    for (std::size_t j = 0; j < a.fits.size(); ++j) {
      CHECK(a.fits[j].delta == b.fits[j].delta);
      CHECK(a.fits[j].lambda == b.fits[j].lambda);
    }
    // replay one replicate from its index alone
    const auto replay = sim::run_replicate(sim::resolve(cfg), static_cast<int>(l));
    CHECK(replay.x == a.x);
    CHECK(replay.fits[0].delta == a.fits[0].delta);
  }
}

TEST_CASE("noise level follows the signal") {
  sim::StudyConfig cfg;
  cfg.study = sim::StudyKind::RandomCurves;
  cfg.N = 3;
  cfg.n = 200;
  cfg.gamma = 0.25;
  for (const auto& rep : sim::run_study(cfg).replicates) {
    CHECK(rep.sigma == doctest::Approx(0.25 * sim::sample_sd(rep.g)).epsilon(1e-14));
    // each record exists for every flavor and every m
    CHECK(rep.fits.size() == 4 * 3);
    for (double x : rep.x) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
  cfg.study = sim::StudyKind::UCurve;
  cfg.N = 2;
  for (const auto& rep : sim::run_study(cfg).replicates) {
    // range of |x|^3 / 8 over [-3, 3]
    CHECK(rep.sigma == doctest::Approx(0.1 * 27.0 / 8.0).epsilon(1e-14));
    for (std::size_t i = 0; i < rep.x.size(); ++i) {
      CHECK(rep.g[i] == sim::u_curve(rep.x[i]));
      CHECK(rep.x[i] >= -3.0);
      CHECK(rep.x[i] <= 3.0);
    }
  }
}

TEST_CASE("mixture signal curvature helper agrees with finite differences") {
  for (double x : {-1.5, -0.4, 0.0, 0.3, 1.2}) {
    const double h = 1e-3;
    const double fd = (-sim::mixture_signal(x + 2 * h) + 16 * sim::mixture_signal(x + h) -
                       30 * sim::mixture_signal(x) + 16 * sim::mixture_signal(x - h) -
                       sim::mixture_signal(x - 2 * h)) /
                      (12 * h * h);
    CHECK(sim::mixture_signal_d2(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("U-curve: the general difference penalty beats the naive one") {
  sim::StudyConfig cfg;
  cfg.N = 30;
  cfg.seed = 4;
  const auto res = sim::run_study(cfg);
  int wins = 0;
  for (const auto& rep : res.replicates) {
    double c = 0, d = 0;
    for (const auto& rec : rep.fits) {
      REQUIRE(rec.ok);
      if (rec.flavor == sim::Flavor::Naive) c = rec.delta;
      if (rec.flavor == sim::Flavor::General) d = rec.delta;
    }
    wins += d < c;
  }
  CHECK(wins >= 27);
  CHECK(res.row(sim::Flavor::General, 2).median < res.row(sim::Flavor::Naive, 2).median);
  CHECK(res.row(sim::Flavor::General, 2).count == 30);
}

TEST_CASE("mixture: estimated curvature at zero") {
  sim::StudyConfig cfg;
  cfg.study = sim::StudyKind::Mixture2;
  cfg.N = 10;
  cfg.seed = 3;
  const auto res = sim::run_study(cfg);
  const auto row = res.row(sim::Flavor::General, 2);
  CHECK(row.curvature_hits >= 8);
  for (const auto& rep : res.replicates) {
    for (double x : rep.x) {
      CHECK(std::abs(x) <= 2.0 + 1e-12);
    }
  }
}

TEST_CASE("failed fits are recorded, not thrown") {
  sim::StudyConfig cfg;
  cfg.N = 2;
  cfg.n = 2;
  cfg.k = 3;
  const auto res = sim::run_study(cfg);
  for (const auto& rep : res.replicates) {
    REQUIRE(rep.fits.size() == 4);
    for (const auto& rec : rep.fits) {
      CHECK_FALSE(rec.ok);
      CHECK_FALSE(rec.error.empty());
    }
  }
  const auto row = res.row(sim::Flavor::OSpline, 2);
  CHECK(row.failures == 2);
  CHECK(row.count == 0);
}

TEST_CASE("summary statistics") {
  sim::StudyResult res;
  res.config = sim::resolve(sim::StudyConfig{});
  const std::vector<double> deltas{0.4, 0.1, 0.3, 0.2, 0.5};
  for (std::size_t l = 0; l < deltas.size(); ++l) {
    sim::ReplicateResult rep;
    sim::FlavorRecord rec;
    rec.flavor = sim::Flavor::General;
    rec.ok = true;
    rec.delta = deltas[l];
    rep.fits.push_back(rec);
    rec.flavor = sim::Flavor::Naive;
    rec.ok = l != 0;
    rep.fits.push_back(rec);
    res.replicates.push_back(rep);
  }
  const auto r = res.row(sim::Flavor::General, 2);
  CHECK(r.count == 5);
  CHECK(r.min == 0.1);
  CHECK(r.max == 0.5);
  CHECK(r.median == doctest::Approx(0.3));
  CHECK(r.q1 == doctest::Approx(0.2));
  CHECK(r.q3 == doctest::Approx(0.4));
  CHECK(r.mean == doctest::Approx(0.3));
  CHECK(r.curvature_hits == -1);
  const auto n = res.row(sim::Flavor::Naive, 2);
  CHECK(n.failures == 1);
  CHECK(n.count == 4);
  CHECK(n.median == doctest::Approx(0.25));
  CHECK(res.summary().size() == 4);
}
