#include "gps/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "gps/errors.hpp"
#include "gps/fit.hpp"
#include "gps/knots.hpp"

namespace gps::sim {

std::string to_string(Flavor f) {
  switch (f) {
    case Flavor::OSpline: return "ospline";
    case Flavor::Standard: return "standard";
    case Flavor::Naive: return "naive";
    case Flavor::General: return "general";
  }
  return "?";
}

char flavor_letter(Flavor f) { return static_cast<char>('a' + static_cast<int>(f)); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t replicate) {
  return splitmix64(splitmix64(master) + replicate);
}

std::vector<double> local_extrema(const Spline& f, int grid) {
  const Spline df = f.derivative(1);
  const double a = f.basis().lower();
  const double b = f.basis().upper();
  std::vector<double> xs(grid + 1), ds(grid + 1);
  for (int i = 0; i <= grid; ++i) {
    xs[i] = i == grid ? b : a + (b - a) * i / grid;
    ds[i] = df(xs[i]);
  }
  std::vector<double> out;
  for (int i = 0; i < grid; ++i) {
    if (ds[i] == 0.0 && i > 0 && ds[i - 1] * ds[i + 1] < 0.0) {
      out.push_back(xs[i]);
      continue;
    }
    if (!(ds[i] * ds[i + 1] < 0.0)) continue;
    double lo = xs[i], hi = xs[i + 1];
    double flo = ds[i];
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = df(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double root = std::abs(df(lo)) <= std::abs(df(hi)) ? lo : hi;
    out.push_back(root);
  }
  return out;
}

RandomCurve random_spline(int d, std::mt19937_64& rng) {
  if (d < 2) throw std::invalid_argument("random_spline needs order d >= 2");
  BasisSpec basis(place_uniform(0.0, 1.0, 2L * d, d));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> coef(static_cast<std::size_t>(3 * d));
  for (double& c : coef) c = unif(rng);
  Spline s(std::move(basis), std::move(coef));
  auto ext = local_extrema(s);
  return {std::move(s), std::move(ext)};
}

RandomCurve random_spline(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_spline(d, rng);
}

TentDensity::TentDensity(std::span<const double> extrema, TentParams params, double lo,
                         double hi) {
  if (!(hi > lo)) throw std::invalid_argument("tent density needs lo < hi");
  if (!(params.half_width > 0.0) || !(params.peak_to_floor >= 1.0)) {
    throw std::invalid_argument("tent density needs half_width > 0 and peak_to_floor >= 1");
  }
  std::vector<double> bp{lo, hi};
  for (double e : extrema) {
    for (double v : {e - params.half_width, e, e + params.half_width}) {
      if (v > lo && v < hi) bp.push_back(v);
    }
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  const double bump = params.peak_to_floor - 1.0;
  auto raw = [&](double x) {
    double v = 1.0;
    for (double e : extrema) {
      v += bump * std::max(0.0, 1.0 - std::abs(x - e) / params.half_width);
    }
    return v;
  };
  x_ = bp;
  f_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) f_[i] = raw(x_[i]);
  cum_.assign(x_.size(), 0.0);
  for (std::size_t i = 1; i < x_.size(); ++i) {
    cum_[i] = cum_[i - 1] + 0.5 * (f_[i - 1] + f_[i]) * (x_[i] - x_[i - 1]);
  }
  const double z = cum_.back();
  for (double& v : f_) v /= z;
  for (double& v : cum_) v /= z;
  cum_.back() = 1.0;
}

std::size_t TentDensity::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, x_.size() - 2);
}

double TentDensity::pdf(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = segment(x);
  const double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
  return f_[i] + w * (f_[i + 1] - f_[i]);
}

double TentDensity::cdf(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const std::size_t i = segment(x);
  const double s = x - x_[i];
  const double slope = (f_[i + 1] - f_[i]) / (x_[i + 1] - x_[i]);
  return cum_[i] + f_[i] * s + 0.5 * slope * s * s;
}

double TentDensity::quantile(double u) const {
  if (u <= 0.0) return x_.front();
  if (u >= 1.0) return x_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cum_.begin());
  i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, x_.size() - 2);
  const double r = u - cum_[i];
  const double slope = (f_[i + 1] - f_[i]) / (x_[i + 1] - x_[i]);
  const double s = 2.0 * r / (f_[i] + std::sqrt(std::max(0.0, f_[i] * f_[i] + 2.0 * slope * r)));
  return std::clamp(x_[i] + s, x_[i], x_[i + 1]);
}

std::vector<double> sample_tent(std::span<const double> extrema, std::size_t n,
                                std::mt19937_64& rng, TentParams params) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(n);
  if (extrema.empty()) {
    for (double& v : x) v = unif(rng);
    return x;
  }
  const TentDensity tent(extrema, params);
  for (double& v : x) v = tent.quantile(unif(rng));
  return x;
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string to_string(StudyKind s) {
  switch (s) {
    case StudyKind::UCurve: return "ucurve";
    case StudyKind::Mixture1: return "mixture1";
    case StudyKind::Mixture2: return "mixture2";
    case StudyKind::RandomCurves: return "random";
  }
  return "?";
}

StudyKind parse_study(const std::string& s) {
  if (s == "ucurve") return StudyKind::UCurve;
  if (s == "mixture1") return StudyKind::Mixture1;
  if (s == "mixture2") return StudyKind::Mixture2;
  if (s == "random") return StudyKind::RandomCurves;
  throw ConfigError("unknown study '" + s + "' (expected ucurve|mixture1|mixture2|random)");
}

namespace {

double normal_pdf(double x, double mu, double s) {
  const double z = (x - mu) / s;
  return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
}

double normal_pdf_d2(double x, double mu, double s) {
  const double z = (x - mu) / s;
  return normal_pdf(x, mu, s) * (z * z - 1.0) / (s * s);
}

std::pair<double, double> domain_of(StudyKind s) {
  switch (s) {
    case StudyKind::UCurve: return {-3.0, 3.0};
    case StudyKind::Mixture1:
    case StudyKind::Mixture2: return {-2.0, 2.0};
    case StudyKind::RandomCurves: return {0.0, 1.0};
  }
  return {0.0, 1.0};
}

double signal_range(double (*g)(double), double a, double b) {
  double lo = g(a), hi = g(a);
  constexpr int kGrid = 20000;
  for (int i = 1; i <= kGrid; ++i) {
    const double v = g(a + (b - a) * i / kGrid);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

double draw_mixture_x(StudyKind s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  for (;;) {
    const double u = unif(rng);
    double x;
    if (s == StudyKind::Mixture1) {
      if (u < 1.0 / 3.0) x = -1.0 + 0.35 * z(rng);
      else if (u < 2.0 / 3.0) x = 1.0 + 0.35 * z(rng);
      else x = 0.2 * z(rng);
    } else {
      x = (u < 0.5 ? -1.0 : 1.0) + 0.35 * z(rng);
    }
    if (x >= -2.0 && x <= 2.0) return x;
  }
}

FitOptions flavor_options(Flavor f, const StudyConfig& cfg, int m) {
  FitOptions opt;
  opt.k = cfg.k;
  opt.order = cfg.order;
  opt.penalty_order = m;
  opt.domain = domain_of(cfg.study);
  opt.grid_size = 2;
  switch (f) {
    case Flavor::OSpline:
      opt.knots = KnotStrategy::Quantile;
      opt.penalty = PenaltyKind::Derivative;
      break;
    case Flavor::Standard:
      opt.knots = KnotStrategy::Uniform;
      opt.penalty = PenaltyKind::StandardDifference;
      break;
    case Flavor::Naive:
      opt.knots = KnotStrategy::Quantile;
      opt.penalty = PenaltyKind::StandardDifference;
      opt.force_naive = true;
      break;
    case Flavor::General:
      opt.knots = KnotStrategy::Quantile;
      opt.penalty = PenaltyKind::GeneralDifference;
      break;
  }
  return opt;
}

double quantile7(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  return sample_quantile(v, level);
}

}  // namespace

double u_curve(double x) { return std::abs(x * x * x) / 8.0; }

double mixture_signal(double x) {
  return 0.5 * normal_pdf(x, -1.0, 0.5) + 0.5 * normal_pdf(x, 1.0, 0.8);
}

double mixture_signal_d2(double x) {
  return 0.5 * normal_pdf_d2(x, -1.0, 0.5) + 0.5 * normal_pdf_d2(x, 1.0, 0.8);
}

StudyConfig resolve(StudyConfig cfg) {
  const bool random = cfg.study == StudyKind::RandomCurves;
  if (cfg.N < 1) throw ConfigError("replicate count N must be >= 1");
  if (cfg.order < 2) throw ConfigError("order d must be >= 2");
  if (cfg.n == 0) cfg.n = cfg.study == StudyKind::UCurve ? 500 : 1000;
  if (cfg.n < 2) throw ConfigError("sample size n must be >= 2");
  if (cfg.k < 0) cfg.k = random ? 29L * cfg.order : 100;
  if (cfg.penalty_orders.empty()) {
    if (random) {
      for (int m = 1; m < cfg.order; ++m) cfg.penalty_orders.push_back(m);
    } else {
      cfg.penalty_orders.push_back(2);
    }
  }
  for (int m : cfg.penalty_orders) {
    if (m < 1 || m >= cfg.order) {
      throw ConfigError("penalty order m = " + std::to_string(m) +
                        " must satisfy 1 <= m <= d - 1 = " + std::to_string(cfg.order - 1));
    }
  }
  if (random && !(cfg.gamma > 0.0)) throw ConfigError("noise-to-signal ratio gamma must be > 0");
  if (!random && !(cfg.sigma_fraction > 0.0)) throw ConfigError("sigma fraction must be > 0");
  if (cfg.threads == 0) cfg.threads = 1;
  return cfg;
}

ReplicateResult run_replicate(const StudyConfig& cfg, int replicate) {
  ReplicateResult rep;
  rep.replicate = replicate;
  rep.seed = replicate_seed(cfg.seed, static_cast<std::uint64_t>(replicate));
  std::mt19937_64 rng(rep.seed);
  const auto n = static_cast<std::size_t>(cfg.n);
  rep.x.resize(n);
  rep.g.resize(n);

  switch (cfg.study) {
    case StudyKind::UCurve: {
      std::gamma_distribution<double> ga(2.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double g1 = ga(rng);
        const double g2 = ga(rng);
        rep.x[i] = -3.0 + 6.0 * g1 / (g1 + g2);
        rep.g[i] = u_curve(rep.x[i]);
      }
      rep.sigma = cfg.sigma_fraction * signal_range(u_curve, -3.0, 3.0);
      break;
    }
    case StudyKind::Mixture1:
    case StudyKind::Mixture2:
      for (std::size_t i = 0; i < n; ++i) {
        rep.x[i] = draw_mixture_x(cfg.study, rng);
        rep.g[i] = mixture_signal(rep.x[i]);
      }
      rep.sigma = cfg.sigma_fraction * signal_range(mixture_signal, -2.0, 2.0);
      break;
    case StudyKind::RandomCurves: {
      RandomCurve curve = random_spline(cfg.order, rng);
      rep.x = sample_tent(curve.extrema, n, rng, cfg.tent);
      for (std::size_t i = 0; i < n; ++i) rep.g[i] = curve.spline(rep.x[i]);
      rep.extrema = std::move(curve.extrema);
      rep.sigma = cfg.gamma * sample_sd(rep.g);
      break;
    }
  }

  std::normal_distribution<double> noise(0.0, rep.sigma);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = rep.g[i] + noise(rng);

  const bool mixture = cfg.study == StudyKind::Mixture1 || cfg.study == StudyKind::Mixture2;
  for (int m : cfg.penalty_orders) {
    for (Flavor f : kFlavors) {
      FlavorRecord rec;
      rec.flavor = f;
      rec.m = m;
      try {
        const CurveFit cf = fit_curve(rep.x, y, flavor_options(f, cfg, m));
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double e = cf.fit.fitted[i] - rep.g[i];
          ss += e * e;
        }
        rec.delta = ss / static_cast<double>(n) / (rep.sigma * rep.sigma);
        rec.lambda = cf.fit.lambda;
        rec.edf = cf.fit.edf;
        if (mixture && cfg.order >= 3) {
          const double c = eval_spline(BasisSpec(cf.knots), cf.fit.beta, 0.0, 2);
          rec.curvature_match = (c > 0.0) == (mixture_signal_d2(0.0) > 0.0) ? 1 : 0;
        }
        rec.ok = std::isfinite(rec.delta);
        if (!rec.ok) rec.error = "non-finite relative MSE";
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      rep.fits.push_back(std::move(rec));
    }
  }
  return rep;
}

StudyResult run_study(const StudyConfig& config) {
  StudyResult out;
  out.config = resolve(config);
  const int N = out.config.N;
  out.replicates.resize(static_cast<std::size_t>(N));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int l = next.fetch_add(1);
      if (l >= N) return;
      try {
        out.replicates[static_cast<std::size_t>(l)] = run_replicate(out.config, l);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(out.config.threads, static_cast<unsigned>(N));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<SummaryRow> StudyResult::summary() const {
  std::vector<SummaryRow> rows;
  for (int m : config.penalty_orders) {
    for (Flavor f : kFlavors) {
      SummaryRow row{f, m};
      std::vector<double> deltas;
      int hits = 0;
      bool curvature = false;
      for (const auto& rep : replicates) {
        for (const auto& rec : rep.fits) {
          if (rec.flavor != f || rec.m != m) continue;
          if (!rec.ok) {
            ++row.failures;
            continue;
          }
          deltas.push_back(rec.delta);
          if (rec.curvature_match >= 0) {
            curvature = true;
            hits += rec.curvature_match;
          }
        }
      }
      row.count = static_cast<int>(deltas.size());
      if (!deltas.empty()) {
        row.min = *std::min_element(deltas.begin(), deltas.end());
        row.max = *std::max_element(deltas.begin(), deltas.end());
        row.q1 = quantile7(deltas, 0.25);
        row.median = quantile7(deltas, 0.5);
        row.q3 = quantile7(deltas, 0.75);
        double s = 0.0;
        for (double v : deltas) s += v;
        row.mean = s / static_cast<double>(deltas.size());
      }
      if (curvature) row.curvature_hits = hits;
      rows.push_back(row);
    }
  }
  return rows;
}

SummaryRow StudyResult::row(Flavor f, int m) const {
  for (const auto& r : summary()) {
    if (r.flavor == f && r.m == m) return r;
  }
  throw std::out_of_range("no summary row for flavor " + to_string(f) + ", m = " +
                          std::to_string(m));
}

}  // namespace gps::sim
