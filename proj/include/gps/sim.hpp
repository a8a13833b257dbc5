#pragma once

// Monte Carlo comparison of four penalized B-spline estimators:
//   (a) O-spline:           quantile knots, derivative penalty
//   (b) standard P-spline:  uniform knots, standard difference penalty
//   (c) naive P-spline:     quantile knots, standard difference penalty
//   (d) general P-spline:   quantile knots, general difference penalty

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gps/basis.hpp"

namespace gps::sim {

enum class Flavor { OSpline, Standard, Naive, General };
inline constexpr std::array<Flavor, 4> kFlavors{Flavor::OSpline, Flavor::Standard, Flavor::Naive,
                                                Flavor::General};

std::string to_string(Flavor f);   // "ospline", "standard", "naive", "general"
char flavor_letter(Flavor f);      // 'a'..'d'

// splitmix64 finalizer; used to derive independent per-replicate seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t replicate);

// Random order-d spline on [0, 1]: uniform knots with 2d interior knots,
// 3d coefficients iid U[-1, 1].
struct RandomCurve {
  Spline spline;
  std::vector<double> extrema;  // interior local extrema, ascending
};

RandomCurve random_spline(int d, std::mt19937_64& rng);
RandomCurve random_spline(int d, std::uint64_t seed);

// Zeros of f' in the open domain located by sign changes on a grid of
// `grid` cells and refined by bisection.
std::vector<double> local_extrema(const Spline& f, int grid = 4000);

struct TentParams {
  double half_width = 0.08;
  double peak_to_floor = 4.0;  // density height at an isolated peak relative to the floor
};

// Piecewise-linear density on [lo, hi]: constant floor plus a triangle of
// height (peak_to_floor - 1) * floor centred at each extremum.
class TentDensity {
 public:
  TentDensity(std::span<const double> extrema, TentParams params = {}, double lo = 0.0,
              double hi = 1.0);

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;

  const std::vector<double>& breakpoints() const { return x_; }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_;     // breakpoints
  std::vector<double> f_;     // normalized density at breakpoints
  std::vector<double> cum_;   // cdf at breakpoints
};

// n draws by inverse cdf; uniform on [0, 1] when there are no extrema.
std::vector<double> sample_tent(std::span<const double> extrema, std::size_t n,
                                std::mt19937_64& rng, TentParams params = {});

// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> v);

enum class StudyKind { UCurve, Mixture1, Mixture2, RandomCurves };
std::string to_string(StudyKind s);  // "ucurve", "mixture1", "mixture2", "random"
StudyKind parse_study(const std::string& s);

struct StudyConfig {
  StudyKind study = StudyKind::UCurve;
  int N = 100;
  long n = 0;          // 0: study default (500, 1000, 1000, 1000)
  int order = 4;
  double gamma = 0.1;  // random curves only
  std::uint64_t seed = 0;
  long k = -1;         // -1: 100 for fixed signals, 29 d for random curves
  std::vector<int> penalty_orders;  // empty: {2} for fixed signals, 1..d-1 for random curves
  TentParams tent{};
  double sigma_fraction = 0.1;  // fixed signals: sigma = sigma_fraction * range(g)
  unsigned threads = 1;         // not part of the result
};

// Fills in every defaulted field and validates.
StudyConfig resolve(StudyConfig cfg);

struct FlavorRecord {
  Flavor flavor = Flavor::OSpline;
  int m = 2;
  bool ok = false;
  double delta = 0.0;  // mean((fhat - g)^2) / sigma^2
  double lambda = 0.0;
  double edf = 0.0;
  int curvature_match = -1;  // mixtures: 1 if sign fhat''(0) == sign g''(0), else 0; -1 n/a
  std::string error;
};

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::vector<double> x;
  std::vector<double> g;
  std::vector<double> extrema;  // random curves only
  std::vector<FlavorRecord> fits;
};

struct SummaryRow {
  Flavor flavor;
  int m;
  int count = 0;
  int failures = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  int curvature_hits = -1;
};

struct StudyResult {
  StudyConfig config;
  std::vector<ReplicateResult> replicates;

  std::vector<SummaryRow> summary() const;
  SummaryRow row(Flavor f, int m) const;
};

// Fixed-signal helpers.
double u_curve(double x);
double mixture_signal(double x);
double mixture_signal_d2(double x);

StudyResult run_study(const StudyConfig& cfg);

// One replicate; exposed for replay from a logged seed.
ReplicateResult run_replicate(const StudyConfig& resolved, int replicate);

}  // namespace gps::sim
