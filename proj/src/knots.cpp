#include "gps/knots.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gps {

namespace {

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

KnotDiagnostics validate(std::span<const double> t, int d) {
  KnotDiagnostics diag;
  diag.K = t.size();
  diag.d = d;
  if (d < 1) {
    diag.violations.push_back("order must be positive (got " + std::to_string(d) + ")");
    return diag;
  }
  const auto K = static_cast<long>(t.size());
  diag.p = K - d;
  diag.k = K - 2L * d;
  if (K < 2L * d) {
    diag.violations.push_back("too few knots: order " + std::to_string(d) + " needs at least " +
                              std::to_string(2 * d) + ", got " + std::to_string(K));
    return diag;
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) {
      diag.violations.push_back("non-finite knot at index " + std::to_string(i));
      return diag;
    }
  }
  diag.a = t[d - 1];
  diag.b = t[K - d];

  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < t[i - 1]) {
      diag.violations.push_back("not nondecreasing: t[" + std::to_string(i) + "] = " +
                                format_value(t[i]) + " < t[" + std::to_string(i - 1) +
                                "] = " + format_value(t[i - 1]));
      break;
    }
  }

  for (std::size_t i = 0; i < t.size();) {
    std::size_t j = i;
    while (j < t.size() && t[j] == t[i]) ++j;
    const int count = static_cast<int>(j - i);
    diag.multiplicities.emplace_back(t[i], count);
    if (count > d) {
      diag.violations.push_back("multiplicity exceeds order: " + format_value(t[i]) +
                                " appears " + std::to_string(count) + " times (order " +
                                std::to_string(d) + ")");
    }
    i = j;
  }

  if (!(diag.a < diag.b)) {
    diag.violations.push_back("empty domain: a = " + format_value(diag.a) +
                              " is not below b = " + format_value(diag.b));
  } else {
    for (long i = d; i < K - d; ++i) {
      if (!(t[i] > diag.a && t[i] < diag.b)) {
        diag.violations.push_back("interior knot t[" + std::to_string(i) + "] = " +
                                  format_value(t[i]) + " is not strictly inside (a, b)");
      }
    }
  }
  return diag;
}

KnotVector::KnotVector(std::vector<double> t, int d) : t_(std::move(t)), d_(d) {
  const auto diag = validate(t_, d_);
  if (!diag.ok()) {
    std::string msg = "invalid knot sequence:";
    for (const auto& v : diag.violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
}

KnotVector KnotVector::trimmed(int m) const {
  if (m < 0 || m >= d_) {
    throw std::invalid_argument("trimmed: order reduction " + std::to_string(m) +
                                " must lie in [0, " + std::to_string(d_ - 1) + "]");
  }
  return KnotVector(std::vector<double>(t_.begin() + m, t_.end() - m), d_ - m);
}

bool KnotVector::is_clamped() const {
  for (int i = 0; i < d_; ++i) {
    if (t_[i] != lower() || t_[t_.size() - 1 - i] != upper()) return false;
  }
  return true;
}

bool KnotVector::is_uniform(double rel_tol) const {
  const double h = (t_.back() - t_.front()) / static_cast<double>(t_.size() - 1);
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (std::abs((t_[i] - t_[i - 1]) - h) > rel_tol * h) return false;
  }
  return true;
}

KnotVector place_uniform(double a, double b, long k, int d) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("place_uniform: domain bounds must be finite");
  }
  if (!(a < b)) throw std::invalid_argument("place_uniform: need a < b");
  if (k < 0) throw std::invalid_argument("place_uniform: negative interior knot count");
  if (d < 1) throw std::invalid_argument("place_uniform: order must be positive");

  const long K = k + 2L * d;
  const double h = (b - a) / static_cast<double>(k + 1);
  std::vector<double> t(K);
  for (long j = 0; j < K; ++j) {
    t[j] = a + static_cast<double>(j - (d - 1)) * h;
  }
  t[d - 1] = a;
  t[K - d] = b;
  return KnotVector(std::move(t), d);
}

double sample_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw std::invalid_argument("sample_quantile: empty sample");
  if (!(level >= 0.0 && level <= 1.0)) {
    throw std::invalid_argument("sample_quantile: level outside [0, 1]");
  }
  const double h = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

KnotVector place_quantile_clamped(std::span<const double> x, double a, double b, long k, int d) {
  if (x.size() < 2) throw std::invalid_argument("place_quantile_clamped: need at least 2 points");
  if (k < 0) throw std::invalid_argument("place_quantile_clamped: negative interior knot count");
  if (d < 1) throw std::invalid_argument("place_quantile_clamped: order must be positive");
  if (!std::is_sorted(x.begin(), x.end())) {
    throw std::invalid_argument("place_quantile_clamped: x must be sorted");
  }
  std::vector<double> z(x.begin(), x.end());
  z.front() = std::min(a, z.front());
  z.back() = std::max(z.back(), b);

  std::vector<double> domain(k + 2);
  for (long i = 0; i <= k + 1; ++i) {
    domain[i] = sample_quantile(z, static_cast<double>(i) / static_cast<double>(k + 1));
  }
  domain.front() = z.front();
  domain.back() = z.back();
  for (long i = 1; i <= k + 1; ++i) {
    if (!(domain[i] > domain[i - 1])) {
      throw std::invalid_argument(
          "place_quantile_clamped: quantile level " + std::to_string(i) + "/" +
          std::to_string(k + 1) + " gives knot " + format_value(domain[i]) +
          " tied with the previous one; lower k");
    }
  }

  std::vector<double> t;
  t.reserve(k + 2 * d);
  t.insert(t.end(), d - 1, domain.front());
  t.insert(t.end(), domain.begin(), domain.end());
  t.insert(t.end(), d - 1, domain.back());
  return KnotVector(std::move(t), d);
}

}  // namespace gps
