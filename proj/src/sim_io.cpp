#include "gps/sim_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "gps/io.hpp"

namespace gps::sim {

namespace {

io::Metadata metadata(const StudyResult& r) {
  return {"simulate", r.config.seed, config_json(r.config)};
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string delta_text(const FlavorRecord& rec) {
  return rec.ok ? io::format_double(rec.delta) : "nan";
}

}  // namespace

nlohmann::json config_json(const StudyConfig& cfg) {
  nlohmann::json j;
  j["study"] = to_string(cfg.study);
  j["N"] = cfg.N;
  j["n"] = cfg.n;
  j["order"] = cfg.order;
  j["k"] = cfg.k;
  j["penalty_orders"] = cfg.penalty_orders;
  j["seed"] = cfg.seed;
  if (cfg.study == StudyKind::RandomCurves) {
    j["gamma"] = cfg.gamma;
    j["sigma_rule"] = "gamma * sd(g), n - 1 denominator";
    j["tent"] = {{"half_width", cfg.tent.half_width},
                 {"peak_to_floor", cfg.tent.peak_to_floor}};
  } else {
    j["sigma_fraction"] = cfg.sigma_fraction;
    j["sigma_rule"] = "sigma_fraction * (max g - min g) over the domain";
  }
  switch (cfg.study) {
    case StudyKind::UCurve:
      j["signal"] = "|x|^3 / 8 on [-3, 3]";
      j["design"] = "x = -3 + 6 * Beta(2, 2)";
      break;
    case StudyKind::Mixture1:
      j["signal"] = "0.5 N(-1, 0.5^2) + 0.5 N(1, 0.8^2) densities on [-2, 2]";
      j["design"] = "1/3 N(-1, 0.35^2) + 1/3 N(1, 0.35^2) + 1/3 N(0, 0.2^2) truncated to [-2, 2]";
      break;
    case StudyKind::Mixture2:
      j["signal"] = "0.5 N(-1, 0.5^2) + 0.5 N(1, 0.8^2) densities on [-2, 2]";
      j["design"] = "1/2 N(-1, 0.35^2) + 1/2 N(1, 0.35^2) truncated to [-2, 2]";
      break;
    case StudyKind::RandomCurves:
      j["signal"] = "random spline, 2d uniform interior knots on [0, 1], coefficients U[-1, 1]";
      j["design"] = "tent density peaking at the local extrema";
      break;
  }
  j["flavors"] = {{"a", "ospline: quantile knots, derivative penalty"},
                  {"b", "standard: uniform knots, standard difference penalty"},
                  {"c", "naive: quantile knots, standard difference penalty"},
                  {"d", "general: quantile knots, general difference penalty"}};
  return j;
}

nlohmann::json summary_json(const StudyResult& result) {
  nlohmann::json j;
  j["meta"] = io::metadata_json(metadata(result));
  nlohmann::json rows = nlohmann::json::array();
  int failures = 0;
  for (const auto& r : result.summary()) {
    nlohmann::json row{{"flavor", to_string(r.flavor)},
                       {"label", std::string(1, flavor_letter(r.flavor))},
                       {"m", r.m},
                       {"count", r.count},
                       {"failures", r.failures},
                       {"min", r.min},
                       {"q1", r.q1},
                       {"median", r.median},
                       {"q3", r.q3},
                       {"max", r.max},
                       {"mean", r.mean}};
    if (r.curvature_hits >= 0) row["curvature_sign_matches"] = r.curvature_hits;
    failures += r.failures;
    rows.push_back(std::move(row));
  }
  j["summary"] = std::move(rows);
  j["failed_fits"] = failures;
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : result.replicates) {
    reps.push_back({{"replicate", rep.replicate}, {"seed", rep.seed}, {"sigma", rep.sigma}});
  }
  j["replicates"] = std::move(reps);
  return j;
}

void write_replicates_csv(std::ostream& os, const StudyResult& result) {
  io::write_metadata(os, metadata(result));
  os << "replicate,flavor,m,delta,status\n";
  for (const auto& rep : result.replicates) {
    for (const auto& rec : rep.fits) {
      os << rep.replicate << ',' << flavor_letter(rec.flavor) << ',' << rec.m << ','
         << delta_text(rec) << ',' << (rec.ok ? "ok" : "failed") << '\n';
    }
  }
}

void write_long_csv(std::ostream& os, const StudyResult& result) {
  io::write_metadata(os, metadata(result));
  os << "study,replicate,seed,sigma,flavor,label,m,delta,lambda,edf,curvature_match,status\n";
  const std::string study = to_string(result.config.study);
  for (const auto& rep : result.replicates) {
    for (const auto& rec : rep.fits) {
      os << study << ',' << rep.replicate << ',' << rep.seed << ','
         << io::format_double(rep.sigma) << ',' << to_string(rec.flavor) << ','
         << flavor_letter(rec.flavor) << ',' << rec.m << ',' << delta_text(rec) << ','
         << io::format_double(rec.lambda) << ',' << io::format_double(rec.edf) << ','
         << rec.curvature_match << ',' << (rec.ok ? "ok" : "failed: " + csv_safe(rec.error))
         << '\n';
    }
  }
}

void write_signals_csv(std::ostream& os, const StudyResult& result) {
  io::write_metadata(os, metadata(result));
  os << "replicate,x,g\n";
  for (const auto& rep : result.replicates) {
    for (std::size_t i = 0; i < rep.x.size(); ++i) {
      os << rep.replicate << ',' << io::format_double(rep.x[i]) << ','
         << io::format_double(rep.g[i]) << '\n';
    }
  }
}

std::vector<std::filesystem::path> write_study(const StudyResult& result,
                                               const std::filesystem::path& dir, bool signals) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const char* name) {
    written.push_back(dir / name);
    std::ofstream os(written.back(), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + written.back().string());
    return os;
  };
  {
    auto os = open("replicates.csv");
    write_replicates_csv(os, result);
  }
  {
    auto os = open("long.csv");
    write_long_csv(os, result);
  }
  {
    auto os = open("summary.json");
    os << summary_json(result).dump(2) << '\n';
  }
  if (signals) {
    auto os = open("signals.csv");
    write_signals_csv(os, result);
  }
  return written;
}

}  // namespace gps::sim
