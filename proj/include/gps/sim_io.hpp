#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "gps/sim.hpp"

namespace gps::sim {

// Resolved configuration; the worker count is left out so that output does
// not depend on it.
nlohmann::json config_json(const StudyConfig& cfg);
nlohmann::json summary_json(const StudyResult& result);

// replicate,flavor,m,delta,status
void write_replicates_csv(std::ostream& os, const StudyResult& result);
// One row per (replicate, flavor, m) with sigma, lambda and edf; boxplot-ready.
void write_long_csv(std::ostream& os, const StudyResult& result);
// replicate,x,g: the logged signal, from which sigma can be recomputed.
void write_signals_csv(std::ostream& os, const StudyResult& result);

// Writes replicates.csv, long.csv, summary.json (and signals.csv) into dir.
std::vector<std::filesystem::path> write_study(const StudyResult& result,
                                               const std::filesystem::path& dir,
                                               bool signals = false);

}  // namespace gps::sim
