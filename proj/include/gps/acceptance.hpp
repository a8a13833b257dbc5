#pragma once

// End-to-end acceptance checks, shared by the acceptance test binary and
// `gps verify`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gps::acceptance {

struct CriterionResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> golden;  // default: built-in reference values
  std::vector<std::string> only;                // empty: all criteria
  unsigned threads = 4;                         // parallel leg of the determinism check
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "gps-acceptance";
};

struct Criterion {
  std::string id;
  std::string name;
};

const std::vector<Criterion>& criteria();

// Reference matrices: knots (0,0,0,0,1,3,4,4,4,4), d = 4, general differences
// of order 1..3, and standard differences D5(1), D6(2), D7(3).
nlohmann::json default_golden();

std::vector<CriterionResult> run(const Options& opt);

// {"passed": bool, "seed": s, "criteria": [{"id", "name", "passed", "detail", "seconds"}]}
nlohmann::json report_json(const std::vector<CriterionResult>& results, const Options& opt);

// "PASS id (1.23 s): detail"
std::string format_line(const CriterionResult& r);

}  // namespace gps::acceptance
