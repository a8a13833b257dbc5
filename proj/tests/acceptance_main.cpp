// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.
//   gps_acceptance [--seed N] [--only id[,id...]] [--golden file]

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "gps/acceptance.hpp"

int main(int argc, char** argv) {
  gps::acceptance::Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (i + 1 >= argc) {
      std::cerr << "missing value for " << arg << "\n";
      return 2;
    }
    const std::string value = argv[++i];
    if (arg == "--seed") {
      opt.seed = std::stoull(value);
    } else if (arg == "--only") {
      std::stringstream ss(value);
      for (std::string id; std::getline(ss, id, ',');) opt.only.push_back(id);
    } else if (arg == "--golden") {
      opt.golden = value;
    } else {
      std::cerr << "unknown option " << arg << "\n";
      return 2;
    }
  }
  const auto results = gps::acceptance::run(opt);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << gps::acceptance::format_line(r) << std::endl;
    failed += r.passed ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
