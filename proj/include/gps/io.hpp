#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gps/basis.hpp"
#include "gps/knots.hpp"

namespace gps::io {

// Shortest form that parses back to the same double, '.' decimal,
// independent of the global locale.
std::string format_double(double v);
double parse_double(const std::string& s);

// Written as leading '#' comment lines on every CSV output.
struct Metadata {
  std::string command;
  std::optional<std::uint64_t> seed;
  nlohmann::json config = nlohmann::json::object();
};

void write_metadata(std::ostream& os, const Metadata& meta);
nlohmann::json metadata_json(const Metadata& meta);

// Rows of numbers. Lines starting with '#' and a first non-numeric row
// (column names) are skipped. Accepts ',' or whitespace separators.
std::vector<std::vector<double>> read_numeric_table(std::istream& is);

// Two-column (x, y) data.
void read_xy(std::istream& is, std::vector<double>& x, std::vector<double>& y);

void write_columns(std::ostream& os, const std::vector<std::string>& names,
                   const std::vector<const std::vector<double>*>& columns);
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
void write_triplets(std::ostream& os,
                    const std::vector<std::tuple<std::size_t, std::size_t, double>>& entries);

// One knot per line; the order is carried in a "# order: d" comment line.
void write_knots_csv(std::ostream& os, const KnotVector& kv, const Metadata* meta = nullptr);
KnotVector read_knots_csv(std::istream& is, std::optional<int> order = std::nullopt);

nlohmann::json knots_to_json(const KnotVector& kv);
KnotVector knots_from_json(const nlohmann::json& j);

// Picks the format from the extension (.json, otherwise CSV).
KnotVector load_knots(const std::filesystem::path& path, std::optional<int> order = std::nullopt);

// {"rows": n, "cols": p, "order": d, "data": [{"offset": o, "values": [...]}, ...]}
nlohmann::json design_to_json(const DesignMatrix& b);

}  // namespace gps::io
