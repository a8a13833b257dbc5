#include "gps/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "gps/version.hpp"

namespace gps::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  if (b < e && s[b] == '+') ++b;
  double v = 0.0;
  const auto res = std::from_chars(s.data() + b, s.data() + e, v);
  if (res.ec != std::errc() || res.ptr != s.data() + e) {
    const std::string token = s.substr(b, e - b);
    if (token == "nan") return std::nan("");
    if (token == "inf") return INFINITY;
    if (token == "-inf") return -INFINITY;
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

nlohmann::json metadata_json(const Metadata& meta) {
  nlohmann::json j;
  j["tool"] = "gps";
  j["version"] = kVersion;
  j["command"] = meta.command;
  if (meta.seed) j["seed"] = *meta.seed;
  j["config"] = meta.config;
  return j;
}

void write_metadata(std::ostream& os, const Metadata& meta) {
  os << "# gps " << kVersion << '\n';
  os << "# command: " << meta.command << '\n';
  if (meta.seed) os << "# seed: " << *meta.seed << '\n';
  os << "# config: " << meta.config.dump() << '\n';
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_table(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_data_line = true;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> row;
    try {
      for (const auto& f : fields) row.push_back(parse_double(f));
    } catch (const std::invalid_argument&) {
      if (first_data_line) {
        first_data_line = false;
        continue;  // column names
      }
      throw std::invalid_argument("line " + std::to_string(lineno) + ": non-numeric field");
    }
    first_data_line = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

void read_xy(std::istream& is, std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  for (const auto& row : read_numeric_table(is)) {
    if (row.size() < 2) throw std::invalid_argument("expected two columns (x, y)");
    x.push_back(row[0]);
    y.push_back(row[1]);
  }
}

void write_columns(std::ostream& os, const std::vector<std::string>& names,
                   const std::vector<const std::vector<double>*>& columns) {
  for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
  os << '\n';
  const std::size_t n = columns.empty() ? 0 : columns.front()->size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << (c ? "," : "") << format_double((*columns[c])[i]);
    }
    os << '\n';
  }
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

void write_triplets(std::ostream& os,
                    const std::vector<std::tuple<std::size_t, std::size_t, double>>& entries) {
  os << "row,col,value\n";
  for (const auto& [r, c, v] : entries) os << r << ',' << c << ',' << format_double(v) << '\n';
}

void write_knots_csv(std::ostream& os, const KnotVector& kv, const Metadata* meta) {
  if (meta) write_metadata(os, *meta);
  os << "# order: " << kv.order() << '\n';
  for (double t : kv.knots()) os << format_double(t) << '\n';
}

KnotVector read_knots_csv(std::istream& is, std::optional<int> order) {
  std::string line;
  std::vector<double> t;
  std::optional<int> declared;
  while (std::getline(is, line)) {
    if (line.rfind("# order:", 0) == 0) {
      declared = std::stoi(line.substr(8));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 1) throw std::invalid_argument("knot CSV must have a single column");
    try {
      t.push_back(parse_double(fields[0]));
    } catch (const std::invalid_argument&) {
      if (!t.empty()) throw;
    }
  }
  if (order && declared && *order != *declared) {
    throw std::invalid_argument("knot file declares order " + std::to_string(*declared) +
                                " but order " + std::to_string(*order) + " was requested");
  }
  const auto d = order ? order : declared;
  if (!d) throw std::invalid_argument("knot CSV has no '# order:' line and no order was given");
  return KnotVector(std::move(t), *d);
}

nlohmann::json knots_to_json(const KnotVector& kv) {
  nlohmann::json j;
  j["d"] = kv.order();
  j["t"] = std::vector<double>(kv.knots().begin(), kv.knots().end());
  return j;
}

KnotVector knots_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("t")) {
    throw std::invalid_argument("knot JSON must be an object {\"d\": order, \"t\": [...]}");
  }
  return KnotVector(j.at("t").get<std::vector<double>>(), j.at("d").get<int>());
}

KnotVector load_knots(const std::filesystem::path& path, std::optional<int> order) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open knot file " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("malformed knot JSON " + path.string() + ": " + e.what());
    }
    KnotVector kv = knots_from_json(j);
    if (order && *order != kv.order()) {
      throw std::invalid_argument("knot file declares order " + std::to_string(kv.order()) +
                                  " but order " + std::to_string(*order) + " was requested");
    }
    return kv;
  }
  return read_knots_csv(in, order);
}

nlohmann::json design_to_json(const DesignMatrix& b) {
  nlohmann::json j;
  j["rows"] = b.rows();
  j["cols"] = b.cols();
  j["order"] = b.order();
  auto& data = j["data"] = nlohmann::json::array();
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const auto r = b.row(i);
    data.push_back({{"offset", b.offset(i)}, {"values", std::vector<double>(r.begin(), r.end())}});
  }
  return j;
}

}  // namespace gps::io
