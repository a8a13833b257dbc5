#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gps/acceptance.hpp"
#include "gps/basis.hpp"
#include "gps/errors.hpp"
#include "gps/fit.hpp"
#include "gps/io.hpp"
#include "gps/knots.hpp"
#include "gps/oracle.hpp"
#include "gps/penalty.hpp"
#include "gps/sim.hpp"
#include "gps/sim_io.hpp"
#include "gps/version.hpp"

namespace gps::cli {

namespace {

using nlohmann::json;

// Failure of a numerical self-check (exit code 3).
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// Output target: a file, or the standard output for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& stdout_) {
    if (path == "-") {
      os_ = &stdout_;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::invalid_argument("cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

void read_xy_from(const std::string& path, std::istream& in, std::vector<double>& x,
                  std::vector<double>& y) {
  if (path == "-") {
    io::read_xy(in, x, y);
    return;
  }
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open data file " + path);
  io::read_xy(f, x, y);
}

std::vector<double> read_x_from(const std::string& path, std::istream& in) {
  std::ifstream f;
  std::istream* src = &in;
  if (path != "-") {
    f.open(path);
    if (!f) throw std::invalid_argument("cannot open data file " + path);
    src = &f;
  }
  std::vector<double> x;
  for (const auto& row : io::read_numeric_table(*src)) {
    if (row.empty()) continue;
    x.push_back(row[0]);
  }
  return x;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_knots(const std::string& path, const KnotVector& kv, const io::Metadata& meta,
                 std::ostream& stdout_) {
  Sink sink(path, stdout_);
  if (ends_with(path, ".json")) {
    json j = io::knots_to_json(kv);
    j["meta"] = io::metadata_json(meta);
    *sink << j.dump(2) << '\n';
  } else {
    io::write_knots_csv(*sink, kv, &meta);
  }
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string input = "-";
  std::string out = "-";
  std::string grid_out;
  long k = 10;
  int degree = 3;
  int m = 2;
  std::string flavor = "general";
  std::string knots = "quantile";
  std::string knot_file;
  std::string lambda = "auto";
  bool force_naive = false;
  std::optional<double> lower;
  std::optional<double> upper;
  std::size_t grid_size = 512;
  bool degree_given = false;
};

int cmd_fit(const FitArgs& a, Io io_) {
  std::vector<double> x, y;
  read_xy_from(a.input, io_.in, x, y);

  FitOptions opt;
  opt.knots = parse_knot_strategy(a.knots);
  opt.k = a.k;
  opt.order = a.degree + 1;
  opt.penalty_order = a.m;
  opt.penalty = parse_penalty_kind(a.flavor == "ospline" ? "derivative" : a.flavor);
  opt.force_naive = a.force_naive;
  opt.grid_size = a.grid_size;
  if (a.lambda != "auto") {
    try {
      opt.lambda = io::parse_double(a.lambda);
    } catch (const std::exception&) {
      throw ConfigError("--lambda must be 'auto' or a number, got '" + a.lambda + "'");
    }
    if (!(*opt.lambda >= 0.0) || !std::isfinite(*opt.lambda)) {
      throw ConfigError("--lambda must be a finite non-negative number");
    }
  }
  if (opt.knots == KnotStrategy::Given) {
    if (a.knot_file.empty()) throw ConfigError("--knots file needs --knot-file");
    opt.given_knots = io::load_knots(a.knot_file, a.degree_given ? std::optional<int>(opt.order)
                                                                  : std::nullopt);
    opt.order = opt.given_knots->order();
  } else if (!a.knot_file.empty()) {
    throw ConfigError("--knot-file is only used with --knots file");
  }
  if (a.lower || a.upper) {
    if (!a.lower || !a.upper) throw ConfigError("--lower and --upper go together");
    opt.domain = std::make_pair(*a.lower, *a.upper);
  }

  const CurveFit cf = fit_curve(x, y, opt);

  json config{{"input", a.input},
              {"k", static_cast<long>(cf.knots.num_interior())},
              {"order", cf.knots.order()},
              {"degree", cf.knots.order() - 1},
              {"penalty_order", a.m},
              {"flavor", to_string(opt.penalty)},
              {"knots", to_string(opt.knots)},
              {"lambda", a.lambda},
              {"force_naive", a.force_naive},
              {"domain", {cf.knots.lower(), cf.knots.upper()}},
              {"grid_size", a.grid_size}};
  if (!a.knot_file.empty()) config["knot_file"] = a.knot_file;
  const io::Metadata meta{"fit", std::nullopt, config};

  json j;
  j["lambda"] = cf.fit.lambda;
  j["edf"] = cf.fit.edf;
  j["gcv"] = cf.fit.gcv;
  j["rss"] = cf.fit.rss;
  j["flat_gcv"] = cf.fit.flat_gcv;
  j["beta"] = cf.fit.beta;
  j["knots"] = std::vector<double>(cf.knots.knots().begin(), cf.knots.knots().end());
  j["order"] = cf.knots.order();
  if (!cf.fit.grid_lambda.empty()) {
    j["search"] = {{"lambda", cf.fit.grid_lambda}, {"gcv", cf.fit.grid_gcv}};
  }
  j["meta"] = io::metadata_json(meta);
  {
    Sink sink(a.out, io_.out);
    *sink << j.dump(2) << '\n';
  }
  if (!a.grid_out.empty()) {
    Sink sink(a.grid_out, io_.out);
    io::write_metadata(*sink, meta);
    io::write_columns(*sink, {"grid_x", "fitted"}, {&cf.grid_x, &cf.grid_y});
  }
  return kOk;
}

// ---------------------------------------------------------------- knots

struct KnotArgs {
  std::string placement = "quantile";
  long k = 10;
  int degree = 3;
  std::string data;
  std::optional<double> lower;
  std::optional<double> upper;
  std::string out = "-";
  std::string validate;
  std::string design;
  bool degree_given = false;
};

int cmd_knots(const KnotArgs& a, Io io_) {
  if (!a.validate.empty()) {
    // Reads the raw sequence so that every violation can be reported.
    std::ifstream f(a.validate);
    if (!f) throw std::invalid_argument("cannot open knot file " + a.validate);
    std::vector<double> t;
    int order = a.degree_given ? a.degree + 1 : 0;  // 0: not yet known
    if (ends_with(a.validate, ".json")) {
      json j;
      try {
        f >> j;
        t = j.at("t").get<std::vector<double>>();
        if (order == 0) order = j.at("d").get<int>();
      } catch (const json::exception& e) {
        throw std::invalid_argument("malformed knot JSON " + a.validate + ": " + e.what());
      }
    } else {
      std::string line;
      while (std::getline(f, line)) {
        if (line.rfind("# order:", 0) == 0) {
          if (order == 0) order = std::stoi(line.substr(8));
          continue;
        }
        if (line.empty() || line[0] == '#') continue;
        try {
          t.push_back(io::parse_double(line));
        } catch (const std::exception&) {
          if (!t.empty()) throw;
        }
      }
    }
    if (order == 0) throw ConfigError("knot order unknown: pass --degree");
    const int d = order;
    const KnotDiagnostics diag = validate(t, d);
    json j{{"valid", diag.ok()},
           {"K", diag.K},
           {"d", diag.d},
           {"k", diag.k},
           {"p", diag.p},
           {"violations", diag.violations}};
    if (diag.ok()) {
      j["domain"] = {diag.a, diag.b};
      const KnotVector kv(t, d);
      j["clamped"] = kv.is_clamped();
      j["uniform"] = kv.is_uniform();
    }
    io_.out << j.dump(2) << '\n';
    return diag.ok() ? kOk : kValidation;
  }

  const int d = a.degree + 1;
  std::vector<double> raw;  // data order, for --design
  std::vector<double> x;
  if (!a.data.empty()) {
    raw = read_x_from(a.data, io_.in);
    x = raw;
    std::sort(x.begin(), x.end());
  }
  double lo = 0.0, hi = 0.0;
  if (a.lower && a.upper) {
    lo = *a.lower;
    hi = *a.upper;
  } else if (a.lower || a.upper) {
    throw ConfigError("--lower and --upper go together");
  } else if (!x.empty()) {
    lo = x.front();
    hi = x.back();
  } else {
    throw ConfigError("give --lower/--upper or --data");
  }

  const KnotStrategy strategy = parse_knot_strategy(a.placement);
  std::optional<KnotVector> kv;
  if (strategy == KnotStrategy::Uniform) {
    kv = place_uniform(lo, hi, a.k, d);
  } else if (strategy == KnotStrategy::Quantile) {
    if (x.empty()) throw ConfigError("quantile placement needs --data");
    kv = place_quantile_clamped(x, lo, hi, a.k, d);
  } else {
    throw ConfigError("--placement must be uniform or quantile");
  }
  json config{{"placement", a.placement}, {"k", a.k}, {"order", d},
              {"degree", a.degree},       {"domain", {lo, hi}}};
  if (!a.data.empty()) config["data"] = a.data;
  const io::Metadata meta{"knots", std::nullopt, config};
  write_knots(a.out, *kv, meta, io_.out);

  if (!a.design.empty()) {
    if (x.empty()) throw ConfigError("--design needs --data");
    const DesignMatrix b = design_matrix(BasisSpec(*kv), raw);
    Sink sink(a.design, io_.out);
    if (ends_with(a.design, ".json")) {
      json j = io::design_to_json(b);
      j["meta"] = io::metadata_json(meta);
      *sink << j.dump(2) << '\n';
    } else {
      io::write_metadata(*sink, meta);
      io::write_matrix(*sink, b.to_dense());
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- penalty

struct PenaltyArgs {
  std::string knot_file;
  std::string placement;
  std::string data;
  std::optional<double> lower;
  std::optional<double> upper;
  long k = 10;
  int degree = 3;
  int m = 2;
  std::string flavor = "derivative";
  std::string out_dir = ".";
  bool triplets = false;
  bool check = false;
  int random_checks = 0;
  std::uint64_t seed = 0;
  bool degree_given = false;
};

void write_dense(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                 const io::Metadata& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + path.string());
  io::write_metadata(os, meta);
  io::write_matrix(os, m);
}

void write_sparse(const std::filesystem::path& path,
                  const std::vector<std::tuple<std::size_t, std::size_t, double>>& entries,
                  const io::Metadata& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + path.string());
  io::write_metadata(os, meta);
  io::write_triplets(os, entries);
}

std::vector<std::tuple<std::size_t, std::size_t, double>> identity_triplets(std::size_t n) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(i, i, 1.0);
  return out;
}

int cmd_penalty(const PenaltyArgs& a, Io io_) {
  const int d = a.degree + 1;
  const bool have_knots = !a.knot_file.empty() || !a.placement.empty();
  if (!have_knots && a.random_checks == 0) {
    throw ConfigError("give --knot-file or --placement (or --random-checks N)");
  }
  const PenaltyKind kind = parse_penalty_kind(a.flavor == "ospline" ? "derivative" : a.flavor);
  if (a.random_checks < 0) throw ConfigError("--random-checks must be >= 0");

  double worst = 0.0;
  int checked = 0;

  if (have_knots) {
    std::optional<KnotVector> kv;
    if (!a.knot_file.empty()) {
      if (!a.placement.empty()) throw ConfigError("--knot-file and --placement are exclusive");
      kv = io::load_knots(a.knot_file, a.degree_given ? std::optional<int>(d) : std::nullopt);
    } else {
      std::vector<double> x;
      if (!a.data.empty()) {
        x = read_x_from(a.data, io_.in);
        std::sort(x.begin(), x.end());
      }
      if (a.lower.has_value() != a.upper.has_value()) {
        throw ConfigError("--lower and --upper go together");
      }
      if (!a.lower && x.empty()) throw ConfigError("give --lower/--upper or --data");
      const double lo = a.lower ? *a.lower : x.front();
      const double hi = a.upper ? *a.upper : x.back();
      const KnotStrategy s = parse_knot_strategy(a.placement);
      if (s == KnotStrategy::Uniform) {
        kv = place_uniform(lo, hi, a.k, d);
      } else if (s == KnotStrategy::Quantile) {
        if (x.empty()) throw ConfigError("quantile placement needs --data");
        kv = place_quantile_clamped(x, lo, hi, a.k, d);
      } else {
        throw ConfigError("--placement must be uniform or quantile");
      }
    }
    const int order = kv->order();
    const PenaltyMatrix pen = build_penalty(kind, *kv, a.m);

    json config{{"order", order},
                {"degree", order - 1},
                {"penalty_order", a.m},
                {"flavor", to_string(kind)},
                {"knots", std::vector<double>(kv->knots().begin(), kv->knots().end())}};
    if (!a.knot_file.empty()) config["knot_file"] = a.knot_file;
    const io::Metadata meta{"penalty", std::nullopt, config};

    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path dir(a.out_dir);
    const std::size_t rows = pen.diff.rows();
    const Eigen::MatrixXd sbar = pen.gram ? pen.gram->matrix.to_dense()
                                          : Eigen::MatrixXd::Identity(rows, rows).eval();
    write_dense(dir / "D.csv", pen.diff.to_dense(), meta);
    write_dense(dir / "Sbar.csv", sbar, meta);
    write_dense(dir / "S.csv", pen.matrix.to_dense(), meta);
    write_dense(dir / "K.csv", pen.root.to_dense(), meta);
    if (a.triplets) {
      write_sparse(dir / "D_triplets.csv", pen.diff.band.triplets(), meta);
      write_sparse(dir / "Sbar_triplets.csv",
                   pen.gram ? pen.gram->matrix.triplets() : identity_triplets(rows), meta);
      write_sparse(dir / "S_triplets.csv", pen.matrix.triplets(), meta);
      write_sparse(dir / "K_triplets.csv", pen.root.triplets(), meta);
    }
    io_.out << "wrote D.csv Sbar.csv S.csv K.csv to " << dir.string() << " (p = "
            << kv->num_basis() << ", m = " << a.m << ", " << to_string(kind) << ")\n";
    if (a.check) {
      if (order <= a.m) {
        throw ConfigError("--check needs m <= d - 1");
      }
      const auto c = oracle::check_sandwich(*kv, a.m);
      worst = std::max(worst, c.rel_frobenius);
      ++checked;
      io_.out << "sandwich check on given knots: relative deviation "
              << io::format_double(c.rel_frobenius) << "\n";
    }
  }

  if (a.random_checks > 0) {
    std::mt19937_64 rng(sim::splitmix64(a.seed));
    for (int i = 0; i < a.random_checks; ++i) {
      const int dd = std::uniform_int_distribution<int>(2, 6)(rng);
      const int mm = std::uniform_int_distribution<int>(1, dd - 1)(rng);
      const KnotVector kv = oracle::random_knots(rng, dd);
      worst = std::max(worst, oracle::check_sandwich(kv, mm).rel_frobenius);
      ++checked;
    }
  }
  if (checked > 0) {
    const bool ok = worst < 1e-8;
    io_.out << (ok ? "max dev < 1e-8" : "max dev >= 1e-8") << " (largest relative deviation "
            << io::format_double(worst) << " over " << checked << " knot sets)\n";
    if (!ok) throw CheckFailed("sandwich identity deviates from the quadrature oracle");
  }
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
  std::string study = "ucurve";
  int N = 100;
  long n = 0;
  int degree = 3;
  double gamma = 0.1;
  std::uint64_t seed = 0;
  std::string out = "sim-out";
  unsigned threads = 1;
  std::vector<int> penalty_orders;
  long k = -1;
  bool signals = false;
  double sigma_fraction = 0.1;
  double tent_half_width = 0.08;
  double tent_peak = 4.0;
};

int cmd_simulate(const SimArgs& a, Io io_) {
  sim::StudyConfig cfg;
  cfg.study = sim::parse_study(a.study);
  cfg.N = a.N;
  cfg.n = a.n;
  cfg.order = a.degree + 1;
  cfg.gamma = a.gamma;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.penalty_orders = a.penalty_orders;
  cfg.k = a.k;
  cfg.sigma_fraction = a.sigma_fraction;
  cfg.tent.half_width = a.tent_half_width;
  cfg.tent.peak_to_floor = a.tent_peak;

  const sim::StudyResult res = sim::run_study(cfg);
  const auto files = sim::write_study(res, a.out, a.signals);

  io_.out << "study " << sim::to_string(res.config.study) << ": N = " << res.config.N
          << ", n = " << res.config.n << ", d = " << res.config.order
          << ", k = " << res.config.k << ", seed = " << res.config.seed << "\n";
  io_.out << "flavor        m  count  failed  median delta\n";
  for (const auto& r : res.summary()) {
    std::ostringstream line;
    line << "(" << sim::flavor_letter(r.flavor) << ") " << sim::to_string(r.flavor);
    std::string label = line.str();
    label.resize(14, ' ');
    io_.out << label << r.m << "  " << r.count << "  " << r.failures << "  "
            << io::format_double(r.median);
    if (r.curvature_hits >= 0) io_.out << "  (curvature sign at 0 matched " << r.curvature_hits << ")";
    io_.out << "\n";
  }
  for (const auto& f : files) io_.out << "wrote " << f.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::uint64_t seed = 0;
  std::string golden;
  bool json_out = false;
  std::vector<std::string> only;
  unsigned threads = 4;
};

int cmd_verify(const VerifyArgs& a, Io io_) {
  acceptance::Options opt;
  opt.seed = a.seed;
  if (!a.golden.empty()) opt.golden = a.golden;
  opt.threads = a.threads;
  for (const auto& id : a.only) {
    const auto& all = acceptance::criteria();
    if (std::none_of(all.begin(), all.end(), [&](const auto& c) { return c.id == id; })) {
      throw ConfigError("unknown criterion '" + id + "'");
    }
  }
  opt.only = a.only;
  const auto results = acceptance::run(opt);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  if (a.json_out) {
    io_.out << acceptance::report_json(results, opt).dump(2) << '\n';
  } else {
    for (const auto& r : results) io_.out << acceptance::format_line(r) << '\n';
  }
  return ok ? kOk : kNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Penalized B-spline smoothing with general difference and derivative penalties",
               "gps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("gps ") + kVersion);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a penalized spline to (x, y) data");
  fit->add_option("input", fit_args.input, "Two-column CSV (x, y); '-' for stdin")
      ->capture_default_str();
  fit->add_option("-o,--out", fit_args.out, "JSON result; '-' for stdout")->capture_default_str();
  fit->add_option("--grid-out", fit_args.grid_out, "CSV of (grid_x, fitted)");
  fit->add_option("--k", fit_args.k, "Number of interior knots")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  auto* fit_degree = fit->add_option("--degree", fit_args.degree, "Spline degree d - 1")
                         ->capture_default_str()->check(CLI::NonNegativeNumber);
  fit->add_option("--penalty-order", fit_args.m, "Penalty order m")->capture_default_str();
  fit->add_option("--flavor", fit_args.flavor, "general | derivative | standard")
      ->capture_default_str()
      ->check(CLI::IsMember({"general", "derivative", "ospline", "standard"}));
  fit->add_option("--knots", fit_args.knots, "uniform | quantile | file")->capture_default_str()
      ->check(CLI::IsMember({"uniform", "quantile", "file"}));
  fit->add_option("--knot-file", fit_args.knot_file, "Knot sequence (CSV or JSON)");
  fit->add_option("--lambda", fit_args.lambda, "'auto' (GCV) or a value")->capture_default_str();
  fit->add_flag("--force-naive", fit_args.force_naive,
                "Allow the standard difference penalty on non-uniform knots");
  fit->add_option("--lower", fit_args.lower, "Domain lower bound (default min x)");
  fit->add_option("--upper", fit_args.upper, "Domain upper bound (default max x)");
  fit->add_option("--grid-size", fit_args.grid_size, "Points in the output grid")
      ->capture_default_str()->check(CLI::PositiveNumber);

  KnotArgs knot_args;
  auto* knots = app.add_subcommand("knots", "Place or validate a knot sequence");
  knots->add_option("--placement", knot_args.placement, "uniform | quantile")
      ->capture_default_str()->check(CLI::IsMember({"uniform", "quantile"}));
  knots->add_option("--k", knot_args.k, "Number of interior knots")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  auto* knots_degree = knots->add_option("--degree", knot_args.degree, "Spline degree d - 1")
                           ->capture_default_str()->check(CLI::NonNegativeNumber);
  knots->add_option("--data", knot_args.data, "CSV whose first column holds x; '-' for stdin");
  knots->add_option("--lower", knot_args.lower, "Domain lower bound");
  knots->add_option("--upper", knot_args.upper, "Domain upper bound");
  knots->add_option("-o,--out", knot_args.out, "Knot file (.json or CSV); '-' for stdout")
      ->capture_default_str();
  knots->add_option("--validate", knot_args.validate, "Check an existing knot file");
  knots->add_option("--design", knot_args.design,
                    "Also write the design matrix at --data (.json compact rows, else dense CSV)");

  PenaltyArgs pen_args;
  auto* penalty = app.add_subcommand("penalty", "Emit D, Sbar, S and K for a knot sequence");
  penalty->add_option("--knot-file", pen_args.knot_file, "Knot sequence (CSV or JSON)");
  penalty->add_option("--placement", pen_args.placement, "uniform | quantile")
      ->check(CLI::IsMember({"uniform", "quantile"}));
  penalty->add_option("--data", pen_args.data, "x values for quantile placement");
  penalty->add_option("--lower", pen_args.lower, "Domain lower bound");
  penalty->add_option("--upper", pen_args.upper, "Domain upper bound");
  penalty->add_option("--k", pen_args.k, "Number of interior knots")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  auto* pen_degree = penalty->add_option("--degree", pen_args.degree, "Spline degree d - 1")
                         ->capture_default_str()->check(CLI::NonNegativeNumber);
  penalty->add_option("--penalty-order", pen_args.m, "Penalty order m")->capture_default_str();
  penalty->add_option("--flavor", pen_args.flavor, "derivative | general | standard")
      ->capture_default_str()
      ->check(CLI::IsMember({"general", "derivative", "ospline", "standard"}));
  penalty->add_option("--out-dir", pen_args.out_dir, "Output directory")->capture_default_str();
  penalty->add_flag("--triplets", pen_args.triplets, "Also write (row, col, value) files");
  penalty->add_flag("--check", pen_args.check,
                    "Compare the sandwich formula with the quadrature oracle");
  penalty->add_option("--random-checks", pen_args.random_checks,
                      "Also check this many random knot sequences")
      ->capture_default_str();
  penalty->add_option("--seed", pen_args.seed, "Seed for --random-checks")->capture_default_str();

  SimArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a seeded Monte Carlo study");
  simulate->add_option("--study", sim_args.study, "ucurve | mixture1 | mixture2 | random")
      ->capture_default_str()
      ->check(CLI::IsMember({"ucurve", "mixture1", "mixture2", "random"}));
  simulate->add_option("--N", sim_args.N, "Replicates")->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--n", sim_args.n, "Sample size (0: study default)")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--degree", sim_args.degree, "Spline degree d - 1")->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--gamma", sim_args.gamma, "Noise-to-signal ratio (random study)")
      ->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "Master seed")->capture_default_str();
  simulate->add_option("--out", sim_args.out, "Output directory")->capture_default_str();
  simulate->add_option("--threads", sim_args.threads, "Worker threads")->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--penalty-order", sim_args.penalty_orders,
                       "Penalty orders (default 2; 1..d-1 for the random study)");
  simulate->add_option("--k", sim_args.k, "Interior knots (-1: study default)")
      ->capture_default_str();
  simulate->add_flag("--signals", sim_args.signals, "Also write signals.csv (x, g per replicate)");
  simulate->add_option("--sigma-fraction", sim_args.sigma_fraction,
                       "Fixed-signal noise sd as a fraction of range(g)")
      ->capture_default_str();
  simulate->add_option("--tent-half-width", sim_args.tent_half_width, "Tent peak half-width")
      ->capture_default_str();
  simulate->add_option("--tent-peak", sim_args.tent_peak, "Tent peak-to-floor height ratio")
      ->capture_default_str();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--seed", verify_args.seed, "Seed")->capture_default_str();
  verify->add_option("--golden", verify_args.golden, "Reference matrices (JSON)");
  verify->add_flag("--json", verify_args.json_out, "Machine-readable report");
  verify->add_option("--only", verify_args.only, "Criterion ids to run")->delimiter(',');
  verify->add_option("--threads", verify_args.threads, "Threads for the parallel leg")
      ->capture_default_str()->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"gps"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const Io io_{in, out, err};
  try {
    if (fit->parsed()) {
      fit_args.degree_given = fit_degree->count() > 0;
      return cmd_fit(fit_args, io_);
    }
    if (knots->parsed()) {
      knot_args.degree_given = knots_degree->count() > 0;
      return cmd_knots(knot_args, io_);
    }
    if (penalty->parsed()) {
      pen_args.degree_given = pen_degree->count() > 0;
      return cmd_penalty(pen_args, io_);
    }
    if (simulate->parsed()) return cmd_simulate(sim_args, io_);
    if (verify->parsed()) return cmd_verify(verify_args, io_);
  } catch (const CheckFailed& e) {
    err << "gps: check failed: " << e.what() << "\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    err << "gps: numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "gps: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}

}  // namespace gps::cli
