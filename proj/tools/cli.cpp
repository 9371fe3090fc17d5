#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "fgdim/combinatorics.hpp"
#include "fgdim/errors.hpp"
#include "fgdim/parallel.hpp"
#include "fgdim/path_sim.hpp"
#include "fgdim/spectral_estimator.hpp"
#include "svg_plot.hpp"
#include "verify_suites.hpp"

#ifndef FGDIM_VERSION
#define FGDIM_VERSION "0.0.0"
#endif

namespace fgdim::cli {

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string process = "fbm";
  std::optional<double> hurst;
  std::optional<double> alpha;
  int q = 1;
  std::size_t paths = 1000;
  std::size_t grid = 4096;
  std::string freqs = "log:4:128:12";
  std::string direction = "vertical";
  std::uint64_t seed = 1;
  std::string out = "-";
  std::size_t workers = 0;
  std::string in;
  std::size_t skip = 2;
  std::optional<double> reference_slope;
  std::string title;
  std::string suite = "all";
  std::optional<double> tol;
  std::size_t instances = 1000;
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

ProcessParams process_from(const Options& o) {
  if (o.process == "fbm") {
    if (o.alpha) throw ValidationError("alpha requires --process stable");
    if (!o.hurst) throw ValidationError("hurst is required for --process fbm");
    if (!(*o.hurst > 0.0 && *o.hurst < 1.0)) {
      throw ValidationError("hurst must lie in (0,1), got " + fmt(*o.hurst));
    }
    return ProcessParams::fbm(*o.hurst);
  }
  if (o.process == "stable") {
    if (o.hurst) throw ValidationError("hurst requires --process fbm");
    if (!o.alpha) throw ValidationError("alpha is required for --process stable");
    if (!(*o.alpha > 0.0 && *o.alpha <= 2.0)) {
      throw ValidationError("alpha must lie in (0,2], got " + fmt(*o.alpha));
    }
    return ProcessParams::stable(*o.alpha);
  }
  throw ValidationError("process must be fbm or stable, got '" + o.process + "'");
}

void check_grid(std::size_t M) {
  try {
    validate_grid(M);
  } catch (const DomainError& e) {
    throw ValidationError(std::string("grid: ") + e.what());
  }
}

template <class Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path == "-") {
    fn(out);
    return;
  }
  std::ofstream f(path);
  if (!f) throw ValidationError("out: cannot open '" + path + "' for writing");
  fn(f);
}

// --- config file ---------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CLI::FileError::Missing(path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ParseError("config line " + std::to_string(n) + " is not key = value",
                            CLI::ExitCodes::ConfigError);
    }
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

// Appends config entries for options not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  for (auto* s : app.get_subcommands({})) {
    if (s->get_name() == args[0]) sub = s;
  }
  if (!sub) return args;
  std::string path;
  std::map<std::string, bool> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given[name] = true;
    if (name == "config") {
      if (eq != std::string::npos) {
        path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (path.empty()) return args;
  auto merged = args;
  for (const auto& [k, v] : read_config(path)) {
    if (k == "config" || !sub->get_option_no_throw("--" + k)) {
      throw CLI::ExtrasError("unknown config key '" + k + "'", CLI::ExitCodes::ConfigError);
    }
    if (given.count(k)) continue;
    merged.push_back("--" + k);
    merged.push_back(v);
  }
  return merged;
}

// --- estimate CSV ----------------------------------------------------------------

constexpr const char* kEstimateHeader = "xi1,xi2,q,n_paths,mean,stderr";

MomentGrid read_estimate_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("in: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || trim(line) != kEstimateHeader) {
    throw ValidationError(std::string("in: expected header ") + kEstimateHeader);
  }
  MomentGrid g;
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string cell[6];
    for (auto& c : cell) {
      if (!std::getline(ls, c, ',')) throw ValidationError("in: short row " + std::to_string(row));
    }
    try {
      g.points.push_back({std::stod(cell[0]), std::stod(cell[1])});
      g.q = std::stoi(cell[2]);
      g.estimates.push_back({std::stod(cell[4]), std::stod(cell[5]), std::size_t(std::stoull(cell[3]))});
    } catch (const std::logic_error&) {
      throw ValidationError("in: malformed number in row " + std::to_string(row));
    }
  }
  return g;
}

// --- subcommands -----------------------------------------------------------------

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto params = process_from(o);
  check_grid(o.grid);
  if (o.paths < 1) throw ValidationError("paths must be at least 1");
  if (o.paths * (o.grid + 1) > 100'000'000) {
    throw ResourceError("simulate: paths x (grid+1) above the 10^8 ceiling");
  }
  std::vector<std::optional<PathSample>> slots(o.paths);
  parallel_for(o.paths, o.workers, [&](std::size_t i) {
    slots[i] = sample_path(params, o.grid, derive_stream(o.seed, i));
  });
  std::vector<PathSample> paths;
  paths.reserve(o.paths);
  for (auto& s : slots) paths.push_back(std::move(*s));
  with_output(o.out, out, [&](std::ostream& os) { write_paths_csv(os, paths); });
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  const auto params = process_from(o);
  if (o.q < 1 || o.q > kMaxMomentQ) throw ValidationError("q must lie in [1,4]");
  if (o.paths < kMinMomentPaths) throw ValidationError("paths must be at least 100");
  check_grid(o.grid);
  Direction d;
  std::vector<double> r;
  try {
    d = parse_direction(o.direction);
    if (d == Direction::Custom) throw DomainError("custom");
  } catch (const DomainError&) {
    throw ValidationError("direction must be horizontal, vertical or diagonal");
  }
  try {
    r = parse_log_grid(o.freqs);
  } catch (const DomainError& e) {
    throw ValidationError(std::string("freqs: ") + e.what());
  }
  const auto pts = ray_points(d, r);
  MomentGridOptions mo;
  mo.workers = o.workers;
  mo.direction = d;
  const auto g = moment_grid(params, o.q, pts, o.paths, o.seed, o.grid, mo);
  with_output(o.out, out, [&](std::ostream& os) {
    os << kEstimateHeader << '\n';
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const auto& e = g.estimates[i];
      os << fmt(g.points[i].xi1) << ',' << fmt(g.points[i].xi2) << ',' << g.q << ',' << e.n_paths
         << ',' << fmt(e.mean) << ',' << fmt(e.stderr_) << '\n';
    }
  });
  return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
  const auto g = read_estimate_csv(o.in);
  FitOptions fo;
  fo.skip_smallest = o.skip;
  const auto f = fit_decay(g, fo);
  const double gamma = -f.slope / g.q;
  const double half = 1.959963984540054 * f.slope_stderr / g.q;
  with_output(o.out, out, [&](std::ostream& os) {
    os << "slope = " << fmt(f.slope) << '\n'
       << "stderr = " << fmt(f.slope_stderr) << '\n'
       << "r2 = " << fmt(f.r_squared) << '\n'
       << "gamma = " << fmt(gamma) << '\n'
       << "ci_lo = " << fmt(gamma - half) << '\n'
       << "ci_hi = " << fmt(gamma + half) << '\n'
       << "n_points = " << f.n_points << '\n'
       << "fit_min = " << fmt(f.fit_range.first) << '\n'
       << "fit_max = " << fmt(f.fit_range.second) << '\n';
  });
  return kExitOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  const auto g = read_estimate_csv(o.in);
  LogLogPlot p;
  p.title = o.title.empty() ? "moment decay, q = " + std::to_string(g.q) : o.title;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    p.x.push_back(g.points[i].norm());
    p.y.push_back(g.estimates[i].mean);
    p.yerr.push_back(g.estimates[i].stderr_);
  }
  FitOptions fo;
  fo.skip_smallest = o.skip;
  try {
    const auto f = fit_decay(g, fo);
    p.fit = std::make_pair(f.slope, f.intercept);
  } catch (const InsufficientSignalError&) {
  }
  p.reference_slope = o.reference_slope;
  with_output(o.out, out, [&](std::ostream& os) { write_svg(os, p); });
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  if (std::find(kSuites.begin(), kSuites.end(), o.suite) == kSuites.end()) {
    throw ValidationError("suite must be one of ibp, fdb, lnd, counts, bounds, moments, all");
  }
  if (o.q < 1 || o.q > kMaxEnumerationQ) throw ValidationError("q must lie in [1,8]");
  if (o.tol && !(*o.tol >= 0.0)) throw ValidationError("tol must be nonnegative");
  VerifyConfig cfg;
  cfg.q = o.q;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  cfg.instances = o.instances;
  cfg.mc_paths = o.paths;
  cfg.workers = o.workers;
  std::vector<VerifyRow> rows;
  auto write = [&] {
    with_output(o.out, out, [&](std::ostream& os) { write_verify_csv(os, rows); });
  };
  try {
    run_suite(o.suite, cfg, rows);
  } catch (...) {
    write();
    throw;
  }
  write();
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.pass;
  if (failed > 0) {
    err << "verify: " << failed << " of " << rows.size() << " rows failed\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

void add_process_options(CLI::App* s, Options& o) {
  s->add_option("--process", o.process, "fbm or stable");
  s->add_option("--hurst", o.hurst, "Hurst index in (0,1), fbm only");
  s->add_option("--alpha", o.alpha, "stability index in (0,2], stable only");
}

}  // namespace

std::string version_string() { return std::string("fgdim ") + FGDIM_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fourier decay of fractal graph measures: simulation, estimation, verification",
               "fgdim"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Sample paths and write them as CSV");
  auto* est = app.add_subcommand("estimate", "Monte Carlo moments of the graph Fourier transform");
  auto* fit = app.add_subcommand("fit", "Log-log decay fit of an estimate CSV");
  auto* ver = app.add_subcommand("verify", "Run identity and invariant suites");
  auto* plot = app.add_subcommand("plot", "SVG log-log chart of an estimate CSV");

  for (auto* s : {sim, est, fit, ver, plot}) {
    s->add_option("--config", o.config, "key = value file; explicit flags win");
    s->add_option("--out", o.out, "output file, - for standard output");
  }
  for (auto* s : {sim, est, ver}) {
    s->add_option("--seed", o.seed, "64-bit seed");
    s->add_option("--workers", o.workers, "worker threads, 0 for all cores");
    s->add_option("--paths", o.paths, "number of paths");
  }
  add_process_options(sim, o);
  add_process_options(est, o);
  sim->add_option("--grid", o.grid, "grid size M (power of two)");
  est->add_option("--grid", o.grid, "grid size M (power of two)");
  est->add_option("--q", o.q, "moment order");
  est->add_option("--freqs", o.freqs, "log:<min>:<max>:<count>");
  est->add_option("--direction", o.direction, "horizontal, vertical or diagonal");
  for (auto* s : {fit, plot}) {
    s->add_option("--in", o.in, "estimate CSV")->required();
    s->add_option("--skip", o.skip, "smallest frequencies excluded from the fit");
  }
  plot->add_option("--reference-slope", o.reference_slope, "reference slope line");
  plot->add_option("--title", o.title, "chart title");
  ver->add_option("--suite", o.suite, "ibp, fdb, lnd, counts, bounds, moments or all");
  ver->add_option("--q", o.q, "order");
  ver->add_option("--tol", o.tol, "tolerance override for every row");
  ver->add_option("--instances", o.instances, "random instances per randomized check");

  try {
    auto merged = merge_config(args, app);
    std::vector<std::string> rev(merged.rbegin(), merged.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  // Paths default differs per subcommand.
  if (sim->parsed() && sim->get_option("--paths")->count() == 0) o.paths = 1;
  if (ver->parsed() && ver->get_option("--paths")->count() == 0) o.paths = 0;

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (est->parsed()) return cmd_estimate(o, out);
    if (fit->parsed()) return cmd_fit(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
    if (ver->parsed()) return cmd_verify(o, out, err);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const PreconditionError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}

}  // namespace fgdim::cli
