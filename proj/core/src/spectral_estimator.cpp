#include "fgdim/spectral_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "fgdim/errors.hpp"
#include "fgdim/log.hpp"
#include "fgdim/parallel.hpp"
#include "fgdim/rng.hpp"

namespace fgdim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

double FrequencyPoint::norm() const { return std::hypot(xi1, xi2); }

double frequency_gate(const ProcessParams& params, std::size_t M, double delta) {
  return std::pow(double(M), params.self_similarity_index() * (1.0 - delta));
}

std::complex<double> graph_ft_sum(std::span<const double> values, FrequencyPoint xi) {
  if (values.size() < 2) throw PreconditionError("graph_ft: path needs at least two values");
  const std::size_t M = values.size() - 1;
  if (xi.xi1 == 0.0 && xi.xi2 == 0.0) return 1.0;
  const double step = xi.xi1 / double(M);
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    // Time phase mod 1.
    double tp = step * double(k);
    tp -= std::floor(tp);
    const double arg = -kTwoPi * (tp + xi.xi2 * values[k]);
    re += std::cos(arg);
    im += std::sin(arg);
  }
  return {re / double(M), im / double(M)};
}

FtValue graph_ft(const PathSample& path, FrequencyPoint xi, double gate_delta) {
  if (!std::isfinite(xi.xi1) || !std::isfinite(xi.xi2)) {
    throw DomainError("graph_ft: frequency must be finite");
  }
  FtValue v;
  v.value = graph_ft_sum(path.values, xi);
  v.gate_warning = std::abs(xi.xi2) > frequency_gate(path.params, path.M(), gate_delta);
  return v;
}

FtValue image_ft(const PathSample& path, double xi2, double gate_delta) {
  return graph_ft(path, {0.0, xi2}, gate_delta);
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::Horizontal:
      return "horizontal";
    case Direction::Vertical:
      return "vertical";
    case Direction::Diagonal:
      return "diagonal";
    case Direction::Custom:
      return "custom";
  }
  return "custom";
}

Direction parse_direction(const std::string& s) {
  if (s == "horizontal") return Direction::Horizontal;
  if (s == "vertical") return Direction::Vertical;
  if (s == "diagonal") return Direction::Diagonal;
  if (s == "custom") return Direction::Custom;
  throw DomainError("unknown direction '" + s + "'");
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
    throw DomainError("log grid needs 0 < min <= max and count >= 1");
  }
  if (count == 1) return {lo};
  std::vector<double> r(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    r[i] = std::exp(a + (b - a) * double(i) / double(count - 1));
  }
  r.front() = lo;
  r.back() = hi;
  return r;
}

std::vector<double> parse_log_grid(const std::string& spec) {
  std::istringstream is(spec);
  std::string tag, lo, hi, n;
  if (!std::getline(is, tag, ':') || tag != "log" || !std::getline(is, lo, ':') ||
      !std::getline(is, hi, ':') || !std::getline(is, n) || n.empty()) {
    throw DomainError("frequency spec must be log:<min>:<max>:<count>, got '" + spec + "'");
  }
  try {
    std::size_t used = 0;
    const long long cnt = std::stoll(n, &used);
    if (used != n.size() || cnt < 1) throw DomainError("bad count");
    return log_grid(std::stod(lo), std::stod(hi), std::size_t(cnt));
  } catch (const std::logic_error&) {
    throw DomainError("frequency spec must be log:<min>:<max>:<count>, got '" + spec + "'");
  }
}

std::vector<FrequencyPoint> ray_points(Direction d, std::span<const double> r) {
  std::vector<FrequencyPoint> pts;
  pts.reserve(r.size());
  for (double x : r) {
    switch (d) {
      case Direction::Horizontal:
        pts.push_back({x, 1.0});
        break;
      case Direction::Vertical:
        pts.push_back({0.0, x});
        break;
      case Direction::Diagonal:
        pts.push_back({x, x});
        break;
      case Direction::Custom:
        throw PreconditionError("ray_points: custom direction has no ray");
    }
  }
  return pts;
}

std::vector<double> moment_samples(const ProcessParams& params, int q,
                                   std::span<const FrequencyPoint> points, std::size_t n_paths,
                                   std::uint64_t seed, std::size_t M,
                                   const MomentGridOptions& opt, bool* gate_warning) {
  if (q < 1 || q > kMaxMomentQ) throw DomainError("moment grid: q must be in [1, 4]");
  if (n_paths < kMinMomentPaths) throw DomainError("moment grid: need at least 100 paths");
  validate_grid(M);
  if (n_paths > kMaxMomentPaths || n_paths * std::max<std::size_t>(points.size(), 1) >
                                       kMaxMomentCells) {
    throw ResourceError("moment grid: paths x points above the 10^8 ceiling");
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.xi1) || !std::isfinite(p.xi2)) {
      throw DomainError("moment grid: frequencies must be finite");
    }
  }
  const double gate = frequency_gate(params, M, opt.gate_delta);
  bool warn = false;
  for (const auto& p : points) warn = warn || std::abs(p.xi2) > gate;
  if (warn) {
    log_message(LogLevel::Warning, "some |xi2| exceed the Riemann-sum gate " + std::to_string(gate));
  }
  if (gate_warning) *gate_warning = warn;

  std::shared_ptr<const FbmSampler> fbm;
  if (params.kind() == ProcessKind::Fbm) fbm = std::make_shared<FbmSampler>(params.hurst(), M);

  const std::size_t P = points.size();
  std::vector<double> out(n_paths * P);
  parallel_for(n_paths, opt.workers, [&](std::size_t i) {
    thread_local std::vector<double> path;
    path.resize(M + 1);
    Generator gen(derive_stream(seed, i));
    if (fbm) {
      fbm->sample_into(gen, path);
    } else {
      sample_stable_into(params.alpha(), gen, path);
    }
    for (std::size_t j = 0; j < P; ++j) {
      out[i * P + j] = ipow(std::norm(graph_ft_sum(path, points[j])), q);
    }
  });
  return out;
}

MomentGrid summarize_samples(std::span<const double> samples, std::size_t n_paths,
                             std::vector<FrequencyPoint> points, int q, Direction d) {
  const std::size_t P = points.size();
  if (samples.size() != n_paths * P) throw PreconditionError("summarize_samples: size mismatch");
  MomentGrid g;
  g.points = std::move(points);
  g.q = q;
  g.direction = d;
  g.estimates.resize(P);
  for (std::size_t j = 0; j < P; ++j) {
    // Welford in path order.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      const double x = samples[i * P + j];
      const double delta = x - mean;
      mean += delta / double(i + 1);
      m2 += delta * (x - mean);
    }
    const double var = n_paths > 1 ? m2 / double(n_paths - 1) : 0.0;
    g.estimates[j] = {mean, std::sqrt(std::max(var, 0.0) / double(n_paths)), n_paths};
  }
  return g;
}

MomentGrid moment_grid(const ProcessParams& params, int q, std::span<const FrequencyPoint> points,
                       std::size_t n_paths, std::uint64_t seed, std::size_t M,
                       const MomentGridOptions& opt) {
  bool warn = false;
  const auto s = moment_samples(params, q, points, n_paths, seed, M, opt, &warn);
  auto g = summarize_samples(s, n_paths, {points.begin(), points.end()}, q, opt.direction);
  g.gate_warning = warn;
  return g;
}

Region region_of(FrequencyPoint xi) {
  if (xi.xi1 == 0.0 && xi.xi2 == 0.0) throw DomainError("region_of: the origin has no angle");
  return std::abs(xi.xi1) >= std::abs(xi.xi2) ? Region::Horizontal : Region::Vertical;
}

DecayFit fit_decay(const MomentGrid& grid, const FitOptions& opt) {
  if (grid.points.size() != grid.estimates.size()) {
    throw PreconditionError("fit_decay: points and estimates differ in length");
  }
  std::vector<std::size_t> order(grid.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grid.points[a].norm() < grid.points[b].norm();
  });
  if (order.size() < opt.skip_smallest + opt.min_points) {
    throw InsufficientSignalError("fit_decay: need at least " +
                                  std::to_string(opt.skip_smallest + opt.min_points) + " points");
  }
  order.erase(order.begin(), order.begin() + std::ptrdiff_t(opt.skip_smallest));

  std::ostringstream bad;
  bad.precision(6);
  bool weighted = true;
  double prev = -1.0;
  for (std::size_t i : order) {
    const auto& p = grid.points[i];
    const auto& e = grid.estimates[i];
    if (!(p.norm() > prev)) throw PreconditionError("fit_decay: |xi| must be strictly increasing");
    prev = p.norm();
    if (!(e.mean > 2.0 * e.stderr_) || !(e.mean > 0.0)) {
      bad << " (" << p.xi1 << "," << p.xi2 << ")";
    }
    if (e.stderr_ == 0.0) weighted = false;
  }
  if (!bad.str().empty()) {
    throw InsufficientSignalError("fit_decay: estimate not above 2 stderr at" + bad.str());
  }

  const std::size_t n = order.size();
  std::vector<double> x(n), y(n), w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = grid.estimates[order[k]];
    x[k] = std::log(grid.points[order[k]].norm());
    y[k] = std::log(e.mean);
    w[k] = weighted ? (e.mean / e.stderr_) * (e.mean / e.stderr_) : 1.0;
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sw += w[k];
    sx += w[k] * x[k];
    sy += w[k] * y[k];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += w[k] * (x[k] - mx) * (x[k] - mx);
    sxy += w[k] * (x[k] - mx) * (y[k] - my);
    syy += w[k] * (y[k] - my) * (y[k] - my);
  }
  DecayFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - f.intercept - f.slope * x[k];
    ssr += w[k] * r * r;
  }
  f.slope_stderr = std::sqrt(ssr / double(n - 2) / sxx);
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.fit_range = {grid.points[order.front()].norm(), grid.points[order.back()].norm()};
  f.n_points = n;
  f.weighted = weighted;
  return f;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * double(v.size() - 1);
  const std::size_t i = std::size_t(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - double(i)) * (v[i + 1] - v[i]);
}

}  // namespace

FourierDimEstimate fourier_dim_lower(const ProcessParams& params, std::span<const int> q_list,
                                     std::size_t budget, const FourierDimOptions& opt) {
  if (q_list.empty()) throw DomainError("fourier_dim_lower: q list is empty");
  const auto r = log_grid(opt.r_min, opt.r_max, opt.n_freqs);
  const std::size_t fits = 2 * q_list.size();
  const std::size_t n_paths = budget / (fits * r.size());
  if (n_paths < kMinMomentPaths) {
    throw ResourceError("fourier_dim_lower: budget allows fewer than 100 paths per fit");
  }

  struct Cell {
    std::vector<double> samples;
    std::vector<FrequencyPoint> points;
    int q;
    Direction d;
  };
  std::vector<Cell> cells;
  std::uint64_t sub = 0;
  for (Direction d : {Direction::Horizontal, Direction::Vertical}) {
    for (int q : q_list) {
      auto pts = ray_points(d, r);
      MomentGridOptions mo;
      mo.workers = opt.workers;
      mo.direction = d;
      // Each fit gets its own path family.
      const std::uint64_t s = splitmix64_mix(opt.seed + 0x632be59bd9b4e019ULL * ++sub);
      cells.push_back({moment_samples(params, q, pts, n_paths, s, opt.M, mo), pts, q, d});
    }
  }

  auto gammas = [&](const std::vector<std::size_t>* idx, double& gh, double& gv) {
    std::vector<double> h, v;
    for (const auto& c : cells) {
      const std::size_t P = c.points.size();
      std::vector<double> s;
      std::span<const double> use = c.samples;
      if (idx) {
        s.resize(c.samples.size());
        for (std::size_t i = 0; i < n_paths; ++i) {
          std::copy_n(c.samples.begin() + std::ptrdiff_t((*idx)[i] * P), P,
                      s.begin() + std::ptrdiff_t(i * P));
        }
        use = s;
      }
      const auto g = summarize_samples(use, n_paths, c.points, c.q, c.d);
      const double gamma = -fit_decay(g, opt.fit).slope / c.q;
      (c.d == Direction::Horizontal ? h : v).push_back(gamma);
    }
    gh = median(h);
    gv = median(v);
  };

  FourierDimEstimate est;
  est.paths_per_fit = n_paths;
  gammas(nullptr, est.gamma_horizontal, est.gamma_vertical);
  est.estimate = std::min(est.gamma_horizontal, est.gamma_vertical);

  std::vector<double> boot;
  Generator gen(derive_stream(opt.seed, 0xb007));
  std::vector<std::size_t> idx(n_paths);
  for (std::size_t b = 0; b < opt.bootstrap; ++b) {
    for (auto& i : idx) i = gen.bounded(n_paths);
    double gh = 0.0, gv = 0.0;
    try {
      gammas(&idx, gh, gv);
    } catch (const InsufficientSignalError&) {
      continue;
    }
    boot.push_back(std::min(gh, gv));
  }
  if (boot.empty()) {
    est.ci_lo = est.ci_hi = est.estimate;
  } else {
    const double a = 0.5 * (1.0 - opt.confidence);
    est.ci_lo = quantile(boot, a);
    est.ci_hi = quantile(boot, 1.0 - a);
  }
  return est;
}

}  // namespace fgdim
