#pragma once

// Fourier transforms of the graph and image measures of sampled paths,
// Monte Carlo moment grids E|mu_hat(xi)|^{2q}, and log-log decay fits.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgdim/path_sim.hpp"
#include "fgdim/process_core.hpp"

namespace fgdim {

struct FrequencyPoint {
  double xi1 = 0.0;
  double xi2 = 0.0;

  double norm() const;
  bool operator==(const FrequencyPoint&) const = default;
};

struct FtValue {
  std::complex<double> value;
  /// |xi2| is above the Riemann-sum validity gate for this grid.
  bool gate_warning = false;
};

inline constexpr double kDefaultGateDelta = 0.1;

/// M^{idx (1 - delta)} where idx is H for fBm and 1/alpha for stable paths.
double frequency_gate(const ProcessParams& params, std::size_t M,
                      double delta = kDefaultGateDelta);

/// (1/M) sum_{k<M} exp(-2 pi i (xi1 k/M + xi2 X(k/M))).
FtValue graph_ft(const PathSample& path, FrequencyPoint xi, double gate_delta = kDefaultGateDelta);
FtValue image_ft(const PathSample& path, double xi2, double gate_delta = kDefaultGateDelta);

/// The same sum on raw values X(0), ..., X(M) (the last value is unused).
std::complex<double> graph_ft_sum(std::span<const double> values, FrequencyPoint xi);

enum class Direction { Horizontal, Vertical, Diagonal, Custom };

std::string to_string(Direction d);
Direction parse_direction(const std::string& s);

/// count points from lo to hi, equally spaced in log.
std::vector<double> log_grid(double lo, double hi, std::size_t count);
/// Parses "log:<min>:<max>:<count>".
std::vector<double> parse_log_grid(const std::string& spec);
/// Horizontal (r, 1), vertical (0, r), diagonal (r, r).
std::vector<FrequencyPoint> ray_points(Direction d, std::span<const double> r);

struct MomentEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n_paths = 0;
};

struct MomentGrid {
  std::vector<FrequencyPoint> points;
  int q = 1;
  std::vector<MomentEstimate> estimates;
  Direction direction = Direction::Custom;
  bool gate_warning = false;
};

struct MomentGridOptions {
  std::size_t workers = 0;
  Direction direction = Direction::Custom;
  double gate_delta = kDefaultGateDelta;
};

inline constexpr std::size_t kMinMomentPaths = 100;
inline constexpr int kMaxMomentQ = 4;
inline constexpr std::size_t kMaxMomentPaths = 10'000'000;
inline constexpr std::size_t kMaxMomentCells = 100'000'000;

/// |graph_ft|^{2q} for every path (row) and point (column), row-major.
/// Path i uses derive_stream(seed, i).
std::vector<double> moment_samples(const ProcessParams& params, int q,
                                   std::span<const FrequencyPoint> points, std::size_t n_paths,
                                   std::uint64_t seed, std::size_t M,
                                   const MomentGridOptions& opt = {}, bool* gate_warning = nullptr);

/// Mean and standard error per point, reduced in path order.
MomentGrid moment_grid(const ProcessParams& params, int q, std::span<const FrequencyPoint> points,
                       std::size_t n_paths, std::uint64_t seed, std::size_t M,
                       const MomentGridOptions& opt = {});

MomentGrid summarize_samples(std::span<const double> samples, std::size_t n_paths,
                             std::vector<FrequencyPoint> points, int q, Direction d);

enum class Region { Horizontal, Vertical };

/// |xi1| >= |xi2| is horizontal (the diagonal included).
Region region_of(FrequencyPoint xi);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> fit_range{0.0, 0.0};
  std::size_t n_points = 0;
  bool weighted = true;
};

struct FitOptions {
  /// Points with the smallest |xi| dropped before fitting.
  std::size_t skip_smallest = 2;
  std::size_t min_points = 4;
};

/// Weighted least squares of log(mean) on log|xi| with weights
/// (mean/stderr)^2; unweighted when any stderr is zero.
DecayFit fit_decay(const MomentGrid& grid, const FitOptions& opt = {});

struct FourierDimOptions {
  std::size_t M = 4096;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  double r_min = 4.0;
  double r_max = 128.0;
  std::size_t n_freqs = 12;
  std::size_t bootstrap = 200;
  double confidence = 0.95;
  FitOptions fit;
};

struct FourierDimEstimate {
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Median over q of the fitted gamma per direction.
  double gamma_horizontal = 0.0;
  double gamma_vertical = 0.0;
  std::size_t paths_per_fit = 0;
};

/// Horizontal and vertical fits per q; gamma = -slope/q; the estimate is the
/// smaller of the two medians over q. The interval is a percentile bootstrap
/// over paths. `budget` caps the total of paths times frequency points.
FourierDimEstimate fourier_dim_lower(const ProcessParams& params, std::span<const int> q_list,
                                     std::size_t budget, const FourierDimOptions& opt = {});

}  // namespace fgdim
