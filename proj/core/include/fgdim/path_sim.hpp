#pragma once

// Sample paths of fBm and symmetric alpha-stable processes on the grid
// k/M, k = 0..M, of [0,1].

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "fgdim/process_core.hpp"
#include "fgdim/rng.hpp"

namespace fgdim {

inline constexpr std::size_t kMaxGridSize = std::size_t(1) << 20;
inline constexpr std::size_t kMaxDenseGridSize = std::size_t(1) << 10;

struct PathSample {
  /// X(0), X(1/M), ..., X(1); values[0] == 0.
  std::vector<double> values;
  ProcessParams params;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::uint64_t stream_id = 0;

  std::size_t M() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Throws DomainError unless M is a power of two in [2, 2^20].
void validate_grid(std::size_t M);

enum class FbmMethod { Auto, Circulant, Dense };

/// Exact-in-law fBm sampler for one (H, M). Circulant embedding of the
/// fractional Gaussian noise autocovariance by default; a dense Cholesky
/// factor of the increment covariance when requested, or when the embedding
/// has significantly negative eigenvalues and M <= 2^10.
///
/// Construction is not cheap; reuse one sampler for many paths. sample() is
/// const and safe to call concurrently.
class FbmSampler {
 public:
  FbmSampler(double H, std::size_t M, FbmMethod method = FbmMethod::Auto);
  ~FbmSampler();
  FbmSampler(FbmSampler&&) noexcept;
  FbmSampler& operator=(FbmSampler&&) noexcept;

  double hurst() const noexcept { return H_; }
  std::size_t grid() const noexcept { return M_; }
  FbmMethod method() const noexcept { return method_; }
  /// Number of slightly negative embedding eigenvalues clipped to zero.
  std::size_t clipped_eigenvalues() const noexcept { return clipped_; }
  double min_eigenvalue() const noexcept { return min_eig_; }

  PathSample sample(const RngStream& rng) const;
  /// Writes X(0..M) into `out` (size M+1).
  void sample_into(Generator& gen, std::span<double> out) const;

 private:
  struct Impl;
  double H_;
  std::size_t M_;
  FbmMethod method_;
  std::size_t clipped_ = 0;
  double min_eig_ = 0.0;
  std::unique_ptr<Impl> impl_;
};

/// Autocovariance of unit-spacing fractional Gaussian noise at lag k.
double fgn_autocovariance(double H, double k);

PathSample sample_fbm(double H, std::size_t M, const RngStream& rng);

/// Symmetric alpha-stable path with E exp(i xi X(t)) = exp(-t |xi|^alpha):
/// i.i.d. increments of scale (1/M)^{1/alpha} by the Chambers-Mallows-Stuck
/// transform. alpha = 2 gives Gaussian increments of variance 2/M.
PathSample sample_stable(double alpha, std::size_t M, const RngStream& rng);
void sample_stable_into(double alpha, Generator& gen, std::span<double> out);

/// One standard symmetric alpha-stable variate.
double stable_variate(double alpha, Generator& gen);

/// Dispatch on params.kind().
PathSample sample_path(const ProcessParams& params, std::size_t M, const RngStream& rng);

/// CSV with header path_index,k,t,X and 17 significant digits.
void write_paths_csv(std::ostream& os, std::span<const PathSample> paths);

}  // namespace fgdim
