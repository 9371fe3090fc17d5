#pragma once

// Reproducible random streams. A stream is keyed by (seed, stream_id); the id
// of path k under a run seed is derived with a split-mix style avalanche so
// that paths can be generated in any order or on any number of workers.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Uniforms, normals and exponentials are computed here rather than
// with <random> distributions, whose algorithms are implementation-defined.

#include <cstdint>
#include <random>

namespace fgdim {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  /// Provenance only; not part of the generator key.
  std::uint64_t path_index = 0;

  bool operator==(const RngStream&) const = default;
};

/// The splitmix64 finalizer: a bijection on 64-bit words.
std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;

/// stream_id = mix(seed + 0x9e3779b97f4a7c15 * (path_index + 1)). Injective in
/// path_index for a fixed seed. Frozen: changing it changes every result.
RngStream derive_stream(std::uint64_t seed, std::uint64_t path_index) noexcept;

class Generator {
 public:
  explicit Generator(const RngStream& stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0,1) with 53 random bits.
  double uniform();
  /// Standard normal by the Box-Muller transform (pairs are cached).
  double normal();
  /// Exp(1).
  double exponential();
  /// Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t bounded(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fgdim
