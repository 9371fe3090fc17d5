#include "fgdim/rng.hpp"

#include <cmath>
#include <numbers>

#include "fgdim/errors.hpp"

namespace fgdim {

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t path_index) noexcept {
  constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  return RngStream{seed, splitmix64_mix(seed + kGamma * (path_index + 1)), path_index};
}

Generator::Generator(const RngStream& s) {
  std::seed_seq seq{std::uint32_t(s.seed), std::uint32_t(s.seed >> 32),
                    std::uint32_t(s.stream_id), std::uint32_t(s.stream_id >> 32)};
  engine_.seed(seq);
}

double Generator::uniform() {
  return (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Generator::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Generator::exponential() { return -std::log(uniform()); }

std::uint64_t Generator::bounded(std::uint64_t n) {
  if (n == 0) throw PreconditionError("Generator::bounded: n must be positive");
  const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace fgdim
