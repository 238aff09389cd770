#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace codec {

// Seedable generator with a portable normal sampler. std::normal_distribution
// is implementation-defined, so Gaussian draws use the Marsaglia polar method
// over 53-bit uniforms from mt19937_64, which is bit-reproducible everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer over (seed, salt); used to derive independent streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// FNV-1a, 64 bit.
std::uint64_t hash_text(std::string_view text);

}  // namespace codec
