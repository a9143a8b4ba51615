#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace darsan {

// Child seed derivation: SHA-256 over (base seed, label, a, b), truncated to
// 64 bits. Gives every concern / grid point / repetition an independent,
// reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t a = 0,
                          std::uint64_t b = 0);

// A seeded mt19937_64 with a portable uniform-[0,1) helper. The 53-bit
// conversion keeps uniform draws independent of library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i >= n ? n - 1 : i;
  }

  double normal(double mean, double stddev) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace darsan
