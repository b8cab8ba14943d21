#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gglr/types.hpp"

namespace gglr {

/// Seeded generator with a pinned algorithm so synthetic data is portable:
/// the engine is the standard 64-bit Mersenne Twister (mt19937_64),
/// uniform() takes the top 53 bits of one draw and scales by 2^-53, and
/// normal() is Box-Muller on two uniforms (u1 = 1 - uniform(), u2 =
/// uniform(), returning r cos(2 pi u2) then r sin(2 pi u2)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  // Integer in [0, n).
  Index below(Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// x + sigma * N(0, 1) per entry.
Vector add_gaussian_noise(const Vector& x, double sigma, Rng& rng);

/// 0/1 flags, 1 = observed. Exactly round(missing_fraction * n) entries are
/// missing, chosen by a partial Fisher-Yates shuffle.
std::vector<char> sample_mask(Index n, double missing_fraction, Rng& rng);

}  // namespace gglr
