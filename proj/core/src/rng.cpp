#include "gglr/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "gglr/error.hpp"

namespace gglr {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

Index Rng::below(Index n) {
  if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "cli-io", "empty range");
  const auto v = static_cast<Index>(uniform() * static_cast<double>(n));
  return v < n ? v : n - 1;
}

Vector add_gaussian_noise(const Vector& x, double sigma, Rng& rng) {
  Vector out = x;
  for (Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

std::vector<char> sample_mask(Index n, double missing_fraction, Rng& rng) {
  if (!(missing_fraction >= 0.0 && missing_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cli-io",
                "missing fraction must be in [0, 1]");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  const auto missing = static_cast<Index>(std::llround(missing_fraction * static_cast<double>(n)));
  std::vector<char> mask(static_cast<std::size_t>(n), 1);
  for (Index k = 0; k < missing; ++k) {
    const Index j = k + rng.below(n - k);
    std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
    mask[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = 0;
  }
  return mask;
}

}  // namespace gglr
