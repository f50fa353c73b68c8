#pragma once

#include <cstdint>
#include <random>

namespace subconv {

using Rng = std::mt19937_64;

/// Mixes a master seed with a stream index into an independent seed.
/// Every Monte Carlo trial draws from derive_seed(master, trial) so that
/// results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace subconv
