#pragma once

// Isotropic subgaussian generators with independent coordinates.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "subconv/rng.hpp"
#include "subconv/types.hpp"

namespace subconv {

enum class Ensemble {
  gaussian,    // N(0, 1)
  rademacher,  // +-1 with equal probability
  uniform,     // U[-sqrt(3), sqrt(3)], variance 1
};

/// Parses "gaussian" | "rademacher" | "uniform".
Ensemble parse_ensemble(std::string_view name);
std::string to_string(Ensemble e);

/// Documented subgaussian constant for the coordinate law, in the moment form
/// (E|X|^p)^{1/p} <= L sqrt(p). Informational only; never enforced.
double subgaussian_constant_hint(Ensemble e);

double draw(Ensemble e, Rng& rng);
Vector sample(Ensemble e, std::size_t n, Rng& rng);
Vector sample(Ensemble e, std::size_t n, std::uint64_t seed);

struct MomentReport {
  std::vector<int> p;
  std::vector<double> moment_root;   // (E|X|^p)^{1/p}, empirical
  std::vector<double> growth_ratio;  // moment_root / sqrt(p)
  double l_bound = 0.0;
  bool exceeded = false;             // some growth_ratio > l_bound
};

/// Empirical moment growth for p = 2, 4, ..., p_max (p_max even, <= 12).
MomentReport moment_growth_check(Ensemble e, int p_max, std::size_t trials, std::uint64_t seed,
                                 double l_bound = 1.0);

}  // namespace subconv
