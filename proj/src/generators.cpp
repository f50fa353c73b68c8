#include "subconv/generators.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace subconv {

Ensemble parse_ensemble(std::string_view name) {
  if (name == "gaussian") return Ensemble::gaussian;
  if (name == "rademacher") return Ensemble::rademacher;
  if (name == "uniform") return Ensemble::uniform;
  throw InvalidArgument("unknown ensemble '" + std::string(name) + "'");
}

std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::rademacher: return "rademacher";
    case Ensemble::uniform: return "uniform";
  }
  return "unknown";
}

double subgaussian_constant_hint(Ensemble e) {
  switch (e) {
    // sup over p >= 1 of (E|X|^p)^{1/p} / sqrt(p), attained at p = 1
    case Ensemble::gaussian: return std::sqrt(2.0 / std::numbers::pi);
    case Ensemble::rademacher: return 1.0;
    case Ensemble::uniform: return std::sqrt(3.0) / 2.0;
  }
  return 1.0;
}

double draw(Ensemble e, Rng& rng) {
  switch (e) {
    case Ensemble::gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      return normal(rng);
    }
    case Ensemble::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
    case Ensemble::uniform: {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      return std::sqrt(3.0) * (2.0 * u - 1.0);
    }
  }
  return 0.0;
}

Vector sample(Ensemble e, std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("sample: n must be positive");
  Vector out(n);
  if (e == Ensemble::gaussian) {
    // one distribution object so the polar method's cached second draw is used
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = normal(rng);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = draw(e, rng);
  return out;
}

Vector sample(Ensemble e, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(e, n, rng);
}

MomentReport moment_growth_check(Ensemble e, int p_max, std::size_t trials, std::uint64_t seed,
                                 double l_bound) {
  if (p_max < 2 || p_max > 12 || p_max % 2 != 0)
    throw InvalidArgument("moment_growth_check: p_max must be even and in [2, 12]");
  if (trials == 0) throw InvalidArgument("moment_growth_check: trials must be positive");
  const std::size_t count = static_cast<std::size_t>(p_max / 2);
  std::vector<double> sums(count, 0.0);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const double x = e == Ensemble::gaussian ? normal(rng) : draw(e, rng);
    const double x2 = x * x;
    double power = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
      power *= x2;
      sums[k] += power;
    }
  }
  MomentReport report;
  report.l_bound = l_bound;
  for (std::size_t k = 0; k < count; ++k) {
    const int p = static_cast<int>(2 * (k + 1));
    const double root = std::pow(sums[k] / static_cast<double>(trials), 1.0 / p);
    report.p.push_back(p);
    report.moment_root.push_back(root);
    report.growth_ratio.push_back(root / std::sqrt(static_cast<double>(p)));
    if (report.growth_ratio.back() > l_bound) report.exceeded = true;
  }
  return report;
}

}  // namespace subconv
