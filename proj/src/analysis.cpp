#include "subconv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

namespace subconv {

std::vector<std::size_t> magnitude_order(const Vector& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
  return idx;
}

Vector nonincreasing_rearrangement(const Vector& x) {
  const auto idx = magnitude_order(x);
  Vector out(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = std::abs(x[idx[i]]);
  return out;
}

double topk_norm(const Vector& x, std::size_t k) {
  if (k < 1 || k > static_cast<std::size_t>(x.size())) throw InvalidArgument("topk_norm: k out of range");
  return nonincreasing_rearrangement(x).head(k).norm();
}

double best_s_term_error(const Vector& x, std::size_t s) {
  const std::size_t n = x.size();
  if (s >= n) return 0.0;
  return nonincreasing_rearrangement(x).tail(n - s).sum();
}

bool cone_membership(const Vector& v, double nu, std::size_t s) {
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("cone_membership: nu outside (0,1)");
  if (s < 1 || s > static_cast<std::size_t>(v.size())) throw InvalidArgument("cone_membership: s out of range");
  const Vector sorted = nonincreasing_rearrangement(v);
  const double head = sorted.head(s).norm();
  const double tail = sorted.tail(v.size() - s).sum();
  return head >= nu / std::sqrt(static_cast<double>(s)) * tail;
}

RegularityResult regularity_check(const Vector& x, double alpha, double theta) {
  if (!(alpha > 0.0)) throw InvalidArgument("regularity_check: alpha must be positive");
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("regularity_check: theta outside (0,1]");
  const std::size_t n = x.size();
  const double norm = x.norm();
  if (norm == 0.0) return RegularityResult{false, n, true};
  const double threshold = norm * alpha / std::sqrt(static_cast<double>(n));
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(x[i]) >= threshold) ++count;
  return RegularityResult{static_cast<double>(count) >= theta * static_cast<double>(n), count, false};
}

const char* to_string(Regime r) {
  return r == Regime::low_sparsity ? "low-sparsity" : "high-sparsity";
}

SparsityParameters compute_parameters(std::size_t n, std::size_t r, double kappa4,
                                      ThetaConstants constants) {
  if (r < 1 || 2 * r > n) throw InvalidArgument("compute_parameters: need 1 <= r <= n/2");
  if (!(kappa4 > 0.0)) throw InvalidArgument("compute_parameters: kappa4 must be positive");
  const double nd = static_cast<double>(n);
  const double rd = static_cast<double>(r);
  const double log_en_r = std::log(std::numbers::e * nd / rd);

  SparsityParameters p;
  p.n = n;
  p.r = r;
  p.kappa4 = kappa4;
  p.theta_constants = constants;
  p.rho = 10.0 * std::numbers::log2e * std::max(1.0, std::log(std::numbers::e * rd) / log_en_r);
  p.s0 = std::log2(kappa4 * nd / rd);
  p.s1 = std::log2(p.rho * rd * log_en_r);
  // log(2^{s1 - s0}) with the natural log
  p.alpha_r = std::max(1.0, (p.s1 - p.s0) * std::numbers::ln2);
  p.regime = p.s0 >= p.s1 ? Regime::low_sparsity : Regime::high_sparsity;

  const double c2 = constants.c2;
  const double low_limit = c2 * std::sqrt(kappa4 * nd / std::log(c2 * nd / kappa4));
  if (rd <= low_limit) {
    p.theta = constants.c1;
  } else {
    p.theta = constants.c3 / (p.alpha_r * p.alpha_r * std::log(std::numbers::e * p.alpha_r));
  }
  p.beyond_theta_range = rd > constants.c4 * nd / std::pow(std::log(nd), 4);
  return p;
}

std::string SparsityParameters::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["r"] = r;
  j["kappa4"] = kappa4;
  j["rho"] = rho;
  j["s0"] = s0;
  j["s1"] = s1;
  j["alpha_r"] = alpha_r;
  j["theta"] = theta;
  j["regime"] = to_string(regime);
  return j.dump(2);
}

double net_distance(const Vector& a, const Vector& b, NetMetric metric, const HadamardTypeMatrix* w) {
  require_same_size(a, b, "net_distance");
  if (metric == NetMetric::euclidean) return (a - b).norm();
  if (w == nullptr) throw InvalidArgument("net_distance: scaled_infinity metric needs W");
  const Vector diff = a - b;
  return std::sqrt(static_cast<double>(a.size())) * w->apply(diff.cast<Complex>()).cwiseAbs().maxCoeff();
}

std::vector<std::size_t> greedy_separated_net(const std::vector<Vector>& points, double eps,
                                              NetMetric metric, const HadamardTypeMatrix* w) {
  if (!(eps > 0.0)) throw InvalidArgument("greedy_separated_net: eps must be positive");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool separated = std::all_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return net_distance(points[i], points[k], metric, w) >= eps;
    });
    if (separated) kept.push_back(i);
  }
  return kept;
}

double psi1n_norm(const Vector& a) {
  const Vector sorted = nonincreasing_rearrangement(a);
  const double n = static_cast<double>(a.size());
  double best = 0.0;
  for (Eigen::Index j = 0; j < sorted.size(); ++j)
    best = std::max(best, sorted[j] / std::log(std::numbers::e * n / static_cast<double>(j + 1)));
  return best;
}

}  // namespace subconv
