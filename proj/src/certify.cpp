#include "subconv/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "subconv/rng.hpp"

namespace subconv {

std::size_t binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    const std::size_t num = n - r + i;
    if (result > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    result = result * num / i;
  }
  return result;
}

namespace {

double smallest_singular_value(const Matrix& sub) {
  Eigen::JacobiSVD<Matrix> svd(sub);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace

TauSearch brute_force_tau(const Matrix& a, std::size_t r, std::size_t cap) {
  const std::size_t rows = a.rows();
  const std::size_t n = a.cols();
  if (r == 0) throw InvalidArgument("brute_force_tau: r must be positive");
  if (n == 0) throw InvalidArgument("brute_force_tau: empty matrix");
  r = std::min(r, n);
  TauSearch out;
  if (r > rows) {
    out.rank_deficient = true;
    out.inf_value = 0.0;
    return out;
  }
  if (binomial(n, r) > cap) throw InvalidArgument("brute_force_tau: support count exceeds enumeration cap");

  std::vector<std::size_t> support(r);
  std::iota(support.begin(), support.end(), std::size_t{0});
  Matrix sub(rows, r);
  out.inf_value = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t k = 0; k < r; ++k) sub.col(k) = a.col(support[k]);
    const double sv = smallest_singular_value(sub);
    ++out.supports_checked;
    if (sv < out.inf_value) {
      out.inf_value = sv;
      out.argmin_support = support;
    }
    // next combination in lexicographic order
    std::size_t i = r;
    while (i > 0 && support[i - 1] == n - r + i - 1) --i;
    if (i == 0) break;
    ++support[i - 1];
    for (std::size_t j = i; j < r; ++j) support[j] = support[j - 1] + 1;
  }
  return out;
}

double column_bound(const Matrix& a) {
  if (a.cols() == 0) return 0.0;
  return a.colwise().norm().maxCoeff();
}

double lm14_quadratic_lower_bound(const Matrix& a, const Vector& y, double tau, std::size_t r) {
  if (r < 2) throw InvalidArgument("lm14_quadratic_lower_bound: r must be >= 2");
  const Vector col_sq = a.colwise().squaredNorm().transpose();
  const double l1 = y.lpNorm<1>();
  const double inv_tau2 = 1.0 / (tau * tau);
  const double weighted = col_sq.dot(y.cwiseAbs());
  return inv_tau2 * y.squaredNorm() - (l1 * weighted - inv_tau2 * l1 * l1) / static_cast<double>(r - 1);
}

std::size_t NspCertificate::certified_sparsity(std::size_t n) const {
  return s_unbounded ? n : std::min(s_max, n);
}

std::string NspCertificate::to_json() const {
  nlohmann::ordered_json j;
  j["r"] = r;
  j["tau"] = tau;
  j["M"] = m_bound;
  j["nu"] = nu;
  j["c_nu"] = c_nu;
  if (s_unbounded) {
    j["s_max"] = "inf";
  } else {
    j["s_max"] = s_max;
  }
  j["cone_constant"] = cone_constant;
  j["q_constants"] = q_constants;
  j["min_quadratic_slack"] = min_quadratic_slack;
  j["validation_draws"] = validation_draws;
  j["valid"] = valid;
  return j.dump(2);
}

NspCertificate lm14_certify(const Matrix& a, std::size_t r, double nu, std::uint64_t seed,
                            std::size_t validation_draws, std::size_t cap) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("lm14_certify: nu outside (0,1]");
  if (r < 2) throw InvalidArgument("lm14_certify: r must be >= 2");
  const TauSearch search = brute_force_tau(a, r, cap);

  NspCertificate cert;
  cert.r = std::min<std::size_t>(r, a.cols());
  cert.nu = nu;
  cert.c_nu = nu * nu / ((2.0 * nu + 1.0) * (2.0 * nu + 1.0));
  cert.m_bound = column_bound(a);
  if (search.inf_value <= 0.0) {
    cert.tau = std::numeric_limits<double>::infinity();
    cert.valid = false;
    return cert;
  }
  cert.tau = 1.0 / search.inf_value;
  const double denom = cert.m_bound * cert.m_bound * cert.tau * cert.tau - 1.0;
  if (denom <= 0.0) {
    cert.s_unbounded = true;
  } else {
    cert.s_max = static_cast<std::size_t>(std::floor(cert.c_nu * static_cast<double>(cert.r - 1) / denom));
  }
  cert.cone_constant = std::sqrt(2.0) * cert.tau;
  const std::size_t m = a.rows();
  cert.q_constants["2"] = cert.cone_constant;
  cert.q_constants["inf"] = std::sqrt(static_cast<double>(m)) * cert.cone_constant;

  // The quadratic bound is a theorem given exact tau; a violation means a bug.
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = a.cols();
  double min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < validation_draws; ++t) {
    Vector y(n);
    // alternate dense and sparse draws
    const std::size_t support = (t % 2 == 0) ? n : 1 + static_cast<std::size_t>(rng() % std::min<std::size_t>(cert.r, n));
    y.setZero();
    for (std::size_t k = 0; k < support; ++k) y[rng() % n] = normal(rng);
    if (y.norm() == 0.0) y[0] = 1.0;
    y.normalize();
    const double slack = (a * y).squaredNorm() - lm14_quadratic_lower_bound(a, y, cert.tau, cert.r);
    min_slack = std::min(min_slack, slack);
  }
  cert.validation_draws = validation_draws;
  cert.min_quadratic_slack = validation_draws > 0 ? min_slack : 0.0;
  cert.valid = cert.min_quadratic_slack >= -1e-9;
  return cert;
}

std::vector<Vector> sample_cone(std::size_t n, double nu, std::size_t s, std::size_t count,
                                std::uint64_t seed) {
  if (s < 1 || s > n) throw InvalidArgument("sample_cone: s out of range");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(count);
  // Tail scale at which a Gaussian tail roughly reaches the cone boundary.
  const double boundary =
      n > s ? static_cast<double>(s) / (nu * std::sqrt(2.0 / std::numbers::pi) * static_cast<double>(n - s)) : 1.0;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * (count + 1)) throw std::runtime_error("sample_cone: rejection sampling stalled");
    Vector v = 2.0 * boundary * unit(rng) * sample(Ensemble::gaussian, n, rng);
    const Vector head = sample_sparse_unit(n, s, rng) * std::sqrt(static_cast<double>(s));
    v += head;
    if (v.norm() == 0.0) continue;
    if (!cone_membership(v, nu, s)) continue;
    out.push_back(v.normalized());
  }
  return out;
}

SmallBallReport small_ball_mc(const Matrix& gamma, Ensemble ensemble, const std::vector<double>& t_grid,
                              std::size_t trials, std::uint64_t seed) {
  if (gamma.size() == 0) throw InvalidArgument("small_ball_mc: empty matrix");
  if (trials < 1000) throw InvalidArgument("small_ball_mc: need at least 1000 trials");
  SmallBallReport report;
  report.t_grid = t_grid;
  report.trials = trials;
  report.hs_norm = gamma.norm();
  Eigen::JacobiSVD<Matrix> svd(gamma);
  report.op_norm = svd.singularValues()(0);
  report.effective_rank =
      report.op_norm > 0 ? (report.hs_norm / report.op_norm) * (report.hs_norm / report.op_norm) : 0.0;

  std::vector<double> norms(trials);
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    norms[t] = (gamma * sample(ensemble, gamma.cols(), rng)).norm();
  }
  for (double level : t_grid) {
    const double threshold = level * report.hs_norm;
    const auto hits = std::count_if(norms.begin(), norms.end(), [&](double v) { return v <= threshold; });
    report.frequencies.push_back(trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0);
  }
  return report;
}

Vector sample_sparse_unit(std::size_t n, std::size_t r, Rng& rng) {
  if (r < 1 || r > n) throw InvalidArgument("sample_sparse_unit: r out of range");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // partial Fisher-Yates
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng() % (n - k));
    std::swap(idx[k], idx[j]);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v = Vector::Zero(n);
  double norm2 = 0.0;
  while (norm2 == 0.0) {
    for (std::size_t k = 0; k < r; ++k) v[idx[k]] = normal(rng);
    norm2 = v.squaredNorm();
  }
  return v / std::sqrt(norm2);
}

double empirical_quantile(std::vector<double> data, double level) {
  if (data.empty()) throw InvalidArgument("empirical_quantile: no data");
  if (!(level >= 0.0 && level <= 1.0)) throw InvalidArgument("empirical_quantile: level outside [0,1]");
  std::sort(data.begin(), data.end());
  const double pos = level * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, data.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return data[lo] + frac * (data[hi] - data[lo]);
}

StructureReport structure_check(std::size_t n, std::size_t r, const HadamardTriple& triple,
                                Ensemble ensemble, std::size_t sample_count, std::uint64_t seed,
                                const SparsityParameters& params, double alpha, bool force_e1) {
  if (triple.size() != n) throw InvalidArgument("structure_check: triple dimension mismatch");
  if (r < 1 || 2 * r > n) throw InvalidArgument("structure_check: need 1 <= r <= n/2");
  if (sample_count == 0) throw InvalidArgument("structure_check: sample_count must be positive");

  StructureReport report;
  report.n = n;
  report.r = r;
  report.samples = sample_count;
  report.seed = seed;
  report.alpha = alpha;
  report.theta = std::clamp(params.theta, std::numeric_limits<double>::min(), 1.0);
  report.k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(report.theta * static_cast<double>(n))), 1, n);
  report.rows.resize(sample_count);
  const double root_n = std::sqrt(static_cast<double>(n));

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < sample_count; ++i) {
    Rng rng(derive_seed(seed, i));
    Vector v;
    if (force_e1 && i == 0) {
      v = Vector::Zero(n);
      v[0] = 1.0;
    } else {
      v = sample_sparse_unit(n, r, rng);
    }
    const Vector xi = sample(ensemble, n, rng);
    const ComplexVector t = GammaOperator(triple, v).apply_complex(xi.cast<Complex>());
    const Vector mag = t.cwiseAbs();
    StructureSample row;
    row.norm_ratio = mag.norm() / root_n;
    row.topk_ratio = topk_norm(mag, report.k) / root_n;
    const RegularityResult reg = regularity_check(mag, alpha, report.theta);
    row.regular_count = reg.count;
    row.regular = reg.regular;
    report.rows[i] = row;
  }

  std::vector<double> norms;
  std::vector<double> topks;
  double sum_sq = 0.0;
  double sum_sq2 = 0.0;
  std::size_t pass = 0;
  for (const auto& row : report.rows) {
    norms.push_back(row.norm_ratio);
    topks.push_back(row.topk_ratio);
    const double sq = row.norm_ratio * row.norm_ratio;
    sum_sq += sq;
    sum_sq2 += sq * sq;
    if (row.regular) ++pass;
  }
  const double count = static_cast<double>(sample_count);
  report.mean_sq_norm = sum_sq / count;
  const double var = sample_count > 1 ? (sum_sq2 - count * report.mean_sq_norm * report.mean_sq_norm) / (count - 1) : 0.0;
  report.sq_norm_std_error = std::sqrt(std::max(var, 0.0) / count);
  report.regularity_pass_rate = static_cast<double>(pass) / count;
  report.quantile_levels = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
  for (double level : report.quantile_levels) {
    report.norm_quantiles.push_back(empirical_quantile(norms, level));
    report.topk_quantiles.push_back(empirical_quantile(topks, level));
  }
  return report;
}

std::string StructureReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["r"] = r;
  j["samples"] = samples;
  j["k"] = k;
  j["alpha"] = alpha;
  j["theta"] = theta;
  j["seed"] = seed;
  j["quantile_levels"] = quantile_levels;
  j["norm_quantiles"] = norm_quantiles;
  j["topk_quantiles"] = topk_quantiles;
  j["mean_sq_norm"] = mean_sq_norm;
  j["sq_norm_std_error"] = sq_norm_std_error;
  j["regularity_pass_rate"] = regularity_pass_rate;
  return j.dump(2);
}

std::string StructureReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "sample,norm_ratio,topk_ratio,regular_count,regular\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << i << ',' << rows[i].norm_ratio << ',' << rows[i].topk_ratio << ',' << rows[i].regular_count
        << ',' << (rows[i].regular ? 1 : 0) << '\n';
  }
  return out.str();
}

double selector_log_sum(const SelectorMask& mask) {
  const double n = static_cast<double>(mask.n);
  double sum = 0.0;
  for (std::size_t j : mask.omega) sum += std::log(std::numbers::e * n / static_cast<double>(j + 1));
  return sum;
}

SelectorSumReport selector_log_sum_check(std::size_t n, double delta, std::size_t trials,
                                         std::uint64_t seed) {
  if (delta * static_cast<double>(n) < 1.0) throw InvalidArgument("selector_log_sum_check: need delta n >= 1");
  if (trials == 0) throw InvalidArgument("selector_log_sum_check: trials must be positive");
  SelectorSumReport report;
  report.trials = trials;
  report.bound = 5.0 * delta * static_cast<double>(n);
  std::vector<double> sums(trials);
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < trials; ++t)
    sums[t] = selector_log_sum(make_selector_mask(n, delta, derive_seed(seed, t)));
  std::size_t hits = 0;
  for (double s : sums) {
    report.mean_sum += s;
    if (s <= report.bound) ++hits;
  }
  report.mean_sum /= static_cast<double>(trials);
  report.frequency = static_cast<double>(hits) / static_cast<double>(trials);
  return report;
}

double one_sparse_max_ratio(const HadamardTriple& triple, const Vector& xi, const SelectorMask& mask) {
  const std::size_t n = triple.size();
  if (static_cast<std::size_t>(xi.size()) != n || mask.n != n)
    throw InvalidArgument("one_sparse_max_ratio: dimension mismatch");
  const double denom = std::sqrt(mask.delta * static_cast<double>(n));
  const ComplexVector z = xi.cast<Complex>();
  double best = 0.0;
  Vector e = Vector::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    e.setZero();
    e[i] = 1.0;
    const ComplexVector t = GammaOperator(triple, e).apply_complex(z);
    double acc = 0.0;
    for (std::size_t j : mask.omega) acc += std::norm(t[j]);
    best = std::max(best, std::sqrt(acc));
  }
  return best / denom;
}

OneSparseReport one_sparse_bound_check(std::size_t n, double delta, const HadamardTriple& triple,
                                       Ensemble ensemble, std::size_t trials, std::uint64_t seed,
                                       double c0) {
  if (trials == 0) throw InvalidArgument("one_sparse_bound_check: trials must be positive");
  OneSparseReport report;
  report.hypothesis_holds = delta >= c0 * std::log(static_cast<double>(n)) / static_cast<double>(n);
  report.ratios.resize(trials);
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    const Vector xi = sample(ensemble, n, rng);
    const SelectorMask mask = make_selector_mask(n, delta, rng());
    report.ratios[t] = one_sparse_max_ratio(triple, xi, mask);
  }
  report.q50 = empirical_quantile(report.ratios, 0.5);
  report.q99 = empirical_quantile(report.ratios, 0.99);
  report.max = *std::max_element(report.ratios.begin(), report.ratios.end());
  return report;
}

HeadTail decompose_head_tail(const Vector& z, std::size_t m) {
  const std::size_t n = z.size();
  if (m < 1 || m > n) throw InvalidArgument("decompose_head_tail: need 1 <= m <= n");
  const auto order = magnitude_order(z);
  HeadTail out;
  out.head = Vector::Zero(n);
  out.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  for (std::size_t i : out.support) out.head[i] = z[i];
  out.tail = z - out.head;
  out.head_norm = out.head.norm();
  const Vector sorted_tail = nonincreasing_rearrangement(out.tail);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    out.tail_profile = std::max(out.tail_profile,
                                sorted_tail[i] / std::sqrt(std::log(std::numbers::e * nd / static_cast<double>(i + 1))));
  return out;
}

}  // namespace subconv
