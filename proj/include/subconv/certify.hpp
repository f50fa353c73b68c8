#pragma once

// Exact null-space-property certification for small explicit matrices and
// Monte Carlo checks of the structural estimates behind subsampled random
// convolutions.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subconv/analysis.hpp"
#include "subconv/generators.hpp"
#include "subconv/measurement.hpp"
#include "subconv/types.hpp"

namespace subconv {

inline constexpr std::size_t kSupportEnumerationCap = 1'000'000;

/// Number of r-subsets of [n], saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t r);

struct TauSearch {
  double inf_value = 0.0;  // min over |S| = r of sigma_min(A_S)
  bool rank_deficient = false;
  std::vector<std::size_t> argmin_support;
  std::size_t supports_checked = 0;
};

/// inf_{x in V_r} ||Ax||_2 by enumerating every support of size r.
/// r > n is treated as r = n; r > rows gives 0 with rank_deficient set.
TauSearch brute_force_tau(const Matrix& a, std::size_t r,
                          std::size_t cap = kSupportEnumerationCap);

/// max_j ||A e_j||_2
double column_bound(const Matrix& a);

/// Right-hand side of the Hoelder-type lower bound
///   ||Ay||^2 >= tau^{-2}||y||^2 - (||y||_1 sum_j ||Ae_j||^2 |y_j| - tau^{-2}||y||_1^2)/(r-1).
double lm14_quadratic_lower_bound(const Matrix& a, const Vector& y, double tau, std::size_t r);

struct NspCertificate {
  std::size_t r = 0;
  double tau = 0.0;  // 1 / inf_{V_r} ||Ax||_2
  double m_bound = 0.0;  // max column norm M
  double nu = 0.0;
  double c_nu = 0.0;  // nu^2 / (2 nu + 1)^2
  std::size_t s_max = 0;
  bool s_unbounded = false;  // M^2 tau^2 <= 1: every s is certified
  double cone_constant = 0.0;  // sqrt(2) tau
  std::map<std::string, double> q_constants;  // "2", "inf" -> m^{1/2-1/q} sqrt(2) tau
  double min_quadratic_slack = 0.0;  // over the validation draws
  std::size_t validation_draws = 0;
  bool valid = false;  // tau finite and the quadratic bound never violated

  /// Largest sparsity this certificate covers, capped at n.
  std::size_t certified_sparsity(std::size_t n) const;
  std::string to_json() const;
};

NspCertificate lm14_certify(const Matrix& a, std::size_t r, double nu, std::uint64_t seed = 1,
                            std::size_t validation_draws = 1000,
                            std::size_t cap = kSupportEnumerationCap);

/// Random unit vectors of T_{nu,s}, drawn by rejection through cone_membership.
std::vector<Vector> sample_cone(std::size_t n, double nu, std::size_t s, std::size_t count,
                                std::uint64_t seed);

struct SmallBallReport {
  std::vector<double> t_grid;
  std::vector<double> frequencies;  // Pr(||G xi||_2 <= t ||G||_HS)
  std::size_t trials = 0;
  double hs_norm = 0.0;
  double op_norm = 0.0;
  double effective_rank = 0.0;  // d_G = (||G||_HS / ||G||_op)^2
};

SmallBallReport small_ball_mc(const Matrix& gamma, Ensemble ensemble, const std::vector<double>& t_grid,
                              std::size_t trials, std::uint64_t seed);

struct StructureSample {
  double norm_ratio = 0.0;  // ||Gamma_v xi||_2 / sqrt(n)
  double topk_ratio = 0.0;  // ||Gamma_v xi||_[k] / sqrt(n)
  std::size_t regular_count = 0;
  bool regular = false;
};

struct StructureReport {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t samples = 0;
  std::size_t k = 0;  // ceil(theta n)
  double alpha = 0.0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> quantile_levels;
  std::vector<double> norm_quantiles;
  std::vector<double> topk_quantiles;
  double mean_sq_norm = 0.0;  // mean of ||Gamma_v xi||^2 / n
  double sq_norm_std_error = 0.0;
  double regularity_pass_rate = 0.0;
  std::vector<StructureSample> rows;

  std::string to_json() const;
  std::string to_csv() const;
};

/// Unit r-sparse v with uniform support and Gaussian entries.
Vector sample_sparse_unit(std::size_t n, std::size_t r, Rng& rng);

/// Samples Gamma_v xi over random v in V_r with a fresh xi per sample. The
/// first sample uses v = e_1 when force_e1 is set.
StructureReport structure_check(std::size_t n, std::size_t r, const HadamardTriple& triple,
                                Ensemble ensemble, std::size_t sample_count, std::uint64_t seed,
                                const SparsityParameters& params, double alpha = 0.5,
                                bool force_e1 = true);

/// Type-7 (linear interpolation) empirical quantile of unsorted data.
double empirical_quantile(std::vector<double> data, double level);

struct SelectorSumReport {
  double frequency = 0.0;  // fraction of trials with sum <= 5 delta n
  double mean_sum = 0.0;
  double bound = 0.0;  // 5 delta n
  std::size_t trials = 0;
};

/// sum_{j in Omega} log(en/j) for a 1-based coordinate index j.
double selector_log_sum(const SelectorMask& mask);

SelectorSumReport selector_log_sum_check(std::size_t n, double delta, std::size_t trials,
                                         std::uint64_t seed);

/// max_i ||P_Omega Gamma_{e_i} xi||_2 / sqrt(delta n).
double one_sparse_max_ratio(const HadamardTriple& triple, const Vector& xi, const SelectorMask& mask);

struct OneSparseReport {
  std::vector<double> ratios;  // one per trial
  double q50 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
  bool hypothesis_holds = true;  // delta >= c0 log(n)/n
};

OneSparseReport one_sparse_bound_check(std::size_t n, double delta, const HadamardTriple& triple,
                                       Ensemble ensemble, std::size_t trials, std::uint64_t seed,
                                       double c0 = 1.0);

struct HeadTail {
  Vector head;
  Vector tail;
  std::vector<std::size_t> support;  // indices of the m largest magnitudes
  double head_norm = 0.0;
  double tail_profile = 0.0;  // max_i y_i^* / sqrt(log(en/i))
};

HeadTail decompose_head_tail(const Vector& z, std::size_t m);

}  // namespace subconv
