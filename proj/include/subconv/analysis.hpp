#pragma once

// Rearrangement norms, sparsity functionals, cone membership, coordinate
// regularity, the sparsity-regime parameters and greedy separated nets.

#include <cstddef>
#include <string>
#include <vector>

#include "subconv/measurement.hpp"
#include "subconv/types.hpp"

namespace subconv {

/// Indices sorted by decreasing |x_i|; ties keep the original order.
std::vector<std::size_t> magnitude_order(const Vector& x);

/// (x_1^*, ..., x_n^*): the magnitudes |x_i| in non-increasing order.
Vector nonincreasing_rearrangement(const Vector& x);

/// ||x||_[k] = l2 norm of the k largest-magnitude coordinates, 1 <= k <= n.
double topk_norm(const Vector& x, std::size_t k);

/// sigma_s(x)_1 = sum_{i > s} x_i^*.
double best_s_term_error(const Vector& x, std::size_t s);

/// v in T_{nu,s}: ||v_S||_2 >= nu/sqrt(s) ||v_{S^c}||_1 for some |S| = s.
/// Decided at S = the s largest-magnitude coordinates, which maximizes the
/// left side and minimizes the right side simultaneously.
bool cone_membership(const Vector& v, double nu, std::size_t s);

struct RegularityResult {
  bool regular = false;
  std::size_t count = 0;    // |{i : |x_i| >= ||x||_2 alpha / sqrt(n)}|
  bool degenerate = false;  // x == 0
};

RegularityResult regularity_check(const Vector& x, double alpha, double theta);

/// Unspecified constants of the theta formula.
struct ThetaConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
};

enum class Regime { low_sparsity, high_sparsity };
const char* to_string(Regime r);

struct SparsityParameters {
  std::size_t n = 0;
  std::size_t r = 0;
  double kappa4 = 1.0;
  double rho = 0.0;
  double s0 = 0.0;  // log2(kappa4 n / r)
  double s1 = 0.0;  // log2(rho r log(en/r))
  double alpha_r = 1.0;
  double theta = 1.0;
  Regime regime = Regime::low_sparsity;
  ThetaConstants theta_constants;
  /// r exceeds c4 n / log^4 n, outside the range covered by the theta formula.
  bool beyond_theta_range = false;

  std::string to_json() const;
};

SparsityParameters compute_parameters(std::size_t n, std::size_t r, double kappa4 = 1.0,
                                      ThetaConstants constants = {});

enum class NetMetric {
  euclidean,
  /// d(x, y) = sqrt(n) ||W (x - y)||_inf, the operator norm of Gamma_{x-y}
  /// for unitary U and O.
  scaled_infinity,
};

/// Greedy maximal eps-separated subset. A point is kept iff its distance to
/// every previously kept point is >= eps. Returns indices into `points`.
std::vector<std::size_t> greedy_separated_net(const std::vector<Vector>& points, double eps,
                                              NetMetric metric = NetMetric::euclidean,
                                              const HadamardTypeMatrix* w = nullptr);

double net_distance(const Vector& a, const Vector& b, NetMetric metric,
                    const HadamardTypeMatrix* w = nullptr);

/// ||a||_{psi_1^n} = max_j a_j^* / log(en/j), natural log, j 1-based.
double psi1n_norm(const Vector& a);

}  // namespace subconv
