#pragma once

// l1 minimization under an lq-ball data constraint (basis pursuit denoising)
//
//   min ||z||_1  subject to  ||Bz - y||_q <= eta,   q in {2, inf},
//
// solved by a primal-dual hybrid gradient iteration that only needs B and B^T.
// The primal step is soft thresholding, the dual step the Moreau complement of
// the projection onto the lq-ball of radius eta around y.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subconv/measurement.hpp"
#include "subconv/types.hpp"

namespace subconv {

/// Operator-only access to a linear map R^cols -> R^rows.
struct LinearOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> adjoint;
};

LinearOperator make_operator(const PartialCirculantOperator& b);
LinearOperator make_operator(const Matrix& a);

/// ||B||_{2->2} by power iteration on B^T B.
double estimate_operator_norm(const LinearOperator& b, std::size_t iterations = 50,
                              std::uint64_t seed = 0x5eed);

enum class ConstraintNorm { l2, linf };

const char* to_string(ConstraintNorm q);
ConstraintNorm parse_constraint_norm(const std::string& name);  // "2" | "inf"

/// ||v||_q for the constraint norm, and its dual norm ||v||_{q'}.
double constraint_norm(const Vector& v, ConstraintNorm q);
double dual_constraint_norm(const Vector& v, ConstraintNorm q);

struct SolverConfig {
  ConstraintNorm q = ConstraintNorm::l2;
  double eta = 0.0;
  std::size_t max_iters = 50000;
  /// certify_optimality calls z feasible when ||Bz - y||_q - eta <= tol * max(1, ||y||_q).
  /// The solver itself stops on the stricter tol * ||y||_q.
  double tol = 1e-8;
  /// Converged needs gap <= gap_tol * ||z||_1, which implies gap <= gap_tol * max(1, ||z||_1).
  double gap_tol = 1e-5;
  std::size_t power_iters = 50;
  std::uint64_t seed = 0x5eed;
  /// Explicit step sizes. When zero both are derived from the operator-norm
  /// estimate and primal_weight; when set, sigma * tau * ||B||^2 <= 1 is checked.
  double sigma = 0.0;
  double tau = 0.0;
  /// Ratio tau / sigma used with derived steps, in units of ||y||_2.
  double primal_weight = 1.0;
  std::size_t check_every = 20;
  /// Restart from the running average when the KKT error has decayed enough.
  bool adaptive_restarts = true;
  /// At each restart, rescale tau / sigma toward the ratio of primal to dual
  /// movement since the previous restart (tau * sigma is unchanged). Ignored
  /// when explicit steps are given.
  bool adaptive_primal_weight = true;
  /// Record the best-objective trace at every check.
  bool keep_history = false;
};

enum class SolveStatus { converged, max_iters, infeasible_degenerate };
const char* to_string(SolveStatus s);

struct RecoveryResult {
  Vector x_sharp;
  Vector dual;  // dual point behind the best lower bound (unscaled)
  std::size_t iterations = 0;
  double constraint_residual = 0.0;  // ||Bx - y||_q - eta
  double objective = 0.0;            // ||x||_1
  double gap_certificate = 0.0;      // objective - best dual lower bound
  SolveStatus status = SolveStatus::max_iters;
  double eta_used = 0.0;
  double operator_norm = 0.0;
  std::vector<double> objective_history;
};

RecoveryResult solve_bpdn(const LinearOperator& b, const Vector& y, const SolverConfig& config);

struct GapReport {
  double primal_objective = 0.0;
  double dual_lower_bound = 0.0;
  double gap = 0.0;
  double dual_scale = 1.0;  // factor applied to make the dual iterate feasible
  bool feasible = false;    // primal point satisfies the constraint within tol
  bool within_tolerance = false;
};

/// Recomputes from scratch the dual lower bound induced by `dual` (scaled into
/// {p : ||B^T p||_inf <= 1}) and the gap ||x||_1 - bound.
GapReport certify_optimality(const LinearOperator& b, const Vector& y, const SolverConfig& config,
                             const Vector& x, const Vector& dual);
GapReport certify_optimality(const LinearOperator& b, const Vector& y, const SolverConfig& config,
                             const RecoveryResult& result);

/// Dual objective -<p, y> - eta ||p||_{q'}; a lower bound on the optimum when
/// ||B^T p||_inf <= 1.
double dual_objective(const Vector& p, const Vector& y, double eta, ConstraintNorm q);

struct ErrorBounds {
  double c = 0.0;
  double d = 0.0;
  double l1 = 0.0;  // C sigma_s + D sqrt(s) eta
  double l2 = 0.0;  // C sigma_s / sqrt(s) + D eta
};

/// Stable and robust recovery bounds from the lq-robust null space property
/// with constants (nu, tau): C = (1+nu)^2/(1-nu), D = (3+nu) tau/(1-nu).
ErrorBounds predicted_error_bounds(double nu, double tau, std::size_t s, double eta,
                                   double sigma_s);

/// tau' / m^{1/q}: the normalized robustness constant of a subsampled
/// convolution. Passing it as tau gives bounds that scale like eta / sqrt(m)
/// for q = 2.
double normalized_tau(double tau_prime, std::size_t m, ConstraintNorm q);

/// m^{1/2 - 1/q} sqrt(2) tau: the lq constant obtained from an l2 cone bound
/// 1/(sqrt(2) tau).
double lq_tau_from_l2(double tau, std::size_t m, ConstraintNorm q);

}  // namespace subconv
