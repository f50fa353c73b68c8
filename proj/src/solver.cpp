#include "subconv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "subconv/rng.hpp"

namespace subconv {

LinearOperator make_operator(const PartialCirculantOperator& b) {
  auto shared = std::make_shared<const PartialCirculantOperator>(b);
  return LinearOperator{b.rows(), b.cols(),
                        [shared](const Vector& x) { return shared->apply(x); },
                        [shared](const Vector& y) { return shared->adjoint(y); }};
}

LinearOperator make_operator(const Matrix& a) {
  auto shared = std::make_shared<const Matrix>(a);
  return LinearOperator{static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()),
                        [shared](const Vector& x) -> Vector { return (*shared) * x; },
                        [shared](const Vector& y) -> Vector { return shared->transpose() * y; }};
}

double estimate_operator_norm(const LinearOperator& b, std::size_t iterations, std::uint64_t seed) {
  if (b.cols == 0 || b.rows == 0) return 0.0;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(b.cols);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();
  double estimate = 0.0;
  for (std::size_t k = 0; k < std::max<std::size_t>(iterations, 1); ++k) {
    const Vector w = b.adjoint(b.apply(v));
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = std::sqrt(norm);
    v = w / norm;
  }
  return estimate;
}

const char* to_string(ConstraintNorm q) { return q == ConstraintNorm::l2 ? "2" : "inf"; }

ConstraintNorm parse_constraint_norm(const std::string& name) {
  if (name == "2" || name == "l2") return ConstraintNorm::l2;
  if (name == "inf" || name == "linf" || name == "infinity") return ConstraintNorm::linf;
  throw InvalidArgument("unknown constraint norm '" + name + "' (expected 2 or inf)");
}

double constraint_norm(const Vector& v, ConstraintNorm q) {
  if (v.size() == 0) return 0.0;
  return q == ConstraintNorm::l2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

double dual_constraint_norm(const Vector& v, ConstraintNorm q) {
  if (v.size() == 0) return 0.0;
  return q == ConstraintNorm::l2 ? v.norm() : v.lpNorm<1>();
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max-iters";
    case SolveStatus::infeasible_degenerate: return "infeasible-degenerate";
  }
  return "unknown";
}

double dual_objective(const Vector& p, const Vector& y, double eta, ConstraintNorm q) {
  return -p.dot(y) - eta * dual_constraint_norm(p, q);
}

namespace {

double effective_eta(const SolverConfig& config, const Vector& y) {
  if (config.eta > 0.0) return config.eta;
  return 1e-12 * y.norm();
}

double feasibility_tolerance(const SolverConfig& config, const Vector& y) {
  return config.tol * std::max(1.0, constraint_norm(y, config.q));
}

// Projection onto {u : ||u - y||_q <= eta}.
Vector project_ball(const Vector& u, const Vector& y, double eta, ConstraintNorm q) {
  if (q == ConstraintNorm::linf)
    return u.array().max(y.array() - eta).min(y.array() + eta).matrix();
  const Vector d = u - y;
  const double norm = d.norm();
  if (norm <= eta) return u;
  return y + d * (eta / norm);
}

Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

void validate(const LinearOperator& b, const Vector& y, const SolverConfig& config) {
  if (!b.apply || !b.adjoint) throw InvalidArgument("solve_bpdn: operator callbacks missing");
  if (static_cast<std::size_t>(y.size()) != b.rows) throw InvalidArgument("solve_bpdn: y has wrong length");
  if (!y.allFinite()) throw InvalidArgument("solve_bpdn: non-finite measurements");
  if (!(config.eta >= 0.0) || !std::isfinite(config.eta)) throw InvalidArgument("solve_bpdn: eta must be finite and >= 0");
  if (config.check_every == 0) throw InvalidArgument("solve_bpdn: check_every must be positive");
}

}  // namespace

RecoveryResult solve_bpdn(const LinearOperator& b, const Vector& y, const SolverConfig& config) {
  validate(b, y, config);
  const std::size_t n = b.cols;
  RecoveryResult result;
  result.x_sharp = Vector::Zero(n);
  result.dual = Vector::Zero(b.rows);
  const double eta = effective_eta(config, y);
  result.eta_used = eta;

  if (b.rows == 0) {
    // No measurements: zero is the minimizer, but nothing is recovered.
    result.status = SolveStatus::infeasible_degenerate;
    result.constraint_residual = -eta;
    return result;
  }
  const double y_norm = constraint_norm(y, config.q);
  if (y_norm <= eta) {
    result.status = SolveStatus::converged;
    result.constraint_residual = y_norm - eta;
    return result;
  }

  const double op_norm = estimate_operator_norm(b, config.power_iters, config.seed);
  result.operator_norm = op_norm;
  if (op_norm == 0.0) throw InvalidArgument("solve_bpdn: zero operator");

  double sigma = config.sigma;
  double tau = config.tau;
  if (sigma > 0.0 || tau > 0.0) {
    if (!(sigma > 0.0 && tau > 0.0)) throw InvalidArgument("solve_bpdn: set both sigma and tau");
    if (sigma * tau * op_norm * op_norm > 1.0)
      throw InvalidArgument("solve_bpdn: step sizes violate sigma*tau*||B||^2 <= 1");
  } else {
    // Power iteration underestimates ||B||; keep a margin.
    // Measuring the weight in units of ||y||_2 makes the iterates covariant
    // under (y, eta) -> (c y, c eta).
    const double safe_norm = 1.05 * op_norm;
    const double w0 = config.primal_weight * y.norm();
    tau = w0 / safe_norm;
    sigma = 1.0 / (w0 * safe_norm);
  }

  const bool adapt_weight = config.adaptive_restarts && config.adaptive_primal_weight && config.sigma == 0.0;
  // Stopping uses purely relative thresholds, which imply the max(1, .) forms
  // reported by certify_optimality and keep the iteration scale covariant.
  const double feas_tol = config.tol * constraint_norm(y, config.q);
  Vector x = Vector::Zero(n);
  Vector p = Vector::Zero(b.rows);
  Vector bt_p = Vector::Zero(n);

  // Running averages since the last restart.
  Vector x_sum = Vector::Zero(n);
  Vector p_sum = Vector::Zero(b.rows);
  std::size_t since_restart = 0;
  Vector x_restart = x;
  Vector p_restart = p;
  double weight = tau / std::sqrt(tau * sigma);  // sqrt(tau / sigma)
  const double step = std::sqrt(tau * sigma);
  double kkt_at_restart = std::numeric_limits<double>::infinity();
  double kkt_previous = std::numeric_limits<double>::infinity();

  double best_objective = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  double best_lower = -std::numeric_limits<double>::infinity();
  Vector best_x = Vector::Zero(n);
  Vector best_dual = p;
  bool have_feasible = false;

  // Scores a candidate (x, p): records feasibility/objective/lower bound and
  // returns its KKT error.
  auto assess = [&](const Vector& cx, const Vector& cp, const Vector& cbt_p) {
    const double residual = constraint_norm(b.apply(cx) - y, config.q) - eta;
    const double objective = cx.lpNorm<1>();
    const double scale = std::max(1.0, cbt_p.lpNorm<Eigen::Infinity>());
    const double lower_unscaled = dual_objective(cp, y, eta, config.q);
    const double lower = dual_objective(cp / scale, y, eta, config.q);
    if (lower > best_lower) {
      best_lower = lower;
      best_dual = cp;
    }
    if (residual <= feas_tol && objective < best_objective) {
      best_objective = objective;
      best_residual = residual;
      best_x = cx;
      have_feasible = true;
    }
    double dual_res2 = 0.0;
    for (Eigen::Index i = 0; i < cx.size(); ++i) {
      const double g = -cbt_p[i];
      const double d = cx[i] > 0 ? g - 1.0 : (cx[i] < 0 ? g + 1.0 : std::max(0.0, std::abs(g) - 1.0));
      dual_res2 += d * d;
    }
    const double primal_res = std::max(0.0, residual);
    const double gap = objective - lower_unscaled;
    return std::sqrt(primal_res * primal_res + dual_res2 + gap * gap);
  };

  std::size_t iter = 0;
  while (iter < config.max_iters) {
    const Vector x_next = soft_threshold(x - tau * bt_p, tau);
    const Vector x_bar = 2.0 * x_next - x;
    const Vector w = p + sigma * b.apply(x_bar);
    p = w - sigma * project_ball(w / sigma, y, eta, config.q);
    bt_p = b.adjoint(p);
    x = x_next;
    x_sum += x;
    p_sum += p;
    ++since_restart;
    ++iter;

    if (iter % config.check_every != 0 && iter != config.max_iters) continue;

    double kkt = assess(x, p, bt_p);
    if (config.adaptive_restarts) {
      const Vector x_avg = x_sum / static_cast<double>(since_restart);
      const Vector p_avg = p_sum / static_cast<double>(since_restart);
      const Vector bt_p_avg = b.adjoint(p_avg);
      const double kkt_avg = assess(x_avg, p_avg, bt_p_avg);
      const bool use_avg = kkt_avg < kkt;
      const double candidate = std::min(kkt, kkt_avg);
      const bool restart = candidate <= 0.2 * kkt_at_restart ||
                           (candidate <= 0.8 * kkt_at_restart && candidate > kkt_previous) ||
                           since_restart >= 0.36 * static_cast<double>(iter);
      kkt_previous = candidate;
      if (restart) {
        if (use_avg) {
          x = x_avg;
          p = p_avg;
          bt_p = bt_p_avg;
        }
        if (adapt_weight) {
          // Balance primal and dual progress since the previous restart.
          const double dx = (x - x_restart).norm();
          const double dp = (p - p_restart).norm();
          if (dx > 0.0 && dp > 0.0) {
            weight = std::exp(0.5 * std::log(dx / dp) + 0.5 * std::log(weight));
            tau = step * weight;
            sigma = step / weight;
          }
          x_restart = x;
          p_restart = p;
        }
        kkt_at_restart = candidate;
        kkt_previous = std::numeric_limits<double>::infinity();
        x_sum.setZero();
        p_sum.setZero();
        since_restart = 0;
      }
      kkt = candidate;
    }
    if (config.keep_history && have_feasible) result.objective_history.push_back(best_objective);
    if (have_feasible && best_objective - best_lower <= config.gap_tol * best_objective) {
      result.status = SolveStatus::converged;
      break;
    }
  }

  result.iterations = iter;
  result.dual = best_dual;
  if (have_feasible) {
    result.x_sharp = best_x;
    result.objective = best_objective;
    result.constraint_residual = best_residual;
  } else {
    result.x_sharp = x;
    result.objective = x.lpNorm<1>();
    result.constraint_residual = constraint_norm(b.apply(x) - y, config.q) - eta;
  }
  result.gap_certificate = result.objective - best_lower;
  if (result.status != SolveStatus::converged) result.status = SolveStatus::max_iters;
  return result;
}

GapReport certify_optimality(const LinearOperator& b, const Vector& y, const SolverConfig& config,
                             const Vector& x, const Vector& dual) {
  GapReport report;
  const double eta = effective_eta(config, y);
  report.primal_objective = x.lpNorm<1>();
  if (b.rows == 0) {
    report.feasible = true;
    report.gap = report.primal_objective;
    report.within_tolerance = report.gap <= config.gap_tol * std::max(1.0, report.primal_objective);
    return report;
  }
  report.feasible = constraint_norm(b.apply(x) - y, config.q) - eta <= feasibility_tolerance(config, y);
  const Vector bt_p = b.adjoint(dual);
  report.dual_scale = std::max(1.0, bt_p.lpNorm<Eigen::Infinity>());
  report.dual_lower_bound = dual_objective(dual / report.dual_scale, y, eta, config.q);
  report.gap = report.primal_objective - report.dual_lower_bound;
  report.within_tolerance =
      report.feasible && report.gap <= config.gap_tol * std::max(1.0, report.primal_objective);
  return report;
}

GapReport certify_optimality(const LinearOperator& b, const Vector& y, const SolverConfig& config,
                             const RecoveryResult& result) {
  return certify_optimality(b, y, config, result.x_sharp, result.dual);
}

ErrorBounds predicted_error_bounds(double nu, double tau, std::size_t s, double eta, double sigma_s) {
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("predicted_error_bounds: nu outside (0,1)");
  if (!(tau > 0.0)) throw InvalidArgument("predicted_error_bounds: tau must be positive");
  if (s < 1) throw InvalidArgument("predicted_error_bounds: s must be >= 1");
  ErrorBounds bounds;
  bounds.c = (1.0 + nu) * (1.0 + nu) / (1.0 - nu);
  bounds.d = (3.0 + nu) / (1.0 - nu) * tau;
  const double root_s = std::sqrt(static_cast<double>(s));
  bounds.l1 = bounds.c * sigma_s + bounds.d * root_s * eta;
  bounds.l2 = bounds.c * sigma_s / root_s + bounds.d * eta;
  return bounds;
}

double normalized_tau(double tau_prime, std::size_t m, ConstraintNorm q) {
  if (m == 0) throw InvalidArgument("normalized_tau: m must be positive");
  return q == ConstraintNorm::l2 ? tau_prime / std::sqrt(static_cast<double>(m)) : tau_prime;
}

double lq_tau_from_l2(double tau, std::size_t m, ConstraintNorm q) {
  const double base = std::sqrt(2.0) * tau;
  return q == ConstraintNorm::l2 ? base : std::sqrt(static_cast<double>(m)) * base;
}

}  // namespace subconv
