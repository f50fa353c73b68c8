#pragma once

// Monte Carlo recovery experiments: single trials, phase diagrams over (s, m),
// minimal-m search by bisection and noise sweeps.
//
// Trial t of any cell draws its generator, selector uniforms and noise from
// streams derived from (master seed, t) alone, so cells that differ only in m
// see the same generator and nested masks.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "subconv/generators.hpp"
#include "subconv/measurement.hpp"
#include "subconv/solver.hpp"

namespace subconv {

struct ExperimentConfig {
  std::size_t n = 256;
  std::vector<std::size_t> s_grid{5};
  std::vector<std::size_t> m_grid{100};
  std::size_t trials = 20;
  Ensemble ensemble = Ensemble::gaussian;
  ConstraintNorm q = ConstraintNorm::l2;
  double eta = 0.0;
  double success_threshold = 1e-4;  // relative l2 error
  std::uint64_t master_seed = 1;
  std::string output_path;
  SolverConfig solver;  // q and eta are taken from the fields above

  // minimal-m search
  double target_rate = 0.5;
  std::size_t m_min = 0;  // 0 means max(1, s)
  std::size_t m_max = 0;  // 0 means n

  // constants for the predicted error bounds (tau' in normalized form)
  double bound_nu = 0.5;
  double bound_tau = 1.0;

  void validate() const;
  SolverConfig solver_config() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

struct TrialRecord {
  std::size_t n = 0;
  std::size_t m = 0;           // target m = delta n
  std::size_t realized_m = 0;  // |Omega|
  std::size_t s = 0;
  std::uint64_t seed = 0;
  double err_l1 = 0.0;
  double err_l2 = 0.0;
  double rel_l1 = 0.0;
  double rel_l2 = 0.0;
  double bound_l1 = 0.0;  // D sqrt(s) eta / sqrt(m)
  double bound_l2 = 0.0;  // D eta / sqrt(m)
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::max_iters;
  bool success = false;
};

/// Noise uniform on the lq sphere of radius eta (zero when eta = 0).
Vector sample_noise(std::size_t m, double eta, ConstraintNorm q, Rng& rng);

/// One recovery experiment. Solver failures are recorded, never thrown.
TrialRecord run_trial(std::size_t n, std::size_t m, std::size_t s, Ensemble ensemble, ConstraintNorm q,
                      double eta, std::uint64_t seed, const ExperimentConfig& config);

struct PhaseCell {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t s = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double median_rel_l2 = 0.0;  // over converged trials, NaN if none
  double median_rel_l1 = 0.0;
  double mean_iters = 0.0;
  std::uint64_t seed = 0;

  double rate() const { return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0; }
};

struct PhaseDiagram {
  std::vector<PhaseCell> cells;  // s-major, m-minor

  const PhaseCell& at(std::size_t s, std::size_t m) const;
  std::string to_csv() const;
};

inline constexpr const char* kPhaseCsvHeader = "n,m,s,trials,successes,median_rel_l2,median_rel_l1,mean_iters,seed";

/// Runs `trials` trials (stream indices first_trial, first_trial+1, ...) of one cell.
PhaseCell run_cell(std::size_t m, std::size_t s, std::size_t trials, const ExperimentConfig& config,
                   std::uint64_t first_trial = 0);

PhaseDiagram run_phase_diagram(const ExperimentConfig& config);

struct MinMProbe {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
};

struct MinMResult {
  std::size_t s = 0;
  std::size_t m_star = 0;
  bool unreachable = false;  // target not met even at m_max
  double confirmed_rate = 0.0;
  std::size_t confirm_trials = 0;
  std::vector<MinMProbe> trace;

  /// m* / (s log(en/s))
  double scaled(std::size_t n) const;
};

/// Bisection for the smallest m whose success rate reaches target_rate. Probes
/// use half of config.trials; the returned m* is re-run with the full count.
MinMResult estimate_min_m(std::size_t n, std::size_t s, double target_rate, const ExperimentConfig& config);

struct NoisePoint {
  double eta = 0.0;
  std::size_t trials = 0;
  std::size_t converged = 0;
  double median_err_l2 = 0.0;
  double median_err_l1 = 0.0;
  double max_err_l2 = 0.0;
};

struct NoiseSweep {
  std::vector<NoisePoint> points;
  double slope = 0.0;           // least squares fit of median_err_l2 = slope * eta
  double max_slope_deviation = 0.0;  // max over eta > 0 of |err/eta - slope| / slope
  double envelope_slope = 0.0;  // max over eta > 0 of max_err_l2 / eta
  double signal_norm = 0.0;

  std::string to_csv() const;
};

/// Fixed (xi, Omega, x); fresh noise per trial at every eta.
NoiseSweep run_noise_sweep(std::size_t n, std::size_t m, std::size_t s, const std::vector<double>& eta_grid,
                           ConstraintNorm q, const ExperimentConfig& config);

struct QuantizedRecovery {
  double step = 0.0;
  double l1_true = 0.0;
  double l1_recovered = 0.0;
  double err_l2 = 0.0;
  double residual_inf = 0.0;  // ||B x_sharp - y||_inf - step/2
  bool feasible = false;
  SolveStatus status = SolveStatus::max_iters;
};

/// y = step * round(Bx / step), decoded with the l_inf constraint at eta = step/2.
QuantizedRecovery run_quantized_recovery(std::size_t n, std::size_t m, std::size_t s, double step,
                                         const ExperimentConfig& config);

/// One-sided p-value for "the success rate at the second cell is lower than at
/// the first" (Fisher's exact test for two binomial proportions).
double decrease_p_value(std::size_t successes_a, std::size_t trials_a, std::size_t successes_b,
                        std::size_t trials_b);

struct MonotonicityReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double min_p_value = 1.0;
};

/// Success non-decreasing in m for every s (adjacent m pairs).
MonotonicityReport check_monotone_in_m(const PhaseDiagram& diagram, double level = 0.01);
/// Success non-increasing in s for every m (adjacent s pairs).
MonotonicityReport check_monotone_in_s(const PhaseDiagram& diagram, double level = 0.01);

}  // namespace subconv
