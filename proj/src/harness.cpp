#include "subconv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "subconv/analysis.hpp"
#include "subconv/certify.hpp"
#include "subconv/rng.hpp"

namespace subconv {

namespace {

enum Stream : std::uint64_t { kGenerator = 0, kMask = 1, kSignal = 2, kNoise = 3 };

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return empirical_quantile(std::move(v), 0.5);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n == 0) throw InvalidArgument("config: n must be positive");
  if (s_grid.empty() || m_grid.empty()) throw InvalidArgument("config: grids must be non-empty");
  for (auto s : s_grid)
    if (s >= n) throw InvalidArgument("config: every s must be < n");
  for (auto m : m_grid)
    if (m == 0 || m > n) throw InvalidArgument("config: every m must be in [1, n]");
  if (trials == 0) throw InvalidArgument("config: trials must be positive");
  if (!(eta >= 0.0)) throw InvalidArgument("config: eta must be >= 0");
  if (!(success_threshold > 0.0)) throw InvalidArgument("config: success threshold must be positive");
  if (!(target_rate > 0.0 && target_rate < 1.0)) throw InvalidArgument("config: target_rate outside (0,1)");
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig cfg = solver;
  cfg.q = q;
  cfg.eta = eta;
  return cfg;
}

ExperimentConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig c;
  c.n = j.value("n", c.n);
  c.s_grid = j.value("s_grid", c.s_grid);
  c.m_grid = j.value("m_grid", c.m_grid);
  c.trials = j.value("trials", c.trials);
  if (j.contains("ensemble")) c.ensemble = parse_ensemble(j.at("ensemble").get<std::string>());
  if (j.contains("q")) {
    const auto& q = j.at("q");
    c.q = parse_constraint_norm(q.is_string() ? q.get<std::string>() : std::to_string(q.get<int>()));
  }
  c.eta = j.value("eta", c.eta);
  c.success_threshold = j.value("success_threshold", c.success_threshold);
  c.master_seed = j.value("seed", c.master_seed);
  c.output_path = j.value("output", c.output_path);
  c.solver.max_iters = j.value("max_iters", c.solver.max_iters);
  c.solver.tol = j.value("tol", c.solver.tol);
  c.solver.gap_tol = j.value("gap_tol", c.solver.gap_tol);
  c.solver.seed = j.value("solver_seed", c.solver.seed);
  c.target_rate = j.value("target_rate", c.target_rate);
  c.m_min = j.value("m_min", c.m_min);
  c.m_max = j.value("m_max", c.m_max);
  c.bound_nu = j.value("bound_nu", c.bound_nu);
  c.bound_tau = j.value("bound_tau", c.bound_tau);
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["s_grid"] = c.s_grid;
  j["m_grid"] = c.m_grid;
  j["trials"] = c.trials;
  j["ensemble"] = to_string(c.ensemble);
  j["q"] = to_string(c.q);
  j["eta"] = c.eta;
  j["success_threshold"] = c.success_threshold;
  j["seed"] = c.master_seed;
  j["output"] = c.output_path;
  j["max_iters"] = c.solver.max_iters;
  j["tol"] = c.solver.tol;
  j["gap_tol"] = c.solver.gap_tol;
  j["solver_seed"] = c.solver.seed;
  j["target_rate"] = c.target_rate;
  j["m_min"] = c.m_min;
  j["m_max"] = c.m_max;
  j["bound_nu"] = c.bound_nu;
  j["bound_tau"] = c.bound_tau;
  return j.dump(2);
}

Vector sample_noise(std::size_t m, double eta, ConstraintNorm q, Rng& rng) {
  Vector e = Vector::Zero(m);
  if (eta == 0.0 || m == 0) return e;
  if (q == ConstraintNorm::l2) {
    e = sample(Ensemble::gaussian, m, rng);
    while (e.norm() == 0.0) e = sample(Ensemble::gaussian, m, rng);
    return e * (eta / e.norm());
  }
  // Uniform on the surface of the cube: uniform face, uniform point on it.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) e[i] = eta * unit(rng);
  const std::size_t face = static_cast<std::size_t>(rng() % m);
  e[face] = (rng() >> 63) ? eta : -eta;
  return e;
}

namespace {

struct Instance {
  PartialCirculantOperator b;
  Vector x;
};

Instance draw_instance(std::size_t n, std::size_t m, std::size_t s, Ensemble ensemble, std::uint64_t seed) {
  Rng gen_rng(derive_seed(seed, kGenerator));
  Vector xi = sample(ensemble, n, gen_rng);
  SelectorMask mask = make_selector_mask(n, static_cast<double>(m) / static_cast<double>(n), derive_seed(seed, kMask));
  Vector x = Vector::Zero(n);
  if (s > 0) {
    Rng sig_rng(derive_seed(seed, kSignal));
    x = sample_sparse_unit(n, s, sig_rng);
  }
  return Instance{PartialCirculantOperator(CirculantOperator(std::move(xi)), std::move(mask)), std::move(x)};
}

}  // namespace

TrialRecord run_trial(std::size_t n, std::size_t m, std::size_t s, Ensemble ensemble, ConstraintNorm q,
                      double eta, std::uint64_t seed, const ExperimentConfig& config) {
  if (n == 0 || m == 0 || m > n || s > n) throw InvalidArgument("run_trial: invalid dimensions");
  TrialRecord rec;
  rec.n = n;
  rec.m = m;
  rec.s = s;
  rec.seed = seed;

  const Instance inst = draw_instance(n, m, s, ensemble, seed);
  rec.realized_m = inst.b.rows();
  Rng noise_rng(derive_seed(seed, kNoise));
  const Vector y = inst.b.apply(inst.x) + sample_noise(inst.b.rows(), eta, q, noise_rng);

  SolverConfig cfg = config.solver_config();
  cfg.q = q;
  cfg.eta = eta;
  const RecoveryResult result = solve_bpdn(make_operator(inst.b), y, cfg);
  rec.iterations = result.iterations;
  rec.status = result.status;

  const Vector diff = inst.x - result.x_sharp;
  rec.err_l1 = diff.lpNorm<1>();
  rec.err_l2 = diff.norm();
  const double x_l1 = inst.x.lpNorm<1>();
  const double x_l2 = inst.x.norm();
  rec.rel_l1 = x_l1 > 0 ? rec.err_l1 / x_l1 : rec.err_l1;
  rec.rel_l2 = x_l2 > 0 ? rec.err_l2 / x_l2 : rec.err_l2;
  rec.success = result.status == SolveStatus::converged && rec.rel_l2 <= config.success_threshold;

  const ErrorBounds bounds = predicted_error_bounds(config.bound_nu, normalized_tau(config.bound_tau, m, q),
                                                    std::max<std::size_t>(s, 1), eta, 0.0);
  rec.bound_l1 = bounds.l1;
  rec.bound_l2 = bounds.l2;
  return rec;
}

const PhaseCell& PhaseDiagram::at(std::size_t s, std::size_t m) const {
  for (const auto& c : cells)
    if (c.s == s && c.m == m) return c;
  throw InvalidArgument("PhaseDiagram::at: no such cell");
}

std::string PhaseDiagram::to_csv() const {
  std::ostringstream out;
  out << kPhaseCsvHeader << '\n';
  for (const auto& c : cells) {
    out << c.n << ',' << c.m << ',' << c.s << ',' << c.trials << ',' << c.successes << ','
        << format_double(c.median_rel_l2) << ',' << format_double(c.median_rel_l1) << ','
        << format_double(c.mean_iters) << ',' << c.seed << '\n';
  }
  return out.str();
}

namespace {

PhaseCell summarize(std::size_t n, std::size_t m, std::size_t s, std::uint64_t seed,
                    const std::vector<TrialRecord>& records) {
  PhaseCell cell;
  cell.n = n;
  cell.m = m;
  cell.s = s;
  cell.seed = seed;
  cell.trials = records.size();
  std::vector<double> rel_l2;
  std::vector<double> rel_l1;
  double iters = 0.0;
  for (const auto& r : records) {
    if (r.success) ++cell.successes;
    if (r.status == SolveStatus::converged) {
      rel_l2.push_back(r.rel_l2);
      rel_l1.push_back(r.rel_l1);
    }
    iters += static_cast<double>(r.iterations);
  }
  cell.median_rel_l2 = median(rel_l2);
  cell.median_rel_l1 = median(rel_l1);
  cell.mean_iters = records.empty() ? 0.0 : iters / static_cast<double>(records.size());
  return cell;
}

}  // namespace

PhaseCell run_cell(std::size_t m, std::size_t s, std::size_t trials, const ExperimentConfig& config,
                   std::uint64_t first_trial) {
  std::vector<TrialRecord> records(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < trials; ++t) {
    records[t] = run_trial(config.n, m, s, config.ensemble, config.q, config.eta,
                           derive_seed(config.master_seed, first_trial + t), config);
  }
  return summarize(config.n, m, s, config.master_seed, records);
}

PhaseDiagram run_phase_diagram(const ExperimentConfig& config) {
  config.validate();
  PhaseDiagram diagram;
  const std::size_t cells = config.s_grid.size() * config.m_grid.size();
  std::vector<TrialRecord> records(cells * config.trials);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < records.size(); ++k) {
    const std::size_t cell = k / config.trials;
    const std::size_t t = k % config.trials;
    const std::size_t s = config.s_grid[cell / config.m_grid.size()];
    const std::size_t m = config.m_grid[cell % config.m_grid.size()];
    records[k] = run_trial(config.n, m, s, config.ensemble, config.q, config.eta,
                           derive_seed(config.master_seed, t), config);
  }
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const std::size_t s = config.s_grid[cell / config.m_grid.size()];
    const std::size_t m = config.m_grid[cell % config.m_grid.size()];
    const std::vector<TrialRecord> slice(records.begin() + static_cast<std::ptrdiff_t>(cell * config.trials),
                                         records.begin() + static_cast<std::ptrdiff_t>((cell + 1) * config.trials));
    diagram.cells.push_back(summarize(config.n, m, s, config.master_seed, slice));
  }
  return diagram;
}

double MinMResult::scaled(std::size_t n) const {
  const double sd = static_cast<double>(s);
  return static_cast<double>(m_star) / (sd * std::log(std::numbers::e * static_cast<double>(n) / sd));
}

MinMResult estimate_min_m(std::size_t n, std::size_t s, double target_rate, const ExperimentConfig& config) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) throw InvalidArgument("estimate_min_m: target_rate outside (0,1)");
  if (s >= n) throw InvalidArgument("estimate_min_m: s must be < n");
  ExperimentConfig cfg = config;
  cfg.n = n;
  const std::size_t probe_trials = std::max<std::size_t>(1, config.trials / 2);
  std::size_t lo = config.m_min ? config.m_min : std::max<std::size_t>(1, s);
  std::size_t hi = config.m_max ? std::min(config.m_max, n) : n;
  if (lo > hi) throw InvalidArgument("estimate_min_m: empty search range");

  MinMResult result;
  result.s = s;
  auto probe = [&](std::size_t m) {
    const PhaseCell cell = run_cell(m, s, probe_trials, cfg);
    result.trace.push_back(MinMProbe{m, cell.trials, cell.successes});
    return cell.rate() >= target_rate;
  };

  if (!probe(hi)) {
    result.m_star = n;
    result.unreachable = true;
  } else if (probe(lo)) {
    result.m_star = lo;
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (probe(mid)) hi = mid;
      else lo = mid;
    }
    result.m_star = hi;
  }
  // Confirmation on trial streams disjoint from the probes.
  const PhaseCell confirm = run_cell(result.m_star, s, config.trials, cfg, 1u << 20);
  result.confirm_trials = confirm.trials;
  result.confirmed_rate = confirm.rate();
  return result;
}

std::string NoiseSweep::to_csv() const {
  std::ostringstream out;
  out << "eta,trials,converged,median_err_l2,median_err_l1,max_err_l2\n";
  for (const auto& p : points) {
    out << format_double(p.eta) << ',' << p.trials << ',' << p.converged << ',' << format_double(p.median_err_l2)
        << ',' << format_double(p.median_err_l1) << ',' << format_double(p.max_err_l2) << '\n';
  }
  return out.str();
}

NoiseSweep run_noise_sweep(std::size_t n, std::size_t m, std::size_t s, const std::vector<double>& eta_grid,
                           ConstraintNorm q, const ExperimentConfig& config) {
  if (eta_grid.empty()) throw InvalidArgument("run_noise_sweep: empty eta grid");
  for (double eta : eta_grid)
    if (!(eta >= 0.0)) throw InvalidArgument("run_noise_sweep: eta must be >= 0");
  const Instance inst = draw_instance(n, m, s, config.ensemble, derive_seed(config.master_seed, 0));
  const LinearOperator op = make_operator(inst.b);
  const Vector clean = inst.b.apply(inst.x);

  NoiseSweep sweep;
  sweep.signal_norm = inst.x.norm();
  for (std::size_t g = 0; g < eta_grid.size(); ++g) {
    const double eta = eta_grid[g];
    std::vector<double> err_l2(config.trials);
    std::vector<double> err_l1(config.trials);
    std::vector<char> converged(config.trials, 0);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < config.trials; ++t) {
      Rng rng(derive_seed(config.master_seed, 1 + g, t));
      const Vector y = clean + sample_noise(inst.b.rows(), eta, q, rng);
      SolverConfig cfg = config.solver_config();
      cfg.q = q;
      cfg.eta = eta;
      const RecoveryResult r = solve_bpdn(op, y, cfg);
      err_l2[t] = (r.x_sharp - inst.x).norm();
      err_l1[t] = (r.x_sharp - inst.x).lpNorm<1>();
      converged[t] = r.status == SolveStatus::converged;
    }
    NoisePoint point;
    point.eta = eta;
    point.trials = config.trials;
    point.converged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 1));
    point.median_err_l2 = median(err_l2);
    point.median_err_l1 = median(err_l1);
    point.max_err_l2 = *std::max_element(err_l2.begin(), err_l2.end());
    sweep.points.push_back(point);
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : sweep.points) {
    num += p.eta * p.median_err_l2;
    den += p.eta * p.eta;
  }
  sweep.slope = den > 0 ? num / den : 0.0;
  for (const auto& p : sweep.points) {
    if (p.eta > 0) sweep.envelope_slope = std::max(sweep.envelope_slope, p.max_err_l2 / p.eta);
    if (p.eta > 0 && sweep.slope > 0)
      sweep.max_slope_deviation =
          std::max(sweep.max_slope_deviation, std::abs(p.median_err_l2 / p.eta - sweep.slope) / sweep.slope);
  }
  return sweep;
}

QuantizedRecovery run_quantized_recovery(std::size_t n, std::size_t m, std::size_t s, double step,
                                         const ExperimentConfig& config) {
  if (!(step > 0.0)) throw InvalidArgument("run_quantized_recovery: step must be positive");
  const Instance inst = draw_instance(n, m, s, config.ensemble, derive_seed(config.master_seed, 0));
  const Vector y = (inst.b.apply(inst.x) / step).array().round().matrix() * step;
  SolverConfig cfg = config.solver_config();
  cfg.q = ConstraintNorm::linf;
  cfg.eta = step / 2.0;
  const RecoveryResult r = solve_bpdn(make_operator(inst.b), y, cfg);
  QuantizedRecovery out;
  out.step = step;
  out.status = r.status;
  out.l1_true = inst.x.lpNorm<1>();
  out.l1_recovered = r.objective;
  out.err_l2 = (r.x_sharp - inst.x).norm();
  out.residual_inf = r.constraint_residual;
  out.feasible = r.constraint_residual <= cfg.tol * std::max(1.0, y.lpNorm<Eigen::Infinity>());
  return out;
}

double decrease_p_value(std::size_t successes_a, std::size_t trials_a, std::size_t successes_b,
                        std::size_t trials_b) {
  if (successes_a > trials_a || successes_b > trials_b) throw InvalidArgument("decrease_p_value: successes > trials");
  // Conditional on the total K, successes_b is hypergeometric; sum its lower tail.
  const std::size_t total = successes_a + successes_b;
  const std::size_t pop = trials_a + trials_b;
  auto log_choose = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
  const double denom = log_choose(static_cast<double>(pop), static_cast<double>(total));
  const std::size_t k_min = total > trials_a ? total - trials_a : 0;
  double p = 0.0;
  for (std::size_t k = k_min; k <= successes_b; ++k) {
    p += std::exp(log_choose(static_cast<double>(trials_b), static_cast<double>(k)) +
                  log_choose(static_cast<double>(trials_a), static_cast<double>(total - k)) - denom);
  }
  return std::min(1.0, p);
}

namespace {

template <typename OuterKey, typename InnerKey>
MonotonicityReport scan(const PhaseDiagram& diagram, double level, OuterKey outer, InnerKey inner, bool increasing) {
  MonotonicityReport report;
  std::set<std::size_t> outers;
  for (const auto& c : diagram.cells) outers.insert(outer(c));
  for (std::size_t o : outers) {
    std::vector<const PhaseCell*> line;
    for (const auto& c : diagram.cells)
      if (outer(c) == o) line.push_back(&c);
    std::sort(line.begin(), line.end(), [&](const PhaseCell* a, const PhaseCell* b) { return inner(*a) < inner(*b); });
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      // "b" is the cell expected to do at least as well.
      const PhaseCell& a = increasing ? *line[i] : *line[i + 1];
      const PhaseCell& b = increasing ? *line[i + 1] : *line[i];
      const double p = decrease_p_value(a.successes, a.trials, b.successes, b.trials);
      ++report.pairs;
      report.min_p_value = std::min(report.min_p_value, p);
      if (p < level) ++report.violations;
    }
  }
  return report;
}

}  // namespace

MonotonicityReport check_monotone_in_m(const PhaseDiagram& diagram, double level) {
  return scan(diagram, level, [](const PhaseCell& c) { return c.s; }, [](const PhaseCell& c) { return c.m; }, true);
}

MonotonicityReport check_monotone_in_s(const PhaseDiagram& diagram, double level) {
  return scan(diagram, level, [](const PhaseCell& c) { return c.m; }, [](const PhaseCell& c) { return c.s; }, false);
}

}  // namespace subconv
