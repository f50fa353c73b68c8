// Command-line front end: recovery, Monte Carlo sweeps and certification.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subconv/analysis.hpp"
#include "subconv/certify.hpp"
#include "subconv/harness.hpp"
#include "subconv/io.hpp"
#include "subconv/measurement.hpp"
#include "subconv/solver.hpp"

using namespace subconv;

namespace {

struct SweepArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::size_t> trials;
  std::vector<std::size_t> s_grid;
  std::vector<std::size_t> m_grid;
  std::string ensemble;
  std::string q;
  std::optional<double> eta;
  std::string output;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("-c,--config", a.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed (overrides the config)");
  cmd->add_option("-n,--n", a.n, "signal dimension");
  cmd->add_option("--trials", a.trials, "trials per cell");
  cmd->add_option("--s", a.s_grid, "sparsity grid")->delimiter(',');
  cmd->add_option("--m", a.m_grid, "measurement grid")->delimiter(',');
  cmd->add_option("--ensemble", a.ensemble, "gaussian | rademacher | uniform");
  cmd->add_option("--q", a.q, "constraint norm: 2 | inf");
  cmd->add_option("--eta", a.eta, "noise level");
  cmd->add_option("-o,--output", a.output, "output file (stdout when empty)");
}

ExperimentConfig build_config(const SweepArgs& a) {
  ExperimentConfig c;
  if (!a.config_path.empty()) c = config_from_json(io::read_text(a.config_path));
  if (a.seed) c.master_seed = *a.seed;
  if (a.n) c.n = *a.n;
  if (a.trials) c.trials = *a.trials;
  if (!a.s_grid.empty()) c.s_grid = a.s_grid;
  if (!a.m_grid.empty()) c.m_grid = a.m_grid;
  if (!a.ensemble.empty()) c.ensemble = parse_ensemble(a.ensemble);
  if (!a.q.empty()) c.q = parse_constraint_norm(a.q);
  if (a.eta) c.eta = *a.eta;
  if (!a.output.empty()) c.output_path = a.output;
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) std::cout << text;
  else io::write_text(path, text);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

HadamardTriple parse_triple(const std::string& name, std::size_t n) {
  if (name == "fourier") return fourier_triple(n);
  if (name == "wht") return uniform_triple(n, HadamardKind::walsh_hadamard);
  if (name == "dct") return uniform_triple(n, HadamardKind::dct);
  throw InvalidArgument("unknown triple '" + name + "' (expected fourier | wht | dct)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery from subsampled random convolutions"};
  app.require_subcommand(1);

  // recover
  std::string xi_path, mask_path, y_path, x_out, rec_q = "2";
  double rec_eta = 0.0;
  SolverConfig rec_solver;
  auto* recover = app.add_subcommand("recover", "solve one BPDN instance read from files");
  recover->add_option("--xi", xi_path, "generator vector (binary)")->required()->check(CLI::ExistingFile);
  recover->add_option("--mask", mask_path, "selector mask (JSON)")->required()->check(CLI::ExistingFile);
  recover->add_option("--y", y_path, "measurements (binary)")->required()->check(CLI::ExistingFile);
  recover->add_option("--q", rec_q, "constraint norm: 2 | inf");
  recover->add_option("--eta", rec_eta, "noise level")->check(CLI::NonNegativeNumber);
  recover->add_option("--max-iters", rec_solver.max_iters);
  recover->add_option("--tol", rec_solver.tol);
  recover->add_option("--gap-tol", rec_solver.gap_tol);
  recover->add_option("--seed", rec_solver.seed, "power-iteration seed");
  recover->add_option("-o,--output", x_out, "write the recovered vector (binary)");

  // phase-diagram
  SweepArgs pd;
  auto* phase = app.add_subcommand("phase-diagram", "success-rate grid over (s, m) as CSV");
  add_sweep_options(phase, pd);

  // min-m
  SweepArgs mm;
  double target = 0.5;
  std::optional<std::size_t> m_lo, m_hi;
  auto* minm = app.add_subcommand("min-m", "bisection for the smallest m reaching a success rate");
  add_sweep_options(minm, mm);
  minm->add_option("--target", target, "target success rate in (0,1)");
  minm->add_option("--m-min", m_lo);
  minm->add_option("--m-max", m_hi);

  // noise-sweep
  SweepArgs ns;
  std::vector<double> eta_grid;
  bool with_quantized = false;
  auto* noise = app.add_subcommand("noise-sweep", "median error against noise level on a fixed instance");
  add_sweep_options(noise, ns);
  noise->add_option("--etas", eta_grid, "noise levels")->delimiter(',')->required();
  noise->add_flag("--quantized", with_quantized, "also decode a quantized instance with step = each eta");

  // certify
  std::string matrix_path, cert_out;
  std::size_t cert_r = 2;
  double cert_nu = 0.5;
  std::uint64_t cert_seed = 1;
  std::size_t cert_draws = 1000;
  auto* certify = app.add_subcommand("certify", "exact null space property certificate for a dense matrix");
  certify->add_option("--matrix", matrix_path, "matrix JSON {rows, cols, data}")->required()->check(CLI::ExistingFile);
  certify->add_option("--r", cert_r, "support size")->required();
  certify->add_option("--nu", cert_nu, "cone parameter in (0,1]");
  certify->add_option("--seed", cert_seed);
  certify->add_option("--draws", cert_draws, "validation draws");
  certify->add_option("-o,--output", cert_out);

  // structure-check
  std::size_t sc_n = 256, sc_r = 4, sc_samples = 1000;
  std::uint64_t sc_seed = 1;
  std::string sc_triple = "fourier", sc_ens = "gaussian", sc_out, sc_format = "json";
  double sc_alpha = 0.5, sc_kappa4 = 1.0;
  auto* structure = app.add_subcommand("structure-check", "Monte Carlo statistics of Gamma_v xi over sparse v");
  structure->add_option("-n,--n", sc_n);
  structure->add_option("--r", sc_r);
  structure->add_option("--samples", sc_samples);
  structure->add_option("--seed", sc_seed);
  structure->add_option("--triple", sc_triple, "fourier | wht | dct");
  structure->add_option("--ensemble", sc_ens);
  structure->add_option("--alpha", sc_alpha);
  structure->add_option("--kappa4", sc_kappa4);
  structure->add_option("--format", sc_format)->check(CLI::IsMember({"json", "csv"}));
  structure->add_option("-o,--output", sc_out);

  // params
  std::size_t p_n = 0, p_r = 0;
  double p_kappa4 = 1.0;
  ThetaConstants p_consts;
  auto* params = app.add_subcommand("params", "print the sparsity parameters for (n, r)");
  params->add_option("-n,--n", p_n)->required();
  params->add_option("--r", p_r)->required();
  params->add_option("--kappa4", p_kappa4);
  params->add_option("--c1", p_consts.c1);
  params->add_option("--c2", p_consts.c2);
  params->add_option("--c3", p_consts.c3);
  params->add_option("--c4", p_consts.c4);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*recover) {
      const Vector xi = io::read_vector(xi_path);
      const SelectorMask mask = io::mask_from_json(io::read_text(mask_path));
      const Vector y = io::read_vector(y_path);
      rec_solver.q = parse_constraint_norm(rec_q);
      rec_solver.eta = rec_eta;
      const PartialCirculantOperator b(CirculantOperator(xi), mask);
      const LinearOperator op = make_operator(b);
      const RecoveryResult r = solve_bpdn(op, y, rec_solver);
      const GapReport gap = certify_optimality(op, y, rec_solver, r);
      if (!x_out.empty()) io::write_vector(x_out, r.x_sharp);
      nlohmann::ordered_json j;
      j["status"] = to_string(r.status);
      j["iterations"] = r.iterations;
      j["objective"] = r.objective;
      j["constraint_residual"] = r.constraint_residual;
      j["gap_certificate"] = r.gap_certificate;
      j["dual_lower_bound"] = gap.dual_lower_bound;
      j["eta_used"] = r.eta_used;
      j["operator_norm"] = r.operator_norm;
      std::cout << j.dump(2) << '\n';
      return r.status == SolveStatus::converged ? 0 : 2;
    }
    if (*phase) {
      const ExperimentConfig c = build_config(pd);
      emit(c.output_path, run_phase_diagram(c).to_csv());
    }
    if (*minm) {
      ExperimentConfig c = build_config(mm);
      if (m_lo) c.m_min = *m_lo;
      if (m_hi) c.m_max = *m_hi;
      std::ostringstream out;
      out << "n,s,m_star,scaled,confirmed_rate,confirm_trials,unreachable,seed\n";
      for (std::size_t s : c.s_grid) {
        const MinMResult r = estimate_min_m(c.n, s, target, c);
        out << c.n << ',' << s << ',' << r.m_star << ',' << fmt(r.scaled(c.n)) << ',' << fmt(r.confirmed_rate)
            << ',' << r.confirm_trials << ',' << (r.unreachable ? 1 : 0) << ',' << c.master_seed << '\n';
      }
      emit(c.output_path, out.str());
    }
    if (*noise) {
      const ExperimentConfig c = build_config(ns);
      const std::size_t s = c.s_grid.front();
      const std::size_t m = c.m_grid.front();
      const NoiseSweep sweep = run_noise_sweep(c.n, m, s, eta_grid, c.q, c);
      std::string text = sweep.to_csv() + "# slope=" + fmt(sweep.slope) + " max_slope_deviation=" + fmt(sweep.max_slope_deviation) +
                         " envelope_slope=" + fmt(sweep.envelope_slope) + '\n';
      if (with_quantized) {
        text += "# quantized: step,feasible,l1_true,l1_recovered,err_l2,status\n";
        for (double step : eta_grid) {
          if (step <= 0) continue;
          const QuantizedRecovery qr = run_quantized_recovery(c.n, m, s, step, c);
          text += "# " + fmt(step) + ',' + (qr.feasible ? "1" : "0") + ',' + fmt(qr.l1_true) + ',' +
                  fmt(qr.l1_recovered) + ',' + fmt(qr.err_l2) + ',' + to_string(qr.status) + '\n';
        }
      }
      emit(c.output_path, text);
    }
    if (*certify) {
      const Matrix a = io::matrix_from_json(io::read_text(matrix_path));
      const NspCertificate cert = lm14_certify(a, cert_r, cert_nu, cert_seed, cert_draws);
      emit(cert_out, cert.to_json() + '\n');
      return cert.valid ? 0 : 2;
    }
    if (*structure) {
      const SparsityParameters p = compute_parameters(sc_n, sc_r, sc_kappa4);
      const StructureReport rep =
          structure_check(sc_n, sc_r, parse_triple(sc_triple, sc_n), parse_ensemble(sc_ens), sc_samples, sc_seed, p, sc_alpha);
      emit(sc_out, sc_format == "csv" ? rep.to_csv() : rep.to_json() + '\n');
    }
    if (*params) {
      std::cout << compute_parameters(p_n, p_r, p_kappa4, p_consts).to_json() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
