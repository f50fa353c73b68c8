// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "subconv/analysis.hpp"
#include "subconv/certify.hpp"
#include "subconv/generators.hpp"
#include "subconv/harness.hpp"
#include "subconv/measurement.hpp"
#include "subconv/solver.hpp"

using namespace subconv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string artifact;  // serialized output compared by the reproducibility criterion
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  if (k == 0) {
    f({});
    return;
  }
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale) {
  Rng rng(seed);
  return Matrix::NullaryExpr(rows, cols, [&] { return scale * draw(Ensemble::gaussian, rng); });
}

// 1. FFT convolution against the direct sum.
Outcome operator_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  auto check = [&](std::size_t n, std::uint64_t t) {
    const Vector x = sample(Ensemble::gaussian, n, derive_seed(1, n, 2 * t));
    const Vector xi = sample(Ensemble::gaussian, n, derive_seed(1, n, 2 * t + 1));
    const Vector naive = circular_convolve_naive(x, xi);
    worst = std::max(worst, (circular_convolve(x, xi) - naive).norm() / naive.norm());
  };
  for (std::size_t n = 1; n <= 512; ++n)
    for (std::uint64_t t = 0; t < 20; ++t) check(n, t);
  for (std::uint64_t t = 0; t < 3; ++t) check(4096, t);
  const double dt = seconds_since(t0);
  return {worst <= 1e-10 && dt < 5.0, "max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", dt) + " s", ""};
}

// 2. Gamma_v xi = v * xi for the Fourier triple.
Outcome factorization_identity() {
  const std::size_t n = 128;
  const HadamardTriple t = fourier_triple(n);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Vector v = sample(Ensemble::gaussian, n, derive_seed(2, k, 0));
    const Vector xi = sample(Ensemble::gaussian, n, derive_seed(2, k, 1));
    const Vector ref = circular_convolve_naive(v, xi);
    worst = std::max(worst, (gamma_apply(t, v, xi) - ref).norm() / ref.norm());
  }
  return {worst <= 1e-9, "max rel err " + fmt("%.2e", worst) + " over 100 pairs", ""};
}

// 3. HS norm, operator norm and row bound of materialized Gamma_v.
Outcome gamma_norm_identities() {
  double worst_hs = 0.0, worst_op = 0.0, worst_row = -1.0;
  for (std::size_t n : {16u, 64u, 256u}) {
    for (int which = 0; which < 3; ++which) {
      const HadamardTriple t = which == 0 ? fourier_triple(n)
                                          : uniform_triple(n, which == 1 ? HadamardKind::walsh_hadamard : HadamardKind::dct);
      for (std::uint64_t k = 0; k < 3; ++k) {
        const Vector v = sample(Ensemble::gaussian, n, derive_seed(3, n, 3 * which + k));
        const ComplexMatrix g = gamma_materialize(t, v);
        const double root_n = std::sqrt(static_cast<double>(n));
        worst_hs = std::max(worst_hs, std::abs(g.norm() - root_n * v.norm()) / (root_n * v.norm()));
        const double wv_inf = t.w.apply(v.cast<Complex>()).cwiseAbs().maxCoeff();
        Eigen::JacobiSVD<ComplexMatrix> svd(g);
        worst_op = std::max(worst_op, std::abs(svd.singularValues()[0] - root_n * wv_inf) / (root_n * wv_inf));
        double max_row = 0.0;
        for (Eigen::Index i = 0; i < g.rows(); ++i) max_row = std::max(max_row, g.row(i).norm());
        worst_row = std::max(worst_row, (max_row - t.beta() * v.norm()) / (t.beta() * v.norm()));
      }
    }
  }
  const bool pass = worst_hs <= 1e-9 && worst_op <= 1e-9 && worst_row <= 1e-9;
  return {pass,
          "HS " + fmt("%.1e", worst_hs) + ", op " + fmt("%.1e", worst_op) + ", row excess " + fmt("%.1e", worst_row) +
              " (DFT, WHT, DCT at n = 16, 64, 256)",
          ""};
}

// 4. Rearrangement functionals and cone membership against exhaustive search.
Outcome functional_oracles() {
  // Dyadic entries keep every sum of squares exact, so agreement is bitwise.
  std::size_t mismatches = 0, checks = 0;
  Rng rng(4);
  std::uniform_int_distribution<int> entry(-64, 64);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int rep = 0; rep < 6; ++rep) {
      Vector x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = entry(rng) / 8.0;
      if (rep % 3 == 2)
        for (std::size_t i = 0; i < n; i += 2) x[i] = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        double best = 0.0;
        for_each_subset(n, k, [&](const std::vector<std::size_t>& s) {
          double acc = 0.0;
          for (std::size_t i : s) acc += x[i] * x[i];
          best = std::max(best, std::sqrt(acc));
        });
        mismatches += topk_norm(x, k) != best;
        ++checks;
      }
      for (std::size_t s = 0; s <= n; ++s) {
        double best = std::numeric_limits<double>::infinity();
        for_each_subset(n, s, [&](const std::vector<std::size_t>& idx) {
          Vector r = x;
          for (std::size_t i : idx) r[i] = 0.0;
          best = std::min(best, r.cwiseAbs().sum());
        });
        mismatches += best_s_term_error(x, s) != best;
        ++checks;
      }
      for (std::size_t s = 1; s <= std::min<std::size_t>(4, n); ++s) {
        for (double nu : {0.125, 0.25, 0.5, 0.75}) {
          bool any = false;
          for_each_subset(n, s, [&](const std::vector<std::size_t>& idx) {
            double in = 0.0;
            double out = 0.0;
            std::vector<bool> chosen(n, false);
            for (std::size_t i : idx) {
              in += x[i] * x[i];
              chosen[i] = true;
            }
            for (std::size_t i = 0; i < n; ++i)
              if (!chosen[i]) out += std::abs(x[i]);
            any = any || std::sqrt(in) >= nu / std::sqrt(static_cast<double>(s)) * out;
          });
          mismatches += cone_membership(x, nu, s) != any;
          ++checks;
        }
      }
    }
  }
  return {mismatches == 0, std::to_string(checks) + " exhaustive comparisons, " + std::to_string(mismatches) + " mismatches",
          ""};
}

struct Problem {
  LinearOperator op;
  Vector y;
};

Problem recovery_problem(std::size_t n, std::size_t m, std::size_t s, std::uint64_t seed) {
  Rng rng(seed);
  const Vector xi = sample(Ensemble::gaussian, n, rng);
  const PartialCirculantOperator b(CirculantOperator(xi), make_selector_mask(n, static_cast<double>(m) / n, rng()));
  const Vector x = sample_sparse_unit(n, s, rng);
  return {make_operator(b), b.apply(x)};
}

// 5. Duality gap and scale covariance.
Outcome solver_optimality() {
  double worst_gap = 0.0;
  double worst_cov = 0.0;
  std::size_t failures = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Problem p = recovery_problem(128, 64, 1 + t % 12, derive_seed(5, t));
    SolverConfig cfg;
    const RecoveryResult r = solve_bpdn(p.op, p.y, cfg);
    const GapReport g = certify_optimality(p.op, p.y, cfg, r);
    const double rel_gap = g.gap / std::max(1.0, r.x_sharp.lpNorm<1>());
    worst_gap = std::max(worst_gap, rel_gap);
    if (!g.feasible || rel_gap > 1e-5) ++failures;
    for (double c : {1e-3, 1e3}) {
      SolverConfig scaled = cfg;
      scaled.eta = c * cfg.eta;
      const RecoveryResult rc = solve_bpdn(p.op, c * p.y, scaled);
      const double cov = (rc.x_sharp - c * r.x_sharp).norm() / (c * r.x_sharp.norm());
      worst_cov = std::max(worst_cov, cov);
      if (cov > 1e-6) ++failures;
    }
  }
  return {failures == 0,
          "worst relative gap " + fmt("%.2e", worst_gap) + ", worst scale deviation " + fmt("%.2e", worst_cov) +
              " over 50 instances (s = 1..12)",
          ""};
}

// 6. Exact recovery fixture.
Outcome exact_recovery() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.n = 256;
  c.trials = 200;
  c.master_seed = 20240601;
  c.s_grid = {5};
  c.m_grid = {100};
  const PhaseDiagram d = run_phase_diagram(c);
  const double dt = seconds_since(t0);
  const PhaseCell& cell = d.cells.front();
  return {cell.rate() >= 0.9 && dt < 120.0,
          std::to_string(cell.successes) + "/200 recovered, " + fmt("%.2f", dt) + " s", d.to_csv()};
}

// 7. Phase-transition scaling of m*(s) and monotonicity in m.
Outcome phase_transition() {
  const auto t0 = Clock::now();
  const std::size_t n = 512;
  ExperimentConfig c;
  c.n = n;
  c.trials = 60;
  c.master_seed = 7;
  std::vector<double> ratios;
  std::ostringstream art;
  art << "s,m_star,scaled,confirmed_rate\n";
  for (std::size_t s : {2u, 4u, 8u, 16u}) {
    const MinMResult r = estimate_min_m(n, s, 0.5, c);
    ratios.push_back(r.scaled(n));
    art << s << ',' << r.m_star << ',' << fmt("%.17g", r.scaled(n)) << ',' << fmt("%.17g", r.confirmed_rate) << '\n';
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[1] + sorted[2]);
  const bool scaling = sorted.front() >= median / 2 && sorted.back() <= 2 * median;

  ExperimentConfig grid = c;
  grid.trials = 40;
  grid.s_grid = {2, 4, 8, 16};
  grid.m_grid = {8, 12, 16, 24, 32, 40, 48, 56, 64, 72, 80, 96, 128, 192, 256};
  const PhaseDiagram d = run_phase_diagram(grid);
  const MonotonicityReport mono = check_monotone_in_m(d, 0.01);
  art << d.to_csv();
  const double dt = seconds_since(t0);

  std::string detail = "ratios";
  for (double r : ratios) detail += " " + fmt("%.3f", r);
  detail += " (median " + fmt("%.3f", median) + "); " + std::to_string(mono.violations) + "/" +
            std::to_string(mono.pairs) + " adjacent-m pairs reject at 1% (min p " + fmt("%.3g", mono.min_p_value) +
            "); " + fmt("%.1f", dt) + " s";
  return {scaling && mono.violations == 0 && dt < 900.0, detail, art.str()};
}

// 8. Certification pipeline on a frozen 20 x 40 Gaussian matrix.
Outcome certification() {
  const Matrix a = gaussian_matrix(20, 40, 808, 1.0 / std::sqrt(20.0));
  const NspCertificate cert = lm14_certify(a, 4, 0.5, 81, 1000);
  // No positive sparsity is certified for this shape; cone samples use s = 1.
  const std::size_t s = std::max<std::size_t>(cert.s_max, 1);
  const auto cone = sample_cone(40, 0.5, s, 1000, 82);
  const double floor = (1.0 - 1e-9) / cert.cone_constant;
  double min_norm = std::numeric_limits<double>::infinity();
  for (const Vector& v : cone) min_norm = std::min(min_norm, (a * v).norm());
  const bool pass = cert.valid && cert.validation_draws == 1000 && cert.min_quadratic_slack >= -1e-9 && min_norm >= floor;
  std::string detail = "tau " + fmt("%.4f", cert.tau) + ", M " + fmt("%.4f", cert.m_bound) + ", s_max " +
                       std::to_string(cert.s_max) + ", min quadratic slack " + fmt("%.3e", cert.min_quadratic_slack) +
                       ", min ||Av|| over 1000 cone samples (s = " + std::to_string(s) + ") " + fmt("%.4f", min_norm) +
                       " vs " + fmt("%.4f", floor);
  return {pass, detail, cert.to_json() + "\n" + fmt("%.17g", min_norm)};
}

// 9. Error bounds on small certified instances.
Outcome error_bound_consistency() {
  std::size_t instances = 0, violations = 0, certified = 0;
  double worst_ratio = 0.0;
  std::ostringstream art;
  art << "instance,q,s,eta,err_l2,bound_l2\n";
  for (std::uint64_t k = 0; k < 12; ++k) {
    const std::size_t n = 6 + k % 4;
    const std::size_t rows = 300 + 50 * (k % 3);
    const Matrix a = gaussian_matrix(rows, n, derive_seed(9, k), 1.0 / std::sqrt(static_cast<double>(rows)));
    const double nu = 0.9;
    const NspCertificate cert = lm14_certify(a, n, nu, derive_seed(9, k, 1), 1000);
    if (!cert.valid || cert.certified_sparsity(n) < 1) continue;
    ++certified;
    const std::size_t s = cert.certified_sparsity(n);
    Rng rng(derive_seed(9, k, 2));
    for (int rep = 0; rep < 10; ++rep) {
      for (ConstraintNorm q : {ConstraintNorm::l2, ConstraintNorm::linf}) {
        Vector x = sample_sparse_unit(n, s, rng);
        x += 0.05 * sample(Ensemble::gaussian, n, rng);  // compressible, not sparse
        const double eta = 0.01 * (1 + rep);
        const Vector e = sample_noise(rows, eta, q, rng);
        const Vector y = a * x + e;
        SolverConfig cfg;
        cfg.q = q;
        cfg.eta = eta;
        cfg.gap_tol = 1e-7;
        const RecoveryResult r = solve_bpdn(make_operator(a), y, cfg);
        const double tau_q = q == ConstraintNorm::l2 ? cert.q_constants.at("2") : cert.q_constants.at("inf");
        const ErrorBounds b = predicted_error_bounds(nu, tau_q, s, eta, best_s_term_error(x, s));
        const double err = (r.x_sharp - x).norm();
        ++instances;
        if (r.status != SolveStatus::converged || err > b.l2) ++violations;
        worst_ratio = std::max(worst_ratio, err / b.l2);
        art << k << ',' << to_string(q) << ',' << s << ',' << fmt("%.17g", eta) << ',' << fmt("%.17g", err) << ','
            << fmt("%.17g", b.l2) << '\n';
      }
    }
  }
  return {certified > 0 && violations == 0,
          std::to_string(instances) + " solves on " + std::to_string(certified) + " certified matrices, " +
              std::to_string(violations) + " violations, worst err/bound " + fmt("%.3f", worst_ratio),
          art.str()};
}

// 10. Structural Monte Carlo.
Outcome structural_monte_carlo() {
  const StructureReport rep =
      structure_check(1024, 8, fourier_triple(1024), Ensemble::gaussian, 1000, 1010, compute_parameters(1024, 8));
  const double q01 = rep.norm_quantiles.front();
  const SmallBallReport sb = small_ball_mc(Matrix::Identity(64, 64), Ensemble::gaussian, {0.5}, 10000, 1011);
  const std::size_t hits = static_cast<std::size_t>(std::llround(sb.frequencies[0] * sb.trials));
  const bool pass = rep.mean_sq_norm >= 0.97 && rep.mean_sq_norm <= 1.03 && q01 >= 0.5 && hits == 0;
  return {pass,
          "mean ||G xi||^2/n " + fmt("%.4f", rep.mean_sq_norm) + ", 1% quantile " + fmt("%.4f", q01) +
              ", small-ball hits " + std::to_string(hits) + "/10000",
          rep.to_json() + rep.to_csv() + fmt("%.17g", sb.frequencies[0])};
}

// 11. Selector sum and one-sparse column bound.
Outcome selector_lemmas() {
  const SelectorSumReport sel = selector_log_sum_check(1024, 0.1, 1000, 1111);
  const OneSparseReport one = one_sparse_bound_check(512, 0.125, fourier_triple(512), Ensemble::gaussian, 200, 1112);
  std::ostringstream art;
  art << fmt("%.17g", sel.frequency) << ',' << fmt("%.17g", sel.mean_sum) << '\n';
  for (double r : one.ratios) art << fmt("%.17g", r) << '\n';
  return {sel.frequency >= 0.99 && one.q99 <= 4.0,
          "selector frequency " + fmt("%.3f", sel.frequency) + " (mean sum " + fmt("%.1f", sel.mean_sum) + " vs bound " +
              fmt("%.1f", sel.bound) + "), one-sparse 99% quantile " + fmt("%.3f", one.q99),
          art.str()};
}

}  // namespace

// With no arguments every criterion runs; otherwise only the listed ids.
int main(int argc, char** argv) {
  std::vector<bool> selected(13, argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 12) {
      std::fprintf(stderr, "usage: acceptance [criterion ids 1-12 ...]\n");
      return 2;
    }
    selected[id] = true;
  }

  int failures = 0;
  int ran = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    ++ran;
    if (!o.pass) ++failures;
  };

  using Runner = Outcome (*)();
  const std::vector<std::pair<const char*, Runner>> deterministic = {
      {"operator correctness", operator_correctness},
      {"factorization identity", factorization_identity},
      {"Gamma norm identities", gamma_norm_identities},
      {"norm and functional oracles", functional_oracles},
      {"solver optimality", solver_optimality},
  };
  for (std::size_t i = 0; i < deterministic.size(); ++i)
    if (selected[1 + i]) report(static_cast<int>(1 + i), deterministic[i].first, deterministic[i].second());

  const std::vector<std::pair<const char*, Runner>> seeded = {
      {"exact recovery", exact_recovery},
      {"phase-transition scaling", phase_transition},
      {"certification pipeline", certification},
      {"error-bound consistency", error_bound_consistency},
      {"structural Monte Carlo", structural_monte_carlo},
      {"selector and one-sparse bounds", selector_lemmas},
  };
  // Criterion 12 needs the artifacts of every seeded criterion.
  std::vector<std::string> first(seeded.size());
  for (std::size_t i = 0; i < seeded.size(); ++i) {
    if (!selected[6 + i] && !selected[12]) continue;
    const Outcome o = seeded[i].second();
    if (selected[6 + i]) report(static_cast<int>(6 + i), seeded[i].first, o);
    first[i] = o.artifact;
  }

  if (selected[12]) {
    std::size_t identical = 0;
    for (std::size_t i = 0; i < seeded.size(); ++i) identical += seeded[i].second().artifact == first[i];
    report(12, "reproducibility",
           {identical == seeded.size(),
            std::to_string(identical) + "/" + std::to_string(seeded.size()) + " reruns of criteria 6-11 bit-identical",
            ""});
  }

  std::printf("%d of %d criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
