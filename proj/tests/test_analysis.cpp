#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <json.hpp>

#include "subconv/analysis.hpp"
#include "subconv/generators.hpp"

using namespace subconv;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  std::size_t i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

// Calls f on every k-subset of [n].
void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
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

}  // namespace

TEST_CASE("nonincreasing rearrangement") {
  CHECK(nonincreasing_rearrangement(vec({3, 1, -2, 0})) == vec({3, 2, 1, 0}));
  CHECK(nonincreasing_rearrangement(vec({-2, 2, 2, -2})) == vec({2, 2, 2, 2}));
  const Vector x = sample(Ensemble::gaussian, 200, 4);
  std::vector<double> mags(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) mags[i] = std::abs(x[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const Vector r = nonincreasing_rearrangement(x);
  for (std::size_t i = 0; i < mags.size(); ++i) CHECK(r[i] == mags[i]);
}

TEST_CASE("magnitude order is stable on ties") {
  CHECK(magnitude_order(vec({1, -3, 3, 0, -1})) == std::vector<std::size_t>{1, 2, 0, 4, 3});
}

TEST_CASE("top-k norm") {
  CHECK(topk_norm(vec({3, 1, -2, 0}), 2) == doctest::Approx(std::sqrt(13.0)));
  const Vector x = sample(Ensemble::gaussian, 10, 8);
  CHECK(topk_norm(x, 10) == doctest::Approx(x.norm()).epsilon(1e-15));
  CHECK(topk_norm(x, 1) == x.cwiseAbs().maxCoeff());
  CHECK_THROWS_AS(topk_norm(x, 0), InvalidArgument);
  CHECK_THROWS_AS(topk_norm(x, 11), InvalidArgument);

  SUBCASE("equals the maximum over all subsets") {
    for (std::size_t k = 1; k <= 10; ++k) {
      double best = 0.0;
      for_each_subset(10, k, [&](const std::vector<std::size_t>& s) {
        double acc = 0.0;
        for (std::size_t i : s) acc += x[i] * x[i];
        best = std::max(best, std::sqrt(acc));
      });
      CHECK(topk_norm(x, k) == doctest::Approx(best).epsilon(1e-14));
    }
  }
  SUBCASE("norm axioms and monotonicity in k") {
    for (std::uint64_t t = 0; t < 50; ++t) {
      const Vector a = sample(Ensemble::gaussian, 20, derive_seed(1, t, 0));
      const Vector b = sample(Ensemble::gaussian, 20, derive_seed(1, t, 1));
      for (std::size_t k : {1u, 3u, 7u, 20u}) {
        CHECK(topk_norm(a + b, k) <= topk_norm(a, k) + topk_norm(b, k) + 1e-12);
        CHECK(topk_norm(-2.5 * a, k) == doctest::Approx(2.5 * topk_norm(a, k)));
        if (k > 1) CHECK(topk_norm(a, k) >= topk_norm(a, k - 1));
      }
    }
  }
}

TEST_CASE("best s-term error") {
  CHECK(best_s_term_error(vec({3, 1, -2, 0}), 2) == 1.0);
  const Vector x = sample(Ensemble::gaussian, 10, 12);
  CHECK(best_s_term_error(x, 0) == doctest::Approx(x.lpNorm<1>()));
  Vector sparse = Vector::Zero(10);
  sparse[2] = 1.0;
  sparse[7] = -4.0;
  CHECK(best_s_term_error(sparse, 2) == 0.0);
  CHECK(best_s_term_error(sparse, 5) == 0.0);
  CHECK(best_s_term_error(x, 10) == 0.0);

  SUBCASE("equals the minimum over all supports") {
    for (std::size_t s = 1; s < 10; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for_each_subset(10, s, [&](const std::vector<std::size_t>& idx) {
        Vector r = x;
        for (std::size_t i : idx) r[i] = 0.0;
        best = std::min(best, r.lpNorm<1>());
      });
      CHECK(best_s_term_error(x, s) == doctest::Approx(best).epsilon(1e-14));
    }
  }
  SUBCASE("non-increasing and complementary to the head") {
    for (std::size_t s = 0; s <= 10; ++s) {
      if (s > 0) CHECK(best_s_term_error(x, s) <= best_s_term_error(x, s - 1));
      const double head = nonincreasing_rearrangement(x).head(s).sum();
      CHECK(best_s_term_error(x, s) + head == doctest::Approx(x.lpNorm<1>()));
    }
  }
}

TEST_CASE("cone membership") {
  Vector sparse = Vector::Zero(30);
  sparse[4] = 2.0;
  sparse[9] = -1.0;
  CHECK(cone_membership(sparse, 0.5, 2));
  CHECK(cone_membership(sparse, 0.99, 3));
  CHECK_FALSE(cone_membership(Vector::Ones(100), 0.5, 1));
  CHECK_THROWS_AS(cone_membership(sparse, 0.0, 2), InvalidArgument);
  CHECK_THROWS_AS(cone_membership(sparse, 1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(cone_membership(sparse, 0.5, 0), InvalidArgument);
  CHECK_THROWS_AS(cone_membership(sparse, 0.5, 31), InvalidArgument);

  SUBCASE("matches exhaustive support search") {
    std::size_t members = 0;
    for (std::uint64_t t = 0; t < 60; ++t) {
      Vector v = sample(Ensemble::gaussian, 12, derive_seed(3, t));
      // Mix heavy and light coordinates so both outcomes occur.
      for (Eigen::Index i = 0; i < 12; ++i) v[i] *= (i % 4 == 0) ? 10.0 : 0.2 * static_cast<double>(t % 5);
      for (std::size_t s = 1; s <= 4; ++s) {
        for (double nu : {0.25, 0.5, 0.9}) {
          bool any = false;
          for_each_subset(12, s, [&](const std::vector<std::size_t>& idx) {
            double in = 0.0;
            double out = v.lpNorm<1>();
            for (std::size_t i : idx) {
              in += v[i] * v[i];
              out -= std::abs(v[i]);
            }
            if (std::sqrt(in) >= nu / std::sqrt(static_cast<double>(s)) * out) any = true;
          });
          CHECK(cone_membership(v, nu, s) == any);
          members += any;
        }
      }
    }
    CHECK(members > 0);
    CHECK(members < 60 * 12);
  }
  SUBCASE("scale invariance") {
    for (std::uint64_t t = 0; t < 30; ++t) {
      const Vector v = sample(Ensemble::gaussian, 40, t);
      for (double c : {-3.0, 0.01, 7.0}) CHECK(cone_membership(v, 0.5, 10) == cone_membership(c * v, 0.5, 10));
    }
  }
}

TEST_CASE("regularity check") {
  const std::size_t n = 64;
  const RegularityResult flat = regularity_check(Vector::Ones(n), 1.0, 1.0);
  CHECK(flat.regular);
  CHECK(flat.count == n);
  Vector spike = Vector::Zero(n);
  spike[0] = std::sqrt(static_cast<double>(n));
  const RegularityResult peaked = regularity_check(spike, 1.0, 0.1);
  CHECK_FALSE(peaked.regular);
  CHECK(peaked.count == 1);
  const RegularityResult two = regularity_check(vec({1, 1, 0, 0}), 0.5, 0.5);
  CHECK(two.count == 2);
  CHECK(two.regular);
  CHECK_FALSE(regularity_check(vec({1, 1, 0, 0}), 0.5, 0.75).regular);
  const RegularityResult zero = regularity_check(Vector::Zero(5), 0.5, 0.5);
  CHECK_FALSE(zero.regular);
  CHECK(zero.degenerate);
  CHECK(zero.count == 5);
  CHECK_THROWS_AS(regularity_check(Vector::Ones(4), 0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(regularity_check(Vector::Ones(4), 0.5, 0.0), InvalidArgument);
  CHECK_THROWS_AS(regularity_check(Vector::Ones(4), 0.5, 1.5), InvalidArgument);
}

TEST_CASE("sparsity parameters") {
  const double log2e = 1.0 / std::log(2.0);
  SUBCASE("r <= sqrt(n) gives the constant rho") {
    for (std::size_t n : {64u, 1000u, 65536u})
      for (std::size_t r = 1; r * r <= n; r += 3) CHECK(compute_parameters(n, r).rho == doctest::Approx(10.0 * log2e));
  }
  SUBCASE("reference point n = 2^16, r = 2^4") {
    // Evaluated with base-2 logarithms throughout, independent of the library's natural-log route.
    const double rho = 10.0 * log2e;
    const double two_s1 = rho * 16.0 * (1.0 + 12.0 * std::log(2.0));
    const SparsityParameters p = compute_parameters(65536, 16);
    CHECK(p.rho == doctest::Approx(rho).epsilon(1e-14));
    CHECK(std::exp2(p.s0) == doctest::Approx(4096.0).epsilon(1e-13));
    CHECK(std::exp2(p.s1) == doctest::Approx(two_s1).epsilon(1e-13));
    CHECK(std::exp2(p.s1) == doctest::Approx(2150.8).epsilon(1e-4));
    CHECK(p.regime == Regime::low_sparsity);
    CHECK(p.alpha_r == 1.0);
    CHECK(p.theta == 1.0);  // r below sqrt(n / log n): first branch, c1 = 1
  }
  SUBCASE("high sparsity branch") {
    const std::size_t n = 4096, r = 1024;
    const double kappa4 = 1.0;
    const double rho = 10.0 * log2e * std::max(1.0, std::log2(std::numbers::e * r) / std::log2(std::numbers::e * n / r));
    const double s0 = std::log2(kappa4 * n / r);
    const double s1 = std::log2(rho * r * std::log(std::numbers::e * n / r));
    const double alpha = std::max(1.0, std::log(std::exp2(s1 - s0)));
    const SparsityParameters p = compute_parameters(n, r, kappa4);
    CHECK(p.rho == doctest::Approx(rho).epsilon(1e-13));
    CHECK(p.s0 == doctest::Approx(s0).epsilon(1e-13));
    CHECK(p.s1 == doctest::Approx(s1).epsilon(1e-13));
    CHECK(p.alpha_r == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(p.regime == Regime::high_sparsity);
    CHECK(p.theta == doctest::Approx(1.0 / (alpha * alpha * std::log(std::numbers::e * alpha))).epsilon(1e-12));
  }
  SUBCASE("configured constants reach theta") {
    ThetaConstants c;
    c.c1 = 0.3;
    c.c2 = 2.0;
    CHECK(compute_parameters(1024, 2, 1.0, c).theta == doctest::Approx(0.3));
    CHECK(compute_parameters(1024, 2, 1.0, c).theta_constants.c2 == 2.0);
  }
  SUBCASE("regime is low exactly when alpha is 1") {
    for (std::size_t n : {16u, 256u, 4096u})
      for (std::size_t r = 1; 2 * r <= n; r = r * 2 + 1)
        for (double kappa4 : {0.01, 1.0, 100.0}) {
          const SparsityParameters p = compute_parameters(n, r, kappa4);
          CHECK((p.regime == Regime::low_sparsity) == (p.s0 >= p.s1));
          if (p.regime == Regime::low_sparsity) CHECK(p.alpha_r == 1.0);
          if (p.alpha_r > 1.0) CHECK(p.regime == Regime::high_sparsity);
        }
  }
  SUBCASE("range errors") {
    CHECK_THROWS_AS(compute_parameters(10, 0), InvalidArgument);
    CHECK_THROWS_AS(compute_parameters(10, 6), InvalidArgument);
    CHECK_THROWS_AS(compute_parameters(10, 2, 0.0), InvalidArgument);
  }
  SUBCASE("JSON report") {
    const auto j = nlohmann::json::parse(compute_parameters(65536, 16).to_json());
    for (const char* key : {"n", "r", "kappa4", "rho", "s0", "s1", "alpha_r", "theta", "regime"}) CHECK(j.contains(key));
    CHECK(j["regime"] == "low-sparsity");
  }
}

TEST_CASE("greedy separated nets") {
  SUBCASE("eps above the diameter keeps one point") {
    std::vector<Vector> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(sample(Ensemble::gaussian, 5, i).normalized());
    CHECK(greedy_separated_net(pts, 2.5).size() == 1);
  }
  SUBCASE("tiny eps keeps every distinct point") {
    std::vector<Vector> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(sample(Ensemble::gaussian, 5, i));
    pts.push_back(pts[3]);
    CHECK(greedy_separated_net(pts, 1e-12).size() == 20);
  }
  SUBCASE("separation and covering on the sphere S^7") {
    std::vector<Vector> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(sample(Ensemble::gaussian, 8, derive_seed(44, i)).normalized());
    const auto net = greedy_separated_net(pts, 0.5);
    for (std::size_t a = 0; a < net.size(); ++a)
      for (std::size_t b = a + 1; b < net.size(); ++b) CHECK((pts[net[a]] - pts[net[b]]).norm() >= 0.5);
    for (const Vector& p : pts) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t k : net) nearest = std::min(nearest, (p - pts[k]).norm());
      CHECK(nearest <= 0.5);
    }
  }
  SUBCASE("scaled infinity metric under the DFT") {
    const std::size_t n = 16;
    const HadamardTypeMatrix w = make_hadamard_type(n, HadamardKind::dft);
    const Vector a = sample(Ensemble::gaussian, n, 1);
    const Vector b = sample(Ensemble::gaussian, n, 2);
    // sqrt(n) ||W(a-b)||_inf is the largest DFT magnitude of a-b.
    const ComplexVector d = (a - b).cast<Complex>();
    double largest = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        acc += d[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j * k) / n);
      largest = std::max(largest, std::abs(acc));
    }
    CHECK(net_distance(a, b, NetMetric::scaled_infinity, &w) == doctest::Approx(largest).epsilon(1e-12));
    CHECK_THROWS_AS(net_distance(a, b, NetMetric::scaled_infinity), InvalidArgument);
    std::vector<Vector> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(sample(Ensemble::gaussian, n, 100 + i).normalized());
    const auto net = greedy_separated_net(pts, 2.0, NetMetric::scaled_infinity, &w);
    for (std::size_t x = 0; x < net.size(); ++x)
      for (std::size_t y = x + 1; y < net.size(); ++y)
        CHECK(net_distance(pts[net[x]], pts[net[y]], NetMetric::scaled_infinity, &w) >= 2.0);
  }
  SUBCASE("eps must be positive") {
    CHECK_THROWS_AS(greedy_separated_net({Vector::Ones(2)}, 0.0), InvalidArgument);
  }
}

TEST_CASE("psi_1^n norm") {
  const std::size_t n = 30;
  Vector a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = std::log(std::numbers::e * n / static_cast<double>(j + 1));
  CHECK(psi1n_norm(a) == doctest::Approx(1.0).epsilon(1e-14));
  Vector e1 = Vector::Zero(8);
  e1[0] = 1.0;
  CHECK(psi1n_norm(e1) == doctest::Approx(1.0 / std::log(8.0 * std::numbers::e)));
  const Vector r = sample(Ensemble::gaussian, 25, 3);
  CHECK(psi1n_norm(-4.0 * r) == doctest::Approx(4.0 * psi1n_norm(r)));
}
