#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spinlab/quadrature.hpp"
#include "spinlab/sampler.hpp"
#include "spinlab/transfer.hpp"

using namespace spinlab;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

LatticeModel gaussian_model(int K, double J, double sigma = 0.0) {
  return LatticeModel::make(K, J, 0.0, sigma, SingleSitePotential::zero());
}

LatticeModel cosine_model(int K, double J, double sigma = 0.0) {
  return LatticeModel::make(K, J, 0.0, sigma, SingleSitePotential::cosine(0.5, 1.0));
}

double logsumexp(const std::vector<double>& xs) {
  double mx = xs[0];
  for (double x : xs)
    mx = std::max(mx, x);
  double acc = 0.0;
  for (double x : xs)
    acc += std::exp(x - mx);
  return mx + std::log(acc);
}

} // namespace

TEST_CASE("grid recovers the Gaussian integral to 1e-12") {
  for (auto scheme : {QuadratureScheme::GaussHermite, QuadratureScheme::Trapezoid}) {
    const auto grid = build_grid(gaussian_model(1, 0.0), 64, 1e-12, scheme);
    CHECK(logsumexp(grid.log_weights) ==
          doctest::Approx(kHalfLog2Pi).epsilon(1e-12));
    for (std::size_t j = 0; j + 1 < grid.nodes.size(); ++j)
      CHECK(grid.nodes[j] < grid.nodes[j + 1]);
  }
}

TEST_CASE("truncation shifts with sigma") {
  const auto g0 = build_grid(gaussian_model(1, 0.0, 0.0), 64, 1e-12);
  const auto g3 = build_grid(gaussian_model(1, 0.0, 3.0), 64, 1e-12);
  CHECK(g3.truncation >= 3.0 + g0.truncation - 1e-12);
}

TEST_CASE("unreachable tolerance raises a resolution error") {
  CHECK_THROWS_AS(build_grid(gaussian_model(1, 0.0), 16, 1e-14), ResolutionError);
  CHECK_THROWS_AS(build_grid(gaussian_model(1, 0.0), 15, 1e-6), ConfigError); // N >= 16
}

TEST_CASE("log_partition closed forms") {
  const auto grid = build_grid(gaussian_model(1, 0.2), 64, 1e-12);

  // K = 1 standard Gaussian.
  CHECK(log_partition(gaussian_model(1, 0.0), grid, 0.0).real() ==
        doctest::Approx(kHalfLog2Pi).epsilon(1e-13));

  // K = 2 coupled Gaussian determinant: ln(2 pi) - ln(1 - J^2)/2.
  const double expected2 = 2.0 * kHalfLog2Pi - 0.5 * std::log(1.0 - 0.04);
  CHECK(log_partition(gaussian_model(2, 0.2), grid, 0.0).real() ==
        doctest::Approx(expected2).epsilon(1e-13));

  // K = 1 imaginary tilt: Gaussian characteristic function at xi = 1.
  const auto lz = log_partition(gaussian_model(1, 0.0), grid, {0.0, 1.0});
  CHECK(lz.real() == doctest::Approx(kHalfLog2Pi - 0.5).epsilon(1e-13));
  CHECK(std::abs(lz.imag()) < 1e-13);
}

TEST_CASE("transfer matches the dense tensor-product oracle for K <= 3") {
  const auto model = cosine_model(3, 0.2, 0.4);
  const auto grid = build_grid(model, 96, 1e-12);
  for (const std::complex<double> tilt : {std::complex<double>(0.0, 0.0),
                                          std::complex<double>(0.3, 0.0),
                                          std::complex<double>(0.0, 0.8),
                                          std::complex<double>(-0.2, 1.2)}) {
    const auto via_transfer = log_partition(model, grid, tilt);
    const auto via_tensor =
        oracles::tensor_log_partition(model, grid.nodes, grid.log_weights, tilt);
    CHECK(via_transfer.real() == doctest::Approx(via_tensor.real()).epsilon(1e-8));
    CHECK(std::abs(via_transfer.imag() - via_tensor.imag()) < 1e-8);
  }
}

TEST_CASE("grid refinement changes log_partition below 1e-10") {
  for (const auto& model : {gaussian_model(8, 0.2, 1.0), cosine_model(8, 0.2, 1.0),
                            cosine_model(8, -0.2, -0.7)}) {
    const auto g1 = build_grid(model, 96, 1e-12);
    const auto g2 = build_grid(model, 192, 1e-12);
    const double lz1 = log_partition(model, g1, 0.0).real();
    const double lz2 = log_partition(model, g2, 0.0).real();
    CHECK(std::abs(lz1 - lz2) < 1e-10);
  }
}

TEST_CASE("gce_moments: product measure") {
  const auto model = gaussian_model(6, 0.0, 0.7);
  const auto grid = build_grid(model, 64, 1e-12);
  const auto mom = gce_moments(model, grid, 3);
  for (double mi : mom.m_per_site)
    CHECK(mi == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(mom.var_sum == doctest::Approx(6.0).epsilon(1e-12));
  for (const auto& [pair, c] : mom.cov)
    CHECK(std::abs(c) < 1e-12);
}

TEST_CASE("gce_moments: K=2 coupled Gaussian") {
  const auto model = gaussian_model(2, 0.2);
  const auto grid = build_grid(model, 64, 1e-12);
  const auto mom = gce_moments(model, grid, 3);
  CHECK(mom.cov.at({1, 2}) == doctest::Approx(0.2 / 0.96).epsilon(1e-12));
  CHECK(mom.var_sum == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(mom.m == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gce_moments: odd centered moments vanish by symmetry") {
  const auto model = cosine_model(5, 0.2, 0.0);
  const auto grid = build_grid(model, 96, 1e-12);
  const auto mom = gce_moments(model, grid, 3);
  CHECK(std::abs(mom.m) < 1e-12);
  CHECK(std::abs(mom.centered_sum_p3) < 1e-9);
}

TEST_CASE("gce_moments validates max_order") {
  const auto model = gaussian_model(2, 0.0);
  const auto grid = build_grid(model, 64, 1e-12);
  CHECK_THROWS_AS(gce_moments(model, grid, 5), ConfigError);
  const auto mom = gce_moments(model, grid, 4);
  REQUIRE(mom.centered_sum_p4.has_value());
  // Gaussian sum: E[S^4] = 3 Var(S)^2.
  CHECK(*mom.centered_sum_p4 == doctest::Approx(3.0 * 4.0).epsilon(1e-10));
}

TEST_CASE("covariance against the dense Gaussian oracle") {
  const auto model = gaussian_model(16, 0.2, 0.3);
  const auto grid = build_grid(model, 64, 1e-12);
  const oracles::DenseGaussian oracle(model);
  CHECK(covariance(model, grid, 1, 1) == doctest::Approx(oracle.cov(1, 1)).epsilon(1e-10));
  CHECK(covariance(model, grid, 1, 2) == doctest::Approx(oracle.cov(1, 2)).epsilon(1e-10));
  CHECK(covariance(model, grid, 8, 9) == doctest::Approx(oracle.cov(8, 9)).epsilon(1e-10));
  CHECK(covariance(model, grid, 3, 11) ==
        doctest::Approx(oracle.cov(3, 11)).epsilon(1e-6).scale(1e-4));
  CHECK(covariance(model, grid, 1, 1) == covariance(model, grid, 1, 1));
  // J = 0 gives exactly uncorrelated sites.
  const auto indep = gaussian_model(4, 0.0);
  CHECK(std::abs(covariance(indep, grid, 1, 3)) < 1e-13);
}

TEST_CASE("moments match the dense Gaussian oracle with a nonuniform field") {
  const auto model = LatticeModel::make(5, -0.15, std::vector<double>{0.3, -0.2, 0.0, 0.5, -0.1},
                                        0.6, SingleSitePotential::zero());
  const auto grid = build_grid(model, 96, 1e-12);
  const oracles::DenseGaussian oracle(model);
  const auto mom = gce_moments(model, grid, 3);
  const auto mu = oracle.site_means(0.6);
  for (int i = 0; i < 5; ++i)
    CHECK(mom.m_per_site[static_cast<std::size_t>(i)] ==
          doctest::Approx(mu(i)).epsilon(1e-11));
  CHECK(mom.var_sum == doctest::Approx(oracle.var_sum()).epsilon(1e-11));
}

TEST_CASE("moment bound: per-site central moments stay bounded over a sweep") {
  const auto grid = build_grid(cosine_model(1, 0.2, 3.0), 128, 1e-12);
  double worst = 0.0;
  for (int K : {4, 16, 64}) {
    const auto model = cosine_model(K, 0.2);
    const TransferOperator op(model, grid);
    for (double sigma : {-3.0, -1.0, 0.0, 2.0, 3.0}) {
      for (int p : {2, 4}) {
        const auto vals = op.site_central_moments(sigma, p);
        for (double v : vals)
          worst = std::max(worst, std::abs(v));
      }
    }
  }
  CHECK(worst <= 10.0);
}

TEST_CASE("FKG positivity for attractive coupling") {
  const auto model = cosine_model(12, 0.2, 0.5);
  const auto grid = build_grid(model, 96, 1e-12);
  const TransferOperator op(model, grid);
  const auto row = op.covariance_row(0.5, 3, 8);
  for (double c : row)
    CHECK(c >= -1e-10);
}

TEST_CASE("conditional site: Gaussian closed form") {
  const auto model = LatticeModel::make(4, 0.2, std::vector<double>{0.0, 0.3, 0.0, 0.0},
                                        0.9, SingleSitePotential::zero());
  const auto grid = build_grid(model, 96, 1e-12);
  const auto cs = conditional_site(model, grid, 2, 0.8, -1.4);
  CHECK(cs.s_i2_sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cs.m_i2 == doctest::Approx(0.9 - 0.3 + 0.2 * (0.8 - 1.4)).epsilon(1e-12));
  CHECK(std::abs(cs.t_i2) < 1e-10);
}

TEST_CASE("conditional site: symmetric neighbors cancel") {
  const auto model = cosine_model(3, 0.17);
  const auto grid = build_grid(model, 96, 1e-12);
  const auto cs = conditional_site(model, grid, 2, 1.3, -1.3);
  CHECK(cs.m_i2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(cs.t_i2) < 1e-12);
}

TEST_CASE("conditional site matches the brute-force 1D oracle") {
  const auto model = cosine_model(3, 0.2);
  const auto grid = build_grid(model, 128, 1e-12);
  const auto cs = conditional_site(model, grid, 2, 1.0, 1.0);
  const auto ref = oracles::conditional_moments_1d(model, 2, 1.0, 1.0);
  CHECK(cs.m_i2 == doctest::Approx(ref.mean).epsilon(1e-10));
  CHECK(cs.s_i2_sq == doctest::Approx(ref.var).epsilon(1e-10));
  CHECK(cs.t_i2 == doctest::Approx(ref.third).epsilon(1e-8).scale(1.0));
}

TEST_CASE("conditional variance is uniformly pinned for the test family") {
  const auto model = cosine_model(8, 0.2);
  const auto grid = build_grid(model, 128, 1e-12);
  spinlab::Xoshiro256pp rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const double left = -10.0 + 20.0 * rng.uniform01();
    const double right = -10.0 + 20.0 * rng.uniform01();
    const double sigma = -3.0 + 6.0 * rng.uniform01();
    const auto cs = conditional_site(model.with_sigma(sigma), grid, 4, left, right);
    CHECK(cs.s_i2_sq >= 0.2);
    CHECK(cs.s_i2_sq <= 5.0);
  }
}

TEST_CASE("boundary sites use the single present neighbor") {
  const auto model = gaussian_model(3, 0.2, 0.5);
  const auto grid = build_grid(model, 96, 1e-12);
  // i = K: x_{K+1} = 0, so the passed right value must be ignored.
  const auto end1 = conditional_site(model, grid, 3, 1.0, 99.0);
  const auto end2 = conditional_site(model, grid, 3, 1.0, 0.0);
  CHECK(end1.m_i2 == end2.m_i2);
  // i = 1 has no left neighbor.
  const auto front1 = conditional_site(model, grid, 1, 99.0, 1.0);
  const auto front2 = conditional_site(model, grid, 1, 0.0, 1.0);
  CHECK(front1.m_i2 == front2.m_i2);
}
