#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <numbers>

#include "specrank/simulator.hpp"
#include "specrank/spectral.hpp"

using namespace specrank;

TEST_CASE("local noise level arithmetic", "[spectral]") {
  // n = 32400, eta = 0.001, nh = 50
  const double h = 50.0 / 32400.0;
  REQUIRE(local_noise_level(32400, h, 0.001) ==
          Catch::Approx(0.011309733552923255).epsilon(1e-12));
  REQUIRE(local_noise_level(32400, h, 0.0) == 0.0);
  REQUIRE(local_noise_level(1000, 0.2, 0.01) ==
          Catch::Approx(2.0 * local_noise_level(1000, 0.4, 0.01)).epsilon(1e-12));
  REQUIRE_THROWS_AS(local_noise_level(1000, 0.0, 0.01), InvalidInputError);
}

TEST_CASE("spectral stats vanish on a constant path", "[spectral]") {
  ObservationGrid grid;
  grid.n = 200;
  grid.d = 3;
  grid.values = Matrix::Ones(201, 3) * 4.2;
  const Block block = partition_block(grid, 50, 1);
  const SpectralStats stats = spectral_stats(grid, block, 10);
  REQUIRE(stats.S.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single unit increment picks out the sine value", "[spectral]") {
  ObservationGrid grid;
  grid.n = 100;
  grid.d = 2;
  grid.values = Matrix::Zero(101, 2);
  // one unit step in coordinate 1 at increment i* = 30
  for (long i = 30; i <= 100; ++i) grid.values(i, 1) = 1.0;

  const Block block = partition_block(grid, 50, 0);  // covers i = 1..50
  const int J = 6;
  const SpectralStats stats = spectral_stats(grid, block, J);
  const double mid = (30.0 - 0.5) / 100.0;
  for (int j = 1; j <= J; ++j) {
    const double phi = std::sqrt(2.0 / block.h) *
                       std::sin(j * std::numbers::pi * (mid - block.t) / block.h);
    REQUIRE(stats.S(j - 1, 0) == 0.0);
    REQUIRE(stats.S(j - 1, 1) == Catch::Approx(phi).epsilon(1e-12));
  }
}

TEST_CASE("block too small is rejected with the minimum named", "[spectral]") {
  ObservationGrid grid;
  grid.n = 100;
  grid.d = 1;
  grid.values = Matrix::Zero(101, 1);
  const Block block = partition_block(grid, 10, 0);
  try {
    spectral_stats(grid, block, 8);
    FAIL("expected InvalidInputError");
  } catch (const InvalidInputError& e) {
    REQUIRE(std::string(e.what()).find("16") != std::string::npos);
  }
}

TEST_CASE("pure-noise second moments reproduce the j^2 eps^2 law",
          "[spectral]") {
  // E[S_j S_j^T] = j^2 eps^2 I_d for pure noise; midpoint discretization
  // error is O((j/nh)^2), so nh = 400 keeps it far below the MC tolerance.
  SimScenario scn;
  scn.kind = ScenarioKind::PureNoise;
  scn.d = 2;
  scn.n = 40000;
  scn.eta = 0.01;
  const long m = 400;
  const int J = 15;
  const int reps = 40;

  Matrix acc1 = Matrix::Zero(3, 2);  // diag sums for j in {1, 5, 15}
  Matrix acc_off = Matrix::Zero(3, 1);
  long count = 0;
  for (int rep = 0; rep < reps; ++rep) {
    scn.seed = 1000 + static_cast<std::uint64_t>(rep);
    const ObservationGrid grid = simulate_scenario(scn);
    const long K = grid.n / m;
    for (long k = 0; k < K; ++k) {
      const SpectralStats stats =
          spectral_stats(grid, partition_block(grid, m, k), J);
      int row = 0;
      for (int j : {1, 5, 15}) {
        acc1(row, 0) += stats.S(j - 1, 0) * stats.S(j - 1, 0);
        acc1(row, 1) += stats.S(j - 1, 1) * stats.S(j - 1, 1);
        acc_off(row, 0) += stats.S(j - 1, 0) * stats.S(j - 1, 1);
        ++row;
      }
      ++count;
    }
  }
  const double eps =
      local_noise_level(scn.n, static_cast<double>(m) / scn.n, scn.eta);
  int row = 0;
  for (int j : {1, 5, 15}) {
    const double target = j * j * eps * eps;
    const double se = std::sqrt(2.0 / count) * target;  // Var(chi2) = 2
    for (int c = 0; c < 2; ++c) {
      REQUIRE(acc1(row, c) / count == Catch::Approx(target).margin(5.0 * se));
    }
    REQUIRE(std::abs(acc_off(row, 0) / count) < 5.0 * target / std::sqrt(count));
    ++row;
  }
}

TEST_CASE("local estimate basics", "[spectral]") {
  const SpectralWeights w = make_weights(2.0, 3, WeightsMode::FiniteRenorm);
  SpectralStats stats;
  stats.J = 3;
  stats.S = Matrix::Zero(3, 4);
  const double eps = 0.3;

  SECTION("zero statistics") {
    const LocalEstimate est = local_estimate(stats, w, eps);
    REQUIRE(est.C_hat.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(est.eigenvalues_C.cwiseAbs().maxCoeff() == 0.0);
    const Matrix expected =
        -w.B_w * eps * eps * Matrix::Identity(4, 4);
    REQUIRE(est.Sigma_hat == expected);
  }

  SECTION("rank-one statistic") {
    SpectralWeights w1;
    w1.M = 1.0;
    w1.J = 1;
    w1.mode = WeightsMode::FiniteRenorm;
    w1.w = Vector::Ones(1);
    w1.B_w = 1.0;
    w1.l2_j2w = 1.0;
    SpectralStats s1;
    s1.J = 1;
    s1.S = Matrix::Zero(1, 4);
    s1.S(0, 0) = 1.0;
    const LocalEstimate est = local_estimate(s1, w1, 0.0);
    REQUIRE(est.C_hat(0, 0) == 1.0);
    REQUIRE(est.C_hat.norm() == 1.0);
    REQUIRE(est.eigenvalues_C(0) == Catch::Approx(1.0));
    for (int i = 1; i < 4; ++i) {
      REQUIRE(est.eigenvalues_C(i) == Catch::Approx(0.0).margin(1e-14));
    }
  }

  SECTION("J mismatch") {
    const SpectralWeights w2 = make_weights(2.0, 5, WeightsMode::FiniteRenorm);
    REQUIRE_THROWS_AS(local_estimate(stats, w2, eps), InvalidInputError);
  }
}

TEST_CASE("debiasing identity is the exact stored subtraction", "[spectral]") {
  SimScenario scn;
  scn.kind = ScenarioKind::H0RankR;
  scn.d = 5;
  scn.n = 4000;
  scn.eta = 0.002;
  scn.seed = 99;
  const ObservationGrid grid = simulate_scenario(scn);
  const SpectralWeights w = make_weights(10.0, 15, WeightsMode::FiniteRenorm);
  const long m = 100;
  const double eps =
      local_noise_level(grid.n, static_cast<double>(m) / grid.n, grid.meta.eta);
  for (long k = 0; k < grid.n / m; ++k) {
    const SpectralStats stats =
        spectral_stats(grid, partition_block(grid, m, k), 15);
    const LocalEstimate est = local_estimate(stats, w, eps);
    const Matrix recomputed =
        est.C_hat - (w.B_w * eps * eps) * Matrix::Identity(5, 5);
    REQUIRE(std::memcmp(est.Sigma_hat.data(), recomputed.data(),
                        sizeof(double) * 25) == 0);
    // C_hat is PSD up to round-off
    REQUIRE(est.eigenvalues_C(4) >= -1e-12);
  }
}

TEST_CASE("pure-noise estimator is debiased", "[spectral]") {
  // mean of Sigma_hat over 1e4 blocks should sit within 3 MC standard
  // errors of zero entrywise (nh = 400 keeps the discretization bias small)
  SimScenario scn;
  scn.kind = ScenarioKind::PureNoise;
  scn.d = 2;
  scn.n = 40000;
  scn.eta = 0.01;
  const long m = 400;
  const SpectralWeights w = make_weights(10.0, 15, WeightsMode::FiniteRenorm);
  const double eps =
      local_noise_level(scn.n, static_cast<double>(m) / scn.n, scn.eta);

  Matrix sum = Matrix::Zero(2, 2);
  Matrix sumsq = Matrix::Zero(2, 2);
  long count = 0;
  for (int rep = 0; rep < 100; ++rep) {
    scn.seed = 7000 + static_cast<std::uint64_t>(rep);
    const ObservationGrid grid = simulate_scenario(scn);
    for (long k = 0; k < grid.n / m; ++k) {
      const SpectralStats stats =
          spectral_stats(grid, partition_block(grid, m, k), 15);
      const LocalEstimate est = local_estimate(stats, w, eps);
      sum += est.Sigma_hat;
      sumsq += est.Sigma_hat.cwiseProduct(est.Sigma_hat);
      ++count;
    }
  }
  REQUIRE(count == 10000);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double mean = sum(a, b) / count;
      const double var = sumsq(a, b) / count - mean * mean;
      const double se = std::sqrt(var / count);
      INFO("entry " << a << "," << b);
      REQUIRE(std::abs(mean) <= 3.0 * se);
    }
  }
}

TEST_CASE("discrete sine system is orthonormal on aligned blocks",
          "[spectral]") {
  ObservationGrid grid;
  grid.n = 2000;
  grid.d = 1;
  grid.values = Matrix::Zero(2001, 1);
  const int J = 10;
  const long m = 200;  // nh = 20 J
  const Block block = partition_block(grid, m, 3);

  const double norm = std::sqrt(2.0 / block.h);
  Matrix gram = Matrix::Zero(J, J);
  for (long l = 0; l < m; ++l) {
    const double mid = (block.first_increment + l - 0.5) / 2000.0;
    const double x = (mid - block.t) / block.h;
    Vector phi(J);
    for (int j = 1; j <= J; ++j) {
      phi(j - 1) = norm * std::sin(j * std::numbers::pi * x);
    }
    gram += phi * phi.transpose();
  }
  gram *= block.h / static_cast<double>(m);
  REQUIRE((gram - Matrix::Identity(J, J)).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("bias0 branches", "[spectral]") {
  HypothesisParams p;
  p.r = 1;
  p.beta = 0.5;
  p.L = 1.0;
  p.lambda_gap = 1.0;
  REQUIRE(bias0(p, 0.01) == Catch::Approx(0.05).epsilon(1e-12));

  p.lambda_gap = 0.0;
  REQUIRE(bias0(p, 0.01) == Catch::Approx(0.2).epsilon(1e-12));

  // branches cross where gap = (r+4) L h^beta / 2
  p.lambda_gap = 2.5 * std::sqrt(0.01);
  const double first = 2.0 * std::sqrt(0.01);
  REQUIRE(bias0(p, 0.01) == Catch::Approx(first).epsilon(1e-12));

  // monotone in h
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    HypothesisParams q;
    q.r = 1 + static_cast<int>(rng.uniform() * 4);
    q.beta = 0.1 + 0.9 * rng.uniform();
    q.L = 0.1 + 2.0 * rng.uniform();
    q.lambda_gap = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    const double h1 = 0.001 + 0.3 * rng.uniform();
    const double h2 = h1 * (1.0 + rng.uniform());
    REQUIRE(bias0(q, h1) <= bias0(q, h2) + 1e-15);
  }
}

TEST_CASE("exact covariance for constant Sigma", "[spectral]") {
  SECTION("pure-noise scalar case: 2 eps^4") {
    SpectralWeights w;
    w.M = 1.0;
    w.J = 1;
    w.mode = WeightsMode::FiniteRenorm;
    w.w = Vector::Ones(1);
    w.B_w = 1.0;
    w.l2_j2w = 1.0;
    const double eps = 0.7;
    const Matrix cov = exact_cov_constant_sigma(Matrix::Zero(1, 1), w, eps);
    REQUIRE(cov.rows() == 1);
    REQUIRE(cov(0, 0) ==
            Catch::Approx(2.0 * std::pow(eps, 4.0)).epsilon(1e-12));
  }

  SECTION("additivity over frequencies") {
    SpectralWeights w2;
    w2.M = 1.0;
    w2.J = 2;
    w2.mode = WeightsMode::FiniteRenorm;
    w2.w = Eigen::Vector2d(0.6, 0.4);

    SpectralWeights first = w2, second = w2;
    first.J = 1;
    first.w = Vector::Ones(1) * 0.6;

    Matrix sigma(2, 2);
    sigma << 1.0, 0.25, 0.25, 0.5;
    const double eps = 0.3;

    // the j = 2 only part: evaluate with w = (0, 0.4)
    SpectralWeights second_padded = w2;
    second_padded.w = Eigen::Vector2d(0.0, 0.4);

    const Matrix total = exact_cov_constant_sigma(sigma, w2, eps);
    const Matrix part1 = exact_cov_constant_sigma(sigma, first, eps);
    const Matrix part2 = exact_cov_constant_sigma(sigma, second_padded, eps);
    REQUIRE((total - part1 - part2).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("identity Sigma, no noise: Wick structure by Monte Carlo") {
    SpectralWeights w;
    w.M = 1.0;
    w.J = 1;
    w.mode = WeightsMode::FiniteRenorm;
    w.w = Vector::Ones(1);
    w.B_w = 1.0;
    w.l2_j2w = 1.0;
    const Matrix exact =
        exact_cov_constant_sigma(Matrix::Identity(2, 2), w, 0.0);
    Rng rng(606);
    const int n = 4000000;
    Vector mean = Vector::Zero(4);
    Matrix acc = Matrix::Zero(4, 4);
    Vector zeta(2);
    for (int i = 0; i < n; ++i) {
      zeta(0) = rng.gauss();
      zeta(1) = rng.gauss();
      const Matrix outer = zeta * zeta.transpose();
      const Eigen::Map<const Vector> u(outer.data(), 4);
      mean += u;
      acc += u * u.transpose();
    }
    mean /= n;
    const Matrix cov = acc / n - mean * mean.transpose();
    REQUIRE((cov - exact).cwiseAbs().maxCoeff() < 0.01);
  }

  SECTION("rejects non-PSD input") {
    const SpectralWeights w = make_weights(2.0, 2, WeightsMode::FiniteRenorm);
    Matrix bad(2, 2);
    bad << 1.0, 0.0, 0.0, -0.5;
    REQUIRE_THROWS_AS(exact_cov_constant_sigma(bad, w, 0.1),
                      InvalidInputError);
  }
}
