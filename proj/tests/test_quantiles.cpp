#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "specrank/quantiles.hpp"

using namespace specrank;

namespace {

// z_{0.95} and the chi-square(1) 95% quantile, frozen from the standard
// normal inverse cdf: q = z_{0.975}^2.
constexpr double kZ95 = 1.6448536269514722;
constexpr double kChi2_95 = 3.841458820694124;

}  // namespace

TEST_CASE("GOE(1) quantiles against the normal oracle", "[quantiles]") {
  QuantileCache cache;
  const double q95 = cache.goe_max_eig_quantile(1, 0.05, 1000000, 42);
  REQUIRE(std::abs(q95 - std::sqrt(2.0) * kZ95) < 0.02);
  const double median = cache.goe_max_eig_quantile(1, 0.5, 1000000, 42);
  REQUIRE(std::abs(median) < 0.01);
}

TEST_CASE("quantile preconditions", "[quantiles]") {
  QuantileCache cache;
  REQUIRE_THROWS_AS(cache.goe_max_eig_quantile(1, 0.05, 5000, 1),
                    InvalidInputError);
  REQUIRE_THROWS_AS(cache.goe_max_eig_quantile(0, 0.05, 20000, 1),
                    InvalidInputError);
  REQUIRE_THROWS_AS(cache.goe_max_eig_quantile(2, 1.5, 20000, 1),
                    InvalidInputError);
  const SpectralWeights w = make_weights(2.0, 3, WeightsMode::FiniteRenorm);
  REQUIRE_THROWS_AS(cache.lambda_m_max_quantile(2, w, 0.05, 0, 20000, 1),
                    InvalidInputError);
}

TEST_CASE("lambda_m_of evaluates the quadratic form", "[quantiles]") {
  SpectralWeights w;
  w.M = 1.0;
  w.J = 2;
  w.mode = WeightsMode::FiniteRenorm;
  w.w = Eigen::Vector2d(0.7, 0.3);
  w.B_w = 0.7 + 0.3 * 4.0;
  w.l2_j2w = std::sqrt(0.7 * 0.7 + 1.2 * 1.2);

  // degenerate draws: all zeros
  REQUIRE(lambda_m_of(Matrix::Zero(3, 2), w) == 0.0);

  // scalar case agrees with the direct formula per draw
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    Matrix zeta(1, 2);
    zeta << rng.gauss(), rng.gauss();
    const double direct =
        0.7 * zeta(0, 0) * zeta(0, 0) + 4.0 * 0.3 * zeta(0, 1) * zeta(0, 1);
    REQUIRE(lambda_m_of(zeta, w) == Catch::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("Lambda_M quantile matches the chi-square oracle for J=1",
          "[quantiles]") {
  SpectralWeights w;
  w.M = 1.0;
  w.J = 1;
  w.mode = WeightsMode::FiniteRenorm;
  w.w = Vector::Ones(1);
  w.B_w = 1.0;
  w.l2_j2w = 1.0;
  QuantileCache cache;
  const double q = cache.lambda_m_quantile(1, w, 0.05, 1000000, 7);
  REQUIRE(std::abs(q - kChi2_95) < 0.04);
}

TEST_CASE("max-of-K quantile: K=1 identity and dominance", "[quantiles]") {
  const SpectralWeights w = make_weights(3.0, 5, WeightsMode::FiniteRenorm);
  QuantileCache cache;
  const double single = cache.lambda_m_quantile(2, w, 0.05, 50000, 9);
  const double k1 = cache.lambda_m_max_quantile(2, w, 0.05, 1, 50000, 9);
  REQUIRE(single == k1);
  const double k2 = cache.lambda_m_max_quantile(2, w, 0.05, 2, 50000, 9);
  const double k20 = cache.lambda_m_max_quantile(2, w, 0.05, 20, 50000, 9);
  REQUIRE(k2 >= single);
  REQUIRE(k20 >= k2);
}

TEST_CASE("max-of-K quantile against a direct max oracle", "[quantiles]") {
  const SpectralWeights w = make_weights(3.0, 5, WeightsMode::FiniteRenorm);
  const int K = 3;
  QuantileCache cache;
  const double transform = cache.lambda_m_max_quantile(2, w, 0.05, K, 400000, 31);

  // direct simulation of max(Lambda_1..Lambda_K)
  const int reps = 40000;
  std::vector<double> maxima(reps);
  Rng rng(5150);
  for (int i = 0; i < reps; ++i) {
    double mx = -1.0;
    for (int k = 0; k < K; ++k) {
      mx = std::max(mx, sample_lambda_m(2, w, rng));
    }
    maxima[static_cast<size_t>(i)] = mx;
  }
  std::sort(maxima.begin(), maxima.end());
  const double direct = maxima[static_cast<size_t>(
      std::ceil(0.95 * reps)) - 1];
  REQUIRE(transform == Catch::Approx(direct).epsilon(0.03));
}

TEST_CASE("cache file is reproducible and matches the schema", "[quantiles]") {
  const auto dir = std::filesystem::temp_directory_path() / "specrank_qcache";
  std::filesystem::remove_all(dir);
  const SpectralWeights w = make_weights(2.0, 4, WeightsMode::FiniteRenorm);

  auto run = [&] {
    QuantileCache cache(dir);
    return cache.lambda_m_quantile(2, w, 0.1, 20000, 77);
  };
  const double q1 = run();

  std::filesystem::path file;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    file = entry.path();
  }
  REQUIRE(!file.empty());
  std::stringstream bytes1;
  bytes1 << std::ifstream(file).rdbuf();

  // a fresh cache object recomputes, hits the same value, same bytes
  std::filesystem::remove(file);
  const double q2 = run();
  REQUIRE(q1 == q2);
  std::stringstream bytes2;
  bytes2 << std::ifstream(file).rdbuf();
  REQUIRE(bytes1.str() == bytes2.str());

  // third run reads the persisted value without touching the sample
  QuantileCache cache3(dir);
  REQUIRE(cache3.lambda_m_quantile(2, w, 0.1, 20000, 77) == q1);

  const std::string text = bytes1.str();
  for (const char* field :
       {"statistic_kind", "dim", "M", "J", "weights_mode", "K", "nsim",
        "seed", "entries", "alpha", "q", "LAMBDA_M"}) {
    INFO(field);
    REQUIRE(text.find(field) != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("two seeds agree on the study-scale global quantile", "[quantiles]") {
  // dim 9, M=10, J=15, K=648: the global critical value is stable across
  // seeds to about a percent at table size 2e6.
  const SpectralWeights w = make_weights(10.0, 15, WeightsMode::FiniteRenorm);
  QuantileCache cache;
  const double qa = cache.lambda_m_max_quantile(9, w, 0.05, 648, 2000000, 1);
  const double qb = cache.lambda_m_max_quantile(9, w, 0.05, 648, 2000000, 2);
  REQUIRE(qa == Catch::Approx(qb).epsilon(0.01));
}
