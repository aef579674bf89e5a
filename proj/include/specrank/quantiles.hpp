#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "specrank/matrix_tools.hpp"
#include "specrank/weights.hpp"

namespace specrank {

enum class StatisticKind { GoeMaxEig, LambdaM, LambdaMMaxK };

inline constexpr long kMinQuantileSims = 10'000;
inline constexpr long kDefaultQuantileSims = 200'000;
inline constexpr long kDefaultMaxKQuantileSims = 2'000'000;
inline constexpr std::uint64_t kDefaultQuantileSeed = 20230504;

/// Lambda_M = lambda_max(sum_{j<=J} w_j j^2 zeta_j zeta_j^T) with independent
/// zeta_j ~ N(0, I_{dim_reduced}); the finite-M pure-noise law of the test
/// statistic. Draws J * dim_reduced gaussians in frequency-major order.
double sample_lambda_m(int dim_reduced, const SpectralWeights& weights,
                       Rng& rng);

/// Deterministic core of sample_lambda_m: zeta columns supplied explicitly
/// (dim_reduced x J).
double lambda_m_of(const Matrix& zeta, const SpectralWeights& weights);

struct QuantileKey {
  StatisticKind kind = StatisticKind::GoeMaxEig;
  int dim = 1;        // GOE dimension or d - r
  double M = 0.0;     // Lambda kinds only
  int J = 0;          // Lambda kinds only
  WeightsMode weights_mode = WeightsMode::FiniteRenorm;
  int K = 1;          // LambdaMMaxK only
  long nsim = 0;
  std::uint64_t seed = 0;
};

struct QuantileTable {
  QuantileKey key;
  std::vector<double> alphas;     // as requested
  std::vector<double> quantiles;  // matching 1-alpha empirical quantiles
};

/// Monte Carlo quantiles of the calibration laws, memoized in memory and
/// optionally persisted as one JSON file per key. Tables are bit-for-bit
/// reproducible given (seed, nsim, statistic kind, parameters): sampling is
/// split over 256 fixed substreams regardless of thread count.
class QuantileCache {
 public:
  QuantileCache() = default;
  explicit QuantileCache(std::filesystem::path dir);

  /// Empirical (1-alpha)-quantile of lambda_max(GOE(dim)).
  double goe_max_eig_quantile(int dim, double alpha, long nsim,
                              std::uint64_t seed);

  /// Empirical (1-alpha)-quantile of Lambda_M in dimension dim_reduced.
  double lambda_m_quantile(int dim_reduced, const SpectralWeights& weights,
                           double alpha, long nsim, std::uint64_t seed);

  /// Empirical (1-alpha)-quantile of max(Lambda_{M,1},..,Lambda_{M,K});
  /// evaluated through the iid identity P(max <= q) = P(Lambda <= q)^K as the
  /// single-draw quantile at level (1-alpha)^{1/K}. K = 1 coincides exactly
  /// with lambda_m_quantile.
  double lambda_m_max_quantile(int dim_reduced, const SpectralWeights& weights,
                               double alpha, int K, long nsim,
                               std::uint64_t seed);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  double quantile_for(const QuantileKey& key, const SpectralWeights* weights,
                      double alpha);
  const std::vector<double>& sorted_sample(const QuantileKey& key,
                                           const SpectralWeights* weights);

  std::filesystem::path dir_;
  std::map<std::string, std::shared_ptr<std::vector<double>>> samples_;
  std::map<std::string, double> quantile_memo_;
  std::mutex mutex_;
};

const char* to_string(StatisticKind kind);

}  // namespace specrank
