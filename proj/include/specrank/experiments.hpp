#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specrank/rank_tests.hpp"

namespace specrank {

/// Monte Carlo plan: replications are the unit of parallelism, with one
/// derived rng stream per replication, so every result is reproducible
/// bit-for-bit from master_seed.
struct McPlan {
  std::string mode;  // size | power | clt | deviation
  int reps = 0;
  SimScenario scenario;
  TestConfig config;
  std::vector<double> alphas;        // size mode
  std::vector<double> lambda2_grid;  // power mode
  std::vector<long> nh_grid;         // power mode (block length in increments)
  std::uint64_t master_seed = kDefaultQuantileSeed;
  std::string out_dir;
  // clt mode
  Matrix clt_sigma;
  long clt_n = 0;
  double clt_h = 1.0;
  double clt_eta = 0.0;
  // deviation mode
  Vector deviation_s;
  int deviation_dim = 1;
  std::vector<double> deviation_alphas;
};

struct SizeResult {
  std::vector<double> alphas;
  std::vector<double> rates;
  std::vector<double> se;          // binomial, on pooled blocks
  long pooled_blocks = 0;
  int reps = 0;
  std::uint64_t master_seed = 0;
};

/// Block-level H0 rejection frequency per alpha, pooled across replications.
SizeResult mc_size(const McPlan& plan, QuantileCache& cache);

struct PowerResult {
  std::vector<double> lambda2_grid;
  std::vector<long> nh_grid;
  Matrix power;  // lambda2 x nh
  Matrix se;
  int reps = 0;
  std::uint64_t master_seed = 0;
};

/// Global-test rejection frequency per (lambda2*, nh) cell. lambda2* = 0
/// cells run the matching H0 scenario.
PowerResult mc_power(const McPlan& plan, QuantileCache& cache);

struct CltResult {
  Matrix empirical;  // d^2 x d^2 covariance of vec(Sigma_hat)
  Matrix exact;
  double rel_frobenius_error = 0.0;
  double max_abs_z = 0.0;  // per-entry z-scores against MC standard errors
  int reps = 0;
};

/// One draw of Sigma_hat for constant Sigma from the exact Gaussian law of
/// the spectral statistics: S_j ~ N(0, Sigma + j^2 eps^2 I), independent
/// across j.
Matrix sample_sigma_hat_const(const EigSym& sigma_eig,
                              const SpectralWeights& weights, double eps,
                              Rng& rng);

/// Empirical Cov(vec(Sigma_hat)) against the exact constant-Sigma oracle.
CltResult mc_clt_check(const Matrix& Sigma, const SpectralWeights& weights,
                       long n, double h, double eta, int reps,
                       std::uint64_t master_seed);

struct DeviationCheckResult {
  std::vector<double> alphas;
  std::vector<double> bounds;
  std::vector<double> exceedance;  // P(lambda_max > bound(alpha))
  std::vector<double> se;
  int reps = 0;
};

/// Empirical exceedance of the matrix deviation bound for independent
/// Gamma_j ~ N(0, s_j I_d).
DeviationCheckResult mc_deviation_check(const Vector& s, int d,
                                        const std::vector<double>& alphas,
                                        int reps, std::uint64_t master_seed);

enum class FigureKind { Fig1Left, Fig1Right, Table1Style };

struct Fig1LeftData {
  std::vector<double> standardized_exact;  // (stat - B_w eps^2)/(||j^2w||_2 eps^2)
  std::vector<double> standardized_asymp;  // same with sqrt(M^3/(2 pi)) denominator
  std::vector<double> lambda_m_standardized;
  std::vector<double> goe_max_eig;
};

/// Plot-ready CSV emitters (histogram bins, power curves, rank fractions).
std::filesystem::path emit_figure_data(const Fig1LeftData& data,
                                       const std::filesystem::path& dir);
std::filesystem::path emit_figure_data(const PowerResult& result,
                                       const std::filesystem::path& dir);
struct RankFractionRow {
  long block_seconds = 0;
  long K = 0;
  std::vector<double> fractions;
  double fraction_none = 0.0;
};
std::filesystem::path emit_figure_data(const std::vector<RankFractionRow>& rows,
                                       int r_max,
                                       const std::filesystem::path& dir);

McPlan load_mc_plan(const std::filesystem::path& file);

/// Runs the plan's mode end to end, writes results CSV + manifest.json into
/// plan.out_dir, and returns the list of primary output files.
std::vector<std::filesystem::path> run_mc_plan(const McPlan& plan,
                                               QuantileCache& cache);

}  // namespace specrank
