#include "specrank/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specrank/parallel.hpp"

namespace specrank {

namespace {

constexpr int kSampleStreams = 256;  // fixed substream count for determinism

std::string format_param(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string sample_id(const QuantileKey& key) {
  std::ostringstream os;
  switch (key.kind) {
    case StatisticKind::GoeMaxEig:
      os << "goe_d" << key.dim;
      break;
    case StatisticKind::LambdaM:
    case StatisticKind::LambdaMMaxK:
      os << "lambdam_d" << key.dim << "_M" << format_param(key.M) << "_J"
         << key.J << "_" << (key.weights_mode == WeightsMode::FiniteRenorm
                                 ? "renorm"
                                 : "cw");
      break;
  }
  os << "_n" << key.nsim << "_s" << key.seed;
  return os.str();
}

std::string file_name(const QuantileKey& key) {
  std::ostringstream os;
  switch (key.kind) {
    case StatisticKind::GoeMaxEig:
      os << "goe_d" << key.dim;
      break;
    case StatisticKind::LambdaM:
      os << "lambdam_d" << key.dim << "_M" << format_param(key.M) << "_J"
         << key.J << "_"
         << (key.weights_mode == WeightsMode::FiniteRenorm ? "renorm" : "cw");
      break;
    case StatisticKind::LambdaMMaxK:
      os << "lambdammax_d" << key.dim << "_M" << format_param(key.M) << "_J"
         << key.J << "_"
         << (key.weights_mode == WeightsMode::FiniteRenorm ? "renorm" : "cw")
         << "_K" << key.K;
      break;
  }
  os << "_n" << key.nsim << "_s" << key.seed << ".json";
  return os.str();
}

double empirical_quantile(const std::vector<double>& sorted, double level) {
  const long n = static_cast<long>(sorted.size());
  long idx = static_cast<long>(std::ceil(level * static_cast<double>(n)));
  idx = std::clamp<long>(idx, 1, n);
  return sorted[static_cast<size_t>(idx - 1)];
}

void validate_common(int dim, double alpha, long nsim) {
  if (dim < 1) throw InvalidInputError("quantile: dim must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidInputError("quantile: alpha must be in (0,1)");
  }
  if (nsim < kMinQuantileSims) {
    throw InvalidInputError("quantile: nsim = " + std::to_string(nsim) +
                            " is below the minimum of " +
                            std::to_string(kMinQuantileSims));
  }
}

nlohmann::json key_to_json(const QuantileKey& key) {
  nlohmann::json j;
  j["statistic_kind"] = to_string(key.kind);
  j["dim"] = key.dim;
  if (key.kind == StatisticKind::GoeMaxEig) {
    j["M"] = nullptr;
    j["J"] = nullptr;
    j["weights_mode"] = nullptr;
  } else {
    j["M"] = key.M;
    j["J"] = key.J;
    j["weights_mode"] = to_string(key.weights_mode);
  }
  if (key.kind == StatisticKind::LambdaMMaxK) {
    j["K"] = key.K;
  } else {
    j["K"] = nullptr;
  }
  j["nsim"] = key.nsim;
  j["seed"] = key.seed;
  return j;
}

}  // namespace

double lambda_m_of(const Matrix& zeta, const SpectralWeights& weights) {
  if (zeta.cols() != weights.J) {
    throw InvalidInputError("lambda_m_of: zeta must have J columns");
  }
  const int dim = static_cast<int>(zeta.rows());
  Matrix a = Matrix::Zero(dim, dim);
  for (int j = 1; j <= weights.J; ++j) {
    const double scale = weights.w(j - 1) * static_cast<double>(j) * j;
    a.selfadjointView<Eigen::Lower>().rankUpdate(zeta.col(j - 1), scale);
  }
  if (dim == 1) return a(0, 0);
  // The solver only references the lower triangle.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(dim - 1);
}

double sample_lambda_m(int dim_reduced, const SpectralWeights& weights,
                       Rng& rng) {
  if (dim_reduced < 1) {
    throw InvalidInputError("sample_lambda_m: dim_reduced must be >= 1");
  }
  Matrix zeta(dim_reduced, weights.J);
  for (int j = 0; j < weights.J; ++j) {
    for (int i = 0; i < dim_reduced; ++i) zeta(i, j) = rng.gauss();
  }
  return lambda_m_of(zeta, weights);
}

QuantileCache::QuantileCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

const std::vector<double>& QuantileCache::sorted_sample(
    const QuantileKey& key, const SpectralWeights* weights) {
  const std::string id = sample_id(key);
  {
    std::lock_guard lock(mutex_);
    auto it = samples_.find(id);
    if (it != samples_.end()) return *it->second;
  }

  auto sample = std::make_shared<std::vector<double>>(
      static_cast<size_t>(key.nsim));
  const long nsim = key.nsim;
  const long per = (nsim + kSampleStreams - 1) / kSampleStreams;
  const long chunks = (nsim + per - 1) / per;
  parallel_for(chunks, [&](long c) {
    Rng rng = Rng::stream(key.seed, static_cast<std::uint64_t>(c));
    const long begin = c * per;
    const long end = std::min(nsim, begin + per);
    for (long i = begin; i < end; ++i) {
      double v = 0.0;
      if (key.kind == StatisticKind::GoeMaxEig) {
        v = sample_goe_max_eig(key.dim, rng);
      } else {
        v = sample_lambda_m(key.dim, *weights, rng);
      }
      (*sample)[static_cast<size_t>(i)] = v;
    }
  });
  std::sort(sample->begin(), sample->end());

  std::lock_guard lock(mutex_);
  auto [it, inserted] = samples_.emplace(id, std::move(sample));
  return *it->second;
}

double QuantileCache::quantile_for(const QuantileKey& key,
                                   const SpectralWeights* weights,
                                   double alpha) {
  const std::string memo_key = file_name(key) + "@" + format_param(alpha);
  {
    std::lock_guard lock(mutex_);
    auto it = quantile_memo_.find(memo_key);
    if (it != quantile_memo_.end()) return it->second;
  }
  if (!dir_.empty()) {
    const auto path = dir_ / file_name(key);
    std::lock_guard lock(mutex_);
    std::ifstream in(path);
    if (in) {
      nlohmann::json j;
      try {
        in >> j;
        for (const auto& entry : j.at("entries")) {
          if (entry.at("alpha").get<double>() == alpha) {
            const double q = entry.at("q").get<double>();
            quantile_memo_.emplace(memo_key, q);
            return q;
          }
        }
      } catch (const nlohmann::json::exception&) {
        // unreadable cache entry: fall through and recompute
      }
    }
  }

  // LambdaMMaxK reads off the same single-draw sample at level (1-a)^{1/K}.
  QuantileKey sample_key = key;
  if (sample_key.kind == StatisticKind::LambdaMMaxK) {
    sample_key.kind = StatisticKind::LambdaM;
  }
  const auto& sorted = sorted_sample(sample_key, weights);
  const double level =
      key.kind == StatisticKind::LambdaMMaxK
          ? std::pow(1.0 - alpha, 1.0 / static_cast<double>(key.K))
          : 1.0 - alpha;
  const double q = empirical_quantile(sorted, level);

  if (!dir_.empty()) {
    const auto path = dir_ / file_name(key);
    std::lock_guard lock(mutex_);
    nlohmann::json j = key_to_json(key);
    nlohmann::json entries = nlohmann::json::array();
    std::vector<std::pair<double, double>> rows;
    {
      std::ifstream in(path);
      if (in) {
        nlohmann::json old;
        try {
          in >> old;
          for (const auto& entry : old.at("entries")) {
            rows.emplace_back(entry.at("alpha").get<double>(),
                              entry.at("q").get<double>());
          }
        } catch (const nlohmann::json::exception&) {
          rows.clear();
        }
      }
    }
    bool present = false;
    for (const auto& [a, _] : rows) present = present || (a == alpha);
    if (!present) rows.emplace_back(alpha, q);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [a, v] : rows) {
      entries.push_back({{"alpha", a}, {"q", v}});
    }
    j["entries"] = entries;
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
  }
  {
    std::lock_guard lock(mutex_);
    quantile_memo_.emplace(memo_key, q);
  }
  return q;
}

double QuantileCache::goe_max_eig_quantile(int dim, double alpha, long nsim,
                                           std::uint64_t seed) {
  validate_common(dim, alpha, nsim);
  QuantileKey key;
  key.kind = StatisticKind::GoeMaxEig;
  key.dim = dim;
  key.nsim = nsim;
  key.seed = seed;
  return quantile_for(key, nullptr, alpha);
}

double QuantileCache::lambda_m_quantile(int dim_reduced,
                                        const SpectralWeights& weights,
                                        double alpha, long nsim,
                                        std::uint64_t seed) {
  validate_common(dim_reduced, alpha, nsim);
  QuantileKey key;
  key.kind = StatisticKind::LambdaM;
  key.dim = dim_reduced;
  key.M = weights.M;
  key.J = weights.J;
  key.weights_mode = weights.mode;
  key.nsim = nsim;
  key.seed = seed;
  return quantile_for(key, &weights, alpha);
}

double QuantileCache::lambda_m_max_quantile(int dim_reduced,
                                            const SpectralWeights& weights,
                                            double alpha, int K, long nsim,
                                            std::uint64_t seed) {
  validate_common(dim_reduced, alpha, nsim);
  if (K < 1) throw InvalidInputError("lambda_m_max_quantile: K must be >= 1");
  QuantileKey key;
  key.kind = StatisticKind::LambdaMMaxK;
  key.dim = dim_reduced;
  key.M = weights.M;
  key.J = weights.J;
  key.weights_mode = weights.mode;
  key.K = K;
  key.nsim = nsim;
  key.seed = seed;
  return quantile_for(key, &weights, alpha);
}

const char* to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::GoeMaxEig:
      return "GOE_MAX_EIG";
    case StatisticKind::LambdaM:
      return "LAMBDA_M";
    case StatisticKind::LambdaMMaxK:
      return "LAMBDA_M_MAX_K";
  }
  return "?";
}

}  // namespace specrank
