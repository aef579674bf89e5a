#include "specrank/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "specrank/io.hpp"
#include "specrank/parallel.hpp"
#include "specrank/version.hpp"

namespace specrank {

namespace {

double binomial_se(double p, double n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

void write_lines(const std::filesystem::path& file,
                 const std::vector<std::string>& lines) {
  std::ofstream out(file);
  if (!out) throw FileIoError("cannot write " + file.string());
  for (const auto& line : lines) out << line << "\n";
}

}  // namespace

SizeResult mc_size(const McPlan& plan, QuantileCache& cache) {
  if (plan.alphas.empty()) throw InvalidInputError("mc_size: no alphas");
  if (plan.reps < 1) throw InvalidInputError("mc_size: reps must be >= 1");
  const SessionPartition part =
      partition_session(plan.scenario.n, plan.config.h);
  if (plan.reps * part.K < 100) {
    throw InvalidInputError("mc_size: fewer than 100 pooled block statistics");
  }

  const SpectralWeights weights =
      make_weights(plan.config.M, plan.config.J, plan.config.weights_mode);
  const double eps =
      local_noise_level(plan.scenario.n, part.h, plan.scenario.eta);

  // One critical value per alpha; the same eps applies to every block.
  std::vector<double> kappas(plan.alphas.size());
  for (size_t a = 0; a < plan.alphas.size(); ++a) {
    TestConfig cfg = plan.config;
    cfg.alpha = plan.alphas[a];
    switch (cfg.variant) {
      case TestVariant::NonAsym:
        kappas[a] = kappa0(cfg.alpha, cfg.M, plan.scenario.d, cfg.r,
                           bias0(*cfg.hypothesis, part.h), eps, cfg.constants);
        break;
      case TestVariant::Goe:
        kappas[a] =
            kappa1(cfg.alpha, plan.scenario.d, cfg.r, eps, weights,
                   cache.goe_max_eig_quantile(plan.scenario.d - cfg.r,
                                              cfg.alpha, cfg.nsim,
                                              cfg.quantile_seed));
        break;
      case TestVariant::Sim:
        kappas[a] = kappa2(cfg.alpha, plan.scenario.d, cfg.r, eps, weights,
                           cache, cfg.nsim, cfg.quantile_seed);
        break;
    }
  }

  Matrix stats(plan.reps, part.K);
  parallel_for(plan.reps, [&](long rep) {
    SimScenario scn = plan.scenario;
    scn.seed = mix_seed(plan.master_seed, static_cast<std::uint64_t>(rep));
    const ObservationGrid grid = simulate_scenario(scn);
    for (long k = 0; k < part.K; ++k) {
      const Block block = partition_block(grid, part.m, k);
      const SpectralStats s = spectral_stats(grid, block, plan.config.J);
      const LocalEstimate est = local_estimate(s, weights, eps);
      stats(rep, k) = est.eigenvalues_C(plan.config.r);
    }
  });

  SizeResult out;
  out.alphas = plan.alphas;
  out.reps = plan.reps;
  out.master_seed = plan.master_seed;
  out.pooled_blocks = static_cast<long>(plan.reps) * part.K;
  out.rates.resize(plan.alphas.size());
  out.se.resize(plan.alphas.size());
  for (size_t a = 0; a < plan.alphas.size(); ++a) {
    long hits = 0;
    for (long rep = 0; rep < plan.reps; ++rep) {
      for (long k = 0; k < part.K; ++k) {
        if (stats(rep, k) > kappas[a]) ++hits;
      }
    }
    const double p = static_cast<double>(hits) / out.pooled_blocks;
    out.rates[a] = p;
    out.se[a] = binomial_se(p, static_cast<double>(out.pooled_blocks));
  }
  return out;
}

PowerResult mc_power(const McPlan& plan, QuantileCache& cache) {
  if (plan.lambda2_grid.empty() || plan.nh_grid.empty()) {
    throw InvalidInputError("mc_power: empty lambda2 or nh grid");
  }
  if (plan.reps < 100) throw InvalidInputError("mc_power: needs reps >= 100");

  PowerResult out;
  out.lambda2_grid = plan.lambda2_grid;
  out.nh_grid = plan.nh_grid;
  out.reps = plan.reps;
  out.master_seed = plan.master_seed;
  out.power.resize(static_cast<Eigen::Index>(plan.lambda2_grid.size()),
                   static_cast<Eigen::Index>(plan.nh_grid.size()));
  out.se.resizeLike(out.power);

  for (size_t li = 0; li < plan.lambda2_grid.size(); ++li) {
    for (size_t hi = 0; hi < plan.nh_grid.size(); ++hi) {
      const double lambda2 = plan.lambda2_grid[li];
      const long nh = plan.nh_grid[hi];
      TestConfig cfg = plan.config;
      cfg.global = true;
      cfg.h = static_cast<double>(nh) / static_cast<double>(plan.scenario.n);

      SimScenario scn = plan.scenario;
      if (lambda2 > 0.0) {
        scn.kind = ScenarioKind::H1RankR1;
        scn.lambda2_star = lambda2;
        scn.base_diag.clear();
      } else {
        scn.kind = ScenarioKind::H0RankR;
        scn.lambda2_star = 0.0;
        scn.base_diag.clear();
      }

      const std::uint64_t cell_seed =
          mix_seed(plan.master_seed, li * 1000003ULL + hi);
      std::vector<char> rejected(static_cast<size_t>(plan.reps), 0);
      // First replication runs alone so the shared quantile table for this
      // (dim, K) is built once, not once per thread.
      {
        SimScenario rep_scn = scn;
        rep_scn.seed = mix_seed(cell_seed, 0);
        const ObservationGrid grid = simulate_scenario(rep_scn);
        rejected[0] = global_test(grid, cfg, cache).reject_global ? 1 : 0;
      }
      parallel_for(plan.reps - 1, [&](long i) {
        const long rep = i + 1;
        SimScenario rep_scn = scn;
        rep_scn.seed = mix_seed(cell_seed, static_cast<std::uint64_t>(rep));
        const ObservationGrid grid = simulate_scenario(rep_scn);
        rejected[static_cast<size_t>(rep)] =
            global_test(grid, cfg, cache).reject_global ? 1 : 0;
      });

      double hits = 0.0;
      for (char c : rejected) hits += c;
      const double p = hits / plan.reps;
      out.power(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(hi)) = p;
      out.se(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(hi)) =
          binomial_se(p, plan.reps);
    }
  }
  return out;
}

Matrix sample_sigma_hat_const(const EigSym& sigma_eig,
                              const SpectralWeights& weights, double eps,
                              Rng& rng) {
  const int d = static_cast<int>(sigma_eig.eigenvalues.size());
  Matrix c = Matrix::Zero(d, d);
  Vector g(d);
  Vector s(d);
  for (int j = 1; j <= weights.J; ++j) {
    const double noise = static_cast<double>(j) * j * eps * eps;
    for (int i = 0; i < d; ++i) {
      g(i) = rng.gauss() *
             std::sqrt(std::max(sigma_eig.eigenvalues(i), 0.0) + noise);
    }
    s.noalias() = sigma_eig.eigenvectors * g;
    c.selfadjointView<Eigen::Lower>().rankUpdate(s, weights.w(j - 1));
  }
  Matrix full = c.selfadjointView<Eigen::Lower>();
  full -= (weights.B_w * eps * eps) * Matrix::Identity(d, d);
  return full;
}

CltResult mc_clt_check(const Matrix& Sigma, const SpectralWeights& weights,
                       long n, double h, double eta, int reps,
                       std::uint64_t master_seed) {
  if (reps < 100) throw InvalidInputError("mc_clt_check: needs reps >= 100");
  const double eps = local_noise_level(n, h, eta);
  const EigSym sigma_eig = eig_sym(Sigma);
  const int d = static_cast<int>(Sigma.rows());
  const int d2 = d * d;

  // Deterministic chunked accumulation (fixed 256 chunks).
  constexpr int kChunks = 256;
  const long per = (reps + kChunks - 1) / kChunks;
  const long chunks = (reps + per - 1) / per;
  std::vector<Vector> chunk_mean(static_cast<size_t>(chunks),
                                 Vector::Zero(d2));
  std::vector<Matrix> chunk_outer(static_cast<size_t>(chunks),
                                  Matrix::Zero(d2, d2));
  std::vector<Matrix> chunk_prod2(static_cast<size_t>(chunks),
                                  Matrix::Zero(d2, d2));
  parallel_for(chunks, [&](long c) {
    Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(c));
    const long begin = c * per;
    const long end = std::min<long>(reps, begin + per);
    Vector mean = Vector::Zero(d2);
    Matrix outer = Matrix::Zero(d2, d2);
    Matrix prod2 = Matrix::Zero(d2, d2);
    for (long i = begin; i < end; ++i) {
      const Matrix sh = sample_sigma_hat_const(sigma_eig, weights, eps, rng);
      const Eigen::Map<const Vector> u(sh.data(), d2);
      mean += u;
      for (int a = 0; a < d2; ++a) {
        for (int b = 0; b < d2; ++b) {
          const double p = u(a) * u(b);
          outer(a, b) += p;
          prod2(a, b) += p * p;
        }
      }
    }
    chunk_mean[static_cast<size_t>(c)] = mean;
    chunk_outer[static_cast<size_t>(c)] = outer;
    chunk_prod2[static_cast<size_t>(c)] = prod2;
  });

  Vector mean = Vector::Zero(d2);
  Matrix outer = Matrix::Zero(d2, d2);
  Matrix prod2 = Matrix::Zero(d2, d2);
  for (long c = 0; c < chunks; ++c) {
    mean += chunk_mean[static_cast<size_t>(c)];
    outer += chunk_outer[static_cast<size_t>(c)];
    prod2 += chunk_prod2[static_cast<size_t>(c)];
  }
  mean /= static_cast<double>(reps);

  CltResult out;
  out.reps = reps;
  out.empirical =
      (outer - static_cast<double>(reps) * (mean * mean.transpose())) /
      (static_cast<double>(reps) - 1.0);
  out.exact = exact_cov_constant_sigma(Sigma, weights, eps);
  out.rel_frobenius_error =
      (out.empirical - out.exact).norm() / out.exact.norm();

  // z-scores from the MC standard error of each product moment.
  double max_z = 0.0;
  for (int a = 0; a < d2; ++a) {
    for (int b = 0; b < d2; ++b) {
      const double m1 = outer(a, b) / reps;
      const double var_prod = prod2(a, b) / reps - m1 * m1;
      const double se = std::sqrt(std::max(var_prod, 0.0) / reps);
      if (se > 0.0) {
        max_z = std::max(max_z,
                         std::abs(out.empirical(a, b) - out.exact(a, b)) / se);
      }
    }
  }
  out.max_abs_z = max_z;
  return out;
}

DeviationCheckResult mc_deviation_check(const Vector& s, int d,
                                        const std::vector<double>& alphas,
                                        int reps, std::uint64_t master_seed) {
  if (alphas.empty()) throw InvalidInputError("mc_deviation_check: no alphas");
  if (reps < 100) throw InvalidInputError("mc_deviation_check: reps >= 100");

  DeviationCheckResult out;
  out.alphas = alphas;
  out.reps = reps;
  out.bounds.resize(alphas.size());
  for (size_t a = 0; a < alphas.size(); ++a) {
    DeviationBoundInputs in;
    in.s = s;
    in.dim = d;
    in.alpha = alphas[a];
    in.delta_grid = default_delta_grid();
    out.bounds[a] = deviation_bound(in);
  }

  std::vector<double> draws(static_cast<size_t>(reps));
  constexpr int kChunks = 256;
  const long per = (reps + kChunks - 1) / kChunks;
  const long chunks = (reps + per - 1) / per;
  parallel_for(chunks, [&](long c) {
    Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(c));
    const long begin = c * per;
    const long end = std::min<long>(reps, begin + per);
    Vector zeta(d);
    for (long i = begin; i < end; ++i) {
      Matrix acc = Matrix::Zero(d, d);
      for (Eigen::Index j = 0; j < s.size(); ++j) {
        for (int k = 0; k < d; ++k) zeta(k) = rng.gauss();
        acc.selfadjointView<Eigen::Lower>().rankUpdate(zeta, s(j));
      }
      if (d == 1) {
        draws[static_cast<size_t>(i)] = acc(0, 0);
      } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(acc,
                                                     Eigen::EigenvaluesOnly);
        draws[static_cast<size_t>(i)] = solver.eigenvalues()(d - 1);
      }
    }
  });

  out.exceedance.resize(alphas.size());
  out.se.resize(alphas.size());
  for (size_t a = 0; a < alphas.size(); ++a) {
    long hits = 0;
    for (double v : draws) {
      if (v > out.bounds[a]) ++hits;
    }
    const double p = static_cast<double>(hits) / reps;
    out.exceedance[a] = p;
    out.se[a] = binomial_se(p, reps);
  }
  return out;
}

std::filesystem::path emit_figure_data(const Fig1LeftData& data,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  double lo = 0.0, hi = 0.0;
  bool first = true;
  auto scan = [&](const std::vector<double>& v) {
    for (double x : v) {
      if (first) {
        lo = hi = x;
        first = false;
      } else {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  };
  scan(data.standardized_exact);
  scan(data.standardized_asymp);
  scan(data.lambda_m_standardized);
  scan(data.goe_max_eig);
  if (first) throw InvalidInputError("emit_figure_data: no samples");
  if (hi <= lo) hi = lo + 1.0;

  const int bins = 100;
  const double width = (hi - lo) / bins;
  auto histogram = [&](const std::vector<double>& v) {
    std::vector<long> h(static_cast<size_t>(bins), 0);
    for (double x : v) {
      int b = static_cast<int>((x - lo) / width);
      b = std::clamp(b, 0, bins - 1);
      ++h[static_cast<size_t>(b)];
    }
    return h;
  };
  const auto h1 = histogram(data.standardized_exact);
  const auto h2 = histogram(data.standardized_asymp);
  const auto h3 = histogram(data.lambda_m_standardized);
  const auto h4 = histogram(data.goe_max_eig);

  std::vector<std::string> lines;
  lines.push_back(
      "bin_lo,bin_hi,count_stat_std_exact,count_stat_std_asymp,"
      "count_lambda_m_std,count_goe_max_eig");
  for (int b = 0; b < bins; ++b) {
    std::ostringstream os;
    os << format_double(lo + b * width) << "," << format_double(lo + (b + 1) * width)
       << "," << h1[static_cast<size_t>(b)] << "," << h2[static_cast<size_t>(b)]
       << "," << h3[static_cast<size_t>(b)] << "," << h4[static_cast<size_t>(b)];
    lines.push_back(os.str());
  }
  const auto file = dir / "fig1_left.csv";
  write_lines(file, lines);
  return file;
}

std::filesystem::path emit_figure_data(const PowerResult& result,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> lines;
  lines.push_back("lambda2_star,nh,power,se,reps");
  for (size_t li = 0; li < result.lambda2_grid.size(); ++li) {
    for (size_t hi = 0; hi < result.nh_grid.size(); ++hi) {
      std::ostringstream os;
      os << format_double(result.lambda2_grid[li]) << "," << result.nh_grid[hi]
         << ","
         << format_double(result.power(static_cast<Eigen::Index>(li),
                                       static_cast<Eigen::Index>(hi)))
         << ","
         << format_double(result.se(static_cast<Eigen::Index>(li),
                                    static_cast<Eigen::Index>(hi)))
         << "," << result.reps;
      lines.push_back(os.str());
    }
  }
  const auto file = dir / "fig1_right.csv";
  write_lines(file, lines);
  return file;
}

std::filesystem::path emit_figure_data(const std::vector<RankFractionRow>& rows,
                                       int r_max,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> lines;
  std::ostringstream header;
  header << "block_seconds,K";
  for (int r = 1; r <= r_max; ++r) header << ",rank_" << r;
  header << ",rank_none";
  lines.push_back(header.str());
  for (const auto& row : rows) {
    std::ostringstream os;
    os << row.block_seconds << "," << row.K;
    for (int r = 1; r <= r_max; ++r) {
      const double f = r <= static_cast<int>(row.fractions.size())
                           ? row.fractions[static_cast<size_t>(r - 1)]
                           : 0.0;
      os << "," << format_double(f);
    }
    os << "," << format_double(row.fraction_none);
    lines.push_back(os.str());
  }
  const auto file = dir / "rank_fractions.csv";
  write_lines(file, lines);
  return file;
}

namespace {

SimScenario scenario_from_json(const nlohmann::json& j) {
  SimScenario scn;
  scn.kind = scenario_kind_from_string(j.value("kind", std::string("h0")));
  scn.d = j.value("d", 10);
  scn.n = j.value("n", 32400L);
  scn.eta = j.value("eta", 0.001);
  scn.r = j.value("r", 1);
  scn.lambda2_star = j.value("lambda2_star", 0.0);
  if (j.contains("base_diag")) {
    scn.base_diag = j.at("base_diag").get<std::vector<double>>();
  }
  return scn;
}

TestConfig config_from_json(const nlohmann::json& j, long n) {
  TestConfig cfg;
  cfg.variant = test_variant_from_string(j.value("variant", std::string("sim")));
  cfg.alpha = j.value("alpha", 0.05);
  cfg.M = j.value("M", 10.0);
  cfg.J = j.value("J", 15);
  cfg.weights_mode =
      weights_mode_from_string(j.value("weights_mode", std::string("renorm")));
  cfg.r = j.value("r", 1);
  if (j.contains("block_seconds")) {
    cfg.h = j.at("block_seconds").get<double>() / static_cast<double>(n);
  } else if (j.contains("h")) {
    cfg.h = j.at("h").get<double>();
  }
  if (j.contains("beta") || j.contains("L") || j.contains("lambda_gap") ||
      cfg.variant == TestVariant::NonAsym) {
    HypothesisParams hp;
    hp.r = cfg.r;
    hp.beta = j.value("beta", 0.5);
    hp.L = j.value("L", 1.0);
    hp.lambda_gap = j.value("lambda_gap", 1.0);
    cfg.hypothesis = hp;
  }
  cfg.nsim = j.value("nsim", kDefaultQuantileSims);
  cfg.nsim_global = j.value("nsim_global", kDefaultMaxKQuantileSims);
  cfg.quantile_seed = j.value("quantile_seed", kDefaultQuantileSeed);
  return cfg;
}

}  // namespace

McPlan load_mc_plan(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FileIoError("cannot open plan file " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FileIoError("plan file " + file.string() + ": " + e.what());
  }

  McPlan plan;
  plan.mode = j.value("mode", std::string());
  plan.reps = j.value("reps", 0);
  plan.master_seed = j.value("master_seed", kDefaultQuantileSeed);
  plan.out_dir = j.value("out", std::string());
  if (j.contains("scenario")) plan.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("config")) {
    plan.config = config_from_json(j.at("config"), plan.scenario.n);
    if (j.at("config").contains("alpha_list")) {
      plan.alphas = j.at("config").at("alpha_list").get<std::vector<double>>();
    }
  }
  if (j.contains("alphas")) plan.alphas = j.at("alphas").get<std::vector<double>>();
  if (j.contains("lambda2_grid")) {
    plan.lambda2_grid = j.at("lambda2_grid").get<std::vector<double>>();
  }
  if (j.contains("nh_grid")) {
    plan.nh_grid = j.at("nh_grid").get<std::vector<long>>();
  }
  if (j.contains("clt")) {
    const auto& c = j.at("clt");
    const auto rows = c.at("sigma").get<std::vector<std::vector<double>>>();
    const int d = static_cast<int>(rows.size());
    plan.clt_sigma.resize(d, d);
    for (int a = 0; a < d; ++a) {
      if (static_cast<int>(rows[static_cast<size_t>(a)].size()) != d) {
        throw InvalidInputError("plan: clt.sigma must be square");
      }
      for (int b = 0; b < d; ++b) {
        plan.clt_sigma(a, b) = rows[static_cast<size_t>(a)][static_cast<size_t>(b)];
      }
    }
    plan.clt_n = c.at("n").get<long>();
    plan.clt_h = c.at("h").get<double>();
    plan.clt_eta = c.at("eta").get<double>();
    plan.config.M = c.value("M", plan.config.M);
    plan.config.J = c.value("J", plan.config.J);
    if (c.contains("weights_mode")) {
      plan.config.weights_mode =
          weights_mode_from_string(c.at("weights_mode").get<std::string>());
    }
  }
  if (j.contains("deviation")) {
    const auto& dv = j.at("deviation");
    plan.deviation_dim = dv.at("d").get<int>();
    plan.deviation_alphas = dv.at("alphas").get<std::vector<double>>();
    if (dv.contains("s")) {
      const auto s = dv.at("s").get<std::vector<double>>();
      plan.deviation_s.resize(static_cast<Eigen::Index>(s.size()));
      for (size_t i = 0; i < s.size(); ++i) {
        plan.deviation_s(static_cast<Eigen::Index>(i)) = s[i];
      }
    } else {
      // s_j = w_j j^2 eps^2 derived from weights and a noise level
      const double M = dv.value("M", 10.0);
      const int J = dv.value("J", 15);
      const auto mode = weights_mode_from_string(
          dv.value("weights_mode", std::string("renorm")));
      const double eps = dv.at("eps").get<double>();
      const SpectralWeights w = make_weights(M, J, mode);
      plan.deviation_s.resize(J);
      for (int jj = 1; jj <= J; ++jj) {
        plan.deviation_s(jj - 1) =
            w.w(jj - 1) * static_cast<double>(jj) * jj * eps * eps;
      }
    }
  }
  return plan;
}

std::vector<std::filesystem::path> run_mc_plan(const McPlan& plan,
                                               QuantileCache& cache) {
  if (plan.out_dir.empty()) {
    throw InvalidInputError("mc plan: missing output directory (\"out\")");
  }
  const std::filesystem::path dir(plan.out_dir);
  std::filesystem::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::filesystem::path> outputs;
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["mode"] = plan.mode;
  manifest["master_seed"] = plan.master_seed;
  manifest["reps"] = plan.reps;

  if (plan.mode == "size") {
    const SizeResult res = mc_size(plan, cache);
    std::vector<std::string> lines;
    lines.push_back("alpha,rate,se,pooled_blocks,reps,master_seed");
    for (size_t a = 0; a < res.alphas.size(); ++a) {
      std::ostringstream os;
      os << format_double(res.alphas[a]) << "," << format_double(res.rates[a])
         << "," << format_double(res.se[a]) << "," << res.pooled_blocks << ","
         << res.reps << "," << res.master_seed;
      lines.push_back(os.str());
    }
    const auto file = dir / "size.csv";
    write_lines(file, lines);
    outputs.push_back(file);
    manifest["pooled_blocks"] = res.pooled_blocks;
  } else if (plan.mode == "power") {
    const PowerResult res = mc_power(plan, cache);
    outputs.push_back(emit_figure_data(res, dir));
  } else if (plan.mode == "clt") {
    const SpectralWeights weights =
        make_weights(plan.config.M, plan.config.J, plan.config.weights_mode);
    const CltResult res =
        mc_clt_check(plan.clt_sigma, weights, plan.clt_n, plan.clt_h,
                     plan.clt_eta, plan.reps, plan.master_seed);
    std::vector<std::string> lines;
    lines.push_back("rel_frobenius_error,max_abs_z,reps,master_seed");
    {
      std::ostringstream os;
      os << format_double(res.rel_frobenius_error) << ","
         << format_double(res.max_abs_z) << "," << res.reps << ","
         << plan.master_seed;
      lines.push_back(os.str());
    }
    const auto file = dir / "clt.csv";
    write_lines(file, lines);
    outputs.push_back(file);
  } else if (plan.mode == "deviation") {
    const DeviationCheckResult res =
        mc_deviation_check(plan.deviation_s, plan.deviation_dim,
                           plan.deviation_alphas, plan.reps, plan.master_seed);
    std::vector<std::string> lines;
    lines.push_back("alpha,bound,exceedance,se,reps,master_seed");
    for (size_t a = 0; a < res.alphas.size(); ++a) {
      std::ostringstream os;
      os << format_double(res.alphas[a]) << "," << format_double(res.bounds[a])
         << "," << format_double(res.exceedance[a]) << ","
         << format_double(res.se[a]) << "," << res.reps << ","
         << plan.master_seed;
      lines.push_back(os.str());
    }
    const auto file = dir / "deviation.csv";
    write_lines(file, lines);
    outputs.push_back(file);
  } else {
    throw InvalidInputError("mc plan: unknown mode \"" + plan.mode + "\"");
  }

  const auto t1 = std::chrono::steady_clock::now();
  manifest["runtime_seconds"] =
      std::chrono::duration<double>(t1 - t0).count();
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return outputs;
}

}  // namespace specrank
