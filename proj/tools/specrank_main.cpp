// Command line front end: simulation, rank tests, quantile tables, Monte
// Carlo experiments and tick-data ingestion.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specrank/experiments.hpp"
#include "specrank/io.hpp"
#include "specrank/version.hpp"

namespace {

using namespace specrank;

constexpr std::uint64_t kDefaultSeed = 20230504;

// 0 ok, 2 input error, 3 config error, 4 numerical failure
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

void print_error(const char* type, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

struct TestFlags {
  std::string input;
  std::string variant = "sim";
  double alpha = 0.05;
  int r = 1;
  double M = 10.0;
  int J = 15;
  std::string weights_mode = "renorm";
  long block_seconds = 0;
  bool auto_block = false;
  double block_scale = 1.0;
  std::optional<double> beta;
  std::optional<double> L;
  std::optional<double> lambda_gap;
  std::optional<double> eta;
  long nsim = kDefaultQuantileSims;
  long nsim_global = kDefaultMaxKQuantileSims;
  std::uint64_t quantile_seed = kDefaultSeed;
  std::string cache_dir;
  std::string report;
};

void add_test_flags(CLI::App* cmd, TestFlags& f) {
  cmd->add_option("--input", f.input, "directory with observations.csv + meta.json")
      ->required();
  cmd->add_option("--variant", f.variant, "nonasym|goe|sim (default sim)");
  cmd->add_option("--alpha", f.alpha, "test level (default 0.05)");
  cmd->add_option("--r", f.r, "null rank (default 1)");
  cmd->add_option("--M", f.M, "mixing parameter (default 10)");
  cmd->add_option("--J", f.J, "frequency cutoff (default 15)");
  cmd->add_option("--weights-mode", f.weights_mode, "renorm|cw (default renorm)");
  cmd->add_option("--block-seconds", f.block_seconds,
                  "block length in observation steps");
  cmd->add_flag("--auto-block", f.auto_block,
                "pick the block length from (beta, L, lambda-gap)");
  cmd->add_option("--block-scale", f.block_scale,
                  "scale factor for --auto-block (default 1)");
  cmd->add_option("--beta", f.beta, "Hoelder exponent of the null class");
  cmd->add_option("--L", f.L, "Hoelder constant of the null class");
  cmd->add_option("--lambda-gap", f.lambda_gap,
                  "spectral-gap lower bound under the null");
  cmd->add_option("--eta", f.eta, "override the metadata noise level");
  cmd->add_option("--nsim", f.nsim, "quantile table size (local)");
  cmd->add_option("--nsim-global", f.nsim_global, "quantile table size (global)");
  cmd->add_option("--quantile-seed", f.quantile_seed, "quantile table seed");
  cmd->add_option("--cache-dir", f.cache_dir, "quantile cache directory");
  cmd->add_option("--report", f.report, "report JSON path (CSV mirror alongside)")
      ->required();
}

TestConfig config_from_flags(const TestFlags& f, long n,
                             bool& defaults_used) {
  TestConfig cfg;
  cfg.variant = test_variant_from_string(f.variant);
  cfg.alpha = f.alpha;
  cfg.r = f.r;
  cfg.M = f.M;
  cfg.J = f.J;
  cfg.weights_mode = weights_mode_from_string(f.weights_mode);
  cfg.nsim = f.nsim;
  cfg.nsim_global = f.nsim_global;
  cfg.quantile_seed = f.quantile_seed;

  defaults_used = false;
  const bool needs_hypothesis =
      cfg.variant == TestVariant::NonAsym || f.auto_block;
  if (needs_hypothesis || f.beta || f.L || f.lambda_gap) {
    HypothesisParams hp;
    hp.r = f.r;
    defaults_used = !(f.beta && f.L && f.lambda_gap);
    hp.beta = f.beta.value_or(0.5);
    hp.L = f.L.value_or(1.0);
    hp.lambda_gap = f.lambda_gap.value_or(1.0);
    cfg.hypothesis = hp;
    if (needs_hypothesis && defaults_used) {
      std::cerr << "note: hypothesis parameters default to beta="
                << hp.beta << " L=" << hp.L << " lambda-gap=" << hp.lambda_gap
                << "; pass --beta/--L/--lambda-gap to control them\n";
    }
  }

  if (f.auto_block) {
    cfg.h = select_block_length(n, *cfg.hypothesis, f.block_scale);
  } else {
    if (f.block_seconds < 1) {
      throw InvalidInputError(
          "need --block-seconds >= 1 or --auto-block");
    }
    cfg.h = static_cast<double>(f.block_seconds) / static_cast<double>(n);
  }
  return cfg;
}

int cmd_simulate(const std::string& scenario, int d, long n, double eta,
                 double lambda2, int r, const std::string& base_diag_csv,
                 std::uint64_t seed, const std::string& out_dir) {
  SimScenario scn;
  scn.kind = scenario_kind_from_string(scenario);
  scn.d = d;
  scn.n = n;
  scn.eta = eta;
  scn.r = r;
  scn.seed = seed;
  if (scn.kind == ScenarioKind::H1RankR1) scn.lambda2_star = lambda2;
  if (!base_diag_csv.empty()) {
    std::stringstream ss(base_diag_csv);
    std::string field;
    while (std::getline(ss, field, ',')) {
      scn.base_diag.push_back(std::stod(field));
    }
  }
  const ObservationGrid grid = simulate_scenario(scn);
  write_grid(out_dir, grid);
  std::cout << "wrote " << (std::filesystem::path(out_dir) / "observations.csv").string()
            << " (n=" << grid.n << ", d=" << grid.d << ")\n";
  return 0;
}

int run_tests_command(const TestFlags& flags, bool global) {
  ObservationGrid grid = read_grid(flags.input);
  if (flags.eta) grid.meta.eta = *flags.eta;
  bool defaults_used = false;
  TestConfig cfg = config_from_flags(flags, grid.n, defaults_used);
  cfg.global = global;
  QuantileCache cache(flags.cache_dir.empty()
                          ? std::filesystem::path()
                          : std::filesystem::path(flags.cache_dir));

  if (global) {
    const GlobalTestResult result = global_test(grid, cfg, cache);
    write_test_report(flags.report, cfg, result.decisions, &result, grid.meta,
                      grid.n, grid.d, grid.meta.eta, defaults_used);
    std::cout << (result.reject_global ? "reject" : "accept")
              << " rank<=" << cfg.r << " globally (K=" << result.K
              << ", kappa_g=" << result.kappa_g << ")\n";
  } else {
    const SessionPartition part = partition_session(grid.n, cfg.h);
    std::vector<TestDecision> decisions;
    decisions.reserve(static_cast<size_t>(part.K));
    long rejections = 0;
    for (long k = 0; k < part.K; ++k) {
      const Block block = partition_block(grid, part.m, k);
      TestDecision dec = local_test(grid, block, cfg, cache);
      dec.k = k;
      rejections += dec.reject ? 1 : 0;
      decisions.push_back(dec);
    }
    write_test_report(flags.report, cfg, decisions, nullptr, grid.meta,
                      grid.n, grid.d, grid.meta.eta, defaults_used);
    std::cout << rejections << " of " << part.K
              << " blocks reject rank<=" << cfg.r << "\n";
  }
  return 0;
}

int cmd_rank_scan(const TestFlags& flags, int r_max,
                  const std::string& block_seconds_list,
                  const std::string& out_csv) {
  ObservationGrid grid = read_grid(flags.input);
  if (flags.eta) grid.meta.eta = *flags.eta;
  QuantileCache cache(flags.cache_dir.empty()
                          ? std::filesystem::path()
                          : std::filesystem::path(flags.cache_dir));

  std::vector<long> lengths;
  {
    std::stringstream ss(block_seconds_list);
    std::string field;
    while (std::getline(ss, field, ',')) lengths.push_back(std::stol(field));
  }
  if (lengths.empty()) throw InvalidInputError("rank-scan: empty --block-seconds");

  std::vector<RankFractionRow> rows;
  bool defaults_used = false;
  for (long m : lengths) {
    TestFlags per = flags;
    per.block_seconds = m;
    per.auto_block = false;
    TestConfig cfg = config_from_flags(per, grid.n, defaults_used);
    const RankScanResult scan = rank_scan(grid, cfg, r_max, cache);
    RankFractionRow row;
    row.block_seconds = m;
    row.K = scan.K;
    row.fractions = scan.fractions;
    row.fraction_none = scan.fraction_none;
    rows.push_back(std::move(row));
  }
  const std::filesystem::path out(out_csv);
  const auto dir = out.parent_path().empty() ? std::filesystem::path(".")
                                             : out.parent_path();
  const auto written = emit_figure_data(rows, r_max, dir);
  std::filesystem::rename(written, out);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_quantiles(const std::string& kind, int dim,
                  const std::string& alpha_list, long nsim,
                  std::uint64_t seed, double M, int J,
                  const std::string& weights_mode, int K,
                  const std::string& cache_dir) {
  std::vector<double> alphas;
  {
    std::stringstream ss(alpha_list);
    std::string field;
    while (std::getline(ss, field, ',')) alphas.push_back(std::stod(field));
  }
  if (alphas.empty()) throw InvalidInputError("quantiles: empty --alpha list");

  QuantileCache cache(cache_dir.empty() ? std::filesystem::path()
                                        : std::filesystem::path(cache_dir));
  nlohmann::json out;
  out["statistic_kind"] = kind == "goe"          ? "GOE_MAX_EIG"
                          : kind == "lambda-m"   ? "LAMBDA_M"
                          : kind == "lambda-m-max" ? "LAMBDA_M_MAX_K"
                                                   : kind;
  out["dim"] = dim;
  out["nsim"] = nsim;
  out["seed"] = seed;
  nlohmann::json entries = nlohmann::json::array();
  if (kind == "goe") {
    for (double a : alphas) {
      entries.push_back({{"alpha", a},
                         {"q", cache.goe_max_eig_quantile(dim, a, nsim, seed)}});
    }
  } else if (kind == "lambda-m" || kind == "lambda-m-max") {
    const SpectralWeights w =
        make_weights(M, J, weights_mode_from_string(weights_mode));
    out["M"] = M;
    out["J"] = J;
    out["weights_mode"] = to_string(w.mode);
    if (kind == "lambda-m-max") out["K"] = K;
    for (double a : alphas) {
      const double q =
          kind == "lambda-m"
              ? cache.lambda_m_quantile(dim, w, a, nsim, seed)
              : cache.lambda_m_max_quantile(dim, w, a, K, nsim, seed);
      entries.push_back({{"alpha", a}, {"q", q}});
    }
  } else {
    throw InvalidInputError("quantiles: unknown kind " + kind);
  }
  out["entries"] = entries;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_mc(const std::string& mode, const std::string& plan_file,
           const std::string& cache_dir) {
  McPlan plan = load_mc_plan(plan_file);
  if (plan.mode.empty()) plan.mode = mode;
  if (plan.mode != mode) {
    throw InvalidInputError("mc: --mode " + mode + " does not match plan mode " +
                            plan.mode);
  }
  QuantileCache cache(cache_dir.empty() ? std::filesystem::path()
                                        : std::filesystem::path(cache_dir));
  const auto outputs = run_mc_plan(plan, cache);
  for (const auto& file : outputs) std::cout << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_ingest(const std::string& files_glob, const std::string& session,
               int grid_seconds, const std::string& out_dir) {
  const auto [start_ms, end_ms] = parse_session(session);
  const auto files = expand_glob(files_glob);
  if (files.empty()) {
    throw FileIoError("ingest: no files match " + files_glob);
  }
  const IngestReport report = ingest(files, start_ms, end_ms, grid_seconds);
  write_grid(out_dir, report.grid);
  write_ingest_report(std::filesystem::path(out_dir) / "ingest_report.json",
                      report);
  std::cout << "ingested " << report.symbols.size() << " symbols onto n="
            << report.grid.n << " grid; pooled eta_hat="
            << report.noise.eta_pooled << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized spectral rank tests for spot covariance matrices "
               "observed under noise"};
  app.set_version_flag("--version", specrank::kVersion);
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic observation grid");
  std::string scenario = "h0";
  int sim_d = 10;
  long sim_n = 32'400;
  double sim_eta = 0.001;
  double sim_lambda2 = 0.01;
  int sim_r = 1;
  std::string sim_base_diag;
  std::uint64_t sim_seed = kDefaultSeed;
  std::string sim_out;
  sim->add_option("--scenario", scenario, "h0|h1|noise|const")->required();
  sim->add_option("--n", sim_n, "observation intervals (default 32400)");
  sim->add_option("--d", sim_d, "dimension (default 10)");
  sim->add_option("--eta", sim_eta, "noise level (default 0.001)");
  sim->add_option("--lambda2", sim_lambda2,
                  "prescribed second eigenvalue for h1 (default 0.01)");
  sim->add_option("--r", sim_r, "base rank (default 1)");
  sim->add_option("--base-diag", sim_base_diag, "comma list of factor loadings");
  sim->add_option("--seed", sim_seed, "rng seed (default 20230504)");
  sim->add_option("--out", sim_out, "output directory")->required();

  // test / global-test
  auto* test = app.add_subcommand("test", "block-wise local rank tests");
  TestFlags test_flags;
  add_test_flags(test, test_flags);
  auto* gtest = app.add_subcommand("global-test",
                                   "simultaneous rank test on the whole session");
  TestFlags gtest_flags;
  add_test_flags(gtest, gtest_flags);

  // rank-scan
  auto* scan = app.add_subcommand("rank-scan",
                                  "smallest accepted rank per block and length");
  TestFlags scan_flags;
  scan->add_option("--input", scan_flags.input, "observation directory")->required();
  scan->add_option("--variant", scan_flags.variant, "sim|nonasym (default sim)");
  scan->add_option("--alpha", scan_flags.alpha, "test level (default 0.05)");
  scan->add_option("--M", scan_flags.M, "mixing parameter");
  scan->add_option("--J", scan_flags.J, "frequency cutoff");
  scan->add_option("--weights-mode", scan_flags.weights_mode, "renorm|cw");
  scan->add_option("--eta", scan_flags.eta, "override metadata noise level");
  scan->add_option("--nsim-global", scan_flags.nsim_global, "quantile table size");
  scan->add_option("--quantile-seed", scan_flags.quantile_seed, "quantile seed");
  scan->add_option("--cache-dir", scan_flags.cache_dir, "quantile cache dir");
  scan->add_option("--beta", scan_flags.beta, "Hoelder exponent (nonasym)");
  scan->add_option("--L", scan_flags.L, "Hoelder constant (nonasym)");
  scan->add_option("--lambda-gap", scan_flags.lambda_gap, "spectral gap (nonasym)");
  int scan_r_max = 6;
  std::string scan_lengths = "60";
  std::string scan_out = "rank_fractions.csv";
  scan->add_option("--r-max", scan_r_max, "largest scanned rank (default 6)");
  scan->add_option("--block-seconds", scan_lengths, "comma list of block lengths")
      ->required();
  scan->add_option("--out", scan_out, "output CSV path")->required();

  // quantiles
  auto* quant = app.add_subcommand("quantiles", "Monte Carlo critical-value tables");
  std::string q_kind;
  int q_dim = 9;
  std::string q_alphas = "0.1,0.05,0.01";
  long q_nsim = kDefaultQuantileSims;
  std::uint64_t q_seed = kDefaultSeed;
  double q_M = 10.0;
  int q_J = 15;
  std::string q_mode = "renorm";
  int q_K = 1;
  std::string q_cache;
  quant->add_option("--kind", q_kind, "goe|lambda-m|lambda-m-max")->required();
  quant->add_option("--dim", q_dim, "matrix dimension (d - r)")->required();
  quant->add_option("--alpha", q_alphas, "comma list of levels");
  quant->add_option("--nsim", q_nsim, "Monte Carlo draws (>= 10000)");
  quant->add_option("--seed", q_seed, "rng seed (default 20230504)");
  quant->add_option("--M", q_M, "mixing parameter (lambda kinds)");
  quant->add_option("--J", q_J, "frequency cutoff (lambda kinds)");
  quant->add_option("--weights-mode", q_mode, "renorm|cw");
  quant->add_option("--K", q_K, "number of blocks (lambda-m-max)");
  quant->add_option("--cache-dir", q_cache, "quantile cache directory");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo studies from a plan file");
  std::string mc_mode;
  std::string mc_plan;
  std::string mc_cache;
  mc->add_option("--mode", mc_mode, "size|power|clt|deviation")->required();
  mc->add_option("--plan", mc_plan, "plan JSON file")->required();
  mc->add_option("--cache-dir", mc_cache, "quantile cache directory");

  // ingest
  auto* ing = app.add_subcommand("ingest", "tick CSV files -> observation grid");
  std::string ing_files;
  std::string ing_session;
  int ing_grid_seconds = 1;
  std::string ing_out;
  ing->add_option("--files", ing_files, "glob of tick CSV files")->required();
  ing->add_option("--session", ing_session, "HH:MM-HH:MM window")->required();
  ing->add_option("--grid-seconds", ing_grid_seconds, "grid step (default 1)");
  ing->add_option("--out", ing_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    print_error("config", e.what());
    return kExitConfig;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(scenario, sim_d, sim_n, sim_eta, sim_lambda2, sim_r,
                          sim_base_diag, sim_seed, sim_out);
    }
    if (test->parsed()) return run_tests_command(test_flags, false);
    if (gtest->parsed()) return run_tests_command(gtest_flags, true);
    if (scan->parsed()) {
      return cmd_rank_scan(scan_flags, scan_r_max, scan_lengths, scan_out);
    }
    if (quant->parsed()) {
      return cmd_quantiles(q_kind, q_dim, q_alphas, q_nsim, q_seed, q_M, q_J,
                           q_mode, q_K, q_cache);
    }
    if (mc->parsed()) return cmd_mc(mc_mode, mc_plan, mc_cache);
    if (ing->parsed()) {
      return cmd_ingest(ing_files, ing_session, ing_grid_seconds, ing_out);
    }
  } catch (const FileIoError& e) {
    print_error("input", e.what());
    return kExitInput;
  } catch (const InvalidInputError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  }
  return 0;
}
