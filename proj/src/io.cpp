#include "specrank/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace specrank {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_grid(const std::filesystem::path& dir,
                const ObservationGrid& grid) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "observations.csv");
    if (!out) throw FileIoError("cannot write " + (dir / "observations.csv").string());
    out << "t_index";
    for (int c = 1; c <= grid.d; ++c) out << ",y_" << c;
    out << "\n";
    for (long i = 0; i <= grid.n; ++i) {
      out << i;
      for (int c = 0; c < grid.d; ++c) {
        out << "," << format_double(grid.values(i, c));
      }
      out << "\n";
    }
  }
  nlohmann::json meta;
  meta["n"] = grid.n;
  meta["d"] = grid.d;
  meta["eta"] = grid.meta.eta;
  meta["seed"] = grid.meta.seed;
  meta["scenario"] = grid.meta.scenario;
  std::ofstream out(dir / "meta.json");
  if (!out) throw FileIoError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << "\n";
}

ObservationGrid read_grid(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw FileIoError("cannot open " + meta_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FileIoError(meta_path.string() + ": " + e.what());
  }

  ObservationGrid grid;
  grid.n = meta.at("n").get<long>();
  grid.d = meta.at("d").get<int>();
  grid.meta.eta = meta.at("eta").get<double>();
  grid.meta.seed = meta.value("seed", 0ULL);
  grid.meta.scenario = meta.value("scenario", std::string());
  if (grid.n < 2 || grid.d < 1) {
    throw InvalidInputError("read_grid: invalid n or d in metadata");
  }

  const auto csv_path = dir / "observations.csv";
  std::ifstream in(csv_path);
  if (!in) throw FileIoError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw FileIoError(csv_path.string() + ": empty file");
  }
  grid.values.resize(grid.n + 1, grid.d);
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row > grid.n) throw FileIoError(csv_path.string() + ": too many rows");
    std::stringstream ss(line);
    std::string field;
    if (!std::getline(ss, field, ',')) {
      throw FileIoError(csv_path.string() + ": malformed row");
    }
    for (int c = 0; c < grid.d; ++c) {
      if (!std::getline(ss, field, ',')) {
        throw FileIoError(csv_path.string() + ": row " + std::to_string(row) +
                          " has too few columns");
      }
      grid.values(row, c) = std::stod(field);
    }
    ++row;
  }
  if (row != grid.n + 1) {
    throw FileIoError(csv_path.string() + ": expected " +
                      std::to_string(grid.n + 1) + " rows, got " +
                      std::to_string(row));
  }
  if (!grid.values.allFinite()) {
    throw InvalidInputError("read_grid: non-finite observations");
  }
  return grid;
}

TickParseResult parse_tick_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FileIoError("cannot open " + file.string());
  TickParseResult out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      // header row detection: first field not numeric
      const auto comma = line.find(',');
      const std::string head = line.substr(0, comma);
      char* end = nullptr;
      std::strtod(head.c_str(), &end);
      if (end == head.c_str()) continue;
    }
    ++out.total_rows;
    std::stringstream ss(line);
    std::vector<std::string> fields;
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2) {
      ++out.bad_rows;
      continue;
    }
    TickRecord rec;
    try {
      rec.timestamp_ms = std::stoll(fields[0]);
    } catch (...) {
      ++out.bad_rows;
      continue;
    }
    rec.symbol = fields[1];
    auto parse_opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      try {
        return std::stod(s);
      } catch (...) {
        return std::nullopt;
      }
    };
    if (fields.size() > 2) rec.bid = parse_opt(fields[2]);
    if (fields.size() > 3) rec.ask = parse_opt(fields[3]);
    if (fields.size() > 4) rec.price = parse_opt(fields[4]);
    const bool has_quote = rec.bid.has_value() && rec.ask.has_value();
    if (has_quote && *rec.bid > *rec.ask) {
      ++out.bad_rows;
      continue;
    }
    if (!has_quote && !rec.price.has_value()) {
      ++out.bad_rows;
      continue;
    }
    if (rec.symbol.empty()) {
      ++out.bad_rows;
      continue;
    }
    out.ticks.push_back(std::move(rec));
  }
  return out;
}

NoiseEstimate estimate_noise(const ObservationGrid& grid) {
  if (grid.n < 10) {
    throw InvalidInputError("estimate_noise: needs at least 10 intervals");
  }
  NoiseEstimate out;
  out.eta_primary.resize(static_cast<size_t>(grid.d));
  out.eta_fallback.resize(static_cast<size_t>(grid.d));
  out.fallback_used.resize(static_cast<size_t>(grid.d));
  out.eta.resize(static_cast<size_t>(grid.d));
  double pooled_sq = 0.0;
  for (int c = 0; c < grid.d; ++c) {
    double lag1 = 0.0;
    double sumsq = 0.0;
    double prev = grid.values(1, c) - grid.values(0, c);
    sumsq += prev * prev;
    for (long i = 2; i <= grid.n; ++i) {
      const double cur = grid.values(i, c) - grid.values(i - 1, c);
      lag1 += prev * cur;
      sumsq += cur * cur;
      prev = cur;
    }
    lag1 /= static_cast<double>(grid.n - 1);
    const double primary_sq = std::max(0.0, -lag1);
    const double fallback_sq = sumsq / (2.0 * static_cast<double>(grid.n));
    out.eta_primary[static_cast<size_t>(c)] = std::sqrt(primary_sq);
    out.eta_fallback[static_cast<size_t>(c)] = std::sqrt(fallback_sq);
    const bool use_fallback = primary_sq == 0.0;
    out.fallback_used[static_cast<size_t>(c)] = use_fallback;
    const double eta_sq = use_fallback ? fallback_sq : primary_sq;
    out.eta[static_cast<size_t>(c)] = std::sqrt(eta_sq);
    pooled_sq += eta_sq;
  }
  out.eta_pooled = std::sqrt(pooled_sq / grid.d);
  return out;
}

std::pair<int, int> parse_session(const std::string& spec) {
  int h1, m1, h2, m2;
  if (std::sscanf(spec.c_str(), "%d:%d-%d:%d", &h1, &m1, &h2, &m2) != 4) {
    throw InvalidInputError("session must look like HH:MM-HH:MM, got " + spec);
  }
  if (h1 < 0 || h1 > 23 || h2 < 0 || h2 > 24 || m1 < 0 || m1 > 59 || m2 < 0 ||
      m2 > 59) {
    throw InvalidInputError("session times out of range: " + spec);
  }
  const int start = (h1 * 60 + m1) * 60 * 1000;
  const int end = (h2 * 60 + m2) * 60 * 1000;
  if (end <= start) {
    throw InvalidInputError("session end must be after start: " + spec);
  }
  return {start, end};
}

namespace {

bool glob_match(const std::string& pattern, const std::string& name) {
  size_t p = 0, n = 0, star = std::string::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() &&
        (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  const std::filesystem::path pat(pattern);
  const std::string name = pat.filename().string();
  if (name.find('*') == std::string::npos &&
      name.find('?') == std::string::npos) {
    return {pat};
  }
  std::filesystem::path dir = pat.parent_path();
  if (dir.empty()) dir = ".";
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (glob_match(name, entry.path().filename().string())) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

IngestReport ingest(const std::vector<std::filesystem::path>& files,
                    int session_start_ms_of_day, int session_end_ms_of_day,
                    int grid_seconds) {
  if (files.empty()) throw InvalidInputError("ingest: no input files");
  if (grid_seconds < 1) {
    throw InvalidInputError("ingest: grid_seconds must be >= 1");
  }
  const long session_ms =
      static_cast<long>(session_end_ms_of_day) - session_start_ms_of_day;
  const long n = session_ms / (grid_seconds * 1000L);
  if (n < 2) throw InvalidInputError("ingest: session shorter than two grid steps");

  long bad = 0, total = 0;
  std::map<std::string, std::vector<std::pair<std::int64_t, double>>> by_symbol;
  constexpr std::int64_t kMsPerDay = 86'400'000;
  for (const auto& file : files) {
    const TickParseResult parsed = parse_tick_csv(file);
    bad += parsed.bad_rows;
    total += parsed.total_rows;
    for (const auto& tick : parsed.ticks) {
      const double mid = tick.bid && tick.ask ? 0.5 * (*tick.bid + *tick.ask)
                                              : *tick.price;
      const std::int64_t ms_of_day =
          ((tick.timestamp_ms % kMsPerDay) + kMsPerDay) % kMsPerDay;
      by_symbol[tick.symbol].emplace_back(ms_of_day, mid);
    }
  }
  if (total == 0) throw InvalidInputError("ingest: no tick rows found");
  if (static_cast<double>(bad) > 0.01 * static_cast<double>(total)) {
    throw InvalidInputError("ingest: " + std::to_string(bad) + " of " +
                            std::to_string(total) +
                            " rows unparseable (above the 1% threshold)");
  }

  IngestReport report;
  report.bad_rows = bad;
  report.total_rows = total;
  for (auto& [symbol, ticks] : by_symbol) {
    std::stable_sort(ticks.begin(), ticks.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    long in_session = 0;
    for (const auto& [ms, _] : ticks) {
      if (ms >= session_start_ms_of_day && ms < session_end_ms_of_day) {
        ++in_session;
      }
    }
    if (in_session < 2) {
      throw InvalidInputError("ingest: symbol " + symbol + " has " +
                              std::to_string(in_session) +
                              " in-session ticks (need at least 2)");
    }
    report.symbols.push_back(symbol);
    report.tick_counts.push_back(in_session);
  }

  const int d = static_cast<int>(report.symbols.size());
  ObservationGrid grid;
  grid.n = n;
  grid.d = d;
  grid.values.resize(n + 1, d);
  grid.meta.scenario = "ingest";
  grid.meta.seed = 0;
  report.backfilled_points.assign(static_cast<size_t>(d), 0);

  for (int c = 0; c < d; ++c) {
    const auto& ticks = by_symbol[report.symbols[static_cast<size_t>(c)]];
    size_t pos = 0;
    double last = ticks.front().second;  // backfill value before first tick
    bool seen = false;
    for (long i = 0; i <= n; ++i) {
      const std::int64_t t_ms =
          session_start_ms_of_day + i * grid_seconds * 1000L;
      while (pos < ticks.size() && ticks[pos].first <= t_ms) {
        last = ticks[pos].second;
        seen = true;
        ++pos;
      }
      if (!seen) ++report.backfilled_points[static_cast<size_t>(c)];
      grid.values(i, c) = last;
    }
  }

  report.noise = estimate_noise(grid);
  grid.meta.eta = report.noise.eta_pooled;

  report.lag1_autocorr.resize(static_cast<size_t>(d));
  for (int c = 0; c < d; ++c) {
    double lag1 = 0.0, var = 0.0;
    double prev = grid.values(1, c) - grid.values(0, c);
    var += prev * prev;
    for (long i = 2; i <= n; ++i) {
      const double cur = grid.values(i, c) - grid.values(i - 1, c);
      lag1 += prev * cur;
      var += cur * cur;
      prev = cur;
    }
    report.lag1_autocorr[static_cast<size_t>(c)] =
        var > 0.0 ? (lag1 / (grid.n - 1)) / (var / grid.n) : 0.0;
  }

  report.grid = std::move(grid);
  return report;
}

void write_ingest_report(const std::filesystem::path& file,
                         const IngestReport& report) {
  nlohmann::json j;
  j["symbols"] = report.symbols;
  j["tick_counts"] = report.tick_counts;
  j["backfilled_points"] = report.backfilled_points;
  j["lag1_autocorr"] = report.lag1_autocorr;
  j["bad_rows"] = report.bad_rows;
  j["total_rows"] = report.total_rows;
  j["eta_primary"] = report.noise.eta_primary;
  j["eta_fallback"] = report.noise.eta_fallback;
  std::vector<int> fb;
  for (bool b : report.noise.fallback_used) fb.push_back(b ? 1 : 0);
  j["fallback_used"] = fb;
  j["eta"] = report.noise.eta;
  j["eta_pooled"] = report.noise.eta_pooled;
  std::ofstream out(file);
  if (!out) throw FileIoError("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

void write_test_report(const std::filesystem::path& json_file,
                       const TestConfig& config,
                       const std::vector<TestDecision>& decisions,
                       const GlobalTestResult* global, const GridMeta& meta,
                       long n, int d, double eta_used,
                       bool hypothesis_defaults_used) {
  nlohmann::json cfg;
  cfg["variant"] = to_string(config.variant);
  cfg["alpha"] = config.alpha;
  cfg["M"] = config.M;
  cfg["J"] = config.J;
  cfg["weights_mode"] = to_string(config.weights_mode);
  cfg["r"] = config.r;
  cfg["h"] = config.h;
  cfg["global"] = config.global;
  cfg["n"] = n;
  cfg["d"] = d;
  cfg["eta"] = eta_used;
  cfg["scenario"] = meta.scenario;
  cfg["grid_seed"] = meta.seed;
  cfg["nsim"] = config.nsim;
  cfg["nsim_global"] = config.nsim_global;
  cfg["quantile_seed"] = config.quantile_seed;
  cfg["constants"] = {{"log_coeff", config.constants.log_coeff},
                      {"dim_coeff", config.constants.dim_coeff}};
  if (config.hypothesis) {
    cfg["hypothesis"] = {{"beta", config.hypothesis->beta},
                         {"L", config.hypothesis->L},
                         {"lambda_gap", config.hypothesis->lambda_gap},
                         {"defaults_used", hypothesis_defaults_used}};
  }

  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& dec : decisions) {
    blocks.push_back({{"k", dec.k},
                      {"t", dec.block.t},
                      {"h", dec.block.h},
                      {"statistic", dec.statistic},
                      {"standardized", dec.standardized},
                      {"kappa", dec.kappa},
                      {"eps", dec.eps},
                      {"reject", dec.reject}});
  }

  nlohmann::json j;
  j["config"] = cfg;
  j["blocks"] = blocks;
  if (global != nullptr) {
    j["global"] = {{"reject", global->reject_global},
                   {"kappa_g", global->kappa_g},
                   {"K", global->K},
                   {"dropped_increments", global->dropped_increments}};
  } else {
    j["global"] = nullptr;
  }

  std::ofstream out(json_file);
  if (!out) throw FileIoError("cannot write " + json_file.string());
  out << j.dump(2) << "\n";

  std::filesystem::path csv_file = json_file;
  csv_file.replace_extension(".csv");
  std::ofstream csv(csv_file);
  if (!csv) throw FileIoError("cannot write " + csv_file.string());
  csv << "k,t,h,statistic,standardized,kappa,reject\n";
  for (const auto& dec : decisions) {
    csv << dec.k << "," << format_double(dec.block.t) << ","
        << format_double(dec.block.h) << "," << format_double(dec.statistic)
        << "," << format_double(dec.standardized) << ","
        << format_double(dec.kappa) << "," << (dec.reject ? 1 : 0) << "\n";
  }
}

}  // namespace specrank
