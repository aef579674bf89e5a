#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specrank/rank_tests.hpp"
#include "specrank/spectral.hpp"

namespace specrank {

/// Observation CSV (header t_index,y_1,...,y_d) plus companion meta.json
/// {n, d, eta, seed, scenario}. Doubles are written with round-trip
/// precision so read(write(grid)) == grid exactly.
void write_grid(const std::filesystem::path& dir, const ObservationGrid& grid);
ObservationGrid read_grid(const std::filesystem::path& dir);

struct TickRecord {
  std::int64_t timestamp_ms = 0;
  std::string symbol;
  std::optional<double> bid;
  std::optional<double> ask;
  std::optional<double> price;
};

struct TickParseResult {
  std::vector<TickRecord> ticks;
  long bad_rows = 0;
  long total_rows = 0;
};

/// CSV columns: timestamp_ms,symbol,bid,ask[,price]; header optional; rows
/// missing both a bid/ask pair and a price (or with bid > ask) are counted
/// as bad and skipped.
TickParseResult parse_tick_csv(const std::filesystem::path& file);

struct NoiseEstimate {
  std::vector<double> eta_primary;   // sqrt(max(0, -lag-1 autocovariance))
  std::vector<double> eta_fallback;  // sqrt(sum(dY^2) / (2n))
  std::vector<bool> fallback_used;   // primary was zero
  std::vector<double> eta;           // primary, or fallback where flagged
  double eta_pooled = 0.0;           // root mean square across coordinates
};

/// Per-coordinate noise level from increments; needs n >= 10.
NoiseEstimate estimate_noise(const ObservationGrid& grid);

struct IngestReport {
  std::vector<std::string> symbols;          // sorted; coordinate order
  std::vector<long> tick_counts;             // in-session, per symbol
  std::vector<long> backfilled_points;       // grid times before first tick
  std::vector<double> lag1_autocorr;         // of grid increments
  NoiseEstimate noise;
  long bad_rows = 0;
  long total_rows = 0;
  ObservationGrid grid;
};

/// Builds a synchronous grid from tick files: mid-quote (bid+ask)/2 with
/// price fallback, previous-tick value at each grid time, session times
/// rescaled to [0,1]. Aborts when more than 1% of rows are unparseable or
/// a symbol has fewer than 2 in-session ticks.
IngestReport ingest(const std::vector<std::filesystem::path>& files,
                    int session_start_ms_of_day, int session_end_ms_of_day,
                    int grid_seconds);

/// "HH:MM-HH:MM" -> milliseconds of day (start, end).
std::pair<int, int> parse_session(const std::string& spec);

/// Minimal glob: '*' and '?' in the filename component only.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

void write_ingest_report(const std::filesystem::path& file,
                         const IngestReport& report);

/// Test report JSON {config, blocks, global} plus a CSV mirror with one row
/// per block decision.
void write_test_report(const std::filesystem::path& json_file,
                       const TestConfig& config,
                       const std::vector<TestDecision>& decisions,
                       const GlobalTestResult* global, const GridMeta& meta,
                       long n, int d, double eta_used,
                       bool hypothesis_defaults_used);

/// Round-trip double formatting ("%.17g").
std::string format_double(double x);

}  // namespace specrank
