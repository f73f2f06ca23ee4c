#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emdg/database.hpp"

namespace emdg {

enum class EvalMeasure { Rwmd, Omr, Act, Ict, Bow, Wcd };
enum class Direction { Forward, Reverse, Symmetric };

struct RunConfig {
  EvalMeasure measure = EvalMeasure::Act;
  std::size_t j_iters = 1;                   // constrained rounds for act
  Direction direction = Direction::Symmetric;
  std::vector<std::size_t> ell = {1, 16, 128};
  std::size_t query_begin = 0;               // query subset [begin, end)
  std::size_t query_end = 0;                 // 0 = whole database
  int threads = 0;                           // 0 = EMDG_THREADS or runtime default
  std::size_t block_rows = 256;
  bool progress = false;
};

struct EvalReport {
  std::string measure;
  std::size_t j_iters = 0;
  std::string direction;
  std::vector<std::size_t> ell;
  std::vector<double> precision;             // aligned with ell
  std::size_t query_count = 0;
  std::vector<std::size_t> query_indices;
  std::vector<std::vector<std::size_t>> neighbors;  // per query, top-max(ell)
  double seconds_phase1 = 0.0;               // distance-matrix / plan / index building
  double seconds_transfer = 0.0;             // transfers and distance sweeps
  double seconds_select = 0.0;               // neighbor selection + aggregation
  double seconds_total = 0.0;
};

/// Mean over queries of the fraction of each top-ell list sharing the query's
/// label. Lists must hold at least ell entries and must not contain the query.
double precision_at_l(const std::vector<std::size_t>& query_indices,
                      const std::vector<std::vector<std::size_t>>& neighbor_lists,
                      std::span<const std::int32_t> labels, std::size_t ell);

/// Leave-one-out nearest-neighbor evaluation: every query in the subset is
/// compared with the whole database, its own index excluded, and precision is
/// aggregated per ell. Deterministic for a fixed config, including across
/// thread counts.
EvalReport run_eval(const RunConfig& config, const HistogramDatabase& db);

struct ScalingPoint {
  std::size_t n = 0;
  double seconds = 0.0;
};

/// Warm wall time of the configured measure over database prefixes. Each
/// point runs `repeats` timed sweeps of `queries` leave-in queries and keeps
/// the fastest.
std::vector<ScalingPoint> bench_scaling(const HistogramDatabase& db, const RunConfig& config,
                                        std::span<const std::size_t> sizes,
                                        std::size_t queries = 4, std::size_t repeats = 3);

// Report serialization. CSV columns: measure,j_iters,ell,precision,seconds.
void write_csv(const EvalReport& report, std::ostream& out);
void write_json(const EvalReport& report, std::ostream& out);

std::string measure_name(EvalMeasure measure, std::size_t j_iters);
std::string direction_name(Direction direction);

/// Parses "rwmd", "omr", "ict", "bow", "wcd", "act" or "act-J". For "act-J"
/// the embedded J overrides j_iters.
std::pair<EvalMeasure, std::size_t> parse_measure(const std::string& text,
                                                  std::size_t default_j_iters);
Direction parse_direction(const std::string& text);

/// Worker count: explicit request wins, then EMDG_THREADS, then the OpenMP
/// default. Returns a positive count.
int resolve_threads(int requested);

}  // namespace emdg

namespace emdg::cli {
int run(int argc, const char* const* argv);
}
