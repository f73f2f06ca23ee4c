#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "emdg/database.hpp"
#include "emdg/grounddist.hpp"
#include "emdg/histogram.hpp"

namespace emdg {

/// Phase-1 product of the batched engine: per vocabulary coordinate, the k
/// nearest query bins with their distances and weights. Row layouts are
/// row-major vocab_rows x k; every row of z is ascending, ties broken by the
/// smaller query-bin position.
struct QueryPlan {
  std::size_t vocab_rows = 0;
  std::size_t k = 0;               // effective iteration budget (clamped to h_q)
  bool clamped = false;            // true when the requested k exceeded h_q
  std::vector<double> z;           // distances
  std::vector<std::uint32_t> s;    // positions into the query's bin list
  std::vector<double> w;           // query weights aligned with s

  double z_at(std::size_t u, std::size_t col) const { return z[u * k + col]; }
  std::uint32_t s_at(std::size_t u, std::size_t col) const { return s[u * k + col]; }
  double w_at(std::size_t u, std::size_t col) const { return w[u * k + col]; }
};

/// Residual mass and accumulated cost of a database mid-transfer. residual is
/// aligned entry-for-entry with the database value array.
struct TransportState {
  std::vector<double> residual;
  std::vector<double> cost;         // accumulated transport cost per document
  std::vector<double> moved_mass;   // mass moved by completed iterations
  std::size_t iteration = 0;        // completed constrained iterations
};

/// Top-k vocabulary-to-query distances (Phase 1). A request larger than the
/// query size clamps to h_q and flags the plan. Vocabulary rows are processed
/// in parallel in blocks of block_rows; each row is handled by one thread so
/// results do not depend on the thread count.
QueryPlan phase1_topk(const EmbeddingVocabulary& vocab, const Histogram& q, std::size_t k,
                      std::size_t block_rows = 256, int threads = 0);

TransportState make_transport_state(const HistogramDatabase& db);

/// One constrained-transfer sweep (iteration l, 1-based, 1 <= l <= k-1).
/// Every stored entry moves min(residual, w) to its l-th nearest query bin and
/// is charged the l-th smallest distance. Parallel across documents.
void phase2_iterate(TransportState& state, const HistogramDatabase& db, const QueryPlan& plan,
                    std::size_t l, int threads = 0);

/// Residual dump: returns cost + residual . z_k per document. Requires the
/// state at iteration k-1.
std::vector<double> phase3_residual(const TransportState& state, const HistogramDatabase& db,
                                    const QueryPlan& plan, int threads = 0);

/// Batched truncated constrained transfers, database rows into the query.
/// Entry u matches act_directed(row_u, q, C_u) on the gathered cost matrix.
/// j_iters = 0 is the linear-complexity row-minimum path.
std::vector<double> lc_act_forward(const HistogramDatabase& db, const Histogram& q,
                                   std::size_t j_iters, int threads = 0,
                                   std::size_t block_rows = 256);

/// Query into database rows: entry u matches act_directed(q, row_u, C_u^T).
/// Works off the shared v x h distance matrix; per query bin, destinations
/// are visited in (distance, vocabulary index) order restricted to the
/// document's support. The iteration budget clamps per document.
std::vector<double> lc_act_reverse(const HistogramDatabase& db, const Histogram& q,
                                   std::size_t j_iters, int threads = 0,
                                   std::size_t block_rows = 256);

/// Entry-wise max of the forward and reverse directions.
std::vector<double> lc_act_symmetric(const HistogramDatabase& db, const Histogram& q,
                                     std::size_t j_iters, int threads = 0,
                                     std::size_t block_rows = 256);

// Batched overlap-aware nearest-destination transport (the k=2 plan with the
// zero-distance refinement), matching omr_directed per entry.
std::vector<double> lc_omr_forward(const HistogramDatabase& db, const Histogram& q,
                                   int threads = 0, std::size_t block_rows = 256);
std::vector<double> lc_omr_reverse(const HistogramDatabase& db, const Histogram& q,
                                   int threads = 0, std::size_t block_rows = 256);
std::vector<double> lc_omr_symmetric(const HistogramDatabase& db, const Histogram& q,
                                     int threads = 0, std::size_t block_rows = 256);

/// Indices of the ell smallest distances, ascending, ties broken by the
/// smaller index. `exclude` drops one index (the query itself in
/// leave-one-out evaluation).
std::vector<std::size_t> topk_neighbors(std::span<const double> distances, std::size_t ell,
                                        std::optional<std::size_t> exclude = std::nullopt);

}  // namespace emdg
