#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "emdg/grounddist.hpp"
#include "emdg/histogram.hpp"

namespace emdg {

// Distances at or below this threshold count as an overlap (zero-distance
// coordinates); product-form arithmetic keeps true overlaps well under it.
inline constexpr double kZeroDistanceEps = 1e-9;

// Residual mass below this is treated as fully transferred.
inline constexpr double kResidualEps = 1e-15;

enum class Measure { Rwmd, Omr, Ict, Act };

/// A directed relaxation: Act carries its iteration count, the others ignore it.
struct DirectedMeasure {
  Measure kind = Measure::Rwmd;
  std::size_t j_iters = 0;
};

struct TransportEntry {
  std::uint32_t source;  // bin position in p
  std::uint32_t dest;    // bin position in q
  double amount;
};

/// Flow produced by the constrained-transfer solvers. Entries are ordered by
/// (source, transfer round); per source, all but the last used destination is
/// filled to its full capacity.
struct TransportPlan {
  std::vector<TransportEntry> entries;
  double total_cost = 0.0;
};

// Quadratic-complexity reference implementations of the relaxations between
// two histograms. These are the serial oracles the batched engine is tested
// against. All directed forms compute the cost of moving p into q; ties among
// equal distances prefer the smaller destination index.

/// Sum over p of bin weight times the nearest destination distance.
double rwmd_directed(const Histogram& p, const Histogram& q, const CostMatrix& c);

/// Nearest-destination transport with the overlap refinement: when the
/// nearest distance is zero, at most min(p_i, q_dest) moves for free and the
/// remainder is charged at the second-smallest distance.
double omr_directed(const Histogram& p, const Histogram& q, const CostMatrix& c);

/// Per-source greedy transfers to cost-sorted destinations, each transfer
/// capped by the destination weight. Returns the cost and the full plan.
std::pair<double, TransportPlan> ict_directed(const Histogram& p, const Histogram& q,
                                              const CostMatrix& c);

/// Truncated constrained transfers: j_iters capped rounds, then the residual
/// is charged at the (j_iters+1)-th smallest distance. When j_iters + 1
/// exceeds the destination count, the budget clamps so the farthest stored
/// destination takes the dump. j_iters = 0 reproduces rwmd_directed; large
/// j_iters reproduces ict_directed.
double act_directed(const Histogram& p, const Histogram& q, const CostMatrix& c,
                    std::size_t j_iters);

double directed(DirectedMeasure m, const Histogram& p, const Histogram& q,
                const CostMatrix& c);

/// max(directed(p, q, C), directed(q, p, C^T)).
double symmetric(DirectedMeasure m, const Histogram& p, const Histogram& q,
                 const CostMatrix& c);

}  // namespace emdg
