#pragma once

#include "emdg/grounddist.hpp"
#include "emdg/histogram.hpp"
#include "emdg/pairwise.hpp"

namespace emdg {

struct ExactSolution {
  double cost = 0.0;
  TransportPlan flow;  // satisfies both marginal constraints
};

/// Exact minimum-cost transport between two histograms with equal total mass.
/// Successive shortest augmenting paths on the bipartite graph; floating-point
/// flows with exact saturation on subtraction. Test-scale only: instances with
/// more than max_cells cost entries are rejected.
ExactSolution emd_exact(const Histogram& p, const Histogram& q, const CostMatrix& c,
                        std::size_t max_cells = 1000000);

}  // namespace emdg
