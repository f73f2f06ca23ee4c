#include "emdg/emd_exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "emdg/error.hpp"

namespace emdg {

namespace {

constexpr double kSupplyEps = 1e-15;

}  // namespace

ExactSolution emd_exact(const Histogram& p, const Histogram& q, const CostMatrix& c,
                        std::size_t max_cells) {
  if (p.size() != c.rows() || q.size() != c.cols()) {
    throw_error(ErrorKind::ShapeMismatch,
                "cost matrix is " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                    " for histograms of size " + std::to_string(p.size()) + " and " +
                    std::to_string(q.size()));
  }
  if (p.empty() || q.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "histograms must store at least one bin");
  }
  if (p.size() * q.size() > max_cells) {
    throw_error(ErrorKind::InstanceTooLarge,
                std::to_string(p.size()) + "x" + std::to_string(q.size()) +
                    " exceeds the cell guard " + std::to_string(max_cells));
  }
  if (std::abs(p.total() - q.total()) > 1e-9) {
    throw_error(ErrorKind::ShapeMismatch,
                "marginal totals differ: " + std::to_string(p.total()) + " vs " +
                    std::to_string(q.total()));
  }

  const std::size_t hp = p.size();
  const std::size_t hq = q.size();
  std::vector<double> supply(hp), demand(hq);
  for (std::size_t i = 0; i < hp; ++i) supply[i] = p.bin(i).weight;
  for (std::size_t j = 0; j < hq; ++j) demand[j] = q.bin(j).weight;

  std::vector<double> flow(hp * hq, 0.0);

  // Nodes 0..hp-1 are sources, hp..hp+hq-1 are sinks. Shortest paths run over
  // the residual graph: forward arcs i->j always open at cost C[i][j],
  // backward arcs j->i open while F[i][j] > 0 at cost -C[i][j]. SPFA handles
  // the negative backward costs exactly; no potentials needed at test scale.
  const std::size_t nodes = hp + hq;
  const std::int32_t kNone = -1;
  std::vector<double> dist(nodes);
  std::vector<std::int32_t> pred(nodes);
  std::vector<std::uint8_t> in_queue(nodes);

  double remaining = 0.0;
  for (double s : supply) remaining += s;

  // Every augmentation zeroes a supply, a demand, or a backward arc, so a
  // generous multiple of the node count bounds the loop.
  std::size_t augment_guard = 64 * nodes + 1024;

  while (remaining > kSupplyEps) {
    if (augment_guard-- == 0) {
      throw_error(ErrorKind::ShapeMismatch, "augmentation guard tripped; solver did not converge");
    }

    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(pred.begin(), pred.end(), kNone);
    std::fill(in_queue.begin(), in_queue.end(), 0);
    std::deque<std::uint32_t> queue;
    for (std::size_t i = 0; i < hp; ++i) {
      if (supply[i] > kSupplyEps) {
        dist[i] = 0.0;
        pred[i] = static_cast<std::int32_t>(i);  // roots point at themselves
        queue.push_back(static_cast<std::uint32_t>(i));
        in_queue[i] = 1;
      }
    }

    std::size_t relax_guard = 16 * nodes * nodes + 4096;
    while (!queue.empty() && relax_guard-- > 0) {
      const std::uint32_t node = queue.front();
      queue.pop_front();
      in_queue[node] = 0;
      const double base = dist[node];
      if (node < hp) {
        const std::size_t i = node;
        for (std::size_t j = 0; j < hq; ++j) {
          const double nd = base + c.at(i, j);
          if (nd < dist[hp + j]) {
            dist[hp + j] = nd;
            pred[hp + j] = static_cast<std::int32_t>(i);
            if (!in_queue[hp + j]) {
              queue.push_back(static_cast<std::uint32_t>(hp + j));
              in_queue[hp + j] = 1;
            }
          }
        }
      } else {
        const std::size_t j = node - hp;
        for (std::size_t i = 0; i < hp; ++i) {
          // Crumb-sized flows stay out of the residual graph so they can
          // never become a path bottleneck.
          if (flow[i * hq + j] > kSupplyEps) {
            const double nd = base - c.at(i, j);
            if (nd < dist[i]) {
              dist[i] = nd;
              pred[i] = static_cast<std::int32_t>(hp + j);
              if (!in_queue[i]) {
                queue.push_back(static_cast<std::uint32_t>(i));
                in_queue[i] = 1;
              }
            }
          }
        }
      }
    }

    std::size_t best_sink = hq;
    for (std::size_t j = 0; j < hq; ++j) {
      if (demand[j] > kSupplyEps && pred[hp + j] != kNone) {
        if (best_sink == hq || dist[hp + j] < dist[hp + best_sink]) {
          best_sink = j;
        }
      }
    }
    if (best_sink == hq) {
      throw_error(ErrorKind::ShapeMismatch, "no augmenting path; marginals are inconsistent");
    }

    const auto is_root = [&](std::size_t source) {
      return static_cast<std::size_t>(pred[source]) == source;
    };

    // Walk sink -> root once for the bottleneck, once to apply it. The path
    // alternates sink/source; a step guard turns any predecessor cycle from
    // floating-point noise into a loud failure.
    double bottleneck = demand[best_sink];
    std::size_t node = hp + best_sink;
    std::size_t walk_guard = nodes + 2;
    while (walk_guard-- > 0) {
      if (node >= hp) {
        node = static_cast<std::size_t>(pred[node]);  // forward arc, no cap
      } else if (is_root(node)) {
        bottleneck = std::min(bottleneck, supply[node]);
        break;
      } else {
        const std::size_t j = static_cast<std::size_t>(pred[node]) - hp;
        bottleneck = std::min(bottleneck, flow[node * hq + j]);
        node = hp + j;
      }
    }
    if (walk_guard == static_cast<std::size_t>(-1)) {
      throw_error(ErrorKind::ShapeMismatch, "predecessor walk did not reach a root");
    }

    node = hp + best_sink;
    while (true) {
      if (node >= hp) {
        const std::size_t i = static_cast<std::size_t>(pred[node]);
        flow[i * hq + (node - hp)] += bottleneck;
        node = i;
      } else if (is_root(node)) {
        supply[node] -= bottleneck;
        break;
      } else {
        const std::size_t j = static_cast<std::size_t>(pred[node]) - hp;
        flow[node * hq + j] -= bottleneck;
        node = hp + j;
      }
    }
    demand[best_sink] -= bottleneck;
    remaining -= bottleneck;
  }

  ExactSolution solution;
  for (std::size_t i = 0; i < hp; ++i) {
    for (std::size_t j = 0; j < hq; ++j) {
      const double f = flow[i * hq + j];
      if (f > 0.0) {
        solution.flow.entries.push_back(
            {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), f});
        solution.cost += f * c.at(i, j);
      }
    }
  }
  solution.flow.total_cost = solution.cost;
  return solution;
}

}  // namespace emdg
