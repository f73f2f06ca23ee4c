#include "emdg/pairwise.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "emdg/error.hpp"

namespace emdg {

namespace {

void check_shapes(const Histogram& p, const Histogram& q, const CostMatrix& c) {
  if (p.size() != c.rows() || q.size() != c.cols()) {
    throw_error(ErrorKind::ShapeMismatch,
                "cost matrix is " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                    " for histograms of size " + std::to_string(p.size()) + " and " +
                    std::to_string(q.size()));
  }
  if (p.empty() || q.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "histograms must store at least one bin");
  }
}

// Positions 0..h_q-1 ordered by (distance, position). The full sort backs ICT;
// the top-k variant backs ACT.
std::vector<std::uint32_t> sorted_destinations(std::span<const double> row) {
  std::vector<std::uint32_t> order(row.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return row[a] < row[b]; });
  return order;
}

void topk_destinations(std::span<const double> row, std::size_t k, std::uint32_t* out) {
  std::size_t filled = 0;
  for (std::uint32_t j = 0; j < row.size(); ++j) {
    const double d = row[j];
    // Scanning ascending j keeps ties on the smaller destination index.
    if (filled == k && d >= row[out[filled - 1]]) {
      continue;
    }
    std::size_t pos = filled < k ? filled : k - 1;
    while (pos > 0 && d < row[out[pos - 1]]) {
      out[pos] = out[pos - 1];
      --pos;
    }
    out[pos] = j;
    if (filled < k) {
      ++filled;
    }
  }
}

}  // namespace

double rwmd_directed(const Histogram& p, const Histogram& q, const CostMatrix& c) {
  check_shapes(p, q, c);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto row = c.row(i);
    double best = row[0];
    for (std::size_t j = 1; j < row.size(); ++j) {
      best = std::min(best, row[j]);
    }
    total += p.bin(i).weight * best;
  }
  return total;
}

double omr_directed(const Histogram& p, const Histogram& q, const CostMatrix& c) {
  check_shapes(p, q, c);
  const std::size_t hq = q.size();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto row = c.row(i);
    const double pi = p.bin(i).weight;
    if (hq == 1) {
      total += pi * row[0];  // single destination takes everything
      continue;
    }
    std::uint32_t s[2];
    topk_destinations(row, 2, s);
    if (row[s[0]] <= kZeroDistanceEps) {
      const double r = std::min(pi, q.bin(s[0]).weight);  // free overlap transfer
      total += (pi - r) * row[s[1]];
    } else {
      total += pi * row[s[0]];
    }
  }
  return total;
}

std::pair<double, TransportPlan> ict_directed(const Histogram& p, const Histogram& q,
                                              const CostMatrix& c) {
  check_shapes(p, q, c);
  TransportPlan plan;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto row = c.row(i);
    const auto order = sorted_destinations(row);
    double remaining = p.bin(i).weight;
    for (std::size_t l = 0; l < order.size() && remaining > kResidualEps; ++l) {
      const std::uint32_t j = order[l];
      const double r = std::min(remaining, q.bin(j).weight);
      if (r > 0.0) {
        total += r * row[j];
        plan.entries.push_back({static_cast<std::uint32_t>(i), j, r});
      }
      remaining -= r;
    }
    // Normalized inputs always drain within h_q rounds; anything left (an
    // unnormalized caller) goes to the farthest destination so mass is
    // conserved, mirroring the ACT dump rule.
    if (remaining > kResidualEps) {
      const std::uint32_t j = order.back();
      total += remaining * row[j];
      plan.entries.push_back({static_cast<std::uint32_t>(i), j, remaining});
    }
  }
  plan.total_cost = total;
  return {total, std::move(plan)};
}

double act_directed(const Histogram& p, const Histogram& q, const CostMatrix& c,
                    std::size_t j_iters) {
  check_shapes(p, q, c);
  const std::size_t hq = q.size();
  const std::size_t k = j_iters >= hq ? hq : j_iters + 1;
  std::vector<std::uint32_t> s(k);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto row = c.row(i);
    topk_destinations(row, k, s.data());
    double remaining = p.bin(i).weight;
    for (std::size_t l = 0; l + 1 < k && remaining > 0.0; ++l) {
      const double r = std::min(remaining, q.bin(s[l]).weight);
      total += r * row[s[l]];
      remaining -= r;
    }
    total += remaining * row[s[k - 1]];  // residual dump at the k-th distance
  }
  return total;
}

double directed(DirectedMeasure m, const Histogram& p, const Histogram& q,
                const CostMatrix& c) {
  switch (m.kind) {
    case Measure::Rwmd: return rwmd_directed(p, q, c);
    case Measure::Omr: return omr_directed(p, q, c);
    case Measure::Ict: return ict_directed(p, q, c).first;
    case Measure::Act: return act_directed(p, q, c, m.j_iters);
  }
  throw_error(ErrorKind::ShapeMismatch, "unknown measure");
}

double symmetric(DirectedMeasure m, const Histogram& p, const Histogram& q,
                 const CostMatrix& c) {
  const double forward = directed(m, p, q, c);
  const double reverse = directed(m, q, p, c.transposed());
  return std::max(forward, reverse);
}

}  // namespace emdg
