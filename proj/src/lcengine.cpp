#include "emdg/lcengine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "emdg/error.hpp"
#include "emdg/pairwise.hpp"
#include "parallel.hpp"

namespace emdg {

namespace {

void check_query(const HistogramDatabase& db, const Histogram& q) {
  if (q.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "query histogram stores no bins");
  }
  if (q.index_bound() > db.vocab().size()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "query references index " + std::to_string(q.index_bound() - 1) +
                    " >= vocabulary size " + std::to_string(db.vocab().size()));
  }
}

std::size_t clamp_budget(std::size_t j_iters, std::size_t h) {
  return j_iters >= h ? h : j_iters + 1;
}

// Distance matrix D over the query's support plus, per column, the vocabulary
// rows ordered by (distance, row). The reverse sweep walks these orders
// filtered by each document's support, which keeps dense supports (the
// with-background case) from re-sorting per document.
struct ReversePlan {
  VocabQueryDistances d;
  std::vector<std::uint32_t> order;  // column-major: order[j * v + rank]
};

ReversePlan build_reverse_plan(const HistogramDatabase& db, const Histogram& q,
                               std::size_t block_rows, int threads) {
  ReversePlan plan;
  plan.d = vocab_query_distances(db.vocab(), gather_coords(db.vocab(), q), block_rows, threads);
  const std::size_t v = plan.d.vocab_rows;
  const std::size_t hq = plan.d.query_bins;
  plan.order.resize(v * hq);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(hq); ++j) {
    std::uint32_t* col = plan.order.data() + static_cast<std::size_t>(j) * v;
    std::iota(col, col + v, 0u);
    const double* d = plan.d.d.data();
    std::stable_sort(col, col + v, [&](std::uint32_t a, std::uint32_t b) {
      return d[a * hq + j] < d[b * hq + j];
    });
  }
  return plan;
}

// Shared reverse sweep. transfer(u, cost) runs per document with `positions`
// holding, for every vocabulary index in the document's support, the stored
// bin position + 1 (0 elsewhere).
template <typename PerDocument>
std::vector<double> reverse_sweep(const HistogramDatabase& db, const Histogram& q,
                                  int threads, std::size_t block_rows,
                                  const PerDocument& per_document) {
  check_query(db, q);
  const std::size_t n = db.size();
  const std::size_t v = db.vocab().size();
  const ReversePlan plan = build_reverse_plan(db, q, block_rows, threads);
  std::vector<double> out(n, 0.0);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel num_threads(nt)
  {
    std::vector<std::uint32_t> positions(v, 0);
#pragma omp for schedule(static)
    for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
      const auto idx = db.row_indices(u);
      for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        positions[idx[pos]] = static_cast<std::uint32_t>(pos) + 1;
      }
      out[u] = per_document(static_cast<std::size_t>(u), plan, positions);
      for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        positions[idx[pos]] = 0;
      }
    }
  }
  return out;
}

std::vector<double> max_of(std::vector<double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::max(a[i], b[i]);
  }
  return a;
}

}  // namespace

QueryPlan phase1_topk(const EmbeddingVocabulary& vocab, const Histogram& q, std::size_t k,
                      std::size_t block_rows, int threads) {
  if (q.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "query histogram stores no bins");
  }
  if (q.index_bound() > vocab.size()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "query references index " + std::to_string(q.index_bound() - 1) +
                    " >= vocabulary size " + std::to_string(vocab.size()));
  }
  if (k == 0) {
    throw_error(ErrorKind::IterationOutOfRange, "k must be >= 1");
  }
  const std::size_t hq = q.size();
  const std::size_t v = vocab.size();
  const std::size_t m = vocab.dim();
  if (block_rows == 0) {
    block_rows = 256;
  }

  QueryPlan plan;
  plan.vocab_rows = v;
  plan.clamped = k > hq;
  plan.k = plan.clamped ? hq : k;
  plan.z.resize(v * plan.k);
  plan.s.resize(v * plan.k);
  plan.w.resize(v * plan.k);

  // Query bin coordinates and squared norms, gathered once.
  std::vector<double> q_coords(hq * m);
  std::vector<double> q_norm2(hq);
  for (std::size_t j = 0; j < hq; ++j) {
    const auto coord = vocab.coord(q.bin(j).index);
    std::copy(coord.begin(), coord.end(), q_coords.begin() + j * m);
    q_norm2[j] = vocab.squared_norm(q.bin(j).index);
  }

  const std::size_t kk = plan.k;
  const int nt = detail::pick_threads(threads);
  (void)nt;
  for (std::size_t base = 0; base < v; base += block_rows) {
    const std::size_t stop = std::min(v, base + block_rows);
#pragma omp parallel num_threads(nt)
    {
      std::vector<double> dist(hq);
      std::vector<std::uint32_t> scratch;
#pragma omp for schedule(static)
      for (std::ptrdiff_t u = static_cast<std::ptrdiff_t>(base);
           u < static_cast<std::ptrdiff_t>(stop); ++u) {
        const double* vrow = vocab.coords().data() + static_cast<std::size_t>(u) * m;
        const double vn2 = vocab.squared_norm(static_cast<std::size_t>(u));
        for (std::size_t j = 0; j < hq; ++j) {
          double dot = 0.0;
          const double* qrow = q_coords.data() + j * m;
          for (std::size_t d = 0; d < m; ++d) {
            dot += vrow[d] * qrow[d];
          }
          const double sq = vn2 - 2.0 * dot + q_norm2[j];
          dist[j] = std::sqrt(sq > 0.0 ? sq : 0.0);
        }

        // Top-k by (distance, query-bin position). The insertion scan keeps
        // ties on the smaller position; for large budgets a stable full sort
        // produces the identical order at better cost.
        std::uint32_t* srow = plan.s.data() + static_cast<std::size_t>(u) * kk;
        if (kk > 64) {
          std::vector<std::uint32_t>& full = scratch;
          full.resize(hq);
          std::iota(full.begin(), full.end(), 0u);
          std::stable_sort(full.begin(), full.end(), [&](std::uint32_t a, std::uint32_t b) {
            return dist[a] < dist[b];
          });
          std::copy(full.begin(), full.begin() + kk, srow);
        } else {
          std::size_t filled = 0;
          for (std::uint32_t j = 0; j < hq; ++j) {
            const double d = dist[j];
            if (filled == kk && d >= dist[srow[filled - 1]]) {
              continue;
            }
            std::size_t pos = filled < kk ? filled : kk - 1;
            while (pos > 0 && d < dist[srow[pos - 1]]) {
              srow[pos] = srow[pos - 1];
              --pos;
            }
            srow[pos] = j;
            if (filled < kk) {
              ++filled;
            }
          }
        }
        double* zrow = plan.z.data() + static_cast<std::size_t>(u) * kk;
        double* wrow = plan.w.data() + static_cast<std::size_t>(u) * kk;
        for (std::size_t l = 0; l < kk; ++l) {
          zrow[l] = dist[srow[l]];
          wrow[l] = q.bin(srow[l]).weight;
        }
      }
    }
  }
  return plan;
}

TransportState make_transport_state(const HistogramDatabase& db) {
  TransportState state;
  state.residual = db.values();
  state.cost.assign(db.size(), 0.0);
  state.moved_mass.assign(db.size(), 0.0);
  state.iteration = 0;
  return state;
}

void phase2_iterate(TransportState& state, const HistogramDatabase& db, const QueryPlan& plan,
                    std::size_t l, int threads) {
  if (plan.vocab_rows != db.vocab().size()) {
    throw_error(ErrorKind::VocabularyMismatch, "plan was built for a different vocabulary");
  }
  if (l < 1 || l + 1 > plan.k) {
    throw_error(ErrorKind::IterationOutOfRange,
                "iteration " + std::to_string(l) + " outside [1, " + std::to_string(plan.k) +
                    " - 1]");
  }
  if (state.iteration != l - 1) {
    throw_error(ErrorKind::IterationOutOfRange,
                "iteration " + std::to_string(l) + " does not follow " +
                    std::to_string(state.iteration));
  }
  const std::size_t col = l - 1;
  const std::size_t k = plan.k;
  const std::size_t n = db.size();
  const auto& offsets = db.row_offsets();
  const auto& cols = db.col_indices();
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
    double cost = 0.0;
    double moved = 0.0;
    for (std::uint64_t pos = offsets[u]; pos < offsets[u + 1]; ++pos) {
      const std::uint32_t i = cols[pos];
      const double mv = std::min(state.residual[pos], plan.w[i * k + col]);
      state.residual[pos] -= mv;
      cost += mv * plan.z[i * k + col];
      moved += mv;
    }
    state.cost[u] += cost;
    state.moved_mass[u] += moved;
  }
  state.iteration = l;
}

std::vector<double> phase3_residual(const TransportState& state, const HistogramDatabase& db,
                                    const QueryPlan& plan, int threads) {
  if (plan.vocab_rows != db.vocab().size()) {
    throw_error(ErrorKind::VocabularyMismatch, "plan was built for a different vocabulary");
  }
  if (state.iteration + 1 != plan.k) {
    throw_error(ErrorKind::IterationOutOfRange,
                "residual dump expects " + std::to_string(plan.k - 1) +
                    " completed iterations, got " + std::to_string(state.iteration));
  }
  const std::size_t col = plan.k - 1;
  const std::size_t k = plan.k;
  const std::size_t n = db.size();
  const auto& offsets = db.row_offsets();
  const auto& cols = db.col_indices();
  std::vector<double> out(n, 0.0);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
    double extra = 0.0;
    for (std::uint64_t pos = offsets[u]; pos < offsets[u + 1]; ++pos) {
      extra += state.residual[pos] * plan.z[cols[pos] * k + col];
    }
    out[u] = state.cost[u] + extra;
  }
  return out;
}

std::vector<double> lc_act_forward(const HistogramDatabase& db, const Histogram& q,
                                   std::size_t j_iters, int threads, std::size_t block_rows) {
  check_query(db, q);
  const std::size_t k = clamp_budget(j_iters, q.size());
  const QueryPlan plan = phase1_topk(db.vocab(), q, k, block_rows, threads);
  TransportState state = make_transport_state(db);
  for (std::size_t l = 1; l + 1 <= plan.k; ++l) {
    phase2_iterate(state, db, plan, l, threads);
  }
  return phase3_residual(state, db, plan, threads);
}

std::vector<double> lc_act_reverse(const HistogramDatabase& db, const Histogram& q,
                                   std::size_t j_iters, int threads, std::size_t block_rows) {
  const std::size_t hq = q.size();
  return reverse_sweep(
      db, q, threads, block_rows,
      [&](std::size_t u, const ReversePlan& plan, const std::vector<std::uint32_t>& positions) {
        const auto values = db.row_values(u);
        const std::size_t v = plan.d.vocab_rows;
        const std::size_t k = clamp_budget(j_iters, values.size());
        double cost = 0.0;
        for (std::size_t j = 0; j < hq; ++j) {
          double remaining = q.bin(j).weight;
          const std::uint32_t* col = plan.order.data() + j * v;
          const double* d = plan.d.d.data();
          std::size_t found = 0;
          for (std::size_t rank = 0; rank < v; ++rank) {
            const std::uint32_t i = col[rank];
            const std::uint32_t pos = positions[i];
            if (pos == 0) {
              continue;
            }
            const double dij = d[i * hq + j];
            if (++found < k) {
              const double mv = std::min(remaining, values[pos - 1]);
              cost += mv * dij;
              remaining -= mv;
              if (remaining <= 0.0) {
                break;
              }
            } else {
              cost += remaining * dij;  // residual dump at the k-th support hit
              break;
            }
          }
        }
        return cost;
      });
}

std::vector<double> lc_act_symmetric(const HistogramDatabase& db, const Histogram& q,
                                     std::size_t j_iters, int threads, std::size_t block_rows) {
  std::vector<double> forward = lc_act_forward(db, q, j_iters, threads, block_rows);
  const std::vector<double> reverse = lc_act_reverse(db, q, j_iters, threads, block_rows);
  return max_of(std::move(forward), reverse);
}

std::vector<double> lc_omr_forward(const HistogramDatabase& db, const Histogram& q, int threads,
                                   std::size_t block_rows) {
  check_query(db, q);
  const std::size_t k = std::min<std::size_t>(2, q.size());
  const QueryPlan plan = phase1_topk(db.vocab(), q, k, block_rows, threads);
  const std::size_t n = db.size();
  const auto& offsets = db.row_offsets();
  const auto& cols = db.col_indices();
  const auto& values = db.values();
  std::vector<double> out(n, 0.0);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
    double cost = 0.0;
    for (std::uint64_t pos = offsets[u]; pos < offsets[u + 1]; ++pos) {
      const std::uint32_t i = cols[pos];
      const double x = values[pos];
      if (k == 1) {
        cost += x * plan.z[i];  // single destination takes everything
      } else if (plan.z[i * 2] <= kZeroDistanceEps) {
        const double mv = std::min(x, plan.w[i * 2]);
        cost += (x - mv) * plan.z[i * 2 + 1];
      } else {
        cost += x * plan.z[i * 2];
      }
    }
    out[u] = cost;
  }
  return out;
}

std::vector<double> lc_omr_reverse(const HistogramDatabase& db, const Histogram& q, int threads,
                                   std::size_t block_rows) {
  const std::size_t hq = q.size();
  return reverse_sweep(
      db, q, threads, block_rows,
      [&](std::size_t u, const ReversePlan& plan, const std::vector<std::uint32_t>& positions) {
        const auto values = db.row_values(u);
        const std::size_t v = plan.d.vocab_rows;
        const bool single = values.size() == 1;
        double cost = 0.0;
        for (std::size_t j = 0; j < hq; ++j) {
          const double qj = q.bin(j).weight;
          const std::uint32_t* col = plan.order.data() + j * v;
          const double* d = plan.d.d.data();
          double d1 = 0.0, cap1 = 0.0;
          bool have_first = false;
          for (std::size_t rank = 0; rank < v; ++rank) {
            const std::uint32_t i = col[rank];
            const std::uint32_t pos = positions[i];
            if (pos == 0) {
              continue;
            }
            const double dij = d[i * hq + j];
            if (!have_first) {
              d1 = dij;
              cap1 = values[pos - 1];
              have_first = true;
              if (single) {
                cost += qj * d1;
                break;
              }
              if (d1 > kZeroDistanceEps) {
                cost += qj * d1;
                break;
              }
            } else {
              cost += (qj - std::min(qj, cap1)) * dij;  // remainder at the 2nd hit
              break;
            }
          }
        }
        return cost;
      });
}

std::vector<double> lc_omr_symmetric(const HistogramDatabase& db, const Histogram& q, int threads,
                                     std::size_t block_rows) {
  std::vector<double> forward = lc_omr_forward(db, q, threads, block_rows);
  const std::vector<double> reverse = lc_omr_reverse(db, q, threads, block_rows);
  return max_of(std::move(forward), reverse);
}

std::vector<std::size_t> topk_neighbors(std::span<const double> distances, std::size_t ell,
                                        std::optional<std::size_t> exclude) {
  const bool has_exclude = exclude.has_value() && *exclude < distances.size();
  const std::size_t available = distances.size() - (has_exclude ? 1 : 0);
  if (ell > available) {
    throw_error(ErrorKind::EllTooLarge,
                "requested " + std::to_string(ell) + " neighbors from " +
                    std::to_string(available) + " candidates");
  }
  std::vector<std::size_t> order;
  order.reserve(available);
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (has_exclude && i == *exclude) {
      continue;
    }
    order.push_back(i);
  }
  const auto closer = [&](std::size_t a, std::size_t b) {
    if (distances[a] != distances[b]) {
      return distances[a] < distances[b];
    }
    return a < b;
  };
  if (ell < order.size()) {
    std::nth_element(order.begin(), order.begin() + ell, order.end(), closer);
    order.resize(ell);
  }
  std::sort(order.begin(), order.end(), closer);
  return order;
}

}  // namespace emdg
