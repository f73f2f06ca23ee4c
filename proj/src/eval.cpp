#include "emdg/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "emdg/baselines.hpp"
#include "emdg/error.hpp"
#include "emdg/lcengine.hpp"
#include "parallel.hpp"

namespace emdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Precomputed per-run state (currently only the WCD centroid index).
struct MeasureContext {
  CentroidIndex centroids;
};

// Distances (smaller is closer) from one query to the whole database.
std::vector<double> query_distances(const RunConfig& config, const HistogramDatabase& db,
                                    const Histogram& q, const MeasureContext& ctx,
                                    int threads, double* seconds_transfer) {
  const auto t0 = Clock::now();
  std::vector<double> out;
  switch (config.measure) {
    case EvalMeasure::Rwmd:
    case EvalMeasure::Act:
    case EvalMeasure::Ict: {
      std::size_t j_iters = config.j_iters;
      if (config.measure == EvalMeasure::Rwmd) {
        j_iters = 0;
      } else if (config.measure == EvalMeasure::Ict) {
        j_iters = std::numeric_limits<std::size_t>::max();  // clamps per row
      }
      switch (config.direction) {
        case Direction::Forward:
          out = lc_act_forward(db, q, j_iters, threads, config.block_rows);
          break;
        case Direction::Reverse:
          out = lc_act_reverse(db, q, j_iters, threads, config.block_rows);
          break;
        case Direction::Symmetric:
          out = lc_act_symmetric(db, q, j_iters, threads, config.block_rows);
          break;
      }
      break;
    }
    case EvalMeasure::Omr: {
      switch (config.direction) {
        case Direction::Forward:
          out = lc_omr_forward(db, q, threads, config.block_rows);
          break;
        case Direction::Reverse:
          out = lc_omr_reverse(db, q, threads, config.block_rows);
          break;
        case Direction::Symmetric:
          out = lc_omr_symmetric(db, q, threads, config.block_rows);
          break;
      }
      break;
    }
    case EvalMeasure::Bow: {
      // Similarities negate into "smaller is closer"; ties keep their index rule.
      out = bow_cosine(db, q, threads);
      for (double& x : out) {
        x = -x;
      }
      break;
    }
    case EvalMeasure::Wcd: {
      const std::vector<double> qc = centroid_of(db.vocab(), q);
      out = wcd(ctx.centroids, qc, threads);
      break;
    }
  }
  *seconds_transfer += seconds_since(t0);
  return out;
}

}  // namespace

double precision_at_l(const std::vector<std::size_t>& query_indices,
                      const std::vector<std::vector<std::size_t>>& neighbor_lists,
                      std::span<const std::int32_t> labels, std::size_t ell) {
  if (query_indices.size() != neighbor_lists.size()) {
    throw_error(ErrorKind::ShapeMismatch, "one neighbor list per query required");
  }
  if (query_indices.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "no queries to average over");
  }
  double sum = 0.0;
  for (std::size_t qi = 0; qi < query_indices.size(); ++qi) {
    const auto& list = neighbor_lists[qi];
    if (list.size() < ell) {
      throw_error(ErrorKind::ListTooShort,
                  "query " + std::to_string(query_indices[qi]) + " has " +
                      std::to_string(list.size()) + " neighbors, needs " + std::to_string(ell));
    }
    const std::int32_t want = labels[query_indices[qi]];
    std::size_t hits = 0;
    for (std::size_t pos = 0; pos < ell; ++pos) {
      if (labels[list[pos]] == want) {
        ++hits;
      }
    }
    sum += static_cast<double>(hits) / static_cast<double>(ell);
  }
  return sum / static_cast<double>(query_indices.size());
}

EvalReport run_eval(const RunConfig& config, const HistogramDatabase& db) {
  const auto t_start = Clock::now();
  if (config.ell.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "at least one ell value required");
  }
  const std::size_t n = db.size();
  const std::size_t begin = config.query_begin;
  const std::size_t end = config.query_end == 0 ? n : std::min(config.query_end, n);
  if (begin >= end) {
    throw_error(ErrorKind::ShapeMismatch, "empty query subset");
  }
  const std::size_t ell_max = *std::max_element(config.ell.begin(), config.ell.end());
  if (ell_max + 1 > n) {
    throw_error(ErrorKind::EllTooLarge,
                "top-" + std::to_string(ell_max) + " of a " + std::to_string(n) +
                    "-document database with the query excluded");
  }
  const int threads = resolve_threads(config.threads);

  EvalReport report;
  report.measure = measure_name(config.measure, config.j_iters);
  report.j_iters = config.measure == EvalMeasure::Rwmd ? 0 : config.j_iters;
  report.direction = direction_name(config.direction);
  report.ell = config.ell;

  MeasureContext ctx;
  if (config.measure == EvalMeasure::Wcd) {
    const auto t0 = Clock::now();
    ctx.centroids = build_centroids(db, db.vocab(), threads);
    report.seconds_phase1 += seconds_since(t0);
  }

  for (std::size_t idx = begin; idx < end; ++idx) {
    const Histogram q = db.row(idx);
    const std::vector<double> distances =
        query_distances(config, db, q, ctx, threads, &report.seconds_transfer);

    const auto t_sel = Clock::now();
    report.query_indices.push_back(idx);
    report.neighbors.push_back(topk_neighbors(distances, ell_max, idx));
    report.seconds_select += seconds_since(t_sel);

    if (config.progress && (idx - begin + 1) % 100 == 0) {
      std::cerr << "eval: " << (idx - begin + 1) << "/" << (end - begin) << " queries\r";
    }
  }
  if (config.progress) {
    std::cerr << '\n';
  }

  const auto t_sel = Clock::now();
  report.query_count = report.query_indices.size();
  for (std::size_t ell : config.ell) {
    report.precision.push_back(
        precision_at_l(report.query_indices, report.neighbors, db.labels(), ell));
  }
  report.seconds_select += seconds_since(t_sel);
  report.seconds_total = seconds_since(t_start);
  return report;
}

std::vector<ScalingPoint> bench_scaling(const HistogramDatabase& db, const RunConfig& config,
                                        std::span<const std::size_t> sizes, std::size_t queries,
                                        std::size_t repeats) {
  const int threads = resolve_threads(config.threads);
  std::vector<ScalingPoint> points;
  for (std::size_t size : sizes) {
    const HistogramDatabase slice = db.prefix(std::min(size, db.size()));
    const std::size_t q_count = std::min(queries, slice.size());
    std::vector<Histogram> qs;
    for (std::size_t i = 0; i < q_count; ++i) {
      qs.push_back(slice.row(i));
    }
    MeasureContext ctx;
    if (config.measure == EvalMeasure::Wcd) {
      ctx.centroids = build_centroids(slice, slice.vocab(), threads);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep <= repeats; ++rep) {
      double transfer = 0.0;
      const auto t0 = Clock::now();
      for (const Histogram& q : qs) {
        const auto distances = query_distances(config, slice, q, ctx, threads, &transfer);
        (void)distances;
      }
      const double elapsed = seconds_since(t0);
      if (rep > 0) {  // first sweep is the warm-up
        best = std::min(best, elapsed);
      }
    }
    points.push_back({slice.size(), best});
  }
  return points;
}

void write_csv(const EvalReport& report, std::ostream& out) {
  out << "measure,j_iters,ell,precision,seconds\n";
  std::ostringstream num;
  num.precision(17);
  for (std::size_t i = 0; i < report.ell.size(); ++i) {
    num.str("");
    num << report.precision[i];
    out << report.measure << ',' << report.j_iters << ',' << report.ell[i] << ',' << num.str()
        << ',' << report.seconds_total << '\n';
  }
}

void write_json(const EvalReport& report, std::ostream& out) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["measure"] = report.measure;
  j["j_iters"] = report.j_iters;
  j["direction"] = report.direction;
  j["ell"] = report.ell;
  j["precision"] = report.precision;
  j["query_count"] = report.query_count;
  j["seconds"] = {{"phase1", report.seconds_phase1},
                  {"transfer", report.seconds_transfer},
                  {"select", report.seconds_select},
                  {"total", report.seconds_total}};
  out << j.dump(2) << '\n';
}

std::string measure_name(EvalMeasure measure, std::size_t j_iters) {
  switch (measure) {
    case EvalMeasure::Rwmd: return "rwmd";
    case EvalMeasure::Omr: return "omr";
    case EvalMeasure::Act: return "act-" + std::to_string(j_iters);
    case EvalMeasure::Ict: return "ict";
    case EvalMeasure::Bow: return "bow";
    case EvalMeasure::Wcd: return "wcd";
  }
  return "unknown";
}

std::string direction_name(Direction direction) {
  switch (direction) {
    case Direction::Forward: return "forward";
    case Direction::Reverse: return "reverse";
    case Direction::Symmetric: return "symmetric";
  }
  return "unknown";
}

std::pair<EvalMeasure, std::size_t> parse_measure(const std::string& text,
                                                  std::size_t default_j_iters) {
  if (text == "rwmd") return {EvalMeasure::Rwmd, 0};
  if (text == "omr") return {EvalMeasure::Omr, default_j_iters};
  if (text == "ict") return {EvalMeasure::Ict, default_j_iters};
  if (text == "bow") return {EvalMeasure::Bow, default_j_iters};
  if (text == "wcd") return {EvalMeasure::Wcd, default_j_iters};
  if (text == "act") return {EvalMeasure::Act, default_j_iters};
  if (text.rfind("act-", 0) == 0) {
    const std::string digits = text.substr(4);
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
      return {EvalMeasure::Act, static_cast<std::size_t>(std::stoull(digits))};
    }
  }
  throw_error(ErrorKind::ShapeMismatch, "unknown measure '" + text + "'");
}

Direction parse_direction(const std::string& text) {
  if (text == "forward") return Direction::Forward;
  if (text == "reverse") return Direction::Reverse;
  if (text == "symmetric") return Direction::Symmetric;
  throw_error(ErrorKind::ShapeMismatch, "unknown direction '" + text + "'");
}

int resolve_threads(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("EMDG_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) {
      return parsed;
    }
  }
  return detail::hardware_threads();
}

}  // namespace emdg
