#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emdg/baselines.hpp"
#include "emdg/error.hpp"
#include "emdg/eval.hpp"
#include "emdg/ingest.hpp"
#include "emdg/lcengine.hpp"

namespace emdg::cli {

namespace {

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
  }
  if (out.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "empty size list '" + text + "'");
  }
  return out;
}

// "B:E" half-open, or "all".
std::pair<std::size_t, std::size_t> parse_query_range(const std::string& text) {
  if (text == "all" || text.empty()) {
    return {0, 0};
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw_error(ErrorKind::ShapeMismatch, "query range must be 'begin:end' or 'all'");
  }
  return {static_cast<std::size_t>(std::stoull(text.substr(0, colon))),
          static_cast<std::size_t>(std::stoull(text.substr(colon + 1)))};
}

Histogram histogram_from_json_file(const std::string& path, std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) {
    throw_error(ErrorKind::IoFailure, "cannot open " + path);
  }
  nlohmann::json j;
  in >> j;
  if (!j.contains("bins") || !j["bins"].is_array()) {
    throw_error(ErrorKind::MalformedHeader, path + " lacks a 'bins' array");
  }
  std::vector<std::pair<std::uint32_t, double>> raw;
  for (const auto& bin : j["bins"]) {
    raw.emplace_back(bin.at(0).get<std::uint32_t>(), bin.at(1).get<double>());
  }
  return normalize_histogram(std::move(raw), vocab_size);
}

void emit_report(const EvalReport& report, const std::string& csv_path,
                 const std::string& json_path) {
  std::cout << "measure=" << report.measure << " direction=" << report.direction
            << " queries=" << report.query_count << "\n";
  std::cout << "  ell    precision\n";
  for (std::size_t i = 0; i < report.ell.size(); ++i) {
    std::cout << "  " << report.ell[i] << "\t" << report.precision[i] << "\n";
  }
  std::cout << "  seconds: phase1=" << report.seconds_phase1
            << " transfer=" << report.seconds_transfer << " select=" << report.seconds_select
            << " total=" << report.seconds_total << "\n";
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    write_csv(report, out);
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    write_json(report, out);
  }
}

void print_stats(const HistogramDatabase& db) {
  const DatasetStats s = db.stats();
  std::cout << "n=" << s.n << " avg_h=" << s.avg_h << " v=" << db.vocab().size()
            << " v_used=" << s.v_used << " m=" << db.vocab().dim() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Linear-complexity EMD lower-bound search over histogram databases"};
  app.require_subcommand(1);

  // --- ingest-mnist ---
  auto* ingest_mnist = app.add_subcommand("ingest-mnist", "IDX images + labels -> database");
  std::string mnist_images, mnist_labels, mnist_output, mnist_jsonl;
  MnistOptions mnist_opts;
  ingest_mnist->add_option("--images", mnist_images, "IDX image file")->required();
  ingest_mnist->add_option("--labels", mnist_labels, "IDX label file")->required();
  ingest_mnist->add_option("--output", mnist_output, "database path")->required();
  ingest_mnist->add_flag("--include-background", mnist_opts.include_background,
                         "keep zero pixels as explicit zero-weight bins");
  bool no_normalize = false;
  ingest_mnist->add_flag("--no-normalize", no_normalize, "keep raw pixel values as weights");
  ingest_mnist->add_option("--jsonl", mnist_jsonl, "also write a JSON-lines debug export");

  // --- ingest-text ---
  auto* ingest_text = app.add_subcommand("ingest-text", "tokenized documents -> database");
  std::string text_docs, text_labels, text_embeddings, text_output, text_jsonl;
  std::string text_format = "text";
  TextOptions text_opts;
  bool no_lowercase = false;
  ingest_text->add_option("--docs", text_docs, "one document per line")->required();
  ingest_text->add_option("--labels", text_labels, "one integer label per line")->required();
  ingest_text->add_option("--embeddings", text_embeddings, "embedding file")->required();
  ingest_text->add_option("--embedding-format", text_format, "text|binary");
  ingest_text->add_option("--stop-words", text_opts.stop_word_count,
                          "leading vocabulary entries to drop");
  ingest_text->add_option("--max-words", text_opts.max_words_per_doc,
                          "most-frequent words kept per document");
  ingest_text->add_flag("--no-lowercase", no_lowercase, "keep token case");
  ingest_text->add_option("--output", text_output, "database path")->required();
  ingest_text->add_option("--jsonl", text_jsonl, "also write a JSON-lines debug export");

  // --- load-embeddings ---
  auto* load_emb = app.add_subcommand("load-embeddings", "validate an embedding file");
  std::string emb_path;
  std::string emb_format = "text";
  load_emb->add_option("--path", emb_path, "embedding file")->required();
  load_emb->add_option("--format", emb_format, "text|binary");

  // --- shared eval/query/bench options ---
  std::string db_path, measure_text = "act", direction_text = "symmetric";
  std::size_t j_iters = 1;
  int threads = 0;
  std::size_t block_rows = 256;

  auto add_engine_options = [&](CLI::App* cmd) {
    cmd->add_option("--db", db_path, "database container")->required();
    cmd->add_option("--measure", measure_text, "rwmd|omr|act|act-J|ict|bow|wcd");
    cmd->add_option("--iters", j_iters, "constrained rounds J for act");
    cmd->add_option("--direction", direction_text, "forward|reverse|symmetric");
    cmd->add_option("--threads", threads, "worker threads (default EMDG_THREADS or all)");
    cmd->add_option("--block-size", block_rows, "vocabulary rows per distance block");
  };

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "leave-one-out precision@top-l");
  std::string topl_text = "1,16,128", queries_text = "all", csv_path, json_path;
  bool progress = false;
  add_engine_options(eval_cmd);
  eval_cmd->add_option("--topl", topl_text, "comma-separated ell values");
  eval_cmd->add_option("--queries", queries_text, "query subset 'begin:end' or 'all'");
  eval_cmd->add_option("--csv", csv_path, "write CSV report");
  eval_cmd->add_option("--json", json_path, "write JSON report");
  eval_cmd->add_flag("--progress", progress, "report progress on stderr");

  // --- query ---
  auto* query_cmd = app.add_subcommand("query", "top-l neighbors of one histogram");
  long long query_index = -1;
  std::string query_file;
  std::size_t query_topl = 10;
  add_engine_options(query_cmd);
  query_cmd->add_option("--index", query_index, "use database row as the query");
  query_cmd->add_option("--file", query_file, "JSON histogram {\"bins\":[[index,weight],...]}");
  query_cmd->add_option("--topl", query_topl, "list length");

  // --- bench ---
  auto* bench_cmd = app.add_subcommand("bench", "wall time over database prefixes");
  std::string sizes_text = "1000,2000,4000";
  std::size_t bench_queries = 4, bench_repeats = 3;
  std::string bench_csv;
  add_engine_options(bench_cmd);
  bench_cmd->add_option("--sizes", sizes_text, "comma-separated prefix sizes");
  bench_cmd->add_option("--queries-per-point", bench_queries, "queries timed per prefix");
  bench_cmd->add_option("--repeats", bench_repeats, "timed repetitions (fastest kept)");
  bench_cmd->add_option("--csv", bench_csv, "write n,seconds CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest_mnist) {
      mnist_opts.normalize = !no_normalize;
      const HistogramDatabase db = load_mnist(mnist_images, mnist_labels, mnist_opts);
      save_database(db, mnist_output);
      print_stats(db);
      if (!mnist_jsonl.empty()) {
        std::ofstream out(mnist_jsonl);
        export_jsonl(db, out);
      }
      return 0;
    }

    if (*ingest_text) {
      text_opts.lowercase = !no_lowercase;
      const EmbeddingFormat fmt =
          text_format == "binary" ? EmbeddingFormat::Binary : EmbeddingFormat::Text;
      auto vocab = load_embeddings(text_embeddings, fmt);

      std::ifstream docs_in(text_docs);
      if (!docs_in) {
        throw_error(ErrorKind::IoFailure, "cannot open " + text_docs);
      }
      std::vector<std::vector<std::string>> docs;
      std::string line;
      while (std::getline(docs_in, line)) {
        docs.push_back(tokenize(line, text_opts.lowercase));
      }
      std::ifstream labels_in(text_labels);
      if (!labels_in) {
        throw_error(ErrorKind::IoFailure, "cannot open " + text_labels);
      }
      std::vector<std::int32_t> labels;
      std::int32_t label = 0;
      while (labels_in >> label) {
        labels.push_back(label);
      }

      const CorpusIngestResult result = corpus_to_database(docs, labels, vocab, text_opts);
      save_database(result.db, text_output);
      print_stats(result.db);
      if (!result.skipped_docs.empty()) {
        std::cout << "skipped " << result.skipped_docs.size() << " empty documents\n";
      }
      if (!text_jsonl.empty()) {
        std::ofstream out(text_jsonl);
        export_jsonl(result.db, out);
      }
      return 0;
    }

    if (*load_emb) {
      const EmbeddingFormat fmt =
          emb_format == "binary" ? EmbeddingFormat::Binary : EmbeddingFormat::Text;
      const auto vocab = load_embeddings(emb_path, fmt);
      std::cout << "v=" << vocab->size() << " m=" << vocab->dim() << "\n";
      for (std::size_t u = 0; u < std::min<std::size_t>(5, vocab->size()); ++u) {
        std::cout << "  [" << u << "] " << vocab->tokens()[u] << "\n";
      }
      return 0;
    }

    if (*eval_cmd) {
      const HistogramDatabase db = load_database(db_path);
      RunConfig config;
      std::tie(config.measure, config.j_iters) = parse_measure(measure_text, j_iters);
      config.direction = parse_direction(direction_text);
      config.ell = parse_size_list(topl_text);
      std::tie(config.query_begin, config.query_end) = parse_query_range(queries_text);
      config.threads = threads;
      config.block_rows = block_rows;
      config.progress = progress;
      const EvalReport report = run_eval(config, db);
      emit_report(report, csv_path, json_path);
      return 0;
    }

    if (*query_cmd) {
      const HistogramDatabase db = load_database(db_path);
      RunConfig config;
      std::tie(config.measure, config.j_iters) = parse_measure(measure_text, j_iters);
      config.direction = parse_direction(direction_text);
      config.threads = threads;
      config.block_rows = block_rows;

      Histogram q;
      if (query_index >= 0) {
        q = db.row(static_cast<std::size_t>(query_index));
      } else if (!query_file.empty()) {
        q = histogram_from_json_file(query_file, db.vocab().size());
      } else {
        throw_error(ErrorKind::ShapeMismatch, "query needs --index or --file");
      }

      // Distance computation mirrors one run_eval step on a single query.
      std::vector<double> distances;
      {
        const int nt = resolve_threads(config.threads);
        switch (config.measure) {
          case EvalMeasure::Bow: {
            distances = bow_cosine(db, q, nt);
            for (double& x : distances) x = -x;
            break;
          }
          case EvalMeasure::Wcd: {
            const CentroidIndex index = build_centroids(db, db.vocab(), nt);
            distances = wcd(index, centroid_of(db.vocab(), q), nt);
            break;
          }
          case EvalMeasure::Omr: {
            distances = config.direction == Direction::Forward ? lc_omr_forward(db, q, nt, block_rows)
                        : config.direction == Direction::Reverse
                            ? lc_omr_reverse(db, q, nt, block_rows)
                            : lc_omr_symmetric(db, q, nt, block_rows);
            break;
          }
          default: {
            std::size_t j = config.j_iters;
            if (config.measure == EvalMeasure::Rwmd) j = 0;
            if (config.measure == EvalMeasure::Ict) j = static_cast<std::size_t>(-1);
            distances = config.direction == Direction::Forward
                            ? lc_act_forward(db, q, j, nt, block_rows)
                        : config.direction == Direction::Reverse
                            ? lc_act_reverse(db, q, j, nt, block_rows)
                            : lc_act_symmetric(db, q, j, nt, block_rows);
            break;
          }
        }
      }
      const auto neighbors = topk_neighbors(distances, query_topl, std::nullopt);
      std::cout << "rank\tindex\tlabel\tdistance\n";
      for (std::size_t rank = 0; rank < neighbors.size(); ++rank) {
        const std::size_t idx = neighbors[rank];
        const double shown =
            config.measure == EvalMeasure::Bow ? -distances[idx] : distances[idx];
        std::cout << rank + 1 << "\t" << idx << "\t" << db.label(idx) << "\t" << shown << "\n";
      }
      return 0;
    }

    if (*bench_cmd) {
      const HistogramDatabase db = load_database(db_path);
      RunConfig config;
      std::tie(config.measure, config.j_iters) = parse_measure(measure_text, j_iters);
      config.direction = parse_direction(direction_text);
      config.threads = threads;
      config.block_rows = block_rows;
      const auto sizes = parse_size_list(sizes_text);
      const auto points = bench_scaling(db, config, sizes, bench_queries, bench_repeats);
      std::cout << "n\tseconds\n";
      std::ostringstream csv;
      csv << "n,seconds\n";
      for (const ScalingPoint& point : points) {
        std::cout << point.n << "\t" << point.seconds << "\n";
        csv << point.n << ',' << point.seconds << '\n';
      }
      if (!bench_csv.empty()) {
        std::ofstream out(bench_csv);
        out << csv.str();
      }
      return 0;
    }
  } catch (const EmdgError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace emdg::cli
