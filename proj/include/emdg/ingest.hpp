#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "emdg/database.hpp"

namespace emdg {

struct MnistOptions {
  bool include_background = false;  // keep zero pixels as explicit zero-weight bins
  bool normalize = true;            // weights = pixel value / pixel sum
};

struct TextOptions {
  std::size_t stop_word_count = 100;    // leading vocabulary entries dropped
  std::size_t max_words_per_doc = 500;  // most-frequent words kept per document
  bool lowercase = true;
};

enum class EmbeddingFormat { Text, Binary };

/// IDX image/label pair -> histogram database. Pixel (r, c) becomes
/// vocabulary index r*cols + c with 2-D coordinate (r, c); weights are pixel
/// values divided by the pixel sum. With include_background the full grid is
/// stored per image (zero pixels as explicit zero-weight bins); otherwise only
/// nonzero pixels form the support.
HistogramDatabase load_mnist(const std::string& images_path, const std::string& labels_path,
                             const MnistOptions& opts = {});

/// Word-embedding file -> vocabulary. Text format: "count dim" header then
/// one "token v1 ... vm" line per word. Binary format: the same header line,
/// then per word a space-terminated token followed by m little-endian 32-bit
/// floats. Rows are L2-normalized; token order is preserved because it
/// defines the stop-word positions.
std::shared_ptr<EmbeddingVocabulary> load_embeddings(const std::string& path,
                                                     EmbeddingFormat format);

struct CorpusIngestResult {
  HistogramDatabase db;
  std::vector<std::size_t> skipped_docs;  // input positions that filtered to empty
};

/// Tokenized documents -> histogram database. Per document: drop tokens not
/// in the vocabulary, stop words (the first stop_word_count vocabulary
/// entries) and multi-token phrases (vocabulary entries containing '_');
/// count frequencies; keep the max_words_per_doc most frequent words (ties by
/// smaller vocabulary index); L1-normalize over the kept bins. Documents that
/// filter to nothing are skipped and reported.
CorpusIngestResult corpus_to_database(const std::vector<std::vector<std::string>>& docs,
                                      const std::vector<std::int32_t>& labels,
                                      std::shared_ptr<const EmbeddingVocabulary> vocab,
                                      const TextOptions& opts = {});

/// Lowercases (optionally) and splits on non-alphanumeric characters.
std::vector<std::string> tokenize(const std::string& text, bool lowercase = true);

// Versioned binary container: "EMDG" magic, format version, n, v, m, nnz as
// little-endian 64-bit integers, then row offsets, column indices, values,
// labels, vocabulary coordinates, a length-prefixed token table, and a
// trailing 64-bit checksum over everything before it.
void save_database(const HistogramDatabase& db, const std::string& path);
HistogramDatabase load_database(const std::string& path);

/// One histogram per line: {"index":u,"label":l,"bins":[[index,weight],...]}.
void export_jsonl(const HistogramDatabase& db, std::ostream& out);

}  // namespace emdg
