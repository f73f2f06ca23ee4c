#include "emdg/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "emdg/error.hpp"

namespace emdg {

namespace {

constexpr std::uint64_t kContainerVersion = 1;
constexpr char kContainerMagic[4] = {'E', 'M', 'D', 'G'};

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_error(ErrorKind::IoFailure, "cannot open " + path);
  }
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw_error(ErrorKind::IoFailure, "cannot read " + path);
  }
  return bytes;
}

std::uint64_t fnv1a(const unsigned char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Little-endian writers/readers, byte-assembled so the container layout does
// not depend on the host.
void put_u32(std::vector<unsigned char>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>(x >> (8 * i)));
  }
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>(x >> (8 * i)));
  }
}

void put_f64(std::vector<unsigned char>& out, double x) {
  put_u64(out, std::bit_cast<std::uint64_t>(x));
}

void put_i32(std::vector<unsigned char>& out, std::int32_t x) {
  put_u32(out, std::bit_cast<std::uint32_t>(x));
}

class Cursor {
 public:
  Cursor(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  std::size_t remaining() const { return size_ - pos_; }

  void require(std::size_t bytes, ErrorKind kind) const {
    if (remaining() < bytes) {
      throw_error(kind, "file ends inside a field");
    }
  }

  std::uint32_t u32_le() {
    require(4, ErrorKind::ChecksumFailure);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
      x |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return x;
  }

  std::uint64_t u64_le() {
    require(8, ErrorKind::ChecksumFailure);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
      x |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return x;
  }

  double f64_le() { return std::bit_cast<double>(u64_le()); }
  std::int32_t i32_le() { return std::bit_cast<std::int32_t>(u32_le()); }

  std::uint32_t u32_be() {
    require(4, ErrorKind::TruncatedFile);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
      x = (x << 8) | data_[pos_ + i];
    }
    pos_ += 4;
    return x;
  }

  const unsigned char* bytes(std::size_t count, ErrorKind kind) {
    require(count, kind);
    const unsigned char* out = data_ + pos_;
    pos_ += count;
    return out;
  }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

HistogramDatabase load_mnist(const std::string& images_path, const std::string& labels_path,
                             const MnistOptions& opts) {
  const std::vector<unsigned char> image_bytes = read_file(images_path);
  Cursor images(image_bytes.data(), image_bytes.size());
  if (image_bytes.size() < 16) {
    throw_error(ErrorKind::TruncatedFile, images_path + " is shorter than an IDX header");
  }
  if (images.u32_be() != 2051) {
    throw_error(ErrorKind::BadMagic, images_path + " is not an IDX image file");
  }
  const std::size_t n = images.u32_be();
  const std::size_t rows = images.u32_be();
  const std::size_t cols = images.u32_be();
  if (n == 0 || rows == 0 || cols == 0) {
    throw_error(ErrorKind::TruncatedFile, images_path + " declares an empty image set");
  }
  const unsigned char* pixels = images.bytes(n * rows * cols, ErrorKind::TruncatedFile);

  const std::vector<unsigned char> label_bytes = read_file(labels_path);
  Cursor label_cursor(label_bytes.data(), label_bytes.size());
  if (label_bytes.size() < 8) {
    throw_error(ErrorKind::TruncatedFile, labels_path + " is shorter than an IDX header");
  }
  if (label_cursor.u32_be() != 2049) {
    throw_error(ErrorKind::BadMagic, labels_path + " is not an IDX label file");
  }
  const std::size_t label_count = label_cursor.u32_be();
  if (label_count != n) {
    throw_error(ErrorKind::CountMismatch,
                std::to_string(n) + " images vs " + std::to_string(label_count) + " labels");
  }
  const unsigned char* raw_labels = label_cursor.bytes(n, ErrorKind::TruncatedFile);

  // Pixel grid as the vocabulary: index r*cols + c, coordinate (r, c).
  const std::size_t v = rows * cols;
  std::vector<double> coords(v * 2);
  std::vector<std::string> tokens(v);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      coords[(r * cols + c) * 2] = static_cast<double>(r);
      coords[(r * cols + c) * 2 + 1] = static_cast<double>(c);
      tokens[r * cols + c] = std::to_string(r) + ":" + std::to_string(c);
    }
  }
  auto vocab = std::make_shared<EmbeddingVocabulary>(2, std::move(coords), std::move(tokens));

  std::vector<Histogram> histograms;
  histograms.reserve(n);
  std::vector<std::int32_t> labels(n);
  for (std::size_t img = 0; img < n; ++img) {
    labels[img] = raw_labels[img];
    const unsigned char* px = pixels + img * v;
    double sum = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
      sum += px[i];
    }
    if (opts.normalize && sum <= 0.0) {
      throw_error(ErrorKind::AllZeroMass, "image " + std::to_string(img) + " has no ink");
    }
    std::vector<HistogramBin> bins;
    bins.reserve(opts.include_background ? v : 64);
    for (std::size_t i = 0; i < v; ++i) {
      if (!opts.include_background && px[i] == 0) {
        continue;
      }
      const double value = static_cast<double>(px[i]);
      bins.push_back({static_cast<std::uint32_t>(i), opts.normalize ? value / sum : value});
    }
    histograms.emplace_back(std::move(bins));
  }
  return build_database(histograms, std::move(labels), std::move(vocab));
}

namespace {

std::shared_ptr<EmbeddingVocabulary> finish_vocabulary(std::size_t count, std::size_t dim,
                                                       std::vector<double> coords,
                                                       std::vector<std::string> tokens,
                                                       const std::string& path) {
  if (tokens.size() != count) {
    throw_error(ErrorKind::TruncatedFile,
                path + " holds " + std::to_string(tokens.size()) + " of " +
                    std::to_string(count) + " declared rows");
  }
  // L2-normalize rows; token order is preserved (it defines stop words).
  for (std::size_t u = 0; u < count; ++u) {
    double norm2 = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double x = coords[u * dim + d];
      if (!std::isfinite(x)) {
        throw_error(ErrorKind::NonFiniteValue, "row for token '" + tokens[u] + "' is not finite");
      }
      norm2 += x * x;
    }
    if (norm2 <= 0.0 || !std::isfinite(norm2)) {
      throw_error(ErrorKind::NonFiniteValue,
                  "row for token '" + tokens[u] + "' cannot be L2-normalized");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t d = 0; d < dim; ++d) {
      coords[u * dim + d] *= inv;
    }
  }
  return std::make_shared<EmbeddingVocabulary>(dim, std::move(coords), std::move(tokens));
}

std::shared_ptr<EmbeddingVocabulary> load_embeddings_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw_error(ErrorKind::IoFailure, "cannot open " + path);
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw_error(ErrorKind::MalformedHeader, path + " is empty");
  }
  std::istringstream head(header);
  std::size_t count = 0, dim = 0;
  if (!(head >> count >> dim) || count == 0 || dim == 0) {
    throw_error(ErrorKind::MalformedHeader, "expected 'count dim', got '" + header + "'");
  }

  std::vector<double> coords;
  coords.reserve(count * dim);
  std::vector<std::string> tokens;
  tokens.reserve(count);
  std::string line;
  while (tokens.size() < count && std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::size_t got = 0;
    double x = 0.0;
    while (row >> x) {
      if (got < dim) {
        coords.push_back(x);
      }
      ++got;
    }
    if (got != dim) {
      throw_error(ErrorKind::DimensionDrift,
                  "token '" + token + "' has " + std::to_string(got) + " values, expected " +
                      std::to_string(dim));
    }
    tokens.push_back(std::move(token));
  }
  return finish_vocabulary(count, dim, std::move(coords), std::move(tokens), path);
}

std::shared_ptr<EmbeddingVocabulary> load_embeddings_binary(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  std::size_t pos = 0;
  std::string header;
  while (pos < bytes.size() && bytes[pos] != '\n') {
    header.push_back(static_cast<char>(bytes[pos++]));
  }
  if (pos == bytes.size()) {
    throw_error(ErrorKind::MalformedHeader, path + " has no header line");
  }
  ++pos;  // consume '\n'
  std::istringstream head(header);
  std::size_t count = 0, dim = 0;
  if (!(head >> count >> dim) || count == 0 || dim == 0) {
    throw_error(ErrorKind::MalformedHeader, "expected 'count dim', got '" + header + "'");
  }

  std::vector<double> coords;
  coords.reserve(count * dim);
  std::vector<std::string> tokens;
  tokens.reserve(count);
  while (tokens.size() < count) {
    while (pos < bytes.size() && (bytes[pos] == '\n' || bytes[pos] == '\r')) {
      ++pos;
    }
    std::string token;
    while (pos < bytes.size() && bytes[pos] != ' ') {
      token.push_back(static_cast<char>(bytes[pos++]));
    }
    if (pos == bytes.size()) {
      throw_error(ErrorKind::TruncatedFile, path + " ends inside a token");
    }
    ++pos;  // consume ' '
    if (bytes.size() - pos < dim * 4) {
      throw_error(ErrorKind::TruncatedFile, path + " ends inside the vector for '" + token + "'");
    }
    for (std::size_t d = 0; d < dim; ++d) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
      }
      pos += 4;
      coords.push_back(static_cast<double>(std::bit_cast<float>(bits)));
    }
    tokens.push_back(std::move(token));
  }
  return finish_vocabulary(count, dim, std::move(coords), std::move(tokens), path);
}

}  // namespace

std::shared_ptr<EmbeddingVocabulary> load_embeddings(const std::string& path,
                                                     EmbeddingFormat format) {
  return format == EmbeddingFormat::Text ? load_embeddings_text(path)
                                         : load_embeddings_binary(path);
}

std::vector<std::string> tokenize(const std::string& text, bool lowercase) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const unsigned char uc = static_cast<unsigned char>(ch);
    if (std::isalnum(uc)) {
      current.push_back(lowercase ? static_cast<char>(std::tolower(uc)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

CorpusIngestResult corpus_to_database(const std::vector<std::vector<std::string>>& docs,
                                      const std::vector<std::int32_t>& labels,
                                      std::shared_ptr<const EmbeddingVocabulary> vocab,
                                      const TextOptions& opts) {
  if (!vocab) {
    throw_error(ErrorKind::VocabularyMismatch, "corpus ingestion requires a vocabulary");
  }
  if (labels.size() != docs.size()) {
    throw_error(ErrorKind::LabelCountMismatch,
                std::to_string(labels.size()) + " labels for " + std::to_string(docs.size()) +
                    " documents");
  }
  if (opts.stop_word_count > vocab->size()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "stop-word count exceeds the vocabulary size");
  }

  std::unordered_map<std::string, std::uint32_t> lookup;
  lookup.reserve(vocab->size());
  const auto& tokens = vocab->tokens();
  for (std::size_t u = 0; u < tokens.size(); ++u) {
    lookup.emplace(tokens[u], static_cast<std::uint32_t>(u));  // first occurrence wins
  }

  std::vector<Histogram> histograms;
  std::vector<std::int32_t> kept_labels;
  std::vector<std::size_t> skipped;

  for (std::size_t doc = 0; doc < docs.size(); ++doc) {
    std::unordered_map<std::uint32_t, std::uint64_t> counts;
    for (const std::string& raw_token : docs[doc]) {
      std::string token = raw_token;
      if (opts.lowercase) {
        for (char& ch : token) {
          ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
      }
      const auto it = lookup.find(token);
      if (it == lookup.end()) {
        continue;  // out-of-vocabulary
      }
      const std::uint32_t index = it->second;
      if (index < opts.stop_word_count) {
        continue;  // stop word
      }
      if (tokens[index].find('_') != std::string::npos) {
        continue;  // multi-token phrase entry
      }
      ++counts[index];
    }
    if (counts.empty()) {
      std::cerr << "warning: document " << doc << " filtered to empty; skipped\n";
      skipped.push_back(doc);
      continue;
    }

    std::vector<std::pair<std::uint32_t, std::uint64_t>> freq(counts.begin(), counts.end());
    if (freq.size() > opts.max_words_per_doc) {
      // Keep the most frequent words; ties go to the smaller vocabulary index.
      std::sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
          return a.second > b.second;
        }
        return a.first < b.first;
      });
      freq.resize(opts.max_words_per_doc);
    }
    std::vector<std::pair<std::uint32_t, double>> raw;
    raw.reserve(freq.size());
    for (const auto& [index, count] : freq) {
      raw.emplace_back(index, static_cast<double>(count));
    }
    // Normalization runs after truncation so kept weights sum to 1.
    histograms.push_back(normalize_histogram(std::move(raw), vocab->size()));
    kept_labels.push_back(labels[doc]);
  }

  if (histograms.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "every document filtered to empty");
  }
  return CorpusIngestResult{build_database(histograms, std::move(kept_labels), std::move(vocab)),
                            std::move(skipped)};
}

void save_database(const HistogramDatabase& db, const std::string& path) {
  const EmbeddingVocabulary& vocab = db.vocab();
  std::vector<unsigned char> out;
  const std::size_t n = db.size();
  const std::size_t v = vocab.size();
  const std::size_t m = vocab.dim();
  const std::size_t nnz = db.nnz();
  out.reserve(64 + (n + 1) * 8 + nnz * 12 + n * 4 + v * m * 8 + v * 8);

  out.insert(out.end(), kContainerMagic, kContainerMagic + 4);
  put_u64(out, kContainerVersion);
  put_u64(out, n);
  put_u64(out, v);
  put_u64(out, m);
  put_u64(out, nnz);
  for (std::uint64_t x : db.row_offsets()) put_u64(out, x);
  for (std::uint32_t x : db.col_indices()) put_u32(out, x);
  for (double x : db.values()) put_f64(out, x);
  for (std::int32_t x : db.labels()) put_i32(out, x);
  for (double x : vocab.coords()) put_f64(out, x);
  if (vocab.tokens().empty()) {
    for (std::size_t u = 0; u < v; ++u) put_u32(out, 0);
  } else {
    for (const std::string& token : vocab.tokens()) {
      put_u32(out, static_cast<std::uint32_t>(token.size()));
      out.insert(out.end(), token.begin(), token.end());
    }
  }
  put_u64(out, fnv1a(out.data(), out.size()));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file || !file.write(reinterpret_cast<const char*>(out.data()),
                           static_cast<std::streamsize>(out.size()))) {
    throw_error(ErrorKind::IoFailure, "cannot write " + path);
  }
}

HistogramDatabase load_database(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw_error(ErrorKind::VersionMismatch, path + " is not an EMDG container");
  }
  if (bytes.size() < 4 + 5 * 8 + 8) {
    throw_error(ErrorKind::ChecksumFailure, path + " is truncated");
  }
  const std::size_t payload = bytes.size() - 8;
  Cursor trailer(bytes.data() + payload, 8);
  if (trailer.u64_le() != fnv1a(bytes.data(), payload)) {
    throw_error(ErrorKind::ChecksumFailure, path + " failed its checksum");
  }

  Cursor in(bytes.data(), payload);
  in.bytes(4, ErrorKind::ChecksumFailure);  // magic, already verified
  const std::uint64_t version = in.u64_le();
  if (version != kContainerVersion) {
    throw_error(ErrorKind::VersionMismatch,
                path + " uses format version " + std::to_string(version));
  }
  const std::size_t n = in.u64_le();
  const std::size_t v = in.u64_le();
  const std::size_t m = in.u64_le();
  const std::size_t nnz = in.u64_le();

  std::vector<std::uint64_t> row_offsets(n + 1);
  for (auto& x : row_offsets) x = in.u64_le();
  std::vector<std::uint32_t> col_indices(nnz);
  for (auto& x : col_indices) x = in.u32_le();
  std::vector<double> values(nnz);
  for (auto& x : values) x = in.f64_le();
  std::vector<std::int32_t> labels(n);
  for (auto& x : labels) x = in.i32_le();
  std::vector<double> coords(v * m);
  for (auto& x : coords) x = in.f64_le();
  std::vector<std::string> token_table(v);
  bool any_token = false;
  for (auto& token : token_table) {
    const std::uint32_t len = in.u32_le();
    const unsigned char* data = in.bytes(len, ErrorKind::ChecksumFailure);
    token.assign(reinterpret_cast<const char*>(data), len);
    any_token = any_token || len > 0;
  }

  auto vocab = std::make_shared<EmbeddingVocabulary>(
      m, std::move(coords), any_token ? std::move(token_table) : std::vector<std::string>{});
  return HistogramDatabase(std::move(vocab), std::move(row_offsets), std::move(col_indices),
                           std::move(values), std::move(labels));
}

void export_jsonl(const HistogramDatabase& db, std::ostream& out) {
  for (std::size_t u = 0; u < db.size(); ++u) {
    nlohmann::json line;
    line["index"] = u;
    line["label"] = db.label(u);
    nlohmann::json bins = nlohmann::json::array();
    const auto idx = db.row_indices(u);
    const auto val = db.row_values(u);
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      bins.push_back(nlohmann::json::array({idx[pos], val[pos]}));
    }
    line["bins"] = std::move(bins);
    out << line.dump() << '\n';
  }
}

}  // namespace emdg
