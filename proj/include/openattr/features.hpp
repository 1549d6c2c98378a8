#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "openattr/corpus.hpp"
#include "openattr/error.hpp"
#include "openattr/vocab.hpp"

namespace openattr {

// Document length in sentences; sentences <= 0 means one document per book.
struct ChunkSize {
  int sentences = 0;

  static ChunkSize count(int n) {
    if (n < 1) fail("features", "chunk size must be >= 1 sentences");
    return ChunkSize{n};
  }
  static ChunkSize whole_book() { return ChunkSize{0}; }

  bool whole() const { return sentences <= 0; }
  bool operator==(const ChunkSize&) const = default;

  std::string label() const { return whole() ? "whole" : std::to_string(sentences); }
};

struct DocumentChunk {
  int book_id = -1;
  int author_id = -1;
  int chunk_index = 0;
  int start_sentence = 0;
  int n_sentences = 0;
};

// Consecutive non-overlapping chunks; a trailing partial chunk is dropped,
// so a book shorter than one chunk yields nothing (callers warn).
inline std::vector<DocumentChunk> chunk_book(const TokenizedBook& book, ChunkSize size) {
  const int total = static_cast<int>(book.text.sentences.size());
  std::vector<DocumentChunk> chunks;
  if (total == 0) return chunks;
  if (size.whole()) {
    chunks.push_back({book.book.id, book.book.author, 0, 0, total});
    return chunks;
  }
  const int len = size.sentences;
  for (int start = 0; start + len <= total; start += len) {
    chunks.push_back({book.book.id, book.book.author, static_cast<int>(chunks.size()), start, len});
  }
  return chunks;
}

inline std::vector<std::string> flattened_tokens(const TokenizedBook& book,
                                                 const DocumentChunk& chunk) {
  std::vector<std::string> tokens;
  for (int s = chunk.start_sentence; s < chunk.start_sentence + chunk.n_sentences; ++s) {
    const auto& sentence = book.text.sentences[static_cast<std::size_t>(s)];
    tokens.insert(tokens.end(), sentence.begin(), sentence.end());
  }
  return tokens;
}

// Sparse non-negative vector; indices strictly increasing within [0, dim).
struct FeatureVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::uint32_t dim = 0;

  std::size_t nnz() const { return indices.size(); }
  bool operator==(const FeatureVector&) const = default;
};

template <typename TokenRange>
FeatureVector vectorize_tokens(const TokenRange& tokens, const Vocabulary& v) {
  if (v.k() == 0) fail("features", "empty vocabulary");
  std::vector<std::uint32_t> hits;
  for (const auto& token : tokens) {
    if (auto idx = lookup(v, token)) hits.push_back(static_cast<std::uint32_t>(*idx));
  }
  std::sort(hits.begin(), hits.end());
  FeatureVector fv;
  fv.dim = static_cast<std::uint32_t>(v.k());
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    fv.indices.push_back(hits[i]);
    fv.values.push_back(static_cast<double>(j - i));
    i = j;
  }
  return fv;
}

inline FeatureVector vectorize(const TokenizedBook& book, const DocumentChunk& chunk,
                               const Vocabulary& v) {
  return vectorize_tokens(flattened_tokens(book, chunk), v);
}

// Divides every stored value by the vector's maximum stored value, so the
// maximum becomes exactly 1. Empty vectors pass through.
inline FeatureVector row_normalize(FeatureVector fv) {
  if (fv.values.empty()) return fv;
  double max_value = *std::max_element(fv.values.begin(), fv.values.end());
  for (double& v : fv.values) v /= max_value;
  return fv;
}

// Per-column maxima fitted on training rows. Columns never seen in training
// (maximum 0) pass values through unchanged.
struct ColumnScaler {
  std::vector<double> max_abs;

  std::uint32_t dim() const { return static_cast<std::uint32_t>(max_abs.size()); }
};

inline ColumnScaler fit_column_scaler(const std::vector<FeatureVector>& training_rows,
                                      std::uint32_t dim) {
  ColumnScaler s;
  s.max_abs.assign(dim, 0.0);
  for (const FeatureVector& fv : training_rows) {
    if (fv.dim != dim) fail("features", "scaler fit: row dimension mismatch");
    for (std::size_t i = 0; i < fv.indices.size(); ++i) {
      double& m = s.max_abs[fv.indices[i]];
      m = std::max(m, std::abs(fv.values[i]));
    }
  }
  return s;
}

inline FeatureVector apply_scaler(const ColumnScaler& s, FeatureVector fv) {
  if (fv.dim != s.dim()) fail("features", "scaler apply: dimension mismatch");
  for (std::size_t i = 0; i < fv.indices.size(); ++i) {
    double m = s.max_abs[fv.indices[i]];
    if (m > 0.0) fv.values[i] /= m;
  }
  return fv;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Line-oriented dump for external inspection:
//   book_id,chunk_index,author_id,index:value index:value ...
inline void write_feature_record(std::ostream& out, const DocumentChunk& chunk,
                                 const FeatureVector& fv) {
  out << chunk.book_id << ',' << chunk.chunk_index << ',' << chunk.author_id << ',';
  for (std::size_t i = 0; i < fv.indices.size(); ++i) {
    if (i > 0) out << ' ';
    out << fv.indices[i] << ':' << detail::format_double(fv.values[i]);
  }
  out << '\n';
}

}  // namespace openattr
