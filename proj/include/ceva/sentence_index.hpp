#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ceva/backend.hpp"
#include "ceva/embedding.hpp"
#include "ceva/ingest.hpp"

namespace ceva {

inline constexpr std::size_t kDefaultRetrievalK = 5;

struct RetrievalConfig {
  std::size_t k = kDefaultRetrievalK;
  bool operator==(const RetrievalConfig&) const = default;
};

// Embeds texts through a backend and enforces the provider contract: one
// vector per text, advertised dimension, finite, re-normalized to unit
// length. Contract violations raise ProtocolError.
std::vector<EmbeddingVector> embed_texts(Backend& backend,
                                         const std::vector<std::string>& texts);

struct Neighbor {
  std::size_t sentence_index = 0;
  double similarity = 0.0;
  bool operator==(const Neighbor&) const = default;
};

// Flat exact cosine index over a document's sentences. Immutable after build.
class SentenceIndex {
 public:
  SentenceIndex(std::string doc_id, std::size_t dimension);

  // Entries must be appended in increasing sentence index order.
  void add(std::size_t sentence_index, const EmbeddingVector& v);

  const std::string& doc_id() const { return doc_id_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::size_t sentence_index(std::size_t entry) const { return indices_[entry]; }
  EmbeddingVector vector(std::size_t entry) const;

  // Exact top-k by dot product (cosine on unit vectors), descending, ties by
  // lower sentence index. Returns min(k, size()) neighbors.
  std::vector<Neighbor> knn(const EmbeddingVector& query, std::size_t k) const;

 private:
  std::string doc_id_;
  std::size_t dimension_;
  std::vector<std::size_t> indices_;
  std::vector<double> data_;  // row-major, size() x dimension_
};

// Embeds every sentence in document order. Provider failures are rethrown
// with the first sentence index of the failing batch in the message.
SentenceIndex build_sentence_index(const SourceDocument& doc, Backend& backend,
                                   std::size_t batch_size = 64);

}  // namespace ceva
