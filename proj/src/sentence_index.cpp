#include "ceva/sentence_index.hpp"

#include <algorithm>
#include <cmath>

namespace ceva {

std::vector<EmbeddingVector> embed_texts(Backend& backend,
                                         const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  const std::size_t dim = backend.capabilities().embedding_dim;
  EmbedResponse resp = backend.embed(EmbedRequest{texts});
  if (resp.vectors.size() != texts.size())
    throw ProtocolError("embed: expected " + std::to_string(texts.size()) +
                        " vectors, got " + std::to_string(resp.vectors.size()));
  for (std::size_t i = 0; i < resp.vectors.size(); ++i) {
    auto& v = resp.vectors[i].values;
    if (v.size() != dim)
      throw ProtocolError("embed: vector " + std::to_string(i) +
                          " has dimension " + std::to_string(v.size()) +
                          ", backend advertises " + std::to_string(dim));
    if (!std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); }) ||
        !normalize_in_place(v))
      throw ProtocolError("embed: vector " + std::to_string(i) +
                          " is zero or non-finite");
  }
  return std::move(resp.vectors);
}

SentenceIndex::SentenceIndex(std::string doc_id, std::size_t dimension)
    : doc_id_(std::move(doc_id)), dimension_(dimension) {
  if (dimension == 0) throw ArgumentError("index dimension must be > 0");
}

void SentenceIndex::add(std::size_t sentence_index, const EmbeddingVector& v) {
  if (v.dimension() != dimension_)
    throw ArgumentError("vector dimension " + std::to_string(v.dimension()) +
                        " does not match index dimension " +
                        std::to_string(dimension_));
  if (!indices_.empty() && sentence_index <= indices_.back())
    throw ArgumentError("sentence indices must be strictly increasing");
  indices_.push_back(sentence_index);
  data_.insert(data_.end(), v.values.begin(), v.values.end());
}

EmbeddingVector SentenceIndex::vector(std::size_t entry) const {
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(entry * dimension_);
  return {std::vector<double>(first, first + static_cast<std::ptrdiff_t>(dimension_))};
}

std::vector<Neighbor> SentenceIndex::knn(const EmbeddingVector& query,
                                         std::size_t k) const {
  if (query.dimension() != dimension_)
    throw ArgumentError("query dimension " + std::to_string(query.dimension()) +
                            " does not match index dimension " +
                            std::to_string(dimension_),
                        "query");
  std::vector<Neighbor> all;
  all.reserve(size());
  for (std::size_t e = 0; e < size(); ++e) {
    std::span<const double> row(data_.data() + e * dimension_, dimension_);
    all.push_back({indices_[e], dot(row, query.values)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.sentence_index < b.sentence_index;
  };
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), better);
  all.resize(keep);
  return all;
}

SentenceIndex build_sentence_index(const SourceDocument& doc, Backend& backend,
                                   std::size_t batch_size) {
  const std::size_t dim = backend.capabilities().embedding_dim;
  SentenceIndex index(doc.doc_id, dim);
  const auto sentences = doc.sentences();
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t first = 0; first < sentences.size(); first += batch_size) {
    std::size_t last = std::min(first + batch_size, sentences.size());
    std::vector<std::string> texts;
    for (std::size_t i = first; i < last; ++i) texts.push_back(sentences[i]->text);
    std::vector<EmbeddingVector> vectors;
    const std::string where = "while embedding sentence " +
                              std::to_string(sentences[first]->global_index);
    try {
      vectors = embed_texts(backend, texts);
    } catch (const BackendError& e) {
      throw BackendError(e.code(), std::string(e.what()) + " (" + where + ")");
    } catch (const ProtocolError& e) {
      throw ProtocolError(std::string(e.what()) + " (" + where + ")");
    }
    for (std::size_t i = first; i < last; ++i)
      index.add(sentences[i]->global_index, vectors[i - first]);
  }
  return index;
}

}  // namespace ceva
