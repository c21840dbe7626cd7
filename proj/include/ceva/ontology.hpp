#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ceva/ingest.hpp"

namespace ceva {

struct ConceptEntry {
  std::string concept_id;
  std::string label;
  std::vector<std::string> aliases;  // normalized, deduplicated
  std::optional<std::string> uri;

  bool operator==(const ConceptEntry&) const = default;
};

// Flat surface-form lookup standing in for an ontology linking service.
class Gazetteer {
 public:
  Gazetteer() = default;

  // Adds a concept; aliases are normalized and deduplicated. Throws
  // LoadError if a surface form is already claimed by another concept or
  // the concept id is taken.
  void add(ConceptEntry entry);

  // concept_id for a normalized surface form, or nullptr.
  const std::string* lookup(const std::string& surface_form) const;
  const ConceptEntry* find(std::string_view concept_id) const;
  const ConceptEntry& at(std::string_view concept_id) const;

  const std::unordered_map<std::string, std::string>& entries() const {
    return entries_;
  }
  const std::map<std::string, ConceptEntry, std::less<>>& concepts() const {
    return concepts_;
  }
  std::size_t max_form_tokens() const { return max_form_tokens_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
  std::map<std::string, ConceptEntry, std::less<>> concepts_;
  std::size_t max_form_tokens_ = 0;
};

// Tab-separated: concept_id, label, uri, alias1|alias2|...; '#' lines and
// blank lines are skipped.
Gazetteer load_gazetteer(std::string_view raw);

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const TokenSpan&) const = default;
};

struct ConceptOccurrence {
  std::string concept_id;
  std::size_t sentence_global_index = 0;
  TokenSpan token_span;
  bool operator==(const ConceptOccurrence&) const = default;
};

struct TokenMatch {
  std::string concept_id;
  TokenSpan span;
  bool operator==(const TokenMatch&) const = default;
};

// Longest-match-first, left-to-right, non-overlapping exact matching.
std::vector<TokenMatch> match_tokens(const std::vector<std::string>& tokens,
                                     const Gazetteer& gaz);

std::vector<ConceptOccurrence> spot_concepts(const SourceDocument& doc,
                                             const Gazetteer& gaz);

struct ConceptStats {
  std::string concept_id;
  std::size_t frequency = 0;
  double tfidf = 0.0;
  std::vector<std::size_t> section_counts;
  bool operator==(const ConceptStats&) const = default;
};

using ConceptStatsMap = std::map<std::string, ConceptStats, std::less<>>;

// tfidf(c) = frequency(c) * ln(1 + S / s_c) with sections as the corpus.
ConceptStatsMap compute_stats(const std::vector<ConceptOccurrence>& occurrences,
                              const SourceDocument& doc);

class CooccurrenceGraph {
 public:
  using Edge = std::pair<std::string, std::string>;  // first < second

  void add_node(const std::string& id) { nodes_.insert(id); }
  // Increments the edge between two distinct concepts.
  void increment(const std::string& a, const std::string& b);

  std::size_t count(std::string_view a, std::string_view b) const;
  std::size_t max_count() const { return max_count_; }
  bool has_node(std::string_view id) const { return nodes_.find(id) != nodes_.end(); }
  const std::set<std::string, std::less<>>& nodes() const { return nodes_; }
  const std::map<Edge, std::size_t>& edges() const { return edges_; }

 private:
  std::set<std::string, std::less<>> nodes_;
  std::map<Edge, std::size_t> edges_;
  std::size_t max_count_ = 0;
};

CooccurrenceGraph build_cooccurrence(
    const std::vector<ConceptOccurrence>& occurrences);

enum class ImportanceMetric { kFrequency, kTfidf };

std::string_view to_string(ImportanceMetric metric);
// Throws ArgumentError for anything other than "frequency" / "tfidf".
ImportanceMetric parse_metric(std::string_view s);
double metric_value(const ConceptStats& stats, ImportanceMetric metric);

// The ceil(K/100 * N) most important concepts, descending by metric, ties by
// higher frequency then concept id. K must lie in (0, 100].
std::vector<std::string> top_k_percent(const ConceptStatsMap& stats,
                                       ImportanceMetric metric, double k);

}  // namespace ceva
