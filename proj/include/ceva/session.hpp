#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ceva/backend.hpp"
#include "ceva/ingest.hpp"
#include "ceva/ontology.hpp"
#include "ceva/projection.hpp"
#include "ceva/sentence_index.hpp"

namespace ceva {

enum class Provenance {
  kModelGenerated,
  kConceptRetrieved,
  kParaphrased,
  kUserEdited,
  kUserAuthored,
};

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct SummarySentence {
  std::string sentence_id;
  std::string text;
  Provenance provenance = Provenance::kModelGenerated;
  std::vector<std::size_t> source_indices;
  std::vector<std::string> concept_ids;

  bool operator==(const SummarySentence&) const = default;
};

struct SessionVersion {
  std::size_t number = 0;  // 1-based
  std::int64_t timestamp_ms = 0;
  std::string operation;
  std::vector<SummarySentence> sentences;

  bool operator==(const SessionVersion&) const = default;
};

struct SummarySession {
  std::string session_id;
  std::string doc_id;
  std::vector<SummarySentence> sentences;
  std::vector<std::string> selected_concepts;  // insertion-ordered, unique
  std::vector<SessionVersion> versions;        // append-only
  RetrievalConfig retrieval;
  std::uint64_t next_sentence_seq = 1;

  const SummarySentence* find(std::string_view sentence_id) const;
  std::vector<std::string> texts() const;
  // Document sentences cited by the current summary.
  std::vector<std::size_t> used_source_indices() const;

  bool operator==(const SummarySession&) const = default;
};

struct SummaryOptions {
  std::size_t max_summary_tokens = 200;
  // Summarize section groups separately when the document exceeds the
  // backend's input limit.
  bool chunking = false;
};

// Section groups, in order, each within max_tokens. Whole sections are
// packed greedily; a section that alone exceeds the cap is split between
// sentences. A single sentence over the cap raises CapacityError.
std::vector<std::vector<std::size_t>> chunk_sentences(const SourceDocument& doc,
                                                      std::size_t max_tokens);

SummarySession generate_initial_summary(const SourceDocument& doc,
                                        Backend& backend,
                                        std::string session_id,
                                        const SummaryOptions& options = {},
                                        RetrievalConfig retrieval = {});

struct CustomizeResult {
  SummarySession session;
  // Document sentences fed to the summarizer, ascending.
  std::vector<std::size_t> context_indices;
  bool empty_context = false;
};

// Retrieves the k nearest document sentences per concept, drops sentences
// the summary already cites, summarizes the rest (in document order) and
// appends the result. Existing sentences are never touched.
CustomizeResult customize(const SummarySession& session,
                          const std::vector<std::string>& concept_ids,
                          const ConceptVectors& concept_embeddings,
                          const SourceDocument& doc, const SentenceIndex& index,
                          Backend& backend, const SummaryOptions& options = {},
                          std::optional<std::size_t> k = std::nullopt);

// The retrieval step of customize on its own, for inspection and tests.
std::vector<std::size_t> customization_context(
    const SummarySession& session, const std::vector<std::string>& concept_ids,
    const ConceptVectors& concept_embeddings, const SentenceIndex& index,
    std::size_t k);

struct Candidate {
  std::size_t sentence_index = 0;
  std::string text;
  double similarity = 0.0;
  bool operator==(const Candidate&) const = default;
};

using CandidateSet = std::map<std::string, std::vector<Candidate>, std::less<>>;

CandidateSet candidate_sentences(const SummarySession& session,
                                 const std::vector<std::string>& concept_ids,
                                 const ConceptVectors& concept_embeddings,
                                 const SentenceIndex& index,
                                 const SourceDocument& doc,
                                 std::optional<std::size_t> k = std::nullopt);

SummarySession insert_sentence(const SummarySession& session,
                               std::size_t position, const Candidate& candidate,
                               std::optional<std::string> concept_id = {});
SummarySession author_sentence(const SummarySession& session,
                               std::size_t position, const std::string& text);

std::vector<std::string> paraphrase_sentence(const SummarySession& session,
                                             std::string_view sentence_id,
                                             Backend& backend,
                                             std::size_t n_alternatives = 1);
SummarySession accept_paraphrase(const SummarySession& session,
                                 std::string_view sentence_id,
                                 const std::string& text);
SummarySession edit_sentence(const SummarySession& session,
                             std::string_view sentence_id,
                             const std::string& new_text);
SummarySession reorder(const SummarySession& session,
                       const std::vector<std::string>& permutation);
SummarySession delete_sentence(const SummarySession& session,
                               std::string_view sentence_id);
// Restores the sentence list of an earlier version as a new version.
SummarySession revert_to_version(const SummarySession& session,
                                 std::size_t version_number);

struct CoverageEntry {
  std::string concept_id;
  std::size_t document_frequency = 0;
  bool in_summary = false;
  bool operator==(const CoverageEntry&) const = default;
};

std::vector<CoverageEntry> coverage_report(const SummarySession& session,
                                           const ConceptStatsMap& stats,
                                           const Gazetteer& gaz,
                                           ImportanceMetric metric,
                                           double top_percent);

// One sentence per line.
std::string export_summary_text(const SummarySession& session);
// Tab-separated: position, sentence_id, provenance, source_indices,
// concept_ids (lists comma-joined).
std::string export_provenance(const SummarySession& session);

// Violated session invariants, empty when consistent.
std::vector<std::string> check_session_invariants(const SummarySession& s);

nlohmann::json to_json(const SummarySentence& s);
nlohmann::json to_json(const SummarySession& s);
// Throws LoadError naming the session on malformed or inconsistent input.
SummarySession session_from_json(const nlohmann::json& j);

}  // namespace ceva
