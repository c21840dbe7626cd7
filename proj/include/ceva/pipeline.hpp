#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ceva/backend.hpp"
#include "ceva/glyph.hpp"
#include "ceva/ingest.hpp"
#include "ceva/layout.hpp"
#include "ceva/ontology.hpp"
#include "ceva/projection.hpp"
#include "ceva/sentence_index.hpp"
#include "ceva/session.hpp"

namespace ceva {

// Produces the backend used for one document. The mock needs the
// document's concept statistics to score sentences; remote backends ignore
// them.
using BackendFactory =
    std::function<std::shared_ptr<Backend>(const ConceptStatsMap& context)>;

// "mock" yields a per-document MockBackend over `gazetteer`; anything else
// is treated as a backend URL shared by all documents.
BackendFactory make_backend_factory(const std::string& spec,
                                    std::shared_ptr<const Gazetteer> gazetteer);

// Everything derived from one document: concepts, statistics, co-occurrence,
// sentence index, concept embeddings (of concept labels) and the base
// layout over all concepts that occur.
struct DocumentAnalysis {
  SourceDocument doc;
  std::shared_ptr<const Gazetteer> gazetteer;
  std::shared_ptr<Backend> backend;
  std::vector<ConceptOccurrence> occurrences;
  ConceptStatsMap stats;
  CooccurrenceGraph graph;
  SentenceIndex index{"", 1};
  ConceptVectors concept_embeddings;
  Projection2D projection;
  LayoutState layout;
};

DocumentAnalysis analyze_document(SourceDocument doc,
                                  std::shared_ptr<const Gazetteer> gazetteer,
                                  const BackendFactory& backends,
                                  const LayoutConfig& layout_config = {},
                                  const std::string& projection_method = "pca",
                                  const ProjectionRegistry* registry = nullptr);

// Base layout under another projection method (re-projects and re-runs the
// force model).
LayoutState layout_for_projection(const DocumentAnalysis& analysis,
                                  const std::string& projection_method,
                                  const ProjectionRegistry* registry,
                                  const LayoutConfig& layout_config);

// --- JSON payloads --------------------------------------------------------

nlohmann::json document_to_json(const SourceDocument& doc);
nlohmann::json concept_table_json(const DocumentAnalysis& analysis,
                                  ImportanceMetric metric, double top_percent);
// {schema_version, mode, focus_set, metric, nodes: [{concept_id, label, x, y,
//  size, edges: [{other, count}]}]}, restricted to `visible` when given.
nlohmann::json layout_export(const LayoutState& layout,
                             const DocumentAnalysis& analysis,
                             ImportanceMetric metric,
                             const std::vector<std::string>* visible = nullptr);
nlohmann::json glyph_to_json(const ConceptGlyph& glyph);
nlohmann::json candidates_to_json(const CandidateSet& candidates);
nlohmann::json coverage_to_json(const std::vector<CoverageEntry>& coverage);

}  // namespace ceva
