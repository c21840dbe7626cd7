#include "ceva/pipeline.hpp"

#include "ceva/http_backend.hpp"

namespace ceva {

using nlohmann::json;

BackendFactory make_backend_factory(const std::string& spec,
                                    std::shared_ptr<const Gazetteer> gazetteer) {
  if (spec == "mock") {
    return [gazetteer](const ConceptStatsMap& context) -> std::shared_ptr<Backend> {
      return std::make_shared<MockBackend>(gazetteer, context);
    };
  }
  auto remote = make_remote_backend(spec);
  return [remote](const ConceptStatsMap&) { return remote; };
}

namespace {

LayoutState base_layout(const ConceptVectors& embeddings,
                        const CooccurrenceGraph& graph,
                        const std::string& method,
                        const ProjectionRegistry* registry,
                        const LayoutConfig& cfg, Projection2D* projection_out) {
  if (embeddings.empty()) {
    if (projection_out) *projection_out = {method, {}};
    return {};
  }
  Projection2D projection = project(embeddings, method, registry);
  LayoutState layout = run_layout(init_layout(projection), graph, cfg);
  if (projection_out) *projection_out = std::move(projection);
  return layout;
}

}  // namespace

DocumentAnalysis analyze_document(SourceDocument doc,
                                  std::shared_ptr<const Gazetteer> gazetteer,
                                  const BackendFactory& backends,
                                  const LayoutConfig& layout_config,
                                  const std::string& projection_method,
                                  const ProjectionRegistry* registry) {
  if (!gazetteer) gazetteer = std::make_shared<Gazetteer>();
  DocumentAnalysis a;
  a.doc = std::move(doc);
  a.gazetteer = gazetteer;
  a.occurrences = spot_concepts(a.doc, *gazetteer);
  a.stats = compute_stats(a.occurrences, a.doc);
  a.graph = build_cooccurrence(a.occurrences);
  a.backend = backends(a.stats);
  a.index = build_sentence_index(a.doc, *a.backend);

  std::vector<std::string> ids;
  std::vector<std::string> labels;
  for (const auto& [id, cs] : a.stats) {
    ids.push_back(id);
    labels.push_back(gazetteer->at(id).label);
  }
  auto vectors = embed_texts(*a.backend, labels);
  for (std::size_t i = 0; i < ids.size(); ++i)
    a.concept_embeddings.emplace(ids[i], std::move(vectors[i]));

  a.layout = base_layout(a.concept_embeddings, a.graph, projection_method,
                         registry, layout_config, &a.projection);
  return a;
}

LayoutState layout_for_projection(const DocumentAnalysis& analysis,
                                  const std::string& projection_method,
                                  const ProjectionRegistry* registry,
                                  const LayoutConfig& layout_config) {
  return base_layout(analysis.concept_embeddings, analysis.graph,
                     projection_method, registry, layout_config, nullptr);
}

json document_to_json(const SourceDocument& doc) {
  json sections = json::array();
  for (const auto& section : doc.sections) {
    json sentences = json::array();
    for (const auto& s : section.sentences)
      sentences.push_back({{"global_index", s.global_index},
                           {"section_index", s.section_index},
                           {"char_span", {s.char_span.start, s.char_span.end}},
                           {"text", s.text},
                           {"token_count", s.tokens.size()}});
    sections.push_back({{"index", section.index},
                        {"heading", section.heading},
                        {"metadata", section.metadata},
                        {"sentences", std::move(sentences)}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"doc_id", doc.doc_id},
              {"title", doc.title},
              {"token_count", doc.token_count},
              {"sentence_count", doc.sentence_count()},
              {"sections", std::move(sections)}};
}

json concept_table_json(const DocumentAnalysis& analysis,
                        ImportanceMetric metric, double top_percent) {
  json concepts = json::array();
  if (!analysis.stats.empty()) {
    for (const auto& id : top_k_percent(analysis.stats, metric, top_percent)) {
      const auto& cs = analysis.stats.find(id)->second;
      const auto& entry = analysis.gazetteer->at(id);
      json c{{"concept_id", id},
             {"label", entry.label},
             {"frequency", cs.frequency},
             {"tfidf", cs.tfidf},
             {"section_counts", cs.section_counts}};
      if (entry.uri) c["uri"] = *entry.uri;
      concepts.push_back(std::move(c));
    }
  }
  return json{{"schema_version", kSchemaVersion},
              {"metric", to_string(metric)},
              {"top", top_percent},
              {"total_concepts", analysis.stats.size()},
              {"concepts", std::move(concepts)}};
}

json layout_export(const LayoutState& layout, const DocumentAnalysis& analysis,
                   ImportanceMetric metric,
                   const std::vector<std::string>* visible) {
  std::set<std::string, std::less<>> shown;
  if (visible)
    shown.insert(visible->begin(), visible->end());
  else
    for (const auto& [id, p] : layout.positions) shown.insert(id);

  json nodes = json::array();
  for (const auto& [id, p] : layout.positions) {
    if (!shown.count(id)) continue;
    json edges = json::array();
    for (const auto& [edge, count] : analysis.graph.edges()) {
      const std::string* other = nullptr;
      if (edge.first == id) other = &edge.second;
      else if (edge.second == id) other = &edge.first;
      if (other && shown.count(*other))
        edges.push_back({{"other", *other}, {"count", count}});
    }
    auto st = analysis.stats.find(id);
    const auto* entry = analysis.gazetteer->find(id);
    nodes.push_back({{"concept_id", id},
                     {"label", entry ? entry->label : id},
                     {"x", p.x},
                     {"y", p.y},
                     {"size", st == analysis.stats.end()
                                  ? 0.0
                                  : metric_value(st->second, metric)},
                     {"edges", std::move(edges)}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"mode", layout.mode == LayoutMode::kFocus ? "focus" : "base"},
              {"focus_set", std::vector<std::string>(layout.focus_set.begin(),
                                                     layout.focus_set.end())},
              {"metric", to_string(metric)},
              {"iterations_run", layout.iterations_run},
              {"converged", layout.converged},
              {"nodes", std::move(nodes)}};
}

json glyph_to_json(const ConceptGlyph& glyph) {
  json curve = json::array();
  for (const auto& s : glyph.right_curve) curve.push_back({s.t, s.density});
  json echo = json::array();
  for (const auto& w : glyph.section_echo)
    echo.push_back({{"section_index", w.section_index}, {"weight", w.weight}});
  return json{{"schema_version", kSchemaVersion},
              {"concept_id", glyph.concept_id},
              {"left_bins", glyph.left_bins},
              {"right_counts", glyph.right_counts},
              {"right_curve", std::move(curve)},
              {"section_echo", std::move(echo)}};
}

json candidates_to_json(const CandidateSet& candidates) {
  json out = json::object();
  for (const auto& [id, list] : candidates) {
    json items = json::array();
    for (const auto& c : list)
      items.push_back({{"sentence_index", c.sentence_index},
                       {"text", c.text},
                       {"similarity", c.similarity}});
    out[id] = std::move(items);
  }
  return json{{"schema_version", kSchemaVersion}, {"candidates", std::move(out)}};
}

json coverage_to_json(const std::vector<CoverageEntry>& coverage) {
  json items = json::array();
  for (const auto& c : coverage)
    items.push_back({{"concept_id", c.concept_id},
                     {"in_document_frequency", c.document_frequency},
                     {"in_summary", c.in_summary}});
  return json{{"schema_version", kSchemaVersion}, {"coverage", std::move(items)}};
}

}  // namespace ceva
