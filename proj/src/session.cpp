#include "ceva/session.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <set>

#include "ceva/error.hpp"

namespace ceva {
namespace {

using nlohmann::json;

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch())
      .count();
}

std::string trimmed(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void commit(SummarySession& s, std::string operation) {
  SessionVersion v;
  v.number = s.versions.size() + 1;
  v.timestamp_ms = now_ms();
  if (!s.versions.empty())
    v.timestamp_ms = std::max(v.timestamp_ms, s.versions.back().timestamp_ms);
  v.operation = std::move(operation);
  v.sentences = s.sentences;
  s.versions.push_back(std::move(v));
}

std::string next_id(SummarySession& s) {
  return "s" + std::to_string(s.next_sentence_seq++);
}

std::size_t position_of(const SummarySession& s, std::string_view sentence_id) {
  for (std::size_t i = 0; i < s.sentences.size(); ++i)
    if (s.sentences[i].sentence_id == sentence_id) return i;
  throw ArgumentError("unknown sentence id " + std::string(sentence_id),
                      "sentence_id");
}

std::vector<std::string> unique_in_order(const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  for (const auto& id : ids)
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  return out;
}

const EmbeddingVector& query_for(const ConceptVectors& embeddings,
                                 const std::string& concept_id) {
  auto it = embeddings.find(concept_id);
  if (it == embeddings.end())
    throw ArgumentError("no embedding for concept " + concept_id, "concepts");
  return it->second;
}

std::vector<std::string> summarize_checked(Backend& backend,
                                           const std::string& text,
                                           std::size_t max_tokens) {
  auto resp = backend.summarize(SummarizeRequest{text, max_tokens});
  std::size_t total = 0;
  std::vector<std::string> out;
  for (auto& s : resp.sentences) {
    std::string t = trimmed(s);
    if (t.empty()) throw ProtocolError("summarize returned an empty sentence");
    total += tokenize(t).size();
    out.push_back(std::move(t));
  }
  if (total > max_tokens)
    throw ProtocolError("summarize returned " + std::to_string(total) +
                        " tokens for a budget of " +
                        std::to_string(max_tokens));
  return out;
}

std::string join_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += v[i];
  }
  return out;
}

std::string single_line(const std::string& s) {
  std::string out = s;
  std::replace_if(out.begin(), out.end(),
                  [](char c) { return c == '\n' || c == '\r' || c == '\t'; },
                  ' ');
  return out;
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kModelGenerated: return "model_generated";
    case Provenance::kConceptRetrieved: return "concept_retrieved";
    case Provenance::kParaphrased: return "paraphrased";
    case Provenance::kUserEdited: return "user_edited";
    case Provenance::kUserAuthored: return "user_authored";
  }
  return "model_generated";
}

Provenance provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::kModelGenerated, Provenance::kConceptRetrieved,
                 Provenance::kParaphrased, Provenance::kUserEdited,
                 Provenance::kUserAuthored})
    if (to_string(p) == s) return p;
  throw ArgumentError("unknown provenance '" + std::string(s) + "'",
                      "provenance");
}

const SummarySentence* SummarySession::find(std::string_view sentence_id) const {
  for (const auto& s : sentences)
    if (s.sentence_id == sentence_id) return &s;
  return nullptr;
}

std::vector<std::string> SummarySession::texts() const {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.text);
  return out;
}

std::vector<std::size_t> SummarySession::used_source_indices() const {
  std::set<std::size_t> used;
  for (const auto& s : sentences)
    used.insert(s.source_indices.begin(), s.source_indices.end());
  return {used.begin(), used.end()};
}

std::vector<std::vector<std::size_t>> chunk_sentences(const SourceDocument& doc,
                                                      std::size_t max_tokens) {
  std::vector<std::vector<std::size_t>> chunks;
  std::vector<std::size_t> current;
  std::size_t current_tokens = 0;
  auto flush = [&] {
    if (!current.empty()) chunks.push_back(std::move(current));
    current.clear();
    current_tokens = 0;
  };

  for (const auto& section : doc.sections) {
    std::size_t section_tokens = 0;
    for (const auto& s : section.sentences) section_tokens += s.tokens.size();
    if (section.sentences.empty()) continue;

    if (current_tokens + section_tokens <= max_tokens) {
      for (const auto& s : section.sentences) current.push_back(s.global_index);
      current_tokens += section_tokens;
      continue;
    }
    flush();
    if (section_tokens <= max_tokens) {
      for (const auto& s : section.sentences) current.push_back(s.global_index);
      current_tokens = section_tokens;
      continue;
    }
    for (const auto& s : section.sentences) {
      if (s.tokens.size() > max_tokens)
        throw CapacityError("sentence " + std::to_string(s.global_index) +
                            " has " + std::to_string(s.tokens.size()) +
                            " tokens; the backend accepts at most " +
                            std::to_string(max_tokens));
      if (current_tokens + s.tokens.size() > max_tokens) flush();
      current.push_back(s.global_index);
      current_tokens += s.tokens.size();
    }
    flush();
  }
  flush();
  return chunks;
}

SummarySession generate_initial_summary(const SourceDocument& doc,
                                        Backend& backend,
                                        std::string session_id,
                                        const SummaryOptions& options,
                                        RetrievalConfig retrieval) {
  if (doc.sentence_count() == 0)
    throw ArgumentError("document has no sentences to summarize", "doc_id");
  if (retrieval.k == 0) throw ArgumentError("k must be >= 1", "k");

  const std::size_t limit = backend.capabilities().max_input_tokens;
  std::vector<std::vector<std::size_t>> groups;
  if (doc.token_count <= limit) {
    groups.emplace_back();
    for (const auto* s : doc.sentences()) groups.back().push_back(s->global_index);
  } else if (!options.chunking) {
    throw CapacityError("document has " + std::to_string(doc.token_count) +
                        " tokens; the backend accepts at most " +
                        std::to_string(limit) + " (chunking disabled)");
  } else {
    groups = chunk_sentences(doc, limit);
  }

  SummarySession session;
  session.session_id = std::move(session_id);
  session.doc_id = doc.doc_id;
  session.retrieval = retrieval;
  for (const auto& group : groups) {
    std::string text;
    for (std::size_t idx : group) {
      if (!text.empty()) text.push_back(' ');
      text += doc.sentence(idx).text;
    }
    for (auto& sentence :
         summarize_checked(backend, text, options.max_summary_tokens)) {
      SummarySentence s;
      s.sentence_id = next_id(session);
      s.text = std::move(sentence);
      s.provenance = Provenance::kModelGenerated;
      session.sentences.push_back(std::move(s));
    }
  }
  commit(session, "generate");
  return session;
}

std::vector<std::size_t> customization_context(
    const SummarySession& session, const std::vector<std::string>& concept_ids,
    const ConceptVectors& concept_embeddings, const SentenceIndex& index,
    std::size_t k) {
  const auto used = session.used_source_indices();
  std::set<std::size_t> context;
  for (const auto& id : concept_ids) {
    for (const auto& nb : index.knn(query_for(concept_embeddings, id), k))
      if (!std::binary_search(used.begin(), used.end(), nb.sentence_index))
        context.insert(nb.sentence_index);
  }
  return {context.begin(), context.end()};
}

CustomizeResult customize(const SummarySession& session,
                          const std::vector<std::string>& concept_ids,
                          const ConceptVectors& concept_embeddings,
                          const SourceDocument& doc, const SentenceIndex& index,
                          Backend& backend, const SummaryOptions& options,
                          std::optional<std::size_t> k) {
  const auto concepts = unique_in_order(concept_ids);
  if (concepts.empty())
    throw ArgumentError("select at least one concept", "concepts");
  const std::size_t kk = k.value_or(session.retrieval.k);
  if (kk == 0) throw ArgumentError("k must be >= 1", "k");

  CustomizeResult result{session, {}, false};
  result.context_indices =
      customization_context(session, concepts, concept_embeddings, index, kk);

  SummarySession& next = result.session;
  for (const auto& id : concepts)
    if (std::find(next.selected_concepts.begin(), next.selected_concepts.end(),
                  id) == next.selected_concepts.end())
      next.selected_concepts.push_back(id);

  if (result.context_indices.empty()) {
    result.empty_context = true;
    commit(next, "customize:empty-context");
    return result;
  }

  std::string context;
  for (std::size_t idx : result.context_indices) {
    if (!context.empty()) context.push_back(' ');
    context += doc.sentence(idx).text;
  }
  for (auto& text :
       summarize_checked(backend, context, options.max_summary_tokens)) {
    SummarySentence s;
    s.sentence_id = next_id(next);
    s.text = std::move(text);
    s.provenance = Provenance::kConceptRetrieved;
    s.source_indices = result.context_indices;
    s.concept_ids = concepts;
    next.sentences.push_back(std::move(s));
  }
  commit(next, "customize");
  return result;
}

CandidateSet candidate_sentences(const SummarySession& session,
                                 const std::vector<std::string>& concept_ids,
                                 const ConceptVectors& concept_embeddings,
                                 const SentenceIndex& index,
                                 const SourceDocument& doc,
                                 std::optional<std::size_t> k) {
  const auto concepts = unique_in_order(concept_ids);
  if (concepts.empty())
    throw ArgumentError("select at least one concept", "concepts");
  const std::size_t kk = k.value_or(session.retrieval.k);
  if (kk == 0) throw ArgumentError("k must be >= 1", "k");

  const auto used = session.used_source_indices();
  CandidateSet out;
  for (const auto& id : concepts) {
    auto& list = out[id];
    for (const auto& nb : index.knn(query_for(concept_embeddings, id), kk)) {
      if (std::binary_search(used.begin(), used.end(), nb.sentence_index))
        continue;
      list.push_back({nb.sentence_index, doc.sentence(nb.sentence_index).text,
                      nb.similarity});
    }
  }
  return out;
}

SummarySession insert_sentence(const SummarySession& session,
                               std::size_t position, const Candidate& candidate,
                               std::optional<std::string> concept_id) {
  if (position > session.sentences.size())
    throw ArgumentError("position " + std::to_string(position) +
                            " out of range [0, " +
                            std::to_string(session.sentences.size()) + "]",
                        "position");
  std::string text = trimmed(candidate.text);
  if (text.empty()) throw ArgumentError("candidate text is empty", "text");

  SummarySession next = session;
  SummarySentence s;
  s.sentence_id = next_id(next);
  s.text = std::move(text);
  s.provenance = Provenance::kConceptRetrieved;
  s.source_indices = {candidate.sentence_index};
  if (concept_id) s.concept_ids = {*concept_id};
  next.sentences.insert(next.sentences.begin() + static_cast<std::ptrdiff_t>(position),
                        std::move(s));
  commit(next, "insert");
  return next;
}

SummarySession author_sentence(const SummarySession& session,
                               std::size_t position, const std::string& text) {
  if (position > session.sentences.size())
    throw ArgumentError("position " + std::to_string(position) +
                            " out of range [0, " +
                            std::to_string(session.sentences.size()) + "]",
                        "position");
  std::string t = trimmed(text);
  if (t.empty()) throw ArgumentError("sentence text is empty", "text");

  SummarySession next = session;
  SummarySentence s;
  s.sentence_id = next_id(next);
  s.text = std::move(t);
  s.provenance = Provenance::kUserAuthored;
  next.sentences.insert(next.sentences.begin() + static_cast<std::ptrdiff_t>(position),
                        std::move(s));
  commit(next, "author");
  return next;
}

std::vector<std::string> paraphrase_sentence(const SummarySession& session,
                                             std::string_view sentence_id,
                                             Backend& backend,
                                             std::size_t n_alternatives) {
  const std::string& text =
      session.sentences[position_of(session, sentence_id)].text;
  if (n_alternatives == 0)
    throw ArgumentError("n_alternatives must be >= 1", "n");
  auto resp = backend.paraphrase(ParaphraseRequest{text, n_alternatives});
  if (resp.alternatives.empty() || resp.alternatives.size() > n_alternatives)
    throw ProtocolError("paraphrase returned " +
                        std::to_string(resp.alternatives.size()) +
                        " alternatives for n=" + std::to_string(n_alternatives));
  for (const auto& alt : resp.alternatives) {
    if (alt == text)
      throw ProtocolError("paraphrase returned the input sentence unchanged");
    if (trimmed(alt).empty())
      throw ProtocolError("paraphrase returned an empty alternative");
  }
  return std::move(resp.alternatives);
}

namespace {

SummarySession replace_text(const SummarySession& session,
                            std::string_view sentence_id,
                            const std::string& text, Provenance provenance,
                            const char* operation) {
  std::size_t pos = position_of(session, sentence_id);
  std::string t = trimmed(text);
  if (t.empty()) throw ArgumentError("sentence text is empty", "text");
  SummarySession next = session;
  next.sentences[pos].text = std::move(t);
  next.sentences[pos].provenance = provenance;
  commit(next, operation);
  return next;
}

}  // namespace

SummarySession accept_paraphrase(const SummarySession& session,
                                 std::string_view sentence_id,
                                 const std::string& text) {
  return replace_text(session, sentence_id, text, Provenance::kParaphrased,
                      "paraphrase");
}

SummarySession edit_sentence(const SummarySession& session,
                             std::string_view sentence_id,
                             const std::string& new_text) {
  return replace_text(session, sentence_id, new_text, Provenance::kUserEdited,
                      "edit");
}

SummarySession reorder(const SummarySession& session,
                       const std::vector<std::string>& permutation) {
  if (permutation.size() != session.sentences.size())
    throw ArgumentError("order lists " + std::to_string(permutation.size()) +
                            " ids for " +
                            std::to_string(session.sentences.size()) +
                            " sentences",
                        "order");
  std::set<std::string_view> seen;
  SummarySession next = session;
  next.sentences.clear();
  for (const auto& id : permutation) {
    if (!seen.insert(id).second)
      throw ArgumentError("duplicate sentence id " + id, "order");
    const SummarySentence* s = session.find(id);
    if (!s) throw ArgumentError("unknown sentence id " + id, "order");
    next.sentences.push_back(*s);
  }
  commit(next, "reorder");
  return next;
}

SummarySession delete_sentence(const SummarySession& session,
                               std::string_view sentence_id) {
  std::size_t pos = position_of(session, sentence_id);
  SummarySession next = session;
  next.sentences.erase(next.sentences.begin() + static_cast<std::ptrdiff_t>(pos));
  commit(next, "delete");
  return next;
}

SummarySession revert_to_version(const SummarySession& session,
                                 std::size_t version_number) {
  if (version_number == 0 || version_number > session.versions.size())
    throw ArgumentError("unknown version " + std::to_string(version_number),
                        "version");
  SummarySession next = session;
  next.sentences = session.versions[version_number - 1].sentences;
  commit(next, "revert:" + std::to_string(version_number));
  return next;
}

std::vector<CoverageEntry> coverage_report(const SummarySession& session,
                                           const ConceptStatsMap& stats,
                                           const Gazetteer& gaz,
                                           ImportanceMetric metric,
                                           double top_percent) {
  std::set<std::string> present;
  for (const auto& s : session.sentences)
    for (const auto& m : match_tokens(tokenize(s.text), gaz))
      present.insert(m.concept_id);

  std::vector<CoverageEntry> out;
  if (stats.empty()) return out;
  for (const auto& id : top_k_percent(stats, metric, top_percent))
    out.push_back({id, stats.find(id)->second.frequency, present.count(id) > 0});
  return out;
}

std::string export_summary_text(const SummarySession& session) {
  std::string out;
  for (const auto& s : session.sentences) out += single_line(s.text) + "\n";
  return out;
}

std::string export_provenance(const SummarySession& session) {
  std::string out =
      "position\tsentence_id\tprovenance\tsource_indices\tconcept_ids\n";
  for (std::size_t i = 0; i < session.sentences.size(); ++i) {
    const auto& s = session.sentences[i];
    out += std::to_string(i) + "\t" + s.sentence_id + "\t" +
           std::string(to_string(s.provenance)) + "\t" +
           join_list(s.source_indices) + "\t" + join_list(s.concept_ids) + "\n";
  }
  return out;
}

std::vector<std::string> check_session_invariants(const SummarySession& s) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& sentence : s.sentences) {
    if (!ids.insert(sentence.sentence_id).second)
      problems.push_back("duplicate sentence id " + sentence.sentence_id);
    if (trimmed(sentence.text).empty())
      problems.push_back("empty text in sentence " + sentence.sentence_id);
  }
  if (s.versions.empty()) {
    problems.push_back("no committed version");
    return problems;
  }
  for (std::size_t i = 0; i < s.versions.size(); ++i) {
    if (s.versions[i].number != i + 1)
      problems.push_back("version " + std::to_string(i + 1) + " is numbered " +
                         std::to_string(s.versions[i].number));
    if (i > 0 && s.versions[i].timestamp_ms < s.versions[i - 1].timestamp_ms)
      problems.push_back("version timestamps decrease at " +
                         std::to_string(i + 1));
  }
  if (s.versions.back().sentences != s.sentences)
    problems.push_back("current sentences differ from the last version");
  std::set<std::string> seen;
  for (const auto& c : s.selected_concepts)
    if (!seen.insert(c).second)
      problems.push_back("duplicate selected concept " + c);
  return problems;
}

json to_json(const SummarySentence& s) {
  return json{{"sentence_id", s.sentence_id},
              {"text", s.text},
              {"provenance", to_string(s.provenance)},
              {"source_indices", s.source_indices},
              {"concept_ids", s.concept_ids}};
}

json to_json(const SummarySession& s) {
  json sentences = json::array();
  for (const auto& x : s.sentences) sentences.push_back(to_json(x));
  json versions = json::array();
  for (const auto& v : s.versions) {
    json vs = json::array();
    for (const auto& x : v.sentences) vs.push_back(to_json(x));
    versions.push_back({{"number", v.number},
                        {"timestamp_ms", v.timestamp_ms},
                        {"operation", v.operation},
                        {"sentences", std::move(vs)}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"session_id", s.session_id},
              {"doc_id", s.doc_id},
              {"retrieval", {{"k", s.retrieval.k}}},
              {"next_sentence_seq", s.next_sentence_seq},
              {"selected_concepts", s.selected_concepts},
              {"sentences", std::move(sentences)},
              {"versions", std::move(versions)}};
}

namespace {

SummarySentence sentence_from_json(const json& j) {
  SummarySentence s;
  s.sentence_id = j.at("sentence_id").get<std::string>();
  s.text = j.at("text").get<std::string>();
  s.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  s.source_indices = j.at("source_indices").get<std::vector<std::size_t>>();
  s.concept_ids = j.at("concept_ids").get<std::vector<std::string>>();
  return s;
}

}  // namespace

SummarySession session_from_json(const json& j) {
  std::string name = "<unknown>";
  try {
    if (j.is_object() && j.contains("session_id") && j["session_id"].is_string())
      name = j["session_id"].get<std::string>();
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw LoadError("unsupported schema_version");
    SummarySession s;
    s.session_id = j.at("session_id").get<std::string>();
    s.doc_id = j.at("doc_id").get<std::string>();
    s.retrieval.k = j.at("retrieval").at("k").get<std::size_t>();
    s.next_sentence_seq = j.at("next_sentence_seq").get<std::uint64_t>();
    s.selected_concepts = j.at("selected_concepts").get<std::vector<std::string>>();
    for (const auto& x : j.at("sentences")) s.sentences.push_back(sentence_from_json(x));
    for (const auto& v : j.at("versions")) {
      SessionVersion version;
      version.number = v.at("number").get<std::size_t>();
      version.timestamp_ms = v.at("timestamp_ms").get<std::int64_t>();
      version.operation = v.at("operation").get<std::string>();
      for (const auto& x : v.at("sentences"))
        version.sentences.push_back(sentence_from_json(x));
      s.versions.push_back(std::move(version));
    }
    auto problems = check_session_invariants(s);
    if (!problems.empty()) throw LoadError(problems.front());
    return s;
  } catch (const LoadError& e) {
    throw LoadError("session " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw LoadError("session " + name + ": malformed session file: " + e.what());
  }
}

}  // namespace ceva
