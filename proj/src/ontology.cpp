#include "ceva/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ceva/error.hpp"

namespace ceva {
namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin,
                 std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

void Gazetteer::add(ConceptEntry entry) {
  if (entry.concept_id.empty()) throw LoadError("gazetteer: empty concept id");
  if (entry.label.empty())
    throw LoadError("gazetteer: concept " + entry.concept_id + " has no label");
  if (concepts_.count(entry.concept_id))
    throw LoadError("gazetteer: duplicate concept id " + entry.concept_id);

  std::vector<std::string> aliases;
  for (const auto& alias : entry.aliases) {
    std::string form = normalize_surface_form(alias);
    if (form.empty())
      throw LoadError("gazetteer: alias '" + alias + "' of " +
                      entry.concept_id + " has no word tokens");
    if (std::find(aliases.begin(), aliases.end(), form) != aliases.end())
      continue;
    auto it = entries_.find(form);
    if (it != entries_.end())
      throw LoadError("gazetteer: ambiguous surface form '" + form +
                      "' claimed by " + it->second + " and " +
                      entry.concept_id);
    aliases.push_back(form);
  }
  for (const auto& form : aliases) {
    entries_.emplace(form, entry.concept_id);
    std::size_t n = std::count(form.begin(), form.end(), ' ') + 1;
    max_form_tokens_ = std::max(max_form_tokens_, n);
  }
  entry.aliases = std::move(aliases);
  std::string id = entry.concept_id;
  concepts_.emplace(std::move(id), std::move(entry));
}

const std::string* Gazetteer::lookup(const std::string& surface_form) const {
  auto it = entries_.find(surface_form);
  return it == entries_.end() ? nullptr : &it->second;
}

const ConceptEntry* Gazetteer::find(std::string_view concept_id) const {
  auto it = concepts_.find(concept_id);
  return it == concepts_.end() ? nullptr : &it->second;
}

const ConceptEntry& Gazetteer::at(std::string_view concept_id) const {
  const ConceptEntry* e = find(concept_id);
  if (!e)
    throw ArgumentError("unknown concept " + std::string(concept_id),
                        "concept_id");
  return *e;
}

Gazetteer load_gazetteer(std::string_view raw) {
  Gazetteer gaz;
  std::size_t line_no = 0;
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4)
      throw LoadError("gazetteer line " + std::to_string(line_no) +
                      ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    ConceptEntry entry;
    entry.concept_id = std::string(fields[0]);
    entry.label = std::string(fields[1]);
    if (!fields[2].empty()) entry.uri = std::string(fields[2]);
    for (std::string_view alias : split(fields[3], '|'))
      if (!alias.empty()) entry.aliases.emplace_back(alias);
    try {
      gaz.add(std::move(entry));
    } catch (const LoadError& e) {
      throw LoadError("gazetteer line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return gaz;
}

std::vector<TokenMatch> match_tokens(const std::vector<std::string>& tokens,
                                     const Gazetteer& gaz) {
  std::vector<TokenMatch> matches;
  const std::size_t max_len = gaz.max_form_tokens();
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t longest = std::min(max_len, tokens.size() - i);
    bool matched = false;
    for (std::size_t len = longest; len >= 1; --len) {
      if (const std::string* id = gaz.lookup(join(tokens, i, i + len))) {
        matches.push_back({*id, {i, i + len}});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return matches;
}

std::vector<ConceptOccurrence> spot_concepts(const SourceDocument& doc,
                                             const Gazetteer& gaz) {
  std::vector<ConceptOccurrence> out;
  if (gaz.empty()) return out;
  for (const auto& section : doc.sections) {
    for (const auto& sentence : section.sentences) {
      for (auto& m : match_tokens(sentence.tokens, gaz)) {
        out.push_back({std::move(m.concept_id), sentence.global_index, m.span});
      }
    }
  }
  return out;
}

ConceptStatsMap compute_stats(const std::vector<ConceptOccurrence>& occurrences,
                              const SourceDocument& doc) {
  const std::size_t num_sections = doc.sections.size();
  std::vector<std::size_t> section_of(doc.sentence_count());
  for (const auto& section : doc.sections)
    for (const auto& s : section.sentences)
      section_of[s.global_index] = section.index;

  ConceptStatsMap stats;
  for (const auto& occ : occurrences) {
    auto [it, inserted] = stats.try_emplace(occ.concept_id);
    ConceptStats& cs = it->second;
    if (inserted) {
      cs.concept_id = occ.concept_id;
      cs.section_counts.assign(num_sections, 0);
    }
    ++cs.frequency;
    ++cs.section_counts.at(section_of.at(occ.sentence_global_index));
  }
  for (auto& [id, cs] : stats) {
    auto containing = static_cast<double>(std::count_if(
        cs.section_counts.begin(), cs.section_counts.end(),
        [](std::size_t c) { return c > 0; }));
    cs.tfidf = static_cast<double>(cs.frequency) *
               std::log(1.0 + static_cast<double>(num_sections) / containing);
  }
  return stats;
}

void CooccurrenceGraph::increment(const std::string& a, const std::string& b) {
  if (a == b) return;
  add_node(a);
  add_node(b);
  Edge key = a < b ? Edge{a, b} : Edge{b, a};
  std::size_t c = ++edges_[key];
  max_count_ = std::max(max_count_, c);
}

std::size_t CooccurrenceGraph::count(std::string_view a,
                                     std::string_view b) const {
  if (a == b) return 0;
  Edge key = a < b ? Edge{std::string(a), std::string(b)}
                   : Edge{std::string(b), std::string(a)};
  auto it = edges_.find(key);
  return it == edges_.end() ? 0 : it->second;
}

CooccurrenceGraph build_cooccurrence(
    const std::vector<ConceptOccurrence>& occurrences) {
  std::map<std::size_t, std::set<std::string>> by_sentence;
  CooccurrenceGraph graph;
  for (const auto& occ : occurrences) {
    by_sentence[occ.sentence_global_index].insert(occ.concept_id);
    graph.add_node(occ.concept_id);
  }
  for (const auto& [index, ids] : by_sentence) {
    for (auto a = ids.begin(); a != ids.end(); ++a)
      for (auto b = std::next(a); b != ids.end(); ++b) graph.increment(*a, *b);
  }
  return graph;
}

std::string_view to_string(ImportanceMetric metric) {
  return metric == ImportanceMetric::kFrequency ? "frequency" : "tfidf";
}

ImportanceMetric parse_metric(std::string_view s) {
  if (s == "frequency") return ImportanceMetric::kFrequency;
  if (s == "tfidf" || s == "tf-idf") return ImportanceMetric::kTfidf;
  throw ArgumentError("unknown metric '" + std::string(s) +
                          "' (expected frequency or tfidf)",
                      "metric");
}

double metric_value(const ConceptStats& stats, ImportanceMetric metric) {
  return metric == ImportanceMetric::kFrequency
             ? static_cast<double>(stats.frequency)
             : stats.tfidf;
}

std::vector<std::string> top_k_percent(const ConceptStatsMap& stats,
                                       ImportanceMetric metric, double k) {
  if (!(k > 0.0 && k <= 100.0))
    throw ArgumentError("top percent must lie in (0, 100]", "top");

  std::vector<const ConceptStats*> ranked;
  ranked.reserve(stats.size());
  for (const auto& [id, cs] : stats) ranked.push_back(&cs);
  std::sort(ranked.begin(), ranked.end(),
            [metric](const ConceptStats* a, const ConceptStats* b) {
              double va = metric_value(*a, metric);
              double vb = metric_value(*b, metric);
              if (va != vb) return va > vb;
              if (a->frequency != b->frequency)
                return a->frequency > b->frequency;
              return a->concept_id < b->concept_id;
            });

  auto n = static_cast<double>(ranked.size());
  auto keep = static_cast<std::size_t>(std::ceil(k * n / 100.0));
  keep = std::min(keep, ranked.size());
  std::vector<std::string> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(ranked[i]->concept_id);
  return out;
}

}  // namespace ceva
