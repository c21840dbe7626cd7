#include "ceva/backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <thread>

namespace ceva {
namespace {

using nlohmann::json;

std::string_view to_string(BackendFunction f) {
  switch (f) {
    case BackendFunction::kEmbed: return "embed";
    case BackendFunction::kSummarize: return "summarize";
    case BackendFunction::kParaphrase: return "paraphrase";
  }
  return "?";
}

BackendFunction function_from_string(std::string_view s) {
  if (s == "embed") return BackendFunction::kEmbed;
  if (s == "summarize") return BackendFunction::kSummarize;
  if (s == "paraphrase") return BackendFunction::kParaphrase;
  throw ProtocolError("unknown backend function '" + std::string(s) + "'");
}

json envelope() { return json{{"schema_version", kSchemaVersion}}; }

void check_schema(const json& j, std::string_view what) {
  if (!j.is_object())
    throw ProtocolError(std::string(what) + ": expected a JSON object");
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
    throw ProtocolError(std::string(what) + ": unsupported schema_version");
}

template <typename T>
T field(const json& j, const char* name, std::string_view what) {
  if (!j.contains(name))
    throw ProtocolError(std::string(what) + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string(what) + ": bad type for field '" + name +
                        "'");
  }
}

std::size_t count_tokens(const std::string& s) { return tokenize(s).size(); }

// First `budget` tokens' worth of whitespace-delimited words.
std::string truncate_to_budget(const std::string& sentence,
                               std::size_t budget) {
  std::string out;
  std::size_t used = 0;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
    if (j == i) break;
    std::string word = sentence.substr(i, j - i);
    std::size_t n = count_tokens(word);
    if (used + n > budget) break;
    if (!out.empty()) out.push_back(' ');
    out += word;
    used += n;
    i = j;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string_view to_string(BackendErrorCode code) {
  switch (code) {
    case BackendErrorCode::kUnreachable: return "unreachable";
    case BackendErrorCode::kTimeout: return "timeout";
    case BackendErrorCode::kCapacity: return "capacity";
    case BackendErrorCode::kMalformed: return "malformed";
  }
  return "malformed";
}

BackendErrorCode backend_error_code_from_string(std::string_view s) {
  if (s == "unreachable") return BackendErrorCode::kUnreachable;
  if (s == "timeout") return BackendErrorCode::kTimeout;
  if (s == "capacity") return BackendErrorCode::kCapacity;
  if (s == "malformed") return BackendErrorCode::kMalformed;
  throw ProtocolError("unknown backend error code '" + std::string(s) + "'");
}

json to_json(const BackendCapabilities& v) {
  json j = envelope();
  j["max_input_tokens"] = v.max_input_tokens;
  j["embedding_dim"] = v.embedding_dim;
  j["supports"] = json::array();
  for (auto f : v.supports) j["supports"].push_back(to_string(f));
  return j;
}

json to_json(const SummarizeRequest& v) {
  json j = envelope();
  j["text"] = v.text;
  j["max_summary_tokens"] = v.max_summary_tokens;
  return j;
}

json to_json(const SummarizeResponse& v) {
  json j = envelope();
  j["sentences"] = v.sentences;
  return j;
}

json to_json(const ParaphraseRequest& v) {
  json j = envelope();
  j["sentence"] = v.sentence;
  j["n_alternatives"] = v.n_alternatives;
  return j;
}

json to_json(const ParaphraseResponse& v) {
  json j = envelope();
  j["alternatives"] = v.alternatives;
  return j;
}

json to_json(const EmbedRequest& v) {
  json j = envelope();
  j["texts"] = v.texts;
  return j;
}

json to_json(const EmbedResponse& v) {
  json j = envelope();
  j["vectors"] = json::array();
  for (const auto& vec : v.vectors) j["vectors"].push_back(vec.values);
  return j;
}

json to_json(const BackendError& e) {
  json j = envelope();
  j["code"] = to_string(e.code());
  j["message"] = e.what();
  return j;
}

BackendCapabilities capabilities_from_json(const json& j) {
  check_schema(j, "capabilities");
  BackendCapabilities caps;
  caps.max_input_tokens = field<std::size_t>(j, "max_input_tokens", "capabilities");
  caps.embedding_dim = field<std::size_t>(j, "embedding_dim", "capabilities");
  for (const auto& s : field<std::vector<std::string>>(j, "supports", "capabilities"))
    caps.supports.insert(function_from_string(s));
  if (caps.max_input_tokens == 0 || caps.embedding_dim == 0)
    throw ProtocolError("capabilities: limits must be positive");
  return caps;
}

SummarizeRequest summarize_request_from_json(const json& j) {
  check_schema(j, "summarize request");
  return {field<std::string>(j, "text", "summarize request"),
          field<std::size_t>(j, "max_summary_tokens", "summarize request")};
}

SummarizeResponse summarize_response_from_json(const json& j) {
  check_schema(j, "summarize response");
  return {field<std::vector<std::string>>(j, "sentences", "summarize response")};
}

ParaphraseRequest paraphrase_request_from_json(const json& j) {
  check_schema(j, "paraphrase request");
  return {field<std::string>(j, "sentence", "paraphrase request"),
          field<std::size_t>(j, "n_alternatives", "paraphrase request")};
}

ParaphraseResponse paraphrase_response_from_json(const json& j) {
  check_schema(j, "paraphrase response");
  return {field<std::vector<std::string>>(j, "alternatives",
                                          "paraphrase response")};
}

EmbedRequest embed_request_from_json(const json& j) {
  check_schema(j, "embed request");
  return {field<std::vector<std::string>>(j, "texts", "embed request")};
}

EmbedResponse embed_response_from_json(const json& j) {
  check_schema(j, "embed response");
  EmbedResponse r;
  for (auto& v : field<std::vector<std::vector<double>>>(j, "vectors",
                                                         "embed response"))
    r.vectors.push_back({std::move(v)});
  return r;
}

BackendError backend_error_from_json(const json& j) {
  check_schema(j, "backend error");
  return BackendError(
      backend_error_code_from_string(field<std::string>(j, "code", "backend error")),
      field<std::string>(j, "message", "backend error"));
}

// --- mock ---------------------------------------------------------------

std::vector<std::string> mock_summarize(const std::string& text,
                                        const Gazetteer* gazetteer,
                                        const ConceptStatsMap* context,
                                        std::size_t max_tokens) {
  if (max_tokens == 0)
    throw BackendError(BackendErrorCode::kMalformed,
                       "max_summary_tokens must be positive");

  struct Candidate {
    std::size_t position;
    std::string text;
    std::vector<std::string> tokens;
    double score = 0.0;
  };
  std::vector<Candidate> candidates;
  for (CharSpan span : segment_sentences(text)) {
    Candidate c;
    c.position = candidates.size();
    c.text = text.substr(span.start, span.size());
    c.tokens = tokenize(c.text);
    if (c.tokens.empty()) continue;
    candidates.push_back(std::move(c));
  }
  if (candidates.empty())
    throw BackendError(BackendErrorCode::kMalformed,
                       "summarize: text has no content");

  if (gazetteer) {
    ConceptStatsMap local;
    if (!context) {
      // The input alone acts as a one-section document: tfidf = f * ln 2.
      for (const auto& c : candidates) {
        for (const auto& m : match_tokens(c.tokens, *gazetteer)) {
          auto& cs = local[m.concept_id];
          cs.concept_id = m.concept_id;
          ++cs.frequency;
          cs.tfidf = static_cast<double>(cs.frequency) * std::log(2.0);
        }
      }
      context = &local;
    }
    for (auto& c : candidates) {
      std::set<std::string> seen;
      for (const auto& m : match_tokens(c.tokens, *gazetteer)) {
        if (!seen.insert(m.concept_id).second) continue;
        auto it = context->find(m.concept_id);
        if (it != context->end()) c.score += it->second.tfidf;
      }
    }
  } else {
    for (auto& c : candidates) c.score = static_cast<double>(c.tokens.size());
  }

  std::vector<const Candidate*> order;
  for (const auto& c : candidates) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const Candidate* a, const Candidate* b) {
                     return a->score > b->score;
                   });

  std::vector<const Candidate*> chosen;
  std::size_t used = 0;
  for (const Candidate* c : order) {
    if (used + c->tokens.size() > max_tokens) break;
    used += c->tokens.size();
    chosen.push_back(c);
  }
  if (chosen.empty()) return {truncate_to_budget(order.front()->text, max_tokens)};

  std::sort(chosen.begin(), chosen.end(),
            [](const Candidate* a, const Candidate* b) {
              return a->position < b->position;
            });
  std::vector<std::string> out;
  for (const Candidate* c : chosen) out.push_back(c->text);
  return out;
}

std::vector<std::string> mock_paraphrase(const std::string& sentence,
                                         std::size_t n) {
  static constexpr std::array<std::string_view, 3> kLeadIns = {
      "In other words, ", "Put differently, ", "Stated otherwise, "};
  if (trim(sentence).empty())
    throw BackendError(BackendErrorCode::kMalformed,
                       "paraphrase: sentence is empty");
  if (n == 0)
    throw BackendError(BackendErrorCode::kMalformed,
                       "paraphrase: n_alternatives must be positive");

  std::vector<std::string> out;
  std::string first;
  if (auto comma = sentence.find(','); comma != std::string::npos) {
    std::string left = trim(std::string_view(sentence).substr(0, comma));
    std::string right = trim(std::string_view(sentence).substr(comma + 1));
    std::string terminal;
    while (!right.empty() && (right.back() == '.' || right.back() == '?' ||
                              right.back() == '!')) {
      terminal.insert(terminal.begin(), right.back());
      right.pop_back();
    }
    if (!left.empty() && !right.empty()) first = right + ", " + left + terminal;
  }
  if (first.empty() || first == sentence) first = "Rephrased: " + sentence;
  out.push_back(first);

  for (std::size_t i = 1; i < n; ++i) {
    std::size_t slot = i - 1;
    std::string alt = sentence;
    // Wrapping around the lead-in list stacks another lead-in, which keeps
    // every alternative distinct.
    for (std::size_t round = 0; round <= slot / kLeadIns.size(); ++round)
      alt = std::string(kLeadIns[(slot + round) % kLeadIns.size()]) + alt;
    out.push_back(alt);
  }
  return out;
}

MockBackend::MockBackend() : MockBackend(Options{}) {}

MockBackend::MockBackend(Options options)
    : options_(options), embedder_(options.embedding_dim, options.seed) {}

MockBackend::MockBackend(std::shared_ptr<const Gazetteer> gazetteer,
                         std::optional<ConceptStatsMap> document_context)
    : MockBackend(std::move(gazetteer), std::move(document_context), Options{}) {}

MockBackend::MockBackend(std::shared_ptr<const Gazetteer> gazetteer,
                         std::optional<ConceptStatsMap> document_context,
                         Options options)
    : options_(options),
      embedder_(options.embedding_dim, options.seed),
      gazetteer_(std::move(gazetteer)),
      context_(std::move(document_context)) {}

BackendCapabilities MockBackend::capabilities() {
  return {options_.max_input_tokens,
          options_.embedding_dim,
          {BackendFunction::kEmbed, BackendFunction::kSummarize,
           BackendFunction::kParaphrase}};
}

EmbedResponse MockBackend::embed(const EmbedRequest& request) {
  EmbedResponse r;
  r.vectors.reserve(request.texts.size());
  for (const auto& t : request.texts) r.vectors.push_back(embedder_.embed(t));
  return r;
}

SummarizeResponse MockBackend::summarize(const SummarizeRequest& request) {
  std::size_t tokens = count_tokens(request.text);
  if (tokens > options_.max_input_tokens)
    throw BackendError(BackendErrorCode::kCapacity,
                       "summarize: " + std::to_string(tokens) +
                           " input tokens exceed the limit of " +
                           std::to_string(options_.max_input_tokens));
  return {mock_summarize(request.text, gazetteer_.get(),
                         context_ ? &*context_ : nullptr,
                         request.max_summary_tokens)};
}

ParaphraseResponse MockBackend::paraphrase(const ParaphraseRequest& request) {
  return {mock_paraphrase(request.sentence, request.n_alternatives)};
}

// --- retry --------------------------------------------------------------

RetryingBackend::RetryingBackend(std::shared_ptr<Backend> inner,
                                 RetryPolicy policy)
    : inner_(std::move(inner)), policy_(policy) {}

template <typename F>
auto RetryingBackend::retry(F&& call) -> decltype(call()) {
  auto backoff = policy_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return call();
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= policy_.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

BackendCapabilities RetryingBackend::capabilities() {
  return retry([&] { return inner_->capabilities(); });
}

EmbedResponse RetryingBackend::embed(const EmbedRequest& request) {
  return retry([&] { return inner_->embed(request); });
}

SummarizeResponse RetryingBackend::summarize(const SummarizeRequest& request) {
  return inner_->summarize(request);
}

ParaphraseResponse RetryingBackend::paraphrase(
    const ParaphraseRequest& request) {
  return inner_->paraphrase(request);
}

// --- conformance --------------------------------------------------------

std::vector<std::string> check_backend_conformance(Backend& backend) {
  std::vector<std::string> problems;
  auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };

  BackendCapabilities caps;
  try {
    caps = backend.capabilities();
    if (!(backend.capabilities() == caps))
      fail("capabilities changed between calls");
  } catch (const Error& e) {
    fail(std::string("capabilities failed: ") + e.what());
    return problems;
  }

  if (caps.supports.count(BackendFunction::kEmbed)) {
    try {
      EmbedRequest req{{"force-directed concept layout", "", "a b c d e f g"}};
      auto resp = backend.embed(req);
      if (resp.vectors.size() != req.texts.size())
        fail("embed returned " + std::to_string(resp.vectors.size()) +
             " vectors for " + std::to_string(req.texts.size()) + " texts");
      for (const auto& v : resp.vectors) {
        if (v.dimension() != caps.embedding_dim)
          fail("embedding dimension " + std::to_string(v.dimension()) +
               " differs from advertised " +
               std::to_string(caps.embedding_dim));
        else if (!is_unit_norm(v, 1e-6))
          fail("embedding is not unit-norm");
      }
    } catch (const Error& e) {
      fail(std::string("embed failed: ") + e.what());
    }
  }

  if (caps.supports.count(BackendFunction::kSummarize)) {
    try {
      SummarizeRequest req{
          "Concept views summarize documents. Force-directed layouts place "
          "related concepts together. Users select concepts to steer the "
          "summary. Retrieval finds the nearest sentences.",
          12};
      auto resp = backend.summarize(req);
      std::size_t total = 0;
      for (const auto& s : resp.sentences) {
        if (trim(s).empty()) fail("summarize returned an empty sentence");
        total += count_tokens(s);
      }
      if (resp.sentences.empty()) fail("summarize returned no sentences");
      if (total > req.max_summary_tokens)
        fail("summarize exceeded the token budget (" + std::to_string(total) +
             " > " + std::to_string(req.max_summary_tokens) + ")");
    } catch (const Error& e) {
      fail(std::string("summarize failed: ") + e.what());
    }
  }

  if (caps.supports.count(BackendFunction::kParaphrase)) {
    try {
      ParaphraseRequest req{"The layout is stable, and the glyph is clear.", 2};
      auto resp = backend.paraphrase(req);
      if (resp.alternatives.empty() ||
          resp.alternatives.size() > req.n_alternatives)
        fail("paraphrase returned " + std::to_string(resp.alternatives.size()) +
             " alternatives for n=" + std::to_string(req.n_alternatives));
      for (const auto& a : resp.alternatives)
        if (a == req.sentence) fail("paraphrase returned the input unchanged");
    } catch (const Error& e) {
      fail(std::string("paraphrase failed: ") + e.what());
    }
  }
  return problems;
}

}  // namespace ceva
