#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "ceva/embedding.hpp"
#include "ceva/error.hpp"
#include "ceva/ontology.hpp"

namespace ceva {

// Backend wire contract. Every request has exactly one response type or a
// structured error {code, message}; payloads carry schema_version = 1.

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kLongDocumentMaxInputTokens = 16384;

enum class BackendFunction { kEmbed, kSummarize, kParaphrase };

struct BackendCapabilities {
  std::size_t max_input_tokens = 0;
  std::size_t embedding_dim = 0;
  std::set<BackendFunction> supports;
  bool operator==(const BackendCapabilities&) const = default;
};

struct SummarizeRequest {
  std::string text;
  std::size_t max_summary_tokens = 0;
};
struct SummarizeResponse {
  std::vector<std::string> sentences;
};

struct ParaphraseRequest {
  std::string sentence;
  std::size_t n_alternatives = 1;
};
struct ParaphraseResponse {
  std::vector<std::string> alternatives;
};

struct EmbedRequest {
  std::vector<std::string> texts;
};
struct EmbedResponse {
  std::vector<EmbeddingVector> vectors;
};

nlohmann::json to_json(const BackendCapabilities& v);
nlohmann::json to_json(const SummarizeRequest& v);
nlohmann::json to_json(const SummarizeResponse& v);
nlohmann::json to_json(const ParaphraseRequest& v);
nlohmann::json to_json(const ParaphraseResponse& v);
nlohmann::json to_json(const EmbedRequest& v);
nlohmann::json to_json(const EmbedResponse& v);
nlohmann::json to_json(const BackendError& e);

// Decoders throw ProtocolError on schema violations.
BackendCapabilities capabilities_from_json(const nlohmann::json& j);
SummarizeRequest summarize_request_from_json(const nlohmann::json& j);
SummarizeResponse summarize_response_from_json(const nlohmann::json& j);
ParaphraseRequest paraphrase_request_from_json(const nlohmann::json& j);
ParaphraseResponse paraphrase_response_from_json(const nlohmann::json& j);
EmbedRequest embed_request_from_json(const nlohmann::json& j);
EmbedResponse embed_response_from_json(const nlohmann::json& j);
BackendError backend_error_from_json(const nlohmann::json& j);

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendCapabilities capabilities() = 0;
  virtual EmbedResponse embed(const EmbedRequest& request) = 0;
  virtual SummarizeResponse summarize(const SummarizeRequest& request) = 0;
  virtual ParaphraseResponse paraphrase(const ParaphraseRequest& request) = 0;
};

// Deterministic in-process backend.
//
// summarize: segments the text, scores each sentence by the summed tf-idf of
// the distinct gazetteer concepts it contains (tf-idf taken from the
// document context when given, else from the text itself as a one-section
// document), or by token count when no gazetteer is configured. Sentences
// are taken greedily by (score desc, position asc) until the next one no
// longer fits the token budget, then emitted in original order.
//
// paraphrase: alternative 1 swaps the clauses around the first comma, or
// prefixes "Rephrased: " when there is no comma; further alternatives cycle
// fixed lead-in phrases.
class MockBackend : public Backend {
 public:
  struct Options {
    std::size_t embedding_dim = HashingEmbedder::kDefaultDimension;
    std::uint64_t seed = HashingEmbedder::kDefaultSeed;
    std::size_t max_input_tokens = kLongDocumentMaxInputTokens;
  };

  MockBackend();
  explicit MockBackend(Options options);
  MockBackend(std::shared_ptr<const Gazetteer> gazetteer,
              std::optional<ConceptStatsMap> document_context);
  MockBackend(std::shared_ptr<const Gazetteer> gazetteer,
              std::optional<ConceptStatsMap> document_context,
              Options options);

  BackendCapabilities capabilities() override;
  EmbedResponse embed(const EmbedRequest& request) override;
  SummarizeResponse summarize(const SummarizeRequest& request) override;
  ParaphraseResponse paraphrase(const ParaphraseRequest& request) override;

 private:
  Options options_;
  HashingEmbedder embedder_;
  std::shared_ptr<const Gazetteer> gazetteer_;
  std::optional<ConceptStatsMap> context_;
};

std::vector<std::string> mock_summarize(const std::string& text,
                                        const Gazetteer* gazetteer,
                                        const ConceptStatsMap* context,
                                        std::size_t max_tokens);
std::vector<std::string> mock_paraphrase(const std::string& sentence,
                                         std::size_t n);

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{50};
};

// Retries idempotent calls (capabilities, embed) on retryable errors;
// summarize and paraphrase pass through exactly once.
class RetryingBackend : public Backend {
 public:
  RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy = {});

  BackendCapabilities capabilities() override;
  EmbedResponse embed(const EmbedRequest& request) override;
  SummarizeResponse summarize(const SummarizeRequest& request) override;
  ParaphraseResponse paraphrase(const ParaphraseRequest& request) override;

 private:
  template <typename F>
  auto retry(F&& call) -> decltype(call());

  std::shared_ptr<Backend> inner_;
  RetryPolicy policy_;
};

// Structural checks shared by the mock and any real backend: stable
// capabilities, unit-norm embeddings of the advertised dimension,
// summaries within budget, paraphrases differing from the input. Returns
// human-readable violations; empty means conformant.
std::vector<std::string> check_backend_conformance(Backend& backend);

}  // namespace ceva
