#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "ceva/backend.hpp"
#include "ceva/projection.hpp"

namespace httplib {
class Server;
}

namespace ceva {

// Backend protocol over HTTP/JSON:
//   GET  /capabilities
//   POST /embed        EmbedRequest      -> EmbedResponse
//   POST /summarize    SummarizeRequest  -> SummarizeResponse
//   POST /paraphrase   ParaphraseRequest -> ParaphraseResponse
// Failures carry {code, message} with code in
// {unreachable, timeout, capacity, malformed}.
class HttpBackend : public Backend {
 public:
  // base_url like "http://127.0.0.1:8090".
  explicit HttpBackend(std::string base_url,
                       std::chrono::seconds timeout = std::chrono::seconds(120));

  BackendCapabilities capabilities() override;
  EmbedResponse embed(const EmbedRequest& request) override;
  SummarizeResponse summarize(const SummarizeRequest& request) override;
  ParaphraseResponse paraphrase(const ParaphraseRequest& request) override;

  const std::string& base_url() const { return base_url_; }

 private:
  nlohmann::json call(const std::string& method, const std::string& path,
                      const nlohmann::json* body);

  std::string base_url_;
  std::chrono::seconds timeout_;
};

// External projection method over HTTP: POST {base_url}/project with
// {"vectors": {concept_id: [..]}} -> {"coords": {concept_id: [x, y]}}.
class HttpProjectionProvider : public ProjectionProvider {
 public:
  explicit HttpProjectionProvider(std::string base_url);
  ConceptPoints project(const ConceptVectors& vectors) override;

 private:
  std::string base_url_;
};

// Serves any Backend over the protocol above; used for the mock backend
// process and for protocol tests.
class BackendServer {
 public:
  explicit BackendServer(std::shared_ptr<Backend> backend);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();
  std::string url() const;

 private:
  void install_routes();

  std::shared_ptr<Backend> backend_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

// HTTP backend at `url`, wrapped for retries.
std::shared_ptr<Backend> make_remote_backend(const std::string& url);

}  // namespace ceva
