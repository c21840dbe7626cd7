#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ceva/pipeline.hpp"
#include "ceva/storage.hpp"

namespace httplib {
class Server;
}

namespace ceva {

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  std::filesystem::path data_dir = "data";
  std::string gazetteer_path;  // empty: no concepts
  std::string backend = "mock";
  std::size_t k = 5;
  LayoutConfig layout;
  // Long documents are summarized per section group by default.
  SummaryOptions summary{200, true};
  // name -> base URL, usable as projection=external:<name>
  std::map<std::string, std::string> projection_providers;

  void validate() const;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

// The web API over the engine. Thread-safe: documents and the session table
// sit behind a reader/writer lock, and each session has its own lock so
// mutations of one session are serialized while reads proceed in parallel.
// Every mutation is persisted before the response is produced.
class Service {
 public:
  explicit Service(ServiceConfig config);
  // Same, with an explicit backend source (tests).
  Service(ServiceConfig config, BackendFactory backends);

  // `target` is the request path with an optional query string.
  Response route_request(std::string_view method, std::string_view target,
                         std::string_view body = {});
  Response route_request(std::string_view method, std::string_view path,
                         const std::map<std::string, std::string>& query,
                         std::string_view body);

  std::shared_ptr<const DocumentAnalysis> document(const std::string& id) const;
  std::optional<SummarySession> session(const std::string& id) const;
  // Sessions whose latest state failed to reach disk.
  bool dirty(const std::string& session_id) const;
  // Session files that could not be restored at startup, by session id.
  const std::map<std::string, std::string>& load_errors() const {
    return load_errors_;
  }
  const ServiceConfig& config() const { return config_; }
  const Gazetteer& gazetteer() const { return *gazetteer_; }

 private:
  struct SessionEntry {
    mutable std::shared_mutex mutex;
    SummarySession session;
    bool dirty = false;
  };

  Response dispatch(std::string_view method,
                    const std::vector<std::string>& parts,
                    const std::map<std::string, std::string>& query,
                    std::string_view body);

  Response post_document(std::string_view body);
  Response get_document(const std::string& id);
  Response get_concepts(const std::string& id,
                        const std::map<std::string, std::string>& query);
  Response get_layout(const std::string& id,
                      const std::map<std::string, std::string>& query);
  Response post_focus(const std::string& id, const nlohmann::json& body);
  Response get_glyph(const std::string& id, const std::string& concept_id,
                     const std::map<std::string, std::string>& query);
  Response post_session(const nlohmann::json& body);
  Response get_session(const std::string& id);
  Response get_candidates(const std::string& id,
                          const std::map<std::string, std::string>& query);
  Response get_coverage(const std::string& id,
                        const std::map<std::string, std::string>& query);
  Response get_export(const std::string& id);
  Response paraphrase(const std::string& id, const std::string& sid,
                      const nlohmann::json& body);
  // Runs `op` on the session under its write lock, persists, and answers
  // with the new session (plus `extra` fields).
  Response mutate(const std::string& id, std::string_view method,
                  const std::vector<std::string>& parts,
                  const nlohmann::json& body);

  std::shared_ptr<const DocumentAnalysis> require_document(
      const std::string& id) const;
  std::shared_ptr<SessionEntry> require_session(const std::string& id) const;
  void persist(SessionEntry& entry);
  std::string new_session_id();

  ServiceConfig config_;
  std::shared_ptr<const Gazetteer> gazetteer_;
  BackendFactory backends_;
  ProjectionRegistry projections_;
  Store store_;

  mutable std::shared_mutex maps_mutex_;
  std::map<std::string, std::shared_ptr<const DocumentAnalysis>> documents_;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
  std::map<std::string, std::string> load_errors_;
  std::mutex ingest_mutex_;
};

// Serves a Service over HTTP.
class HttpService {
 public:
  explicit HttpService(Service& service);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Background thread; port 0 picks a free port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks.
  void listen(const std::string& host, int port);
  void stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// "host:port" -> (host, port); ArgumentError on a malformed address.
std::pair<std::string, int> parse_listen_address(std::string_view address);

}  // namespace ceva
