#include "ceva/http_backend.hpp"

#include "httplib.h"

namespace ceva {
namespace {

using nlohmann::json;

int status_for(BackendErrorCode code) {
  switch (code) {
    case BackendErrorCode::kCapacity: return 413;
    case BackendErrorCode::kMalformed: return 400;
    case BackendErrorCode::kTimeout: return 504;
    case BackendErrorCode::kUnreachable: return 503;
  }
  return 500;
}

BackendError transport_error(httplib::Error err, const std::string& url) {
  std::string msg = "backend " + url + ": " + httplib::to_string(err);
  if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
    return BackendError(BackendErrorCode::kTimeout, msg);
  return BackendError(BackendErrorCode::kUnreachable, msg);
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

HttpBackend::HttpBackend(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

json HttpBackend::call(const std::string& method, const std::string& path,
                       const json* body) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Result res =
      method == "GET"
          ? client.Get(path)
          : client.Post(path, body ? body->dump() : std::string("{}"),
                        "application/json");
  if (!res) throw transport_error(res.error(), base_url_);

  json payload;
  try {
    payload = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProtocolError("backend " + base_url_ + path +
                        ": response is not JSON (HTTP " +
                        std::to_string(res->status) + ")");
  }
  if (res->status != 200) {
    if (payload.is_object() && payload.contains("code"))
      throw backend_error_from_json(payload);
    throw BackendError(res->status == 404 ? BackendErrorCode::kUnreachable
                                          : BackendErrorCode::kMalformed,
                       "backend " + base_url_ + path + ": HTTP " +
                           std::to_string(res->status));
  }
  return payload;
}

BackendCapabilities HttpBackend::capabilities() {
  return capabilities_from_json(call("GET", "/capabilities", nullptr));
}

EmbedResponse HttpBackend::embed(const EmbedRequest& request) {
  json body = to_json(request);
  return embed_response_from_json(call("POST", "/embed", &body));
}

SummarizeResponse HttpBackend::summarize(const SummarizeRequest& request) {
  json body = to_json(request);
  return summarize_response_from_json(call("POST", "/summarize", &body));
}

ParaphraseResponse HttpBackend::paraphrase(const ParaphraseRequest& request) {
  json body = to_json(request);
  return paraphrase_response_from_json(call("POST", "/paraphrase", &body));
}

HttpProjectionProvider::HttpProjectionProvider(std::string base_url)
    : base_url_(std::move(base_url)) {}

ConceptPoints HttpProjectionProvider::project(const ConceptVectors& vectors) {
  json body{{"schema_version", kSchemaVersion}, {"vectors", json::object()}};
  for (const auto& [id, v] : vectors) body["vectors"][id] = v.values;

  httplib::Client client(base_url_);
  client.set_read_timeout(std::chrono::seconds(300));
  auto res = client.Post("/project", body.dump(), "application/json");
  if (!res) throw transport_error(res.error(), base_url_);
  if (res->status != 200)
    throw BackendError(BackendErrorCode::kMalformed,
                       "projection provider " + base_url_ + ": HTTP " +
                           std::to_string(res->status));
  ConceptPoints out;
  try {
    json payload = json::parse(res->body);
    for (const auto& [id, xy] : payload.at("coords").items()) {
      auto pair = xy.get<std::vector<double>>();
      if (pair.size() != 2)
        throw ProtocolError("projection provider: coordinate for " + id +
                            " is not a pair");
      out[id] = {pair[0], pair[1]};
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("projection provider: malformed response: ") +
                        e.what());
  }
  return out;
}

BackendServer::BackendServer(std::shared_ptr<Backend> backend)
    : backend_(std::move(backend)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

BackendServer::~BackendServer() { stop(); }

void BackendServer::install_routes() {
  // Runs a handler, turning engine exceptions into protocol errors.
  auto guarded = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, 200, handler(req));
      } catch (const BackendError& e) {
        reply(res, status_for(e.code()), to_json(e));
      } catch (const ProtocolError& e) {
        reply(res, 400, to_json(BackendError(BackendErrorCode::kMalformed, e.what())));
      } catch (const json::exception& e) {
        reply(res, 400, to_json(BackendError(BackendErrorCode::kMalformed, e.what())));
      } catch (const std::exception& e) {
        reply(res, 500, to_json(BackendError(BackendErrorCode::kMalformed, e.what())));
      }
    };
  };

  server_->Get("/capabilities", guarded([this](const httplib::Request&) {
                 return to_json(backend_->capabilities());
               }));
  server_->Post("/embed", guarded([this](const httplib::Request& req) {
                  return to_json(backend_->embed(
                      embed_request_from_json(json::parse(req.body))));
                }));
  server_->Post("/summarize", guarded([this](const httplib::Request& req) {
                  return to_json(backend_->summarize(
                      summarize_request_from_json(json::parse(req.body))));
                }));
  server_->Post("/paraphrase", guarded([this](const httplib::Request& req) {
                  return to_json(backend_->paraphrase(
                      paraphrase_request_from_json(json::parse(req.body))));
                }));
}

int BackendServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host)
                    : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error("backend server: cannot bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void BackendServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port))
    throw Error("backend server: cannot listen on " + host + ":" +
                std::to_string(port));
}

void BackendServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string BackendServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

std::shared_ptr<Backend> make_remote_backend(const std::string& url) {
  return std::make_shared<RetryingBackend>(std::make_shared<HttpBackend>(url));
}

}  // namespace ceva
