#include "ceva/service.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <random>

#include "httplib.h"

#include "ceva/error.hpp"
#include "ceva/http_backend.hpp"

namespace ceva {

using nlohmann::json;

namespace {

using Query = std::map<std::string, std::string>;

Response ok(json body, int status = 200) {
  if (body.is_object() && !body.contains("schema_version"))
    body["schema_version"] = kSchemaVersion;
  return {status, std::move(body)};
}

Response error_response(int status, const std::string& code,
                        const std::string& message,
                        std::vector<std::string> fields = {}) {
  json err{{"code", code}, {"message", message}};
  if (status == 400) err["fields"] = std::move(fields);
  return {status, json{{"schema_version", kSchemaVersion}, {"error", err}}};
}

Response not_found(const std::string& what) {
  return error_response(404, "not_found", what);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    parts.push_back(httplib::detail::decode_url(std::string(path.substr(i, j - i)), false));
    i = j;
  }
  return parts;
}

std::vector<std::string> split_csv(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t j = s.find(',', i);
    if (j == std::string_view::npos) j = s.size();
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw ArgumentError("request body must be an object", "body");
    return j;
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("request body is not valid JSON: ") + e.what(),
                        "body");
  }
}

std::vector<std::string> string_list(const json& body, const char* field) {
  if (!body.contains(field) || !body[field].is_array())
    throw ArgumentError(std::string(field) + " must be a list of strings", field);
  std::vector<std::string> out;
  for (const auto& v : body[field]) {
    if (!v.is_string())
      throw ArgumentError(std::string(field) + " must be a list of strings", field);
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t index_field(const json& body, const char* field) {
  if (!body.contains(field) || !body[field].is_number_integer() ||
      body[field].get<long long>() < 0)
    throw ArgumentError(std::string(field) + " must be a non-negative integer", field);
  return body[field].get<std::size_t>();
}

std::optional<std::size_t> optional_k(const json& body) {
  if (!body.contains("k")) return std::nullopt;
  if (!body["k"].is_number_integer() || body["k"].get<long long>() < 1)
    throw ArgumentError("k must be an integer >= 1", "k");
  return body["k"].get<std::size_t>();
}

std::string text_field(const json& body, const char* field) {
  if (!body.contains(field) || !body[field].is_string())
    throw ArgumentError(std::string(field) + " must be a string", field);
  return body[field].get<std::string>();
}

ImportanceMetric query_metric(const Query& q) {
  auto it = q.find("metric");
  return it == q.end() || it->second.empty() ? ImportanceMetric::kFrequency
                                              : parse_metric(it->second);
}

double query_top(const Query& q) {
  auto it = q.find("top");
  if (it == q.end() || it->second.empty()) return 100.0;
  double v = 0.0;
  auto [p, ec] = std::from_chars(it->second.data(),
                                 it->second.data() + it->second.size(), v);
  if (ec != std::errc() || p != it->second.data() + it->second.size() ||
      !(v > 0.0 && v <= 100.0))
    throw ArgumentError("top must be a number in (0, 100]", "top");
  return v;
}

std::vector<std::string> visible_concepts(const DocumentAnalysis& a,
                                          ImportanceMetric metric, double top) {
  if (a.stats.empty()) return {};
  return top_k_percent(a.stats, metric, top);
}

// Focus or customize targets must be concepts that occur in the document.
void check_concepts(const DocumentAnalysis& a,
                    const std::vector<std::string>& ids) {
  if (ids.empty()) throw ArgumentError("select at least one concept", "concepts");
  for (const auto& id : ids)
    if (!a.stats.count(id))
      throw ArgumentError("concept " + id + " does not occur in the document",
                          "concepts");
}

}  // namespace

void ServiceConfig::validate() const {
  if (k < 1) throw ArgumentError("k must be >= 1", "k");
  if (data_dir.empty()) throw ArgumentError("data directory is required", "data_dir");
  if (backend.empty()) throw ArgumentError("backend is required", "backend");
  layout.validate();
  parse_listen_address(listen);
}

std::pair<std::string, int> parse_listen_address(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw ArgumentError("listen address must be host:port", "listen");
  std::string_view port_s = address.substr(colon + 1);
  int port = -1;
  auto [p, ec] = std::from_chars(port_s.data(), port_s.data() + port_s.size(), port);
  if (ec != std::errc() || p != port_s.data() + port_s.size() || port < 0 ||
      port > 65535)
    throw ArgumentError("listen port must be in [0, 65535]", "listen");
  return {std::string(address.substr(0, colon)), port};
}

Service::Service(ServiceConfig config) : Service(config, nullptr) {}

Service::Service(ServiceConfig config, BackendFactory backends)
    : config_(std::move(config)), store_((config_.validate(), config_.data_dir)) {
  auto gaz = std::make_shared<Gazetteer>();
  if (!config_.gazetteer_path.empty())
    *gaz = load_gazetteer(read_file(config_.gazetteer_path));
  gazetteer_ = gaz;
  backends_ = backends ? std::move(backends)
                       : make_backend_factory(config_.backend, gazetteer_);
  for (const auto& [name, url] : config_.projection_providers)
    projections_.add(name, std::make_shared<HttpProjectionProvider>(url));

  for (auto& [id, raw] : store_.load_documents()) {
    try {
      documents_[id] = std::make_shared<const DocumentAnalysis>(
          analyze_document(parse_document(raw), gazetteer_, backends_,
                           config_.layout, "pca", &projections_));
    } catch (const std::exception& e) {
      std::cerr << "concepteva: cannot restore document " << id << ": "
                << e.what() << "\n";
    }
  }
  for (const auto& entry :
       std::filesystem::directory_iterator(store_.data_dir() / "sessions")) {
    if (entry.path().extension() != ".json") continue;
    std::string id = entry.path().stem().string();
    try {
      SummarySession s = store_.load_session(id);
      if (!documents_.count(s.doc_id))
        throw LoadError("session " + id + ": unknown document " + s.doc_id);
      auto e = std::make_shared<SessionEntry>();
      e->session = std::move(s);
      sessions_[id] = std::move(e);
    } catch (const std::exception& e) {
      load_errors_[id] = e.what();
      std::cerr << "concepteva: " << e.what() << "\n";
    }
  }
}

std::shared_ptr<const DocumentAnalysis> Service::document(
    const std::string& id) const {
  std::shared_lock lock(maps_mutex_);
  auto it = documents_.find(id);
  return it == documents_.end() ? nullptr : it->second;
}

std::optional<SummarySession> Service::session(const std::string& id) const {
  std::shared_ptr<SessionEntry> e;
  {
    std::shared_lock lock(maps_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    e = it->second;
  }
  std::shared_lock lock(e->mutex);
  return e->session;
}

bool Service::dirty(const std::string& session_id) const {
  std::shared_lock lock(maps_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return false;
  std::shared_lock slock(it->second->mutex);
  return it->second->dirty;
}

std::shared_ptr<const DocumentAnalysis> Service::require_document(
    const std::string& id) const {
  auto d = document(id);
  if (!d) throw NotFoundError("unknown document " + id);
  return d;
}

std::shared_ptr<Service::SessionEntry> Service::require_session(
    const std::string& id) const {
  std::shared_lock lock(maps_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    auto le = load_errors_.find(id);
    if (le != load_errors_.end()) throw LoadError(le->second);
    throw NotFoundError("unknown session " + id);
  }
  return it->second;
}

void Service::persist(SessionEntry& entry) {
  entry.dirty = true;
  store_.save_session(entry.session);
  entry.dirty = false;
}

std::string Service::new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(rng()));
  return std::string("s-") + buf;
}

Response Service::route_request(std::string_view method, std::string_view target,
                                std::string_view body) {
  Query query;
  std::string_view path = target;
  if (auto q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    std::string_view qs = target.substr(q + 1);
    std::size_t i = 0;
    while (i <= qs.size()) {
      std::size_t j = qs.find('&', i);
      if (j == std::string_view::npos) j = qs.size();
      std::string_view kv = qs.substr(i, j - i);
      if (!kv.empty()) {
        auto eq = kv.find('=');
        std::string k(kv.substr(0, eq));
        std::string v = eq == std::string_view::npos ? "" : std::string(kv.substr(eq + 1));
        query[httplib::detail::decode_url(k, true)] =
            httplib::detail::decode_url(v, true);
      }
      i = j + 1;
    }
  }
  return route_request(method, path, query, body);
}

Response Service::route_request(std::string_view method, std::string_view path,
                                const Query& query, std::string_view body) {
  try {
    return dispatch(method, split_path(path), query, body);
  } catch (const ArgumentError& e) {
    return error_response(400, "validation", e.what(),
                          e.field().empty() ? std::vector<std::string>{}
                                            : std::vector<std::string>{e.field()});
  } catch (const ParseError& e) {
    return error_response(400, "validation", e.what(), {"document"});
  } catch (const NotFoundError& e) {
    return not_found(e.what());
  } catch (const BackendError& e) {
    return error_response(502, std::string(to_string(e.code())), e.what());
  } catch (const CapacityError& e) {
    return error_response(502, "capacity", e.what());
  } catch (const ProtocolError& e) {
    return error_response(502, "malformed", e.what());
  } catch (const PersistenceError& e) {
    return error_response(500, "persistence", e.what());
  } catch (const LoadError& e) {
    return error_response(500, "load", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

Response Service::dispatch(std::string_view method,
                           const std::vector<std::string>& p, const Query& q,
                           std::string_view raw_body) {
  const std::size_t n = p.size();
  auto is = [&](std::string_view m) { return method == m; };

  if (n >= 1 && p[0] == "documents") {
    if (n == 1 && is("POST")) return post_document(raw_body);
    if (n == 2 && is("GET")) return get_document(p[1]);
    if (n == 3 && p[2] == "concepts" && is("GET")) return get_concepts(p[1], q);
    if (n == 3 && p[2] == "layout" && is("GET")) return get_layout(p[1], q);
    if (n == 4 && p[2] == "layout" && p[3] == "focus" && is("POST"))
      return post_focus(p[1], parse_body(raw_body));
    if (n == 5 && p[2] == "concepts" && p[4] == "glyph" && is("GET"))
      return get_glyph(p[1], p[3], q);
  }
  if (n >= 1 && p[0] == "sessions") {
    if (n == 1 && is("POST")) return post_session(parse_body(raw_body));
    if (n == 2 && is("GET")) return get_session(p[1]);
    if (n == 3 && p[2] == "candidates" && is("GET")) return get_candidates(p[1], q);
    if (n == 3 && p[2] == "coverage" && is("GET")) return get_coverage(p[1], q);
    if (n == 3 && p[2] == "export" && is("GET")) return get_export(p[1]);
    if (n == 5 && p[2] == "sentences" && p[4] == "paraphrase" && is("POST"))
      return paraphrase(p[1], p[3], parse_body(raw_body));
    bool mutation =
        (n == 3 && p[2] == "customize" && is("POST")) ||
        (n == 3 && p[2] == "sentences" && is("POST")) ||
        (n == 4 && p[2] == "sentences" && (is("PATCH") || is("DELETE"))) ||
        (n == 3 && p[2] == "order" && is("PUT")) ||
        (n == 3 && p[2] == "revert" && is("POST"));
    if (mutation) return mutate(p[1], method, p, parse_body(raw_body));
  }
  std::string path;
  for (const auto& part : p) path += "/" + part;
  return not_found("no route for " + std::string(method) + " " +
                   (path.empty() ? "/" : path));
}

Response Service::post_document(std::string_view body) {
  // content address over the canonical form, so formatting does not matter
  json canonical;
  try {
    canonical = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("document is not valid JSON: ") + e.what());
  }
  const std::string raw = canonical.dump();
  const std::string id = sha256_hex(raw);

  std::lock_guard ingest(ingest_mutex_);
  auto existing = document(id);
  bool created = false;
  if (!existing) {
    auto analysis = std::make_shared<const DocumentAnalysis>(
        analyze_document(parse_document(raw), gazetteer_, backends_,
                         config_.layout, "pca", &projections_));
    store_.save_document(id, raw);
    std::unique_lock lock(maps_mutex_);
    documents_[id] = analysis;
    existing = analysis;
    created = true;
  }
  return ok({{"id", id},
             {"doc_id", existing->doc.doc_id},
             {"title", existing->doc.title},
             {"section_count", existing->doc.sections.size()},
             {"sentence_count", existing->doc.sentence_count()},
             {"token_count", existing->doc.token_count},
             {"concept_count", existing->stats.size()}},
            created ? 201 : 200);
}

Response Service::get_document(const std::string& id) {
  auto d = require_document(id);
  json body = document_to_json(d->doc);
  body["id"] = id;
  return ok(std::move(body));
}

Response Service::get_concepts(const std::string& id, const Query& q) {
  auto d = require_document(id);
  json body = concept_table_json(*d, query_metric(q), query_top(q));
  body["id"] = id;
  return ok(std::move(body));
}

Response Service::get_layout(const std::string& id, const Query& q) {
  auto d = require_document(id);
  ImportanceMetric metric = query_metric(q);
  auto visible = visible_concepts(*d, metric, query_top(q));
  std::string method = "pca";
  if (auto it = q.find("projection"); it != q.end() && !it->second.empty())
    method = it->second;
  LayoutState layout = method == d->projection.method || d->stats.empty()
                           ? d->layout
                           : layout_for_projection(*d, method, &projections_,
                                                   config_.layout);
  json body = layout_export(layout, *d, metric, &visible);
  body["id"] = id;
  body["projection"] = method;
  json methods = json::array({"pca"});
  for (const auto& name : projections_.names()) methods.push_back("external:" + name);
  body["projections"] = std::move(methods);
  return ok(std::move(body));
}

Response Service::post_focus(const std::string& id, const json& body) {
  auto d = require_document(id);
  auto ids = string_list(body, "concepts");
  check_concepts(*d, ids);
  ImportanceMetric metric = ImportanceMetric::kFrequency;
  if (body.contains("metric")) metric = parse_metric(text_field(body, "metric"));
  LayoutState focused =
      focus_on(d->layout, {ids.begin(), ids.end()}, d->concept_embeddings,
               d->graph, config_.layout);
  json out = layout_export(focused, *d, metric);
  out["id"] = id;
  return ok(std::move(out));
}

Response Service::get_glyph(const std::string& id, const std::string& concept_id,
                            const Query& q) {
  auto d = require_document(id);
  if (!gazetteer_->find(concept_id))
    throw NotFoundError("unknown concept " + concept_id);
  std::vector<std::string> summary;
  if (auto it = q.find("session"); it != q.end() && !it->second.empty()) {
    auto e = require_session(it->second);
    std::shared_lock lock(e->mutex);
    if (e->session.doc_id != id)
      throw ArgumentError("session " + it->second + " belongs to another document",
                          "session");
    summary = e->session.texts();
  }
  return ok(glyph_to_json(make_glyph(concept_id, d->stats, summary, *gazetteer_)));
}

Response Service::post_session(const json& body) {
  const std::string doc_id = text_field(body, "doc_id");
  auto d = require_document(doc_id);
  RetrievalConfig retrieval{optional_k(body).value_or(config_.k)};

  auto e = std::make_shared<SessionEntry>();
  std::unique_lock slock(e->mutex);
  e->session = generate_initial_summary(d->doc, *d->backend, new_session_id(),
                                        config_.summary, retrieval);
  e->session.doc_id = doc_id;
  {
    std::unique_lock lock(maps_mutex_);
    sessions_[e->session.session_id] = e;
  }
  persist(*e);
  return ok(to_json(e->session), 201);
}

Response Service::get_session(const std::string& id) {
  auto e = require_session(id);
  std::shared_lock lock(e->mutex);
  json body = to_json(e->session);
  body["dirty"] = e->dirty;
  return ok(std::move(body));
}

Response Service::get_candidates(const std::string& id, const Query& q) {
  auto e = require_session(id);
  std::shared_lock lock(e->mutex);
  auto d = require_document(e->session.doc_id);
  auto it = q.find("concepts");
  auto ids = split_csv(it == q.end() ? "" : it->second);
  check_concepts(*d, ids);
  std::optional<std::size_t> k;
  if (auto kit = q.find("k"); kit != q.end())
    k = optional_k(json{{"k", std::atoll(kit->second.c_str())}});
  return ok(candidates_to_json(candidate_sentences(
      e->session, ids, d->concept_embeddings, d->index, d->doc, k)));
}

Response Service::get_coverage(const std::string& id, const Query& q) {
  auto e = require_session(id);
  std::shared_lock lock(e->mutex);
  auto d = require_document(e->session.doc_id);
  if (d->stats.empty()) return ok(coverage_to_json({}));
  return ok(coverage_to_json(coverage_report(e->session, d->stats, *gazetteer_,
                                             query_metric(q), query_top(q))));
}

Response Service::get_export(const std::string& id) {
  auto e = require_session(id);
  std::shared_lock lock(e->mutex);
  return ok({{"session_id", id},
             {"summary", export_summary_text(e->session)},
             {"provenance", export_provenance(e->session)}});
}

Response Service::paraphrase(const std::string& id, const std::string& sid,
                             const json& body) {
  auto e = require_session(id);
  std::shared_lock lock(e->mutex);
  auto d = require_document(e->session.doc_id);
  std::size_t n = 1;
  if (body.contains("n")) {
    if (!body["n"].is_number_integer() || body["n"].get<long long>() < 1)
      throw ArgumentError("n must be an integer >= 1", "n");
    n = body["n"].get<std::size_t>();
  }
  return ok({{"sentence_id", sid},
             {"alternatives", paraphrase_sentence(e->session, sid, *d->backend, n)}});
}

Response Service::mutate(const std::string& id, std::string_view method,
                         const std::vector<std::string>& p, const json& body) {
  auto e = require_session(id);
  std::unique_lock lock(e->mutex);
  auto d = require_document(e->session.doc_id);
  const SummarySession& cur = e->session;
  const std::string& what = p[2];
  json extra = json::object();
  SummarySession next;

  if (what == "customize") {
    auto ids = string_list(body, "concepts");
    check_concepts(*d, ids);
    auto r = customize(cur, ids, d->concept_embeddings, d->doc, d->index,
                       *d->backend, config_.summary, optional_k(body));
    extra["context_indices"] = r.context_indices;
    extra["empty_context"] = r.empty_context;
    next = std::move(r.session);
  } else if (what == "sentences" && method == "POST") {
    std::size_t pos = index_field(body, "position");
    if (body.contains("source_index")) {
      std::size_t idx = index_field(body, "source_index");
      if (idx >= d->doc.sentence_count())
        throw ArgumentError("source_index out of range", "source_index");
      std::optional<std::string> cid;
      if (body.contains("concept_id")) {
        cid = text_field(body, "concept_id");
        if (!gazetteer_->find(*cid))
          throw ArgumentError("unknown concept " + *cid, "concept_id");
      }
      next = insert_sentence(cur, pos, {idx, d->doc.sentence(idx).text, 0.0}, cid);
    } else {
      next = author_sentence(cur, pos, text_field(body, "text"));
    }
  } else if (what == "sentences" && method == "PATCH") {
    std::string kind = body.contains("kind") ? text_field(body, "kind") : "edit";
    std::string text = text_field(body, "text");
    if (kind == "edit")
      next = edit_sentence(cur, p[3], text);
    else if (kind == "paraphrase")
      next = accept_paraphrase(cur, p[3], text);
    else
      throw ArgumentError("kind must be edit or paraphrase", "kind");
  } else if (what == "sentences" && method == "DELETE") {
    next = delete_sentence(cur, p[3]);
  } else if (what == "order") {
    next = reorder(cur, string_list(body, "order"));
  } else {  // revert
    next = revert_to_version(cur, index_field(body, "version"));
  }

  // commit in memory first; a failed write leaves the session dirty
  e->session = std::move(next);
  persist(*e);
  json out = to_json(e->session);
  for (auto& [k, v] : extra.items()) out[k] = v;
  return ok(std::move(out));
}

// --- HTTP -------------------------------------------------------------------

HttpService::HttpService(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    Response r = service_.route_request(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Put(".*", handler);
  server_->Patch(".*", handler);
  server_->Delete(".*", handler);
}

HttpService::~HttpService() { stop(); }

int HttpService::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host)
                        : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0)
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpService::listen(const std::string& host, int port) {
  if (!server_->listen(host, port))
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace ceva
