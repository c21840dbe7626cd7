#include <gtest/gtest.h>

#include "httplib.h"

#include "ceva/error.hpp"
#include "ceva/service.hpp"
#include "session_cases.hpp"

using namespace ceva;
using nlohmann::json;

namespace {

ServiceConfig config_for(const fixtures::TempDir& dir) {
  ServiceConfig cfg;
  cfg.data_dir = dir.path;
  cfg.gazetteer_path = fixtures::golden_gazetteer().string();
  return cfg;
}

std::string upload(Service& svc) {
  auto r = svc.route_request("POST", "/documents", read_file(fixtures::golden_document()));
  EXPECT_TRUE(r.status == 201 || r.status == 200) << r.body.dump();
  return r.body.at("id").get<std::string>();
}

struct FailingBackend : MockBackend {
  using MockBackend::MockBackend;
  bool fail = false;
  SummarizeResponse summarize(const SummarizeRequest& r) override {
    if (fail) throw BackendError(BackendErrorCode::kUnreachable, "backend down");
    return MockBackend::summarize(r);
  }
};

}  // namespace

TEST(Service, DocumentEndpointsMatchEngine) {
  fixtures::TempDir dir("svc");
  Service svc(config_for(dir));
  auto raw = read_file(fixtures::golden_document());
  auto created = svc.route_request("POST", "/documents", raw);
  EXPECT_EQ(created.status, 201);
  auto id = created.body["id"].get<std::string>();
  EXPECT_EQ(id, sha256_hex(json::parse(raw).dump()));
  EXPECT_EQ(created.body["sentence_count"], 47);
  // reformatted upload is the same document
  EXPECT_EQ(svc.route_request("POST", "/documents", json::parse(raw).dump(2)).status, 200);

  auto& a = session_cases::golden();
  auto doc = svc.route_request("GET", "/documents/" + id);
  ASSERT_EQ(doc.status, 200);
  auto expected_doc = document_to_json(a.doc);
  expected_doc["id"] = id;
  expected_doc["schema_version"] = kSchemaVersion;
  EXPECT_EQ(doc.body, expected_doc);

  auto concepts = svc.route_request("GET", "/documents/" + id + "/concepts?metric=tfidf&top=40");
  ASSERT_EQ(concepts.status, 200);
  auto expected = concept_table_json(a, ImportanceMetric::kTfidf, 40);
  expected["id"] = id;
  expected["schema_version"] = kSchemaVersion;
  EXPECT_EQ(concepts.body, expected);

  auto layout = svc.route_request("GET", "/documents/" + id + "/layout");
  ASSERT_EQ(layout.status, 200);
  EXPECT_EQ(layout.body["nodes"], layout_export(a.layout, a, ImportanceMetric::kFrequency)["nodes"]);
  EXPECT_EQ(layout.body["mode"], "base");

  auto focus = svc.route_request("POST", "/documents/" + id + "/layout/focus",
                                 R"({"concepts":["C1","C3"]})");
  ASSERT_EQ(focus.status, 200);
  auto f = focus_on(a.layout, {"C1", "C3"}, a.concept_embeddings, a.graph, LayoutConfig{});
  EXPECT_EQ(focus.body["nodes"], layout_export(f, a, ImportanceMetric::kFrequency)["nodes"]);
  EXPECT_EQ(focus.body["mode"], "focus");

  auto glyph = svc.route_request("GET", "/documents/" + id + "/concepts/C3/glyph");
  ASSERT_EQ(glyph.status, 200);
  auto g = glyph_to_json(make_glyph("C3", a.stats, {}, *a.gazetteer));
  g["schema_version"] = kSchemaVersion;
  EXPECT_EQ(glyph.body, g);
}

TEST(Service, ValidationAndNotFound) {
  fixtures::TempDir dir("svc-err");
  Service svc(config_for(dir));
  auto id = upload(svc);

  auto empty = svc.route_request("POST", "/documents/" + id + "/layout/focus", R"({"concepts":[]})");
  EXPECT_EQ(empty.status, 400);
  EXPECT_EQ(empty.body["error"]["code"], "validation");
  EXPECT_EQ(empty.body["error"]["fields"], json::array({"concepts"}));

  EXPECT_EQ(svc.route_request("POST", "/documents/" + id + "/layout/focus",
                              R"({"concepts":["C99"]})").status, 400);
  EXPECT_EQ(svc.route_request("GET", "/documents/" + id + "/concepts?top=0").status, 400);
  EXPECT_EQ(svc.route_request("GET", "/documents/" + id + "/concepts?top=abc").status, 400);
  EXPECT_EQ(svc.route_request("GET", "/documents/" + id + "/concepts?metric=x").status, 400);
  EXPECT_EQ(svc.route_request("GET", "/documents/nope").status, 404);
  EXPECT_EQ(svc.route_request("GET", "/documents/nope").body["error"]["code"], "not_found");
  EXPECT_EQ(svc.route_request("GET", "/sessions/s-missing").status, 404);
  EXPECT_EQ(svc.route_request("GET", "/elsewhere").status, 404);
  EXPECT_EQ(svc.route_request("GET", "/documents/" + id + "/concepts/C99/glyph").status, 404);
  EXPECT_EQ(svc.route_request("POST", "/documents", "{not json").status, 400);
  EXPECT_EQ(svc.route_request("POST", "/documents", R"({"doc_id":"x"})").status, 400);
  EXPECT_EQ(svc.route_request("POST", "/sessions", R"({"doc_id":"nope"})").status, 404);
  EXPECT_EQ(svc.route_request("POST", "/sessions", R"({})").status, 400);
}

TEST(Service, SessionLifecycleMatchesEngine) {
  fixtures::TempDir dir("svc-sess");
  Service svc(config_for(dir));
  auto id = upload(svc);
  auto& a = session_cases::golden();

  auto created = svc.route_request("POST", "/sessions", json{{"doc_id", id}}.dump());
  ASSERT_EQ(created.status, 201) << created.body.dump();
  auto sid = created.body["session_id"].get<std::string>();
  auto engine = generate_initial_summary(a.doc, *a.backend, sid, svc.config().summary);
  EXPECT_EQ(svc.session(sid)->sentences, engine.sentences);

  auto cust = svc.route_request("POST", "/sessions/" + sid + "/customize",
                                R"({"concepts":["C1","C3"]})");
  ASSERT_EQ(cust.status, 200) << cust.body.dump();
  auto r = customize(engine, {"C1", "C3"}, a.concept_embeddings, a.doc, a.index, *a.backend,
                     svc.config().summary);
  EXPECT_EQ(cust.body["context_indices"], json(r.context_indices));
  EXPECT_EQ(svc.session(sid)->sentences, r.session.sentences);

  auto cands = svc.route_request("GET", "/sessions/" + sid + "/candidates?concepts=C2,C9&k=3");
  ASSERT_EQ(cands.status, 200);
  auto expected = candidates_to_json(candidate_sentences(r.session, {"C2", "C9"},
                                                         a.concept_embeddings, a.index, a.doc, 3));
  EXPECT_EQ(cands.body["candidates"], expected["candidates"]);

  int idx = cands.body["candidates"]["C2"][0]["sentence_index"];
  auto ins = svc.route_request("POST", "/sessions/" + sid + "/sentences",
                               json{{"position", 0}, {"source_index", idx}, {"concept_id", "C2"}}.dump());
  ASSERT_EQ(ins.status, 200) << ins.body.dump();
  auto first = svc.session(sid)->sentences[0];
  EXPECT_EQ(first.source_indices, (std::vector<std::size_t>{static_cast<std::size_t>(idx)}));

  auto para = svc.route_request("POST", "/sessions/" + sid + "/sentences/" + first.sentence_id + "/paraphrase", "{}");
  ASSERT_EQ(para.status, 200);
  auto before = *svc.session(sid);
  auto accepted = svc.route_request("PATCH", "/sessions/" + sid + "/sentences/" + first.sentence_id,
                                    json{{"text", para.body["alternatives"][0]}, {"kind", "paraphrase"}}.dump());
  ASSERT_EQ(accepted.status, 200);
  EXPECT_EQ(svc.session(sid)->sentences[0].provenance, Provenance::kParaphrased);

  auto order = session_cases::ids(*svc.session(sid));
  std::reverse(order.begin(), order.end());
  EXPECT_EQ(svc.route_request("PUT", "/sessions/" + sid + "/order", json{{"order", order}}.dump()).status, 200);
  EXPECT_EQ(session_cases::ids(*svc.session(sid)), order);
  EXPECT_EQ(svc.route_request("PUT", "/sessions/" + sid + "/order", R"({"order":[]})").status, 400);

  EXPECT_EQ(svc.route_request("DELETE", "/sessions/" + sid + "/sentences/" + order[0]).status, 200);
  EXPECT_EQ(svc.route_request("DELETE", "/sessions/" + sid + "/sentences/" + order[0]).status, 400);

  EXPECT_EQ(svc.route_request("POST", "/sessions/" + sid + "/revert",
                              json{{"version", before.versions.size()}}.dump()).status, 200);
  EXPECT_EQ(svc.session(sid)->sentences, before.sentences);

  auto cov = svc.route_request("GET", "/sessions/" + sid + "/coverage?top=100");
  ASSERT_EQ(cov.status, 200);
  EXPECT_EQ(cov.body["coverage"],
            coverage_to_json(coverage_report(*svc.session(sid), a.stats, *a.gazetteer,
                                             ImportanceMetric::kFrequency, 100))["coverage"]);

  auto exp = svc.route_request("GET", "/sessions/" + sid + "/export");
  EXPECT_EQ(exp.body["summary"], export_summary_text(*svc.session(sid)));
  EXPECT_EQ(exp.body["provenance"], export_provenance(*svc.session(sid)));

  auto got = svc.route_request("GET", "/sessions/" + sid);
  EXPECT_EQ(got.body["dirty"], false);
  EXPECT_TRUE(check_session_invariants(session_from_json(got.body)).empty());

  auto glyph = svc.route_request("GET", "/documents/" + id + "/concepts/C1/glyph?session=" + sid);
  ASSERT_EQ(glyph.status, 200);
  EXPECT_EQ(glyph.body["right_counts"].size(), svc.session(sid)->sentences.size());
}

TEST(Service, RestartRestoresState) {
  fixtures::TempDir dir("svc-restart");
  std::string id, sid;
  SummarySession last;
  {
    Service svc(config_for(dir));
    id = upload(svc);
    sid = svc.route_request("POST", "/sessions", json{{"doc_id", id}}.dump())
              .body["session_id"].get<std::string>();
    svc.route_request("POST", "/sessions/" + sid + "/customize", R"({"concepts":["C4"]})");
    svc.route_request("POST", "/sessions/" + sid + "/sentences", R"({"position":0,"text":"Mine."})");
    last = *svc.session(sid);
  }
  Service again(config_for(dir));
  ASSERT_TRUE(again.document(id));
  ASSERT_TRUE(again.session(sid));
  EXPECT_EQ(*again.session(sid), last);
  EXPECT_TRUE(again.load_errors().empty());

  // a corrupt session file is reported on request, the rest still loads
  std::ofstream(Store(dir.path).session_path("s-broken")) << "{";
  Service third(config_for(dir));
  EXPECT_EQ(third.load_errors().count("s-broken"), 1u);
  auto r = third.route_request("GET", "/sessions/s-broken");
  EXPECT_EQ(r.status, 500);
  EXPECT_EQ(r.body["error"]["code"], "load");
  EXPECT_EQ(*third.session(sid), last);
}

TEST(Service, PersistenceFailureMarksDirty) {
  fixtures::TempDir dir("svc-dirty");
  Service svc(config_for(dir));
  auto id = upload(svc);
  auto sid = svc.route_request("POST", "/sessions", json{{"doc_id", id}}.dump())
                 .body["session_id"].get<std::string>();
  set_atomic_write_hook([](const std::filesystem::path&) { throw PersistenceError("disk full"); });
  auto r = svc.route_request("POST", "/sessions/" + sid + "/sentences", R"({"position":0,"text":"Lost?"})");
  set_atomic_write_hook(nullptr);
  EXPECT_EQ(r.status, 500);
  EXPECT_EQ(r.body["error"]["code"], "persistence");
  EXPECT_TRUE(svc.dirty(sid));
  EXPECT_EQ(svc.session(sid)->sentences[0].text, "Lost?");
  EXPECT_EQ(svc.route_request("GET", "/sessions/" + sid).body["dirty"], true);

  EXPECT_EQ(svc.route_request("POST", "/sessions/" + sid + "/sentences", R"({"position":0,"text":"Saved."})").status, 200);
  EXPECT_FALSE(svc.dirty(sid));
  EXPECT_EQ(Store(dir.path).load_session(sid), *svc.session(sid));
}

TEST(Service, BackendFailureIs502AndLeavesSessionAlone) {
  fixtures::TempDir dir("svc-502");
  auto gaz = std::make_shared<Gazetteer>(load_gazetteer(read_file(fixtures::golden_gazetteer())));
  std::shared_ptr<FailingBackend> backend;
  BackendFactory factory = [&](const ConceptStatsMap& stats) {
    backend = std::make_shared<FailingBackend>(gaz, stats);
    return backend;
  };
  Service svc(config_for(dir), factory);
  auto id = upload(svc);
  auto sid = svc.route_request("POST", "/sessions", json{{"doc_id", id}}.dump())
                 .body["session_id"].get<std::string>();
  auto before = *svc.session(sid);
  backend->fail = true;
  auto r = svc.route_request("POST", "/sessions/" + sid + "/customize", R"({"concepts":["C1"]})");
  EXPECT_EQ(r.status, 502);
  EXPECT_EQ(r.body["error"]["code"], "unreachable");
  EXPECT_EQ(*svc.session(sid), before);
  EXPECT_EQ(svc.route_request("POST", "/sessions", json{{"doc_id", id}}.dump()).status, 502);
}

TEST(Service, ConfigValidation) {
  ServiceConfig cfg;
  cfg.k = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  EXPECT_EQ(parse_listen_address("0.0.0.0:9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
  EXPECT_THROW(parse_listen_address("nope"), ArgumentError);
  EXPECT_THROW(parse_listen_address("h:70000"), ArgumentError);
}

TEST(HttpService, OverTheWire) {
  fixtures::TempDir dir("svc-http");
  Service svc(config_for(dir));
  HttpService http(svc);
  int port = http.start();
  httplib::Client cli("127.0.0.1", port);
  auto up = cli.Post("/documents", read_file(fixtures::golden_document()), "application/json");
  ASSERT_TRUE(up);
  EXPECT_EQ(up->status, 201);
  auto id = json::parse(up->body)["id"].get<std::string>();
  auto c = cli.Get("/documents/" + id + "/concepts?top=20&metric=tfidf");
  ASSERT_TRUE(c);
  EXPECT_EQ(json::parse(c->body),
            svc.route_request("GET", "/documents/" + id + "/concepts?top=20&metric=tfidf").body);
  auto s = cli.Post("/sessions", json{{"doc_id", id}}.dump(), "application/json");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->status, 201);
  auto sid = json::parse(s->body)["session_id"].get<std::string>();
  auto p = cli.Patch("/sessions/" + sid + "/sentences/s1", R"({"text":"Changed."})", "application/json");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->status, 200);
  auto d = cli.Delete("/sessions/" + sid + "/sentences/s1");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->status, 200);
  auto missing = cli.Get("/nowhere");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  http.stop();
}
