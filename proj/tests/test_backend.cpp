#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "httplib.h"

#include "ceva/backend.hpp"
#include "ceva/error.hpp"
#include "ceva/http_backend.hpp"
#include "ceva/projection.hpp"

using namespace ceva;
using nlohmann::json;

namespace {

ConceptStatsMap context(std::initializer_list<std::pair<const char*, double>> v) {
  ConceptStatsMap m;
  for (auto [id, t] : v) m[id] = {id, 1, t, {1}};
  return m;
}

// Fails the first `failures` calls of every kind with `code`.
class FlakyBackend : public Backend {
 public:
  FlakyBackend(int failures, BackendErrorCode code) : failures_(failures), code_(code) {}
  std::atomic<int> calls{0};
  BackendCapabilities capabilities() override {
    maybe_fail();
    return inner_.capabilities();
  }
  EmbedResponse embed(const EmbedRequest& r) override {
    maybe_fail();
    return inner_.embed(r);
  }
  SummarizeResponse summarize(const SummarizeRequest& r) override {
    maybe_fail();
    return inner_.summarize(r);
  }
  ParaphraseResponse paraphrase(const ParaphraseRequest& r) override {
    maybe_fail();
    return inner_.paraphrase(r);
  }

 private:
  void maybe_fail() {
    if (calls++ < failures_) throw BackendError(code_, "injected");
  }
  int failures_;
  BackendErrorCode code_;
  MockBackend inner_;
};

class SlowBackend : public MockBackend {
 public:
  SummarizeResponse summarize(const SummarizeRequest& r) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(2500));
    return MockBackend::summarize(r);
  }
};

RetryPolicy fast() { return {2, std::chrono::milliseconds(1)}; }

}  // namespace

TEST(Wire, RoundTripsAndSchemaVersion) {
  BackendCapabilities caps{16384, 64,
                           {BackendFunction::kEmbed, BackendFunction::kSummarize,
                            BackendFunction::kParaphrase}};
  json j = to_json(caps);
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(capabilities_from_json(j), caps);

  auto sr = summarize_request_from_json(to_json(SummarizeRequest{"Text.", 12}));
  EXPECT_EQ(sr.text, "Text.");
  EXPECT_EQ(sr.max_summary_tokens, 12u);
  auto pr = paraphrase_request_from_json(to_json(ParaphraseRequest{"S.", 3}));
  EXPECT_EQ(pr.n_alternatives, 3u);
  auto er = embed_response_from_json(to_json(EmbedResponse{{{{1.0, 0.0}}}}));
  EXPECT_EQ(er.vectors[0].values, (std::vector<double>{1.0, 0.0}));

  auto be = backend_error_from_json(to_json(BackendError(BackendErrorCode::kCapacity, "big")));
  EXPECT_EQ(be.code(), BackendErrorCode::kCapacity);
  EXPECT_FALSE(be.retryable());
}

TEST(Wire, RejectsMalformedPayloads) {
  EXPECT_THROW(summarize_request_from_json(json{{"text", 3}}), ProtocolError);
  EXPECT_THROW(embed_request_from_json(json::array()), ProtocolError);
  EXPECT_THROW(capabilities_from_json(json{{"schema_version", 1}}), ProtocolError);
  EXPECT_THROW(
      summarize_response_from_json(json{{"schema_version", 99}, {"sentences", json::array()}}),
      ProtocolError);
  EXPECT_THROW(backend_error_from_json(json{{"code", "weird"}, {"message", "m"}}),
               ProtocolError);
}

TEST(Mock, Capabilities) {
  MockBackend mock;
  auto caps = mock.capabilities();
  EXPECT_EQ(caps.max_input_tokens, 16384u);
  EXPECT_EQ(caps.embedding_dim, 64u);
  EXPECT_EQ(caps.supports.size(), 3u);
  EXPECT_EQ(mock.capabilities(), caps);
}

TEST(Mock, SummarizeScoresByConceptTfidf) {
  auto gaz = load_gazetteer("A\talpha\t\talpha\nB\tbeta\t\tbeta\n");
  auto ctx = context({{"A", 1.0}, {"B", 3.0}});
  const std::string text = "Alpha is here now. Beta is there.";
  EXPECT_EQ(mock_summarize(text, &gaz, &ctx, 4),
            (std::vector<std::string>{"Beta is there."}));
  EXPECT_EQ(mock_summarize(text, &gaz, &ctx, 7),
            (std::vector<std::string>{"Alpha is here now.", "Beta is there."}));
}

TEST(Mock, SummarizeTiesPreferEarlierAndStopsAtFirstMisfit) {
  EXPECT_EQ(mock_summarize("One two. Three four.", nullptr, nullptr, 2),
            (std::vector<std::string>{"One two."}));
  // without a gazetteer the score is the token count
  EXPECT_EQ(mock_summarize("Short one. A much longer sentence here. Mid size one.",
                           nullptr, nullptr, 8),
            (std::vector<std::string>{"A much longer sentence here.", "Mid size one."}));
  // greedy stops at the first sentence that does not fit
  EXPECT_EQ(mock_summarize("A much longer sentence here. Mid size one. Tiny.",
                           nullptr, nullptr, 6),
            (std::vector<std::string>{"A much longer sentence here."}));
}

TEST(Mock, SummarizeErrorsAndCapacity) {
  try {
    mock_summarize("", nullptr, nullptr, 10);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), BackendErrorCode::kMalformed);
  }
  MockBackend small(MockBackend::Options{64, HashingEmbedder::kDefaultSeed, 3});
  try {
    small.summarize({"One two three four.", 10});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), BackendErrorCode::kCapacity);
  }
}

TEST(Mock, SummarizeRespectsBudget) {
  std::string text;
  for (int i = 0; i < 30; ++i) text += "Sentence number " + std::to_string(i) + " is here. ";
  for (std::size_t budget : {1u, 5u, 9u, 40u, 1000u}) {
    auto out = mock_summarize(text, nullptr, nullptr, budget);
    ASSERT_FALSE(out.empty());
    std::size_t total = 0;
    for (const auto& s : out) total += tokenize(s).size();
    EXPECT_LE(total, budget);
  }
}

TEST(Mock, Paraphrase) {
  EXPECT_EQ(mock_paraphrase("alpha, beta", 1), (std::vector<std::string>{"beta, alpha"}));
  EXPECT_EQ(mock_paraphrase("alpha", 1), (std::vector<std::string>{"Rephrased: alpha"}));
  EXPECT_EQ(mock_paraphrase("alpha beta", 1),
            (std::vector<std::string>{"Rephrased: alpha beta"}));
  auto two = mock_paraphrase("alpha", 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NE(two[0], two[1]);
  auto many = mock_paraphrase("Tides move silt, plants hold it.", 7);
  std::set<std::string> distinct(many.begin(), many.end());
  EXPECT_EQ(distinct.size(), 7u);
  EXPECT_FALSE(distinct.count("Tides move silt, plants hold it."));
  EXPECT_THROW(mock_paraphrase("", 1), BackendError);
  EXPECT_THROW(mock_paraphrase("x", 0), BackendError);
  EXPECT_EQ(mock_paraphrase("alpha, beta", 3), mock_paraphrase("alpha, beta", 3));
}

TEST(Mock, PassesConformance) {
  MockBackend mock;
  EXPECT_TRUE(check_backend_conformance(mock).empty());
}

TEST(Retry, IdempotentCallsRetryTwice) {
  auto flaky = std::make_shared<FlakyBackend>(2, BackendErrorCode::kTimeout);
  RetryingBackend r(flaky, fast());
  EXPECT_NO_THROW(r.embed({{"x"}}));
  EXPECT_EQ(flaky->calls, 3);

  auto worse = std::make_shared<FlakyBackend>(3, BackendErrorCode::kUnreachable);
  RetryingBackend r2(worse, fast());
  EXPECT_THROW(r2.capabilities(), BackendError);
  EXPECT_EQ(worse->calls, 3);
}

TEST(Retry, GenerationCallsAndPermanentErrorsAreNotRetried) {
  auto flaky = std::make_shared<FlakyBackend>(2, BackendErrorCode::kTimeout);
  RetryingBackend r(flaky, fast());
  EXPECT_THROW(r.summarize({"A b.", 5}), BackendError);
  EXPECT_EQ(flaky->calls, 1);
  EXPECT_THROW(r.paraphrase({"A b.", 1}), BackendError);
  EXPECT_EQ(flaky->calls, 2);

  auto bad = std::make_shared<FlakyBackend>(1, BackendErrorCode::kMalformed);
  RetryingBackend r2(bad, fast());
  EXPECT_THROW(r2.embed({{"x"}}), BackendError);
  EXPECT_EQ(bad->calls, 1);
}

TEST(Http, RoundTripEqualsDirectCalls) {
  auto mock = std::make_shared<MockBackend>();
  BackendServer server(mock);
  server.start();
  HttpBackend client(server.url());
  EXPECT_EQ(client.capabilities(), mock->capabilities());
  EmbedRequest er{{"salt marsh", "", "tidal flow"}};
  auto a = client.embed(er).vectors;
  auto b = mock->embed(er).vectors;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].values.size(); ++j)
      EXPECT_DOUBLE_EQ(a[i].values[j], b[i].values[j]);
  SummarizeRequest sr{"First one here. Second one there. Third.", 6};
  EXPECT_EQ(client.summarize(sr).sentences, mock->summarize(sr).sentences);
  ParaphraseRequest pr{"alpha, beta", 2};
  EXPECT_EQ(client.paraphrase(pr).alternatives, mock->paraphrase(pr).alternatives);
  EXPECT_TRUE(check_backend_conformance(client).empty());
}

TEST(Http, StructuredErrorsCrossTheWire) {
  auto mock = std::make_shared<MockBackend>(
      MockBackend::Options{64, HashingEmbedder::kDefaultSeed, 3});
  BackendServer server(mock);
  server.start();
  HttpBackend client(server.url());
  try {
    client.summarize({"One two three four five.", 10});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), BackendErrorCode::kCapacity);
  }
  try {
    client.paraphrase({"", 1});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), BackendErrorCode::kMalformed);
  }
  httplib::Client raw(server.url());
  auto res = raw.Post("/embed", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("code"), "malformed");
}

TEST(Http, UnreachableAndTimeout) {
  int port;
  {
    BackendServer server(std::make_shared<MockBackend>());
    port = server.start();
  }
  HttpBackend gone("http://127.0.0.1:" + std::to_string(port));
  try {
    gone.capabilities();
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), BackendErrorCode::kUnreachable);
    EXPECT_TRUE(e.retryable());
  }

  BackendServer slow(std::make_shared<SlowBackend>());
  slow.start();
  HttpBackend impatient(slow.url(), std::chrono::seconds(1));
  try {
    impatient.summarize({"A b.", 5});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), BackendErrorCode::kTimeout);
  }
}

TEST(Http, RemoteBackendRetriesIdempotentCalls) {
  auto flaky = std::make_shared<FlakyBackend>(2, BackendErrorCode::kUnreachable);
  BackendServer server(flaky);
  server.start();
  auto remote = make_remote_backend(server.url());
  EXPECT_NO_THROW(remote->embed({{"x"}}));
  EXPECT_EQ(flaky->calls, 3);
}

TEST(Http, ProjectionProvider) {
  httplib::Server fake;
  std::atomic<int> mode{0};
  fake.Post("/project", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    json coords = json::object();
    double i = 0;
    for (auto& [id, v] : body.at("vectors").items()) {
      if (mode == 1 && i == 1) {
        coords[id] = {std::nan(""), 0.0};
      } else if (mode == 2 && i == 1) {
        // drop one concept
      } else {
        coords[id] = {i, v.size()};
      }
      i += 1;
    }
    res.set_content(json{{"coords", coords}}.dump(), "application/json");
  });
  int port = fake.bind_to_any_port("127.0.0.1");
  std::thread t([&] { fake.listen_after_bind(); });
  fake.wait_until_ready();

  ConceptVectors vectors{{"a", {{1.0, 0.0}}}, {"b", {{0.0, 1.0}}}};
  ProjectionRegistry reg;
  reg.add("fake", std::make_shared<HttpProjectionProvider>(
                      "http://127.0.0.1:" + std::to_string(port)));
  auto p = project(vectors, "external:fake", &reg);
  EXPECT_EQ(p.method, "external:fake");
  EXPECT_EQ(p.coords.at("b"), (Point2{1.0, 2.0}));
  EXPECT_THROW(project(vectors, "external:umap", &reg), ArgumentError);
  mode = 1;
  EXPECT_THROW(project(vectors, "external:fake", &reg), ProtocolError);
  mode = 2;
  EXPECT_THROW(project(vectors, "external:fake", &reg), ProtocolError);
  fake.stop();
  t.join();
}
