#include <gtest/gtest.h>

#include <fstream>

#include "ceva/error.hpp"
#include "ceva/storage.hpp"
#include "session_cases.hpp"

using namespace ceva;
namespace fs = std::filesystem;

namespace {

struct HookGuard {
  ~HookGuard() { set_atomic_write_hook(nullptr); }
};

SummarySession sample(const std::string& id) {
  auto& a = session_cases::golden();
  return generate_initial_summary(a.doc, *a.backend, id, {40, false});
}

}  // namespace

TEST(AtomicWrite, ReplacesContent) {
  fixtures::TempDir dir("aw");
  auto p = dir.path / "f.json";
  atomic_write(p, "one");
  EXPECT_EQ(read_file(p), "one");
  atomic_write(p, "two");
  EXPECT_EQ(read_file(p), "two");
  EXPECT_FALSE(fs::exists(dir.path / "f.json.tmp"));
}

TEST(AtomicWrite, CrashBeforeRenameKeepsOldFile) {
  fixtures::TempDir dir("crash");
  Store store(dir.path);
  auto s = sample("s1");
  store.save_session(s);
  auto edited = author_sentence(s, 0, "Added later.");
  {
    HookGuard guard;
    set_atomic_write_hook([](const fs::path&) { throw std::runtime_error("crash"); });
    EXPECT_THROW(store.save_session(edited), std::runtime_error);
  }
  EXPECT_TRUE(fs::exists(store.session_path("s1").string() + ".tmp"));
  // the new version is fully on disk in the temp file, never half-written
  EXPECT_EQ(session_from_json(nlohmann::json::parse(
                read_file(store.session_path("s1").string() + ".tmp"))),
            edited);
  Store reopened(dir.path);
  EXPECT_FALSE(fs::exists(store.session_path("s1").string() + ".tmp"));
  EXPECT_EQ(reopened.load_session("s1"), s);
}

TEST(AtomicWrite, UnwritableLocation) {
  fixtures::TempDir dir("ro");
  std::ofstream(dir.path / "plain") << "x";
  EXPECT_THROW(atomic_write(dir.path / "plain" / "f.json", "x"), PersistenceError);
  EXPECT_THROW(Store(dir.path / "plain"), PersistenceError);
}

TEST(Store, SessionsRoundTripAndLatestWins) {
  fixtures::TempDir dir("store2");
  Store store(dir.path);
  auto a = sample("alpha");
  auto b = sample("beta");
  store.save_session(b);
  store.save_session(a);
  auto a2 = author_sentence(a, 0, "Quick second save.");
  store.save_session(a2);
  auto all = store.load_sessions();
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0], a2);
  EXPECT_EQ(all[1], b);
  EXPECT_EQ(Store(dir.path).load_session("alpha"), a2);
  EXPECT_THROW(store.session_path("../etc"), ArgumentError);
  EXPECT_THROW(store.load_session("missing"), LoadError);
}

TEST(Store, CorruptSessionNamesIt) {
  fixtures::TempDir dir("corrupt");
  Store store(dir.path);
  store.save_session(sample("good"));
  std::ofstream(store.session_path("bad")) << "{\"session_id\": \"bad\", ";
  try {
    store.load_sessions();
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  EXPECT_NO_THROW(store.load_session("good"));

  auto moved = to_json(sample("other"));
  std::ofstream(store.session_path("renamed")) << moved.dump();
  EXPECT_THROW(store.load_session("renamed"), LoadError);
}

TEST(Store, Documents) {
  fixtures::TempDir dir("docs");
  Store store(dir.path);
  store.save_document("bb", "{\"b\":1}");
  store.save_document("aa", "{\"a\":1}");
  auto docs = store.load_documents();
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].first, "aa");
  EXPECT_EQ(docs[1].second, "{\"b\":1}");
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
