#include "ceva/storage.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include <openssl/evp.h>

#include "ceva/error.hpp"

namespace ceva {
namespace fs = std::filesystem;

namespace {

std::mutex g_hook_mutex;
AtomicWriteHook g_hook;

[[noreturn]] void fail(const std::string& what, const fs::path& p) {
  throw PersistenceError(what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view content, const fs::path& p) {
  const char* data = content.data();
  std::size_t left = content.size();
  while (left > 0) {
    ssize_t n = ::write(fd, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fail("cannot write", p);
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
}

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

}  // namespace

void set_atomic_write_hook(AtomicWriteHook hook) {
  std::lock_guard lock(g_hook_mutex);
  g_hook = std::move(hook);
}

void atomic_write(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail("cannot create", tmp);
  write_all(fd, content, tmp);
  if (::fsync(fd) != 0) {
    ::close(fd);
    fail("cannot sync", tmp);
  }
  if (::close(fd) != 0) fail("cannot close", tmp);

  AtomicWriteHook hook;
  {
    std::lock_guard lock(g_hook_mutex);
    hook = g_hook;
  }
  if (hook) hook(tmp);

  if (::rename(tmp.c_str(), path.c_str()) != 0) fail("cannot rename onto", path);
  // make the rename itself durable
  int dfd = ::open(path.parent_path().c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (dfd >= 0) {
    ::fsync(dfd);
    ::close(dfd);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

Store::Store(fs::path data_dir) : dir_(std::move(data_dir)) {
  std::error_code ec;
  for (const char* sub : {"documents", "sessions"}) {
    fs::create_directories(dir_ / sub, ec);
    if (ec)
      throw PersistenceError("cannot create " + (dir_ / sub).string() + ": " +
                             ec.message());
    for (const auto& entry : fs::directory_iterator(dir_ / sub))
      if (entry.path().extension() == ".tmp") fs::remove(entry.path(), ec);
  }
}

void Store::save_document(const std::string& id, std::string_view raw) {
  atomic_write(dir_ / "documents" / (id + ".json"), raw);
}

std::vector<std::pair<std::string, std::string>> Store::load_documents() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::directory_iterator(dir_ / "documents")) {
    if (entry.path().extension() != ".json") continue;
    out.emplace_back(entry.path().stem().string(), read_file(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path Store::session_path(const std::string& session_id) const {
  if (!valid_id(session_id))
    throw ArgumentError("invalid session id '" + session_id + "'", "session_id");
  return dir_ / "sessions" / (session_id + ".json");
}

void Store::save_session(const SummarySession& session) {
  atomic_write(session_path(session.session_id), to_json(session).dump(1));
}

SummarySession Store::load_session(const std::string& session_id) const {
  fs::path p = session_path(session_id);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("session " + session_id + ": corrupt file " + p.string() +
                    ": " + e.what());
  }
  SummarySession s = session_from_json(j);
  if (s.session_id != session_id)
    throw LoadError("session " + session_id + ": file holds session '" +
                    s.session_id + "'");
  return s;
}

std::vector<SummarySession> Store::load_sessions() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_ / "sessions"))
    if (entry.path().extension() == ".json")
      ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  std::vector<SummarySession> out;
  for (const auto& id : ids) out.push_back(load_session(id));
  return out;
}

}  // namespace ceva
