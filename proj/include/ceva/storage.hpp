#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ceva/session.hpp"

namespace ceva {

// Writes `content` to `<path>.tmp`, flushes it to disk and renames it over
// `path`. Readers see either the old file or the new one. I/O failures raise
// PersistenceError and leave `path` untouched.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// Test hook run after the temp file is durable and before the rename. A hook
// that throws aborts the write at exactly that point.
using AtomicWriteHook = std::function<void(const std::filesystem::path& temp)>;
void set_atomic_write_hook(AtomicWriteHook hook);

std::string read_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

// On-disk layout under the data directory:
//   documents/<sha256>.json   raw uploaded document
//   sessions/<session_id>.json
class Store {
 public:
  // Creates the directories and removes temp files left by interrupted
  // writes.
  explicit Store(std::filesystem::path data_dir);

  const std::filesystem::path& data_dir() const { return dir_; }

  void save_document(const std::string& id, std::string_view raw);
  // (id, raw) for every stored document, ordered by id.
  std::vector<std::pair<std::string, std::string>> load_documents() const;

  void save_session(const SummarySession& session);
  SummarySession load_session(const std::string& session_id) const;
  // Ordered by session id. A corrupt file raises LoadError naming it.
  std::vector<SummarySession> load_sessions() const;

  std::filesystem::path session_path(const std::string& session_id) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace ceva
