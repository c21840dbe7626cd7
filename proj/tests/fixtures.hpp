#pragma once

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "oracles.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return CEVA_DATA_DIR; }
inline std::filesystem::path golden_document() {
  return data_dir() / "golden" / "document.json";
}
inline std::filesystem::path golden_gazetteer() {
  return data_dir() / "golden" / "gazetteer.tsv";
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("ceva-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::permissions(path, std::filesystem::perms::owner_all,
                                 std::filesystem::perm_options::add, ec);
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// Document JSON from sections of paragraphs.
inline std::string make_doc(const std::vector<std::vector<std::string>>& sections,
                            const std::string& doc_id = "doc") {
  nlohmann::json j{{"doc_id", doc_id}, {"title", "Test"}, {"sections", nlohmann::json::array()}};
  for (std::size_t i = 0; i < sections.size(); ++i)
    j["sections"].push_back(
        {{"heading", "Section " + std::to_string(i)}, {"paragraphs", sections[i]}});
  return j.dump();
}

// A seeded synthetic corpus whose sentences and gazetteer forms are known
// independently of the engine.
struct Corpus {
  std::string doc_json;
  std::string gazetteer_tsv;
  std::vector<oracle::Form> forms;
  std::vector<oracle::SentenceRef> sentences;
  std::vector<std::string> sentence_texts;
  std::size_t n_sections = 0;
};

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = {
      "river", "delta", "marsh", "tide", "sand", "silt", "root", "reed",
      "crab", "heron", "storm", "wave", "flow", "basin", "channel", "levee",
      "peat", "carbon", "salt", "fresh", "water", "grass", "mud", "shore",
      "dune", "bank", "pool", "creek", "bay", "inlet", "stone", "clay",
      "moss", "fern", "eel", "shell", "algae", "bloom", "drift", "current"};
  return v;
}

inline Corpus random_corpus(std::uint64_t seed, std::size_t n_sentences,
                            std::size_t n_concepts, std::size_t n_sections) {
  std::mt19937_64 rng(seed);
  const auto& vocab = vocabulary();
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  Corpus c;
  c.n_sections = n_sections;

  // concepts: one to three aliases of one to three words, all distinct
  std::set<std::vector<std::string>> used;
  std::uniform_int_distribution<int> len(1, 3), nalias(1, 3);
  for (std::size_t i = 0; i < n_concepts; ++i) {
    std::string id = "K" + std::to_string(i + 1);
    std::vector<std::string> aliases;
    int want = nalias(rng);
    while (static_cast<int>(aliases.size()) < want) {
      std::vector<std::string> toks;
      int l = len(rng);
      for (int t = 0; t < l; ++t) toks.push_back(vocab[word(rng)]);
      if (!used.insert(toks).second) continue;
      std::string s;
      for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
      aliases.push_back(s);
      c.forms.push_back({toks, id});
    }
    std::string joined;
    for (const auto& a : aliases) joined += (joined.empty() ? "" : "|") + a;
    c.gazetteer_tsv += id + "\t" + aliases[0] + "\thttps://example.org/" + id + "\t" +
                       joined + "\n";
  }

  std::vector<std::vector<std::string>> paragraphs(n_sections);
  std::uniform_int_distribution<int> slen(4, 14);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    std::size_t section = i * n_sections / n_sentences;
    std::string text;
    int l = slen(rng);
    for (int t = 0; t < l; ++t) text += (t ? " " : "") + vocab[word(rng)];
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    text += ".";
    c.sentence_texts.push_back(text);
    c.sentences.push_back({section, oracle::tokens(text)});
    if (paragraphs[section].empty()) paragraphs[section].push_back("");
    auto& p = paragraphs[section].back();
    p += (p.empty() ? "" : " ") + text;
  }
  c.doc_json = make_doc(paragraphs, "corpus-" + std::to_string(seed));
  return c;
}

}  // namespace fixtures
