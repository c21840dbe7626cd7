#include "ceva/ingest.hpp"

#include <algorithm>
#include <array>

#include "ceva/error.hpp"

namespace ceva {
namespace {

constexpr std::array<std::string_view, 7> kAbbreviations = {
    "e.g.", "i.e.", "et al.", "Fig.", "Eq.", "vs.", "cf."};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}
bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }
bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}
bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}
bool is_word_byte(char c) {
  return is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80;
}
bool starts_sentence(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// True when text[0, end) finishes with a blocklisted abbreviation that
// starts at a word boundary.
bool ends_with_abbreviation(std::string_view text, std::size_t end) {
  std::string_view head = text.substr(0, end);
  for (std::string_view abbr : kAbbreviations) {
    if (head.size() < abbr.size()) continue;
    if (head.substr(head.size() - abbr.size()) != abbr) continue;
    std::size_t begin = head.size() - abbr.size();
    if (begin == 0 || !is_word_byte(head[begin - 1])) return true;
  }
  return false;
}

CharSpan trim(std::string_view text, std::size_t start, std::size_t end) {
  while (start < end && is_space(text[start])) ++start;
  while (end > start && is_space(text[end - 1])) --end;
  return {start, end};
}

std::string expect_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path + ": expected a string");
  return j.get<std::string>();
}

}  // namespace

std::size_t SourceDocument::sentence_count() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.sentences.size();
  return n;
}

const Sentence& SourceDocument::sentence(std::size_t global_index) const {
  for (const auto& section : sections) {
    if (section.sentences.empty()) continue;
    if (global_index <= section.sentences.back().global_index) {
      std::size_t offset =
          global_index - section.sentences.front().global_index;
      return section.sentences.at(offset);
    }
  }
  throw ArgumentError("sentence index " + std::to_string(global_index) +
                      " out of range");
}

std::vector<const Sentence*> SourceDocument::sentences() const {
  std::vector<const Sentence*> out;
  out.reserve(sentence_count());
  for (const auto& section : sections)
    for (const auto& s : section.sentences) out.push_back(&s);
  return out;
}

std::vector<CharSpan> segment_sentences(std::string_view text) {
  std::vector<CharSpan> spans;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_terminator(text[j])) ++j;
    while (j < text.size() && is_closer(text[j])) ++j;
    std::size_t k = j;
    while (k < text.size() && is_space(text[k])) ++k;
    bool boundary = k > j && k < text.size() && starts_sentence(text[k]) &&
                    !ends_with_abbreviation(text, j);
    if (boundary) {
      CharSpan span = trim(text, start, j);
      if (span.size() > 0) spans.push_back(span);
      start = k;
    }
    i = j;
  }
  CharSpan tail = trim(text, start, text.size());
  if (tail.size() > 0) spans.push_back(tail);
  return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_word_byte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                               : c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize_surface_form(std::string_view text) {
  std::string out;
  for (const auto& t : tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

SourceDocument parse_document(std::string_view raw) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("document: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("document: expected an object");

  SourceDocument doc;
  if (!root.contains("doc_id")) throw ParseError("doc_id: missing");
  doc.doc_id = expect_string(root["doc_id"], "doc_id");
  if (root.contains("title")) doc.title = expect_string(root["title"], "title");
  if (!root.contains("sections")) throw ParseError("sections: missing");
  const auto& sections = root["sections"];
  if (!sections.is_array()) throw ParseError("sections: expected an array");

  std::size_t global = 0;
  for (std::size_t si = 0; si < sections.size(); ++si) {
    const std::string path = "sections[" + std::to_string(si) + "]";
    const auto& js = sections[si];
    if (!js.is_object()) throw ParseError(path + ": expected an object");

    Section section;
    section.index = si;
    if (js.contains("heading"))
      section.heading = expect_string(js["heading"], path + ".heading");
    if (!js.contains("paragraphs"))
      throw ParseError(path + ".paragraphs: missing");
    const auto& paragraphs = js["paragraphs"];
    if (!paragraphs.is_array())
      throw ParseError(path + ".paragraphs: expected an array");
    for (const auto& [key, value] : js.items()) {
      if (key != "heading" && key != "paragraphs") section.metadata[key] = value;
    }

    for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
      std::string para = expect_string(
          paragraphs[pi], path + ".paragraphs[" + std::to_string(pi) + "]");
      if (pi > 0) section.text += "\n\n";
      const std::size_t offset = section.text.size();
      section.text += para;

      // Token-less fragments (stray punctuation) are folded into the
      // neighbouring sentence of the same paragraph.
      std::vector<CharSpan> merged;
      bool pending_prefix = false;
      CharSpan prefix;
      for (CharSpan span : segment_sentences(para)) {
        bool has_tokens =
            !tokenize(std::string_view(para).substr(span.start, span.size()))
                 .empty();
        if (!has_tokens) {
          if (!merged.empty()) {
            merged.back().end = span.end;
          } else if (!pending_prefix) {
            prefix = span;
            pending_prefix = true;
          } else {
            prefix.end = span.end;
          }
          continue;
        }
        if (pending_prefix) {
          span.start = prefix.start;
          pending_prefix = false;
        }
        merged.push_back(span);
      }

      for (CharSpan span : merged) {
        Sentence s;
        s.global_index = global++;
        s.section_index = si;
        s.char_span = {offset + span.start, offset + span.end};
        s.text = para.substr(span.start, span.size());
        s.tokens = tokenize(s.text);
        doc.token_count += s.tokens.size();
        section.sentences.push_back(std::move(s));
      }
    }
    doc.sections.push_back(std::move(section));
  }
  return doc;
}

}  // namespace ceva
