#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ceva {

// Half-open byte range [start, end).
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
};

struct Sentence {
  std::size_t global_index = 0;
  std::size_t section_index = 0;
  CharSpan char_span;  // within Section::text
  std::string text;
  std::vector<std::string> tokens;

  bool operator==(const Sentence&) const = default;
};

struct Section {
  std::size_t index = 0;
  std::string heading;
  // Paragraphs joined by a blank line; sentence spans index into this.
  std::string text;
  std::vector<Sentence> sentences;
  // Figures, tables, references and any other non-body fields, carried
  // verbatim and never sentence-indexed.
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const Section&) const = default;
};

struct SourceDocument {
  std::string doc_id;
  std::string title;
  std::vector<Section> sections;
  std::size_t token_count = 0;

  std::size_t sentence_count() const;
  // Sentence by global index; throws ArgumentError when out of range.
  const Sentence& sentence(std::size_t global_index) const;
  // All sentences in document order.
  std::vector<const Sentence*> sentences() const;

  bool operator==(const SourceDocument&) const = default;
};

// Parses the JSON document interchange format:
//   {"doc_id": str, "title": str,
//    "sections": [{"heading": str, "paragraphs": [str, ...], ...}, ...]}
// Throws ParseError naming the offending field.
SourceDocument parse_document(std::string_view raw);

// Rule-based sentence boundaries. A boundary follows a run of [.?!] (plus
// closing quotes/brackets) that is followed by whitespace and then an
// uppercase letter or digit, unless the run ends a blocklisted
// abbreviation. Spans are trimmed of surrounding whitespace.
std::vector<CharSpan> segment_sentences(std::string_view text);

// Lowercased runs of [A-Za-z0-9] (non-ASCII bytes count as word bytes).
std::vector<std::string> tokenize(std::string_view text);

// Tokens joined by single spaces.
std::string normalize_surface_form(std::string_view text);

}  // namespace ceva
