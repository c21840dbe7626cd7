#include <gtest/gtest.h>

#include "ceva/error.hpp"
#include "ceva/ingest.hpp"
#include "ceva/storage.hpp"
#include "fixtures.hpp"

using namespace ceva;

namespace {

std::vector<std::string> span_texts(std::string_view text) {
  std::vector<std::string> out;
  for (auto s : segment_sentences(text))
    out.emplace_back(text.substr(s.start, s.end - s.start));
  return out;
}

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

}  // namespace

TEST(Ingest, EmptyDocumentHasNoSentences) {
  auto doc = parse_document(R"({"doc_id":"d","title":"t","sections":[]})");
  EXPECT_EQ(doc.token_count, 0u);
  EXPECT_EQ(doc.sentence_count(), 0u);
}

TEST(Ingest, TwoSectionsGiveThreeSentences) {
  auto doc = parse_document(fixtures::make_doc({{"A b. C d."}, {"E f."}}));
  ASSERT_EQ(doc.sentence_count(), 3u);
  std::vector<std::size_t> sec;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(doc.sentence(i).global_index, i);
    sec.push_back(doc.sentence(i).section_index);
  }
  EXPECT_EQ(sec, (std::vector<std::size_t>{0, 0, 1}));
  EXPECT_EQ(doc.sentence(0).text, "A b.");
  EXPECT_EQ(doc.sentence(1).text, "C d.");
  EXPECT_EQ(doc.sentence(2).text, "E f.");
}

TEST(Ingest, ParsingIsDeterministic) {
  std::string raw = read_file(fixtures::golden_document());
  auto a = parse_document(raw);
  auto b = parse_document(raw);
  ASSERT_EQ(a.sentence_count(), b.sentence_count());
  for (std::size_t i = 0; i < a.sentence_count(); ++i) {
    EXPECT_EQ(a.sentence(i).text, b.sentence(i).text);
    EXPECT_EQ(a.sentence(i).tokens, b.sentence(i).tokens);
    EXPECT_EQ(a.sentence(i).char_span.start, b.sentence(i).char_span.start);
  }
}

TEST(Ingest, MalformedInputNamesTheField) {
  try {
    parse_document(R"({"doc_id":"d","title":"t","sections":[{"heading":"h","paragraphs":["ok"]},{"heading":"h","paragraphs":[3]}]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("sections[1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_document("not json"), ParseError);
  EXPECT_THROW(parse_document(R"({"title":"t","sections":[]})"), ParseError);
  EXPECT_THROW(parse_document(R"({"doc_id":"d","title":"t"})"), ParseError);
}

TEST(Ingest, ExtraSectionFieldsBecomeMetadata) {
  auto doc = parse_document(
      R"({"doc_id":"d","title":"t","sections":[{"heading":"h","paragraphs":["One two."],"figures":["fig1"]}]})");
  ASSERT_EQ(doc.sections.size(), 1u);
  EXPECT_EQ(doc.sections[0].metadata.at("figures")[0], "fig1");
  EXPECT_EQ(doc.sentence_count(), 1u);
}

TEST(Segment, Basics) {
  EXPECT_TRUE(segment_sentences("").empty());
  EXPECT_EQ(span_texts("Hello world. Bye."),
            (std::vector<std::string>{"Hello world.", "Bye."}));
  EXPECT_EQ(span_texts("no terminator here"),
            (std::vector<std::string>{"no terminator here"}));
}

TEST(Segment, AbbreviationsDoNotSplit) {
  EXPECT_EQ(span_texts("We cite et al. (2020) here. Next."),
            (std::vector<std::string>{"We cite et al. (2020) here.", "Next."}));
  EXPECT_EQ(span_texts("See Fig. 3 for details. Then Eq. 2 holds. Done."),
            (std::vector<std::string>{"See Fig. 3 for details.", "Then Eq. 2 holds.",
                                      "Done."}));
  EXPECT_EQ(span_texts("Use tools, e.g. Parsers, here. Ok."),
            (std::vector<std::string>{"Use tools, e.g. Parsers, here.", "Ok."}));
}

TEST(Segment, LowercaseContinuationDoesNotSplit) {
  EXPECT_EQ(span_texts("Value is 3.5 units. next word. Last one!"),
            (std::vector<std::string>{"Value is 3.5 units. next word.", "Last one!"}));
}

TEST(Segment, SpansCoverContentInOrder) {
  std::string text = "  First one?  Second one!\nThird \"quoted.\" Fourth 2 items.  ";
  auto spans = segment_sentences(text);
  std::string joined;
  std::size_t prev_end = 0;
  for (auto s : spans) {
    EXPECT_GE(s.start, prev_end);
    EXPECT_LT(s.start, s.end);
    prev_end = s.end;
    joined += text.substr(s.start, s.end - s.start);
  }
  EXPECT_EQ(squash(joined), squash(text));
  EXPECT_EQ(spans.size(), 4u);
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Force-Directed Layout!"),
            (std::vector<std::string>{"force", "directed", "layout"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("ABC abc"), (std::vector<std::string>{"abc", "abc"}));
  EXPECT_EQ(tokenize("mp3 files, x2y"), (std::vector<std::string>{"mp3", "files", "x2y"}));
}

TEST(Tokenize, MatchesRuleOracleOnRandomText) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcXYZ019 .,-!?'\"()\t\n";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    for (int i = 0; i < 40; ++i) s.push_back(alphabet[pick(rng)]);
    EXPECT_EQ(tokenize(s), oracle::tokens(s)) << s;
  }
}

TEST(Ingest, RoundTripSectionTextModuloWhitespace) {
  auto doc = parse_document(read_file(fixtures::golden_document()));
  for (const auto& section : doc.sections) {
    std::string joined;
    for (const auto& s : section.sentences) {
      EXPECT_FALSE(s.tokens.empty());
      EXPECT_EQ(section.text.substr(s.char_span.start, s.char_span.end - s.char_span.start),
                s.text);
      joined += s.text;
    }
    EXPECT_EQ(squash(joined), squash(section.text));
  }
  for (std::size_t i = 1; i < doc.sentence_count(); ++i)
    EXPECT_GT(doc.sentence(i).global_index, doc.sentence(i - 1).global_index);
}

TEST(Ingest, NormalizeSurfaceForm) {
  EXPECT_EQ(normalize_surface_form("  Salt   MARSH "), "salt marsh");
  EXPECT_EQ(normalize_surface_form("long-term"), "long term");
}
