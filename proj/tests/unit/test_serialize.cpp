#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <random>

#include "fieldtrace/error.hpp"
#include "fieldtrace/serialize.hpp"
#include "fieldtrace/text.hpp"
#include "test_support.hpp"

using namespace fieldtrace;

namespace {

Reference attention() {
  Reference r;
  r.title = "Attention Is All You Need";
  r.authors = {"Ashish Vaswani", "Noam Shazeer", "Niki Parmar", "Jakob Uszkoreit", "Llion Jones",
               "Aidan N. Gomez", "Lukasz Kaiser", "Illia Polosukhin"};
  r.venue = "Advances in Neural Information Processing Systems";
  r.year = 2017;
  r.doi = "10.48550/arXiv.1706.03762";
  return r;
}

std::vector<CharSpan> one_per_char(const TaggedText& t) {
  std::vector<CharSpan> out;
  const auto n = text::utf8_length(t.text);
  for (std::size_t i = 0; i < n; ++i) out.push_back({i, i + 1});
  return out;
}

}  // namespace

TEST(Serialize, ExampleReference) {
  const auto t = serialize_reference(attention());
  EXPECT_NE(t.text.find("<TITLE> Attention Is All You Need </TITLE>"), std::string::npos);
  EXPECT_EQ(t.slice(t.span(FieldKind::Title)), "Attention Is All You Need");
  EXPECT_EQ(t.span(FieldKind::Title).start, 8u);
  EXPECT_NE(t.text.find("<AUTHORS> Ashish Vaswani | Noam Shazeer | "), std::string::npos);
  EXPECT_NE(t.text.find("<YEAR> 2017 </YEAR>"), std::string::npos);
  EXPECT_NE(t.text.find("<DOI> 10.48550/arXiv.1706.03762 </DOI>"), std::string::npos);
  ASSERT_EQ(t.author_spans.size(), 8u);
  EXPECT_EQ(t.slice(t.author_spans[5]), "Aidan N. Gomez");
  EXPECT_LT(t.span(FieldKind::Authors).start, t.span(FieldKind::Venue).start);
  EXPECT_LT(t.span(FieldKind::Venue).start, t.span(FieldKind::Year).start);
}

TEST(Serialize, SingleAuthorHasNoSeparator) {
  Reference r = attention();
  r.authors = {"Ashish Vaswani"};
  const auto t = serialize_reference(r);
  ASSERT_EQ(t.author_spans.size(), 1u);
  EXPECT_EQ(t.author_spans[0], t.span(FieldKind::Authors));
  EXPECT_EQ(t.slice(t.span(FieldKind::Authors)).find('|'), std::string::npos);
}

TEST(Serialize, EmptyDoiIsEmptyBody) {
  Reference r = attention();
  r.doi.reset();
  const auto t = serialize_reference(r);
  EXPECT_NE(t.text.find("<DOI>  </DOI>"), std::string::npos);
  EXPECT_TRUE(t.span(FieldKind::Doi).empty());
}

TEST(Serialize, RandomRoundTripOverUnicode) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto r = fieldtrace::testing::random_reference(rng);
    const auto t = serialize_reference(r);
    for (auto f : kAllFields) EXPECT_EQ(t.slice(t.span(f)), serialized_value(r, f));
    ASSERT_EQ(t.author_spans.size(), r.authors.size());
    for (std::size_t a = 0; a < r.authors.size(); ++a) EXPECT_EQ(t.slice(t.author_spans[a]), r.authors[a]);
  }
}

TEST(Serialize, JsonRoundTrip) {
  const auto t = serialize_reference(attention());
  const TaggedText back = nlohmann::json(t).get<TaggedText>();
  EXPECT_EQ(back.text, t.text);
  EXPECT_EQ(back.field_spans, t.field_spans);
  EXPECT_EQ(back.author_spans, t.author_spans);
}

TEST(MapSpans, IdentityTokenization) {
  const auto t = serialize_reference(attention());
  const auto offsets = one_per_char(t);
  const auto m = map_spans(t, offsets);
  for (auto f : kAllFields) {
    ASSERT_TRUE(m.span(f).has_value());
    EXPECT_EQ(m.span(f)->start, t.span(f).start);
    EXPECT_EQ(m.span(f)->end, t.span(f).end);
  }
}

TEST(MapSpans, StraddlingTokenIsIncluded) {
  TaggedText t;
  t.text = "<T> ab </T>";
  t.field_spans[field_index(FieldKind::Title)] = {4, 6};
  // tokens: "<T>", " a", "b ", "</T>"
  const std::vector<CharSpan> offsets = {{0, 3}, {3, 5}, {5, 7}, {7, 11}};
  for (auto f : kAllFields)
    if (f != FieldKind::Title) t.field_spans[field_index(f)] = {3, 3};
  const auto m = map_spans(t, offsets);
  ASSERT_TRUE(m.span(FieldKind::Title));
  EXPECT_EQ(*m.span(FieldKind::Title), (TokenSpan{1, 3}));
  EXPECT_FALSE(m.span(FieldKind::Year).has_value());
}

TEST(MapSpans, HandEnumeratedBpeOffsets) {
  Reference r;
  r.title = "Deep nets";
  r.authors = {"Li"};
  r.venue = "ICML";
  r.year = 2020;
  r.doi = "10.1/x";
  const auto t = serialize_reference(r);
  ASSERT_EQ(t.text,
            "<TITLE> Deep nets </TITLE>\n<AUTHORS> Li </AUTHORS>\n<VENUE> ICML </VENUE>\n"
            "<YEAR> 2020 </YEAR>\n<DOI> 10.1/x </DOI>");
  // Merge-style pieces; several carry a leading space.
  const std::vector<CharSpan> offsets = {
      {0, 7},   {7, 12},  {12, 17}, {17, 26}, {26, 27},            // <TITLE> | " Deep" | " nets" | " </TITLE>" | \n
      {27, 36}, {36, 39}, {39, 50}, {50, 51},                      // <AUTHORS> | " Li" | " </AUTHORS>" | \n
      {51, 58}, {58, 60}, {60, 63}, {63, 72}, {72, 73},            // <VENUE> | " I" | "CML" | " </VENUE>" | \n
      {73, 79}, {79, 82}, {82, 84}, {84, 92}, {92, 93},            // <YEAR> | " 20" | "20" | " </YEAR>" | \n
      {93, 98}, {98, 102}, {102, 103}, {103, 105}, {105, 112}};    // <DOI> | " 10." | "1" | "/x" | " </DOI>"
  const auto m = map_spans(t, offsets);
  EXPECT_EQ(*m.span(FieldKind::Title), (TokenSpan{1, 3}));
  EXPECT_EQ(*m.span(FieldKind::Authors), (TokenSpan{6, 7}));
  EXPECT_EQ(*m.span(FieldKind::Venue), (TokenSpan{10, 12}));
  EXPECT_EQ(*m.span(FieldKind::Year), (TokenSpan{15, 17}));
  EXPECT_EQ(*m.span(FieldKind::Doi), (TokenSpan{20, 23}));
}

TEST(MapSpans, UncoveredAndNonMonotone) {
  const auto t = serialize_reference(attention());
  std::vector<CharSpan> only_first = {{0, 3}};
  try {
    map_spans(t, only_first);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UncoveredSpan);
  }
  std::vector<CharSpan> backwards = {{5, 6}, {0, 1}};
  EXPECT_THROW(map_spans(t, backwards), Error);
}

TEST(MapSpans, ZeroWidthSpecialTokensNeverIntersect) {
  const auto t = serialize_reference(attention());
  auto offsets = one_per_char(t);
  offsets.insert(offsets.begin(), CharSpan{0, 0});
  const auto m = map_spans(t, offsets);
  EXPECT_EQ(m.span(FieldKind::Title)->start, t.span(FieldKind::Title).start + 1);
}

TEST(MapSpans, DisjointFieldsGiveDisjointTokenSpans) {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 100; ++iter) {
    const auto r = fieldtrace::testing::random_reference(rng);
    const auto t = serialize_reference(r);
    // random word-ish chunks that never cross a newline
    const auto n = text::utf8_length(t.text);
    const auto cps = text::decode_utf8(t.text);
    std::vector<CharSpan> offsets;
    std::uniform_int_distribution<int> len(1, 4);
    std::size_t pos = 0;
    while (pos < n) {
      std::size_t end = std::min<std::size_t>(n, pos + len(rng));
      for (std::size_t k = pos; k < end; ++k)
        if (cps[k] == U'\n') {
          end = k == pos ? k + 1 : k;
          break;
        }
      offsets.push_back({pos, end});
      pos = end;
    }
    const auto m = map_spans(t, offsets);
    std::vector<TokenSpan> spans;
    for (auto f : kAllFields)
      if (m.span(f)) spans.push_back(*m.span(f));
    for (std::size_t a = 0; a < spans.size(); ++a)
      for (std::size_t b = a + 1; b < spans.size(); ++b)
        EXPECT_TRUE(spans[a].end <= spans[b].start || spans[b].end <= spans[a].start);
    for (auto f : kAllFields) {
      if (!m.span(f)) continue;
      for (auto k = m.span(f)->start; k < m.span(f)->end; ++k)
        EXPECT_TRUE(offsets[k].intersects(t.span(f)));
    }
  }
}

TEST(MapSpans, JsonRoundTrip) {
  const auto t = serialize_reference(attention());
  const auto m = map_spans(t, one_per_char(t));
  const TokenSpanMap back = nlohmann::json(m).get<TokenSpanMap>();
  EXPECT_EQ(back.field_token_spans, m.field_token_spans);
  EXPECT_EQ(back.offset_mapping, m.offset_mapping);
}

TEST(MapSpans, CraftedOffsetFixtures) {
  const auto cases = nlohmann::json::parse(
      fieldtrace::testing::read_file(fieldtrace::testing::fixture_path("spans/crafted.json")));
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& c : cases) {
    Reference r;
    r.title = c["reference"]["title"];
    r.authors = c["reference"]["authors"].get<std::vector<std::string>>();
    r.venue = c["reference"]["venue"];
    r.year = c["reference"]["year"];
    if (!c["reference"]["doi"].is_null()) r.doi = c["reference"]["doi"].get<std::string>();
    const auto t = serialize_reference(r);
    ASSERT_EQ(t.text, c["text"].get<std::string>());
    std::vector<CharSpan> offsets;
    for (const auto& o : c["offsets"]) offsets.push_back({o[0].get<std::size_t>(), o[1].get<std::size_t>()});
    const auto m = map_spans(t, offsets);
    for (auto f : kAllFields) {
      const auto& e = c["expected"][std::string(field_name(f))];
      if (e.is_null()) {
        EXPECT_FALSE(m.span(f).has_value());
      } else {
        ASSERT_TRUE(m.span(f).has_value());
        EXPECT_EQ(m.span(f)->start, e[0].get<std::size_t>());
        EXPECT_EQ(m.span(f)->end, e[1].get<std::size_t>());
      }
    }
  }
}
