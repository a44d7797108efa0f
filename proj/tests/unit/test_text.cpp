#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "fieldtrace/text.hpp"

using namespace fieldtrace::text;

TEST(Utf8, RoundTripsMultiByteCodePoints) {
  const std::string s = "a\xC3\xA9\xE6\xA8\xA1\xF0\x9F\x98\x80";  // a é 模 😀
  const auto cps = decode_utf8(s);
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[1], U'é');
  EXPECT_EQ(cps[3], U'\U0001F600');
  EXPECT_EQ(encode_utf8(cps), s);
  EXPECT_EQ(utf8_length(s), 4u);
  EXPECT_EQ(utf8_byte_offset(s, 2), 3u);
  EXPECT_EQ(utf8_byte_offset(s, 4), s.size());
}

TEST(Normalize, TitleCasefoldsStripsPunctuationAndCollapsesSpace) {
  EXPECT_EQ(normalize_title("  Attention   Is ALL, You Need!  "), "attention is all you need");
  EXPECT_EQ(normalize_title("BERT: Pre-training"), "bert pretraining");
  EXPECT_EQ(normalize_title(""), "");
}

TEST(Levenshtein, CountsCodePointEdits) {
  EXPECT_EQ(levenshtein(U"kitten", U"sitting"), 3u);
  EXPECT_EQ(levenshtein(U"", U"abc"), 3u);
  EXPECT_EQ(levenshtein(U"café", U"cafe"), 1u);
  EXPECT_EQ(levenshtein(U"same", U"same"), 0u);
}

TEST(Levenshtein, MatchesNaiveRecursionOnShortStrings) {
  std::function<std::size_t(std::u32string_view, std::u32string_view)> naive =
      [&](std::u32string_view a, std::u32string_view b) -> std::size_t {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::size_t sub = naive(a.substr(1), b.substr(1)) + (a[0] != b[0]);
    return std::min({naive(a.substr(1), b) + 1, naive(a, b.substr(1)) + 1, sub});
  };
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> len(0, 5), ch(0, 2);
  for (int t = 0; t < 200; ++t) {
    std::u32string a, b;
    for (int i = len(rng); i > 0; --i) a += static_cast<char32_t>(U'a' + ch(rng));
    for (int i = len(rng); i > 0; --i) b += static_cast<char32_t>(U'a' + ch(rng));
    EXPECT_EQ(levenshtein(a, b), naive(a, b));
  }
}

TEST(Similarity, BoundsAndEmptyConvention) {
  EXPECT_DOUBLE_EQ(normalized_similarity("", ""), 1.0);
  EXPECT_DOUBLE_EQ(normalized_similarity("abc", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(normalized_similarity("abcd", "abcx"), 0.75);
  EXPECT_DOUBLE_EQ(normalized_similarity("abc", ""), 0.0);
}

TEST(Jaccard, SetOverlap) {
  EXPECT_DOUBLE_EQ(jaccard({"a", "b"}, {"b", "c"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({"x"}, {"x"}), 1.0);
}

TEST(FamilyName, HandlesCommonNameOrders) {
  EXPECT_EQ(family_name("Ashish Vaswani"), "vaswani");
  EXPECT_EQ(family_name("Vaswani, Ashish"), "vaswani");
  EXPECT_EQ(family_name("Vaswani A"), "vaswani");
  EXPECT_EQ(family_name("A. Vaswani"), "vaswani");
  EXPECT_EQ(family_name("Martin Luther King Jr."), "king");
  EXPECT_EQ(family_name("Ludwig van Beethoven"), "van beethoven");
  EXPECT_EQ(family_name(""), "");
}

TEST(Trim, StripsAsciiWhitespace) {
  EXPECT_EQ(trim("\t a b \n"), "a b");
  EXPECT_EQ(trim("   "), "");
  EXPECT_EQ(split_whitespace(" a  b\tc ").size(), 3u);
}
