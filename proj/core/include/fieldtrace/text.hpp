#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// String utilities shared by matching and serialization. Case folding is
// ASCII-only; non-ASCII code points pass through unchanged.
namespace fieldtrace::text {

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Number of code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

/// Byte offset of the `cp_index`-th code point (or s.size() at the end).
std::size_t utf8_byte_offset(std::string_view s, std::size_t cp_index);

std::string trim(std::string_view s);
std::string ascii_lower(std::string_view s);

/// Casefold, drop ASCII punctuation, collapse whitespace runs to one space.
std::string normalize_title(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

/// Levenshtein distance over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - levenshtein / max(len); 1 when both empty.
double normalized_similarity(std::string_view a, std::string_view b);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Casefolded family name of a person-name string. Handles "Family, Given",
/// "Given Family", "Family AB" (Vancouver initials) and lowercase particles
/// such as "van der".
std::string family_name(std::string_view person);

}  // namespace fieldtrace::text
