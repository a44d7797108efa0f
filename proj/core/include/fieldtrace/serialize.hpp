#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fieldtrace/refmodel.hpp"

namespace fieldtrace {

/// Half-open range of Unicode code-point indices (the unit tokenizer offset
/// mappings use).
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool empty() const { return end <= start; }
  bool intersects(const CharSpan& o) const { return start < o.end && o.start < end; }
  bool operator==(const CharSpan&) const = default;
};

/// Document order of tagged blocks.
inline constexpr std::array<FieldKind, kFieldCount> kSerializationOrder = {
    FieldKind::Title, FieldKind::Authors, FieldKind::Venue, FieldKind::Year, FieldKind::Doi};

inline constexpr std::string_view kAuthorSeparator = " | ";

std::string_view field_tag(FieldKind f) noexcept;  // "TITLE", ...

/// The exact string placed between a field's tags.
std::string serialized_value(const Reference& ref, FieldKind f);

struct TaggedText {
  std::string text;
  std::array<CharSpan, kFieldCount> field_spans{};  // indexed by field code
  std::vector<CharSpan> author_spans;

  const CharSpan& span(FieldKind f) const { return field_spans[field_index(f)]; }
  /// UTF-8 substring for a code-point span.
  std::string slice(const CharSpan& s) const;
};

/// One `<TAG> value </TAG>` line per field, joined by '\n'. Spans cover the
/// value only (tags and the single padding spaces excluded).
TaggedText serialize_reference(const Reference& ref);

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const TokenSpan&) const = default;
};

struct TokenSpanMap {
  std::array<std::optional<TokenSpan>, kFieldCount> field_token_spans{};  // empty fields: nullopt
  std::vector<CharSpan> offset_mapping;

  const std::optional<TokenSpan>& span(FieldKind f) const {
    return field_token_spans[field_index(f)];
  }
};

/// t_start = first token whose range intersects the field's char span,
/// t_end = one past the last. Zero-width tokens (special tokens) never
/// intersect. Throws Error(UncoveredSpan) when a non-empty field meets no
/// token and Error(InvalidArgument) for non-monotone offsets.
TokenSpanMap map_spans(const TaggedText& tagged, std::span<const CharSpan> offsets);

void to_json(nlohmann::json& j, const CharSpan& s);
void from_json(const nlohmann::json& j, CharSpan& s);
void to_json(nlohmann::json& j, const TaggedText& t);
void from_json(const nlohmann::json& j, TaggedText& t);
void to_json(nlohmann::json& j, const TokenSpanMap& m);
void from_json(const nlohmann::json& j, TokenSpanMap& m);

}  // namespace fieldtrace
