#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fieldtrace {

// Integer codes are part of the CFS1 file format; do not reorder.
enum class FieldKind : std::uint8_t { Title = 0, Authors = 1, Year = 2, Venue = 3, Doi = 4 };

inline constexpr std::size_t kFieldCount = 5;
inline constexpr std::array<FieldKind, kFieldCount> kAllFields = {
    FieldKind::Title, FieldKind::Authors, FieldKind::Year, FieldKind::Venue, FieldKind::Doi};

std::string_view field_name(FieldKind f) noexcept;  // "title", "authors", ...
FieldKind parse_field(std::string_view name);
FieldKind field_from_code(int code);
constexpr std::size_t field_index(FieldKind f) noexcept { return static_cast<std::size_t>(f); }

enum class CitationStyle : std::uint8_t { APA, MLA, Chicago, Harvard, Vancouver, IEEE, ACM, AMA };

inline constexpr std::array<CitationStyle, 8> kAllStyles = {
    CitationStyle::APA,       CitationStyle::MLA,  CitationStyle::Chicago, CitationStyle::Harvard,
    CitationStyle::Vancouver, CitationStyle::IEEE, CitationStyle::ACM,     CitationStyle::AMA};

std::string_view style_name(CitationStyle s) noexcept;  // "APA", "Chicago", ...
CitationStyle parse_style(std::string_view name);        // case-insensitive

enum class Label : std::uint8_t { Correct, Hallucinated, Unverifiable };
std::string_view label_name(Label l) noexcept;
Label parse_label(std::string_view name);

enum class Verdict : std::uint8_t { Supported, Partial, Unsupported };
std::string_view verdict_name(Verdict v) noexcept;  // "Supported", ...
Verdict parse_verdict(std::string_view name);

struct FieldLabels {
  std::array<Label, kFieldCount> labels{Label::Hallucinated, Label::Hallucinated,
                                        Label::Hallucinated, Label::Hallucinated,
                                        Label::Hallucinated};

  Label& operator[](FieldKind f) { return labels[field_index(f)]; }
  Label operator[](FieldKind f) const { return labels[field_index(f)]; }
  bool operator==(const FieldLabels&) const = default;

  static FieldLabels all(Label l);
};

/// Supported iff every assessable field is Correct; callers handle the
/// no-accepted-candidate case (Unsupported) themselves.
Verdict verdict_for_accepted(const FieldLabels& labels);

struct Reference {
  std::string id;
  int topic_id = 0;
  CitationStyle style = CitationStyle::APA;
  int position_in_prompt = 1;
  int n_requested = 5;
  std::string title;
  std::vector<std::string> authors;
  std::string venue;
  int year = 2000;
  std::optional<std::string> doi;

  bool operator==(const Reference&) const = default;
};

/// `t{topic:02}-s{style}-n{N:02}-p{pos:02}`, style lowercased.
std::string make_reference_id(int topic_id, CitationStyle style, int n_requested, int position);

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

struct SchemaViolation {
  std::string path;  // JSON pointer-ish, e.g. "$[3].year"
  std::string reason;
};

struct BatchParse {
  std::vector<Reference> references;
  std::vector<SchemaViolation> violations;
  std::size_t element_count = 0;
  std::size_t invalid_elements = 0;

  /// Fraction of array elements that were schema-valid; 0 for an empty or
  /// non-array reply.
  double validity() const;
  bool valid() const { return violations.empty() && element_count > 0; }
};

/// Parse a model reply constrained to the five-key reference schema.
/// Markdown code fences around the JSON are tolerated. Throws
/// Error(MalformedJson) when the text is not JSON at all.
BatchParse parse_reference_batch(std::string_view raw_reply, int topic_id, CitationStyle style,
                                 int n_requested);

/// Inverse of parse_reference_batch for valid references: the five-key array.
std::string to_schema_json(const std::vector<Reference>& refs);

void to_json(nlohmann::json& j, const Reference& r);
void from_json(const nlohmann::json& j, Reference& r);
void to_json(nlohmann::json& j, const FieldLabels& l);
void from_json(const nlohmann::json& j, FieldLabels& l);

}  // namespace fieldtrace
