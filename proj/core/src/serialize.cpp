#include "fieldtrace/serialize.hpp"

#include <nlohmann/json.hpp>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

using nlohmann::json;

std::string_view field_tag(FieldKind f) noexcept {
  switch (f) {
    case FieldKind::Title: return "TITLE";
    case FieldKind::Authors: return "AUTHORS";
    case FieldKind::Year: return "YEAR";
    case FieldKind::Venue: return "VENUE";
    case FieldKind::Doi: return "DOI";
  }
  return "?";
}

std::string serialized_value(const Reference& ref, FieldKind f) {
  switch (f) {
    case FieldKind::Title: return ref.title;
    case FieldKind::Authors: {
      std::string out;
      for (std::size_t i = 0; i < ref.authors.size(); ++i) {
        if (i) out += kAuthorSeparator;
        out += ref.authors[i];
      }
      return out;
    }
    case FieldKind::Year: return std::to_string(ref.year);
    case FieldKind::Venue: return ref.venue;
    case FieldKind::Doi: return ref.doi.value_or("");
  }
  return {};
}

std::string TaggedText::slice(const CharSpan& s) const {
  auto b = text::utf8_byte_offset(text, s.start);
  auto e = text::utf8_byte_offset(text, s.end);
  return text.substr(b, e - b);
}

TaggedText serialize_reference(const Reference& ref) {
  TaggedText t;
  std::size_t cp = 0;  // running code-point length of t.text
  auto append = [&](std::string_view s) {
    t.text += s;
    cp += text::utf8_length(s);
  };
  bool first = true;
  for (auto f : kSerializationOrder) {
    if (!first) append("\n");
    first = false;
    const std::string tag(field_tag(f));
    append("<" + tag + "> ");
    const std::size_t start = cp;
    if (f == FieldKind::Authors) {
      for (std::size_t i = 0; i < ref.authors.size(); ++i) {
        if (i) append(kAuthorSeparator);
        const std::size_t a0 = cp;
        append(ref.authors[i]);
        t.author_spans.push_back({a0, cp});
      }
    } else {
      append(serialized_value(ref, f));
    }
    t.field_spans[field_index(f)] = {start, cp};
    append(" </" + tag + ">");
  }
  return t;
}

TokenSpanMap map_spans(const TaggedText& tagged, std::span<const CharSpan> offsets) {
  const std::size_t text_len = text::utf8_length(tagged.text);
  std::size_t prev_start = 0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const auto& o = offsets[i];
    if (o.end < o.start || o.end > text_len)
      throw Error(Errc::InvalidArgument, "token " + std::to_string(i) + " has invalid offsets");
    if (o.empty()) continue;
    if (o.start < prev_start)
      throw Error(Errc::InvalidArgument, "token offsets are not monotone at " + std::to_string(i));
    prev_start = o.start;
  }

  TokenSpanMap m;
  m.offset_mapping.assign(offsets.begin(), offsets.end());
  for (auto f : kAllFields) {
    const CharSpan& fs = tagged.span(f);
    if (fs.empty()) continue;
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      if (!offsets[i].empty() && offsets[i].intersects(fs)) {
        if (!first) first = i;
        last = i;
      }
    }
    if (!first)
      throw Error(Errc::UncoveredSpan,
                  std::string(field_name(f)) + " span is not covered by any token");
    m.field_token_spans[field_index(f)] = TokenSpan{*first, *last + 1};
  }
  return m;
}

void to_json(json& j, const CharSpan& s) { j = json::array({s.start, s.end}); }

void from_json(const json& j, CharSpan& s) {
  s.start = j.at(0).get<std::size_t>();
  s.end = j.at(1).get<std::size_t>();
}

void to_json(json& j, const TaggedText& t) {
  json spans = json::object();
  for (auto f : kAllFields) spans[std::string(field_name(f))] = t.span(f);
  j = json{{"text", t.text}, {"field_char_spans", spans}, {"author_subspans", t.author_spans}};
}

void from_json(const json& j, TaggedText& t) {
  t.text = j.at("text").get<std::string>();
  for (auto f : kAllFields)
    t.field_spans[field_index(f)] =
        j.at("field_char_spans").at(std::string(field_name(f))).get<CharSpan>();
  t.author_spans = j.at("author_subspans").get<std::vector<CharSpan>>();
}

void to_json(json& j, const TokenSpanMap& m) {
  json spans = json::object();
  for (auto f : kAllFields) {
    const auto& s = m.span(f);
    spans[std::string(field_name(f))] = s ? json::array({s->start, s->end}) : json(nullptr);
  }
  j = json{{"field_token_spans", spans}, {"offset_mapping", m.offset_mapping}};
}

void from_json(const json& j, TokenSpanMap& m) {
  for (auto f : kAllFields) {
    const auto& s = j.at("field_token_spans").at(std::string(field_name(f)));
    if (s.is_null())
      m.field_token_spans[field_index(f)].reset();
    else
      m.field_token_spans[field_index(f)] = TokenSpan{s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()};
  }
  m.offset_mapping = j.at("offset_mapping").get<std::vector<CharSpan>>();
}

}  // namespace fieldtrace
