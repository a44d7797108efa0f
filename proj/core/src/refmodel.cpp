#include "fieldtrace/refmodel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

using nlohmann::json;

std::string_view field_name(FieldKind f) noexcept {
  switch (f) {
    case FieldKind::Title: return "title";
    case FieldKind::Authors: return "authors";
    case FieldKind::Year: return "year";
    case FieldKind::Venue: return "venue";
    case FieldKind::Doi: return "doi";
  }
  return "?";
}

FieldKind parse_field(std::string_view name) {
  auto low = text::ascii_lower(name);
  for (auto f : kAllFields)
    if (field_name(f) == low) return f;
  if (low == "author") return FieldKind::Authors;
  throw Error(Errc::InvalidArgument, "unknown field '" + std::string(name) + "'");
}

FieldKind field_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kFieldCount))
    throw Error(Errc::InvalidArgument, "field code out of range: " + std::to_string(code));
  return static_cast<FieldKind>(code);
}

std::string_view style_name(CitationStyle s) noexcept {
  switch (s) {
    case CitationStyle::APA: return "APA";
    case CitationStyle::MLA: return "MLA";
    case CitationStyle::Chicago: return "Chicago";
    case CitationStyle::Harvard: return "Harvard";
    case CitationStyle::Vancouver: return "Vancouver";
    case CitationStyle::IEEE: return "IEEE";
    case CitationStyle::ACM: return "ACM";
    case CitationStyle::AMA: return "AMA";
  }
  return "?";
}

CitationStyle parse_style(std::string_view name) {
  auto low = text::ascii_lower(name);
  for (auto s : kAllStyles)
    if (text::ascii_lower(style_name(s)) == low) return s;
  throw Error(Errc::InvalidArgument, "unknown citation style '" + std::string(name) + "'");
}

std::string_view label_name(Label l) noexcept {
  switch (l) {
    case Label::Correct: return "correct";
    case Label::Hallucinated: return "hallucinated";
    case Label::Unverifiable: return "unverifiable";
  }
  return "?";
}

Label parse_label(std::string_view name) {
  auto low = text::ascii_lower(name);
  for (auto l : {Label::Correct, Label::Hallucinated, Label::Unverifiable})
    if (label_name(l) == low) return l;
  throw Error(Errc::InvalidArgument, "unknown label '" + std::string(name) + "'");
}

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Supported: return "Supported";
    case Verdict::Partial: return "Partial";
    case Verdict::Unsupported: return "Unsupported";
  }
  return "?";
}

Verdict parse_verdict(std::string_view name) {
  auto low = text::ascii_lower(name);
  for (auto v : {Verdict::Supported, Verdict::Partial, Verdict::Unsupported})
    if (text::ascii_lower(verdict_name(v)) == low) return v;
  throw Error(Errc::InvalidArgument, "unknown verdict '" + std::string(name) + "'");
}

FieldLabels FieldLabels::all(Label l) {
  FieldLabels out;
  out.labels.fill(l);
  return out;
}

Verdict verdict_for_accepted(const FieldLabels& labels) {
  bool all_correct = std::all_of(labels.labels.begin(), labels.labels.end(),
                                 [](Label l) { return l != Label::Hallucinated; });
  return all_correct ? Verdict::Supported : Verdict::Partial;
}

std::string make_reference_id(int topic_id, CitationStyle style, int n_requested, int position) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "t%02d-s%s-n%02d-p%02d", topic_id,
                text::ascii_lower(style_name(style)).c_str(), n_requested, position);
  return buf;
}

double BatchParse::validity() const {
  if (element_count == 0) return 0.0;
  return static_cast<double>(element_count - invalid_elements) /
         static_cast<double>(element_count);
}

namespace {

const std::set<std::string> kSchemaKeys = {"title", "authors", "venue", "year", "doi"};

std::string strip_code_fence(std::string_view raw) {
  std::string s = text::trim(raw);
  if (s.rfind("```", 0) != 0) return s;
  auto nl = s.find('\n');
  if (nl == std::string::npos) return s;
  s.erase(0, nl + 1);
  auto close = s.rfind("```");
  if (close != std::string::npos) s.erase(close);
  return text::trim(s);
}

// Returns true when the element is schema-valid; appends violations otherwise.
bool check_element(const json& el, const std::string& path, int position, int n_requested,
                   std::vector<SchemaViolation>& out) {
  const std::size_t before = out.size();
  auto fail = [&](const std::string& sub, const std::string& reason) {
    out.push_back({path + sub, reason});
  };
  if (!el.is_object()) {
    fail("", "expected an object");
    return false;
  }
  for (const auto& key : kSchemaKeys)
    if (!el.contains(key)) fail("." + key, "missing key");
  for (const auto& [key, _] : el.items())
    if (!kSchemaKeys.count(key)) fail("." + key, "unexpected key");

  if (el.contains("title") && !el["title"].is_string()) fail(".title", "expected string");
  if (el.contains("venue") && !el["venue"].is_string()) fail(".venue", "expected string");
  if (el.contains("authors")) {
    const auto& a = el["authors"];
    if (!a.is_array()) {
      fail(".authors", "expected array of strings");
    } else if (a.empty()) {
      fail(".authors", "empty author list");
    } else {
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_string()) fail(".authors[" + std::to_string(i) + "]", "expected string");
    }
  }
  if (el.contains("year")) {
    const auto& y = el["year"];
    if (!y.is_number_integer()) {
      fail(".year", "expected integer");
    } else {
      auto v = y.get<long long>();
      if (v < kMinYear || v > kMaxYear) fail(".year", "out of range [1900, 2100]");
    }
  }
  if (el.contains("doi") && !(el["doi"].is_null() || el["doi"].is_string()))
    fail(".doi", "expected string or null");
  if (position > n_requested) fail("", "more references than requested");
  return out.size() == before;
}

}  // namespace

BatchParse parse_reference_batch(std::string_view raw_reply, int topic_id, CitationStyle style,
                                 int n_requested) {
  json doc;
  try {
    doc = json::parse(strip_code_fence(raw_reply));
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedJson, e.what());
  }
  BatchParse out;
  if (!doc.is_array()) {
    out.violations.push_back({"$", "expected a JSON array"});
    return out;
  }
  out.element_count = doc.size();
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const int position = static_cast<int>(i) + 1;
    const std::string path = "$[" + std::to_string(i) + "]";
    if (!check_element(doc[i], path, position, n_requested, out.violations)) {
      ++out.invalid_elements;
      continue;
    }
    const auto& el = doc[i];
    Reference r;
    r.topic_id = topic_id;
    r.style = style;
    r.n_requested = n_requested;
    r.position_in_prompt = position;
    r.id = make_reference_id(topic_id, style, n_requested, position);
    r.title = el["title"].get<std::string>();
    r.authors = el["authors"].get<std::vector<std::string>>();
    r.venue = el["venue"].get<std::string>();
    r.year = el["year"].get<int>();
    if (el["doi"].is_string() && !text::trim(el["doi"].get<std::string>()).empty())
      r.doi = el["doi"].get<std::string>();
    out.references.push_back(std::move(r));
  }
  return out;
}

std::string to_schema_json(const std::vector<Reference>& refs) {
  json arr = json::array();
  for (const auto& r : refs) {
    arr.push_back({{"title", r.title},
                   {"authors", r.authors},
                   {"venue", r.venue},
                   {"year", r.year},
                   {"doi", r.doi ? json(*r.doi) : json(nullptr)}});
  }
  return arr.dump();
}

void to_json(json& j, const Reference& r) {
  j = json{{"id", r.id},
           {"topic_id", r.topic_id},
           {"style", style_name(r.style)},
           {"position_in_prompt", r.position_in_prompt},
           {"n_requested", r.n_requested},
           {"title", r.title},
           {"authors", r.authors},
           {"venue", r.venue},
           {"year", r.year},
           {"doi", r.doi ? json(*r.doi) : json(nullptr)}};
}

void from_json(const json& j, Reference& r) {
  r.id = j.at("id").get<std::string>();
  r.topic_id = j.at("topic_id").get<int>();
  r.style = parse_style(j.at("style").get<std::string>());
  r.position_in_prompt = j.at("position_in_prompt").get<int>();
  r.n_requested = j.at("n_requested").get<int>();
  r.title = j.at("title").get<std::string>();
  r.authors = j.at("authors").get<std::vector<std::string>>();
  r.venue = j.at("venue").get<std::string>();
  r.year = j.at("year").get<int>();
  if (j.contains("doi") && j["doi"].is_string())
    r.doi = j["doi"].get<std::string>();
  else
    r.doi.reset();
}

void to_json(json& j, const FieldLabels& l) {
  j = json::object();
  for (auto f : kAllFields) j[std::string(field_name(f))] = label_name(l[f]);
}

void from_json(const json& j, FieldLabels& l) {
  for (auto f : kAllFields) l[f] = parse_label(j.at(std::string(field_name(f))).get<std::string>());
}

}  // namespace fieldtrace
