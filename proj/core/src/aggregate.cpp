#include "fieldtrace/aggregate.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <tuple>

#include "fieldtrace/error.hpp"

namespace fieldtrace {

using nlohmann::json;

void LabelTally::add(Label l) {
  switch (l) {
    case Label::Correct: ++correct; break;
    case Label::Hallucinated: ++hallucinated; break;
    case Label::Unverifiable: ++unverifiable; break;
  }
}

std::optional<double> LabelTally::accuracy() const {
  const std::size_t denom = correct + hallucinated;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(denom);
}

std::optional<double> LabelTally::hallucination_rate() const {
  auto a = accuracy();
  if (!a) return std::nullopt;
  return 1.0 - *a;
}

std::optional<double> VerdictTally::rate() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(supported) / static_cast<double>(total);
}

std::optional<double> AccuracyTable::accuracy(const std::string& model, FieldKind f,
                                              int n) const {
  auto it = fields.find({model, n});
  if (it == fields.end()) return std::nullopt;
  return it->second[field_index(f)].accuracy();
}

std::optional<double> AccuracyTable::total(const std::string& model, int n) const {
  auto it = totals.find({model, n});
  if (it == totals.end()) return std::nullopt;
  return it->second.rate();
}

std::optional<double> AccuracyTable::position_hallucination_rate(int position) const {
  auto it = position_totals.find(position);
  if (it == position_totals.end()) return std::nullopt;
  auto r = it->second.rate();
  if (!r) return std::nullopt;
  return 1.0 - *r;
}

AccuracyTable aggregate_accuracy(const std::vector<CorpusEntry>& corpus) {
  if (corpus.empty()) throw Error(Errc::InvalidArgument, "empty corpus");
  AccuracyTable t;
  for (const auto& e : corpus) {
    AccuracyTable::CellKey key{e.model_tag, e.reference.n_requested};
    auto& cell = t.fields[key];
    auto& pos = t.position_fields[e.reference.position_in_prompt];
    auto& style = t.style_fields[e.reference.style];
    for (auto f : kAllFields) {
      cell[field_index(f)].add(e.labels[f]);
      pos[field_index(f)].add(e.labels[f]);
      style[field_index(f)].add(e.labels[f]);
    }
    const bool supported = e.verdict == Verdict::Supported;
    auto& tot = t.totals[key];
    ++tot.total;
    tot.supported += supported;
    auto& ptot = t.position_totals[e.reference.position_in_prompt];
    ++ptot.total;
    ptot.supported += supported;
  }
  return t;
}

std::map<CitationStyle, std::vector<double>> style_rate_samples(
    const std::vector<CorpusEntry>& corpus, FieldKind field) {
  std::map<std::tuple<CitationStyle, std::string, int, int>, LabelTally> cells;
  for (const auto& e : corpus)
    cells[{e.reference.style, e.model_tag, e.reference.topic_id, e.reference.n_requested}].add(
        e.labels[field]);
  std::map<CitationStyle, std::vector<double>> out;
  for (const auto& [key, tally] : cells)
    if (auto r = tally.hallucination_rate()) out[std::get<0>(key)].push_back(*r);
  return out;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json tallies_json(const FieldTallies& ft) {
  json j = json::object();
  for (auto f : kAllFields) {
    const auto& t = ft[field_index(f)];
    j[std::string(field_name(f))] = json{{"correct", t.correct},
                                         {"hallucinated", t.hallucinated},
                                         {"unverifiable", t.unverifiable},
                                         {"accuracy", opt(t.accuracy())}};
  }
  return j;
}

}  // namespace

void to_json(json& j, const AccuracyTable& t) {
  json cells = json::array();
  for (const auto& [key, ft] : t.fields) {
    cells.push_back({{"model", key.first},
                     {"n", key.second},
                     {"fields", tallies_json(ft)},
                     {"total", opt(t.totals.at(key).rate())}});
  }
  json positions = json::array();
  for (const auto& [pos, ft] : t.position_fields) {
    positions.push_back({{"position", pos},
                         {"n_refs", t.position_totals.at(pos).total},
                         {"hallucination_rate", opt(t.position_hallucination_rate(pos))},
                         {"fields", tallies_json(ft)}});
  }
  json styles = json::object();
  for (const auto& [style, ft] : t.style_fields) styles[std::string(style_name(style))] = tallies_json(ft);
  j = json{{"cells", cells}, {"positions", positions}, {"styles", styles}};
}

std::string accuracy_csv(const AccuracyTable& t) {
  std::ostringstream os;
  os << "model,n,field,correct,hallucinated,unverifiable,accuracy\n";
  for (const auto& [key, ft] : t.fields) {
    for (auto f : kAllFields) {
      const auto& c = ft[field_index(f)];
      os << key.first << ',' << key.second << ',' << field_name(f) << ',' << c.correct << ','
         << c.hallucinated << ',' << c.unverifiable << ',';
      if (auto a = c.accuracy()) os << *a;
      os << '\n';
    }
    os << key.first << ',' << key.second << ",total,,,,";
    if (auto r = t.totals.at(key).rate()) os << *r;
    os << '\n';
  }
  return os.str();
}

std::string position_csv(const AccuracyTable& t) {
  std::ostringstream os;
  os << "position,n_refs,not_supported_rate";
  for (auto f : kAllFields) os << ',' << field_name(f) << "_hallucination_rate";
  os << '\n';
  for (const auto& [pos, ft] : t.position_fields) {
    os << pos << ',' << t.position_totals.at(pos).total << ',';
    if (auto r = t.position_hallucination_rate(pos)) os << *r;
    for (auto f : kAllFields) {
      os << ',';
      if (auto r = ft[field_index(f)].hallucination_rate()) os << *r;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace fieldtrace
