#include "fieldtrace/verify.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "fieldtrace/doi.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

using nlohmann::json;

double composite_score(double title_sim, double author_overlap, double year_prox) {
  return kTitleWeight * title_sim + kAuthorWeight * author_overlap + kYearWeight * year_prox;
}

namespace {

std::vector<std::string> family_names(const std::vector<std::string>& people) {
  std::vector<std::string> out;
  out.reserve(people.size());
  for (const auto& p : people) out.push_back(text::family_name(p));
  return out;
}

}  // namespace

MatchScore score_candidate(const Reference& ref, const WorkRecord& cand) {
  MatchScore s;
  s.title_sim = text::normalized_similarity(text::normalize_title(ref.title),
                                            text::normalize_title(cand.title));

  auto ref_fams = family_names(ref.authors);
  if (!ref_fams.empty() && !cand.author_family_names.empty() &&
      ref_fams.front() == cand.author_family_names.front()) {
    s.author_overlap = 1.0;
  } else {
    std::set<std::string> a(ref_fams.begin(), ref_fams.end());
    std::set<std::string> b(cand.author_family_names.begin(), cand.author_family_names.end());
    s.author_overlap = text::jaccard(a, b);
  }

  if (cand.year)
    s.year_prox = std::max(0.0, 1.0 - std::abs(ref.year - *cand.year) / 3.0);

  s.composite = composite_score(s.title_sim, s.author_overlap, s.year_prox);
  return s;
}

std::string_view route_name(MatchRoute r) noexcept {
  switch (r) {
    case MatchRoute::Doi: return "doi";
    case MatchRoute::TitleSearch: return "title";
    case MatchRoute::None: return "none";
  }
  return "?";
}

FieldLabels label_fields(const Reference& ref, const WorkRecord& work, const MatchScore& score,
                         const VerifyOptions& options) {
  FieldLabels l;
  l[FieldKind::Title] =
      score.title_sim >= options.title_correct_threshold ? Label::Correct : Label::Hallucinated;

  if (work.author_family_names.empty()) {
    l[FieldKind::Authors] = Label::Unverifiable;
  } else {
    l[FieldKind::Authors] = family_names(ref.authors) == work.author_family_names
                                ? Label::Correct
                                : Label::Hallucinated;
  }

  if (!work.year)
    l[FieldKind::Year] = Label::Unverifiable;
  else
    l[FieldKind::Year] = ref.year == *work.year ? Label::Correct : Label::Hallucinated;

  if (!work.venue || text::trim(*work.venue).empty()) {
    l[FieldKind::Venue] = Label::Unverifiable;
  } else {
    l[FieldKind::Venue] =
        options.venues.equivalent(ref.venue, *work.venue, options.venue_jaccard_threshold)
            ? Label::Correct
            : Label::Hallucinated;
  }

  if (!work.doi) {
    l[FieldKind::Doi] = Label::Unverifiable;
  } else {
    auto ref_doi = ref.doi ? try_normalize_doi(*ref.doi) : std::nullopt;
    l[FieldKind::Doi] = ref_doi && *ref_doi == *work.doi ? Label::Correct : Label::Hallucinated;
  }
  return l;
}

VerificationResult verify_reference(const Reference& ref, WorkLookup& api,
                                    const VerifyOptions& options) {
  VerificationResult out;
  std::optional<WorkRecord> best_work;
  MatchScore best_score;
  MatchRoute best_route = MatchRoute::None;

  auto consider = [&](const WorkRecord& w, MatchRoute route) {
    ++out.candidates_considered;
    MatchScore s = score_candidate(ref, w);
    if (!best_work || s.composite > best_score.composite) {
      best_work = w;
      best_score = s;
      best_route = route;
    }
  };

  std::optional<std::string> doi = ref.doi ? try_normalize_doi(*ref.doi) : std::nullopt;
  if (doi) {
    if (auto hit = api.lookup_by_doi(*doi)) consider(*hit, MatchRoute::Doi);
  }
  const bool doi_accepted = best_work && best_score.composite >= options.accept_threshold;
  if (!doi_accepted && !text::trim(ref.title).empty()) {
    for (const auto& w : api.search_by_title(ref.title, options.search_limit))
      consider(w, MatchRoute::TitleSearch);
  }

  if (best_work) out.best = best_score;
  if (best_work && best_score.composite >= options.accept_threshold) {
    out.labels = label_fields(ref, *best_work, best_score, options);
    out.verdict = verdict_for_accepted(out.labels);
    out.matched = std::move(best_work);
    out.route = best_route;
  } else {
    out.labels = FieldLabels::all(Label::Hallucinated);
    out.verdict = Verdict::Unsupported;
    out.route = MatchRoute::None;
  }
  return out;
}

void to_json(json& j, const MatchScore& s) {
  j = json{{"title_sim", s.title_sim},
           {"author_overlap", s.author_overlap},
           {"year_prox", s.year_prox},
           {"composite", s.composite}};
}

void to_json(json& j, const VerificationResult& v) {
  j = json{{"labels", v.labels},
           {"verdict", verdict_name(v.verdict)},
           {"route", route_name(v.route)},
           {"candidates_considered", v.candidates_considered},
           {"best", v.best ? json(*v.best) : json(nullptr)},
           {"matched", v.matched ? json(*v.matched) : json(nullptr)}};
}

}  // namespace fieldtrace
