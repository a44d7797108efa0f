#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "fieldtrace/openalex.hpp"
#include "fieldtrace/refmodel.hpp"
#include "fieldtrace/venue.hpp"

namespace fieldtrace {

struct MatchScore {
  double title_sim = 0.0;
  double author_overlap = 0.0;
  double year_prox = 0.0;
  double composite = 0.0;
};

// Candidate-scoring weights. A perfect title alone (0.6) stays below the
// acceptance threshold without author or year support.
inline constexpr double kTitleWeight = 0.6;
inline constexpr double kAuthorWeight = 0.25;
inline constexpr double kYearWeight = 0.15;

double composite_score(double title_sim, double author_overlap, double year_prox);

MatchScore score_candidate(const Reference& ref, const WorkRecord& candidate);

struct VerifyOptions {
  double accept_threshold = 0.75;
  double title_correct_threshold = 0.90;
  double venue_jaccard_threshold = 0.8;
  int search_limit = 10;
  VenueAliases venues = VenueAliases::builtin();
};

enum class MatchRoute { Doi, TitleSearch, None };
std::string_view route_name(MatchRoute r) noexcept;

struct VerificationResult {
  FieldLabels labels;
  Verdict verdict = Verdict::Unsupported;
  std::optional<MatchScore> best;  // best-scoring candidate, accepted or not
  std::optional<WorkRecord> matched;  // set iff accepted
  MatchRoute route = MatchRoute::None;
  std::size_t candidates_considered = 0;
};

/// Per-field labels for an accepted match.
FieldLabels label_fields(const Reference& ref, const WorkRecord& work, const MatchScore& score,
                         const VerifyOptions& options);

/// DOI lookup first (when the reference carries a valid DOI); if that
/// fails or its match scores below the threshold, title search over the
/// top candidates. Accept the argmax composite iff >= accept_threshold.
/// Unsupported references get all five fields Hallucinated.
VerificationResult verify_reference(const Reference& ref, WorkLookup& api,
                                    const VerifyOptions& options = {});

void to_json(nlohmann::json& j, const MatchScore& s);
void to_json(nlohmann::json& j, const VerificationResult& v);

}  // namespace fieldtrace
