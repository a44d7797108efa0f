#pragma once

#include <chrono>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "fieldtrace/refmodel.hpp"
#include "fieldtrace/verify.hpp"

namespace fieldtrace {

/// Second-stage adjudicator. One JSON request, one JSON response:
///   request  {"reference": {...}, "stage1_verdict": "Partial", "evidence": {...}}
///   response {"verdict": "Supported", "evidence_note": "...", "labels"?: {...}}
/// Implementations throw Error(JudgeUnavailable) on timeout or outage.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual nlohmann::json exchange(const nlohmann::json& request) = 0;
};

/// Default judge: always concurs with stage 1.
class PassThroughJudge : public Judge {
 public:
  nlohmann::json exchange(const nlohmann::json& request) override;
};

/// Forwards the exchange to an HTTP endpoint as a JSON POST.
class HttpJudge : public Judge {
 public:
  HttpJudge(std::string url, std::chrono::seconds timeout,
            std::map<std::string, std::string> headers = {});
  nlohmann::json exchange(const nlohmann::json& request) override;

 private:
  std::string url_;
  std::chrono::seconds timeout_;
  std::map<std::string, std::string> headers_;
};

struct JudgeDecision {
  Verdict final_verdict = Verdict::Unsupported;
  FieldLabels final_labels;
  bool overridden = false;
  bool adjudicated = false;  // false when the judge was unavailable
  std::string evidence_note;
};

nlohmann::json make_judge_request(const Reference& ref, const VerificationResult& stage1);

/// Only valid for Partial or Unsupported stage-1 verdicts. A judge verdict
/// that differs from stage 1 and carries a non-empty evidence note replaces
/// it; labels come from the response when present, otherwise they are
/// derived from the new verdict (Supported: assessable fields Correct;
/// Unsupported: all Hallucinated; Partial: stage-1 labels kept).
JudgeDecision apply_judge(const Reference& ref, const VerificationResult& stage1, Judge& judge);

}  // namespace fieldtrace
