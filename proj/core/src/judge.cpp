#include "fieldtrace/judge.hpp"

#include "fieldtrace/error.hpp"
#include "fieldtrace/http_transport.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

using nlohmann::json;

json PassThroughJudge::exchange(const json& request) {
  return json{{"verdict", request.at("stage1_verdict")}, {"evidence_note", ""}};
}

HttpJudge::HttpJudge(std::string url, std::chrono::seconds timeout,
                     std::map<std::string, std::string> headers)
    : url_(std::move(url)), timeout_(timeout), headers_(std::move(headers)) {}

json HttpJudge::exchange(const json& request) {
  HttpResponse res;
  try {
    res = post_json(url_, request.dump(), timeout_, headers_);
  } catch (const Error& e) {
    throw Error(Errc::JudgeUnavailable, e.what());
  }
  if (res.status != 200)
    throw Error(Errc::JudgeUnavailable, url_ + ": HTTP " + std::to_string(res.status));
  try {
    return json::parse(res.body);
  } catch (const json::exception& e) {
    throw Error(Errc::JudgeUnavailable, std::string("unparseable judge reply: ") + e.what());
  }
}

json make_judge_request(const Reference& ref, const VerificationResult& stage1) {
  return json{{"reference", ref},
              {"stage1_verdict", verdict_name(stage1.verdict)},
              {"evidence", stage1}};
}

JudgeDecision apply_judge(const Reference& ref, const VerificationResult& stage1, Judge& judge) {
  if (stage1.verdict == Verdict::Supported)
    throw Error(Errc::InvalidArgument, "judge is only consulted for Partial/Unsupported");

  JudgeDecision d;
  d.final_verdict = stage1.verdict;
  d.final_labels = stage1.labels;

  json reply;
  try {
    reply = judge.exchange(make_judge_request(ref, stage1));
  } catch (const Error& e) {
    if (e.code() != Errc::JudgeUnavailable && e.code() != Errc::Transport) throw;
    d.evidence_note = e.what();
    return d;
  }
  d.adjudicated = true;

  Verdict verdict;
  try {
    verdict = parse_verdict(reply.at("verdict").get<std::string>());
  } catch (const std::exception& e) {
    throw Error(Errc::MalformedResponse, std::string("judge reply: ") + e.what());
  }
  d.evidence_note = reply.value("evidence_note", std::string{});
  if (verdict == stage1.verdict || text::trim(d.evidence_note).empty()) return d;

  d.overridden = true;
  d.final_verdict = verdict;
  if (reply.contains("labels") && reply["labels"].is_object()) {
    d.final_labels = reply["labels"].get<FieldLabels>();
  } else if (verdict == Verdict::Supported) {
    for (auto f : kAllFields)
      if (d.final_labels[f] != Label::Unverifiable) d.final_labels[f] = Label::Correct;
  } else if (verdict == Verdict::Unsupported) {
    d.final_labels = FieldLabels::all(Label::Hallucinated);
  }
  return d;
}

}  // namespace fieldtrace
