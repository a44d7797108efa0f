#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fieldtrace {

enum class Errc {
  InvalidArgument,
  MalformedJson,
  SchemaViolation,
  InvalidDoi,
  Transport,
  RateLimited,
  MalformedResponse,
  JudgeUnavailable,
  UncoveredSpan,
  EmptySpan,
  BadMagic,
  VersionMismatch,
  TruncatedRecord,
  MalformedRecord,
  Io,
  TooFewTopics,
  SingleClass,
  NonFinite,
  MissingField,
  Divergence,
  DegenerateGroups,
  ConstantInput,
  DegenerateRho,
  AllZero,
  EmptySelection,
  MissingCondition,
  ConfigContradiction,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for all data and contract errors; `code()` names the
// failure mode so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fieldtrace
