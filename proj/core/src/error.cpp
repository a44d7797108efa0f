#include "fieldtrace/error.hpp"

namespace fieldtrace {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::InvalidDoi: return "InvalidDoi";
    case Errc::Transport: return "Transport";
    case Errc::RateLimited: return "RateLimited";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::JudgeUnavailable: return "JudgeUnavailable";
    case Errc::UncoveredSpan: return "UncoveredSpan";
    case Errc::EmptySpan: return "EmptySpan";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedRecord: return "TruncatedRecord";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::Io: return "Io";
    case Errc::TooFewTopics: return "TooFewTopics";
    case Errc::SingleClass: return "SingleClass";
    case Errc::NonFinite: return "NonFinite";
    case Errc::MissingField: return "MissingField";
    case Errc::Divergence: return "Divergence";
    case Errc::DegenerateGroups: return "DegenerateGroups";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::DegenerateRho: return "DegenerateRho";
    case Errc::AllZero: return "AllZero";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::MissingCondition: return "MissingCondition";
    case Errc::ConfigContradiction: return "ConfigContradiction";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace fieldtrace
