#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fieldtrace {

/// Strip resolver prefixes (https://doi.org/, http://dx.doi.org/, doi:),
/// trim, lowercase, and check the `10.<digits>/<suffix>` shape.
/// Throws Error(InvalidDoi).
std::string normalize_doi(std::string_view raw);

std::optional<std::string> try_normalize_doi(std::string_view raw);

}  // namespace fieldtrace
