#include "fieldtrace/doi.hpp"

#include <array>
#include <cctype>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {
namespace {

constexpr std::array<std::string_view, 7> kPrefixes = {
    "https://doi.org/",    "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/",
    "https://www.doi.org/", "doi.org/",        "doi:"};

bool well_formed(std::string_view d) {
  if (d.size() < 6 || d.substr(0, 3) != "10.") return false;
  std::size_t i = 3;
  std::size_t digits = 0;
  while (i < d.size() && std::isdigit(static_cast<unsigned char>(d[i]))) {
    ++i;
    ++digits;
  }
  // Registrant codes may carry sub-divisions: 10.1000.10/xyz
  while (digits > 0 && i < d.size() && d[i] == '.') {
    ++i;
    std::size_t sub = 0;
    while (i < d.size() && std::isdigit(static_cast<unsigned char>(d[i]))) {
      ++i;
      ++sub;
    }
    if (sub == 0) return false;
  }
  if (digits == 0 || i >= d.size() || d[i] != '/') return false;
  auto suffix = d.substr(i + 1);
  if (suffix.empty()) return false;
  for (char c : suffix)
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::optional<std::string> try_normalize_doi(std::string_view raw) {
  std::string s = text::ascii_lower(text::trim(raw));
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (auto p : kPrefixes) {
      if (s.rfind(p, 0) == 0) {
        s = text::trim(std::string_view(s).substr(p.size()));
        stripped = true;
      }
    }
  }
  if (!well_formed(s)) return std::nullopt;
  return s;
}

std::string normalize_doi(std::string_view raw) {
  auto d = try_normalize_doi(raw);
  if (!d) throw Error(Errc::InvalidDoi, "'" + std::string(raw) + "' is not a DOI");
  return *d;
}

}  // namespace fieldtrace
