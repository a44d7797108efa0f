#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace fieldtrace {

/// Casefold, punctuation to spaces, drop numeric/ordinal tokens and
/// filler words ("proceedings", "of", "the", ...).
std::string normalize_venue(std::string_view venue);

/// Abbreviation <-> full-name table for CS venues. Both sides are stored
/// normalized and map to the normalized abbreviation.
class VenueAliases {
 public:
  VenueAliases() = default;

  /// The bundled table (same content as data/venue_aliases.tsv).
  static VenueAliases builtin();

  void add(std::string_view abbreviation, std::string_view full_name);
  /// Tab-separated `abbreviation<TAB>full name` lines; '#' comments allowed.
  void load_tsv(const std::filesystem::path& path);

  std::string canonical(std::string_view venue) const;
  /// Alias-normalized equality, else token Jaccard >= threshold.
  bool equivalent(std::string_view a, std::string_view b, double jaccard_threshold = 0.8) const;

  std::size_t size() const { return to_canonical_.size(); }

 private:
  std::map<std::string, std::string> to_canonical_;
};

}  // namespace fieldtrace
