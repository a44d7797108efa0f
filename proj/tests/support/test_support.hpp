#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fieldtrace/refmodel.hpp"

namespace fieldtrace::testing {

inline std::filesystem::path fixture_path(const std::string& rel) {
  return std::filesystem::path(FIELDTRACE_FIXTURE_DIR) / rel;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fieldtrace-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Word pool mixing ASCII, Latin-1, CJK, and 4-byte code points.
inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> words = {
      "sparse",  "probing", "Neural",  "café",    "naïve",  "Übersicht", "模型",    "注意力",
      "graph",   "<tag>",   "a&b",     "😀emoji", "x|y",    "long-range", "ÆØÅ",     "Σ-delta",
      "data",    "retrieval", "über", "Łódź",    "テスト", "\"quoted\"", "tab\tin", "end."};
  return words;
}

inline std::string random_phrase(std::mt19937_64& rng, int min_words, int max_words) {
  const auto& pool = word_pool();
  std::uniform_int_distribution<int> count(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += pool[pick(rng)];
  }
  return out;
}

inline Reference random_reference(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> topic(0, 49), style(0, 7), year(1900, 2100), n_authors(1, 6),
      coin(0, 3);
  Reference r;
  r.topic_id = topic(rng);
  r.style = kAllStyles[static_cast<std::size_t>(style(rng))];
  r.n_requested = 15;
  r.position_in_prompt = 1 + topic(rng) % 15;
  r.id = make_reference_id(r.topic_id, r.style, r.n_requested, r.position_in_prompt);
  r.title = random_phrase(rng, 1, 12);
  const int na = n_authors(rng);
  for (int i = 0; i < na; ++i) r.authors.push_back(random_phrase(rng, 1, 3));
  r.venue = random_phrase(rng, 1, 6);
  r.year = year(rng);
  if (coin(rng) != 0) r.doi = "10." + std::to_string(1000 + topic(rng)) + "/" + random_phrase(rng, 1, 2);
  return r;
}

}  // namespace fieldtrace::testing
