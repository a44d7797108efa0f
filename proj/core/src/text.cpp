#include "fieldtrace/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace fieldtrace::text {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xfffd;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = ((c & 0x1f) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3f);
      len = 2;
    } else if ((c >> 4) == 0xe && i + 2 < s.size()) {
      cp = ((c & 0x0f) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3f) << 6) |
           (static_cast<unsigned char>(s[i + 2]) & 0x3f);
      len = 3;
    } else if ((c >> 3) == 0x1e && i + 3 < s.size()) {
      cp = ((c & 0x07) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3f) << 12) |
           ((static_cast<unsigned char>(s[i + 2]) & 0x3f) << 6) |
           (static_cast<unsigned char>(s[i + 3]) & 0x3f);
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xc0) != 0x80; }));
}

std::size_t utf8_byte_offset(std::string_view s, std::size_t cp_index) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xc0) != 0x80) {
      if (seen == cp_index) return i;
      ++seen;
    }
  }
  return s.size();
}

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_title(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::ispunct(c)) continue;
    if (c < 0x80 && std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

double normalized_similarity(std::string_view a, std::string_view b) {
  auto ua = decode_utf8(a);
  auto ub = decode_utf8(b);
  std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

namespace {

constexpr std::array<std::string_view, 14> kParticles = {
    "van", "von", "der", "den", "de", "del", "della", "di", "da", "du", "la", "le", "dos", "bin"};
constexpr std::array<std::string_view, 6> kSuffixes = {"jr", "sr", "ii", "iii", "iv", "phd"};

std::string strip_token(std::string_view tok) {
  std::string out;
  for (char c : tok)
    if (c != '.' && c != ',') out.push_back(c);
  return out;
}

bool is_initials(std::string_view raw) {
  // "A.", "A.B.", "AB" (Vancouver), "J-P."
  if (raw.empty()) return false;
  if (raw.back() == '.' && raw.size() <= 5) return true;
  if (raw.size() <= 3 &&
      std::all_of(raw.begin(), raw.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); }))
    return true;
  return false;
}

bool is_suffix(std::string_view tok) {
  auto low = ascii_lower(strip_token(tok));
  return std::find(kSuffixes.begin(), kSuffixes.end(), low) != kSuffixes.end();
}

bool is_particle(std::string_view tok) {
  return std::find(kParticles.begin(), kParticles.end(), tok) != kParticles.end();
}

}  // namespace

std::string family_name(std::string_view person) {
  std::string p = trim(person);
  if (auto comma = p.find(','); comma != std::string::npos) {
    std::string fam = trim(std::string_view(p).substr(0, comma));
    // "Smith, Jr., John" style leaves the family before the first comma.
    return ascii_lower(fam);
  }
  auto toks = split_whitespace(p);
  while (!toks.empty() && is_suffix(toks.back())) toks.pop_back();
  if (toks.empty()) return {};
  std::vector<std::string> kept;
  for (const auto& t : toks)
    if (!is_initials(t)) kept.push_back(t);
  if (kept.empty()) return ascii_lower(strip_token(toks.back()));
  // Surname is the last non-initial token plus any lowercase particles
  // immediately before it.
  std::size_t start = kept.size() - 1;
  while (start > 0 && is_particle(kept[start - 1])) --start;
  std::string out;
  for (std::size_t i = start; i < kept.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += strip_token(kept[i]);
  }
  return ascii_lower(out);
}

}  // namespace fieldtrace::text
