#include "fieldtrace/venue.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <utility>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {
namespace {

constexpr std::array<std::string_view, 11> kFiller = {
    "proceedings", "proc", "of", "the", "in", "on", "and", "for", "annual", "th", "vol"};

constexpr std::pair<std::string_view, std::string_view> kBuiltinAliases[] = {
    {"NeurIPS", "Advances in Neural Information Processing Systems"},
    {"NeurIPS", "Neural Information Processing Systems"},
    {"NIPS", "Advances in Neural Information Processing Systems"},
    {"ICML", "International Conference on Machine Learning"},
    {"ICLR", "International Conference on Learning Representations"},
    {"AAAI", "AAAI Conference on Artificial Intelligence"},
    {"IJCAI", "International Joint Conference on Artificial Intelligence"},
    {"AISTATS", "International Conference on Artificial Intelligence and Statistics"},
    {"UAI", "Conference on Uncertainty in Artificial Intelligence"},
    {"COLT", "Conference on Learning Theory"},
    {"JMLR", "Journal of Machine Learning Research"},
    {"TMLR", "Transactions on Machine Learning Research"},
    {"CVPR", "IEEE/CVF Conference on Computer Vision and Pattern Recognition"},
    {"CVPR", "Computer Vision and Pattern Recognition"},
    {"ICCV", "IEEE/CVF International Conference on Computer Vision"},
    {"ECCV", "European Conference on Computer Vision"},
    {"TPAMI", "IEEE Transactions on Pattern Analysis and Machine Intelligence"},
    {"MICCAI", "Medical Image Computing and Computer Assisted Intervention"},
    {"ACL", "Annual Meeting of the Association for Computational Linguistics"},
    {"EMNLP", "Conference on Empirical Methods in Natural Language Processing"},
    {"EMNLP", "Empirical Methods in Natural Language Processing"},
    {"NAACL", "North American Chapter of the Association for Computational Linguistics"},
    {"COLING", "International Conference on Computational Linguistics"},
    {"TACL", "Transactions of the Association for Computational Linguistics"},
    {"KDD", "ACM SIGKDD International Conference on Knowledge Discovery and Data Mining"},
    {"KDD", "Knowledge Discovery and Data Mining"},
    {"WWW", "The Web Conference"},
    {"WWW", "International World Wide Web Conference"},
    {"SIGIR", "International ACM SIGIR Conference on Research and Development in Information Retrieval"},
    {"SIGMOD", "International Conference on Management of Data"},
    {"VLDB", "Proceedings of the VLDB Endowment"},
    {"VLDB", "Very Large Data Bases"},
    {"ICDE", "International Conference on Data Engineering"},
    {"OSDI", "USENIX Symposium on Operating Systems Design and Implementation"},
    {"SOSP", "ACM Symposium on Operating Systems Principles"},
    {"NSDI", "USENIX Symposium on Networked Systems Design and Implementation"},
    {"EuroSys", "European Conference on Computer Systems"},
    {"ATC", "USENIX Annual Technical Conference"},
    {"FAST", "USENIX Conference on File and Storage Technologies"},
    {"SIGCOMM", "ACM Special Interest Group on Data Communication"},
    {"ASPLOS", "International Conference on Architectural Support for Programming Languages and Operating Systems"},
    {"ISCA", "International Symposium on Computer Architecture"},
    {"MICRO", "IEEE/ACM International Symposium on Microarchitecture"},
    {"PLDI", "ACM SIGPLAN Conference on Programming Language Design and Implementation"},
    {"POPL", "ACM SIGPLAN Symposium on Principles of Programming Languages"},
    {"OOPSLA", "Object-Oriented Programming, Systems, Languages, and Applications"},
    {"CCS", "ACM Conference on Computer and Communications Security"},
    {"CCS", "ACM SIGSAC Conference on Computer and Communications Security"},
    {"USENIX Security", "USENIX Security Symposium"},
    {"IEEE S&P", "IEEE Symposium on Security and Privacy"},
    {"NDSS", "Network and Distributed System Security Symposium"},
    {"CHI", "CHI Conference on Human Factors in Computing Systems"},
    {"CHI", "Conference on Human Factors in Computing Systems"},
    {"UIST", "ACM Symposium on User Interface Software and Technology"},
    {"STOC", "ACM Symposium on Theory of Computing"},
    {"FOCS", "IEEE Symposium on Foundations of Computer Science"},
    {"SODA", "ACM-SIAM Symposium on Discrete Algorithms"},
    {"arXiv", "arXiv (Cornell University)"},
    {"arXiv", "arXiv preprint"},
    {"CACM", "Communications of the ACM"},
};

bool numeric_token(std::string_view tok) {
  std::size_t digits = 0;
  while (digits < tok.size() && std::isdigit(static_cast<unsigned char>(tok[digits]))) ++digits;
  if (digits == 0) return false;
  auto rest = tok.substr(digits);
  return rest.empty() || rest == "st" || rest == "nd" || rest == "rd" || rest == "th";
}

std::set<std::string> token_set(const std::string& normalized) {
  auto toks = text::split_whitespace(normalized);
  return {toks.begin(), toks.end()};
}

}  // namespace

std::string normalize_venue(std::string_view venue) {
  std::string spaced;
  spaced.reserve(venue.size());
  for (char ch : venue) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && (std::ispunct(c) || std::isspace(c)))
      spaced.push_back(' ');
    else
      spaced.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  std::string out;
  for (const auto& tok : text::split_whitespace(spaced)) {
    if (numeric_token(tok)) continue;
    bool filler = false;
    for (auto f : kFiller) filler = filler || tok == f;
    if (filler) continue;
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

VenueAliases VenueAliases::builtin() {
  VenueAliases v;
  for (const auto& [abbr, full] : kBuiltinAliases) v.add(abbr, full);
  return v;
}

void VenueAliases::add(std::string_view abbreviation, std::string_view full_name) {
  auto key = normalize_venue(abbreviation);
  if (key.empty()) throw Error(Errc::InvalidArgument, "empty venue abbreviation");
  const std::string canon = to_canonical_.try_emplace(key, key).first->second;
  auto full = normalize_venue(full_name);
  if (full.empty()) return;
  // A full name shared by several abbreviations merges their groups.
  if (auto it = to_canonical_.find(full); it != to_canonical_.end() && it->second != canon) {
    const std::string old = it->second;
    for (auto& [name, c] : to_canonical_)
      if (c == old) c = canon;
  }
  to_canonical_[full] = canon;
}

void VenueAliases::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open venue alias table " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto tab = t.find('\t');
    if (tab == std::string::npos)
      throw Error(Errc::InvalidArgument, "alias line without tab: " + t);
    add(t.substr(0, tab), t.substr(tab + 1));
  }
}

std::string VenueAliases::canonical(std::string_view venue) const {
  auto norm = normalize_venue(venue);
  if (auto it = to_canonical_.find(norm); it != to_canonical_.end()) return it->second;
  return norm;
}

bool VenueAliases::equivalent(std::string_view a, std::string_view b,
                              double jaccard_threshold) const {
  auto ca = canonical(a);
  auto cb = canonical(b);
  if (!ca.empty() && ca == cb) return true;
  return text::jaccard(token_set(normalize_venue(a)), token_set(normalize_venue(b))) >=
         jaccard_threshold;
}

}  // namespace fieldtrace
