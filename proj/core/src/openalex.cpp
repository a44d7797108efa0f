#include "fieldtrace/openalex.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "fieldtrace/doi.hpp"
#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

using nlohmann::json;

namespace {

const json* child(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::optional<std::string> string_at(const json& j, const char* key) {
  const json* c = child(j, key);
  if (c && c->is_string()) return c->get<std::string>();
  return std::nullopt;
}

}  // namespace

WorkRecord parse_work(const json& work) {
  if (!work.is_object()) throw Error(Errc::MalformedResponse, "work is not an object");
  WorkRecord w;
  auto id = string_at(work, "id");
  if (!id) throw Error(Errc::MalformedResponse, "work without id");
  w.openalex_id = *id;
  if (auto title = string_at(work, "title")) {
    w.title = *title;
  } else if (auto dn = string_at(work, "display_name")) {
    w.title = *dn;
  }
  if (auto doi = string_at(work, "doi")) w.doi = try_normalize_doi(*doi);
  if (const json* auths = child(work, "authorships")) {
    if (!auths->is_array()) throw Error(Errc::MalformedResponse, "authorships is not an array");
    for (const auto& a : *auths) {
      const json* author = child(a, "author");
      std::optional<std::string> name = author ? string_at(*author, "display_name") : std::nullopt;
      if (!name) name = string_at(a, "raw_author_name");
      if (name) w.author_family_names.push_back(text::family_name(*name));
    }
  }
  if (const json* loc = child(work, "primary_location")) {
    if (const json* src = child(*loc, "source")) w.venue = string_at(*src, "display_name");
  }
  if (!w.venue) {
    if (const json* hv = child(work, "host_venue")) w.venue = string_at(*hv, "display_name");
  }
  if (const json* y = child(work, "publication_year")) {
    if (!y->is_number_integer()) throw Error(Errc::MalformedResponse, "publication_year not integer");
    w.year = y->get<int>();
  }
  return w;
}

void to_json(json& j, const WorkRecord& w) {
  j = json{{"openalex_id", w.openalex_id},
           {"doi", w.doi ? json(*w.doi) : json(nullptr)},
           {"title", w.title},
           {"author_family_names", w.author_family_names},
           {"venue", w.venue ? json(*w.venue) : json(nullptr)},
           {"year", w.year ? json(*w.year) : json(nullptr)}};
}

// --- FixtureTransport -------------------------------------------------------

void FixtureTransport::add(const std::string& url, HttpResponse response) {
  std::lock_guard lock(mu_);
  scripted_[url].push_back(std::move(response));
}

void FixtureTransport::set_default(HttpResponse response) {
  std::lock_guard lock(mu_);
  default_ = std::move(response);
}

HttpResponse FixtureTransport::get(const std::string& url) {
  std::lock_guard lock(mu_);
  log_.push_back(url);
  auto it = scripted_.find(url);
  if (it == scripted_.end() || it->second.empty()) {
    if (default_) return *default_;
    throw Error(Errc::Transport, "no fixture for " + url);
  }
  HttpResponse r = it->second.front();
  if (it->second.size() > 1) it->second.pop_front();
  return r;
}

std::vector<std::string> FixtureTransport::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

// --- ResponseCache ----------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& url) const {
  return dir_ / (sha256_hex(url) + ".json");
}

std::optional<HttpResponse> ResponseCache::get(const std::string& url) const {
  auto path = path_for(url);
  std::lock_guard lock(stripes_[fnv1a64(url) % stripes_.size()]);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    json j = json::parse(in);
    if (j.at("url").get<std::string>() != url) return std::nullopt;
    return HttpResponse{j.at("status").get<int>(), j.at("body").get<std::string>()};
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& url, const HttpResponse& response) {
  auto path = path_for(url);
  std::lock_guard lock(stripes_[fnv1a64(url) % stripes_.size()]);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write cache entry " + tmp.string());
    out << json{{"url", url}, {"status", response.status}, {"body", response.body}}.dump();
  }
  std::filesystem::rename(tmp, path);
}

// --- RateLimiter ------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_second) {
  if (requests_per_second > 0)
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / requests_per_second));
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

// --- OpenAlexClient ---------------------------------------------------------

std::string url_encode(std::string_view s, std::string_view keep) {
  std::string out;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~' ||
        keep.find(ch) != std::string_view::npos) {
      out.push_back(ch);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

OpenAlexClient::OpenAlexClient(ClientConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      limiter_(config_.max_requests_per_second) {
  if (!transport_) throw Error(Errc::InvalidArgument, "null transport");
  while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
  if (config_.cache_dir) cache_.emplace(*config_.cache_dir);
}

std::string OpenAlexClient::doi_url(const std::string& normalized_doi) const {
  std::string url = config_.base_url + "/works/doi:" + url_encode(normalized_doi, "/");
  if (config_.mailto) url += "?mailto=" + url_encode(*config_.mailto, "@");
  return url;
}

std::string OpenAlexClient::search_url(const std::string& title, int limit) const {
  std::string url = config_.base_url + "/works?search=" + url_encode(title) +
                    "&per-page=" + std::to_string(limit);
  if (config_.mailto) url += "&mailto=" + url_encode(*config_.mailto, "@");
  return url;
}

HttpResponse OpenAlexClient::fetch(const std::string& url) {
  if (cache_) {
    if (auto hit = cache_->get(url)) {
      ++cache_hits_;
      return *hit;
    }
  }
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    ++requests_;
    HttpResponse res = transport_->get(url);
    const bool retryable = res.status == 429 || res.status >= 500;
    if (retryable) {
      if (attempt >= config_.max_retries) {
        if (res.status == 429)
          throw Error(Errc::RateLimited, url + ": still 429 after " +
                                             std::to_string(attempt) + " retries");
        throw Error(Errc::Transport, url + ": HTTP " + std::to_string(res.status));
      }
      ++retries_;
      std::this_thread::sleep_for(config_.backoff_base * (1LL << std::min(attempt, 10)));
      continue;
    }
    if (res.status != 200 && res.status != 404)
      throw Error(Errc::Transport, url + ": unexpected HTTP " + std::to_string(res.status));
    if (cache_) cache_->put(url, res);
    return res;
  }
}

std::optional<WorkRecord> OpenAlexClient::lookup_by_doi(const std::string& normalized_doi) {
  auto res = fetch(doi_url(normalized_doi));
  if (res.status == 404) return std::nullopt;
  try {
    return parse_work(json::parse(res.body));
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedResponse, e.what());
  }
}

std::vector<WorkRecord> OpenAlexClient::search_by_title(const std::string& title, int limit) {
  if (text::trim(title).empty()) throw Error(Errc::InvalidArgument, "empty title search");
  if (limit <= 0) throw Error(Errc::InvalidArgument, "search limit must be positive");
  auto res = fetch(search_url(title, limit));
  if (res.status == 404) return {};
  std::vector<WorkRecord> out;
  try {
    json body = json::parse(res.body);
    const json* results = child(body, "results");
    if (!results || !results->is_array())
      throw Error(Errc::MalformedResponse, "search response without results array");
    for (const auto& w : *results) {
      if (static_cast<int>(out.size()) >= limit) break;
      out.push_back(parse_work(w));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedResponse, e.what());
  }
  return out;
}

OpenAlexClient::Counters OpenAlexClient::counters() const {
  return {requests_.load(), retries_.load(), cache_hits_.load()};
}

}  // namespace fieldtrace
