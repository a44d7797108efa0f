#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fieldtrace {

/// The subset of an OpenAlex work used for matching.
struct WorkRecord {
  std::string openalex_id;
  std::optional<std::string> doi;  // normalized
  std::string title;
  std::vector<std::string> author_family_names;  // casefolded, in authorship order
  std::optional<std::string> venue;
  std::optional<int> year;

  bool operator==(const WorkRecord&) const = default;
};

/// Parse one entry of the API's `results` array (or a single-work body).
/// Throws Error(MalformedResponse).
WorkRecord parse_work(const nlohmann::json& work);

void to_json(nlohmann::json& j, const WorkRecord& w);

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// GET an absolute URL. Throws Error(Transport) on connection failure.
  virtual HttpResponse get(const std::string& url) = 0;
};

/// Scripted responses keyed by full URL. Each URL holds a queue; the last
/// response in a queue repeats. Unknown URLs return the default response
/// when one is set, otherwise throw Error(Transport).
class FixtureTransport : public HttpTransport {
 public:
  void add(const std::string& url, HttpResponse response);
  void set_default(HttpResponse response);
  HttpResponse get(const std::string& url) override;

  std::vector<std::string> requests() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::deque<HttpResponse>> scripted_;
  std::optional<HttpResponse> default_;
  std::vector<std::string> log_;
};

/// On-disk cache of raw response bodies keyed by the full request URL.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<HttpResponse> get(const std::string& url) const;
  void put(const std::string& url, const HttpResponse& response);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& url) const;

  std::filesystem::path dir_;
  mutable std::array<std::mutex, 16> stripes_;
};

/// Serializes callers so consecutive requests are at least 1/rate apart.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
};

struct ClientConfig {
  std::string base_url = "https://api.openalex.org";
  std::optional<std::string> mailto;
  double max_requests_per_second = 10.0;  // <= 0 disables limiting
  int max_retries = 5;
  std::chrono::milliseconds backoff_base{500};
  std::optional<std::filesystem::path> cache_dir;
};

/// Capability consumed by verify_reference.
class WorkLookup {
 public:
  virtual ~WorkLookup() = default;
  virtual std::optional<WorkRecord> lookup_by_doi(const std::string& normalized_doi) = 0;
  virtual std::vector<WorkRecord> search_by_title(const std::string& title, int limit = 10) = 0;
};

/// OpenAlex REST client. Safe for concurrent use: the rate limit is global
/// to the instance and cache writes are serialized per key.
class OpenAlexClient : public WorkLookup {
 public:
  OpenAlexClient(ClientConfig config, std::shared_ptr<HttpTransport> transport);

  std::optional<WorkRecord> lookup_by_doi(const std::string& normalized_doi) override;
  std::vector<WorkRecord> search_by_title(const std::string& title, int limit = 10) override;

  std::string doi_url(const std::string& normalized_doi) const;
  std::string search_url(const std::string& title, int limit) const;

  struct Counters {
    std::size_t requests = 0;
    std::size_t retries = 0;
    std::size_t cache_hits = 0;
  };
  Counters counters() const;

 private:
  HttpResponse fetch(const std::string& url);

  ClientConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::optional<ResponseCache> cache_;
  RateLimiter limiter_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> retries_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

/// Percent-encode everything outside RFC 3986 unreserved characters and
/// the characters in `keep`.
std::string url_encode(std::string_view s, std::string_view keep = "");

}  // namespace fieldtrace
