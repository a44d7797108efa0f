#include "fieldtrace/http_transport.hpp"

#include <httplib.h>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(Errc::InvalidArgument, "not an absolute URL: " + url);
  const auto scheme = text::ascii_lower(url.substr(0, scheme_end));
  if (scheme != "http" && scheme != "https")
    throw Error(Errc::InvalidArgument, "unsupported URL scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

namespace {

httplib::Headers to_headers(const std::map<std::string, std::string>& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

}  // namespace

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::get(const std::string& url) {
  auto parts = split_url(url);
  httplib::Client cli(parts.scheme_host_port);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_follow_location(true);
  auto res = cli.Get(parts.path_and_query, {{"User-Agent", "fieldtrace/0.3"}});
  if (!res) throw Error(Errc::Transport, url + ": " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

HttpResponse post_json(const std::string& url, const std::string& body,
                       std::chrono::seconds timeout,
                       const std::map<std::string, std::string>& headers) {
  auto parts = split_url(url);
  httplib::Client cli(parts.scheme_host_port);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  auto res = cli.Post(parts.path_and_query, to_headers(headers), body, "application/json");
  if (!res) throw Error(Errc::Transport, url + ": " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace fieldtrace
