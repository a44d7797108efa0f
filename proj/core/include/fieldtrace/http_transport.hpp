#pragma once

#include <chrono>
#include <map>
#include <string>

#include "fieldtrace/openalex.hpp"

namespace fieldtrace {

struct UrlParts {
  std::string scheme_host_port;  // "https://api.openalex.org"
  std::string path_and_query;    // "/works?search=..."
};

/// Split an absolute http(s) URL. Throws Error(InvalidArgument).
UrlParts split_url(const std::string& url);

/// Live transport backed by cpp-httplib (HTTPS via OpenSSL).
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(30));
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::seconds timeout_;
};

/// POST a JSON body; returns status and body. Throws Error(Transport) on
/// connection failure or timeout.
HttpResponse post_json(const std::string& url, const std::string& body,
                       std::chrono::seconds timeout,
                       const std::map<std::string, std::string>& headers = {});

}  // namespace fieldtrace
