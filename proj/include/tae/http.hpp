#pragma once

#include <chrono>
#include <string>

namespace tae::http {

struct Endpoint {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string path = "/";

  /// Throws ValidationError on anything that is not http(s)://host[:port][/path].
  static Endpoint parse(const std::string& url);
};

struct Response {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body. Transport failures and 408/429/5xx statuses raise a
/// retryable ProviderError; other non-2xx statuses raise a fatal one.
Response post_json(const std::string& url, const std::string& body,
                   const std::string& bearer_token, std::chrono::milliseconds timeout);

/// Value of the environment variable, or empty when unset.
std::string token_from_env(const std::string& var);

}  // namespace tae::http
