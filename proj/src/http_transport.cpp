#include "httplib.h"

#include <cstdlib>
#include <regex>

#include "tae/error.hpp"
#include "tae/http.hpp"

namespace tae::http {

Endpoint Endpoint::parse(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ValidationError("invalid endpoint URL '" + url + "'");
  Endpoint ep;
  ep.scheme = m[1];
  ep.host = m[2];
  ep.port = m[3].matched ? std::stoi(m[3]) : (ep.scheme == "https" ? 443 : 80);
  ep.path = m[4].matched ? std::string(m[4]) : "/";
  return ep;
}

Response post_json(const std::string& url, const std::string& body,
                   const std::string& bearer_token, std::chrono::milliseconds timeout) {
  const auto ep = Endpoint::parse(url);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

  auto configure = [&](auto& client) {
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
  };

  httplib::Result res{nullptr, httplib::Error::Unknown};
  if (ep.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient client(ep.host, ep.port);
    configure(client);
    res = client.Post(ep.path, headers, body, "application/json");
#else
    throw ValidationError("https endpoints need a build with OpenSSL");
#endif
  } else {
    httplib::Client client(ep.host, ep.port);
    configure(client);
    res = client.Post(ep.path, headers, body, "application/json");
  }

  if (!res) {
    throw ProviderError("request to " + url + " failed: " + httplib::to_string(res.error()), true);
  }
  const int status = res->status;
  if (status >= 200 && status < 300) return {status, res->body};
  const bool retryable = status == 408 || status == 429 || status >= 500;
  throw ProviderError("request to " + url + " returned HTTP " + std::to_string(status), retryable);
}

std::string token_from_env(const std::string& var) {
  if (var.empty()) return {};
  const char* v = std::getenv(var.c_str());
  return v ? std::string(v) : std::string();
}

}  // namespace tae::http
