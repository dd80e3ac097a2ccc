#include "tae/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <fstream>

#include "json.hpp"
#include "tae/error.hpp"
#include "tae/http.hpp"
#include "tae/retry.hpp"
#include "tae/util.hpp"

namespace tae {

using nlohmann::json;

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw ProviderError("embedding dimensions differ (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")",
                        false);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

double rescale_cosine(double c) noexcept { return std::clamp((c + 1.0) / 2.0, 0.0, 1.0); }

void EmbeddingProviderConfig::validate() const {
  if (batch_size < 1) throw ValidationError("embedding batch size must be >= 1");
  if (max_attempts < 1) throw ValidationError("embedding max attempts must be >= 1");
  if (max_concurrent_requests < 1)
    throw ValidationError("embedding concurrency bound must be >= 1");
  if (endpoint.empty()) throw ValidationError("embedding endpoint URL is empty");
  http::Endpoint::parse(endpoint);
}

// Counting gate bounding in-flight requests.
struct HttpEmbeddingProvider::Gate {
  std::mutex mu;
  std::condition_variable cv;
  std::size_t free;

  explicit Gate(std::size_t n) : free(n) {}
  void acquire() {
    std::unique_lock lk(mu);
    cv.wait(lk, [&] { return free > 0; });
    --free;
  }
  void release() {
    {
      std::lock_guard lk(mu);
      ++free;
    }
    cv.notify_one();
  }
};

HttpEmbeddingProvider::HttpEmbeddingProvider(EmbeddingProviderConfig cfg)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  gate_ = std::make_unique<Gate>(cfg_.max_concurrent_requests);
}

HttpEmbeddingProvider::~HttpEmbeddingProvider() = default;

std::vector<Embedding> HttpEmbeddingProvider::embed(std::span<const std::string> inputs) {
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); i += cfg_.batch_size) {
    auto batch = inputs.subspan(i, std::min(cfg_.batch_size, inputs.size() - i));
    auto vecs = embed_batch(batch);
    std::move(vecs.begin(), vecs.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<Embedding> HttpEmbeddingProvider::embed_batch(std::span<const std::string> batch) {
  const json request = {{"model", cfg_.model},
                        {"inputs", std::vector<std::string>(batch.begin(), batch.end())}};
  const std::string body = request.dump();
  const std::string token = http::token_from_env(cfg_.auth_env);
  const RetryPolicy policy{cfg_.max_attempts, cfg_.initial_backoff, 2.0};

  gate_->acquire();
  http::Response resp;
  try {
    resp = with_retries(policy, [&] { return http::post_json(cfg_.endpoint, body, token, cfg_.timeout); });
  } catch (...) {
    gate_->release();
    throw;
  }
  gate_->release();

  std::vector<Embedding> vecs;
  try {
    const auto parsed = json::parse(resp.body);
    vecs = parsed.at("vectors").get<std::vector<Embedding>>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed embedding response: ") + e.what(), false);
  }
  if (vecs.size() != batch.size())
    throw ProviderError("embedding response has " + std::to_string(vecs.size()) +
                            " vectors for " + std::to_string(batch.size()) + " inputs",
                        false);
  return vecs;
}

std::vector<Embedding> StubEmbeddingProvider::embed(std::span<const std::string> inputs) {
  {
    std::lock_guard lk(mu_);
    ++calls_;
  }
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (const auto& text : inputs) {
    auto it = table_.find(text);
    if (it == table_.end()) throw ProviderError("stub has no vector for '" + text + "'", false);
    out.push_back(it->second);
  }
  return out;
}

std::size_t StubEmbeddingProvider::calls() const {
  std::lock_guard lk(mu_);
  return calls_;
}

std::vector<Embedding> HashingEmbeddingProvider::embed(std::span<const std::string> inputs) {
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (const auto& text : inputs) {
    Embedding v(dim_, 0.0f);
    std::string padded = " ";
    for (char c : text) padded.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    padded.push_back(' ');
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const auto h = util::fnv1a64(std::string_view(padded).substr(i, 3));
      v[h % dim_] += (h >> 63) ? -1.0f : 1.0f;
    }
    out.push_back(std::move(v));
  }
  return out;
}

CachedEmbeddingProvider::CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                 std::optional<std::filesystem::path> cache_file)
    : inner_(std::move(inner)), cache_file_(std::move(cache_file)) {
  if (!cache_file_ || !std::filesystem::exists(*cache_file_)) return;
  std::ifstream in(*cache_file_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      cache_[j.at("key").get<std::string>()] = j.at("vector").get<Embedding>();
    } catch (const json::exception& e) {
      throw ParseError("embedding cache " + cache_file_->string() + ":" +
                           std::to_string(lineno) + ": " + e.what(),
                       lineno);
    }
  }
}

std::string CachedEmbeddingProvider::key(const std::string& text) const {
  return inner_->model_id() + ":" + util::hash_hex(text);
}

std::vector<Embedding> CachedEmbeddingProvider::embed(std::span<const std::string> inputs) {
  std::vector<Embedding> out(inputs.size());
  std::vector<std::size_t> missing;
  {
    std::shared_lock lk(mu_);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      auto it = cache_.find(key(inputs[i]));
      if (it != cache_.end()) {
        out[i] = it->second;
      } else {
        missing.push_back(i);
      }
    }
  }
  if (missing.empty()) return out;

  std::vector<std::string> todo;
  todo.reserve(missing.size());
  for (auto i : missing) todo.push_back(inputs[i]);
  auto fresh = inner_->embed(todo);
  if (fresh.size() != todo.size())
    throw ProviderError("embedding provider returned a short batch", false);

  std::unique_lock lk(mu_);
  std::ofstream log;
  if (cache_file_) log.open(*cache_file_, std::ios::app);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    const auto kk = key(todo[k]);
    if (cache_.emplace(kk, fresh[k]).second && log) {
      log << json{{"key", kk}, {"vector", fresh[k]}}.dump() << '\n';
    }
    out[missing[k]] = std::move(fresh[k]);
  }
  return out;
}

std::size_t CachedEmbeddingProvider::size() const {
  std::shared_lock lk(mu_);
  return cache_.size();
}

}  // namespace tae
