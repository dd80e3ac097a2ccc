#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tae {

using Embedding = std::vector<float>;

/// Source of dense text embeddings. Implementations must be safe to call
/// from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string model_id() const = 0;

  /// One vector per input, in input order. Throws ProviderError.
  virtual std::vector<Embedding> embed(std::span<const std::string> inputs) = 0;
};

struct EmbeddingProviderConfig {
  std::string endpoint;
  std::string auth_env = "TAE_EMBEDDING_API_KEY";
  std::size_t batch_size = 32;
  std::chrono::milliseconds timeout{30000};
  std::string model;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::size_t max_concurrent_requests = 4;

  void validate() const;
};

/// POST {model, inputs:[...]} -> {vectors:[[...]]}, bearer token read from
/// the environment variable named in the config.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(EmbeddingProviderConfig cfg);
  ~HttpEmbeddingProvider() override;

  std::string model_id() const override { return cfg_.model; }
  std::vector<Embedding> embed(std::span<const std::string> inputs) override;

 private:
  std::vector<Embedding> embed_batch(std::span<const std::string> batch);

  EmbeddingProviderConfig cfg_;
  struct Gate;
  std::unique_ptr<Gate> gate_;
};

/// Fixed text -> vector table for tests. Unknown text is a fatal error.
class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  StubEmbeddingProvider(std::string model, std::map<std::string, Embedding> table)
      : model_(std::move(model)), table_(std::move(table)) {}

  std::string model_id() const override { return model_; }
  std::vector<Embedding> embed(std::span<const std::string> inputs) override;

  std::size_t calls() const;

 private:
  std::string model_;
  std::map<std::string, Embedding> table_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

/// Offline embedding: hashed character trigrams of each input folded into a
/// fixed-size vector. Deterministic; useful for runs without an endpoint.
class HashingEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dim = 256) : dim_(dim) {}

  std::string model_id() const override { return "hashing-trigram-" + std::to_string(dim_); }
  std::vector<Embedding> embed(std::span<const std::string> inputs) override;

 private:
  std::size_t dim_;
};

/// Memoizes another provider keyed by (model id, content hash). When a cache
/// file is given, entries are loaded from it on construction and new ones
/// appended as JSON lines.
class CachedEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                   std::optional<std::filesystem::path> cache_file = std::nullopt);

  std::string model_id() const override { return inner_->model_id(); }
  std::vector<Embedding> embed(std::span<const std::string> inputs) override;

  std::size_t size() const;

 private:
  std::string key(const std::string& text) const;

  std::shared_ptr<EmbeddingProvider> inner_;
  std::optional<std::filesystem::path> cache_file_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Embedding> cache_;
};

/// Cosine of two vectors of equal length; 0 when either is the zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

/// Maps a cosine from [-1, 1] onto [0, 1], clamping rounding spill.
double rescale_cosine(double c) noexcept;

}  // namespace tae
