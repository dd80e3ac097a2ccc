#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <string>

namespace tae {

struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 2048;
};

/// Text completion backend. Implementations must be safe to call from
/// several threads at once. Errors are ProviderError.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct CompletionEndpointConfig {
  std::string url;
  std::string auth_env = "TAE_COMPLETION_API_KEY";
  std::chrono::milliseconds timeout{120000};
};

/// POST {model, prompt, temperature, max_tokens} -> {text}. One attempt per
/// call; the pipeline owns retries.
class HttpCompletionClient final : public CompletionClient {
 public:
  explicit HttpCompletionClient(CompletionEndpointConfig cfg);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return cfg_.url; }

 private:
  CompletionEndpointConfig cfg_;
};

/// Canned completions read from <dir>/<hash_hex(prompt)>.txt. A missing file
/// is a fatal ProviderError naming the hash.
class StubCompletionClient final : public CompletionClient {
 public:
  explicit StubCompletionClient(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "stub:" + dir_.string(); }

  static std::filesystem::path file_for(const std::filesystem::path& dir, const std::string& prompt);

 private:
  std::filesystem::path dir_;
};

/// Offline stand-in that derives a plausible answer from the prompt itself:
/// a JSON representation for step-one prompts and a LaTeX view for step-two
/// prompts. Deterministic for a given (prompt, temperature).
class SyntheticCompletionClient final : public CompletionClient {
 public:
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "synthetic"; }
};

/// Forwards to another client and counts calls.
class CountingCompletionClient final : public CompletionClient {
 public:
  explicit CountingCompletionClient(std::shared_ptr<CompletionClient> inner) : inner_(std::move(inner)) {}
  std::string complete(const CompletionRequest& request) override {
    ++calls_;
    return inner_->complete(request);
  }
  std::string name() const override { return inner_->name(); }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::shared_ptr<CompletionClient> inner_;
  std::atomic<std::size_t> calls_{0};
};

/// "stub:<dir>", "synthetic", or an http(s) URL.
std::shared_ptr<CompletionClient> make_completion_client(const std::string& endpoint);

}  // namespace tae
