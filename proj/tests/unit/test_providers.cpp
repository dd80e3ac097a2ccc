#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tae/completion.hpp"
#include "tae/embedding.hpp"
#include "tae/error.hpp"
#include "tae/generation.hpp"
#include "tae/http.hpp"
#include "tae/similarity.hpp"
#include "tae/util.hpp"

using namespace tae;
using nlohmann::json;

namespace {

// Loopback server standing in for the embedding and completion endpoints.
class FakeEndpoints {
 public:
  FakeEndpoints() {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_hits;
      if (fail_next > 0) {
        --fail_next;
        res.status = 503;
        return;
      }
      const auto j = json::parse(req.body);
      json vectors = json::array();
      for (const auto& s : j["inputs"]) vectors.push_back({static_cast<float>(s.get<std::string>().size()), 1.0f});
      if (short_batch) vectors.erase(vectors.begin());
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    server_.Post("/complete", [this](const httplib::Request& req, httplib::Response& res) {
      ++complete_hits;
      last_auth = req.get_header_value("Authorization");
      const auto j = json::parse(req.body);
      last_request = j;
      res.set_content(json{{"text", "echo: " + j["prompt"].get<std::string>()}}.dump(), "application/json");
    });
    server_.Post("/status/(\\d+)", [](const httplib::Request& req, httplib::Response& res) {
      res.status = std::stoi(req.matches[1]);
    });
    server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html>not json</html>", "text/html");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoints() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  std::atomic<int> embed_hits{0}, complete_hits{0}, fail_next{0};
  std::atomic<bool> short_batch{false};
  std::string last_auth;
  json last_request;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

EmbeddingProviderConfig embed_config(const FakeEndpoints& f) {
  EmbeddingProviderConfig c;
  c.endpoint = f.url("/embed");
  c.model = "fake";
  c.batch_size = 2;
  c.initial_backoff = std::chrono::milliseconds(0);
  c.timeout = std::chrono::milliseconds(2000);
  return c;
}

}  // namespace

TEST(Endpoint, Parse) {
  const auto e = http::Endpoint::parse("http://example.org:8080/v1/embed");
  EXPECT_EQ(e.scheme, "http");
  EXPECT_EQ(e.host, "example.org");
  EXPECT_EQ(e.port, 8080);
  EXPECT_EQ(e.path, "/v1/embed");
  EXPECT_EQ(http::Endpoint::parse("https://h").port, 443);
  EXPECT_EQ(http::Endpoint::parse("https://h").path, "/");
  EXPECT_THROW(http::Endpoint::parse("ftp://h"), ValidationError);
  EXPECT_THROW(http::Endpoint::parse("h:80"), ValidationError);
}

TEST(HttpEmbedding, BatchesAndKeepsOrder) {
  FakeEndpoints f;
  HttpEmbeddingProvider p(embed_config(f));
  const std::vector<std::string> inputs = {"a", "bb", "ccc", "dddd", "eeeee"};
  const auto v = p.embed(inputs);
  ASSERT_EQ(v.size(), 5u);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i][0], static_cast<float>(i + 1));
  EXPECT_EQ(f.embed_hits, 3);
}

TEST(HttpEmbedding, RetriesServerErrors) {
  FakeEndpoints f;
  f.fail_next = 2;
  HttpEmbeddingProvider p(embed_config(f));
  const std::vector<std::string> one = {"x"};
  EXPECT_EQ(p.embed(one).size(), 1u);
  EXPECT_EQ(f.embed_hits, 3);

  f.fail_next = 10;
  f.embed_hits = 0;
  try {
    p.embed(one);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(f.embed_hits, 3);
}

TEST(HttpEmbedding, ClientErrorsAreFatal) {
  FakeEndpoints f;
  auto c = embed_config(f);
  c.endpoint = f.url("/status/401");
  HttpEmbeddingProvider p(c);
  const std::vector<std::string> one = {"x"};
  try {
    p.embed(one);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_FALSE(e.retryable());
    EXPECT_NE(std::string(e.what()).find("401"), std::string::npos);
  }
}

TEST(HttpEmbedding, MalformedResponses) {
  FakeEndpoints f;
  auto c = embed_config(f);
  c.endpoint = f.url("/garbage");
  HttpEmbeddingProvider garbage(c);
  const std::vector<std::string> two = {"x", "y"};
  EXPECT_THROW(garbage.embed(two), ProviderError);

  f.short_batch = true;
  HttpEmbeddingProvider short_batch(embed_config(f));
  EXPECT_THROW(short_batch.embed(two), ProviderError);
}

TEST(HttpEmbedding, UnreachableIsRetryable) {
  int port;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  EmbeddingProviderConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/embed";
  c.max_attempts = 2;
  c.initial_backoff = std::chrono::milliseconds(0);
  c.timeout = std::chrono::milliseconds(500);
  HttpEmbeddingProvider p(c);
  const std::vector<std::string> one = {"x"};
  try {
    p.embed(one);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

TEST(HttpEmbedding, CacheFileAvoidsRepeatCalls) {
  FakeEndpoints f;
  const auto cache = std::filesystem::temp_directory_path() / "tae_embed_cache.jsonl";
  std::filesystem::remove(cache);
  const std::vector<std::string> inputs = {"alpha", "beta", "alpha"};
  {
    CachedEmbeddingProvider p(std::make_shared<HttpEmbeddingProvider>(embed_config(f)), cache);
    const auto v = p.embed(inputs);
    EXPECT_EQ(v[0], v[2]);
    EXPECT_EQ(p.size(), 2u);
    p.embed(inputs);
  }
  const int hits = f.embed_hits;
  EXPECT_GE(hits, 1);
  {
    CachedEmbeddingProvider p(std::make_shared<HttpEmbeddingProvider>(embed_config(f)), cache);
    EXPECT_EQ(p.size(), 2u);
    EXPECT_EQ(p.embed(inputs)[1][0], 4.0f);
  }
  EXPECT_EQ(f.embed_hits, hits);

  util::write_file_atomic(cache, "{\"key\": 1}\n");
  EXPECT_THROW(CachedEmbeddingProvider(std::make_shared<HttpEmbeddingProvider>(embed_config(f)), cache),
               ParseError);
  std::filesystem::remove(cache);
}

TEST(HttpEmbedding, FeedsEmbeddingMetrics) {
  FakeEndpoints f;
  auto provider = std::make_shared<HttpEmbeddingProvider>(embed_config(f));
  const auto metric = make_metric(MetricId::EmbeddingCosine, provider);
  const auto seq = make_sequence({"same words", "same words"}, Role::Generated, TemplateKind::slides());
  EXPECT_NEAR(metric->score(seq[0], seq[1]), 1.0, 1e-6);
}

TEST(HttpCompletion, SendsRequestAndReadsText) {
  FakeEndpoints f;
  ::setenv("TAE_TEST_COMPLETION_KEY", "sekret", 1);
  HttpCompletionClient client({f.url("/complete"), "TAE_TEST_COMPLETION_KEY", std::chrono::milliseconds(2000)});
  EXPECT_EQ(client.complete({"m1", "hello", 0.5, 64}), "echo: hello");
  EXPECT_EQ(f.last_auth, "Bearer sekret");
  EXPECT_EQ(f.last_request["model"], "m1");
  EXPECT_EQ(f.last_request["temperature"], 0.5);
  EXPECT_EQ(f.last_request["max_tokens"], 64);
  ::unsetenv("TAE_TEST_COMPLETION_KEY");
}

TEST(HttpCompletion, StatusClassification) {
  FakeEndpoints f;
  auto call = [&](const std::string& path) {
    HttpCompletionClient client({f.url(path), "", std::chrono::milliseconds(2000)});
    try {
      client.complete({"m", "p", 0.0, 8});
    } catch (const ProviderError& e) {
      return e.retryable() ? 1 : 0;
    }
    return -1;
  };
  EXPECT_EQ(call("/status/503"), 1);
  EXPECT_EQ(call("/status/429"), 1);
  EXPECT_EQ(call("/status/400"), 0);
  EXPECT_EQ(call("/garbage"), 0);
}

TEST(HttpCompletion, DrivesThePipeline) {
  FakeEndpoints f;
  auto client = make_completion_client(f.url("/complete"));
  GenerationConfig c;
  c.mode = RepresentationMode::NoRep;
  const auto r = generate_view("Some document.", c, *client);
  EXPECT_EQ(f.complete_hits, 1);
  EXPECT_NE(r.latex.find("echo: Summarize the following input"), std::string::npos);
  EXPECT_NE(r.latex.find("\\begin{document}"), std::string::npos);
}

TEST(CompletionFactory, Endpoints) {
  EXPECT_EQ(make_completion_client("synthetic")->name(), "synthetic");
  EXPECT_THROW(make_completion_client("stub:/definitely/not/here"), ValidationError);
  EXPECT_THROW(make_completion_client("carrier-pigeon"), ValidationError);
}
