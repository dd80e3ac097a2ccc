#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "tae/error.hpp"
#include "tae/similarity.hpp"

using namespace tae;

namespace {

Tokens random_tokens(std::mt19937& rng, std::size_t max_len, int vocab) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  Tokens t(len(rng));
  for (auto& w : t) w = "w" + std::to_string(word(rng));
  return t;
}

Panel panel(const std::string& text) { return make_sequence({text}, Role::Generated, TemplateKind::blog())[0]; }

}  // namespace

TEST(RougeL, LcsMatchesExhaustiveSearch) {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_tokens(rng, 8, 4);
    const auto b = random_tokens(rng, 8, 4);
    ASSERT_EQ(lcs_length(a, b), oracle::lcs_exhaustive(a, b));
  }
}

TEST(RougeL, Fixture) {
  const auto r = rouge_l(tokenize("a b c d"), tokenize("a c e"));
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, 4.0 / 7.0);
}

TEST(RougeL, SymmetricF1AndBounds) {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_tokens(rng, 12, 5);
    const auto b = random_tokens(rng, 12, 5);
    const double f = rouge_l(a, b).f1;
    EXPECT_EQ(f, rouge_l(b, a).f1);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(RougeL, EmptySides) {
  EXPECT_EQ(rouge_l({}, tokenize("a")).f1, 0.0);
  EXPECT_EQ(rouge_l({}, {}).f1, 0.0);
}

TEST(PRF, F1IsBitSymmetric) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng), r = u(rng);
    EXPECT_EQ(PRF::from(p, r).f1, PRF::from(r, p).f1);
  }
  EXPECT_EQ(PRF::from(0.0, 0.0).f1, 0.0);
}

TEST(Bleu, ExactMatchIsOne) {
  EXPECT_DOUBLE_EQ(bleu(tokenize("the cat sat on the mat"), tokenize("the cat sat on the mat")), 1.0);
  EXPECT_DOUBLE_EQ(bleu(tokenize("a b"), tokenize("a b")), 1.0);
}

TEST(Bleu, SmoothedFixture) {
  // p1 = 2/3 unsmoothed; p2 = (1+1)/(2+1), p3 = (0+1)/(1+1); order 4 is longer than the candidate
  EXPECT_NEAR(bleu(tokenize("a b c"), tokenize("a b d")), std::cbrt(2.0 / 9.0), 1e-12);
}

TEST(Bleu, BrevityPenalty) {
  // all n-grams of "a b" occur in the reference; penalty exp(1 - 4/2)
  EXPECT_NEAR(bleu(tokenize("a b"), tokenize("a b c d")), std::exp(-1.0), 1e-12);
}

TEST(Bleu, NoUnigramMatchIsZero) {
  EXPECT_EQ(bleu(tokenize("x y z"), tokenize("a b c")), 0.0);
  EXPECT_EQ(bleu({}, tokenize("a")), 0.0);
}

TEST(Meteor, IdenticalClosedForm) {
  for (int m : {2, 5, 10}) {
    Tokens t;
    for (int i = 0; i < m; ++i) t.push_back("t" + std::to_string(i));
    EXPECT_NEAR(meteor(t, t), 1.0 - 0.5 / (m * m * m), 1e-12) << m;
  }
}

TEST(Meteor, ChunkFixture) {
  const auto d = meteor_detail(tokenize("the cat sat"), tokenize("the cat was sitting"));
  EXPECT_EQ(d.matches, 2u);
  EXPECT_EQ(d.chunks, 1u);
  EXPECT_NEAR(d.score, (10.0 * (2.0 / 3.0) * 0.5 / (0.5 + 9.0 * (2.0 / 3.0))) * (1.0 - 0.5 * 0.125), 1e-12);
}

TEST(Meteor, StemStage) {
  const auto d = meteor_detail(tokenize("cats running"), tokenize("cat runs"));
  EXPECT_EQ(d.matches, 2u);
  EXPECT_NEAR(d.score, 0.9375, 1e-12);
}

TEST(Meteor, CrossingMatchesMakeMoreChunks) {
  const auto d = meteor_detail(tokenize("c b a"), tokenize("a b c"));
  EXPECT_EQ(d.matches, 3u);
  EXPECT_EQ(d.chunks, 3u);
}

TEST(Metrics, RegisteredAndSymmetric) {
  auto emb = std::make_shared<HashingEmbeddingProvider>();
  const auto a = panel("Panel order matters for slides");
  const auto b = panel("slides where order of panels matters");
  for (auto id : {MetricId::RougeL, MetricId::Bleu, MetricId::Meteor, MetricId::EmbeddingCosine,
                  MetricId::TokenGreedyEmbedding}) {
    const auto m = make_metric(id, emb);
    EXPECT_EQ(m->name(), to_string(id));
    EXPECT_EQ(parse_metric(to_string(id)), id);
    const double ab = m->score(a, b), ba = m->score(b, a);
    EXPECT_NEAR(ab, ba, 1e-12) << m->name();
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(m->score(a, a), id == MetricId::Meteor ? 1.0 - 0.5 / 125.0 : 1.0, 1e-9) << m->name();
  }
  EXPECT_THROW(parse_metric("bertscore"), ValidationError);
  EXPECT_THROW(make_metric(MetricId::EmbeddingCosine), ValidationError);
}

TEST(Embedding, CosineAndRescale) {
  const std::vector<float> x{1, 0}, y{0, 1}, z{-1, 0};
  EXPECT_DOUBLE_EQ(cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine(x, y), 0.0);
  EXPECT_DOUBLE_EQ(rescale_cosine(cosine(x, z)), 0.0);
  EXPECT_DOUBLE_EQ(rescale_cosine(cosine(x, y)), 0.5);
  EXPECT_EQ(cosine(std::vector<float>{0, 0}, x), 0.0);
  EXPECT_THROW(cosine(x, std::vector<float>{1, 2, 3}), ProviderError);
}

TEST(Embedding, StubTableGreedyMatch) {
  auto stub = std::make_shared<StubEmbeddingProvider>(
      "stub", std::map<std::string, Embedding>{{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}});
  // candidate {a}, reference {a, b}: precision 1, recall (1 + 0.5) / 2
  const auto prf = token_greedy_embedding({"a"}, {"a", "b"}, *stub);
  EXPECT_DOUBLE_EQ(prf.precision, 1.0);
  EXPECT_DOUBLE_EQ(prf.recall, 0.75);
  EXPECT_THROW(token_greedy_embedding({"zzz"}, {"a"}, *stub), ProviderError);
}

TEST(Embedding, CacheAvoidsRepeatCalls) {
  auto stub = std::make_shared<StubEmbeddingProvider>(
      "stub", std::map<std::string, Embedding>{{"a", {1, 0}}, {"b", {0, 1}}});
  CachedEmbeddingProvider cache(stub);
  const std::vector<std::string> in{"a", "b"};
  const auto first = cache.embed(in);
  const auto second = cache.embed(in);
  EXPECT_EQ(first, second);
  EXPECT_EQ(stub->calls(), 1u);
  EXPECT_EQ(cache.size(), 2u);
}
