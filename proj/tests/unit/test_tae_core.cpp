#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "tae/error.hpp"
#include "tae/tae.hpp"

using namespace tae;

namespace {

PanelSequence seq(const std::vector<std::string>& texts, Role role = Role::Generated) {
  return make_sequence(texts, role, TemplateKind::slides());
}

std::vector<std::string> random_panels(std::mt19937& rng, std::size_t min_panels, std::size_t max_panels,
                                       std::size_t max_tokens, int vocab) {
  std::uniform_int_distribution<std::size_t> np(min_panels, max_panels), nt(1, max_tokens);
  std::uniform_int_distribution<int> w(0, vocab - 1);
  std::vector<std::string> out(np(rng));
  for (auto& p : out) {
    const auto n = nt(rng);
    for (std::size_t i = 0; i < n; ++i) p += (i ? " w" : "w") + std::to_string(w(rng));
  }
  return out;
}

const auto rouge = make_metric(MetricId::RougeL);

}  // namespace

TEST(WorkedExample, ThreeGeneratedPanelsAgainstTwo) {
  const auto ref = seq({"a b c", "d e f"}, Role::Reference);
  const auto gen = seq({"a b c", "d e f", "x y z"});
  const auto s = tae_score(ref, gen, *rouge);
  EXPECT_NEAR(s.q_p, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.o_p, 0.75, 1e-12);
  EXPECT_NEAR(s.l, std::exp(-0.5), 1e-12);
  EXPECT_NEAR(s.precision, 0.303265, 1e-6);
  EXPECT_NEAR(s.recall, 0.606531, 1e-6);
  EXPECT_NEAR(s.f1, 0.404354, 1e-6);
  EXPECT_EQ(s.q_r, 1.0);
  EXPECT_EQ(s.o_r, 1.0);
}

TEST(Alignment, TiesGoToLowestIndex) {
  SimilarityMatrix m(2, 3);
  m.at(0, 1) = 0.5;
  m.at(0, 2) = 0.5;
  const auto p = align(m, Direction::Precision);
  EXPECT_EQ(p.pairs[0].target, 1u);
  EXPECT_EQ(p.pairs[1].target, 0u);  // all-zero row
  EXPECT_EQ(p.lambda, (std::vector<std::size_t>{1, 1, 0}));
}

TEST(Alignment, EmptySidesThrow) {
  EXPECT_THROW(align(seq({}), seq({"a"}, Role::Reference), *rouge), EmptySequence);
  EXPECT_THROW(align(seq({"a"}), seq({}, Role::Reference), *rouge), EmptySequence);
}

TEST(Alignment, LambdaSumsToSourceCount) {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto g = seq(random_panels(rng, 1, 6, 5, 6));
    const auto r = seq(random_panels(rng, 1, 6, 5, 6), Role::Reference);
    for (auto dir : {Direction::Precision, Direction::Recall}) {
      const auto a = dir == Direction::Precision ? align(g, r, *rouge, dir) : align(r, g, *rouge, dir);
      EXPECT_EQ(std::accumulate(a.lambda.begin(), a.lambda.end(), std::size_t{0}), a.source_count());
    }
  }
}

TEST(Ranks, ReplicationIsPermutation) {
  std::mt19937 rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto g = seq(random_panels(rng, 1, 6, 4, 5));
    const auto r = seq(random_panels(rng, 1, 6, 4, 5), Role::Reference);
    const auto rp = replicate_and_rank(align(g, r, *rouge));
    auto sorted = rp.aligned;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(g.size());
    std::iota(expect.begin(), expect.end(), 1);
    EXPECT_EQ(sorted, expect);
    EXPECT_EQ(rp.appearance, expect);
  }
}

TEST(Ranks, PaperStyleExample) {
  // sources 1..4 map to targets 1, 0, 1, 2
  Alignment a;
  a.pairs = {{1, 1}, {0, 1}, {1, 1}, {2, 1}};
  a.lambda = {1, 2, 1};
  const auto rp = replicate_and_rank(a);
  EXPECT_EQ(rp.aligned, (std::vector<int>{2, 1, 3, 4}));
}

TEST(Spearman, ClosedFormAndErrors) {
  const std::vector<double> x{1, 2, 3, 4}, y{4, 3, 2, 1};
  EXPECT_EQ(spearman(x, x), 1.0);
  EXPECT_EQ(spearman(x, y), -1.0);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), DegenerateInput);
  EXPECT_THROW(spearman(x, std::vector<double>{1, 2}), LengthMismatch);
  EXPECT_THROW(spearman(x, std::vector<double>{2, 2, 2, 2}), DegenerateInput);
}

TEST(Spearman, TiesMatchDefinition) {
  const std::vector<double> x{1, 2, 2, 3, 5}, y{2, 1, 4, 4, 3};
  EXPECT_NEAR(spearman(x, y), oracle::spearman_by_definition(x, y), 1e-12);
}

TEST(Spearman, RangeOnRandomData) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> v(0, 4);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(6), y(6);
    for (auto& e : x) e = v(rng);
    for (auto& e : y) e = v(rng);
    try {
      const double s = spearman(x, y);
      EXPECT_GE(s, -1.0);
      EXPECT_LE(s, 1.0);
      EXPECT_NEAR(s, oracle::spearman_by_definition(x, y), 1e-12);
    } catch (const DegenerateInput&) {
    }
  }
}

TEST(OrderPenalty, SinglePanelIsOne) {
  RankPair rp{{1}, {1}};
  EXPECT_EQ(order_penalty(rp), 1.0);
  EXPECT_EQ(order_penalty(RankPair{}), 1.0);
}

TEST(LengthPenalty, ClosedForm) {
  for (std::size_t n = 1; n <= 10; ++n) {
    EXPECT_EQ(length_penalty(n, n), 1.0);
    EXPECT_NEAR(length_penalty(n, 2 * n), std::exp(-1.0), 1e-12);
  }
  EXPECT_THROW(length_penalty(0, 3), ZeroReferenceCount);
  // not symmetric in its arguments
  EXPECT_NE(length_penalty(2, 4), length_penalty(4, 2));
}

TEST(TaeScore, IdentityIsPerfect) {
  std::mt19937 rng(21);
  for (int i = 0; i < 100; ++i) {
    auto texts = random_panels(rng, 1, 6, 30, 1000);
    const auto s = tae_score(seq(texts, Role::Reference), seq(texts), *rouge);
    EXPECT_NEAR(s.f1, 1.0, 1e-9);
  }
}

TEST(TaeScore, EmptyGeneratedScoresZero) {
  const auto s = tae_score(seq({"a b"}, Role::Reference), seq({}), *rouge);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(s.l, 0.0);
  EXPECT_EQ(s.generated_count, 0u);
  EXPECT_THROW(tae_score(seq({}, Role::Reference), seq({"a"}), *rouge), EmptyReference);
}

TEST(TaeScore, BoundsAndPrecisionFormula) {
  std::mt19937 rng(33);
  for (int i = 0; i < 300; ++i) {
    const auto r = seq(random_panels(rng, 1, 6, 6, 8), Role::Reference);
    const auto g = seq(random_panels(rng, 1, 6, 6, 8));
    const auto s = tae_score(r, g, *rouge);
    for (double v : {s.q_p, s.q_r, s.o_p, s.o_r, s.l, s.precision, s.recall, s.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(s.precision, s.q_p * s.o_p * s.l);
    EXPECT_EQ(s.recall, s.q_r * s.o_r * s.l);
  }
}

TEST(TaeScore, MatchesOracle) {
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    const auto rt = random_panels(rng, 1, 6, 6, 10);
    const auto gt = random_panels(rng, 1, 6, 6, 10);
    const auto r = seq(rt, Role::Reference);
    const auto g = seq(gt);
    std::vector<Tokens> rtok, gtok;
    for (const auto& p : r.panels) rtok.push_back(p.tokens);
    for (const auto& p : g.panels) gtok.push_back(p.tokens);
    EXPECT_EQ(tae_score(r, g, *rouge), oracle::tae_oracle(rtok, gtok).score);
  }
}

TEST(TaeScore, ReversedOrderHasZeroOrderScore) {
  for (int n = 2; n <= 6; ++n) {
    std::vector<std::string> texts;
    for (int i = 0; i < n; ++i) texts.push_back("unique" + std::to_string(i) + " words" + std::to_string(i));
    std::vector<std::string> rev(texts.rbegin(), texts.rend());
    const auto s = tae_score(seq(texts, Role::Reference), seq(rev), *rouge);
    EXPECT_EQ(s.q_p, 1.0);
    EXPECT_EQ(s.o_p, 0.0);
  }
}

TEST(SimilarityMatrix, ParallelEqualsSerial) {
  std::mt19937 rng(8);
  const auto meteor = make_metric(MetricId::Meteor);
  for (int i = 0; i < 20; ++i) {
    const auto g = seq(random_panels(rng, 0, 12, 20, 30));
    const auto r = seq(random_panels(rng, 1, 12, 20, 30), Role::Reference);
    EXPECT_EQ(similarity_matrix(g, r, *meteor), similarity_matrix_serial(g, r, *meteor));
  }
}

TEST(Corpus, ParallelEqualsSerialAndMacroMean) {
  std::mt19937 rng(13);
  std::vector<DocumentPair> pairs;
  for (int i = 0; i < 25; ++i)
    pairs.push_back({seq(random_panels(rng, 1, 6, 10, 12), Role::Reference), seq(random_panels(rng, 0, 6, 10, 12))});
  const auto par = corpus_score(pairs, *rouge);
  const auto ser = corpus_score_serial(pairs, *rouge);
  EXPECT_EQ(par.documents, ser.documents);
  EXPECT_EQ(par.aggregate, ser.aggregate);
  double f1 = 0.0;
  for (const auto& d : par.documents) f1 += d.f1;
  EXPECT_NEAR(par.aggregate.f1, f1 / 25.0, 1e-12);
  EXPECT_THROW(corpus_score({}, *rouge), EmptyCorpus);
}

TEST(Corpus, ProviderErrorPropagatesFromWorkers) {
  auto stub = std::make_shared<StubEmbeddingProvider>("stub", std::map<std::string, Embedding>{});
  const auto m = make_metric(MetricId::EmbeddingCosine, stub);
  std::vector<DocumentPair> pairs{{seq({"a"}, Role::Reference), seq({"b"})}};
  EXPECT_THROW(corpus_score(pairs, *m), ProviderError);
}
