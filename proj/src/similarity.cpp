#include "tae/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <utility>

#include "tae/error.hpp"
#include "tae/porter_stemmer.hpp"

namespace tae {

std::string_view to_string(MetricId id) noexcept {
  switch (id) {
    case MetricId::RougeL: return "rouge_l";
    case MetricId::Bleu: return "bleu";
    case MetricId::Meteor: return "meteor";
    case MetricId::EmbeddingCosine: return "embedding_cosine";
    case MetricId::TokenGreedyEmbedding: return "token_greedy_embedding";
  }
  return "rouge_l";
}

MetricId parse_metric(std::string_view text) {
  for (auto id : {MetricId::RougeL, MetricId::Bleu, MetricId::Meteor, MetricId::EmbeddingCosine,
                  MetricId::TokenGreedyEmbedding}) {
    if (text == to_string(id)) return id;
  }
  throw ValidationError("unknown metric '" + std::string(text) +
                        "' (expected rouge_l|bleu|meteor|embedding_cosine|token_greedy_embedding)");
}

bool needs_embeddings(MetricId id) noexcept {
  return id == MetricId::EmbeddingCosine || id == MetricId::TokenGreedyEmbedding;
}

PRF PRF::from(double precision, double recall) noexcept {
  PRF out{precision, recall, 0.0};
  const double lo = std::min(precision, recall);
  const double hi = std::max(precision, recall);
  if (lo + hi > 0.0) out.f1 = 2.0 * lo * hi / (lo + hi);
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF rouge_l(const Tokens& candidate, const Tokens& reference) {
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  PRF out;
  if (!candidate.empty()) out.precision = lcs / static_cast<double>(candidate.size());
  if (!reference.empty()) out.recall = lcs / static_cast<double>(reference.size());
  // 2pr/(p+r) reduces to 2*LCS/(|c|+|r|).
  if (lcs > 0.0)
    out.f1 = 2.0 * lcs / static_cast<double>(candidate.size() + reference.size());
  return out;
}

namespace {

using NgramCounts = std::map<std::string, std::size_t>;

NgramCounts count_ngrams(const Tokens& toks, std::size_t n) {
  NgramCounts counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double bleu(const Tokens& candidate, const Tokens& reference, int max_n) {
  if (candidate.empty() || reference.empty() || max_n < 1) return 0.0;
  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(max_n), candidate.size());

  std::vector<std::size_t> matched(orders), total(orders);
  bool any_zero = false;
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    std::size_t m = 0;
    for (const auto& [gram, c] : cand) {
      auto it = ref.find(gram);
      if (it != ref.end()) m += std::min(c, it->second);
    }
    matched[n - 1] = m;
    total[n - 1] = candidate.size() - n + 1;
    any_zero = any_zero || m == 0;
  }
  if (matched[0] == 0) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    double num = static_cast<double>(matched[n - 1]);
    double den = static_cast<double>(total[n - 1]);
    if (any_zero && n >= 2) {
      num += 1.0;
      den += 1.0;
    }
    log_sum += std::log(num / den);
  }
  const double geo = std::exp(log_sum / static_cast<double>(orders));
  const double bp = candidate.size() < reference.size()
                        ? std::exp(1.0 - static_cast<double>(reference.size()) /
                                             static_cast<double>(candidate.size()))
                        : 1.0;
  return std::clamp(geo * bp, 0.0, 1.0);
}

MeteorResult meteor_detail(const Tokens& candidate, const Tokens& reference) {
  MeteorResult out;
  if (candidate.empty() || reference.empty()) return out;

  std::vector<int> cand_to_ref(candidate.size(), -1);
  std::vector<bool> ref_used(reference.size(), false);

  auto stage = [&](const Tokens& cand_keys, const Tokens& ref_keys) {
    for (std::size_t i = 0; i < cand_keys.size(); ++i) {
      if (cand_to_ref[i] >= 0) continue;
      for (std::size_t j = 0; j < ref_keys.size(); ++j) {
        if (!ref_used[j] && cand_keys[i] == ref_keys[j]) {
          cand_to_ref[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  };
  stage(candidate, reference);
  Tokens cand_stems, ref_stems;
  cand_stems.reserve(candidate.size());
  ref_stems.reserve(reference.size());
  for (const auto& t : candidate) cand_stems.push_back(porter_stem(t));
  for (const auto& t : reference) ref_stems.push_back(porter_stem(t));
  stage(cand_stems, ref_stems);

  int prev_ref = -2;
  bool prev_matched = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const int j = cand_to_ref[i];
    if (j < 0) {
      prev_matched = false;
      continue;
    }
    ++out.matches;
    if (!prev_matched || j != prev_ref + 1) ++out.chunks;
    prev_ref = j;
    prev_matched = true;
  }
  if (out.matches == 0) return out;

  const auto m = static_cast<double>(out.matches);
  out.precision = m / static_cast<double>(candidate.size());
  out.recall = m / static_cast<double>(reference.size());
  out.fmean = 10.0 * out.precision * out.recall / (out.recall + 9.0 * out.precision);
  const double frag = static_cast<double>(out.chunks) / m;
  out.penalty = 0.5 * frag * frag * frag;
  out.score = out.fmean * (1.0 - out.penalty);
  return out;
}

double meteor(const Tokens& candidate, const Tokens& reference) {
  return meteor_detail(candidate, reference).score;
}

double embedding_cosine(const std::string& a, const std::string& b, EmbeddingProvider& provider) {
  const std::vector<std::string> inputs = a == b ? std::vector<std::string>{a}
                                                 : std::vector<std::string>{a, b};
  const auto vecs = provider.embed(inputs);
  if (vecs.size() != inputs.size())
    throw ProviderError("embedding provider returned " + std::to_string(vecs.size()) +
                            " vectors for " + std::to_string(inputs.size()) + " inputs",
                        false);
  const auto& va = vecs.front();
  const auto& vb = vecs.back();
  return rescale_cosine(cosine(va, vb));
}

PRF token_greedy_embedding(const Tokens& candidate, const Tokens& reference,
                           EmbeddingProvider& provider) {
  if (candidate.empty() || reference.empty()) return {};
  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto* seq : {&candidate, &reference}) {
    for (const auto& t : *seq) {
      if (slot.emplace(t, unique.size()).second) unique.push_back(t);
    }
  }
  const auto vecs = provider.embed(unique);
  if (vecs.size() != unique.size())
    throw ProviderError("embedding provider returned " + std::to_string(vecs.size()) +
                            " vectors for " + std::to_string(unique.size()) + " tokens",
                        false);

  std::vector<std::vector<double>> cos(candidate.size(), std::vector<double>(reference.size()));
  for (std::size_t i = 0; i < candidate.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j)
      cos[i][j] = rescale_cosine(cosine(vecs[slot[candidate[i]]], vecs[slot[reference[j]]]));

  double p = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i)
    p += *std::max_element(cos[i].begin(), cos[i].end());
  p /= static_cast<double>(candidate.size());

  double r = 0.0;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < candidate.size(); ++i) best = std::max(best, cos[i][j]);
    r += best;
  }
  r /= static_cast<double>(reference.size());
  return PRF::from(p, r);
}

namespace {

class RougeLMetric final : public SimilarityMetric {
 public:
  double score(const Panel& a, const Panel& b) const override {
    return rouge_l(a.tokens, b.tokens).f1;
  }
  std::string name() const override { return "rouge_l"; }
};

// Directional metrics are symmetrized by the geometric mean of both directions.
class BleuMetric final : public SimilarityMetric {
 public:
  double score(const Panel& a, const Panel& b) const override {
    return std::sqrt(bleu(a.tokens, b.tokens) * bleu(b.tokens, a.tokens));
  }
  std::string name() const override { return "bleu"; }
};

class MeteorMetric final : public SimilarityMetric {
 public:
  double score(const Panel& a, const Panel& b) const override {
    return std::sqrt(meteor(a.tokens, b.tokens) * meteor(b.tokens, a.tokens));
  }
  std::string name() const override { return "meteor"; }
};

class EmbeddingCosineMetric final : public SimilarityMetric {
 public:
  explicit EmbeddingCosineMetric(std::shared_ptr<EmbeddingProvider> p) : provider_(std::move(p)) {}
  double score(const Panel& a, const Panel& b) const override {
    return embedding_cosine(a.text, b.text, *provider_);
  }
  std::string name() const override { return "embedding_cosine"; }
  bool deterministic() const override { return false; }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
};

class TokenGreedyMetric final : public SimilarityMetric {
 public:
  explicit TokenGreedyMetric(std::shared_ptr<EmbeddingProvider> p) : provider_(std::move(p)) {}
  double score(const Panel& a, const Panel& b) const override {
    return token_greedy_embedding(a.tokens, b.tokens, *provider_).f1;
  }
  std::string name() const override { return "token_greedy_embedding"; }
  bool deterministic() const override { return false; }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
};

}  // namespace

std::unique_ptr<SimilarityMetric> make_metric(MetricId id,
                                              std::shared_ptr<EmbeddingProvider> provider) {
  if (needs_embeddings(id) && !provider)
    throw ValidationError("metric '" + std::string(to_string(id)) +
                          "' needs an embedding provider");
  switch (id) {
    case MetricId::RougeL: return std::make_unique<RougeLMetric>();
    case MetricId::Bleu: return std::make_unique<BleuMetric>();
    case MetricId::Meteor: return std::make_unique<MeteorMetric>();
    case MetricId::EmbeddingCosine: return std::make_unique<EmbeddingCosineMetric>(std::move(provider));
    case MetricId::TokenGreedyEmbedding: return std::make_unique<TokenGreedyMetric>(std::move(provider));
  }
  throw ValidationError("unregistered metric");
}

double similarity(MetricId id, const Panel& a, const Panel& b,
                  std::shared_ptr<EmbeddingProvider> provider) {
  return make_metric(id, std::move(provider))->score(a, b);
}

}  // namespace tae
