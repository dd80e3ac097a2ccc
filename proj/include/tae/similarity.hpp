#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tae/embedding.hpp"
#include "tae/text_model.hpp"

namespace tae {

enum class MetricId { RougeL, Bleu, Meteor, EmbeddingCosine, TokenGreedyEmbedding };

std::string_view to_string(MetricId id) noexcept;
/// Accepts rouge_l|bleu|meteor|embedding_cosine|token_greedy_embedding.
MetricId parse_metric(std::string_view text);
bool needs_embeddings(MetricId id) noexcept;

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// f1 = 2pr/(p+r), or 0 when p+r = 0. Evaluated so that from(p, r) and
  /// from(r, p) give bit-identical f1.
  static PRF from(double precision, double recall) noexcept;
};

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

PRF rouge_l(const Tokens& candidate, const Tokens& reference);

/// Sentence BLEU with brevity penalty. Orders above the candidate length are
/// left out of the geometric mean. When some order has no clipped match,
/// orders >= 2 get add-one smoothing on numerator and denominator.
double bleu(const Tokens& candidate, const Tokens& reference, int max_n = 4);

struct MeteorResult {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

/// METEOR with an exact-match stage followed by a Porter-stem stage.
MeteorResult meteor_detail(const Tokens& candidate, const Tokens& reference);
double meteor(const Tokens& candidate, const Tokens& reference);

double embedding_cosine(const std::string& a, const std::string& b, EmbeddingProvider& provider);

/// Greedy max-cosine token matching without idf weighting. Token cosines
/// are rescaled to [0, 1] before averaging.
PRF token_greedy_embedding(const Tokens& candidate, const Tokens& reference,
                           EmbeddingProvider& provider);

/// Symmetric panel-to-panel similarity in [0, 1].
class SimilarityMetric {
 public:
  virtual ~SimilarityMetric() = default;
  virtual double score(const Panel& a, const Panel& b) const = 0;
  virtual std::string name() const = 0;
  /// False for metrics whose value depends on an external provider.
  virtual bool deterministic() const { return true; }
};

/// Registered implementation for `id`. Embedding metrics need a provider.
std::unique_ptr<SimilarityMetric> make_metric(MetricId id,
                                              std::shared_ptr<EmbeddingProvider> provider = nullptr);

double similarity(MetricId id, const Panel& a, const Panel& b,
                  std::shared_ptr<EmbeddingProvider> provider = nullptr);

}  // namespace tae
