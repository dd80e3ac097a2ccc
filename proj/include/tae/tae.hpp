#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tae/similarity.hpp"
#include "tae/text_model.hpp"

namespace tae {

/// Dense generated x reference similarity table.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Row i, column j holds metric.score(generated[i], reference[j]). Pairs are
/// scored in parallel.
SimilarityMatrix similarity_matrix(const PanelSequence& generated, const PanelSequence& reference,
                                   const SimilarityMetric& metric);

/// Single-threaded reference for similarity_matrix.
SimilarityMatrix similarity_matrix_serial(const PanelSequence& generated,
                                          const PanelSequence& reference,
                                          const SimilarityMetric& metric);

enum class Direction {
  Precision,  // generated panels mapped onto reference panels
  Recall,     // reference panels mapped onto generated panels
};

struct AlignedPair {
  std::size_t target = 0;
  double similarity = 0.0;

  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

/// Each source panel mapped to its most similar target panel.
struct Alignment {
  Direction direction = Direction::Precision;
  std::vector<AlignedPair> pairs;   // indexed by source panel
  std::vector<std::size_t> lambda;  // number of sources mapped to each target

  std::size_t source_count() const noexcept { return pairs.size(); }
  std::size_t target_count() const noexcept { return lambda.size(); }
};

/// Argmax alignment; ties (including all-zero rows) go to the lowest target
/// index. Throws EmptySequence when either side is empty.
Alignment align(const PanelSequence& source, const PanelSequence& target,
                const SimilarityMetric& metric, Direction direction = Direction::Precision);

/// Alignment read off a generated x reference matrix. Precision maps rows
/// onto columns, Recall maps columns onto rows.
Alignment align(const SimilarityMatrix& m, Direction direction);

/// Mean of the recorded max-similarities: Q_P or Q_R depending on direction.
double quality(const Alignment& alignment);

/// Rankings used by the order penalty.
///
/// `appearance` ranks the alignment's source panels 1..N in order. Each
/// target panel t is replaced by lambda[t] copies (dropped when zero); every
/// copy carries the appearance rank of one source panel aligned to t, copies
/// of one target sorted by ascending rank, targets kept in document order.
/// The result `aligned` is a permutation of 1..N.
struct RankPair {
  std::vector<int> aligned;
  std::vector<int> appearance;

  friend bool operator==(const RankPair&, const RankPair&) = default;
};

RankPair replicate_and_rank(const Alignment& alignment);

/// Spearman's rank correlation. Values are ranked (ties get average ranks);
/// without ties this is 1 - 6*sum(d^2)/(n(n^2-1)), otherwise Pearson on the
/// ranks. Throws LengthMismatch, or DegenerateInput when n < 2 or a side has
/// no variance.
double spearman(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const int> x, std::span<const int> y);

/// (spearman + 1) / 2, or 1 when fewer than two panels take part.
double order_penalty(const RankPair& ranks);

/// exp(-|n - m| / n) for n reference and m generated panels.
double length_penalty(std::size_t reference_count, std::size_t generated_count);

struct TaeScore {
  double q_p = 0.0;
  double q_r = 0.0;
  double o_p = 0.0;
  double o_r = 0.0;
  double l = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t reference_count = 0;
  std::size_t generated_count = 0;

  friend bool operator==(const TaeScore&, const TaeScore&) = default;
};

/// Everything computed on the way to a TaeScore.
struct TaeDetail {
  TaeScore score;
  Alignment precision_alignment;
  Alignment recall_alignment;
  RankPair precision_ranks;
  RankPair recall_ranks;
};

/// Scores from a precomputed generated x reference matrix (rows may be 0).
TaeDetail tae_detail(const SimilarityMatrix& m);

TaeDetail tae_detail(const PanelSequence& reference, const PanelSequence& generated,
                     const SimilarityMetric& metric);

/// Throws EmptyReference when the reference has no panels. An empty
/// generated sequence scores all zeros.
TaeScore tae_score(const PanelSequence& reference, const PanelSequence& generated,
                   const SimilarityMetric& metric);

struct DocumentPair {
  PanelSequence reference;
  PanelSequence generated;
};

struct CorpusScore {
  TaeScore aggregate;  // unweighted mean over documents; counts are totals
  std::vector<TaeScore> documents;
};

/// Macro-averaged corpus score; documents are scored in parallel and kept in
/// input order. Throws EmptyCorpus.
CorpusScore corpus_score(std::span<const DocumentPair> pairs, const SimilarityMetric& metric);

/// Single-threaded reference for corpus_score.
CorpusScore corpus_score_serial(std::span<const DocumentPair> pairs, const SimilarityMetric& metric);

/// Macro mean of per-document scores.
TaeScore macro_average(std::span<const TaeScore> scores);

}  // namespace tae
