#include "tae/tae.hpp"

#include <omp.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <numeric>

#include "tae/error.hpp"

namespace tae {
namespace {

// Runs body(i) for i in [0, n) on the OpenMP team and rethrows the first
// exception on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr failure;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(tae_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> average_ranks(std::span<const double> v, bool& has_ties) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  has_ties = false;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    if (j > i) has_ties = true;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

TaeDetail score_document_serial(const DocumentPair& pair, const SimilarityMetric& metric) {
  if (pair.reference.empty()) throw EmptyReference("reference has no panels");
  return tae_detail(similarity_matrix_serial(pair.generated, pair.reference, metric));
}

}  // namespace

SimilarityMatrix similarity_matrix(const PanelSequence& generated, const PanelSequence& reference,
                                   const SimilarityMetric& metric) {
  SimilarityMatrix m(generated.size(), reference.size());
  const std::size_t cols = reference.size();
  parallel_for(generated.size() * cols, [&](std::size_t k) {
    const std::size_t i = k / cols;
    const std::size_t j = k % cols;
    m.at(i, j) = metric.score(generated[i], reference[j]);
  });
  return m;
}

SimilarityMatrix similarity_matrix_serial(const PanelSequence& generated,
                                          const PanelSequence& reference,
                                          const SimilarityMetric& metric) {
  SimilarityMatrix m(generated.size(), reference.size());
  for (std::size_t i = 0; i < generated.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j)
      m.at(i, j) = metric.score(generated[i], reference[j]);
  return m;
}

Alignment align(const SimilarityMatrix& m, Direction direction) {
  const bool by_rows = direction == Direction::Precision;
  const std::size_t sources = by_rows ? m.rows() : m.cols();
  const std::size_t targets = by_rows ? m.cols() : m.rows();
  if (sources == 0 || targets == 0) throw EmptySequence("cannot align an empty panel sequence");

  Alignment a;
  a.direction = direction;
  a.pairs.resize(sources);
  a.lambda.assign(targets, 0);
  for (std::size_t s = 0; s < sources; ++s) {
    std::size_t best = 0;
    double best_sim = by_rows ? m.at(s, 0) : m.at(0, s);
    for (std::size_t t = 1; t < targets; ++t) {
      const double sim = by_rows ? m.at(s, t) : m.at(t, s);
      if (sim > best_sim) {
        best_sim = sim;
        best = t;
      }
    }
    a.pairs[s] = {best, best_sim};
    ++a.lambda[best];
  }
  return a;
}

Alignment align(const PanelSequence& source, const PanelSequence& target,
                const SimilarityMetric& metric, Direction direction) {
  if (source.empty() || target.empty()) throw EmptySequence("cannot align an empty panel sequence");
  // Rows are always the source side here, so read it as a precision alignment.
  auto a = align(similarity_matrix(source, target, metric), Direction::Precision);
  a.direction = direction;
  return a;
}

double quality(const Alignment& alignment) {
  if (alignment.pairs.empty()) throw EmptySequence("quality of an empty alignment");
  double sum = 0.0;
  for (const auto& p : alignment.pairs) sum += p.similarity;
  return sum / static_cast<double>(alignment.pairs.size());
}

RankPair replicate_and_rank(const Alignment& alignment) {
  const std::size_t n = alignment.source_count();
  std::vector<std::vector<int>> copies(alignment.target_count());
  // Sources are visited in appearance order, so each target's copies come
  // out already in ascending rank.
  for (std::size_t s = 0; s < n; ++s) {
    copies[alignment.pairs[s].target].push_back(static_cast<int>(s + 1));
  }
  RankPair out;
  out.aligned.reserve(n);
  out.appearance.resize(n);
  std::iota(out.appearance.begin(), out.appearance.end(), 1);
  for (std::size_t t = 0; t < copies.size(); ++t) {
    assert(copies[t].size() == alignment.lambda[t]);
    out.aligned.insert(out.aligned.end(), copies[t].begin(), copies[t].end());
  }
  return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatch("spearman: sequences have lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateInput("spearman needs at least two observations");

  bool ties_x = false, ties_y = false;
  const auto rx = average_ranks(x, ties_x);
  const auto ry = average_ranks(y, ties_y);

  if (!ties_x && !ties_y) {
    double sum_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = rx[i] - ry[i];
      sum_d2 += d * d;
    }
    const auto nn = static_cast<double>(n);
    return 1.0 - (6.0 * sum_d2) / (nn * (nn * nn - 1.0));
  }

  const double mean = (static_cast<double>(n) + 1.0) / 2.0;  // mean of any average-rank vector
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("spearman: a ranking has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const int> x, std::span<const int> y) {
  std::vector<double> dx(x.begin(), x.end()), dy(y.begin(), y.end());
  return spearman(std::span<const double>(dx), std::span<const double>(dy));
}

double order_penalty(const RankPair& ranks) {
  if (ranks.aligned.size() < 2) return 1.0;
  // Both sides are permutations of 1..N, so the variance is never zero.
  return (spearman(std::span<const int>(ranks.aligned), std::span<const int>(ranks.appearance)) + 1.0) /
         2.0;
}

double length_penalty(std::size_t reference_count, std::size_t generated_count) {
  if (reference_count == 0) throw ZeroReferenceCount("length penalty needs at least one reference panel");
  const auto n = static_cast<double>(reference_count);
  const auto m = static_cast<double>(generated_count);
  return std::exp(-std::abs(n - m) / n);
}

TaeDetail tae_detail(const SimilarityMatrix& m) {
  TaeDetail d;
  d.score.generated_count = m.rows();
  d.score.reference_count = m.cols();
  if (m.cols() == 0) throw EmptyReference("reference has no panels");
  if (m.rows() == 0) return d;

  d.precision_alignment = align(m, Direction::Precision);
  d.recall_alignment = align(m, Direction::Recall);
  d.precision_ranks = replicate_and_rank(d.precision_alignment);
  d.recall_ranks = replicate_and_rank(d.recall_alignment);

  auto& s = d.score;
  s.q_p = quality(d.precision_alignment);
  s.q_r = quality(d.recall_alignment);
  s.o_p = order_penalty(d.precision_ranks);
  s.o_r = order_penalty(d.recall_ranks);
  s.l = length_penalty(m.cols(), m.rows());
  s.precision = s.q_p * s.o_p * s.l;
  s.recall = s.q_r * s.o_r * s.l;
  s.f1 = PRF::from(s.precision, s.recall).f1;
  return d;
}

TaeDetail tae_detail(const PanelSequence& reference, const PanelSequence& generated,
                     const SimilarityMetric& metric) {
  if (reference.empty()) throw EmptyReference("reference has no panels");
  return tae_detail(similarity_matrix(generated, reference, metric));
}

TaeScore tae_score(const PanelSequence& reference, const PanelSequence& generated,
                   const SimilarityMetric& metric) {
  return tae_detail(reference, generated, metric).score;
}

TaeScore macro_average(std::span<const TaeScore> scores) {
  TaeScore agg;
  if (scores.empty()) return agg;
  for (const auto& s : scores) {
    agg.q_p += s.q_p;
    agg.q_r += s.q_r;
    agg.o_p += s.o_p;
    agg.o_r += s.o_r;
    agg.l += s.l;
    agg.precision += s.precision;
    agg.recall += s.recall;
    agg.f1 += s.f1;
    agg.reference_count += s.reference_count;
    agg.generated_count += s.generated_count;
  }
  const auto n = static_cast<double>(scores.size());
  for (double* f : {&agg.q_p, &agg.q_r, &agg.o_p, &agg.o_r, &agg.l, &agg.precision, &agg.recall, &agg.f1})
    *f /= n;
  return agg;
}

CorpusScore corpus_score(std::span<const DocumentPair> pairs, const SimilarityMetric& metric) {
  if (pairs.empty()) throw EmptyCorpus("corpus has no document pairs");
  CorpusScore out;
  out.documents.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    out.documents[i] = score_document_serial(pairs[i], metric).score;
  });
  out.aggregate = macro_average(out.documents);
  return out;
}

CorpusScore corpus_score_serial(std::span<const DocumentPair> pairs, const SimilarityMetric& metric) {
  if (pairs.empty()) throw EmptyCorpus("corpus has no document pairs");
  CorpusScore out;
  out.documents.reserve(pairs.size());
  for (const auto& p : pairs) out.documents.push_back(score_document_serial(p, metric).score);
  out.aggregate = macro_average(out.documents);
  return out;
}

}  // namespace tae
