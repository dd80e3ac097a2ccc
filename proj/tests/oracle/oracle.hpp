#pragma once

// Slow, obviously-correct reimplementations used only by tests.

#include <cstddef>
#include <string>
#include <vector>

#include "tae/tae.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // [generated][reference]

/// Longest common subsequence by trying every subsequence of the shorter side.
std::size_t lcs_exhaustive(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// 2 * LCS / (|a| + |b|) with the exhaustive LCS.
double rouge_l_f1(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct Mapping {
  std::vector<std::size_t> target;  // per source
  std::vector<double> value;        // per source
  std::vector<std::size_t> lambda;  // per target
};

/// For each source, the smallest target index among those holding the maximum.
Mapping best_targets(const Matrix& m, bool precision);

/// Aligned ranks chosen among all within-target orderings as the one with the
/// smallest sum of squared rank differences to 1..N.
std::vector<int> best_replication(const Mapping& map);

/// Pearson correlation of average ranks.
double spearman_by_definition(const std::vector<double>& x, const std::vector<double>& y);

/// Every TAE field computed from scratch; ROUGE-L via lcs_exhaustive.
struct Result {
  Mapping precision_map;
  Mapping recall_map;
  std::vector<int> precision_aligned;
  std::vector<int> recall_aligned;
  tae::TaeScore score;
};

Result tae_oracle(const std::vector<std::vector<std::string>>& reference,
                  const std::vector<std::vector<std::string>>& generated);

}  // namespace oracle
