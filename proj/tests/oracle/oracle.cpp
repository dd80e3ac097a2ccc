#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace oracle {

namespace {

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& seq) {
  std::size_t j = 0;
  for (const auto& tok : seq) {
    if (j < sub.size() && sub[j] == tok) ++j;
  }
  return j == sub.size();
}

double closed_form_spearman(const std::vector<int>& a) {
  // a is a permutation of 1..n compared against 1..n
  const std::size_t n = a.size();
  long long sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long long d = a[i] - static_cast<long long>(i + 1);
    sum += d * d;
  }
  const auto nn = static_cast<double>(n);
  return 1.0 - (6.0 * static_cast<double>(sum)) / (nn * (nn * nn - 1.0));
}

}  // namespace

std::size_t lcs_exhaustive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  const std::size_t k = shorter.size();
  for (unsigned long mask = 0; mask < (1UL << k); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1UL << i)) sub.push_back(shorter[i]);
    if (sub.size() > best && is_subsequence(sub, longer)) best = sub.size();
  }
  return best;
}

double rouge_l_f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto l = static_cast<double>(lcs_exhaustive(a, b));
  if (l == 0.0) return 0.0;
  return 2.0 * l / static_cast<double>(a.size() + b.size());
}

Mapping best_targets(const Matrix& m, bool precision) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  const std::size_t sources = precision ? rows : cols;
  const std::size_t targets = precision ? cols : rows;
  Mapping out;
  out.lambda.assign(targets, 0);
  for (std::size_t s = 0; s < sources; ++s) {
    std::vector<double> row(targets);
    for (std::size_t t = 0; t < targets; ++t) row[t] = precision ? m[s][t] : m[t][s];
    const double best = *std::max_element(row.begin(), row.end());
    std::size_t pick = targets;
    for (std::size_t t = targets; t-- > 0;)
      if (row[t] == best) pick = t;
    out.target.push_back(pick);
    out.value.push_back(best);
    ++out.lambda[pick];
  }
  return out;
}

std::vector<int> best_replication(const Mapping& map) {
  // blocks[t] holds the appearance ranks (1-based) of sources mapped to t
  std::vector<std::vector<int>> blocks(map.lambda.size());
  for (std::size_t s = 0; s < map.target.size(); ++s) blocks[map.target[s]].push_back(static_cast<int>(s + 1));
  for (auto& b : blocks) std::sort(b.begin(), b.end());

  std::vector<int> best;
  long long best_cost = -1;
  std::vector<int> current;
  std::function<void(std::size_t)> walk = [&](std::size_t t) {
    if (t == blocks.size()) {
      long long cost = 0;
      for (std::size_t i = 0; i < current.size(); ++i) {
        const long long d = current[i] - static_cast<long long>(i + 1);
        cost += d * d;
      }
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    auto perm = blocks[t];
    do {
      current.insert(current.end(), perm.begin(), perm.end());
      walk(t + 1);
      current.resize(current.size() - perm.size());
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  walk(0);
  return best;
}

double spearman_by_definition(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) ++less;
        if (w == v[i]) ++equal;
      }
      r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Result tae_oracle(const std::vector<std::vector<std::string>>& reference,
                  const std::vector<std::vector<std::string>>& generated) {
  Result r;
  auto& s = r.score;
  s.reference_count = reference.size();
  s.generated_count = generated.size();
  if (generated.empty()) return r;

  Matrix m(generated.size(), std::vector<double>(reference.size()));
  for (std::size_t i = 0; i < generated.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j) m[i][j] = rouge_l_f1(generated[i], reference[j]);

  r.precision_map = best_targets(m, true);
  r.recall_map = best_targets(m, false);
  r.precision_aligned = best_replication(r.precision_map);
  r.recall_aligned = best_replication(r.recall_map);

  auto mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  auto order = [](const std::vector<int>& a) { return a.size() < 2 ? 1.0 : (closed_form_spearman(a) + 1.0) / 2.0; };

  s.q_p = mean(r.precision_map.value);
  s.q_r = mean(r.recall_map.value);
  s.o_p = order(r.precision_aligned);
  s.o_r = order(r.recall_aligned);
  const double n = static_cast<double>(reference.size());
  const double g = static_cast<double>(generated.size());
  s.l = std::exp(-std::fabs(n - g) / n);
  s.precision = s.q_p * s.o_p * s.l;
  s.recall = s.q_r * s.o_r * s.l;
  const double lo = std::min(s.precision, s.recall), hi = std::max(s.precision, s.recall);
  s.f1 = lo + hi > 0.0 ? 2.0 * lo * hi / (lo + hi) : 0.0;
  return r;
}

}  // namespace oracle
