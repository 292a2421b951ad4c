#include "atk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "atk/dataset.hpp"
#include "atk/threads.hpp"
#include "atk/topk.hpp"

namespace atk {

double SimStats::std_error() const {
  return runs > 0 ? stddev / std::sqrt(static_cast<double>(runs)) : 0.0;
}

namespace {

// True top-k index set of a permutation row of 1..n: the positions holding
// values above n - k. O(n), no sort; equivalent to exact_top_k's index set.
std::vector<std::uint32_t> permutation_top_k_positions(
    std::span<const float> row, std::uint32_t k) {
  const auto threshold = static_cast<float>(row.size() - k);
  std::vector<std::uint32_t> positions;
  positions.reserve(k);
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i] > threshold) positions.push_back(static_cast<std::uint32_t>(i));
  if (positions.size() != k)
    throw std::logic_error("row is not a permutation of 1..n");
  return positions;
}

std::size_t sorted_intersection_size(std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
  std::sort(a.begin(), a.end());
  std::size_t hits = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++hits;
      ++i;
      ++j;
    }
  }
  return hits;
}

}  // namespace

std::vector<SimStats> simulate_recall_many(std::span<const AlgoParams> configs,
                                           std::uint64_t runs,
                                           std::uint64_t seed,
                                           unsigned threads) {
  if (configs.empty())
    throw std::invalid_argument("simulate: no configurations");
  if (runs == 0) throw std::invalid_argument("simulate: runs must be >= 1");
  const std::uint64_t n = configs[0].n;
  for (const auto& params : configs) {
    params.validate();
    if (params.n != n)
      throw std::invalid_argument("simulate: configurations must share n");
  }

  // Per-run recall for every config; each run generates its row once and
  // feeds all configs, which matches per-config runs with the same seed
  // because rows depend only on (seed, run, n).
  std::vector<std::vector<double>> recall(
      configs.size(), std::vector<double>(static_cast<std::size_t>(runs)));
  std::vector<std::uint32_t> distinct_k;
  for (const auto& params : configs) distinct_k.push_back(params.global_k);
  std::sort(distinct_k.begin(), distinct_k.end());
  distinct_k.erase(std::unique(distinct_k.begin(), distinct_k.end()),
                   distinct_k.end());

  parallel_for(0, runs, threads, [&](std::uint64_t run) {
    const auto row = synth_distinct_row(n, seed, run);
    // one exact-set scan per distinct k
    std::vector<std::vector<std::uint32_t>> exact_sets(distinct_k.size());
    for (std::size_t i = 0; i < distinct_k.size(); ++i)
      exact_sets[i] = permutation_top_k_positions(row, distinct_k[i]);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const auto ki = static_cast<std::size_t>(
          std::lower_bound(distinct_k.begin(), distinct_k.end(),
                           configs[c].global_k) -
          distinct_k.begin());
      TopKResult approx = approx_top_k(row, configs[c]);
      const std::size_t hits =
          sorted_intersection_size(approx.indices, exact_sets[ki]);
      recall[c][static_cast<std::size_t>(run)] =
          static_cast<double>(hits) /
          static_cast<double>(configs[c].global_k);
    }
  });

  std::vector<SimStats> stats(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    double mean = 0.0, m2 = 0.0;
    std::uint64_t count = 0;
    for (const double r : recall[c]) {
      ++count;
      const double delta = r - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (r - mean);
    }
    stats[c].mean_recall = mean;
    stats[c].stddev =
        runs > 1 ? std::sqrt(m2 / static_cast<double>(runs - 1)) : 0.0;
    stats[c].runs = runs;
  }
  return stats;
}

SimStats simulate_recall(const AlgoParams& params, std::uint64_t runs,
                         std::uint64_t seed, unsigned threads) {
  return simulate_recall_many({&params, 1}, runs, seed, threads)[0];
}

}  // namespace atk
