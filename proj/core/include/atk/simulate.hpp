#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "atk/params.hpp"

namespace atk {

// Empirical recall over seeded synthetic runs (the library entry behind the
// simulate command; tests drive the same path).
struct SimStats {
  double mean_recall = 0.0;
  double stddev = 0.0;  // sample std across runs (ddof = 1), 0 for 1 run
  std::uint64_t runs = 0;

  double std_error() const;
};

// Runs `runs` rows of synth_distinct_row(n, seed, run) through approx_top_k
// for every configuration (all must share the same n) and measures recall
// against the true top-k set. Rows are permutations of 1..n, so the true
// top-k index set is found by an O(n) scan for values > n - k (verified
// against exact_top_k in the tests). Row generation depends only on
// (seed, run, n); evaluating several configurations together is therefore
// identical to evaluating them one at a time with the same seed.
std::vector<SimStats> simulate_recall_many(std::span<const AlgoParams> configs,
                                           std::uint64_t runs,
                                           std::uint64_t seed,
                                           unsigned threads = 1);

SimStats simulate_recall(const AlgoParams& params, std::uint64_t runs,
                         std::uint64_t seed, unsigned threads = 1);

}  // namespace atk
