#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "atk/params.hpp"
#include "atk/recall.hpp"

namespace atk {

// Thrown by select_parameters when no legal configuration meets the target.
struct NoFeasibleConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlanRequest {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double recall_target = 0.0;
  std::vector<std::uint32_t> allowed_local_k = {1, 2, 3, 4};
  std::uint32_t lane_multiple = kDefaultLaneMultiple;
  std::uint64_t seed = 0;  // MC substream root

  void validate() const;
};

struct PlanResult {
  std::uint32_t local_k = 0;
  std::uint64_t num_buckets = 0;
  std::uint64_t num_elements = 0;  // num_buckets * local_k
  RecallEstimate estimated_recall;
  // recall_target >= 0.995 is outside the regime where the MC tolerance
  // (3 sigma <= 0.005) can reliably separate configurations.
  bool high_target_warning = false;

  AlgoParams params(const PlanRequest& req) const;
};

// One evaluated (local_k, num_buckets) pair of the sweep.
struct PlanCandidate {
  std::uint32_t local_k = 0;
  std::uint64_t num_buckets = 0;
  RecallEstimate recall;
  bool passed = false;
};

// Divisors of n that are multiples of lane_multiple, descending. Empty when
// lane_multiple does not divide n.
std::vector<std::uint64_t> legal_bucket_counts(std::uint64_t n,
                                               std::uint64_t lane_multiple);

// Sweeps local_k ascending and legal bucket counts descending; each
// (local_k, B) is scored with adaptive MC on a seed-derived substream. A
// local_k sweep stops at the first B with B*local_k < k or estimated recall
// below target. Among passing candidates the result minimizes num_elements,
// then local_k. Winners whose exact expression is cheap
// (min(k, n/B) <= 10^4) are re-validated with exact_expected_recall — the
// exact value replaces the MC estimate, and an MC false-accept is discarded
// in favor of the next-best passing candidate. Throws NoFeasibleConfigError
// when nothing passes.
//
// If `trace` is non-null it receives every evaluated candidate in sweep
// order. Identical PlanRequest (including seed) gives identical PlanResult.
PlanResult select_parameters(const PlanRequest& req,
                             std::vector<PlanCandidate>* trace = nullptr);

// ---- reduction-factor grid ----------------------------------------------

struct GridSpec {
  // global_k as a fraction of n.
  std::vector<double> k_fractions;
  std::vector<std::uint64_t> n_values;
  double recall_target = 0.95;
  std::uint32_t kprime_max = 4;
  std::uint32_t lane_multiple = kDefaultLaneMultiple;
};

// Defaults: fractions {0.1, 0.390625, 0.5, 1, 2, 5, 10, 25} percent (the
// 0.390625% entry puts k = 1024 at n = 2^18 on the grid), n = powers of two
// 2^8 .. 2^32, target 0.95.
GridSpec default_grid_spec();

struct GridCell {
  std::uint64_t n_requested = 0;
  std::uint64_t n_used = 0;  // rounded down to a lane multiple; 0 if none
  double k_fraction = 0.0;
  std::uint64_t k = 0;

  // Fewest kept elements meeting the target with local_k == 1 vs with
  // local_k <= kprime_max. Empty when the cell is infeasible.
  std::optional<std::uint64_t> baseline_elements;
  std::optional<std::uint64_t> baseline_buckets;
  std::optional<std::uint64_t> generalized_elements;
  std::optional<std::uint64_t> generalized_buckets;
  std::optional<std::uint32_t> generalized_local_k;
  std::optional<double> reduction_factor;  // baseline / generalized
};

// Evaluates every (n, fraction) cell with the exact recall expression (the
// grid is deterministic by construction; MC stays in select_parameters).
// n is rounded down to the nearest lane multiple; k = round(fraction * n)
// clamped to [1, n]. Cells with no legal bucket count are returned with
// empty optionals.
std::vector<GridCell> reduction_factor_grid(const GridSpec& spec);

}  // namespace atk
