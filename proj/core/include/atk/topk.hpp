#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "atk/params.hpp"

namespace atk {

// Bucket assignment of element i under the strided partition.
inline std::uint64_t partition_index(std::uint64_t i, const AlgoParams& params) {
  return i % params.num_buckets;
}

// Sentinel held by not-yet-filled candidate slots.
inline constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// Online top-local_k state of a single bucket, scalar reference form.
// values are kept non-increasing; slot local_k-1 holds the current minimum.
// Unfilled slots hold {-inf, 0}.
struct BucketState {
  std::vector<float> values;
  std::vector<std::uint32_t> indices;

  explicit BucketState(std::uint32_t local_k)
      : values(local_k, kNegInf), indices(local_k, 0) {}
};

// Per-element operation counts of the update subroutine. The subroutine is
// branchless (comparator outputs feed selects), so the budget is structural:
// every consumed element costs exactly local_k compares and 4*local_k - 2
// selects, i.e. 5*local_k - 2 ops, independent of the data.
struct OpCounts {
  std::uint64_t compares = 0;
  std::uint64_t selects = 0;

  std::uint64_t total() const { return compares + selects; }
};

// Streams one element into a bucket: a non-strict (>=) test against the
// current minimum replaces slot local_k-1 (1 compare + 2 selects), then a
// bubble pass walks the new element toward the front. The bubble comparator
// uses the *incoming* value as LHS with a strict test (value > values[k-1]),
// which removes the loop-carried dependency between positions: 1 compare +
// 4 selects per position.
//
// Tie semantics that follow: an incoming value equal to the current minimum
// replaces it (the later equal element survives), and the bubble pass never
// moves an element past an equal-valued one (the earlier equal element stays
// in front).
void update_bucket(BucketState& state, float value, std::uint32_t index);

// Same op sequence, with the fixed per-element budget added to `ops`.
void update_bucket(BucketState& state, float value, std::uint32_t index,
                   OpCounts& ops);

// Streaming stage-1 accumulator over the strided partition.
//
// State layout is bucket-minor [local_k, num_buckets]: slot k*B + b holds
// the (k+1)-th best of bucket b, so the inner update loops run across
// contiguous b and vectorize. Blocks must be fed in index order but may have
// any length and alignment; the compare/select sequence per element is
// identical regardless of how the row is split into blocks, so results are
// bit-identical for every blocking (this is what makes the fused matmul
// pipeline equivalent to the unfused one).
class Stage1Accumulator {
 public:
  explicit Stage1Accumulator(const AlgoParams& params);

  // Consumes the next block.size() elements (positions consumed()..+size-1).
  // Throws std::invalid_argument on NaN input or if the row length n would
  // be exceeded.
  void consume(std::span<const float> block);

  std::uint64_t consumed() const { return consumed_; }
  const AlgoParams& params() const { return params_; }

  // Candidate grid, flattened [local_k, num_buckets]. Slots of buckets with
  // fewer than local_k seen elements hold the {-inf, 0} sentinel.
  const std::vector<float>& values() const { return values_; }
  const std::vector<std::uint32_t>& indices() const { return indices_; }

  // Copies the candidate grid out as a TopKResult-shaped pair of arrays
  // (length num_buckets * local_k; grid order, not sorted).
  TopKResult candidates() const;

 private:
  AlgoParams params_;
  std::uint64_t consumed_ = 0;
  std::vector<float> values_;
  std::vector<std::uint32_t> indices_;
};

// Stage 1 over a full row. Returns the flattened [local_k, num_buckets]
// candidate grid.
TopKResult stage1_partial_reduce(std::span<const float> input,
                                 const AlgoParams& params);

// Exact top-k by full sort: descending value, ascending index on ties.
// Throws std::invalid_argument on NaN input or if k is 0 or exceeds
// input.size().
TopKResult exact_top_k(std::span<const float> input, std::uint32_t k);

// Exact top-k of an explicit candidate list (parallel value/index arrays),
// same ordering contract as exact_top_k. Candidates with index >=
// index_limit are dropped before ranking (used to discard padding).
TopKResult select_top_k_candidates(std::span<const float> values,
                                   std::span<const std::uint32_t> indices,
                                   std::uint32_t k,
                                   std::uint64_t index_limit = UINT64_MAX);

// Two-stage approximate top-k: stage 1, then exact top-global_k of the
// candidate grid. With num_buckets * local_k >= n this degenerates to the
// exact result.
TopKResult approx_top_k(std::span<const float> input, const AlgoParams& params);

// Row-batched approx_top_k over rows*n contiguous row-major values.
// threads <= 1 runs inline; any thread count produces identical results.
std::vector<TopKResult> approx_top_k_batch(std::span<const float> rows,
                                           std::uint64_t row_count,
                                           const AlgoParams& params,
                                           unsigned threads = 1);

// |approx.indices ∩ exact.indices| / K. Both results must have the same
// number of entries (else std::invalid_argument); order does not matter.
double measure_recall(const TopKResult& approx, const TopKResult& exact);

}  // namespace atk
