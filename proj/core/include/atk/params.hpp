#pragma once

#include <cstdint>
#include <vector>

namespace atk {

inline constexpr std::uint32_t kDefaultLaneMultiple = 128;

// Parameters of the two-stage bucketed top-k reduction over one row of
// length n:
//
//   stage 1: elements are partitioned by stride (element i -> bucket i mod
//            num_buckets) and each bucket keeps its local_k largest online;
//   stage 2: the num_buckets * local_k candidates are reduced exactly to the
//            global_k largest.
//
// lane_multiple is the hardware lane-width constraint on num_buckets (the
// bucket-minor inner loops run across buckets).
struct AlgoParams {
  std::uint64_t n = 0;
  std::uint64_t num_buckets = 0;
  std::uint32_t local_k = 0;
  std::uint32_t global_k = 0;
  std::uint32_t lane_multiple = kDefaultLaneMultiple;

  std::uint64_t bucket_size() const {
    return num_buckets ? n / num_buckets : 0;
  }
  std::uint64_t num_candidates() const {
    return num_buckets * static_cast<std::uint64_t>(local_k);
  }

  // Full contract for actually running the reduction. Throws
  // std::invalid_argument unless all of:
  //   1 <= n <= 2^32 - 1          (results carry 32-bit indices)
  //   num_buckets divides n, num_buckets is a multiple of lane_multiple
  //   local_k >= 1
  //   1 <= global_k <= n and num_buckets * local_k >= global_k
  void validate() const;

  // Relaxed contract for the recall analysis, which generalizes to any
  // 1 <= num_buckets <= n (mixed bucket sizes when num_buckets does not
  // divide n), to n beyond the 32-bit index range, and to candidate pools
  // smaller than global_k (the result is then the expected retained
  // fraction). No lane constraint.
  void validate_analysis() const;
};

// Result of either pipeline: values[i] is the (i+1)-th largest, indices[i]
// its position in the source row. For end-to-end results values are
// non-increasing and indices are distinct; ties are broken toward the
// smaller index.
struct TopKResult {
  std::vector<float> values;
  std::vector<std::uint32_t> indices;

  std::size_t size() const { return values.size(); }
};

}  // namespace atk
