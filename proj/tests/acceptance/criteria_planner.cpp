#include "criteria.hpp"

#include <string>

#include "atk/planner.hpp"
#include "atk/recall.hpp"

using namespace atk;

namespace {

// Criterion 2: at n = 262144, k = 1024, target 0.95, restricting the planner
// to local_k = 1 needs 16384 kept elements while local_k <= 4 needs 2048 —
// an exact 8x reduction.
CriterionResult criterion2() {
  CriterionResult result;
  result.number = 2;
  result.description =
      "planner at n=262144 k=1024 target 0.95: 16384 elements for local_k=1 "
      "vs 2048 for local_k<=4, an exact 8x reduction";

  PlanRequest req;
  req.n = 262144;
  req.k = 1024;
  req.recall_target = 0.95;
  req.seed = 0;

  req.allowed_local_k = {1};
  const PlanResult baseline = select_parameters(req);
  req.allowed_local_k = {1, 2, 3, 4};
  const PlanResult generalized = select_parameters(req);

  const bool baseline_ok =
      baseline.local_k == 1 && baseline.num_elements == 16384;
  const bool generalized_ok =
      generalized.local_k == 4 && generalized.num_buckets == 512 &&
      generalized.num_elements == 2048;
  result.passed =
      baseline_ok && generalized_ok &&
      static_cast<double>(baseline.num_elements) /
              static_cast<double>(generalized.num_elements) ==
          8.0;
  result.detail = "baseline " + std::to_string(baseline.num_elements) +
                  ", generalized " + std::to_string(generalized.num_elements) +
                  " (local_k=" + std::to_string(generalized.local_k) +
                  ", b=" + std::to_string(generalized.num_buckets) + ")";
  return result;
}

// Criterion 3: the older bucket-count prescription needs more than twice the
// buckets of the improved one at k=1024, n=262144, target 0.95, and the
// improved count actually achieves the target per the exact expression.
CriterionResult criterion3() {
  CriterionResult result;
  result.number = 3;
  result.description =
      "bucket-count analysis at k=1024 n=262144 target 0.95: "
      "original/improved > 2 and the improved count meets the target";

  const std::uint64_t improved = buckets_improved(1024, 262144, 0.95);
  const std::uint64_t original = buckets_original(1024, 0.95);

  AlgoParams params;
  params.n = 262144;
  params.num_buckets = improved;
  params.local_k = 1;
  params.global_k = 1024;
  params.lane_multiple = 1;
  const double exact = exact_expected_recall(params).value;

  const double ratio =
      static_cast<double>(original) / static_cast<double>(improved);
  result.passed = improved == 9856 && original == 19945 && ratio > 2.0 &&
                  exact >= 0.95;
  result.detail = "improved " + std::to_string(improved) + ", original " +
                  std::to_string(original) + ", ratio " +
                  std::to_string(ratio).substr(0, 6) + ", exact recall " +
                  std::to_string(exact).substr(0, 8);
  return result;
}

}  // namespace

std::vector<CriterionResult> planner_criteria() {
  return {criterion2(), criterion3()};
}
