#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "atk/params.hpp"

namespace atk {

enum class RecallMethod {
  exact,
  monte_carlo,
  bound_improved,
  bound_original,
  bound_quartic,
};

std::string to_string(RecallMethod method);

struct RecallEstimate {
  double value = 0.0;
  RecallMethod method = RecallMethod::exact;
  std::optional<double> std_error;       // monte_carlo only
  std::optional<std::uint64_t> trials;   // monte_carlo only
};

// Expected recall of the two-stage reduction under a uniformly random
// placement of the top global_k values:
//
//   E[recall] = 1 - (1/K) * sum_b E[max(0, X_b - local_k)],
//   X_b ~ Hypergeometric(n, global_k, size of bucket b).
//
// When num_buckets divides n every bucket has size n/B and this reduces to
// the closed-form sum over r = local_k+1 .. min(K, n/B); otherwise n mod B
// buckets have size ceil(n/B) and the rest floor(n/B). The sum is evaluated
// in log space with compensated summation; an empty summation range yields
// exactly 1.0. Uses validate_analysis().
RecallEstimate exact_expected_recall(const AlgoParams& params);

// Monte Carlo estimate of the same quantity. Each trial draws one bucket
// occupancy per distinct bucket size and applies the excess identity, so
// for divisible n a trial is 1 - B*max(0, X - local_k)/K. Reported std_error
// is the sample standard error (ddof = 1). trials >= 2 required.
RecallEstimate mc_expected_recall(const AlgoParams& params,
                                  std::uint64_t trials, std::uint64_t seed);

// Doubles the trial count (fresh substream per attempt) starting from 4096
// until 3 * std_error <= 0.005; the returned estimate satisfies that bound.
RecallEstimate mc_expected_recall_adaptive(const AlgoParams& params,
                                           std::uint64_t seed);

// Lower bound for local_k == 1 (throws otherwise):
//   E[recall] >= 1 - (K/2) * (1/B - 1/n),   clamped to [0, 1].
// Exact at B == n.
RecallEstimate recall_bound_improved(const AlgoParams& params);

// The earlier single-candidate bound, local_k == 1: E[recall] >= 1 - K/B,
// clamped to [0, 1].
RecallEstimate recall_bound_original(const AlgoParams& params);

// Quartic refinement for local_k == 1 with s = n/B (real-valued when B does
// not divide n) and p = K/n:
//   E[recall] ~= 1 - (B/K) * [C(s,2) p^2 - C(s,3) p^3 + C(s,4) p^4],
// generalized binomial terms zeroed for s < i, clamped to [0, 1]. Within
// 1e-3 of exact while K/B <= 0.589; for B < ~K/4 it can exceed the exact
// value (truncation error changes sign), so it is a cheap approximation
// there, not a bound.
RecallEstimate recall_bound_quartic(const AlgoParams& params);

// Smallest bucket count whose improved bound meets recall_target at
// local_k == 1:  B = ceil(K / (2(1 - r) + K/n)), clamped to >= 1.
// The bound (and hence the guarantee exact >= recall_target) is derived for
// uniform bucket sizes; when the returned B does not divide n the mixed
// floor/ceil bucket sizes can pull the exact value a hair below the target
// (observed within ~2e-3). Sweep divisor bucket counts, as the planner does,
// when the target is hard. Requires 1 <= k <= n and 0 < recall_target < 1.
std::uint64_t buckets_improved(std::uint64_t k, std::uint64_t n,
                               double recall_target);

// Bucket count prescribed by the earlier analysis (k >= 2):
//   B = ceil(1 / (1 - r^(1/(k-1)))).
std::uint64_t buckets_original(std::uint64_t k, double recall_target);

// Its widely quoted approximation B = ceil((k-1) / (1-r)).
std::uint64_t buckets_original_approx(std::uint64_t k, double recall_target);

}  // namespace atk
