#include "atk/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "atk/rng.hpp"

namespace atk {

namespace {

// Exact recall stays cheap while the excess sum is short.
constexpr std::uint64_t kExactRevalidationLimit = 10000;

bool exact_is_cheap(std::uint64_t n, std::uint64_t k, std::uint64_t b) {
  return std::min(k, n / b) <= kExactRevalidationLimit;
}

struct SweepCandidate {
  std::uint32_t local_k = 0;
  std::uint64_t num_buckets = 0;
  RecallEstimate recall;

  std::uint64_t elements() const {
    return num_buckets * static_cast<std::uint64_t>(local_k);
  }
};

}  // namespace

void PlanRequest::validate() const {
  if (n == 0) throw std::invalid_argument("plan: n must be >= 1");
  if (k == 0 || k > n)
    throw std::invalid_argument("plan: k must satisfy 1 <= k <= n");
  if (k > 0xffffffffull)
    throw std::invalid_argument("plan: k exceeds the 32-bit result size");
  if (!(recall_target > 0.0) || !(recall_target < 1.0))
    throw std::invalid_argument("plan: recall_target must be in (0, 1)");
  if (allowed_local_k.empty())
    throw std::invalid_argument("plan: allowed_local_k must not be empty");
  for (const auto kp : allowed_local_k)
    if (kp == 0)
      throw std::invalid_argument("plan: allowed_local_k entries must be >= 1");
  if (lane_multiple == 0)
    throw std::invalid_argument("plan: lane_multiple must be >= 1");
}

AlgoParams PlanResult::params(const PlanRequest& req) const {
  AlgoParams p;
  p.n = req.n;
  p.num_buckets = num_buckets;
  p.local_k = local_k;
  p.global_k = static_cast<std::uint32_t>(req.k);
  p.lane_multiple = req.lane_multiple;
  return p;
}

std::vector<std::uint64_t> legal_bucket_counts(std::uint64_t n,
                                               std::uint64_t lane_multiple) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (lane_multiple == 0)
    throw std::invalid_argument("lane_multiple must be >= 1");
  if (n % lane_multiple != 0) return {};

  // Divisors of n that are multiples of L are exactly L * (divisors of n/L).
  const std::uint64_t m = n / lane_multiple;
  std::vector<std::uint64_t> divisors;
  for (std::uint64_t d = 1; d * d <= m; ++d) {
    if (m % d != 0) continue;
    divisors.push_back(d);
    if (d != m / d) divisors.push_back(m / d);
  }
  for (auto& d : divisors) d *= lane_multiple;
  std::sort(divisors.rbegin(), divisors.rend());
  return divisors;
}

PlanResult select_parameters(const PlanRequest& req,
                             std::vector<PlanCandidate>* trace) {
  req.validate();

  const bool warn = req.recall_target >= 0.995;
  const auto buckets = legal_bucket_counts(req.n, req.lane_multiple);

  std::vector<std::uint32_t> kps(req.allowed_local_k);
  std::sort(kps.begin(), kps.end());
  kps.erase(std::unique(kps.begin(), kps.end()), kps.end());

  std::vector<SweepCandidate> passing;
  for (const auto kp : kps) {
    const std::uint64_t kp_seed = derive_seed(req.seed, kp);
    for (const auto b : buckets) {
      if (b * kp < req.k) break;  // candidate pool can no longer cover k

      AlgoParams params;
      params.n = req.n;
      params.num_buckets = b;
      params.local_k = kp;
      params.global_k = static_cast<std::uint32_t>(req.k);
      params.lane_multiple = req.lane_multiple;

      const RecallEstimate est =
          mc_expected_recall_adaptive(params, derive_seed(kp_seed, b));
      const bool passed = est.value >= req.recall_target;
      if (trace) trace->push_back({kp, b, est, passed});
      if (!passed) break;  // recall only degrades as buckets shrink
      passing.push_back({kp, b, est});
    }
  }

  if (passing.empty())
    throw NoFeasibleConfigError(
        "no legal (local_k, num_buckets) configuration meets the recall "
        "target");

  std::stable_sort(passing.begin(), passing.end(),
                   [](const SweepCandidate& a, const SweepCandidate& b) {
                     if (a.elements() != b.elements())
                       return a.elements() < b.elements();
                     return a.local_k < b.local_k;
                   });

  for (const auto& cand : passing) {
    RecallEstimate est = cand.recall;
    if (exact_is_cheap(req.n, req.k, cand.num_buckets)) {
      AlgoParams params;
      params.n = req.n;
      params.num_buckets = cand.num_buckets;
      params.local_k = cand.local_k;
      params.global_k = static_cast<std::uint32_t>(req.k);
      params.lane_multiple = req.lane_multiple;
      est = exact_expected_recall(params);
      if (est.value < req.recall_target) continue;  // MC false-accept
    }
    PlanResult result;
    result.local_k = cand.local_k;
    result.num_buckets = cand.num_buckets;
    result.num_elements = cand.elements();
    result.estimated_recall = est;
    result.high_target_warning = warn;
    return result;
  }

  throw NoFeasibleConfigError(
      "every MC-passing configuration failed exact re-validation");
}

// ---- reduction-factor grid ----------------------------------------------

GridSpec default_grid_spec() {
  GridSpec spec;
  spec.k_fractions = {0.001, 0.00390625, 0.005, 0.01,
                      0.02,  0.05,       0.10,  0.25};
  for (int p = 8; p <= 32; ++p)
    spec.n_values.push_back(1ull << p);
  spec.recall_target = 0.95;
  spec.kprime_max = 4;
  spec.lane_multiple = kDefaultLaneMultiple;
  return spec;
}

namespace {

struct ExactPlan {
  std::uint64_t num_buckets = 0;
  std::uint32_t local_k = 0;
  std::uint64_t elements() const {
    return num_buckets * static_cast<std::uint64_t>(local_k);
  }
};

// select_parameters' sweep with the exact estimator (deterministic, cheap at
// the bucket counts the sweep visits). For fixed local_k the best passing
// bucket count is the smallest one, so the sweep keeps updating until the
// recall break.
std::optional<ExactPlan> plan_exact(std::uint64_t n, std::uint64_t k,
                                    double target, std::uint32_t kprime_max,
                                    std::uint32_t lane_multiple) {
  if (k > 0xffffffffull) return std::nullopt;  // beyond the 32-bit result size
  const auto buckets = legal_bucket_counts(n, lane_multiple);
  std::optional<ExactPlan> best;
  for (std::uint32_t kp = 1; kp <= kprime_max; ++kp) {
    for (const auto b : buckets) {
      if (b * kp < k) break;
      AlgoParams params;
      params.n = n;
      params.num_buckets = b;
      params.local_k = kp;
      params.global_k = static_cast<std::uint32_t>(k);
      params.lane_multiple = lane_multiple;
      if (exact_expected_recall(params).value < target) break;
      const ExactPlan plan{b, kp};
      if (!best || plan.elements() < best->elements() ||
          (plan.elements() == best->elements() && kp < best->local_k))
        best = plan;
    }
  }
  return best;
}

}  // namespace

std::vector<GridCell> reduction_factor_grid(const GridSpec& spec) {
  if (spec.k_fractions.empty() || spec.n_values.empty())
    throw std::invalid_argument("grid: fractions and n values required");
  if (!(spec.recall_target > 0.0) || !(spec.recall_target < 1.0))
    throw std::invalid_argument("grid: recall_target must be in (0, 1)");
  if (spec.kprime_max == 0)
    throw std::invalid_argument("grid: kprime_max must be >= 1");
  if (spec.lane_multiple == 0)
    throw std::invalid_argument("grid: lane_multiple must be >= 1");
  for (const double f : spec.k_fractions)
    if (!(f > 0.0) || !(f <= 1.0))
      throw std::invalid_argument("grid: fractions must be in (0, 1]");

  std::vector<GridCell> cells;
  cells.reserve(spec.n_values.size() * spec.k_fractions.size());
  for (const auto n_req : spec.n_values) {
    for (const double frac : spec.k_fractions) {
      GridCell cell;
      cell.n_requested = n_req;
      cell.k_fraction = frac;
      // round down to the lane grid; cells below one lane are infeasible
      cell.n_used = n_req - n_req % spec.lane_multiple;
      if (cell.n_used == 0) {
        cells.push_back(cell);
        continue;
      }
      const double kd = frac * static_cast<double>(cell.n_used);
      std::uint64_t k = static_cast<std::uint64_t>(std::llround(kd));
      k = std::max<std::uint64_t>(1, std::min(k, cell.n_used));
      cell.k = k;

      const auto baseline =
          plan_exact(cell.n_used, k, spec.recall_target, 1,
                     spec.lane_multiple);
      const auto generalized =
          plan_exact(cell.n_used, k, spec.recall_target, spec.kprime_max,
                     spec.lane_multiple);
      if (baseline) {
        cell.baseline_elements = baseline->elements();
        cell.baseline_buckets = baseline->num_buckets;
      }
      if (generalized) {
        cell.generalized_elements = generalized->elements();
        cell.generalized_buckets = generalized->num_buckets;
        cell.generalized_local_k = generalized->local_k;
      }
      if (baseline && generalized)
        cell.reduction_factor =
            static_cast<double>(baseline->elements()) /
            static_cast<double>(generalized->elements());
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace atk
