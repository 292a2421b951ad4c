#include "atk/recall.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "atk/hypergeom.hpp"
#include "atk/rng.hpp"

namespace atk {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Compensated (Kahan) accumulator for the positive term sums.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;

  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// E[max(0, X - local_k)] for X ~ Hypergeometric(n, k, s): the expected
// number of top-k elements beyond the local_k kept, in one bucket of size s.
// Log-space terms, compensated sum, and early exit once past the mode when
// terms stop contributing.
double bucket_excess_mean(std::uint64_t n, std::uint64_t k, std::uint64_t s,
                          std::uint32_t local_k) {
  const Hypergeometric dist{n, k, s};
  const std::uint64_t rmax = dist.support_max();
  if (local_k >= rmax) return 0.0;
  const std::uint64_t rmin = std::max<std::uint64_t>(local_k + 1,
                                                     dist.support_min());

  const double lden = log_choose(n, s);
  // The summand (r - local_k) * pmf(r) decays super-exponentially past the
  // pmf mode; stop once terms are below 1 ulp of the accumulated sum.
  const double mode = (static_cast<double>(s) + 1.0) *
                      (static_cast<double>(k) + 1.0) /
                      (static_cast<double>(n) + 2.0);
  KahanSum acc;
  for (std::uint64_t r = rmin; r <= rmax; ++r) {
    const double lterm = log_choose(k, r) + log_choose(n - k, s - r) - lden;
    const double term = static_cast<double>(r - local_k) * std::exp(lterm);
    acc.add(term);
    if (static_cast<double>(r) > mode + 2.0 && term <= acc.sum * 1e-18)
      break;
  }
  return acc.sum;
}

void require_local_k1(const AlgoParams& params, const char* what) {
  if (params.local_k != 1)
    throw std::invalid_argument(std::string(what) + " requires local_k == 1");
}

}  // namespace

std::string to_string(RecallMethod method) {
  switch (method) {
    case RecallMethod::exact: return "exact";
    case RecallMethod::monte_carlo: return "monte_carlo";
    case RecallMethod::bound_improved: return "bound_improved";
    case RecallMethod::bound_original: return "bound_original";
    case RecallMethod::bound_quartic: return "bound_quartic";
  }
  return "unknown";
}

RecallEstimate exact_expected_recall(const AlgoParams& params) {
  params.validate_analysis();
  const std::uint64_t n = params.n;
  const std::uint64_t b = params.num_buckets;
  const std::uint64_t k = params.global_k;

  // b - (n mod b) buckets of size floor(n/b), n mod b of size floor + 1;
  // E[lost] adds up by linearity over the per-bucket marginals.
  const std::uint64_t s_lo = n / b;
  const std::uint64_t count_hi = n % b;
  const std::uint64_t count_lo = b - count_hi;

  double excess = 0.0;
  if (count_lo > 0)
    excess += static_cast<double>(count_lo) *
              bucket_excess_mean(n, k, s_lo, params.local_k);
  if (count_hi > 0)
    excess += static_cast<double>(count_hi) *
              bucket_excess_mean(n, k, s_lo + 1, params.local_k);

  RecallEstimate est;
  est.method = RecallMethod::exact;
  est.value = clamp01(1.0 - excess / static_cast<double>(k));
  return est;
}

RecallEstimate mc_expected_recall(const AlgoParams& params,
                                  std::uint64_t trials, std::uint64_t seed) {
  params.validate_analysis();
  if (trials < 2)
    throw std::invalid_argument("mc_expected_recall needs trials >= 2");

  const std::uint64_t n = params.n;
  const std::uint64_t b = params.num_buckets;
  const std::uint64_t k = params.global_k;
  const std::uint64_t s_lo = n / b;
  const std::uint64_t count_hi = n % b;
  const std::uint64_t count_lo = b - count_hi;
  const double kd = static_cast<double>(k);
  const std::uint64_t kp = params.local_k;

  // One bucket occupancy drawn per distinct bucket size and scaled by the
  // bucket count of that size; with b | n this is the single-draw estimator
  // 1 - b * max(0, X - local_k) / k.
  const HypergeometricSampler lo_sampler(Hypergeometric{n, k, s_lo});
  const bool has_hi = count_hi > 0;
  const HypergeometricSampler hi_sampler(
      has_hi ? Hypergeometric{n, k, s_lo + 1} : Hypergeometric{n, k, s_lo});

  Xoshiro256pp rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    double excess = 0.0;
    if (count_lo > 0) {
      const std::uint64_t x = lo_sampler.sample(rng);
      if (x > kp) excess += static_cast<double>(count_lo) *
                            static_cast<double>(x - kp);
    }
    if (has_hi) {
      const std::uint64_t x = hi_sampler.sample(rng);
      if (x > kp) excess += static_cast<double>(count_hi) *
                            static_cast<double>(x - kp);
    }
    const double recall = 1.0 - excess / kd;
    const double delta = recall - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (recall - mean);
  }

  RecallEstimate est;
  est.method = RecallMethod::monte_carlo;
  est.value = mean;
  est.trials = trials;
  const double var = m2 / static_cast<double>(trials - 1);
  est.std_error = std::sqrt(std::max(0.0, var) /
                            static_cast<double>(trials));
  return est;
}

RecallEstimate mc_expected_recall_adaptive(const AlgoParams& params,
                                           std::uint64_t seed) {
  std::uint64_t trials = 4096;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const RecallEstimate est =
        mc_expected_recall(params, trials, derive_seed(seed, attempt));
    if (3.0 * est.std_error.value() <= 0.005) return est;
    trials *= 2;
  }
}

RecallEstimate recall_bound_improved(const AlgoParams& params) {
  params.validate_analysis();
  require_local_k1(params, "recall_bound_improved");
  const double k = static_cast<double>(params.global_k);
  const double v = 1.0 - 0.5 * k * (1.0 / static_cast<double>(params.num_buckets) -
                                    1.0 / static_cast<double>(params.n));
  RecallEstimate est;
  est.method = RecallMethod::bound_improved;
  est.value = clamp01(v);
  return est;
}

RecallEstimate recall_bound_original(const AlgoParams& params) {
  params.validate_analysis();
  require_local_k1(params, "recall_bound_original");
  const double v = 1.0 - static_cast<double>(params.global_k) /
                             static_cast<double>(params.num_buckets);
  RecallEstimate est;
  est.method = RecallMethod::bound_original;
  est.value = clamp01(v);
  return est;
}

RecallEstimate recall_bound_quartic(const AlgoParams& params) {
  params.validate_analysis();
  require_local_k1(params, "recall_bound_quartic");
  const double n = static_cast<double>(params.n);
  const double b = static_cast<double>(params.num_buckets);
  const double k = static_cast<double>(params.global_k);
  const double s = n / b;  // real-valued bucket size when b does not divide n
  const double p = k / n;

  // generalized binomials C(s, i), zeroed for s < i
  const double c2 = s < 2.0 ? 0.0 : s * (s - 1.0) / 2.0;
  const double c3 = s < 3.0 ? 0.0 : s * (s - 1.0) * (s - 2.0) / 6.0;
  const double c4 = s < 4.0 ? 0.0 : s * (s - 1.0) * (s - 2.0) * (s - 3.0) / 24.0;

  const double miss = c2 * p * p - c3 * p * p * p + c4 * p * p * p * p;
  RecallEstimate est;
  est.method = RecallMethod::bound_quartic;
  est.value = clamp01(1.0 - (b / k) * miss);
  return est;
}

std::uint64_t buckets_improved(std::uint64_t k, std::uint64_t n,
                               double recall_target) {
  if (k == 0 || k > n)
    throw std::invalid_argument("buckets_improved requires 1 <= k <= n");
  if (!(recall_target > 0.0) || !(recall_target < 1.0))
    throw std::invalid_argument("recall_target must be in (0, 1)");
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const double b = kd / (2.0 * (1.0 - recall_target) + kd / nd);
  const double up = std::ceil(b);
  return up < 1.0 ? 1 : static_cast<std::uint64_t>(up);
}

std::uint64_t buckets_original(std::uint64_t k, double recall_target) {
  if (k < 2)
    throw std::invalid_argument("buckets_original requires k >= 2");
  if (!(recall_target > 0.0) || !(recall_target < 1.0))
    throw std::invalid_argument("recall_target must be in (0, 1)");
  // 1 - r^(1/(k-1)) via expm1 for precision at large k
  const double denom =
      -std::expm1(std::log(recall_target) / static_cast<double>(k - 1));
  return static_cast<std::uint64_t>(std::ceil(1.0 / denom));
}

std::uint64_t buckets_original_approx(std::uint64_t k, double recall_target) {
  if (k < 2)
    throw std::invalid_argument("buckets_original_approx requires k >= 2");
  if (!(recall_target > 0.0) || !(recall_target < 1.0))
    throw std::invalid_argument("recall_target must be in (0, 1)");
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(k - 1) / (1.0 - recall_target)));
}

}  // namespace atk
