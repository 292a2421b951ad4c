#pragma once

#include <cstdint>
#include <vector>

#include "atk/rng.hpp"

namespace atk {

// log C(n, k); -inf outside 0 <= k <= n. Computed with lgamma.
double log_choose(std::uint64_t n, std::uint64_t k);

// Hypergeometric distribution: number of marked elements drawn when `draws`
// elements are taken without replacement from a population of `population`
// elements containing `successes` marked ones.
struct Hypergeometric {
  std::uint64_t population = 0;  // N
  std::uint64_t successes = 0;   // K
  std::uint64_t draws = 0;       // s

  void validate() const;  // successes <= population, draws <= population

  std::uint64_t support_min() const;
  std::uint64_t support_max() const;
  double mean() const;
  double stddev() const;
  double log_pmf(std::uint64_t r) const;
  double pmf(std::uint64_t r) const;
};

// Inverse-CDF sampler. The pmf is evaluated once over the effective support
// window (mean +/- 60 sigma, clipped to the support; truncated tail mass is
// far below double noise) with a log-gamma anchor at the window start and
// the ratio recurrence
//
//   p(r+1) = p(r) * (K - r)(s - r) / ((r + 1)(N - K - s + r + 1))
//
// across the window. Draws binary-search the prefix sums, which selects the
// same r as walking the pmf left-to-right until the cumulative sum exceeds
// the uniform draw.
class HypergeometricSampler {
 public:
  explicit HypergeometricSampler(const Hypergeometric& dist);

  std::uint64_t sample(Xoshiro256pp& rng) const;

  std::uint64_t window_min() const { return lo_; }
  std::uint64_t window_max() const { return lo_ + cdf_.size() - 1; }
  double cdf_back() const { return cdf_.back(); }

 private:
  std::uint64_t lo_ = 0;
  std::vector<double> cdf_;
};

}  // namespace atk
