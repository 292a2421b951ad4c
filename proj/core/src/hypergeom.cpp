#include "atk/hypergeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace atk {

double log_choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

void Hypergeometric::validate() const {
  if (population == 0)
    throw std::invalid_argument("hypergeometric: population must be >= 1");
  if (successes > population)
    throw std::invalid_argument("hypergeometric: successes > population");
  if (draws > population)
    throw std::invalid_argument("hypergeometric: draws > population");
}

std::uint64_t Hypergeometric::support_min() const {
  const std::uint64_t misses = population - successes;
  return draws > misses ? draws - misses : 0;
}

std::uint64_t Hypergeometric::support_max() const {
  return std::min(successes, draws);
}

double Hypergeometric::mean() const {
  return static_cast<double>(draws) * static_cast<double>(successes) /
         static_cast<double>(population);
}

double Hypergeometric::stddev() const {
  if (population <= 1) return 0.0;
  const double n = static_cast<double>(population);
  const double p = static_cast<double>(successes) / n;
  const double s = static_cast<double>(draws);
  const double var = s * p * (1.0 - p) * (n - s) / (n - 1.0);
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

double Hypergeometric::log_pmf(std::uint64_t r) const {
  if (r < support_min() || r > support_max())
    return -std::numeric_limits<double>::infinity();
  return log_choose(successes, r) +
         log_choose(population - successes, draws - r) -
         log_choose(population, draws);
}

double Hypergeometric::pmf(std::uint64_t r) const {
  return std::exp(log_pmf(r));
}

HypergeometricSampler::HypergeometricSampler(const Hypergeometric& dist) {
  dist.validate();
  const std::uint64_t smin = dist.support_min();
  const std::uint64_t smax = dist.support_max();

  // 60-sigma window around the mean: the truncated mass is below anything a
  // double can resolve, so draws landing past the table end (u >= cdf back)
  // are clamped to the last window point.
  const double mu = dist.mean();
  const double sigma = dist.stddev();
  const double span = 60.0 * sigma + 2.0;
  std::uint64_t lo = smin, hi = smax;
  if (mu - span > static_cast<double>(smin))
    lo = static_cast<std::uint64_t>(mu - span);
  if (mu + span < static_cast<double>(smax))
    hi = static_cast<std::uint64_t>(mu + span) + 1;
  if (hi < lo) hi = lo;

  lo_ = lo;
  cdf_.resize(static_cast<std::size_t>(hi - lo + 1));

  const double n = static_cast<double>(dist.population);
  const double k = static_cast<double>(dist.successes);
  const double s = static_cast<double>(dist.draws);

  double p = std::exp(dist.log_pmf(lo));
  double cum = 0.0;
  for (std::uint64_t r = lo; r <= hi; ++r) {
    cum += p;
    cdf_[static_cast<std::size_t>(r - lo)] = cum;
    const double rr = static_cast<double>(r);
    const double num = (k - rr) * (s - rr);
    const double den = (rr + 1.0) * (n - k - s + rr + 1.0);
    p = den > 0.0 ? p * (num / den) : 0.0;
  }
}

std::uint64_t HypergeometricSampler::sample(Xoshiro256pp& rng) const {
  const double u = rng.next_double();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return lo_ + cdf_.size() - 1;
  return lo_ + static_cast<std::uint64_t>(it - cdf_.begin());
}

}  // namespace atk
