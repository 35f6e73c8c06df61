#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "abae/core.hpp"
#include "abae/rng.hpp"
#include "abae/sampler.hpp"

namespace abae {

struct BootstrapConfig {
  std::size_t resamples = 1000;
  double alpha = 0.05;
  std::uint64_t min_stratum_samples = 30;  // strata with fewer matches get widened
  bool adjustment = false;
  double c_mu = 0.0;                       // bound on E|X| used by the widening
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Recomputes the estimator on `resamples` per-stratum resamples of the drawn
/// (predicate, value) pairs. Under reuse each stratum's pool is the merged
/// Stage-1 + Stage-2 draws; otherwise p_hat is resampled from the Stage-1
/// pool and mu_hat from the Stage-2 pool. Resamples in which every stratum
/// loses all its matches are undefined and omitted, so the result may be
/// shorter than `resamples`. Output is in resample order (unsorted).
std::vector<double> bootstrap_statistics(const SampleStore& store, std::size_t resamples,
                                         RngSeed seed);

/// Linear interpolation between order statistics: index h = (n - 1) q.
double quantile_linear(std::span<const double> sorted, double q);

/// (alpha/2, 1 - alpha/2) quantiles of an ascending sample.
Interval percentile_interval(std::span<const double> sorted, double alpha);

/// Percentile bootstrap interval for mu_all, widened if needed so it contains
/// the point estimate, then passed through adjust_ci when cfg.adjustment is set.
/// Throws NoPositiveSamples when the estimate itself is undefined and
/// InvalidArgument when cfg.resamples < 100.
Interval bootstrap_ci(const SampleStore& store, const StratumEstimates& estimates,
                      const BootstrapConfig& cfg, RngSeed seed);

/// Widens both ends by sum of p_hat_k * c_mu over strata with fewer than
/// cfg.min_stratum_samples matched samples.
Interval adjust_ci(Interval ci, const StratumEstimates& estimates, const BootstrapConfig& cfg,
                   double c_mu);

}  // namespace abae
