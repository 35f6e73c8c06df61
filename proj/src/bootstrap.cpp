#include "abae/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "abae/error.hpp"

namespace abae {

namespace {

// A resampling pool with matched values stored first: drawing index i < b
// selects matched value i, any other index selects a non-match.
struct Pool {
  std::size_t n = 0;
  std::vector<double> matched;
};

Pool make_pool(std::span<const Reveal> a, std::span<const Reveal> b = {}) {
  Pool pool;
  pool.n = a.size() + b.size();
  for (const Reveal& r : a) {
    if (r.predicate) pool.matched.push_back(r.value);
  }
  for (const Reveal& r : b) {
    if (r.predicate) pool.matched.push_back(r.value);
  }
  return pool;
}

struct Draw {
  std::size_t hits = 0;
  double sum = 0.0;
};

Draw resample(const Pool& pool, Rng& rng) {
  Draw d;
  const std::size_t b = pool.matched.size();
  for (std::size_t i = 0; i < pool.n; ++i) {
    const auto idx = static_cast<std::size_t>(rng.below(pool.n));
    if (idx < b) {
      ++d.hits;
      d.sum += pool.matched[idx];
    }
  }
  return d;
}

}  // namespace

std::vector<double> bootstrap_statistics(const SampleStore& store, std::size_t resamples,
                                         RngSeed seed) {
  const std::size_t k = store.k();
  const bool merged = store.reuse || !store.has_stage2;
  std::vector<Pool> rate_pools(k);
  std::vector<Pool> value_pools(k);
  for (std::size_t j = 0; j < k; ++j) {
    const StratumSamples& s = store.strata[j];
    if (merged) {
      rate_pools[j] = make_pool(s.stage1_reveals, s.stage2_reveals);
    } else {
      rate_pools[j] = make_pool(s.stage1_reveals);
      value_pools[j] = make_pool(s.stage2_reveals);
    }
  }

  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const Draw rate = resample(rate_pools[j], rng);
      const double p = rate_pools[j].n > 0 ? static_cast<double>(rate.hits) / rate_pools[j].n : 0.0;
      double mu = 0.0;
      if (merged) {
        if (rate.hits > 0) mu = rate.sum / static_cast<double>(rate.hits);
      } else {
        const Draw val = resample(value_pools[j], rng);
        if (val.hits > 0) mu = val.sum / static_cast<double>(val.hits);
      }
      num += p * mu;
      den += p;
    }
    if (den > 0.0) stats.push_back(num / den);
  }
  return stats;
}

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Interval percentile_interval(std::span<const double> sorted, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  return {quantile_linear(sorted, alpha / 2.0), quantile_linear(sorted, 1.0 - alpha / 2.0)};
}

Interval bootstrap_ci(const SampleStore& store, const StratumEstimates& estimates,
                      const BootstrapConfig& cfg, RngSeed seed) {
  const double point = estimate_mu_all(estimates);
  if (cfg.resamples < 100) throw InvalidArgument("a reported interval needs at least 100 resamples");
  std::vector<double> stats = bootstrap_statistics(store, cfg.resamples, seed);
  Interval ci{point, point};
  if (!stats.empty()) {
    std::sort(stats.begin(), stats.end());
    ci = percentile_interval(stats, cfg.alpha);
  }
  ci.low = std::min(ci.low, point);
  ci.high = std::max(ci.high, point);
  if (cfg.adjustment) ci = adjust_ci(ci, estimates, cfg, cfg.c_mu);
  return ci;
}

Interval adjust_ci(Interval ci, const StratumEstimates& estimates, const BootstrapConfig& cfg,
                   double c_mu) {
  double widen = 0.0;
  for (std::size_t k = 0; k < estimates.k(); ++k) {
    if (estimates.b[k] < cfg.min_stratum_samples) widen += estimates.p_hat[k] * c_mu;
  }
  return {ci.low - widen, ci.high + widen};
}

}  // namespace abae
