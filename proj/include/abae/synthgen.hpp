#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "abae/allocation.hpp"
#include "abae/core.hpp"
#include "abae/rng.hpp"
#include "abae/stratifier.hpp"

namespace abae {

enum class ValueLaw {
  TruncatedNormal,  // N(mu, sigma^2) restricted to [mu - 5 sigma, mu + 5 sigma]
  TwoPoint,         // mu +/- sigma with equal mass
};

std::string to_string(ValueLaw law);
ValueLaw value_law_from_string(const std::string& name);

struct StratumParams {
  double p = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

struct SyntheticSpec {
  std::vector<StratumParams> strata;
  std::size_t records_per_stratum = 100000;
  ValueLaw law = ValueLaw::TruncatedNormal;
  double proxy_noise = 0.0;  // 0 keeps every stratum inside its own proxy band
  RngSeed seed{42, 0};

  std::size_t k() const noexcept { return strata.size(); }

  /// Throws InvalidSpec.
  void validate() const;

  /// K = 4, p = (0.01, 0.05, 0.2, 0.5), mu = (1, 2, 3, 4), sigma = (1, 1, 2, 2),
  /// 1e5 records per stratum, truncated normal values.
  static SyntheticSpec default_suite();
};

struct SyntheticData {
  Dataset dataset;
  Strata strata;          // stratify(dataset, k)
  TruePopulation truth;   // realized finite-population moments over `strata`
};

/// Builds a dataset whose stratum j holds records_per_stratum records with
/// proxies in [j/K, (j+1)/K) (before noise) and exactly round(p_j * records)
/// matches.
SyntheticData generate(const SyntheticSpec& spec);

/// Realized p_k, mu_k and sigma_k (population, 1/B normalisation) by full
/// enumeration of every record.
TruePopulation population_truth(const Dataset& dataset, const Strata& strata);

}  // namespace abae
