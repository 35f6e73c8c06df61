#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abae/allocation.hpp"
#include "abae/bootstrap.hpp"
#include "abae/core.hpp"
#include "abae/rng.hpp"
#include "abae/sampler.hpp"
#include "abae/stratifier.hpp"

namespace abae {

struct AbaeConfig {
  std::size_t k = 5;
  std::uint64_t n1 = 100;
  std::uint64_t n2 = 2000;
  bool reuse = false;
  bool compute_ci = true;
  BootstrapConfig bootstrap;
  // Replaces the Stage-1 based allocation (experiments only).
  std::optional<std::vector<double>> fixed_fractions;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  double alpha = 0.05;
};

struct QueryReport {
  double mu_all_hat = 0.0;
  std::optional<ConfidenceInterval> ci;
  StratumEstimates stage1;     // pilot estimates (b = B^(1))
  StratumEstimates estimates;  // final estimates (b = B^(2))
  AllocationPlan allocation;
  std::size_t k = 0;
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  std::uint64_t spent = 0;
  bool reuse = false;
  RngSeed seed;
  std::vector<std::string> warnings;
};

/// Full query: stratify, Stage 1, allocate, Stage 2, estimate, bootstrap CI.
/// Uses the dataset's inline predicate column when oracle is null.
QueryReport run_abae(const Dataset& dataset, const AbaeConfig& config, RngSeed seed,
                     PredicateOracle* oracle = nullptr);

/// Same, on strata computed once by the caller.
QueryReport run_abae(const Dataset& dataset, const Strata& strata, const AbaeConfig& config,
                     RngSeed seed, PredicateOracle* oracle = nullptr);

/// Stream tags used to derive per-phase generators from the query seed.
inline constexpr std::uint64_t kStage1Stream = 1;
inline constexpr std::uint64_t kStage2Stream = 2;
inline constexpr std::uint64_t kBootstrapStream = 3;

}  // namespace abae
