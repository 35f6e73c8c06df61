#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abae/allocation.hpp"
#include "abae/bootstrap.hpp"
#include "abae/rng.hpp"
#include "abae/synthgen.hpp"

namespace abae {

enum class EstimatorKind {
  Abae,               // two-stage, no sample reuse
  AbaeReuse,          // two-stage, Stage-1 samples merged into Stage 2
  UniformAllocation,  // two-stage with Stage 2 split evenly
  OracleOptimal,      // two-stage with Stage 2 split by the true T*
  OracleConditioned,  // exactly ceil(p_k T*_k N) matched draws, true weights
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct Budget {
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;

  std::uint64_t total(std::size_t k) const noexcept { return k * n1 + n2; }
  /// N2 >= N1^(3/4), the side condition of the MSE rate.
  bool side_condition_ok() const;
};

struct ExperimentPlan {
  SyntheticSpec spec = SyntheticSpec::default_suite();
  std::vector<Budget> budgets;
  std::size_t trials = 1000;
  std::vector<EstimatorKind> estimators{EstimatorKind::Abae};
  RngSeed seed{7, 0};
};

struct MseCell {
  EstimatorKind estimator = EstimatorKind::Abae;
  Budget budget;
  std::uint64_t n_total = 0;
  std::size_t trials = 0;
  std::size_t failed = 0;        // NoPositiveSamples, excluded from the MSE
  double mse = 0.0;
  double mse_se = 0.0;
  std::size_t typical = 0;       // trials on the Stage-1 good event
  double mse_typical = 0.0;
  double mse_typical_se = 0.0;
  double mean_spent = 0.0;
  double e_star = 0.0;           // E*(pop, N) at this budget
  bool side_condition_ok = true;
  std::vector<double> sq_errors;  // per trial, NaN for failed trials
};

struct ExperimentResult {
  std::size_t k = 0;
  TruePopulation truth;
  std::vector<MseCell> cells;
  std::vector<std::string> warnings;

  const MseCell& cell(EstimatorKind estimator, std::size_t budget_index) const;
  std::vector<const MseCell*> cells_for(EstimatorKind estimator) const;
};

/// Runs `trials` queries per (budget, estimator) and aggregates squared error
/// against the ground truth. Trial t of budget b uses the stream
/// seed.child(b).child(t) for every estimator, so estimators are paired.
ExperimentResult run_mse(const ExperimentPlan& plan);
ExperimentResult run_mse(const ExperimentPlan& plan, const SyntheticData& data);

struct PairedComparison {
  double mean_diff = 0.0;  // mean of (a - b) squared errors
  double se = 0.0;
  std::size_t pairs = 0;
};

/// Paired difference of two cells that share trial streams.
PairedComparison compare_paired(const MseCell& a, const MseCell& b);

enum class RateAxis { N1, N2, Total };

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// OLS of log(y) on log(x). Needs >= 4 points spanning >= 8x in x, else
/// throws InsufficientPoints.
RateFit fit_power_law(std::span<const double> x, std::span<const double> y);

RateFit fit_rate(const ExperimentResult& result, EstimatorKind estimator, RateAxis axis);

/// Two-sided 95% band half-width for a fitted slope (Student t, n - 2 dof).
double slope_band(const RateFit& fit);

struct CoverageRow {
  EstimatorKind estimator = EstimatorKind::Abae;
  Budget budget;
  std::size_t trials = 0;
  std::size_t failed = 0;
  double coverage = 0.0;
  double se = 0.0;
  double median_width = 0.0;
};

/// Fraction of trials whose bootstrap CI contains mu_all, per budget and per
/// two-stage estimator in the plan (oracle-conditioned is skipped). Needs at
/// least 300 trials.
std::vector<CoverageRow> run_coverage(const ExperimentPlan& plan, const BootstrapConfig& cfg);
std::vector<CoverageRow> run_coverage(const ExperimentPlan& plan, const BootstrapConfig& cfg,
                                      const SyntheticData& data);

}  // namespace abae
