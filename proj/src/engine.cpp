#include "abae/engine.hpp"

#include "abae/error.hpp"

namespace abae {

QueryReport run_abae(const Dataset& dataset, const AbaeConfig& config, RngSeed seed,
                     PredicateOracle* oracle) {
  if (config.k < 1 || config.k > dataset.size()) {
    throw InvalidK("k must be in [1, " + std::to_string(dataset.size()) + "], got " +
                   std::to_string(config.k));
  }
  return run_abae(dataset, stratify(dataset, config.k), config, seed, oracle);
}

QueryReport run_abae(const Dataset& dataset, const Strata& strata, const AbaeConfig& config,
                     RngSeed seed, PredicateOracle* oracle) {
  if (config.n1 < 1 || config.n2 < 1) throw InvalidArgument("n1 and n2 must be positive");
  if (strata.k() != config.k) throw InvalidK("strata count does not match k");
  if (oracle == nullptr && !dataset.has_predicate()) {
    throw InvalidArgument("dataset has no predicate column; an external oracle is required");
  }

  InlineOracle inline_oracle;
  PredicateOracle& backend = oracle != nullptr ? *oracle : inline_oracle;
  BudgetLedger ledger(config.k, config.n1, config.n2);
  OracleAccess access(dataset, ledger, backend);

  QueryReport report;
  report.k = config.k;
  report.n1 = config.n1;
  report.n2 = config.n2;
  report.reuse = config.reuse;
  report.seed = seed;

  Stage1Result s1 = stage1(strata, access, config.n1, seed.child(kStage1Stream));
  report.stage1 = s1.estimates;
  report.warnings = std::move(s1.warnings);

  if (config.fixed_fractions) {
    report.allocation = plan_from_fractions(*config.fixed_fractions, config.n2);
  } else {
    report.allocation = empirical_allocation(s1.estimates, config.n2);
    if (report.allocation.degenerate) {
      report.warnings.push_back(
          "DegenerateAllocation: every sqrt(p_hat)*sigma_hat is zero, Stage 2 split uniformly");
    }
  }

  report.estimates = stage2(strata, access, report.allocation, s1.store, s1.estimates,
                            config.reuse, seed.child(kStage2Stream), report.warnings);
  report.mu_all_hat = estimate_mu_all(report.estimates);

  if (config.compute_ci) {
    const Interval ci =
        bootstrap_ci(s1.store, report.estimates, config.bootstrap, seed.child(kBootstrapStream));
    report.ci = ConfidenceInterval{ci.low, ci.high, config.bootstrap.alpha};
  }
  report.spent = ledger.spent();
  return report;
}

}  // namespace abae
