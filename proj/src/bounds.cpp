#include "abae/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abae/engine.hpp"
#include "abae/error.hpp"
#include "abae/parallel.hpp"

namespace abae {

namespace {

double log_inv(double level) {
  if (!(level > 0.0 && level <= 1.0)) throw InvalidArgument("failure probability must be in (0, 1]");
  return std::log(1.0 / level);
}

void require_n(std::uint64_t n, const char* what) {
  if (n < 1) throw InvalidArgument(std::string(what) + " must be positive");
}

void require_rate(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("rate must lie in [0, 1]");
}

// Absolute slack for comparing a realized quantity against a bound.
constexpr double kTol = 1e-12;

}  // namespace

double p_upper_bound(double p, std::uint64_t n1, double delta) {
  require_rate(p);
  require_n(n1, "n1");
  return p + std::sqrt(2.0 * log_inv(delta) * p / static_cast<double>(n1));
}

double p_lower_bound(double p, std::uint64_t n1, double delta) {
  require_rate(p);
  require_n(n1, "n1");
  return std::max(0.0, p - std::sqrt(2.0 * log_inv(delta) * p / static_cast<double>(n1)));
}

std::vector<WeightInterval> weight_bounds(std::span<const double> p, std::uint64_t n1,
                                          double delta) {
  require_n(n1, "n1");
  const double l = log_inv(delta);
  double p_all = 0.0;
  double slack = 0.0;
  std::vector<double> r(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    require_rate(p[k]);
    r[k] = std::sqrt(2.0 * l * p[k] / static_cast<double>(n1));
    p_all += p[k];
    slack += r[k];
  }
  std::vector<WeightInterval> out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k].low = std::max(0.0, (p[k] - r[k]) / (p_all + slack));
    const double den = p_all - slack;
    out[k].high = den > 0.0 ? (p[k] + r[k]) / den : std::numeric_limits<double>::infinity();
  }
  return out;
}

double b1_lower_bound(double p, std::uint64_t n1, double delta) {
  require_rate(p);
  require_n(n1, "n1");
  const double m = p * static_cast<double>(n1);
  return std::max(0.0, m - std::sqrt(2.0 * log_inv(delta) * m));
}

double sigma2_halfwidth(std::uint64_t b1, double delta, double c_mu4) {
  if (b1 < 2) {
    throw InsufficientMatches("variance bound needs at least two matches, got " +
                              std::to_string(b1));
  }
  return std::sqrt(8.0 * log_inv(delta) * c_mu4 / static_cast<double>(b1));
}

double psigma_upper_bound(double p, double sigma, std::uint64_t n1, double c_sigma) {
  require_rate(p);
  require_n(n1, "n1");
  return std::sqrt(p) * sigma + std::sqrt(2.0 / static_cast<double>(n1)) * c_sigma;
}

double p_star(std::uint64_t n1, double delta) {
  require_n(n1, "n1");
  const double l = log_inv(delta);
  return (2.0 * l + 2.0 * std::sqrt(l) + 2.0) / static_cast<double>(n1);
}

double b2_lower_bound(double p, double t_hat, std::uint64_t n2, double gamma) {
  const double m = p * t_hat * static_cast<double>(n2);
  if (!(m > 0.0)) throw InvalidArgument("b2_lower_bound needs p * t_hat * n2 > 0");
  return std::max(0.0, m * (1.0 - std::sqrt(2.0 * log_inv(gamma) / m)));
}

Lemma lemma_from_int(int id) {
  switch (id) {
    case 1: return Lemma::PUpper;
    case 2: return Lemma::PLower;
    case 3: return Lemma::Weights;
    case 4: return Lemma::B1Lower;
    case 5: return Lemma::Sigma2;
    case 6: return Lemma::PSigma;
    case 8: return Lemma::B2Lower;
    default:
      throw InvalidArgument("no bound validator for lemma " + std::to_string(id) +
                            " (supported: 1, 2, 3, 4, 5, 6, 8)");
  }
}

bool within_nominal(double empirical, double nominal, std::uint64_t trials) {
  if (trials == 0) return true;
  const double se = std::sqrt(nominal * (1.0 - nominal) / static_cast<double>(trials));
  return empirical <= nominal + 3.0 * se;
}

namespace {

struct StratumExtremes {
  double c_sigma = 0.0;
  double c_mu4 = 0.0;
};

std::vector<StratumExtremes> realized_constants(const SyntheticData& data) {
  const std::size_t k = data.strata.k();
  std::vector<StratumExtremes> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double dev = 0.0;
    for (std::size_t i : data.strata.members[j]) {
      const Record& r = data.dataset[i];
      if (!r.predicate) continue;
      lo = std::min(lo, r.value);
      hi = std::max(hi, r.value);
      dev = std::max(dev, std::abs(r.value - data.truth.mu[j]));
    }
    if (hi >= lo) {
      const double range = hi - lo;
      out[j].c_mu4 = range * range * range * range / 4.0;
    }
    out[j].c_sigma = dev;
  }
  return out;
}

// Per-trial outcome: which strata applied and which violated.
struct TrialOutcome {
  std::vector<char> applicable;
  std::vector<char> violated;
};

}  // namespace

BoundCheckReport validate_bound(Lemma lemma, const SyntheticData& data, std::uint64_t n1,
                                std::uint64_t n2, double level, std::uint64_t trials,
                                RngSeed seed, const BoundParams& params) {
  if (trials < 1000) throw InvalidArgument("bound validation needs at least 1000 trials");
  require_n(n1, "n1");
  require_n(n2, "n2");
  log_inv(level);

  const TruePopulation& pop = data.truth;
  const std::size_t k = pop.k();
  const std::vector<StratumExtremes> realized = realized_constants(data);
  const double cutoff = p_star(n1, level);
  const std::vector<WeightInterval> w_bounds =
      lemma == Lemma::Weights ? weight_bounds(pop.p, n1, level) : std::vector<WeightInterval>{};

  std::vector<TrialOutcome> outcomes(trials);
  parallel_for(trials, [&](std::size_t t) {
    TrialOutcome& out = outcomes[t];
    out.applicable.assign(k, 0);
    out.violated.assign(k, 0);

    InlineOracle oracle;
    BudgetLedger ledger(k, n1, n2);
    OracleAccess access(data.dataset, ledger, oracle);
    const RngSeed trial_seed = seed.child(t);
    Stage1Result s1 = stage1(data.strata, access, n1, trial_seed.child(kStage1Stream));
    const StratumEstimates& e = s1.estimates;

    double p_hat_all = 0.0;
    for (double v : e.p_hat) p_hat_all += v;

    StratumEstimates e2;
    AllocationPlan plan;
    if (lemma == Lemma::B2Lower) {
      plan = params.true_allocation ? plan_from_fractions(optimal_allocation(pop).t, n2)
                                    : empirical_allocation(e, n2);
      std::vector<std::string> warnings;
      e2 = stage2(data.strata, access, plan, s1.store, e, false, trial_seed.child(kStage2Stream),
                  warnings);
    }

    for (std::size_t j = 0; j < k; ++j) {
      const double p = pop.p[j];
      const std::uint64_t drawn = e.drawn[j];
      bool applies = true;
      bool bad = false;
      switch (lemma) {
        case Lemma::PUpper:
          bad = e.p_hat[j] > p_upper_bound(p, drawn, level) + kTol;
          break;
        case Lemma::PLower:
          bad = e.p_hat[j] < p_lower_bound(p, drawn, level) - kTol;
          break;
        case Lemma::Weights: {
          if (p_hat_all <= 0.0) {
            bad = true;
          } else {
            const double w_hat = e.p_hat[j] / p_hat_all;
            bad = w_hat < w_bounds[j].low - kTol || w_hat > w_bounds[j].high + kTol;
          }
          break;
        }
        case Lemma::B1Lower:
          bad = static_cast<double>(e.b[j]) < b1_lower_bound(p, drawn, level) - kTol;
          break;
        case Lemma::Sigma2: {
          applies = e.b[j] >= 2;
          if (applies) {
            const double c = params.c_mu4 > 0.0 ? params.c_mu4 : realized[j].c_mu4;
            const double sigma2 = pop.sigma[j] * pop.sigma[j];
            const double s2 = e.sigma_hat[j] * e.sigma_hat[j];
            bad = std::abs(s2 - sigma2) > sigma2_halfwidth(e.b[j], level, c) + kTol;
          }
          break;
        }
        case Lemma::PSigma: {
          applies = e.b[j] < 2;
          if (applies) {
            const double c = params.c_sigma > 0.0 ? params.c_sigma : realized[j].c_sigma;
            bad = std::sqrt(e.p_hat[j]) * e.sigma_hat[j] >
                  psigma_upper_bound(p, pop.sigma[j], drawn, c) + kTol;
          }
          break;
        }
        case Lemma::B2Lower: {
          applies = p > cutoff && plan.t[j] > 0.0 && plan.draws[j] > 0;
          if (applies) {
            bad = static_cast<double>(e2.b[j]) < b2_lower_bound(p, plan.t[j], n2, level) - kTol;
          }
          break;
        }
      }
      out.applicable[j] = applies ? 1 : 0;
      out.violated[j] = applies && bad ? 1 : 0;
    }
  });

  BoundCheckReport report;
  report.lemma = static_cast<int>(lemma);
  report.level = level;
  report.n1 = n1;
  report.n2 = n2;
  report.trials = trials;
  report.per_stratum.resize(k);

  double per_stratum_nominal = level;
  double union_terms = static_cast<double>(k);
  switch (lemma) {
    case Lemma::Weights:
    case Lemma::Sigma2:
      per_stratum_nominal = 2.0 * level;
      break;
    case Lemma::PSigma:
      per_stratum_nominal = 0.0;
      break;
    case Lemma::B2Lower: {
      union_terms = 0.0;
      for (double p : pop.p) union_terms += p > cutoff ? 1.0 : 0.0;
      break;
    }
    default:
      break;
  }
  per_stratum_nominal = std::min(1.0, per_stratum_nominal);

  for (const TrialOutcome& o : outcomes) {
    bool any = false;
    for (std::size_t j = 0; j < k; ++j) {
      report.per_stratum[j].applicable += o.applicable[j];
      report.per_stratum[j].violations += o.violated[j];
      any = any || o.violated[j];
    }
    report.violations += any ? 1 : 0;
  }

  bool all_pass = true;
  for (StratumCheck& s : report.per_stratum) {
    s.nominal = per_stratum_nominal;
    s.empirical = s.applicable > 0 ? static_cast<double>(s.violations) / s.applicable : 0.0;
    s.pass = within_nominal(s.empirical, s.nominal, s.applicable);
    all_pass = all_pass && s.pass;
  }
  report.nominal = std::min(1.0, union_terms * per_stratum_nominal);
  report.empirical = static_cast<double>(report.violations) / static_cast<double>(trials);
  report.pass = all_pass && within_nominal(report.empirical, report.nominal, trials);
  return report;
}

}  // namespace abae
