#include "abae/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "abae/bounds.hpp"
#include "abae/engine.hpp"
#include "abae/error.hpp"
#include "abae/parallel.hpp"

namespace abae {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Abae: return "abae";
    case EstimatorKind::AbaeReuse: return "abae-reuse";
    case EstimatorKind::UniformAllocation: return "uniform-allocation";
    case EstimatorKind::OracleOptimal: return "oracle-optimal";
    case EstimatorKind::OracleConditioned: return "oracle-conditioned";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
  for (EstimatorKind k : {EstimatorKind::Abae, EstimatorKind::AbaeReuse,
                          EstimatorKind::UniformAllocation, EstimatorKind::OracleOptimal,
                          EstimatorKind::OracleConditioned}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown estimator '" + name + "'");
}

bool Budget::side_condition_ok() const {
  return static_cast<double>(n2) >= std::pow(static_cast<double>(n1), 0.75);
}

const MseCell& ExperimentResult::cell(EstimatorKind estimator, std::size_t budget_index) const {
  std::size_t seen = 0;
  for (const MseCell& c : cells) {
    if (c.estimator != estimator) continue;
    if (seen++ == budget_index) return c;
  }
  throw InvalidArgument("no result for " + to_string(estimator) + " at budget " +
                        std::to_string(budget_index));
}

std::vector<const MseCell*> ExperimentResult::cells_for(EstimatorKind estimator) const {
  std::vector<const MseCell*> out;
  for (const MseCell& c : cells) {
    if (c.estimator == estimator) out.push_back(&c);
  }
  return out;
}

namespace {

// Stage-1 good event used to split off atypical trials: every p_hat inside
// its two-sided interval at delta = 0.05.
constexpr double kTypicalDelta = 0.05;

struct TrialOutcome {
  double sq_error = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  bool typical = true;
  double spent = 0.0;
};

bool stage1_typical(const QueryReport& report, const TruePopulation& truth) {
  for (std::size_t j = 0; j < truth.k(); ++j) {
    const std::uint64_t drawn = report.stage1.drawn[j];
    if (drawn == 0) continue;
    const double p = truth.p[j];
    const double hat = report.stage1.p_hat[j];
    if (hat > p_upper_bound(p, drawn, kTypicalDelta) + 1e-12 ||
        hat < p_lower_bound(p, drawn, kTypicalDelta) - 1e-12) {
      return false;
    }
  }
  return true;
}

AbaeConfig two_stage_config(EstimatorKind kind, std::size_t k, const Budget& b,
                            const std::vector<double>& t_star) {
  AbaeConfig cfg;
  cfg.k = k;
  cfg.n1 = b.n1;
  cfg.n2 = b.n2;
  cfg.compute_ci = false;
  switch (kind) {
    case EstimatorKind::AbaeReuse:
      cfg.reuse = true;
      break;
    case EstimatorKind::UniformAllocation:
      cfg.fixed_fractions = std::vector<double>(k, 1.0 / static_cast<double>(k));
      break;
    case EstimatorKind::OracleOptimal:
      cfg.fixed_fractions = t_star;
      break;
    default:
      break;
  }
  return cfg;
}

// Matched values of each stratum, for the oracle-conditioned estimator.
std::vector<std::vector<double>> matched_values(const SyntheticData& data) {
  std::vector<std::vector<double>> out(data.strata.k());
  for (std::size_t j = 0; j < data.strata.k(); ++j) {
    for (std::size_t i : data.strata.members[j]) {
      const Record& r = data.dataset[i];
      if (r.predicate) out[j].push_back(r.value);
    }
  }
  return out;
}

// Draws B_k = ceil(p_k T*_k N) matched values per stratum without replacement
// (at least one where w_k > 0, at most all of them) and weights the stratum
// means by the true w_k.
double oracle_conditioned_estimate(const std::vector<std::vector<double>>& matched,
                                   const TruePopulation& truth, const std::vector<double>& t_star,
                                   std::uint64_t n_total, RngSeed seed) {
  double est = 0.0;
  for (std::size_t j = 0; j < truth.k(); ++j) {
    if (truth.w[j] <= 0.0 || matched[j].empty()) continue;
    std::uint64_t b = ceil_draws(static_cast<double>(n_total), truth.p[j] * t_star[j]);
    b = std::clamp<std::uint64_t>(b, 1, matched[j].size());
    Rng rng(seed.child(j));
    PartialShuffle shuffle(matched[j].size());
    double sum = 0.0;
    for (std::uint64_t i = 0; i < b; ++i) sum += matched[j][shuffle.next(rng)];
    est += truth.w[j] * (sum / static_cast<double>(b));
  }
  return est;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.n = xs.size();
  if (out.n == 0) return out;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
  }
  return out;
}

void validate_plan(const ExperimentPlan& plan) {
  plan.spec.validate();
  if (plan.budgets.empty()) throw InvalidArgument("experiment plan has no budgets");
  if (plan.trials == 0) throw InvalidArgument("experiment plan needs at least one trial");
  if (plan.estimators.empty()) throw InvalidArgument("experiment plan has no estimators");
  for (const Budget& b : plan.budgets) {
    if (b.n1 == 0 || b.n2 == 0) throw InvalidArgument("budgets need n1 > 0 and n2 > 0");
  }
}

}  // namespace

ExperimentResult run_mse(const ExperimentPlan& plan) {
  validate_plan(plan);
  return run_mse(plan, generate(plan.spec));
}

ExperimentResult run_mse(const ExperimentPlan& plan, const SyntheticData& data) {
  validate_plan(plan);
  const TruePopulation& truth = data.truth;
  const std::size_t k = truth.k();
  const std::vector<double> t_star = optimal_allocation(truth).t;
  const std::vector<std::vector<double>> matched = matched_values(data);

  ExperimentResult result;
  result.k = k;
  result.truth = truth;

  for (std::size_t bi = 0; bi < plan.budgets.size(); ++bi) {
    const Budget& b = plan.budgets[bi];
    if (!b.side_condition_ok()) {
      result.warnings.push_back("budget n1=" + std::to_string(b.n1) + " n2=" +
                                std::to_string(b.n2) + " violates n2 >= n1^(3/4)");
    }
  }

  for (EstimatorKind kind : plan.estimators) {
    for (std::size_t bi = 0; bi < plan.budgets.size(); ++bi) {
      const Budget& b = plan.budgets[bi];
      const std::uint64_t n_total = b.total(k);
      const RngSeed budget_seed = plan.seed.child(bi);

      std::vector<TrialOutcome> outcomes(plan.trials);
      parallel_for(plan.trials, [&](std::size_t t) {
        TrialOutcome& out = outcomes[t];
        const RngSeed trial_seed = budget_seed.child(t);
        if (kind == EstimatorKind::OracleConditioned) {
          const double est = oracle_conditioned_estimate(matched, truth, t_star, n_total, trial_seed);
          out.sq_error = (est - truth.mu_all) * (est - truth.mu_all);
          out.spent = static_cast<double>(n_total);
          return;
        }
        try {
          const QueryReport rep =
              run_abae(data.dataset, data.strata, two_stage_config(kind, k, b, t_star), trial_seed);
          const double err = rep.mu_all_hat - truth.mu_all;
          out.sq_error = err * err;
          out.spent = static_cast<double>(rep.spent);
          out.typical = stage1_typical(rep, truth);
        } catch (const NoPositiveSamples&) {
          out.failed = true;
          out.typical = false;
        }
      });

      MseCell cell;
      cell.estimator = kind;
      cell.budget = b;
      cell.n_total = n_total;
      cell.trials = plan.trials;
      cell.e_star = mse_upper_bound(truth, static_cast<double>(n_total));
      cell.side_condition_ok = b.side_condition_ok();
      cell.sq_errors.reserve(plan.trials);

      std::vector<double> ok;
      std::vector<double> typical;
      double spent = 0.0;
      for (const TrialOutcome& o : outcomes) {
        cell.sq_errors.push_back(o.sq_error);
        spent += o.spent;
        if (o.failed) {
          ++cell.failed;
          continue;
        }
        ok.push_back(o.sq_error);
        if (o.typical) typical.push_back(o.sq_error);
      }
      const MeanSe all = mean_se(ok);
      const MeanSe typ = mean_se(typical);
      cell.mse = all.mean;
      cell.mse_se = all.se;
      cell.typical = typ.n;
      cell.mse_typical = typ.mean;
      cell.mse_typical_se = typ.se;
      cell.mean_spent = spent / static_cast<double>(plan.trials);
      if (cell.failed > 0) {
        result.warnings.push_back(to_string(kind) + " at n1=" + std::to_string(b.n1) + " n2=" +
                                  std::to_string(b.n2) + ": " + std::to_string(cell.failed) +
                                  " trials had no positive samples and were excluded");
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

PairedComparison compare_paired(const MseCell& a, const MseCell& b) {
  if (a.sq_errors.size() != b.sq_errors.size()) {
    throw InvalidArgument("paired comparison needs cells with the same trial count");
  }
  std::vector<double> diffs;
  diffs.reserve(a.sq_errors.size());
  for (std::size_t i = 0; i < a.sq_errors.size(); ++i) {
    if (std::isnan(a.sq_errors[i]) || std::isnan(b.sq_errors[i])) continue;
    diffs.push_back(a.sq_errors[i] - b.sq_errors[i]);
  }
  const MeanSe m = mean_se(diffs);
  return PairedComparison{m.mean, m.se, m.n};
}

RateFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("rate fit needs matching x and y");
  if (x.size() < 4) {
    throw InsufficientPoints("rate fit needs at least 4 budget points, got " +
                             std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw InvalidArgument("rate fit needs positive budgets and MSE values");
    }
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi < 8.0 * *lo) throw InsufficientPoints("rate fit needs budgets spanning at least 8x");

  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += r * r;
  }
  fit.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

RateFit fit_rate(const ExperimentResult& result, EstimatorKind estimator, RateAxis axis) {
  std::vector<double> x, y;
  for (const MseCell* c : result.cells_for(estimator)) {
    switch (axis) {
      case RateAxis::N1: x.push_back(static_cast<double>(c->budget.n1)); break;
      case RateAxis::N2: x.push_back(static_cast<double>(c->budget.n2)); break;
      case RateAxis::Total: x.push_back(static_cast<double>(c->n_total)); break;
    }
    y.push_back(c->mse);
  }
  return fit_power_law(x, y);
}

double slope_band(const RateFit& fit) {
  if (fit.points < 3) return std::numeric_limits<double>::infinity();
  const boost::math::students_t dist(static_cast<double>(fit.points - 2));
  return boost::math::quantile(dist, 0.975) * fit.stderr_slope;
}

std::vector<CoverageRow> run_coverage(const ExperimentPlan& plan, const BootstrapConfig& cfg) {
  validate_plan(plan);
  return run_coverage(plan, cfg, generate(plan.spec));
}

std::vector<CoverageRow> run_coverage(const ExperimentPlan& plan, const BootstrapConfig& cfg,
                                      const SyntheticData& data) {
  validate_plan(plan);
  if (plan.trials < 300) throw InvalidArgument("coverage runs need at least 300 trials");
  const TruePopulation& truth = data.truth;
  const std::size_t k = truth.k();
  const std::vector<double> t_star = optimal_allocation(truth).t;
  // The estimator is a ratio of sums, so a constant population can miss its
  // own value by a few ulps.
  const double slack = 1e-9 * std::max(1.0, std::abs(truth.mu_all));

  std::vector<CoverageRow> rows;
  for (EstimatorKind kind : plan.estimators) {
    if (kind == EstimatorKind::OracleConditioned) continue;
    for (std::size_t bi = 0; bi < plan.budgets.size(); ++bi) {
      const Budget& b = plan.budgets[bi];
      AbaeConfig qc = two_stage_config(kind, k, b, t_star);
      qc.compute_ci = true;
      qc.bootstrap = cfg;
      const RngSeed budget_seed = plan.seed.child(bi);

      struct Hit {
        bool failed = false;
        bool covered = false;
        double width = 0.0;
      };
      std::vector<Hit> hits(plan.trials);
      parallel_for(plan.trials, [&](std::size_t t) {
        try {
          const QueryReport rep = run_abae(data.dataset, data.strata, qc, budget_seed.child(t));
          hits[t].covered = rep.ci->low - slack <= truth.mu_all && truth.mu_all <= rep.ci->high + slack;
          hits[t].width = rep.ci->high - rep.ci->low;
        } catch (const NoPositiveSamples&) {
          hits[t].failed = true;
        }
      });

      CoverageRow row;
      row.estimator = kind;
      row.budget = b;
      row.trials = plan.trials;
      std::vector<double> widths;
      std::size_t covered = 0;
      for (const Hit& h : hits) {
        if (h.failed) {
          ++row.failed;
          continue;
        }
        covered += h.covered ? 1 : 0;
        widths.push_back(h.width);
      }
      const std::size_t used = plan.trials - row.failed;
      if (used > 0) {
        row.coverage = static_cast<double>(covered) / static_cast<double>(used);
        row.se = std::sqrt(row.coverage * (1.0 - row.coverage) / static_cast<double>(used));
        std::sort(widths.begin(), widths.end());
        row.median_width = quantile_linear(widths, 0.5);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace abae
