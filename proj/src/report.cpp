#include "abae/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "abae/error.hpp"

namespace abae {

using nlohmann::json;

json query_report_json(const QueryReport& report) {
  json strata = json::array();
  for (std::size_t j = 0; j < report.k; ++j) {
    strata.push_back({
        {"p_hat", report.estimates.p_hat[j]},
        {"mu_hat", report.estimates.mu_hat[j]},
        {"sigma_hat", report.estimates.sigma_hat[j]},
        {"b1", report.stage1.b[j]},
        {"b2", report.estimates.b[j]},
        {"t_hat", report.allocation.t[j]},
        {"draws", report.allocation.draws[j]},
    });
  }
  json ci = nullptr;
  if (report.ci) ci = {{"low", report.ci->low}, {"high", report.ci->high}, {"alpha", report.ci->alpha}};
  return {
      {"estimate", report.mu_all_hat},
      {"ci", ci},
      {"strata", strata},
      {"budget",
       {{"n1", report.n1}, {"n2", report.n2}, {"k", report.k}, {"spent", report.spent},
        {"reuse", report.reuse}}},
      {"seed", report.seed.seed},
      {"warnings", report.warnings},
  };
}

namespace {

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json experiment_json(const ExperimentResult& result) {
  json cells = json::array();
  std::vector<EstimatorKind> kinds;
  for (const MseCell& c : result.cells) {
    if (std::find(kinds.begin(), kinds.end(), c.estimator) == kinds.end()) kinds.push_back(c.estimator);
    cells.push_back({
        {"estimator", to_string(c.estimator)},
        {"n1", c.budget.n1},
        {"n2", c.budget.n2},
        {"n_total", c.n_total},
        {"trials", c.trials},
        {"failed", c.failed},
        {"mse", c.mse},
        {"mse_se", c.mse_se},
        {"typical_trials", c.typical},
        {"mse_typical", c.mse_typical},
        {"mse_typical_se", c.mse_typical_se},
        {"mean_spent", c.mean_spent},
        {"e_star", c.e_star},
        {"side_condition_ok", c.side_condition_ok},
    });
  }
  json fits = json::object();
  for (EstimatorKind kind : kinds) {
    try {
      const RateFit fit = fit_rate(result, kind, RateAxis::Total);
      const double band = slope_band(fit);
      fits[to_string(kind)] = {{"axis", "n-total"},
                               {"slope", fit.slope},
                               {"stderr", fit.stderr_slope},
                               {"band_low", nan_as_null(fit.slope - band)},
                               {"band_high", nan_as_null(fit.slope + band)},
                               {"points", fit.points}};
    } catch (const InsufficientPoints&) {
      // Sweep too short for a fit; the cells are still reported.
    } catch (const InvalidArgument&) {
      // Zero MSE somewhere (constant population); no log-log fit exists.
    }
  }
  return {
      {"k", result.k},
      {"truth",
       {{"p", result.truth.p},
        {"mu", result.truth.mu},
        {"sigma", result.truth.sigma},
        {"p_all", result.truth.p_all},
        {"mu_all", result.truth.mu_all}}},
      {"cells", cells},
      {"rate_fits", fits},
      {"warnings", result.warnings},
  };
}

std::string experiment_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "estimator,n1,n2,n_total,trials,failed,mse,mse_se,typical_trials,mse_typical,"
         "mse_typical_se,mean_spent,e_star,side_condition_ok\n";
  for (const MseCell& c : result.cells) {
    out << to_string(c.estimator) << ',' << c.budget.n1 << ',' << c.budget.n2 << ',' << c.n_total
        << ',' << c.trials << ',' << c.failed << ',' << c.mse << ',' << c.mse_se << ','
        << c.typical << ',' << c.mse_typical << ',' << c.mse_typical_se << ',' << c.mean_spent
        << ',' << c.e_star << ',' << (c.side_condition_ok ? 1 : 0) << '\n';
  }
  return out.str();
}

json bound_report_json(const BoundCheckReport& report) {
  json strata = json::array();
  for (const StratumCheck& s : report.per_stratum) {
    strata.push_back({{"applicable", s.applicable},
                      {"violations", s.violations},
                      {"nominal", s.nominal},
                      {"empirical", s.empirical},
                      {"pass", s.pass}});
  }
  return {
      {"lemma", report.lemma},   {"level", report.level},         {"n1", report.n1},
      {"n2", report.n2},         {"trials", report.trials},       {"violations", report.violations},
      {"nominal", report.nominal}, {"empirical", report.empirical}, {"pass", report.pass},
      {"per_stratum", strata},
  };
}

json coverage_json(const std::vector<CoverageRow>& rows) {
  json out = json::array();
  for (const CoverageRow& r : rows) {
    out.push_back({{"estimator", to_string(r.estimator)},
                   {"n1", r.budget.n1},
                   {"n2", r.budget.n2},
                   {"trials", r.trials},
                   {"failed", r.failed},
                   {"coverage", r.coverage},
                   {"se", r.se},
                   {"median_width", r.median_width}});
  }
  return out;
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "estimator,n1,n2,trials,failed,coverage,se,median_width\n";
  for (const CoverageRow& r : rows) {
    out << to_string(r.estimator) << ',' << r.budget.n1 << ',' << r.budget.n2 << ',' << r.trials
        << ',' << r.failed << ',' << r.coverage << ',' << r.se << ',' << r.median_width << '\n';
  }
  return out.str();
}

}  // namespace abae
