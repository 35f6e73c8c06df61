// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Every tolerance and trial count is fixed here; the exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "abae/allocation.hpp"
#include "abae/bounds.hpp"
#include "abae/engine.hpp"
#include "abae/error.hpp"
#include "abae/harness.hpp"
#include "abae/report.hpp"
#include "abae/rng.hpp"
#include "abae/synthgen.hpp"

namespace {

using namespace abae;

constexpr std::size_t kPopulations = 100;
constexpr std::size_t kMaxStrata = 6;
constexpr std::size_t kDirichletDraws = 100000;
constexpr double kOptimalitySlack = -1e-12;  // relative to loss(T*)
constexpr double kIdentityTol = 1e-12;       // relative
constexpr std::size_t kBoundTrials = 10000;  // criteria 3 and 5
constexpr std::size_t kRateTrials = 2000;
constexpr double kSlopeLow = -1.15;
constexpr double kSlopeHigh = -0.85;
constexpr double kSeMultiplier = 3.0;
constexpr std::size_t kCoverageTrials = 500;
constexpr std::size_t kCoverageResamples = 1000;
constexpr double kCoverageFloor = 0.90;
constexpr std::size_t kDeskSeeds = 100;
constexpr double kDeskWinRate = 0.80;

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void detail(const std::string& line) { std::printf("    %s\n", line.c_str()); }

// Random population: K in [2, 6], p in [0.005, 1], sigma in [0.05, 5].
// K = 1 is left out: every allocation is then optimal.
TruePopulation random_population(Rng& rng) {
  const std::size_t k = 2 + static_cast<std::size_t>(rng.below(kMaxStrata - 1));
  std::vector<double> p(k), sigma(k), mu(k);
  for (std::size_t j = 0; j < k; ++j) {
    p[j] = 0.005 + 0.995 * rng.uniform();
    sigma[j] = 0.05 + 4.95 * rng.uniform();
    mu[j] = -5.0 + 10.0 * rng.uniform();
  }
  return TruePopulation::from_strata(std::move(p), std::move(sigma), std::move(mu));
}

std::vector<TruePopulation> random_populations() {
  Rng rng(RngSeed{20240601, 0});
  std::vector<TruePopulation> out;
  for (std::size_t i = 0; i < kPopulations; ++i) out.push_back(random_population(rng));
  return out;
}

Outcome allocation_optimality(const std::vector<TruePopulation>& pops) {
  const double n = 1000.0;
  double worst = INFINITY;
  Rng rng(RngSeed{20240602, 0});
  std::vector<double> t;
  for (const TruePopulation& pop : pops) {
    const double best = loss(optimal_allocation(pop).t, pop, n);
    t.resize(pop.k());
    for (std::size_t d = 0; d < kDirichletDraws; ++d) {
      double sum = 0.0;
      for (double& x : t) {
        // Flat Dirichlet from unit exponentials; 1 - u keeps the log finite.
        x = -std::log(1.0 - rng.uniform());
        sum += x;
      }
      for (double& x : t) x /= sum;
      worst = std::min(worst, (loss(t, pop, n) - best) / best);
    }
  }
  return {worst >= kOptimalitySlack,
          fmt("min relative slack %.3e over %zu populations x %zu draws (need >= %.0e)", worst,
              pops.size(), kDirichletDraws, kOptimalitySlack)};
}

Outcome e_star_identity(const std::vector<TruePopulation>& pops) {
  double worst = 0.0;
  for (const TruePopulation& pop : pops) {
    for (double n : {100.0, 1000.0, 32000.0}) {
      const double a = loss(optimal_allocation(pop).t, pop, n);
      const double b = mse_upper_bound(pop, n);
      worst = std::max(worst, std::abs(a - b) / b);
    }
  }
  return {worst <= kIdentityTol,
          fmt("max relative gap %.3e (need <= %.0e)", worst, kIdentityTol)};
}

Budget proportional_budget(std::uint64_t total, std::size_t k) {
  const std::uint64_t n1 = total / (2 * k);
  return Budget{n1, total - k * n1};
}

Outcome e_star_bound(const SyntheticData& data) {
  ExperimentPlan plan;
  plan.estimators = {EstimatorKind::OracleConditioned};
  plan.trials = kBoundTrials;
  plan.seed = RngSeed{303, 0};
  for (std::uint64_t n : {1000, 4000}) plan.budgets.push_back(proportional_budget(n, data.truth.k()));
  const ExperimentResult r = run_mse(plan, data);
  bool pass = true;
  for (const MseCell& c : r.cells) {
    const bool ok = c.mse <= c.e_star + kSeMultiplier * c.mse_se;
    pass = pass && ok;
    detail(fmt("N=%llu mse=%.4e se=%.2e E*=%.4e %s", (unsigned long long)c.n_total, c.mse, c.mse_se,
               c.e_star, ok ? "ok" : "over"));
  }
  return {pass, fmt("oracle-conditioned MSE <= E* + %.0f SE at N in {1000, 4000}, %zu trials",
                    kSeMultiplier, kBoundTrials)};
}

struct RateRun {
  ExperimentResult result;
  RateFit abae;
  RateFit reuse;
};

RateRun rate_experiment(const SyntheticData& data) {
  ExperimentPlan plan;
  plan.estimators = {EstimatorKind::Abae, EstimatorKind::AbaeReuse};
  plan.trials = kRateTrials;
  plan.seed = RngSeed{404, 0};
  for (std::uint64_t n : {1000, 2000, 4000, 8000, 16000, 32000}) {
    plan.budgets.push_back(proportional_budget(n, data.truth.k()));
  }
  RateRun run{run_mse(plan, data), {}, {}};
  run.abae = fit_rate(run.result, EstimatorKind::Abae, RateAxis::Total);
  run.reuse = fit_rate(run.result, EstimatorKind::AbaeReuse, RateAxis::Total);
  return run;
}

Outcome rate(const RateRun& run) {
  bool side = true;
  for (const MseCell* c : run.result.cells_for(EstimatorKind::Abae)) {
    side = side && c->side_condition_ok;
    detail(fmt("N=%llu N1=%llu N2=%llu mse=%.4e se=%.2e typical=%zu/%zu failed=%zu",
               (unsigned long long)c->n_total, (unsigned long long)c->budget.n1,
               (unsigned long long)c->budget.n2, c->mse, c->mse_se, c->typical, c->trials,
               c->failed));
  }
  const double s = run.abae.slope;
  return {side && s >= kSlopeLow && s <= kSlopeHigh,
          fmt("slope %.4f +/- %.4f (need [%.2f, %.2f]), %zu trials/point, side condition %s", s,
              slope_band(run.abae), kSlopeLow, kSlopeHigh, kRateTrials, side ? "holds" : "VIOLATED")};
}

Outcome bounds(const SyntheticData& data) {
  const std::uint64_t n1 = 100, n2 = 2000;
  bool pass = true;
  std::uint64_t seed = 500;
  for (int id : {1, 2, 4, 5, 8}) {
    for (double level : {0.2, 0.05, 0.01}) {
      const BoundCheckReport rep =
          validate_bound(lemma_from_int(id), data, n1, n2, level, kBoundTrials, RngSeed{seed++, 0});
      pass = pass && rep.pass;
      detail(fmt("lemma %d level %.2f: violations %llu/%llu empirical %.4f nominal %.4f %s", id,
                 level, (unsigned long long)rep.violations, (unsigned long long)rep.trials,
                 rep.empirical, rep.nominal, rep.pass ? "ok" : "EXCEEDED"));
    }
  }
  return {pass, fmt("violation rate <= nominal + 3 binomial SE, %zu trials per (lemma, level)",
                    kBoundTrials)};
}

Outcome reuse(const RateRun& run) {
  bool pass = true;
  const auto plain = run.result.cells_for(EstimatorKind::Abae);
  const auto merged = run.result.cells_for(EstimatorKind::AbaeReuse);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    const PairedComparison d = compare_paired(*merged[i], *plain[i]);
    const bool ok = d.mean_diff <= kSeMultiplier * d.se;
    pass = pass && ok;
    detail(fmt("N=%llu mse reuse %.4e vs %.4e, paired diff %.3e se %.2e %s",
               (unsigned long long)plain[i]->n_total, merged[i]->mse, plain[i]->mse, d.mean_diff,
               d.se, ok ? "ok" : "WORSE"));
  }
  const double ba = slope_band(run.abae), br = slope_band(run.reuse);
  const bool overlap = run.abae.slope - ba <= run.reuse.slope + br &&
                       run.reuse.slope - br <= run.abae.slope + ba;
  return {pass && overlap,
          fmt("paired MSE(reuse) <= MSE(no reuse) + %.0f SE; slopes %.4f+/-%.4f vs %.4f+/-%.4f %s",
              kSeMultiplier, run.reuse.slope, br, run.abae.slope, ba,
              overlap ? "overlap" : "DISJOINT")};
}

Outcome coverage(const SyntheticData& data) {
  ExperimentPlan plan;
  plan.estimators = {EstimatorKind::Abae};
  plan.trials = kCoverageTrials;
  plan.seed = RngSeed{707, 0};
  const std::vector<std::uint64_t> n2s{500, 1000, 2000, 4000, 8000};
  for (std::uint64_t n2 : n2s) plan.budgets.push_back(Budget{100, n2});
  BootstrapConfig cfg;
  cfg.resamples = kCoverageResamples;
  cfg.alpha = 0.05;
  const std::vector<CoverageRow> rows = run_coverage(plan, cfg, data);
  bool pass = true;
  double at_2000 = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CoverageRow& r = rows[i];
    if (r.budget.n2 == 2000) at_2000 = r.coverage;
    bool ok = true;
    if (i > 0) {
      const double se = std::hypot(rows[i - 1].se, r.se);
      ok = r.coverage >= rows[i - 1].coverage - kSeMultiplier * se;
    }
    pass = pass && ok;
    detail(fmt("N2=%llu coverage %.3f se %.3f median width %.4f failed %zu %s",
               (unsigned long long)r.budget.n2, r.coverage, r.se, r.median_width, r.failed,
               ok ? "ok" : "DROP"));
  }
  pass = pass && at_2000 >= kCoverageFloor;
  return {pass, fmt("coverage %.3f at N2=2000 (need >= %.2f), non-decreasing within %.0f SE",
                    at_2000, kCoverageFloor, kSeMultiplier)};
}

Outcome determinism() {
  SyntheticSpec spec = SyntheticSpec::default_suite();
  spec.records_per_stratum = 20000;
  const SyntheticData data = generate(spec);
  AbaeConfig cfg;
  cfg.k = 4;
  cfg.n1 = 100;
  cfg.n2 = 2000;
  const auto dump = [&](const char* threads) {
    ::setenv("ABAE_THREADS", threads, 1);
    return query_report_json(run_abae(data.dataset, cfg, RngSeed{808, 0})).dump(2);
  };
  const std::string a = dump("1");
  const std::string b = dump("1");
  const std::string c = dump("4");
  ::unsetenv("ABAE_THREADS");
  return {a == b && a == c,
          fmt("QueryReport JSON (%zu bytes) identical across two runs and 1 vs 4 workers", a.size())};
}

Outcome desk_scale() {
  SyntheticSpec spec;
  spec.strata = {{0.2, 1.0, 1.0}, {0.4, 2.0, 1.0}, {0.6, 3.0, 2.0}, {0.8, 4.0, 2.0}};
  spec.records_per_stratum = 50;
  spec.seed = RngSeed{909, 0};
  const SyntheticData data = generate(spec);
  const std::size_t k = spec.k();

  // Ground truth by direct enumeration of the records.
  double sum = 0.0;
  std::size_t matches = 0;
  for (const Record& r : data.dataset.records()) {
    if (r.predicate) {
      sum += r.value;
      ++matches;
    }
  }
  const double enumerated = sum / static_cast<double>(matches);

  AbaeConfig cfg;
  cfg.k = k;
  cfg.reuse = true;
  cfg.compute_ci = false;
  // Stage 1 alone covers every record when N1 = |D| / K.
  cfg.n1 = data.dataset.size() / k;
  cfg.n2 = 1;  // nothing left to draw; Stage 2 adds no records
  const QueryReport full = run_abae(data.dataset, data.strata, cfg, RngSeed{1, 0});
  const double full_gap = std::abs(full.mu_all_hat - enumerated);
  const double truth_gap = std::abs(data.truth.mu_all - enumerated);
  const bool exact = full.spent == data.dataset.size() && full_gap <= 1e-12 * std::abs(enumerated) &&
                     truth_gap <= 1e-12 * std::abs(enumerated);

  const auto error_at = [&](std::uint64_t total, RngSeed seed) {
    const Budget b = proportional_budget(total, k);
    AbaeConfig c = cfg;
    c.n1 = b.n1;
    c.n2 = b.n2;
    return std::abs(run_abae(data.dataset, data.strata, c, seed).mu_all_hat - enumerated);
  };
  std::size_t wins = 0;
  for (std::size_t s = 0; s < kDeskSeeds; ++s) {
    const RngSeed seed{9000 + s, 0};
    if (error_at(150, seed.child(150)) < error_at(50, seed.child(50))) ++wins;
  }
  const double rate = static_cast<double>(wins) / kDeskSeeds;
  detail(fmt("full budget: spent %llu, |estimate - enumeration| %.2e, |truth - enumeration| %.2e",
             (unsigned long long)full.spent, full_gap, truth_gap));
  return {exact && rate >= kDeskWinRate,
          fmt("exhaustive truth %s; error(150) < error(50) in %zu/%zu seeds (need >= %.0f%%)",
              exact ? "recovered" : "NOT recovered", wins, kDeskSeeds, 100.0 * kDeskWinRate)};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failed = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name,
                o.summary.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };

  const std::vector<TruePopulation> pops = random_populations();
  report(1, "allocation optimality", [&] { return allocation_optimality(pops); });
  report(2, "E* identity", [&] { return e_star_identity(pops); });

  const SyntheticData suite = generate(SyntheticSpec::default_suite());
  report(3, "E* bound", [&] { return e_star_bound(suite); });

  RateRun run;
  bool have_run = false;
  report(4, "MSE rate", [&] {
    run = rate_experiment(suite);
    have_run = true;
    return rate(run);
  });
  report(5, "concentration bounds", [&] { return bounds(suite); });
  report(6, "sample reuse", [&] {
    if (!have_run) return Outcome{false, "rate experiment did not complete"};
    return reuse(run);
  });
  report(7, "bootstrap coverage", [&] { return coverage(suite); });
  report(8, "determinism", determinism);
  report(9, "desk-scale oracle equivalence", desk_scale);

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
