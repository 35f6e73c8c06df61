#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "abae/engine.hpp"
#include "abae/error.hpp"
#include "abae/report.hpp"
#include "abae/synthgen.hpp"
#include "support.hpp"

namespace abae {
namespace {

using testing::CountingOracle;
using testing::make_dataset;

TEST(RunAbae, ConstantStatisticIsRecoveredExactly) {
  const Dataset d = make_dataset(std::vector<bool>(500, true), std::vector<double>(500, 2.5));
  for (std::size_t k : {1u, 3u, 7u}) {
    for (bool reuse : {false, true}) {
      AbaeConfig cfg;
      cfg.k = k;
      cfg.n1 = 10;
      cfg.n2 = 50;
      cfg.reuse = reuse;
      const QueryReport r = run_abae(d, cfg, RngSeed{1, 0});
      EXPECT_EQ(r.mu_all_hat, 2.5);
      for (double s : r.estimates.sigma_hat) EXPECT_EQ(s, 0.0);
      ASSERT_TRUE(r.ci.has_value());
      EXPECT_EQ(r.ci->low, 2.5);
      EXPECT_EQ(r.ci->high, 2.5);
    }
  }
}

TEST(RunAbae, SingleStratumIsPlainSampleMean) {
  std::vector<bool> pred(300);
  std::vector<double> val(300);
  for (std::size_t i = 0; i < 300; ++i) {
    pred[i] = i % 4 == 1;
    val[i] = std::sin(static_cast<double>(i));
  }
  const Dataset d = make_dataset(pred, val);
  AbaeConfig cfg;
  cfg.k = 1;
  cfg.n1 = 100;
  cfg.n2 = 200;
  cfg.reuse = true;
  cfg.compute_ci = false;
  const QueryReport r = run_abae(d, cfg, RngSeed{2, 0});
  EXPECT_EQ(r.allocation.t, std::vector<double>{1.0});
  double sum = 0.0, b = 0.0;
  for (std::size_t i = 0; i < 300; ++i) {
    if (pred[i]) {
      sum += val[i];
      b += 1.0;
    }
  }
  EXPECT_NEAR(r.mu_all_hat, sum / b, 1e-12);
  EXPECT_EQ(r.spent, 300u);
}

TEST(RunAbae, ReportIsDeterministic) {
  SyntheticSpec spec = SyntheticSpec::default_suite();
  spec.records_per_stratum = 20000;
  const SyntheticData data = generate(spec);
  AbaeConfig cfg;
  cfg.k = 4;
  const std::string a = query_report_json(run_abae(data.dataset, cfg, RngSeed{42, 0})).dump();
  const std::string b = query_report_json(run_abae(data.dataset, cfg, RngSeed{42, 0})).dump();
  EXPECT_EQ(a, b);
  const std::string c = query_report_json(run_abae(data.dataset, cfg, RngSeed{43, 0})).dump();
  EXPECT_NE(a, c);
}

TEST(RunAbae, BudgetRespectedAndReuseIsFree) {
  SyntheticSpec spec = SyntheticSpec::default_suite();
  spec.records_per_stratum = 5000;
  const SyntheticData data = generate(spec);
  for (bool reuse : {false, true}) {
    CountingOracle oracle;
    AbaeConfig cfg;
    cfg.k = 4;
    cfg.n1 = 100;
    cfg.n2 = 1000;
    cfg.reuse = reuse;
    const QueryReport r = run_abae(data.dataset, cfg, RngSeed{5, 0}, &oracle);
    const std::uint64_t draws = std::accumulate(r.allocation.draws.begin(),
                                                r.allocation.draws.end(), std::uint64_t{0});
    EXPECT_EQ(r.spent, 4u * 100u + draws);
    EXPECT_EQ(oracle.evaluated, r.spent);
    EXPECT_LE(r.spent, 4u * 100u + 1000u + 4u);
  }
}

TEST(RunAbae, Errors) {
  const Dataset d = make_dataset({true, false, true}, {1, 2, 3});
  AbaeConfig cfg;
  cfg.k = 4;
  EXPECT_THROW(run_abae(d, cfg, RngSeed{}), InvalidK);
  cfg.k = 0;
  EXPECT_THROW(run_abae(d, cfg, RngSeed{}), InvalidK);

  const Dataset none = make_dataset({false, false, false, false}, {1, 2, 3, 4});
  cfg.k = 2;
  EXPECT_THROW(run_abae(none, cfg, RngSeed{}), NoPositiveSamples);

  const Dataset hidden("h", {{0, 0.1, 0.0, false}, {1, 0.2, 0.0, false}}, false);
  cfg.k = 1;
  EXPECT_THROW(run_abae(hidden, cfg, RngSeed{}), InvalidArgument);
}

TEST(RunAbae, DegenerateAllocationWarns) {
  // Every matched value is equal, so every sigma_hat is zero.
  std::vector<bool> pred(100);
  for (std::size_t i = 0; i < 100; ++i) pred[i] = i % 2 == 0;
  const Dataset d = make_dataset(pred, std::vector<double>(100, 1.0));
  AbaeConfig cfg;
  cfg.k = 2;
  cfg.n1 = 10;
  cfg.n2 = 20;
  const QueryReport r = run_abae(d, cfg, RngSeed{7, 0});
  EXPECT_TRUE(r.allocation.degenerate);
  bool found = false;
  for (const std::string& w : r.warnings) found = found || w.find("DegenerateAllocation") == 0;
  EXPECT_TRUE(found);
  EXPECT_EQ(r.allocation.draws, (std::vector<std::uint64_t>{10, 10}));
}

TEST(RunAbae, FixedFractionsOverrideTheEstimate) {
  SyntheticSpec spec = SyntheticSpec::default_suite();
  spec.records_per_stratum = 5000;
  const SyntheticData data = generate(spec);
  AbaeConfig cfg;
  cfg.k = 4;
  cfg.n2 = 400;
  cfg.compute_ci = false;
  cfg.fixed_fractions = std::vector<double>{0.25, 0.25, 0.25, 0.25};
  const QueryReport r = run_abae(data.dataset, data.strata, cfg, RngSeed{8, 0});
  EXPECT_EQ(r.allocation.draws, (std::vector<std::uint64_t>{100, 100, 100, 100}));
}

}  // namespace
}  // namespace abae
