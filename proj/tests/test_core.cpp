#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "abae/core.hpp"
#include "abae/error.hpp"
#include "support.hpp"

namespace abae {
namespace {

using testing::CountingOracle;
using testing::make_dataset;

TEST(Dataset, RejectsEmptyDuplicateAndNonFinite) {
  EXPECT_THROW(Dataset("d", {}), InvalidArgument);
  EXPECT_THROW(Dataset("d", {{1, 0.1, 1.0, true}, {1, 0.2, 2.0, false}}), InvalidArgument);
  EXPECT_THROW(Dataset("d", {{1, std::nan(""), 1.0, true}}), InvalidArgument);
  EXPECT_THROW(Dataset("d", {{1, 0.5, std::numeric_limits<double>::infinity(), true}}),
               InvalidArgument);
}

TEST(Dataset, IndexOfFindsIdsAndReportsMissing) {
  const Dataset d("d", {{10, 0.1, 1.0, true}, {20, 0.2, 2.0, false}});
  EXPECT_EQ(d.index_of(20), 1u);
  EXPECT_EQ(d.index_of(99), d.size());
}

TEST(BudgetLedger, CapIsKN1PlusN2PlusK) {
  const BudgetLedger l(5, 100, 2000);
  EXPECT_EQ(l.cap(), 5u * 100u + 2000u + 5u);
  EXPECT_EQ(l.remaining(), l.cap());
}

TEST(BudgetLedger, OverdraftThrowsWithoutCharging) {
  BudgetLedger l(1, 1, 1);  // cap 3
  l.charge(2);
  EXPECT_THROW(l.charge(2), BudgetExhausted);
  EXPECT_EQ(l.spent(), 2u);
  l.charge(1);
  EXPECT_EQ(l.remaining(), 0u);
  EXPECT_THROW(l.charge(1), BudgetExhausted);
}

TEST(OracleAccess, FirstRevealChargesOne) {
  const Dataset d = make_dataset({true}, {2.0});
  BudgetLedger ledger(1, 1, 1);
  InlineOracle oracle;
  OracleAccess access(d, ledger, oracle);
  EXPECT_EQ(ledger.spent(), 0u);
  const Reveal r = access.charge_and_reveal(0);
  EXPECT_TRUE(r.predicate);
  EXPECT_EQ(r.value, 2.0);
  EXPECT_EQ(ledger.spent(), 1u);
}

TEST(OracleAccess, RepeatRevealIsFreeAndIdentical) {
  const Dataset d = make_dataset({true, false}, {2.0, 3.0});
  BudgetLedger ledger(1, 1, 1);
  CountingOracle oracle;
  OracleAccess access(d, ledger, oracle);
  const Reveal first = access.charge_and_reveal(0);
  const Reveal second = access.charge_and_reveal(0);
  EXPECT_EQ(first, second);
  EXPECT_EQ(ledger.spent(), 1u);
  EXPECT_EQ(oracle.evaluated, 1u);
  EXPECT_TRUE(access.charged(0));
  EXPECT_FALSE(access.charged(1));
}

TEST(OracleAccess, LedgerAtCapThrows) {
  const Dataset d = make_dataset({true, true, true, true}, {1, 2, 3, 4});
  BudgetLedger ledger(1, 1, 1);  // cap 3
  InlineOracle oracle;
  OracleAccess access(d, ledger, oracle);
  for (std::size_t i = 0; i < 3; ++i) access.charge_and_reveal(i);
  EXPECT_THROW(access.charge_and_reveal(3), BudgetExhausted);
  EXPECT_FALSE(access.charged(3));
}

TEST(OracleAccess, BatchChargesOnlyFreshDistinctRecords) {
  const Dataset d = make_dataset({true, false, true}, {1, 2, 3});
  BudgetLedger ledger(1, 10, 10);
  CountingOracle oracle;
  OracleAccess access(d, ledger, oracle);
  access.charge_and_reveal(0);
  const std::vector<std::size_t> batch{0, 1, 1, 2};
  const std::vector<Reveal> out = access.charge_and_reveal(batch);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[1], out[2]);
  EXPECT_EQ(out[3].value, 3.0);
  EXPECT_EQ(ledger.spent(), 3u);
  EXPECT_EQ(oracle.evaluated, 3u);
}

TEST(OracleAccess, BatchOverCapChargesNothing) {
  const Dataset d = make_dataset({true, true, true, true}, {1, 2, 3, 4});
  BudgetLedger ledger(1, 1, 1);
  InlineOracle oracle;
  OracleAccess access(d, ledger, oracle);
  const std::vector<std::size_t> batch{0, 1, 2, 3};
  EXPECT_THROW(access.charge_and_reveal(batch), BudgetExhausted);
  EXPECT_EQ(ledger.spent(), 0u);
}

class ShortOracle final : public PredicateOracle {
 public:
  std::vector<Reveal> evaluate(const Dataset&, std::span<const std::size_t>) override {
    return {};
  }
};

TEST(OracleAccess, BackendReturningWrongCountIsProtocolError) {
  const Dataset d = make_dataset({true}, {1});
  BudgetLedger ledger(1, 1, 1);
  ShortOracle oracle;
  OracleAccess access(d, ledger, oracle);
  EXPECT_THROW(access.charge_and_reveal(0), OracleProtocolError);
}

TEST(SummarizeMatches, MeanAndUnbiasedStd) {
  double mu = -1, sigma = -1;
  const std::vector<double> xs{2.0, 4.0};
  summarize_matches(xs, mu, sigma);
  EXPECT_DOUBLE_EQ(mu, 3.0);
  EXPECT_DOUBLE_EQ(sigma * sigma, 2.0);
}

TEST(SummarizeMatches, EmptyAndSingletonCases) {
  double mu = -1, sigma = -1;
  summarize_matches({}, mu, sigma);
  EXPECT_EQ(mu, 0.0);
  EXPECT_EQ(sigma, 0.0);
  const std::vector<double> one{7.0};
  summarize_matches(one, mu, sigma);
  EXPECT_EQ(mu, 7.0);
  EXPECT_EQ(sigma, 0.0);
}

}  // namespace
}  // namespace abae
