#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "abae/error.hpp"
#include "abae/rng.hpp"
#include "abae/stratifier.hpp"

namespace abae {
namespace {

Dataset with_proxies(const std::vector<double>& proxies) {
  std::vector<Record> rows;
  for (std::size_t i = 0; i < proxies.size(); ++i) rows.push_back({i, proxies[i], 0.0, false});
  return Dataset("p", std::move(rows));
}

std::vector<double> proxies_of(const Dataset& d, const std::vector<std::size_t>& members) {
  std::vector<double> out;
  for (std::size_t i : members) out.push_back(d[i].proxy);
  return out;
}

TEST(Stratify, SixRecordsThreeStrata) {
  const Dataset d = with_proxies({0.4, 0.1, 0.6, 0.3, 0.5, 0.2});
  const Strata s = stratify(d, 3);
  ASSERT_EQ(s.k(), 3u);
  EXPECT_EQ(proxies_of(d, s.members[0]), (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(proxies_of(d, s.members[1]), (std::vector<double>{0.3, 0.4}));
  EXPECT_EQ(proxies_of(d, s.members[2]), (std::vector<double>{0.5, 0.6}));
  EXPECT_EQ(s.boundaries[1], (std::pair<double, double>{0.3, 0.4}));
}

TEST(Stratify, RemainderGoesToLeadingStrata) {
  const Dataset d = with_proxies({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
  const Strata s = stratify(d, 3);
  EXPECT_EQ(s.members[0].size(), 3u);
  EXPECT_EQ(s.members[1].size(), 2u);
  EXPECT_EQ(s.members[2].size(), 2u);
}

TEST(Stratify, TiesBrokenById) {
  std::vector<Record> rows;
  for (std::uint64_t id : {5u, 2u, 9u, 1u, 7u}) rows.push_back({id, 0.5, 0.0, false});
  const Dataset d("ties", std::move(rows));
  const Strata s = stratify(d, 2);
  EXPECT_LE(s.members[0].size() - s.members[1].size(), 1u);
  std::vector<std::uint64_t> ids;
  for (const auto& m : s.members) {
    for (std::size_t i : m) ids.push_back(d[i].id);
  }
  EXPECT_EQ(ids, (std::vector<std::uint64_t>{1, 2, 5, 7, 9}));
}

TEST(Stratify, InvalidK) {
  const Dataset d = with_proxies({0.1, 0.2});
  EXPECT_THROW(stratify(d, 0), InvalidK);
  EXPECT_THROW(stratify(d, 3), InvalidK);
  EXPECT_NO_THROW(stratify(d, 2));
}

// Property: on random inputs the strata partition the dataset, sizes differ
// by at most one, and proxies never decrease across stratum boundaries.
TEST(Stratify, PartitionPropertyOnRandomInputs) {
  Rng rng(RngSeed{21, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(300);
    std::vector<double> proxies(n);
    for (double& p : proxies) p = static_cast<double>(rng.below(20)) / 20.0;  // many ties
    const Dataset d = with_proxies(proxies);
    const std::size_t k = 1 + rng.below(n);
    const Strata s = stratify(d, k);

    std::set<std::size_t> seen;
    std::size_t lo = n, hi = 0;
    double last = -1.0;
    for (const auto& m : s.members) {
      lo = std::min(lo, m.size());
      hi = std::max(hi, m.size());
      for (std::size_t i : m) {
        ASSERT_TRUE(seen.insert(i).second);
        ASSERT_GE(d[i].proxy, last);
        last = d[i].proxy;
      }
    }
    ASSERT_EQ(seen.size(), n);
    ASSERT_LE(hi - lo, 1u);
  }
}

}  // namespace
}  // namespace abae
