#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "abae/core.hpp"

namespace abae {

/// K proxy-ordered, equal-sized strata. Members are dataset positions.
struct Strata {
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::pair<double, double>> boundaries;  // (lowest, highest) proxy per stratum

  std::size_t k() const noexcept { return members.size(); }
};

/// Sorts records by (proxy, id) and cuts the order into k contiguous blocks.
/// With |D| = qk + r the first r strata get q + 1 records.
/// Throws InvalidK unless 1 <= k <= |D|.
Strata stratify(const Dataset& dataset, std::size_t k);

}  // namespace abae
