#include "abae/stratifier.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "abae/error.hpp"

namespace abae {

Strata stratify(const Dataset& dataset, std::size_t k) {
  const std::size_t n = dataset.size();
  if (k < 1 || k > n) {
    throw InvalidK("k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Record& ra = dataset[a];
    const Record& rb = dataset[b];
    if (ra.proxy != rb.proxy) return ra.proxy < rb.proxy;
    return ra.id < rb.id;
  });

  Strata out;
  out.members.resize(k);
  out.boundaries.resize(k);
  const std::size_t q = n / k;
  const std::size_t r = n % k;
  std::size_t pos = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t size = q + (j < r ? 1 : 0);
    auto& m = out.members[j];
    m.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
             order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    out.boundaries[j] = {dataset[m.front()].proxy, dataset[m.back()].proxy};
    pos += size;
  }
  return out;
}

}  // namespace abae
