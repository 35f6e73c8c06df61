#pragma once

#include <vector>

#include "abae/core.hpp"

namespace abae::testing {

// Dataset whose record i has id i, proxy (i + 0.5) / n and the given
// predicate/value columns.
inline Dataset make_dataset(const std::vector<bool>& predicate, const std::vector<double>& value) {
  std::vector<Record> rows;
  const std::size_t n = predicate.size();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({i, (static_cast<double>(i) + 0.5) / static_cast<double>(n), value[i],
                    static_cast<bool>(predicate[i])});
  }
  return Dataset("test", std::move(rows));
}

// Counts every evaluate() call and record passed through it.
class CountingOracle final : public PredicateOracle {
 public:
  std::vector<Reveal> evaluate(const Dataset& dataset,
                               std::span<const std::size_t> indices) override {
    ++calls;
    evaluated += indices.size();
    return inner_.evaluate(dataset, indices);
  }
  std::size_t calls = 0;
  std::size_t evaluated = 0;

 private:
  InlineOracle inner_;
};

}  // namespace abae::testing
