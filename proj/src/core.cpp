#include "abae/core.hpp"

#include <algorithm>
#include <cmath>

#include "abae/error.hpp"

namespace abae {

Dataset::Dataset(std::string name, std::vector<Record> records, bool has_predicate)
    : name_(std::move(name)), records_(std::move(records)), has_predicate_(has_predicate) {
  if (records_.empty()) throw InvalidArgument("dataset '" + name_ + "' is empty");
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    if (!std::isfinite(r.proxy) || !std::isfinite(r.value)) {
      throw InvalidArgument("record " + std::to_string(r.id) + " has a non-finite field");
    }
    if (!index_.emplace(r.id, i).second) {
      throw InvalidArgument("duplicate record id " + std::to_string(r.id));
    }
  }
}

std::size_t Dataset::index_of(RecordId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? records_.size() : it->second;
}

BudgetLedger::BudgetLedger(std::size_t k, std::uint64_t n1_per_stratum, std::uint64_t n2_total)
    : k_(k), n1_(n1_per_stratum), n2_(n2_total) {
  if (k == 0 || n1_per_stratum == 0 || n2_total == 0) {
    throw InvalidArgument("budget ledger requires positive k, n1 and n2");
  }
}

void BudgetLedger::charge(std::uint64_t count) {
  if (count > remaining()) {
    throw BudgetExhausted("oracle budget exhausted: spent " + std::to_string(spent_) + " of " +
                          std::to_string(cap()) + ", requested " + std::to_string(count));
  }
  spent_ += count;
}

std::vector<Reveal> InlineOracle::evaluate(const Dataset& dataset,
                                           std::span<const std::size_t> indices) {
  std::vector<Reveal> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back({dataset[i].predicate, dataset[i].value});
  return out;
}

OracleAccess::OracleAccess(const Dataset& dataset, BudgetLedger& ledger, PredicateOracle& oracle)
    : dataset_(dataset), ledger_(ledger), oracle_(oracle) {}

Reveal OracleAccess::charge_and_reveal(std::size_t index) {
  const std::size_t one[] = {index};
  return charge_and_reveal(one).front();
}

std::vector<Reveal> OracleAccess::charge_and_reveal(std::span<const std::size_t> indices) {
  std::vector<std::size_t> fresh;
  for (std::size_t i : indices) {
    if (i >= dataset_.size()) throw InvalidArgument("record position out of range");
    if (!revealed_.contains(i)) fresh.push_back(i);
  }
  // A batch may name the same fresh record twice.
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());

  if (!fresh.empty()) {
    ledger_.charge(fresh.size());
    std::vector<Reveal> got = oracle_.evaluate(dataset_, fresh);
    if (got.size() != fresh.size()) {
      throw OracleProtocolError("oracle returned " + std::to_string(got.size()) +
                                " results for " + std::to_string(fresh.size()) + " records");
    }
    for (std::size_t j = 0; j < fresh.size(); ++j) {
      if (!std::isfinite(got[j].value)) {
        throw OracleProtocolError("oracle returned a non-finite value for record " +
                                  std::to_string(dataset_[fresh[j]].id));
      }
      revealed_.emplace(fresh[j], got[j]);
    }
  }

  std::vector<Reveal> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(revealed_.at(i));
  return out;
}

void summarize_matches(std::span<const double> matched, double& mu_hat, double& sigma_hat) {
  const std::size_t b = matched.size();
  mu_hat = 0.0;
  sigma_hat = 0.0;
  if (b == 0) return;
  double sum = 0.0;
  for (double x : matched) sum += x;
  mu_hat = sum / static_cast<double>(b);
  if (b < 2) return;
  double ss = 0.0;
  for (double x : matched) ss += (x - mu_hat) * (x - mu_hat);
  sigma_hat = std::sqrt(ss / static_cast<double>(b - 1));
}

}  // namespace abae
