#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace abae {

using RecordId = std::uint64_t;

/// One dataset row. predicate and value are only meant to be read through
/// OracleAccess, which charges the budget on first access.
struct Record {
  RecordId id = 0;
  double proxy = 0.0;
  double value = 0.0;
  bool predicate = false;
};

/// Immutable, non-empty collection of records with unique ids.
class Dataset {
 public:
  Dataset(std::string name, std::vector<Record> records, bool has_predicate = true);

  std::size_t size() const noexcept { return records_.size(); }
  const Record& operator[](std::size_t index) const { return records_[index]; }
  std::span<const Record> records() const noexcept { return records_; }
  const std::string& name() const noexcept { return name_; }

  /// False when the predicate column was absent at load time, in which case
  /// an external oracle must supply (predicate, value).
  bool has_predicate() const noexcept { return has_predicate_; }

  /// Position of a record id, or size() if unknown.
  std::size_t index_of(RecordId id) const;

 private:
  std::string name_;
  std::vector<Record> records_;
  std::unordered_map<RecordId, std::size_t> index_;
  bool has_predicate_;
};

/// Counts oracle invocations against the cap K*N1 + N2 + K.
class BudgetLedger {
 public:
  BudgetLedger(std::size_t k, std::uint64_t n1_per_stratum, std::uint64_t n2_total);

  std::size_t k() const noexcept { return k_; }
  std::uint64_t n1() const noexcept { return n1_; }
  std::uint64_t n2() const noexcept { return n2_; }
  std::uint64_t spent() const noexcept { return spent_; }
  std::uint64_t cap() const noexcept { return k_ * n1_ + n2_ + k_; }
  std::uint64_t remaining() const noexcept { return cap() - spent_; }

  /// Throws BudgetExhausted (and charges nothing) if count would exceed the cap.
  void charge(std::uint64_t count);

 private:
  std::size_t k_;
  std::uint64_t n1_;
  std::uint64_t n2_;
  std::uint64_t spent_ = 0;
};

/// Result of evaluating the expensive predicate and statistic on one record.
struct Reveal {
  bool predicate = false;
  double value = 0.0;

  bool operator==(const Reveal&) const = default;
};

/// Backend that evaluates (O(x), f(x)) for a batch of dataset positions.
class PredicateOracle {
 public:
  virtual ~PredicateOracle() = default;
  virtual std::vector<Reveal> evaluate(const Dataset& dataset,
                                       std::span<const std::size_t> indices) = 0;
};

/// Reads the predicate and value columns stored in the dataset.
class InlineOracle final : public PredicateOracle {
 public:
  std::vector<Reveal> evaluate(const Dataset& dataset,
                               std::span<const std::size_t> indices) override;
};

/// The budget-charging access path. Scoped to one query execution.
///
/// A record is charged once, on its first reveal; later reads are served from
/// the cache for free, which is what makes Stage-1 sample reuse free.
class OracleAccess {
 public:
  OracleAccess(const Dataset& dataset, BudgetLedger& ledger, PredicateOracle& oracle);

  Reveal charge_and_reveal(std::size_t index);

  /// Batch form. All fresh records are charged up front; if they do not fit in
  /// the remaining budget nothing is charged and BudgetExhausted is thrown.
  std::vector<Reveal> charge_and_reveal(std::span<const std::size_t> indices);

  bool charged(std::size_t index) const { return revealed_.contains(index); }
  const BudgetLedger& ledger() const noexcept { return ledger_; }
  const Dataset& dataset() const noexcept { return dataset_; }

 private:
  const Dataset& dataset_;
  BudgetLedger& ledger_;
  PredicateOracle& oracle_;
  std::unordered_map<std::size_t, Reveal> revealed_;
};

/// Per-stratum estimates after Stage 1 or Stage 2.
struct StratumEstimates {
  std::vector<double> p_hat;
  std::vector<double> mu_hat;
  std::vector<double> sigma_hat;
  std::vector<std::uint64_t> b;      // matched samples
  std::vector<std::uint64_t> drawn;  // records sampled

  explicit StratumEstimates(std::size_t k = 0)
      : p_hat(k, 0.0), mu_hat(k, 0.0), sigma_hat(k, 0.0), b(k, 0), drawn(k, 0) {}

  std::size_t k() const noexcept { return p_hat.size(); }
};

/// Fills mu_hat/sigma_hat for one stratum from its matched values: sample
/// mean (0 if empty) and unbiased sample standard deviation (0 if fewer than two).
void summarize_matches(std::span<const double> matched, double& mu_hat, double& sigma_hat);

}  // namespace abae
