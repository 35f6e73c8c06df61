#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "abae/allocation.hpp"
#include "abae/core.hpp"
#include "abae/rng.hpp"
#include "abae/stratifier.hpp"

namespace abae {

/// Incremental uniform sampling without replacement from positions [0, n).
///
/// A sparse Fisher-Yates shuffle: the i-th call returns the i-th element of a
/// uniformly random permutation, storing only the displaced slots. Stage 2
/// keeps drawing from the permutation Stage 1 started, so the two stages
/// never pick the same record.
class PartialShuffle {
 public:
  explicit PartialShuffle(std::size_t n = 0) : n_(n) {}

  std::size_t next(Rng& rng);
  std::size_t drawn() const noexcept { return drawn_; }
  std::size_t remaining() const noexcept { return n_ - drawn_; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t slot(std::size_t i) const;

  std::size_t n_;
  std::size_t drawn_ = 0;
  std::unordered_map<std::size_t, std::size_t> displaced_;
};

/// Everything sampled from one stratum, in draw order.
struct StratumSamples {
  std::vector<std::size_t> stage1;  // R_k^(1), dataset positions
  std::vector<Reveal> stage1_reveals;
  std::vector<std::size_t> stage2;  // records first drawn in Stage 2
  std::vector<Reveal> stage2_reveals;
  std::vector<double> matched1;     // X_k^(1)
  std::vector<double> matched2;     // Stage-2 matches not already in R_k^(1)
  PartialShuffle shuffle;
};

struct SampleStore {
  std::vector<StratumSamples> strata;
  bool reuse = false;        // set by stage2
  bool has_stage2 = false;

  std::size_t k() const noexcept { return strata.size(); }
};

struct Stage1Result {
  StratumEstimates estimates;
  SampleStore store;
  std::vector<std::string> warnings;
};

/// Stage 1: min(n1, |S_k|) uniform draws without replacement per stratum,
/// then p_hat = B/drawn, mu_hat = mean of matches (0 if none) and sigma_hat
/// = unbiased sample std. deviation (0 if B <= 1).
Stage1Result stage1(const Strata& strata, OracleAccess& access, std::uint64_t n1, RngSeed seed);

/// Stage 2: ceil(n2 T_k) fresh draws per stratum from records Stage 1 did not
/// touch. With reuse the Stage-1 draws are merged in and p_hat is recomputed
/// over the union; without reuse p_hat keeps its Stage-1 value and mu_hat uses
/// the Stage-2 matches only. An exhausted stratum yields what remains and
/// appends a diagnostic to warnings.
StratumEstimates stage2(const Strata& strata, OracleAccess& access, const AllocationPlan& plan,
                        SampleStore& store, const StratumEstimates& stage1_estimates, bool reuse,
                        RngSeed seed, std::vector<std::string>& warnings);

/// sum_k p_hat_k mu_hat_k / sum_k p_hat_k. Throws NoPositiveSamples when all
/// p_hat_k are zero.
double estimate_mu_all(const StratumEstimates& estimates);

}  // namespace abae
