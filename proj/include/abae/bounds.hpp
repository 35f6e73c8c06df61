#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abae/rng.hpp"
#include "abae/synthgen.hpp"

namespace abae {

// Closed-form concentration bounds on the Stage-1 and Stage-2 quantities, in
// their explicit (constant-carrying) form. delta and gamma are failure
// probabilities in (0, 1]; delta = 1 makes every slack term vanish.

/// p + sqrt(2 ln(1/delta) p / n1).
double p_upper_bound(double p, std::uint64_t n1, double delta);

/// max(0, p - sqrt(2 ln(1/delta) p / n1)).
double p_lower_bound(double p, std::uint64_t n1, double delta);

struct WeightInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Bounds on w_hat_k = p_hat_k / sum p_hat obtained by pushing every p_hat to
/// the edge of its interval:
///   (p_k - r_k) / (p_all + sum r) <= w_hat_k <= (p_k + r_k) / (p_all - sum r)
/// with r_k = sqrt(2 ln(1/delta) p_k / n1). The upper end is +inf when the
/// denominator is not positive; the lower end is clamped at 0.
std::vector<WeightInterval> weight_bounds(std::span<const double> p, std::uint64_t n1,
                                          double delta);

/// max(0, p n1 - sqrt(2 ln(1/delta) p n1)).
double b1_lower_bound(double p, std::uint64_t n1, double delta);

/// Half-width sqrt(8 ln(1/delta) c_mu4 / b1) of the interval around sigma^2
/// that holds the unbiased sample variance. Throws InsufficientMatches if b1 < 2.
double sigma2_halfwidth(std::uint64_t b1, double delta, double c_mu4);

/// sqrt(p) sigma + sqrt(2 / n1) c_sigma, the bound on sqrt(p_hat) sigma_hat
/// when Stage 1 saw fewer than two matches.
double psigma_upper_bound(double p, double sigma, std::uint64_t n1, double c_sigma);

/// Small-stratum cutoff (2 ln(1/delta) + 2 sqrt(ln(1/delta)) + 2) / n1.
double p_star(std::uint64_t n1, double delta);

/// max(0, m (1 - sqrt(2 ln(1/gamma) / m))) with m = p t_hat n2 > 0.
double b2_lower_bound(double p, double t_hat, std::uint64_t n2, double gamma);

enum class Lemma : int {
  PUpper = 1,
  PLower = 2,
  Weights = 3,
  B1Lower = 4,
  Sigma2 = 5,
  PSigma = 6,
  B2Lower = 8,
};

Lemma lemma_from_int(int id);

struct BoundParams {
  double c_sigma = 0.0;  // <= 0: use each stratum's realized max |x - mu|
  double c_mu4 = 0.0;    // <= 0: use each stratum's (max - min)^4 / 4
  // Stage-2 lemma only: split Stage 2 by the true T* instead of the Stage-1
  // estimate.
  bool true_allocation = false;
};

struct StratumCheck {
  std::uint64_t applicable = 0;  // trials where the inequality applies to this stratum
  std::uint64_t violations = 0;
  double nominal = 0.0;
  double empirical = 0.0;
  bool pass = true;
};

struct BoundCheckReport {
  int lemma = 0;
  double level = 0.0;  // delta, or gamma for the Stage-2 lemma
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;  // trials in which any stratum violated
  double nominal = 0.0;          // union-bounded failure probability, capped at 1
  double empirical = 0.0;
  bool pass = false;             // simultaneous and every per-stratum check pass
  std::vector<StratumCheck> per_stratum;
};

/// empirical <= nominal + 3 sqrt(nominal (1 - nominal) / trials).
bool within_nominal(double empirical, double nominal, std::uint64_t trials);

/// Simulates `trials` independent Stage-1 runs (plus allocation and Stage 2
/// for the Stage-2 lemma) on the synthetic population and counts how often
/// the lemma's inequality fails, per stratum and simultaneously over strata.
/// Requires trials >= 1000.
BoundCheckReport validate_bound(Lemma lemma, const SyntheticData& data, std::uint64_t n1,
                                std::uint64_t n2, double level, std::uint64_t trials,
                                RngSeed seed, const BoundParams& params = {});

}  // namespace abae
