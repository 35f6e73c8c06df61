#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abae/core.hpp"

namespace abae {

/// Ground-truth per-stratum quantities of a population.
struct TruePopulation {
  std::vector<double> p;      // predicate positive rate
  std::vector<double> sigma;  // std. deviation of matched values
  std::vector<double> mu;     // mean of matched values
  double p_all = 0.0;
  std::vector<double> w;      // p / p_all
  double mu_all = 0.0;

  /// Derives p_all, w and mu_all. Throws InvalidArgument on mismatched
  /// lengths, negative rates or a zero total rate.
  static TruePopulation from_strata(std::vector<double> p, std::vector<double> sigma,
                                    std::vector<double> mu);

  std::size_t k() const noexcept { return p.size(); }
};

/// Stage-2 split: fractions on the simplex and their integer draw counts.
struct AllocationPlan {
  std::vector<double> t;
  std::vector<std::uint64_t> draws;  // ceil(n2 * t[k])
  std::uint64_t n2 = 0;
  bool degenerate = false;           // all sqrt(p)*sigma were zero, uniform used

  std::size_t k() const noexcept { return t.size(); }
};

/// Fractions proportional to sqrt(p_k) * sigma_k, normalised to sum to one.
/// Falls back to 1/K (and sets degenerate) when every weight is zero.
AllocationPlan neyman_fractions(std::span<const double> p, std::span<const double> sigma);

/// T*_k = sqrt(p_k) sigma_k / sum_i sqrt(p_i) sigma_i on the true population.
AllocationPlan optimal_allocation(const TruePopulation& pop);

/// Same formula on Stage-1 estimates, with draws = ceil(n2 * T_k).
AllocationPlan empirical_allocation(const StratumEstimates& est, std::uint64_t n2);

/// Builds a plan from explicit fractions (validated and renormalised).
AllocationPlan plan_from_fractions(std::vector<double> t, std::uint64_t n2);

/// ceil(n2 * t) guarded against representation error just above an integer.
std::uint64_t ceil_draws(double n2, double t);

/// Variance functional sum_k w_k^2 sigma_k^2 / (p_k t_k n). Returns +inf when
/// some t_k = 0 while w_k sigma_k > 0.
double loss(std::span<const double> t, const TruePopulation& pop, double n);

/// E* = (sum_k sqrt(p_k) sigma_k)^2 / (n p_all^2).
double mse_upper_bound(const TruePopulation& pop, double n);

}  // namespace abae
