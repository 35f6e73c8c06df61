#include "abae/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abae/error.hpp"

namespace abae {

TruePopulation TruePopulation::from_strata(std::vector<double> p, std::vector<double> sigma,
                                           std::vector<double> mu) {
  if (p.empty() || p.size() != sigma.size() || p.size() != mu.size()) {
    throw InvalidArgument("population vectors must be non-empty and of equal length");
  }
  TruePopulation pop;
  pop.p = std::move(p);
  pop.sigma = std::move(sigma);
  pop.mu = std::move(mu);
  for (std::size_t k = 0; k < pop.k(); ++k) {
    if (!(pop.p[k] >= 0.0 && pop.p[k] <= 1.0)) throw InvalidArgument("p_k must lie in [0, 1]");
    if (!(pop.sigma[k] >= 0.0)) throw InvalidArgument("sigma_k must be non-negative");
    pop.p_all += pop.p[k];
  }
  if (pop.p_all <= 0.0) throw InvalidArgument("population has no matching records");
  pop.w.resize(pop.k());
  for (std::size_t k = 0; k < pop.k(); ++k) {
    pop.w[k] = pop.p[k] / pop.p_all;
    pop.mu_all += pop.w[k] * pop.mu[k];
  }
  return pop;
}

std::uint64_t ceil_draws(double n2, double t) {
  const double x = n2 * t;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(x));
}

namespace {

void fill_draws(AllocationPlan& plan) {
  plan.draws.resize(plan.k());
  for (std::size_t k = 0; k < plan.k(); ++k) {
    plan.draws[k] = ceil_draws(static_cast<double>(plan.n2), plan.t[k]);
  }
}

}  // namespace

AllocationPlan neyman_fractions(std::span<const double> p, std::span<const double> sigma) {
  if (p.size() != sigma.size() || p.empty()) {
    throw InvalidArgument("allocation needs equal, non-empty p and sigma vectors");
  }
  const std::size_t k = p.size();
  AllocationPlan plan;
  plan.t.resize(k);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    plan.t[j] = std::sqrt(std::max(p[j], 0.0)) * std::max(sigma[j], 0.0);
    total += plan.t[j];
  }
  if (!(total > 0.0)) {
    plan.degenerate = true;
    for (double& t : plan.t) t = 1.0 / static_cast<double>(k);
    return plan;
  }
  for (double& t : plan.t) t /= total;
  return plan;
}

AllocationPlan optimal_allocation(const TruePopulation& pop) {
  return neyman_fractions(pop.p, pop.sigma);
}

AllocationPlan empirical_allocation(const StratumEstimates& est, std::uint64_t n2) {
  AllocationPlan plan = neyman_fractions(est.p_hat, est.sigma_hat);
  plan.n2 = n2;
  fill_draws(plan);
  return plan;
}

AllocationPlan plan_from_fractions(std::vector<double> t, std::uint64_t n2) {
  if (t.empty()) throw InvalidArgument("empty allocation");
  double total = 0.0;
  for (double v : t) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("allocation fractions must be >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw InvalidArgument("allocation fractions sum to zero");
  AllocationPlan plan;
  plan.t = std::move(t);
  for (double& v : plan.t) v /= total;
  plan.n2 = n2;
  fill_draws(plan);
  return plan;
}

double loss(std::span<const double> t, const TruePopulation& pop, double n) {
  if (t.size() != pop.k()) throw InvalidArgument("allocation length does not match population");
  double total = 0.0;
  for (std::size_t k = 0; k < pop.k(); ++k) {
    const double ws = pop.w[k] * pop.sigma[k];
    if (ws == 0.0) continue;
    if (t[k] <= 0.0) return std::numeric_limits<double>::infinity();
    total += ws * ws / (pop.p[k] * t[k] * n);
  }
  return total;
}

double mse_upper_bound(const TruePopulation& pop, double n) {
  double s = 0.0;
  for (std::size_t k = 0; k < pop.k(); ++k) s += std::sqrt(pop.p[k]) * pop.sigma[k];
  return s * s / (n * pop.p_all * pop.p_all);
}

}  // namespace abae
