#include "abae/sampler.hpp"

#include <string>

#include "abae/error.hpp"

namespace abae {

std::size_t PartialShuffle::slot(std::size_t i) const {
  auto it = displaced_.find(i);
  return it == displaced_.end() ? i : it->second;
}

std::size_t PartialShuffle::next(Rng& rng) {
  if (drawn_ >= n_) throw InvalidArgument("partial shuffle exhausted");
  const std::size_t j = drawn_ + static_cast<std::size_t>(rng.below(n_ - drawn_));
  const std::size_t picked = slot(j);
  if (j != drawn_) displaced_[j] = slot(drawn_);
  displaced_.erase(drawn_);
  ++drawn_;
  return picked;
}

namespace {

// Appends `count` not-yet-drawn members of a stratum to out.
void draw_positions(const std::vector<std::size_t>& members, PartialShuffle& shuffle,
                    std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
  for (std::size_t i = 0; i < count; ++i) out.push_back(members[shuffle.next(rng)]);
}

std::vector<double> union_matches(const StratumSamples& s) {
  std::vector<double> all = s.matched1;
  all.insert(all.end(), s.matched2.begin(), s.matched2.end());
  return all;
}

}  // namespace

Stage1Result stage1(const Strata& strata, OracleAccess& access, std::uint64_t n1, RngSeed seed) {
  if (n1 < 1) throw InvalidArgument("n1 must be positive");
  const std::size_t k = strata.k();
  Stage1Result result{StratumEstimates(k), SampleStore{}, {}};
  result.store.strata.resize(k);
  Rng rng(seed);

  std::vector<std::size_t> batch;
  std::vector<std::size_t> offsets(k + 1, 0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& members = strata.members[j];
    StratumSamples& s = result.store.strata[j];
    s.shuffle = PartialShuffle(members.size());
    std::size_t count = static_cast<std::size_t>(n1);
    if (members.size() < n1) {
      result.warnings.push_back("StratumTooSmall: stratum " + std::to_string(j) + " has " +
                                std::to_string(members.size()) + " records, n1 = " +
                                std::to_string(n1));
      count = members.size();
    }
    draw_positions(members, s.shuffle, count, rng, s.stage1);
    batch.insert(batch.end(), s.stage1.begin(), s.stage1.end());
    offsets[j + 1] = batch.size();
  }

  const std::vector<Reveal> reveals = access.charge_and_reveal(batch);

  StratumEstimates& est = result.estimates;
  for (std::size_t j = 0; j < k; ++j) {
    StratumSamples& s = result.store.strata[j];
    s.stage1_reveals.assign(reveals.begin() + static_cast<std::ptrdiff_t>(offsets[j]),
                            reveals.begin() + static_cast<std::ptrdiff_t>(offsets[j + 1]));
    for (const Reveal& r : s.stage1_reveals) {
      if (r.predicate) s.matched1.push_back(r.value);
    }
    est.drawn[j] = s.stage1.size();
    est.b[j] = s.matched1.size();
    est.p_hat[j] = est.drawn[j] > 0 ? static_cast<double>(est.b[j]) / est.drawn[j] : 0.0;
    summarize_matches(s.matched1, est.mu_hat[j], est.sigma_hat[j]);
  }
  return result;
}

StratumEstimates stage2(const Strata& strata, OracleAccess& access, const AllocationPlan& plan,
                        SampleStore& store, const StratumEstimates& stage1_estimates, bool reuse,
                        RngSeed seed, std::vector<std::string>& warnings) {
  const std::size_t k = strata.k();
  if (plan.k() != k || store.k() != k || stage1_estimates.k() != k) {
    throw InvalidArgument("stage 2 inputs disagree on the number of strata");
  }
  if (store.has_stage2) throw InvalidArgument("stage 2 already ran on this sample store");
  Rng rng(seed);

  std::vector<std::size_t> batch;
  std::vector<std::size_t> offsets(k + 1, 0);
  for (std::size_t j = 0; j < k; ++j) {
    StratumSamples& s = store.strata[j];
    std::size_t want = static_cast<std::size_t>(plan.draws[j]);
    if (want > s.shuffle.remaining()) {
      warnings.push_back("StratumExhausted: stratum " + std::to_string(j) + " requested " +
                         std::to_string(want) + " draws, " +
                         std::to_string(s.shuffle.remaining()) + " unsampled records remain");
      want = s.shuffle.remaining();
    }
    draw_positions(strata.members[j], s.shuffle, want, rng, s.stage2);
    batch.insert(batch.end(), s.stage2.begin(), s.stage2.end());
    offsets[j + 1] = batch.size();
  }

  const std::vector<Reveal> reveals = access.charge_and_reveal(batch);

  StratumEstimates est(k);
  for (std::size_t j = 0; j < k; ++j) {
    StratumSamples& s = store.strata[j];
    s.stage2_reveals.assign(reveals.begin() + static_cast<std::ptrdiff_t>(offsets[j]),
                            reveals.begin() + static_cast<std::ptrdiff_t>(offsets[j + 1]));
    for (const Reveal& r : s.stage2_reveals) {
      if (r.predicate) s.matched2.push_back(r.value);
    }
    if (reuse) {
      const std::vector<double> all = union_matches(s);
      est.drawn[j] = s.stage1.size() + s.stage2.size();
      est.b[j] = all.size();
      est.p_hat[j] = est.drawn[j] > 0 ? static_cast<double>(est.b[j]) / est.drawn[j] : 0.0;
      summarize_matches(all, est.mu_hat[j], est.sigma_hat[j]);
    } else {
      est.drawn[j] = s.stage2.size();
      est.b[j] = s.matched2.size();
      est.p_hat[j] = stage1_estimates.p_hat[j];
      summarize_matches(s.matched2, est.mu_hat[j], est.sigma_hat[j]);
    }
  }
  store.reuse = reuse;
  store.has_stage2 = true;
  return est;
}

double estimate_mu_all(const StratumEstimates& estimates) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < estimates.k(); ++k) {
    num += estimates.p_hat[k] * estimates.mu_hat[k];
    den += estimates.p_hat[k];
  }
  if (!(den > 0.0)) throw NoPositiveSamples("no stratum produced a predicate match");
  return num / den;
}

}  // namespace abae
