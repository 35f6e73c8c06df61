#include "abae/synthgen.hpp"

#include <cmath>

#include "abae/error.hpp"
#include "abae/sampler.hpp"

namespace abae {

std::string to_string(ValueLaw law) {
  return law == ValueLaw::TwoPoint ? "two-point" : "truncated-normal";
}

ValueLaw value_law_from_string(const std::string& name) {
  if (name == "two-point") return ValueLaw::TwoPoint;
  if (name == "truncated-normal") return ValueLaw::TruncatedNormal;
  throw InvalidSpec("unknown value law '" + name + "'");
}

void SyntheticSpec::validate() const {
  if (strata.empty()) throw InvalidSpec("synthetic spec needs at least one stratum");
  if (records_per_stratum < 1) throw InvalidSpec("records_per_stratum must be positive");
  if (!(proxy_noise >= 0.0 && proxy_noise < 1.0)) throw InvalidSpec("proxy_noise must be in [0, 1)");
  bool any_match = false;
  for (const StratumParams& s : strata) {
    if (!(s.p >= 0.0 && s.p <= 1.0)) throw InvalidSpec("p_k must be in [0, 1]");
    if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma)) throw InvalidSpec("sigma_k must be >= 0");
    if (!std::isfinite(s.mu)) throw InvalidSpec("mu_k must be finite");
    if (std::llround(s.p * static_cast<double>(records_per_stratum)) > 0) any_match = true;
  }
  if (!any_match) throw InvalidSpec("no stratum would contain a matching record");
}

SyntheticSpec SyntheticSpec::default_suite() {
  SyntheticSpec spec;
  spec.strata = {{0.01, 1.0, 1.0}, {0.05, 2.0, 1.0}, {0.2, 3.0, 2.0}, {0.5, 4.0, 2.0}};
  spec.records_per_stratum = 100000;
  spec.law = ValueLaw::TruncatedNormal;
  spec.proxy_noise = 0.0;
  spec.seed = RngSeed{42, 0};
  return spec;
}

namespace {

double draw_value(const StratumParams& s, ValueLaw law, Rng& rng) {
  if (law == ValueLaw::TwoPoint) return rng.uniform() < 0.5 ? s.mu - s.sigma : s.mu + s.sigma;
  if (s.sigma == 0.0) return s.mu;
  double z;
  do {
    z = rng.normal();
  } while (std::abs(z) > 5.0);
  return s.mu + s.sigma * z;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t k = spec.k();
  const std::size_t per = spec.records_per_stratum;
  std::vector<Record> records;
  records.reserve(k * per);

  for (std::size_t j = 0; j < k; ++j) {
    const StratumParams& s = spec.strata[j];
    Rng rng(spec.seed.child(j));
    std::vector<Record> block(per);
    for (std::size_t i = 0; i < per; ++i) {
      Record& r = block[i];
      r.id = j * per + i;
      const double banded = (static_cast<double>(j) + rng.uniform()) / static_cast<double>(k);
      r.proxy = (1.0 - spec.proxy_noise) * banded + spec.proxy_noise * rng.uniform();
      r.value = draw_value(s, spec.law, rng);
    }

    // Exact match count; positions come from a random permutation.
    const auto matches = static_cast<std::size_t>(std::llround(s.p * static_cast<double>(per)));
    PartialShuffle shuffle(per);
    for (std::size_t m = 0; m < matches; ++m) {
      Record& r = block[shuffle.next(rng)];
      r.predicate = true;
      if (spec.law == ValueLaw::TwoPoint) {
        // Balanced signs give exact mean mu and variance sigma^2 when m is even.
        if (m + 1 == matches && matches % 2 == 1) {
          r.value = draw_value(s, spec.law, rng);
        } else {
          r.value = m < matches / 2 ? s.mu + s.sigma : s.mu - s.sigma;
        }
      }
    }
    records.insert(records.end(), block.begin(), block.end());
  }

  Dataset dataset("synthetic", std::move(records));
  Strata strata = stratify(dataset, k);
  TruePopulation truth = population_truth(dataset, strata);
  return SyntheticData{std::move(dataset), std::move(strata), std::move(truth)};
}

TruePopulation population_truth(const Dataset& dataset, const Strata& strata) {
  const std::size_t k = strata.k();
  std::vector<double> p(k, 0.0), mu(k, 0.0), sigma(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& members = strata.members[j];
    std::size_t b = 0;
    double sum = 0.0;
    for (std::size_t i : members) {
      if (dataset[i].predicate) {
        ++b;
        sum += dataset[i].value;
      }
    }
    p[j] = static_cast<double>(b) / static_cast<double>(members.size());
    if (b == 0) continue;
    mu[j] = sum / static_cast<double>(b);
    double ss = 0.0;
    for (std::size_t i : members) {
      if (dataset[i].predicate) ss += (dataset[i].value - mu[j]) * (dataset[i].value - mu[j]);
    }
    sigma[j] = std::sqrt(ss / static_cast<double>(b));
  }
  return TruePopulation::from_strata(std::move(p), std::move(sigma), std::move(mu));
}

}  // namespace abae
