#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "abae/allocation.hpp"
#include "abae/engine.hpp"
#include "abae/error.hpp"
#include "abae/io.hpp"
#include "abae/report.hpp"
#include "abae/stratifier.hpp"
#include "abae/synthgen.hpp"

namespace py = pybind11;

namespace {

using Answer = std::pair<bool, double>;
using OracleFn = std::function<std::vector<Answer>(std::vector<abae::RecordId>)>;

// Forwards each batch of ids to a Python callable returning (predicate, value)
// pairs in request order.
class CallableOracle final : public abae::PredicateOracle {
 public:
  explicit CallableOracle(OracleFn fn) : fn_(std::move(fn)) {}

  std::vector<abae::Reveal> evaluate(const abae::Dataset& dataset,
                                     std::span<const std::size_t> indices) override {
    std::vector<abae::RecordId> ids;
    ids.reserve(indices.size());
    for (std::size_t i : indices) ids.push_back(dataset[i].id);
    std::vector<Answer> answers;
    {
      py::gil_scoped_acquire gil;
      answers = fn_(std::move(ids));
    }
    if (answers.size() != indices.size()) {
      throw abae::OracleProtocolError("oracle returned " + std::to_string(answers.size()) +
                                      " answers for " + std::to_string(indices.size()) + " ids");
    }
    std::vector<abae::Reveal> out;
    out.reserve(answers.size());
    for (const auto& [pred, value] : answers) out.push_back({pred, value});
    return out;
  }

 private:
  OracleFn fn_;
};

abae::Dataset make_dataset(const std::vector<abae::RecordId>& ids, const std::vector<double>& proxies,
                           const std::vector<double>& values,
                           const std::optional<std::vector<bool>>& predicates, const std::string& name) {
  if (proxies.size() != ids.size() || values.size() != ids.size() ||
      (predicates && predicates->size() != ids.size())) {
    throw abae::InvalidArgument("ids, proxies, values and predicates must have equal length");
  }
  std::vector<abae::Record> records(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    records[i] = {ids[i], proxies[i], values[i], predicates ? (*predicates)[i] : false};
  }
  return abae::Dataset(name, std::move(records), predicates.has_value());
}

abae::TruePopulation population(std::vector<double> p, std::vector<double> sigma,
                                std::vector<double> mu) {
  return abae::TruePopulation::from_strata(std::move(p), std::move(sigma), std::move(mu));
}

py::dict truth_dict(const abae::TruePopulation& t) {
  py::dict d;
  d["p"] = t.p;
  d["mu"] = t.mu;
  d["sigma"] = t.sigma;
  d["p_all"] = t.p_all;
  d["mu_all"] = t.mu_all;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-stage stratified sampling for aggregates over expensive predicates.";

  auto base = py::register_exception<abae::Error>(m, "AbaeError", PyExc_RuntimeError);
  py::register_exception<abae::BudgetExhausted>(m, "BudgetExhausted", base.ptr());
  py::register_exception<abae::NoPositiveSamples>(m, "NoPositiveSamples", base.ptr());
  py::register_exception<abae::OracleProtocolError>(m, "OracleProtocolError", base.ptr());
  py::register_exception<abae::InvalidK>(m, "InvalidK", base.ptr());
  auto parse = py::register_exception<abae::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<abae::DuplicateId>(m, "DuplicateId", parse.ptr());

  py::class_<abae::Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("ids"), py::arg("proxies"), py::arg("values"),
           py::arg("predicates") = py::none(), py::arg("name") = "data")
      .def_static(
          "from_csv",
          [](const std::string& path, bool require_predicate) {
            return abae::ingest_csv(path, require_predicate).dataset;
          },
          py::arg("path"), py::arg("require_predicate") = true)
      .def("__len__", &abae::Dataset::size)
      .def_property_readonly("name", &abae::Dataset::name)
      .def_property_readonly("has_predicate", &abae::Dataset::has_predicate)
      .def("write_csv", [](const abae::Dataset& d, const std::string& path) {
        std::ofstream out(path);
        if (!out) throw abae::InvalidArgument("cannot write '" + path + "'");
        abae::write_csv(d, out);
      });

  m.def(
      "generate",
      [](std::optional<std::vector<std::tuple<double, double, double>>> strata,
         std::size_t records_per_stratum, std::uint64_t seed, const std::string& law,
         double proxy_noise) {
        abae::SyntheticSpec spec = abae::SyntheticSpec::default_suite();
        if (strata) {
          spec.strata.clear();
          for (const auto& [p, mu, sigma] : *strata) spec.strata.push_back({p, mu, sigma});
        }
        spec.records_per_stratum = records_per_stratum;
        spec.seed = abae::RngSeed{seed, 0};
        spec.law = abae::value_law_from_string(law);
        spec.proxy_noise = proxy_noise;
        abae::SyntheticData data = abae::generate(spec);
        return py::make_tuple(std::move(data.dataset), truth_dict(data.truth));
      },
      py::arg("strata") = py::none(), py::arg("records_per_stratum") = 100000,
      py::arg("seed") = 42, py::arg("law") = "truncated-normal", py::arg("proxy_noise") = 0.0,
      "Synthetic dataset and its realized per-stratum truth. strata is a list of (p, mu, sigma).");

  m.def(
      "population_truth",
      [](const abae::Dataset& d, std::size_t k) {
        return truth_dict(abae::population_truth(d, abae::stratify(d, k)));
      },
      py::arg("dataset"), py::arg("k"));

  m.def(
      "run_json",
      [](const abae::Dataset& d, std::size_t k, std::uint64_t n1, std::uint64_t n2, bool reuse,
         std::uint64_t seed, std::size_t resamples, double alpha, bool compute_ci,
         std::optional<OracleFn> oracle) {
        abae::AbaeConfig cfg;
        cfg.k = k;
        cfg.n1 = n1;
        cfg.n2 = n2;
        cfg.reuse = reuse;
        cfg.compute_ci = compute_ci;
        cfg.bootstrap.resamples = resamples;
        cfg.bootstrap.alpha = alpha;
        std::optional<CallableOracle> backend;
        if (oracle) backend.emplace(std::move(*oracle));
        abae::QueryReport report;
        {
          py::gil_scoped_release release;
          report = abae::run_abae(d, cfg, abae::RngSeed{seed, 0}, backend ? &*backend : nullptr);
        }
        return abae::query_report_json(report).dump(2);
      },
      py::arg("dataset"), py::arg("k") = 5, py::arg("n1") = 100, py::arg("n2") = 2000,
      py::arg("reuse") = false, py::arg("seed") = 0, py::arg("resamples") = 1000,
      py::arg("alpha") = 0.05, py::arg("compute_ci") = true, py::arg("oracle") = py::none());

  m.def(
      "optimal_allocation",
      [](std::vector<double> p, std::vector<double> sigma, std::vector<double> mu) {
        return abae::optimal_allocation(population(std::move(p), std::move(sigma), std::move(mu))).t;
      },
      py::arg("p"), py::arg("sigma"), py::arg("mu"));

  m.def(
      "loss",
      [](const std::vector<double>& t, std::vector<double> p, std::vector<double> sigma,
         std::vector<double> mu, double n) {
        return abae::loss(t, population(std::move(p), std::move(sigma), std::move(mu)), n);
      },
      py::arg("t"), py::arg("p"), py::arg("sigma"), py::arg("mu"), py::arg("n"));

  m.def(
      "mse_upper_bound",
      [](std::vector<double> p, std::vector<double> sigma, std::vector<double> mu, double n) {
        return abae::mse_upper_bound(population(std::move(p), std::move(sigma), std::move(mu)), n);
      },
      py::arg("p"), py::arg("sigma"), py::arg("mu"), py::arg("n"));
}
