#include "abae/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "abae/bounds.hpp"
#include "abae/engine.hpp"
#include "abae/error.hpp"
#include "abae/harness.hpp"
#include "abae/io.hpp"
#include "abae/report.hpp"
#include "abae/synthgen.hpp"

namespace abae::cli {

using nlohmann::json;

RunConfig merge_run_config(RunConfig base, const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "input") {
        base.input = value.get<std::string>();
      } else if (key == "k") {
        base.k = value.get<std::size_t>();
      } else if (key == "n1") {
        base.n1 = value.get<std::uint64_t>();
      } else if (key == "n2") {
        base.n2 = value.get<std::uint64_t>();
      } else if (key == "reuse") {
        base.reuse = value.get<bool>();
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "bootstrap_resamples") {
        base.bootstrap_resamples = value.get<std::size_t>();
      } else if (key == "alpha") {
        base.alpha = value.get<double>();
      } else if (key == "oracle_mode") {
        const std::string mode = value.get<std::string>();
        if (mode == "inline") {
          base.oracle_mode = OracleMode::Inline;
        } else if (mode == "subprocess") {
          base.oracle_mode = OracleMode::Subprocess;
        } else {
          throw InvalidArgument("oracle_mode must be 'inline' or 'subprocess'");
        }
      } else if (key == "oracle_command") {
        base.oracle_command = value.get<std::string>();
      } else if (key == "output") {
        base.output = value.get<std::string>();
      } else {
        throw InvalidArgument("unknown config field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  return base;
}

void validate(const RunConfig& c) {
  if (c.input.empty()) throw InvalidArgument("input path is required");
  if (c.k < 1) throw InvalidArgument("k must be positive");
  if (c.n1 < 1) throw InvalidArgument("n1 must be positive");
  if (c.n2 < 1) throw InvalidArgument("n2 must be positive");
  if (c.bootstrap_resamples < 100) throw InvalidArgument("bootstrap_resamples must be >= 100");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("alpha must be in (0, 1)");
  if (c.oracle_mode == OracleMode::Subprocess && c.oracle_command.empty()) {
    throw InvalidArgument("subprocess oracle mode needs oracle_command");
  }
}

namespace {

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << text;
}

std::string render(const json& doc) { return doc.dump(2) + "\n"; }

SyntheticSpec build_spec(std::size_t records, std::uint64_t seed, const std::string& law,
                         double noise) {
  SyntheticSpec spec = SyntheticSpec::default_suite();
  spec.records_per_stratum = records;
  spec.seed = RngSeed{seed, 0};
  spec.law = value_law_from_string(law);
  spec.proxy_noise = noise;
  return spec;
}

struct RunFlags {
  std::string config_path;
  RunConfig cfg;
  std::string oracle;
};

int cmd_run(CLI::App& sub, RunFlags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw InvalidArgument("cannot open config '" + f.config_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    cfg = merge_run_config(cfg, doc);
  }
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--input")) cfg.input = f.cfg.input;
  if (given("--k")) cfg.k = f.cfg.k;
  if (given("--n1")) cfg.n1 = f.cfg.n1;
  if (given("--n2")) cfg.n2 = f.cfg.n2;
  if (given("--reuse")) cfg.reuse = f.cfg.reuse;
  if (given("--seed")) cfg.seed = f.cfg.seed;
  if (given("--resamples")) cfg.bootstrap_resamples = f.cfg.bootstrap_resamples;
  if (given("--alpha")) cfg.alpha = f.cfg.alpha;
  if (given("--output")) cfg.output = f.cfg.output;
  if (given("--oracle")) {
    if (f.oracle == "inline") {
      cfg.oracle_mode = OracleMode::Inline;
      cfg.oracle_command.clear();
    } else {
      cfg.oracle_mode = OracleMode::Subprocess;
      cfg.oracle_command = f.oracle;
    }
  }
  validate(cfg);

  const bool inline_mode = cfg.oracle_mode == OracleMode::Inline;
  IngestResult ingested = ingest_csv(cfg.input, inline_mode);
  for (const std::string& w : ingested.warnings) err << "warning: " << w << "\n";

  AbaeConfig qc;
  qc.k = cfg.k;
  qc.n1 = cfg.n1;
  qc.n2 = cfg.n2;
  qc.reuse = cfg.reuse;
  qc.bootstrap.resamples = cfg.bootstrap_resamples;
  qc.bootstrap.alpha = cfg.alpha;

  std::unique_ptr<SubprocessOracle> oracle;
  if (!inline_mode) oracle = std::make_unique<SubprocessOracle>(cfg.oracle_command);
  QueryReport report = run_abae(ingested.dataset, qc, RngSeed{cfg.seed, 0}, oracle.get());
  report.warnings.insert(report.warnings.begin(), ingested.warnings.begin(),
                         ingested.warnings.end());
  emit(render(query_report_json(report)), cfg.output, out);
  return kExitOk;
}

struct SimulateFlags {
  std::vector<std::string> estimators{"abae"};
  std::vector<std::string> budgets;
  std::vector<std::uint64_t> totals;
  std::size_t trials = 1000;
  std::uint64_t seed = 7;
  std::uint64_t data_seed = 42;
  std::size_t records = 100000;
  std::string law = "truncated-normal";
  double noise = 0.0;
  bool coverage = false;
  double alpha = 0.05;
  std::size_t resamples = 1000;
  std::string output;
  std::string csv;
};

Budget parse_budget(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) throw InvalidArgument("budget must be N1:N2, got '" + text + "'");
  try {
    std::size_t used = 0;
    Budget b;
    b.n1 = std::stoull(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("n1");
    const std::string rest = text.substr(colon + 1);
    b.n2 = std::stoull(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("n2");
    return b;
  } catch (const std::logic_error&) {
    throw InvalidArgument("budget must be N1:N2, got '" + text + "'");
  }
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  plan.spec = build_spec(f.records, f.data_seed, f.law, f.noise);
  plan.trials = f.trials;
  plan.seed = RngSeed{f.seed, 0};
  plan.estimators.clear();
  for (const std::string& e : f.estimators) plan.estimators.push_back(estimator_from_string(e));
  for (const std::string& b : f.budgets) plan.budgets.push_back(parse_budget(b));
  const std::uint64_t k = plan.spec.k();
  for (std::uint64_t n : f.totals) {
    // Proportional split: half the budget to Stage 1, spread over the strata.
    Budget b;
    b.n1 = n / (2 * k);
    b.n2 = n - k * b.n1;
    plan.budgets.push_back(b);
  }
  if (plan.budgets.empty()) plan.budgets.push_back(Budget{100, 2000});

  const SyntheticData data = generate(plan.spec);
  json doc;
  std::string table;
  if (f.coverage) {
    BootstrapConfig bc;
    bc.alpha = f.alpha;
    bc.resamples = f.resamples;
    const std::vector<CoverageRow> rows = run_coverage(plan, bc, data);
    doc = {{"coverage", coverage_json(rows)}, {"alpha", f.alpha}};
    table = coverage_csv(rows);
  } else {
    const ExperimentResult result = run_mse(plan, data);
    for (const std::string& w : result.warnings) err << "warning: " << w << "\n";
    doc = experiment_json(result);
    table = experiment_csv(result);
  }
  emit(render(doc), f.output, out);
  if (!f.csv.empty()) emit(table, f.csv, out);
  return kExitOk;
}

struct BoundFlags {
  std::vector<int> lemmas{1, 2, 4, 5, 8};
  std::vector<double> deltas{0.05};
  std::uint64_t n1 = 100;
  std::uint64_t n2 = 2000;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 11;
  std::uint64_t data_seed = 42;
  std::size_t records = 100000;
  std::string law = "truncated-normal";
  std::string output;
};

int cmd_validate_bounds(const BoundFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<Lemma> lemmas;
  for (int id : f.lemmas) lemmas.push_back(lemma_from_int(id));
  const SyntheticData data = generate(build_spec(f.records, f.data_seed, f.law, 0.0));
  json reports = json::array();
  bool all_pass = true;
  std::uint64_t stream = 0;
  for (Lemma lemma : lemmas) {
    for (double delta : f.deltas) {
      const BoundCheckReport r =
          validate_bound(lemma, data, f.n1, f.n2, delta, f.trials, RngSeed{f.seed, stream++});
      if (!r.pass) {
        err << "bound " << r.lemma << " at level " << delta << " failed: empirical "
            << r.empirical << " > nominal " << r.nominal << "\n";
      }
      all_pass = all_pass && r.pass;
      reports.push_back(bound_report_json(r));
    }
  }
  emit(render(json{{"reports", reports}, {"pass", all_pass}}), f.output, out);
  return all_pass ? kExitOk : kExitBounds;
}

struct GenerateFlags {
  std::size_t records = 100000;
  std::uint64_t seed = 42;
  std::string law = "truncated-normal";
  double noise = 0.0;
  bool no_predicate = false;
  std::string output;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  const SyntheticData data = generate(build_spec(f.records, f.seed, f.law, f.noise));
  std::vector<Record> rows(data.dataset.records().begin(), data.dataset.records().end());
  const Dataset ds(data.dataset.name(), std::move(rows), !f.no_predicate);
  std::ostringstream buf;
  write_csv(ds, buf);
  emit(buf.str(), f.output, out);
  return kExitOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate aggregation with expensive predicates via two-stage stratified sampling",
               "abae"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Answer one query over a CSV dataset");
  run_cmd->add_option("--config", run.config_path, "JSON config; flags override its fields");
  run_cmd->add_option("--input", run.cfg.input, "CSV with header id,proxy,value[,predicate]");
  run_cmd->add_option("--k", run.cfg.k, "number of strata");
  run_cmd->add_option("--n1", run.cfg.n1, "Stage-1 draws per stratum");
  run_cmd->add_option("--n2", run.cfg.n2, "Stage-2 draws in total");
  run_cmd->add_flag("--reuse,!--no-reuse", run.cfg.reuse, "merge Stage-1 samples into Stage 2");
  run_cmd->add_option("--seed", run.cfg.seed, "query seed");
  run_cmd->add_option("--resamples", run.cfg.bootstrap_resamples, "bootstrap resamples");
  run_cmd->add_option("--alpha", run.cfg.alpha, "CI miscoverage level");
  run_cmd->add_option("--oracle", run.oracle,
                      "'inline' (predicate column) or a shell command speaking the oracle protocol");
  run_cmd->add_option("--output", run.cfg.output, "report path (default: stdout)");

  SimulateFlags sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo MSE or coverage experiment");
  sim_cmd->add_option("--estimators", sim.estimators,
                      "abae, abae-reuse, uniform-allocation, oracle-optimal, oracle-conditioned")
      ->delimiter(',');
  sim_cmd->add_option("--budget", sim.budgets, "N1:N2 pair (repeatable)")->delimiter(',');
  sim_cmd->add_option("--n-total", sim.totals, "total budgets, split half to Stage 1")
      ->delimiter(',');
  sim_cmd->add_option("--trials", sim.trials, "trials per budget")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "experiment seed");
  sim_cmd->add_option("--data-seed", sim.data_seed, "synthetic population seed");
  sim_cmd->add_option("--records-per-stratum", sim.records, "synthetic stratum size");
  sim_cmd->add_option("--law", sim.law, "truncated-normal or two-point");
  sim_cmd->add_option("--proxy-noise", sim.noise, "proxy noise in [0, 1)");
  sim_cmd->add_flag("--coverage", sim.coverage, "measure bootstrap CI coverage instead of MSE");
  sim_cmd->add_option("--alpha", sim.alpha, "CI miscoverage level for --coverage");
  sim_cmd->add_option("--resamples", sim.resamples, "bootstrap resamples for --coverage");
  sim_cmd->add_option("--output", sim.output, "JSON result path (default: stdout)");
  sim_cmd->add_option("--csv", sim.csv, "also write a flat table here");

  BoundFlags bnd;
  CLI::App* bnd_cmd =
      app.add_subcommand("validate-bounds", "Monte Carlo check of the concentration bounds");
  bnd_cmd->add_option("--lemma", bnd.lemmas, "bound id: 1, 2, 3, 4, 5, 6 or 8 (repeatable)")
      ->delimiter(',');
  bnd_cmd->add_option("--delta", bnd.deltas, "failure probability (repeatable)")->delimiter(',');
  bnd_cmd->add_option("--n1", bnd.n1, "Stage-1 draws per stratum");
  bnd_cmd->add_option("--n2", bnd.n2, "Stage-2 draws in total");
  bnd_cmd->add_option("--trials", bnd.trials, "trials per bound (>= 1000)");
  bnd_cmd->add_option("--seed", bnd.seed, "validation seed");
  bnd_cmd->add_option("--data-seed", bnd.data_seed, "synthetic population seed");
  bnd_cmd->add_option("--records-per-stratum", bnd.records, "synthetic stratum size");
  bnd_cmd->add_option("--law", bnd.law, "truncated-normal or two-point");
  bnd_cmd->add_option("--output", bnd.output, "JSON report path (default: stdout)");

  GenerateFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("generate", "Write the default synthetic suite as CSV");
  gen_cmd->add_option("--records-per-stratum", gen.records, "records per stratum");
  gen_cmd->add_option("--seed", gen.seed, "population seed");
  gen_cmd->add_option("--law", gen.law, "truncated-normal or two-point");
  gen_cmd->add_option("--proxy-noise", gen.noise, "proxy noise in [0, 1)");
  gen_cmd->add_flag("--no-predicate", gen.no_predicate, "omit the predicate column");
  gen_cmd->add_option("--output", gen.output, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(*run_cmd, run, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*bnd_cmd) return cmd_validate_bounds(bnd, out, err);
    if (*gen_cmd) return cmd_generate(gen, out);
  } catch (const BudgetExhausted& e) {
    err << "error: BudgetExhausted: " << e.what() << "\n";
    return kExitEngine;
  } catch (const NoPositiveSamples& e) {
    err << "error: NoPositiveSamples: " << e.what() << "\n";
    return kExitEngine;
  } catch (const OracleProtocolError& e) {
    err << "error: OracleProtocolError: " << e.what() << "\n";
    return kExitEngine;
  } catch (const InvalidK& e) {
    err << "error: InvalidK: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DuplicateId& e) {
    err << "error: DuplicateId: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "error: ParseError: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace abae::cli
