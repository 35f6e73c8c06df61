#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "abae/bounds.hpp"
#include "abae/engine.hpp"
#include "abae/harness.hpp"

namespace abae {

/// {estimate, ci, strata[], budget, seed, warnings}. ci is null when no
/// interval was computed.
nlohmann::json query_report_json(const QueryReport& report);

/// Cells, warnings, truth and, when the sweep allows one, a rate fit on the
/// total budget per estimator.
nlohmann::json experiment_json(const ExperimentResult& result);

/// One row per estimator x budget.
std::string experiment_csv(const ExperimentResult& result);

nlohmann::json bound_report_json(const BoundCheckReport& report);

nlohmann::json coverage_json(const std::vector<CoverageRow>& rows);
std::string coverage_csv(const std::vector<CoverageRow>& rows);

}  // namespace abae
