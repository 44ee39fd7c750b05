#pragma once

// JSON and CSV renderings of library results. Keys follow the C++ field
// names; absent optional values are rendered as null (JSON) or an empty
// field (CSV).

#include <string>

#include <nlohmann/json.hpp>

#include "ivmed/estimators.hpp"
#include "ivmed/harness.hpp"
#include "ivmed/oracle.hpp"
#include "ivmed/population.hpp"

namespace ivmed {

using Json = nlohmann::ordered_json;

Json to_json(const ValidationReport& report);
Json to_json(const EffectSet& effects);
Json to_json(const ThetaIV& theta);
Json to_json(const IvEstimands& estimands);
Json to_json(const PartialIvEstimands& estimands);
Json to_json(const AssumptionReport& report);
Json to_json(const GapReport& report);
Json to_json(const EstimateSet& estimate);
Json to_json(const LsemEstimate& estimate);
Json to_json(const BootstrapResult& result);
Json to_json(const McReport& report);

/// One row per (n, estimator, quantity), header:
/// n,estimator,quantity,count,failures,mean,sd,target,estimand,bias_to_target,bias_to_estimand,flagged
std::string to_csv(const McReport& report);

/// Decimal with 17 significant digits (%.17g).
std::string format_number(double x);

}  // namespace ivmed
