#pragma once

// Scenario files: a JSON population description plus optional Monte Carlo
// settings and output paths.
//
//   {
//     "p_z": 0.5, "p_d": 0.5,
//     "strata": [{"weight": 0.5, "m": [[M00, M01], [M10, M11]],
//                 "y": [[Y00, Y01], [Y10, Y11]], "noise_sd": 1.0}, ...],
//     "mc": {"n_grid": [1000, 10000], "reps": 200, "seed": 1, "estimators": ["iv", "si"]},
//     "output": {"json": "report.json", "csv": "report.csv"}
//   }
//
// m is indexed [d][z] and y is indexed [d][m]. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ivmed/estimators.hpp"
#include "ivmed/population.hpp"

namespace ivmed {

struct McSettings {
  std::vector<std::size_t> n_grid{1000, 10000, 100000};
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  std::vector<EstimatorKind> estimators{EstimatorKind::kIv};
};

struct OutputPaths {
  std::optional<std::string> json;
  std::optional<std::string> csv;
};

struct Scenario {
  Population population;
  std::optional<McSettings> mc;
  OutputPaths output;
};

/// Throws ParseError (with a JSON-pointer location) for malformed JSON,
/// wrong types or unknown keys, and InvalidPopulation when the document is
/// well formed but violates a population invariant.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Builds a Population from the population part of a scenario document.
/// Does not validate invariants. `where` prefixes error locations.
Population population_from_json(const nlohmann::ordered_json& doc, const std::string& where = "");

nlohmann::ordered_json to_json(const Population& pop);

}  // namespace ivmed
