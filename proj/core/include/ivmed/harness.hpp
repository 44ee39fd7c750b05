#pragma once

// Monte Carlo runner: repeated sampling from a population, estimation, and
// comparison against the exact oracle values.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ivmed/estimators.hpp"
#include "ivmed/oracle.hpp"
#include "ivmed/population.hpp"

namespace ivmed {

struct McConfig {
  Population population;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  std::vector<EstimatorKind> estimators{EstimatorKind::kIv};
  IvOptions iv;
  /// Worker threads over replicates; 0 selects hardware_concurrency.
  unsigned threads = 1;
};

/// Throws DomainError for a malformed config (empty or non-ascending grid,
/// reps < 2, no estimators) and InvalidPopulation for an invalid population.
void validate(const McConfig& cfg);

/// Seed of the dataset for grid point n and replicate rep.
std::uint64_t dataset_seed(std::uint64_t seed, std::size_t n, std::size_t rep);

/// Fraction of failed replicates above which a cell is flagged.
inline constexpr double kFailureFlagFraction = 0.10;

/// Aggregate over replicates for one (n, estimator, quantity).
/// Quantities are the four natural effects for every estimator, plus the
/// eight IV coefficients (alpha0 ... tau1) for the IV estimator.
struct McCell {
  std::size_t n = 0;
  EstimatorKind estimator = EstimatorKind::kIv;
  std::string_view quantity;
  /// Replicates that produced this quantity.
  std::size_t count = 0;
  std::size_t failures = 0;
  std::optional<double> mean;
  /// Sample standard deviation across replicates (needs count >= 2).
  std::optional<double> sd;
  /// True population value (effects only).
  std::optional<double> target;
  /// Probability limit of the IV estimator.
  std::optional<double> estimand;
  /// target - mean
  std::optional<double> bias_to_target;
  /// estimand - mean
  std::optional<double> bias_to_estimand;
  /// More than 10% of replicates failed.
  bool flagged = false;

  /// sd / sqrt(count).
  std::optional<double> standard_error() const;
};

struct McReport {
  std::vector<std::size_t> n_grid;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<EstimatorKind> estimators;
  EffectSet target;
  PartialIvEstimands estimand;
  std::vector<McCell> cells;

  const McCell* find(std::size_t n, EstimatorKind estimator, std::string_view quantity) const;
};

McReport run_mc(const McConfig& cfg);

}  // namespace ivmed
