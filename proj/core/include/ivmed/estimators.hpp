#pragma once

// Finite-sample estimators of mediation effects from observed (D, Z, M, Y).
//
// The IV estimator solves the just-identified moment conditions of each
// treatment arm in closed form (a Wald ratio per arm). The sequential
// ignorability baseline fits the interaction LSEM
//   M = a0 + a1 D + v,   Y = b0 + b1 D + b2 M + b3 D M + u
// by least squares.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ivmed/oracle.hpp"
#include "ivmed/sampler.hpp"

namespace ivmed {

enum class EstimatorKind { kIv, kSi };

std::string_view to_string(EstimatorKind kind);
/// Accepts "iv" and "si".
std::optional<EstimatorKind> parse_estimator(std::string_view name);

struct IvOptions {
  /// Arms whose first-stage cell-mean difference is smaller than this in
  /// absolute value are treated as having no instrument.
  double weak_threshold = 1e-8;
};

/// Natural effect estimates; a component is absent when the data cannot
/// identify it (IV arm without a usable first stage).
struct EffectEstimates {
  std::optional<double> nie0;
  std::optional<double> nie1;
  std::optional<double> nde0;
  std::optional<double> nde1;

  bool complete() const { return nie0 && nie1 && nde0 && nde1; }
};

struct CellDiagnostics {
  /// Observations per (d, z) cell, indexed [d][z].
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  /// E^[M | D=d, Z=1] - E^[M | D=d, Z=0], indexed by d.
  std::array<double, 2> first_stage{};
};

struct EstimateSet {
  ArmFits arms;
  /// Present when both arms have a usable first stage.
  std::optional<ThetaIV> theta_hat;
  EffectEstimates effects;
  double e_z_hat = 0.0;
  CellDiagnostics diagnostics;
  std::vector<int> weak_arms;
  std::uint64_t n = 0;
};

struct LsemEstimate {
  double a0 = 0.0;
  double a1 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  EffectEstimates effects;
};

/// Per-arm IV fits. Throws EmptyCell if any (d, z) cell is empty; weak arms
/// come back without an outcome equation.
ArmFits estimate_arm_fits(const CellTable& cells, const IvOptions& opts = {});

/// Throws EmptyCell, or WeakInstrument for the first weak arm.
ThetaIV estimate_theta_iv(const CellTable& cells, const IvOptions& opts = {});
ThetaIV estimate_theta_iv(const Dataset& ds, const IvOptions& opts = {});

/// IV coefficients plus plug-in mediation effects evaluated at E^[Z].
/// Throws EmptyCell; weak arms are listed in weak_arms and the effects they
/// feed are left absent.
EstimateSet estimate_effects_iv(const CellTable& cells, const IvOptions& opts = {});
EstimateSet estimate_effects_iv(const Dataset& ds, const IvOptions& opts = {});

/// Throws SingularDesign when a D arm is empty or M is constant within an arm.
LsemEstimate estimate_effects_si(const CellTable& cells);
LsemEstimate estimate_effects_si(const Dataset& ds);

struct BootstrapOptions {
  double level = 0.95;
  IvOptions iv;
  /// Worker threads; 0 selects hardware_concurrency. Results do not depend on it.
  unsigned threads = 1;
};

struct EffectInterval {
  std::string_view effect;  ///< "nie0", "nie1", "nde0" or "nde1"
  std::size_t successes = 0;
  std::optional<double> lower;
  std::optional<double> upper;
};

struct BootstrapResult {
  EstimatorKind estimator = EstimatorKind::kIv;
  std::size_t reps = 0;
  double level = 0.95;
  /// Replicates that threw or left at least one effect unidentified.
  std::size_t failed_replicates = 0;
  std::array<EffectInterval, 4> intervals;
};

/// Nonparametric row bootstrap with percentile intervals. Replicate r
/// resamples with the stream keyed by (seed, r).
/// Throws DomainError when reps == 0 and AllReplicatesFailed when no
/// replicate produced any estimate.
BootstrapResult bootstrap(const Dataset& ds, EstimatorKind estimator, std::size_t reps, std::uint64_t seed,
                          const BootstrapOptions& opts = {});

/// Linear-interpolation sample quantile (type 7) of sorted, nonempty data.
double sorted_quantile(const std::vector<double>& sorted, double p);

}  // namespace ivmed
