#pragma once

// Exact population-level quantities, computed by enumerating strata x z.
//
// Coefficient convention for the per-arm linear IV system:
//   D = 0 arm:  Y = beta0  + beta1  * M,   M = pi0  + pi1  * Z
//   D = 1 arm:  Y = alpha0 + alpha1 * M,   M = tau0 + tau1 * Z
// With this convention E[M_0] = pi0 + pi1 E[Z] and E[M_1] = tau0 + tau1 E[Z].

#include <array>
#include <optional>
#include <vector>

#include "ivmed/population.hpp"

namespace ivmed {

/// Relevance threshold for population-level first stages.
inline constexpr double kPopulationRelevanceTolerance = 1e-12;

/// True mean effects. ate = nie1 + nde0 = nde1 + nie0.
struct EffectSet {
  double ate = 0.0;
  double nie0 = 0.0;
  double nie1 = 0.0;
  double nde0 = 0.0;
  double nde1 = 0.0;
  double cde0 = 0.0;  ///< E[Y(1,0) - Y(0,0)]
  double cde1 = 0.0;  ///< E[Y(1,1) - Y(0,1)]
};

struct ThetaIV {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double pi0 = 0.0;
  double pi1 = 0.0;
  double tau0 = 0.0;
  double tau1 = 0.0;
};

struct LinearEquation {
  double intercept = 0.0;
  double slope = 0.0;
};

/// IV fit for one treatment arm. The mediator equation is always defined;
/// the outcome equation is absent when the instrument does not move the
/// mediator in this arm.
struct ArmFit {
  LinearEquation mediator;
  std::optional<LinearEquation> outcome;
};

/// Indexed by treatment arm d.
using ArmFits = std::array<ArmFit, 2>;

/// Throws WeakInstrument for the first arm without an outcome equation.
ThetaIV to_theta(const ArmFits& arms);
ArmFits to_arm_fits(const ThetaIV& theta);

struct IvEstimands {
  double nie0_iv = 0.0;
  double nie1_iv = 0.0;
  double nde0_iv = 0.0;
  double nde1_iv = 0.0;
};

/// IV estimands when one arm may lack an outcome equation. nie0_iv needs
/// only the D=0 arm, nie1_iv only the D=1 arm, the direct effects need both.
struct PartialIvEstimands {
  std::optional<double> nie0_iv;
  std::optional<double> nie1_iv;
  std::optional<double> nde0_iv;
  std::optional<double> nde1_iv;

  bool complete() const { return nie0_iv && nie1_iv && nde0_iv && nde1_iv; }
};

EffectSet true_effect_set(const Population& pop);

/// Per-arm population IV coefficients. Never throws on weak instruments;
/// an arm with |E[M_{d,1} - M_{d,0}]| < 1e-12 has no outcome equation.
ArmFits population_arm_fits(const Population& pop);

/// Probability limit of the stratified IV estimator.
/// Throws WeakInstrument(d) if either arm fails relevance.
ThetaIV population_theta_iv(const Population& pop);

/// Mediation effects implied by linear IV coefficients, where e_z is the
/// instrument mean. The identity nie1_iv + nde0_iv = nie0_iv + nde1_iv holds.
IvEstimands iv_mediation_estimands(const ThetaIV& theta, double e_z);
PartialIvEstimands iv_mediation_estimands(const ArmFits& arms, double e_z);

struct AssumptionReport {
  /// Pr(M_{1,z} >= M_{0,z}) = 1, for z = 0, 1.
  std::array<bool, 2> d_monotone_given_z{};
  /// Pr(M_{d,1} >= M_{d,0}) = 1, for d = 0, 1.
  std::array<bool, 2> z_monotone_given_d{};
  /// E[M_{d,1} - M_{d,0}], for d = 0, 1.
  std::array<double, 2> relevance{};
  double q1 = 0.0;  ///< Pr(M_{0,1} > M_{0,0})
  double q2 = 0.0;  ///< Pr(M_{0,1} < M_{0,0})
  /// Pr(M_{1,z} > M_{0,z}), for z = 0, 1.
  std::array<double, 2> p1z{};
  /// Every positive-weight stratum shares the same Y(d',m') - Y(d,m) contrasts.
  bool constant_effect = false;

  bool d_monotone() const { return d_monotone_given_z[0] && d_monotone_given_z[1]; }
  bool z_monotone() const { return z_monotone_given_d[0] && z_monotone_given_d[1]; }
};

AssumptionReport assumption_report(const Population& pop);

/// Split of the arm-d instrument response into compliers (M_{d,1} > M_{d,0})
/// and defiers (M_{d,1} < M_{d,0}). Conditional means of Y(d,1) - Y(d,0) are
/// absent when the subgroup has zero mass.
struct InstrumentResponseSplit {
  double complier_share = 0.0;
  double defier_share = 0.0;
  std::optional<double> complier_mean;
  std::optional<double> defier_mean;

  /// (complier_mean * complier_share - defier_mean * defier_share) /
  /// (complier_share - defier_share); absent when the shares coincide.
  std::optional<double> weighted_difference() const;
};

InstrumentResponseSplit instrument_response_split(const Population& pop, int d);

/// Re-derivation of NIE_d and NIE_d^IV through treatment-complier and
/// instrument-complier subgroup means. Only meaningful (and only checked)
/// when treatment and instrument monotonicity both hold.
struct IndirectEffectCrossCheck {
  bool applicable = false;
  /// sum_z [E[Y(d,1)-Y(d,0) | M_{1z} > M_{0z}] Pr(M_{1z} > M_{0z})
  ///        - E[Y(d,1)-Y(d,0) | M_{1z} < M_{0z}] Pr(M_{1z} < M_{0z})] Pr(Z=z)
  double nie_from_subgroups = 0.0;
  /// E[Y(d,1)-Y(d,0) | M_{d1} > M_{d0}] * sum_z Pr(M_{1z} > M_{0z}) Pr(Z=z)
  std::optional<double> nie_iv_from_subgroups;
  /// Both re-derivations agree with the direct values within 1e-10.
  bool agrees = false;
};

struct EffectGaps {
  std::optional<double> nie0;
  std::optional<double> nie1;
  std::optional<double> nde0;
  std::optional<double> nde1;
};

struct GapReport {
  EffectSet target;
  PartialIvEstimands iv;
  /// target - iv, componentwise.
  EffectGaps gaps;
  /// Instrument subgroups of each treatment arm, indexed by d.
  std::array<InstrumentResponseSplit, 2> instrument_subgroups;
  /// Indexed by d: checks for NIE_0 and NIE_1.
  std::array<IndirectEffectCrossCheck, 2> cross_checks;
  /// Arms whose IV outcome equation is unavailable.
  std::vector<int> weak_arms;
};

inline constexpr double kCrossCheckTolerance = 1e-10;

GapReport gap_report(const Population& pop);

}  // namespace ivmed
