#pragma once

// Principal-strata populations for a binary treatment D, binary instrument Z
// and binary mediator M.
//
// A population is a finite mixture of strata. Each stratum fixes the full
// table of potential mediators M(d,z) and the stratum-mean potential outcomes
// Y(d,m). Treatment and instrument are drawn independently of the stratum and
// of each other, so treatment exogeneity and instrument randomization hold by
// construction. Outcomes have no z index, which makes the exclusion
// restriction structural.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ivmed/errors.hpp"

namespace ivmed {

/// Potential mediator table M(d,z), indexed [d][z].
struct MediatorResponse {
  std::array<std::array<std::uint8_t, 2>, 2> m{};

  int at(int d, int z) const { return m[d][z]; }

  friend bool operator==(const MediatorResponse&, const MediatorResponse&) = default;
};

/// Stratum-mean potential outcomes Y(d,m), indexed [d][m].
struct OutcomeProfile {
  std::array<std::array<double, 2>, 2> y{};

  double at(int d, int m) const { return y[d][m]; }

  friend bool operator==(const OutcomeProfile&, const OutcomeProfile&) = default;
};

struct Stratum {
  double weight = 0.0;
  MediatorResponse response;
  OutcomeProfile outcomes;
  /// Standard deviation of the additive Gaussian outcome noise used when
  /// sampling. Has no effect on any population-level quantity.
  double noise_sd = 0.0;

  friend bool operator==(const Stratum&, const Stratum&) = default;
};

struct Population {
  std::vector<Stratum> strata;
  double p_z = 0.5;  ///< Pr(Z = 1)
  double p_d = 0.5;  ///< Pr(D = 1)

  /// Pr(Z = z).
  double instrument_prob(int z) const { return z == 1 ? p_z : 1.0 - p_z; }
  /// Pr(D = d).
  double treatment_prob(int d) const { return d == 1 ? p_d : 1.0 - p_d; }

  friend bool operator==(const Population&, const Population&) = default;
};

inline constexpr double kWeightSumTolerance = 1e-12;

enum class ViolationCode {
  kEmptyStrata,
  kWeightOutOfRange,
  kWeightsSumNotOne,
  kMediatorNotBinary,
  kNonFiniteOutcome,
  kInvalidNoise,
  kDegenerateInstrument,
  kDegenerateTreatment,
};

/// Stable machine-readable name, e.g. "weights_sum_not_one".
std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationCode code) const;
  /// All messages joined with "; ".
  std::string summary() const;
};

/// Checks every Population and Stratum invariant. Never throws; each
/// violation is reported once per offending field.
ValidationReport validate(const Population& pop);

/// Raised by operations whose precondition is a valid population.
class InvalidPopulation : public Error {
 public:
  explicit InvalidPopulation(ValidationReport report)
      : Error("invalid population: " + report.summary()), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Throws InvalidPopulation unless validate(pop) is empty.
void require_valid(const Population& pop);

/// Two-stratum population in which instrument compliers (share 2/3, mean
/// mediator effect alpha) and instrument defiers (share 1/3, mean mediator
/// effect 2*alpha) coexist in the D=0 arm. Treatment moves the mediator
/// monotonically but the instrument does not, and the Wald ratio for the
/// D=0 arm is exactly zero for every alpha.
///
/// Throws DomainError unless alpha > 0.
Population build_cancellation_counterexample(double alpha);

}  // namespace ivmed
