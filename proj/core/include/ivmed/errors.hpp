#pragma once

#include <stdexcept>
#include <string>

namespace ivmed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario, dataset or report input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// The data or population do not identify the requested quantity.
/// Distinct from input errors so callers can tell bad inputs apart from
/// identification failures.
class StatisticalError : public Error {
 public:
  using Error::Error;
};

/// First-stage mediator shift in treatment arm `arm` is (near) zero.
class WeakInstrument : public StatisticalError {
 public:
  WeakInstrument(int arm, double first_stage)
      : StatisticalError("weak instrument in treatment arm D=" + std::to_string(arm) +
                         ": first-stage mediator shift " + std::to_string(first_stage)),
        arm_(arm),
        first_stage_(first_stage) {}

  int arm() const noexcept { return arm_; }
  double first_stage() const noexcept { return first_stage_; }

 private:
  int arm_;
  double first_stage_;
};

/// No observations in the (D=d, Z=z) cell.
class EmptyCell : public StatisticalError {
 public:
  EmptyCell(int d, int z)
      : StatisticalError("empty cell D=" + std::to_string(d) + ", Z=" + std::to_string(z)),
        d_(d),
        z_(z) {}

  int d() const noexcept { return d_; }
  int z() const noexcept { return z_; }

 private:
  int d_;
  int z_;
};

/// Regressors of a least-squares fit are collinear.
class SingularDesign : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

/// Every bootstrap replicate failed to produce an estimate.
class AllReplicatesFailed : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

}  // namespace ivmed
