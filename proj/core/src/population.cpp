#include "ivmed/population.hpp"

#include <cmath>
#include <sstream>

namespace ivmed {

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kEmptyStrata:
      return "empty_strata";
    case ViolationCode::kWeightOutOfRange:
      return "weight_out_of_range";
    case ViolationCode::kWeightsSumNotOne:
      return "weights_sum_not_one";
    case ViolationCode::kMediatorNotBinary:
      return "mediator_not_binary";
    case ViolationCode::kNonFiniteOutcome:
      return "nonfinite_outcome";
    case ViolationCode::kInvalidNoise:
      return "invalid_noise_sd";
    case ViolationCode::kDegenerateInstrument:
      return "degenerate_instrument";
    case ViolationCode::kDegenerateTreatment:
      return "degenerate_treatment";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationCode code) const {
  for (const auto& v : violations) {
    if (v.code == code) return true;
  }
  return false;
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

namespace {

bool open_unit_interval(double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; }

}  // namespace

ValidationReport validate(const Population& pop) {
  ValidationReport report;
  auto add = [&report](ViolationCode code, std::string msg) {
    report.violations.push_back({code, std::move(msg)});
  };

  if (pop.strata.empty()) {
    add(ViolationCode::kEmptyStrata, "population has no strata");
  }

  double total = 0.0;
  bool weights_finite = true;
  for (std::size_t s = 0; s < pop.strata.size(); ++s) {
    const Stratum& st = pop.strata[s];
    const std::string where = "strata[" + std::to_string(s) + "]";
    if (!std::isfinite(st.weight) || st.weight < 0.0 || st.weight > 1.0) {
      add(ViolationCode::kWeightOutOfRange, where + ".weight not in [0,1]");
      weights_finite = weights_finite && std::isfinite(st.weight);
    }
    total += st.weight;

    for (int d = 0; d < 2; ++d) {
      for (int z = 0; z < 2; ++z) {
        if (st.response.m[d][z] > 1) {
          std::ostringstream os;
          os << where << ".m[" << d << "][" << z << "] is not 0 or 1";
          add(ViolationCode::kMediatorNotBinary, os.str());
        }
      }
    }
    for (int d = 0; d < 2; ++d) {
      for (int m = 0; m < 2; ++m) {
        if (!std::isfinite(st.outcomes.y[d][m])) {
          std::ostringstream os;
          os << where << ".y[" << d << "][" << m << "] is not finite";
          add(ViolationCode::kNonFiniteOutcome, os.str());
        }
      }
    }
    if (!std::isfinite(st.noise_sd) || st.noise_sd < 0.0) {
      add(ViolationCode::kInvalidNoise, where + ".noise_sd must be finite and >= 0");
    }
  }

  if (!pop.strata.empty() && weights_finite && std::abs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "stratum weights sum to " << total << ", not 1";
    add(ViolationCode::kWeightsSumNotOne, os.str());
  }
  if (!open_unit_interval(pop.p_z)) {
    add(ViolationCode::kDegenerateInstrument, "p_z must lie strictly between 0 and 1");
  }
  if (!open_unit_interval(pop.p_d)) {
    add(ViolationCode::kDegenerateTreatment, "p_d must lie strictly between 0 and 1");
  }
  return report;
}

void require_valid(const Population& pop) {
  auto report = validate(pop);
  if (!report.ok()) throw InvalidPopulation(std::move(report));
}

Population build_cancellation_counterexample(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("counterexample requires a finite alpha > 0");
  }
  // Stratum A: instrument complier in the D=0 arm (M(0,0)=0, M(0,1)=1).
  Stratum a;
  a.weight = 2.0 / 3.0;
  a.response.m = {{{0, 1}, {1, 1}}};
  a.outcomes.y = {{{0.0, alpha}, {0.0, 0.0}}};

  // Stratum B: instrument defier in the D=0 arm (M(0,0)=1, M(0,1)=0).
  Stratum b;
  b.weight = 1.0 / 3.0;
  b.response.m = {{{1, 0}, {1, 1}}};
  b.outcomes.y = {{{0.0, 2.0 * alpha}, {0.0, 0.0}}};

  return Population{{a, b}, 0.5, 0.5};
}

}  // namespace ivmed
