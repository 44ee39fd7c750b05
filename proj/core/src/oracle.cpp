#include "ivmed/oracle.hpp"

#include <cmath>
#include <tuple>
#include <utility>

namespace ivmed {

namespace {

// Expectation over (stratum, z) of f(stratum, z).
template <typename F>
double expect_over_z(const Population& pop, F&& f) {
  double total = 0.0;
  for (const Stratum& s : pop.strata) {
    for (int z = 0; z < 2; ++z) {
      total += s.weight * pop.instrument_prob(z) * f(s, z);
    }
  }
  return total;
}

// Expectation over strata of f(stratum).
template <typename F>
double expect(const Population& pop, F&& f) {
  double total = 0.0;
  for (const Stratum& s : pop.strata) total += s.weight * f(s);
  return total;
}

// Mass and conditional mean of `value` over strata where `pred` holds.
template <typename P, typename V>
std::pair<double, std::optional<double>> conditional(const Population& pop, P&& pred, V&& value) {
  double mass = 0.0;
  double sum = 0.0;
  for (const Stratum& s : pop.strata) {
    if (s.weight > 0.0 && pred(s)) {
      mass += s.weight;
      sum += s.weight * value(s);
    }
  }
  if (mass > 0.0) return {mass, sum / mass};
  return {mass, std::nullopt};
}

double y_at(const Stratum& s, int d, int m) { return s.outcomes.at(d, m); }
int m_at(const Stratum& s, int d, int z) { return s.response.at(d, z); }

// Y(d,1) - Y(d,0): the effect of switching the mediator on, holding D = d.
double mediator_contrast(const Stratum& s, int d) { return y_at(s, d, 1) - y_at(s, d, 0); }

}  // namespace

EffectSet true_effect_set(const Population& pop) {
  require_valid(pop);
  EffectSet e;
  // Y_{a, M_{b,z}} for one stratum.
  auto nested = [](const Stratum& s, int a, int b, int z) { return y_at(s, a, m_at(s, b, z)); };

  e.ate = expect_over_z(pop, [&](const Stratum& s, int z) { return nested(s, 1, 1, z) - nested(s, 0, 0, z); });
  e.nie0 = expect_over_z(pop, [&](const Stratum& s, int z) { return nested(s, 0, 1, z) - nested(s, 0, 0, z); });
  e.nie1 = expect_over_z(pop, [&](const Stratum& s, int z) { return nested(s, 1, 1, z) - nested(s, 1, 0, z); });
  e.nde0 = expect_over_z(pop, [&](const Stratum& s, int z) { return nested(s, 1, 0, z) - nested(s, 0, 0, z); });
  e.nde1 = expect_over_z(pop, [&](const Stratum& s, int z) { return nested(s, 1, 1, z) - nested(s, 0, 1, z); });
  e.cde0 = expect(pop, [](const Stratum& s) { return y_at(s, 1, 0) - y_at(s, 0, 0); });
  e.cde1 = expect(pop, [](const Stratum& s) { return y_at(s, 1, 1) - y_at(s, 0, 1); });
  return e;
}

ArmFits population_arm_fits(const Population& pop) {
  require_valid(pop);
  ArmFits arms;
  const double e_z = pop.p_z;
  for (int d = 0; d < 2; ++d) {
    const double first_stage = expect(pop, [d](const Stratum& s) { return double(m_at(s, d, 1) - m_at(s, d, 0)); });
    const double mean_m = expect_over_z(pop, [d](const Stratum& s, int z) { return double(m_at(s, d, z)); });
    arms[d].mediator = {mean_m - first_stage * e_z, first_stage};

    if (std::abs(first_stage) < kPopulationRelevanceTolerance) continue;

    const double reduced_form =
        expect(pop, [d](const Stratum& s) { return y_at(s, d, m_at(s, d, 1)) - y_at(s, d, m_at(s, d, 0)); });
    const double mean_y = expect_over_z(pop, [d](const Stratum& s, int z) { return y_at(s, d, m_at(s, d, z)); });
    const double slope = reduced_form / first_stage;
    arms[d].outcome = LinearEquation{mean_y - slope * mean_m, slope};
  }
  return arms;
}

ThetaIV to_theta(const ArmFits& arms) {
  for (int d = 0; d < 2; ++d) {
    if (!arms[d].outcome) throw WeakInstrument(d, arms[d].mediator.slope);
  }
  ThetaIV t;
  t.beta0 = arms[0].outcome->intercept;
  t.beta1 = arms[0].outcome->slope;
  t.pi0 = arms[0].mediator.intercept;
  t.pi1 = arms[0].mediator.slope;
  t.alpha0 = arms[1].outcome->intercept;
  t.alpha1 = arms[1].outcome->slope;
  t.tau0 = arms[1].mediator.intercept;
  t.tau1 = arms[1].mediator.slope;
  return t;
}

ArmFits to_arm_fits(const ThetaIV& t) {
  ArmFits arms;
  arms[0].mediator = {t.pi0, t.pi1};
  arms[0].outcome = LinearEquation{t.beta0, t.beta1};
  arms[1].mediator = {t.tau0, t.tau1};
  arms[1].outcome = LinearEquation{t.alpha0, t.alpha1};
  return arms;
}

ThetaIV population_theta_iv(const Population& pop) { return to_theta(population_arm_fits(pop)); }

PartialIvEstimands iv_mediation_estimands(const ArmFits& arms, double e_z) {
  const double mean_m0 = arms[0].mediator.intercept + arms[0].mediator.slope * e_z;
  const double mean_m1 = arms[1].mediator.intercept + arms[1].mediator.slope * e_z;
  const double mediator_shift = mean_m1 - mean_m0;

  PartialIvEstimands out;
  const auto& untreated = arms[0].outcome;
  const auto& treated = arms[1].outcome;
  if (untreated) out.nie0_iv = untreated->slope * mediator_shift;
  if (treated) out.nie1_iv = treated->slope * mediator_shift;
  if (untreated && treated) {
    const double level = treated->intercept - untreated->intercept;
    const double slope = treated->slope - untreated->slope;
    out.nde0_iv = level + slope * mean_m0;
    out.nde1_iv = level + slope * mean_m1;
  }
  return out;
}

IvEstimands iv_mediation_estimands(const ThetaIV& theta, double e_z) {
  const auto partial = iv_mediation_estimands(to_arm_fits(theta), e_z);
  return {*partial.nie0_iv, *partial.nie1_iv, *partial.nde0_iv, *partial.nde1_iv};
}

AssumptionReport assumption_report(const Population& pop) {
  require_valid(pop);
  AssumptionReport r;
  r.d_monotone_given_z = {true, true};
  r.z_monotone_given_d = {true, true};
  for (const Stratum& s : pop.strata) {
    if (!(s.weight > 0.0)) continue;
    for (int k = 0; k < 2; ++k) {
      if (m_at(s, 1, k) < m_at(s, 0, k)) r.d_monotone_given_z[k] = false;
      if (m_at(s, k, 1) < m_at(s, k, 0)) r.z_monotone_given_d[k] = false;
    }
  }
  for (int d = 0; d < 2; ++d) {
    r.relevance[d] = expect(pop, [d](const Stratum& s) { return double(m_at(s, d, 1) - m_at(s, d, 0)); });
  }
  r.q1 = expect(pop, [](const Stratum& s) { return m_at(s, 0, 1) > m_at(s, 0, 0) ? 1.0 : 0.0; });
  r.q2 = expect(pop, [](const Stratum& s) { return m_at(s, 0, 1) < m_at(s, 0, 0) ? 1.0 : 0.0; });
  for (int z = 0; z < 2; ++z) {
    r.p1z[z] = expect(pop, [z](const Stratum& s) { return m_at(s, 1, z) > m_at(s, 0, z) ? 1.0 : 0.0; });
  }

  r.constant_effect = true;
  const Stratum* reference = nullptr;
  for (const Stratum& s : pop.strata) {
    if (!(s.weight > 0.0)) continue;
    if (reference == nullptr) {
      reference = &s;
      continue;
    }
    // All pairwise contrasts agree iff every contrast against Y(0,0) agrees.
    for (int d = 0; d < 2 && r.constant_effect; ++d) {
      for (int m = 0; m < 2; ++m) {
        const double here = y_at(s, d, m) - y_at(s, 0, 0);
        const double there = y_at(*reference, d, m) - y_at(*reference, 0, 0);
        if (std::abs(here - there) > 1e-12) {
          r.constant_effect = false;
          break;
        }
      }
    }
  }
  return r;
}

std::optional<double> InstrumentResponseSplit::weighted_difference() const {
  if (complier_share == defier_share) return std::nullopt;
  const double up = complier_mean ? *complier_mean * complier_share : 0.0;
  const double down = defier_mean ? *defier_mean * defier_share : 0.0;
  return (up - down) / (complier_share - defier_share);
}

InstrumentResponseSplit instrument_response_split(const Population& pop, int d) {
  require_valid(pop);
  InstrumentResponseSplit split;
  auto contrast = [d](const Stratum& s) { return mediator_contrast(s, d); };
  std::tie(split.complier_share, split.complier_mean) =
      conditional(pop, [d](const Stratum& s) { return m_at(s, d, 1) > m_at(s, d, 0); }, contrast);
  std::tie(split.defier_share, split.defier_mean) =
      conditional(pop, [d](const Stratum& s) { return m_at(s, d, 1) < m_at(s, d, 0); }, contrast);
  return split;
}

namespace {

IndirectEffectCrossCheck cross_check(const Population& pop, const AssumptionReport& assumptions,
                                     const InstrumentResponseSplit& instrument_split, int d,
                                     double nie_direct, std::optional<double> nie_iv_direct) {
  IndirectEffectCrossCheck check;
  check.applicable = assumptions.d_monotone() && assumptions.z_monotone();

  auto contrast = [d](const Stratum& s) { return mediator_contrast(s, d); };
  double treatment_complier_weight = 0.0;  // sum_z Pr(M_{1z} > M_{0z}) Pr(Z=z)
  for (int z = 0; z < 2; ++z) {
    auto [up_share, up_mean] = conditional(pop, [z](const Stratum& s) { return m_at(s, 1, z) > m_at(s, 0, z); }, contrast);
    auto [down_share, down_mean] = conditional(pop, [z](const Stratum& s) { return m_at(s, 1, z) < m_at(s, 0, z); }, contrast);
    double term = 0.0;
    if (up_mean) term += *up_mean * up_share;
    if (down_mean) term -= *down_mean * down_share;
    check.nie_from_subgroups += term * pop.instrument_prob(z);
    treatment_complier_weight += up_share * pop.instrument_prob(z);
  }
  if (instrument_split.complier_mean) {
    check.nie_iv_from_subgroups = *instrument_split.complier_mean * treatment_complier_weight;
  }

  if (check.applicable) {
    bool ok = std::abs(check.nie_from_subgroups - nie_direct) <= kCrossCheckTolerance;
    if (nie_iv_direct) {
      ok = ok && check.nie_iv_from_subgroups &&
           std::abs(*check.nie_iv_from_subgroups - *nie_iv_direct) <= kCrossCheckTolerance;
    }
    check.agrees = ok;
  }
  return check;
}

std::optional<double> difference(double target, const std::optional<double>& iv) {
  if (!iv) return std::nullopt;
  return target - *iv;
}

}  // namespace

GapReport gap_report(const Population& pop) {
  require_valid(pop);
  GapReport report;
  report.target = true_effect_set(pop);
  const ArmFits arms = population_arm_fits(pop);
  for (int d = 0; d < 2; ++d) {
    if (!arms[d].outcome) report.weak_arms.push_back(d);
  }
  report.iv = iv_mediation_estimands(arms, pop.p_z);
  report.gaps.nie0 = difference(report.target.nie0, report.iv.nie0_iv);
  report.gaps.nie1 = difference(report.target.nie1, report.iv.nie1_iv);
  report.gaps.nde0 = difference(report.target.nde0, report.iv.nde0_iv);
  report.gaps.nde1 = difference(report.target.nde1, report.iv.nde1_iv);

  const AssumptionReport assumptions = assumption_report(pop);
  for (int d = 0; d < 2; ++d) {
    report.instrument_subgroups[d] = instrument_response_split(pop, d);
  }
  report.cross_checks[0] =
      cross_check(pop, assumptions, report.instrument_subgroups[0], 0, report.target.nie0, report.iv.nie0_iv);
  report.cross_checks[1] =
      cross_check(pop, assumptions, report.instrument_subgroups[1], 1, report.target.nie1, report.iv.nie1_iv);
  return report;
}

}  // namespace ivmed
