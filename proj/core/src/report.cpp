#include "ivmed/report.hpp"

#include <charconv>
#include <sstream>

namespace ivmed {

namespace {

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json pair_json(const std::array<double, 2>& v) { return Json::array({v[0], v[1]}); }
Json pair_json(const std::array<bool, 2>& v) { return Json::array({v[0], v[1]}); }

Json effects_json(const EffectEstimates& e) {
  return {{"nie0", optional_number(e.nie0)},
          {"nie1", optional_number(e.nie1)},
          {"nde0", optional_number(e.nde0)},
          {"nde1", optional_number(e.nde1)}};
}

Json arm_json(const ArmFit& arm) {
  Json out = {{"mediator", {{"intercept", arm.mediator.intercept}, {"slope", arm.mediator.slope}}}};
  out["outcome"] = arm.outcome ? Json{{"intercept", arm.outcome->intercept}, {"slope", arm.outcome->slope}}
                               : Json(nullptr);
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json to_json(const ValidationReport& report) {
  Json out = Json::array();
  for (const auto& v : report.violations) {
    out.push_back({{"code", std::string(to_string(v.code))}, {"message", v.message}});
  }
  return out;
}

Json to_json(const EffectSet& e) {
  return {{"ate", e.ate},   {"nie0", e.nie0}, {"nie1", e.nie1}, {"nde0", e.nde0},
          {"nde1", e.nde1}, {"cde0", e.cde0}, {"cde1", e.cde1}};
}

Json to_json(const ThetaIV& t) {
  return {{"alpha0", t.alpha0}, {"alpha1", t.alpha1}, {"beta0", t.beta0}, {"beta1", t.beta1},
          {"pi0", t.pi0},       {"pi1", t.pi1},       {"tau0", t.tau0},   {"tau1", t.tau1}};
}

Json to_json(const IvEstimands& e) {
  return {{"nie0_iv", e.nie0_iv}, {"nie1_iv", e.nie1_iv}, {"nde0_iv", e.nde0_iv}, {"nde1_iv", e.nde1_iv}};
}

Json to_json(const PartialIvEstimands& e) {
  return {{"nie0_iv", optional_number(e.nie0_iv)},
          {"nie1_iv", optional_number(e.nie1_iv)},
          {"nde0_iv", optional_number(e.nde0_iv)},
          {"nde1_iv", optional_number(e.nde1_iv)}};
}

Json to_json(const AssumptionReport& r) {
  return {{"d_monotone_given_z", pair_json(r.d_monotone_given_z)},
          {"z_monotone_given_d", pair_json(r.z_monotone_given_d)},
          {"relevance", pair_json(r.relevance)},
          {"q1", r.q1},
          {"q2", r.q2},
          {"p1z", pair_json(r.p1z)},
          {"constant_effect", r.constant_effect}};
}

Json to_json(const GapReport& r) {
  Json complier_means = Json::object();
  Json shares = Json::object();
  for (int d = 0; d < 2; ++d) {
    const auto& split = r.instrument_subgroups[d];
    const std::string prefix = "d" + std::to_string(d);
    complier_means[prefix + "_instrument_compliers"] = optional_number(split.complier_mean);
    complier_means[prefix + "_instrument_defiers"] = optional_number(split.defier_mean);
    shares[prefix + "_instrument_compliers"] = split.complier_share;
    shares[prefix + "_instrument_defiers"] = split.defier_share;
  }
  Json checks = Json::array();
  for (int d = 0; d < 2; ++d) {
    const auto& c = r.cross_checks[d];
    checks.push_back({{"effect", d == 0 ? "nie0" : "nie1"},
                      {"applicable", c.applicable},
                      {"nie_from_subgroups", c.nie_from_subgroups},
                      {"nie_iv_from_subgroups", optional_number(c.nie_iv_from_subgroups)},
                      {"agrees", c.agrees}});
  }
  return {{"target", to_json(r.target)},
          {"iv", to_json(r.iv)},
          {"gaps", effects_json({r.gaps.nie0, r.gaps.nie1, r.gaps.nde0, r.gaps.nde1})},
          {"complier_means", complier_means},
          {"subgroup_shares", shares},
          {"cross_checks", checks},
          {"weak_arms", r.weak_arms}};
}

Json to_json(const EstimateSet& e) {
  Json counts = Json::array();
  for (int d = 0; d < 2; ++d) counts.push_back({e.diagnostics.counts[d][0], e.diagnostics.counts[d][1]});
  return {{"estimator", "iv"},
          {"n", e.n},
          {"theta_hat", e.theta_hat ? to_json(*e.theta_hat) : Json(nullptr)},
          {"arms", Json::array({arm_json(e.arms[0]), arm_json(e.arms[1])})},
          {"effects", effects_json(e.effects)},
          {"e_z_hat", e.e_z_hat},
          {"diagnostics", {{"cell_counts", counts}, {"first_stage", pair_json(e.diagnostics.first_stage)}}},
          {"weak_arms", e.weak_arms}};
}

Json to_json(const LsemEstimate& e) {
  return {{"estimator", "si"}, {"a0", e.a0}, {"a1", e.a1}, {"b0", e.b0}, {"b1", e.b1},
          {"b2", e.b2},        {"b3", e.b3}, {"effects", effects_json(e.effects)}};
}

Json to_json(const BootstrapResult& b) {
  Json intervals = Json::object();
  for (const auto& iv : b.intervals) {
    intervals[std::string(iv.effect)] = {
        {"lower", optional_number(iv.lower)}, {"upper", optional_number(iv.upper)}, {"successes", iv.successes}};
  }
  return {{"estimator", std::string(to_string(b.estimator))},
          {"reps", b.reps},
          {"level", b.level},
          {"failed_replicates", b.failed_replicates},
          {"intervals", intervals}};
}

Json to_json(const McReport& r) {
  Json estimators = Json::array();
  for (auto e : r.estimators) estimators.push_back(std::string(to_string(e)));
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"n", c.n},
                     {"estimator", std::string(to_string(c.estimator))},
                     {"quantity", std::string(c.quantity)},
                     {"count", c.count},
                     {"failures", c.failures},
                     {"mean", optional_number(c.mean)},
                     {"sd", optional_number(c.sd)},
                     {"target", optional_number(c.target)},
                     {"estimand", optional_number(c.estimand)},
                     {"bias_to_target", optional_number(c.bias_to_target)},
                     {"bias_to_estimand", optional_number(c.bias_to_estimand)},
                     {"flagged", c.flagged}});
  }
  return {{"n_grid", r.n_grid}, {"reps", r.reps},         {"seed", r.seed},  {"estimators", estimators},
          {"target", to_json(r.target)}, {"estimand", to_json(r.estimand)}, {"cells", cells}};
}

std::string to_csv(const McReport& r) {
  std::ostringstream os;
  os << "n,estimator,quantity,count,failures,mean,sd,target,estimand,bias_to_target,bias_to_estimand,flagged\n";
  auto opt = [&os](const std::optional<double>& x) {
    os << ',';
    if (x) os << format_number(*x);
  };
  for (const auto& c : r.cells) {
    os << c.n << ',' << to_string(c.estimator) << ',' << c.quantity << ',' << c.count << ',' << c.failures;
    opt(c.mean);
    opt(c.sd);
    opt(c.target);
    opt(c.estimand);
    opt(c.bias_to_target);
    opt(c.bias_to_estimand);
    os << ',' << (c.flagged ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace ivmed
