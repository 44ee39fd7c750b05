#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ivmed/estimators.hpp"
#include "ivmed/harness.hpp"
#include "ivmed/oracle.hpp"
#include "ivmed/report.hpp"
#include "ivmed/sampler.hpp"
#include "ivmed/scenario.hpp"

namespace ivmed::cli {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw InputError("failed writing '" + path + "'");
}

Json weak_instrument_error(const std::vector<int>& arms) {
  return {{"type", "weak_instrument"}, {"arms", arms}};
}

// ---- oracle ---------------------------------------------------------------

int cmd_oracle(const std::string& scenario_path, std::ostream& out) {
  const Scenario sc = load_scenario(scenario_path);
  const Population& pop = sc.population;

  Json doc;
  doc["true_effects"] = to_json(true_effect_set(pop));
  const ArmFits arms = population_arm_fits(pop);
  std::vector<int> weak;
  for (int d = 0; d < 2; ++d) {
    if (!arms[d].outcome) weak.push_back(d);
  }
  if (weak.empty()) {
    const ThetaIV theta = to_theta(arms);
    doc["theta_iv"] = to_json(theta);
    doc["iv_estimands"] = to_json(iv_mediation_estimands(theta, pop.p_z));
  }
  doc["assumptions"] = to_json(assumption_report(pop));
  doc["gap_report"] = to_json(gap_report(pop));
  if (!weak.empty()) doc["error"] = weak_instrument_error(weak);
  emit(out, doc);
  return weak.empty() ? kExitOk : kExitDegenerate;
}

// ---- sample ---------------------------------------------------------------

int cmd_sample(const std::string& scenario_path, std::size_t n, std::uint64_t seed, const std::string& out_path,
               std::ostream& out) {
  if (n == 0) throw InputError("--n must be at least 1");
  const Scenario sc = load_scenario(scenario_path);
  const Dataset ds = draw(sc.population, n, seed, DrawOptions{0});
  if (out_path.empty()) {
    write_csv(out, ds);
  } else {
    write_file(out_path, to_csv(ds));
  }
  return kExitOk;
}

// ---- estimate -------------------------------------------------------------

int cmd_estimate(const std::string& csv_path, EstimatorKind kind, std::size_t bootstrap_reps, std::uint64_t seed,
                 std::ostream& out) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset '" + csv_path + "'");
  const Dataset ds = read_csv(in);

  Json doc;
  int code = kExitOk;
  try {
    if (kind == EstimatorKind::kIv) {
      const EstimateSet est = estimate_effects_iv(ds);
      doc = to_json(est);
      if (!est.weak_arms.empty()) {
        doc["error"] = weak_instrument_error(est.weak_arms);
        code = kExitDegenerate;
      }
    } else {
      doc = to_json(estimate_effects_si(ds));
    }
  } catch (const EmptyCell& e) {
    emit(out, {{"estimator", std::string(to_string(kind))},
               {"n", ds.size()},
               {"error", {{"type", "empty_cell"}, {"d", e.d()}, {"z", e.z()}, {"message", e.what()}}}});
    return kExitDegenerate;
  } catch (const SingularDesign& e) {
    emit(out, {{"estimator", std::string(to_string(kind))},
               {"n", ds.size()},
               {"error", {{"type", "singular_design"}, {"message", e.what()}}}});
    return kExitDegenerate;
  }

  if (bootstrap_reps > 0) {
    try {
      doc["bootstrap"] = to_json(bootstrap(ds, kind, bootstrap_reps, seed, BootstrapOptions{.threads = 0}));
    } catch (const AllReplicatesFailed& e) {
      doc["bootstrap"] = {{"error", {{"type", "all_replicates_failed"}, {"message", e.what()}}}};
      code = kExitDegenerate;
    }
  }
  emit(out, doc);
  return code;
}

// ---- mc -------------------------------------------------------------------

struct McFlags {
  std::string scenario;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> estimators;
  std::string out_prefix;
};

int cmd_mc(const McFlags& flags, std::ostream& out) {
  const Scenario sc = load_scenario(flags.scenario);
  const McSettings settings = sc.mc.value_or(McSettings{});

  McConfig cfg;
  cfg.population = sc.population;
  cfg.n_grid = settings.n_grid;
  cfg.reps = flags.reps.value_or(settings.reps);
  cfg.seed = flags.seed.value_or(settings.seed);
  cfg.estimators = settings.estimators;
  if (!flags.estimators.empty()) {
    cfg.estimators.clear();
    for (const auto& name : flags.estimators) cfg.estimators.push_back(*parse_estimator(name));
  }
  cfg.threads = 0;
  try {
    validate(cfg);
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }

  const McReport report = run_mc(cfg);
  const std::string json_text = to_json(report).dump(2) + "\n";
  const std::string csv_text = to_csv(report);

  std::optional<std::string> json_path = sc.output.json;
  std::optional<std::string> csv_path = sc.output.csv;
  if (!flags.out_prefix.empty()) {
    json_path = flags.out_prefix + ".json";
    csv_path = flags.out_prefix + ".csv";
  }
  if (!json_path && !csv_path) {
    out << json_text;
    return kExitOk;
  }
  Json written = Json::object();
  if (json_path) {
    write_file(*json_path, json_text);
    written["json"] = *json_path;
  }
  if (csv_path) {
    write_file(*csv_path, csv_text);
    written["csv"] = *csv_path;
  }
  emit(out, written);
  return kExitOk;
}

// ---- cancellation example ------------------------------------------------

int cmd_cancellation_example(double alpha, std::ostream& out) {
  if (!(alpha > 0.0)) throw InputError("--alpha must be > 0");
  const Population pop = build_cancellation_counterexample(alpha);
  const AssumptionReport assumptions = assumption_report(pop);
  const GapReport gaps = gap_report(pop);
  const ArmFits arms = population_arm_fits(pop);
  const InstrumentResponseSplit& split = gaps.instrument_subgroups[0];

  const double beta1 = arms[0].outcome->slope;
  const double nie0_iv = *gaps.iv.nie0_iv;
  const double nie0 = gaps.target.nie0;

  std::ostringstream verdict;
  verdict << "Instrument compliers and defiers in the D=0 arm have positive mediator effects (" << alpha << " and "
          << 2.0 * alpha << "), yet they cancel in the Wald ratio: beta1_iv = " << beta1
          << " and nie0_iv = " << nie0_iv << " while the true nie0 is " << nie0
          << "; the IV estimand is uninformative without monotonicity of M in Z.";

  Json doc;
  doc["alpha"] = alpha;
  doc["q1"] = assumptions.q1;
  doc["q2"] = assumptions.q2;
  doc["subgroup_means"] = {{"instrument_compliers", split.complier_mean ? Json(*split.complier_mean) : Json()},
                           {"instrument_defiers", split.defier_mean ? Json(*split.defier_mean) : Json()}};
  doc["beta1_iv"] = beta1;
  doc["nie0_iv"] = nie0_iv;
  doc["nie0"] = nie0;
  doc["gap_nie0"] = *gaps.gaps.nie0;
  doc["true_effects"] = to_json(gaps.target);
  doc["assumptions"] = to_json(assumptions);
  doc["verdict"] = verdict.str();
  emit(out, doc);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Instrumental-variable mediation analysis: oracle, sampler, estimators and Monte Carlo", "ivmed"};
  app.require_subcommand(1);

  std::string scenario;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out_path;

  auto* oracle = app.add_subcommand("oracle", "Exact effects, IV estimands and diagnostics for a scenario");
  oracle->add_option("--scenario", scenario, "Scenario JSON file")->required();

  auto* sample = app.add_subcommand("sample", "Draw a dataset from a scenario as CSV");
  sample->add_option("--scenario", scenario, "Scenario JSON file")->required();
  sample->add_option("--n", n, "Number of rows")->required();
  sample->add_option("--seed", seed, "Random seed");
  sample->add_option("--out", out_path, "Output CSV path (default: stdout)");

  std::string csv_path;
  std::string estimator_name = "iv";
  std::size_t bootstrap_reps = 0;
  auto* estimate = app.add_subcommand("estimate", "Estimate mediation effects from a dataset CSV");
  estimate->add_option("data", csv_path, "Dataset CSV (header d,z,m,y)")->required();
  estimate->add_option("--estimator", estimator_name, "iv or si")->check(CLI::IsMember({"iv", "si"}));
  estimate->add_option("--bootstrap-reps", bootstrap_reps, "Bootstrap replicates (0 = none)");
  estimate->add_option("--seed", seed, "Bootstrap seed");

  McFlags mc;
  std::size_t mc_reps = 0;
  std::uint64_t mc_seed = 0;
  auto* mc_cmd = app.add_subcommand("mc", "Run a Monte Carlo study defined by a scenario");
  mc_cmd->add_option("--scenario", mc.scenario, "Scenario JSON file")->required();
  auto* reps_opt = mc_cmd->add_option("--reps", mc_reps, "Replicates per grid point (overrides scenario)");
  auto* seed_opt = mc_cmd->add_option("--seed", mc_seed, "Master seed (overrides scenario)");
  mc_cmd->add_option("--estimator", mc.estimators, "iv and/or si (overrides scenario)")
      ->check(CLI::IsMember({"iv", "si"}));
  mc_cmd->add_option("--out", mc.out_prefix, "Write <out>.json and <out>.csv");

  double alpha = 1.0;
  auto* cancel = app.add_subcommand("paper-example", "Compliers/defiers cancellation counterexample");
  cancel->add_option("--alpha", alpha, "Complier mediator effect (defiers get 2*alpha)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  try {
    if (*oracle) return cmd_oracle(scenario, out);
    if (*sample) return cmd_sample(scenario, n, seed, out_path, out);
    if (*estimate) return cmd_estimate(csv_path, *parse_estimator(estimator_name), bootstrap_reps, seed, out);
    if (*mc_cmd) {
      if (*reps_opt) mc.reps = mc_reps;
      if (*seed_opt) mc.seed = mc_seed;
      return cmd_mc(mc, out);
    }
    if (*cancel) return cmd_cancellation_example(alpha, out);
  } catch (const InputError& e) {
    err << "ivmed: error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ParseError& e) {
    err << "ivmed: error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InvalidPopulation& e) {
    err << "ivmed: error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "ivmed: error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const StatisticalError& e) {
    err << "ivmed: error: " << e.what() << '\n';
    return kExitDegenerate;
  }
  return kExitInputError;
}

}  // namespace ivmed::cli
