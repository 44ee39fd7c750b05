#include "ivmed/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ivmed/rng.hpp"

namespace ivmed {

std::string_view to_string(EstimatorKind kind) { return kind == EstimatorKind::kIv ? "iv" : "si"; }

std::optional<EstimatorKind> parse_estimator(std::string_view name) {
  if (name == "iv") return EstimatorKind::kIv;
  if (name == "si") return EstimatorKind::kSi;
  return std::nullopt;
}

namespace {

struct CellMeans {
  double n = 0.0;
  double m = 0.0;  // mean mediator
  double y = 0.0;  // mean outcome
};

CellMeans cell_means(const CellTable& t, int d, int z) {
  const auto n0 = t.count(d, z, 0);
  const auto n1 = t.count(d, z, 1);
  const double n = static_cast<double>(n0 + n1);
  return {n, static_cast<double>(n1) / n, (t.sum_y(d, z, 0) + t.sum_y(d, z, 1)) / n};
}

void require_cells(const CellTable& t) {
  for (int d = 0; d < 2; ++d)
    for (int z = 0; z < 2; ++z)
      if (t.count(d, z) == 0) throw EmptyCell(d, z);
}

CellDiagnostics diagnostics(const CellTable& t) {
  CellDiagnostics diag;
  for (int d = 0; d < 2; ++d) {
    for (int z = 0; z < 2; ++z) diag.counts[d][z] = t.count(d, z);
    if (t.count(d, 0) > 0 && t.count(d, 1) > 0) {
      diag.first_stage[d] = cell_means(t, d, 1).m - cell_means(t, d, 0).m;
    }
  }
  return diag;
}

}  // namespace

ArmFits estimate_arm_fits(const CellTable& cells, const IvOptions& opts) {
  require_cells(cells);
  ArmFits arms;
  for (int d = 0; d < 2; ++d) {
    const CellMeans lo = cell_means(cells, d, 0);
    const CellMeans hi = cell_means(cells, d, 1);
    const double arm_n = lo.n + hi.n;
    const double arm_z = hi.n / arm_n;
    const double arm_m = (lo.m * lo.n + hi.m * hi.n) / arm_n;
    const double arm_y = (lo.y * lo.n + hi.y * hi.n) / arm_n;

    const double first_stage = hi.m - lo.m;
    arms[d].mediator = {arm_m - first_stage * arm_z, first_stage};
    if (std::abs(first_stage) < opts.weak_threshold) continue;

    const double slope = (hi.y - lo.y) / first_stage;
    arms[d].outcome = LinearEquation{arm_y - slope * arm_m, slope};
  }
  return arms;
}

ThetaIV estimate_theta_iv(const CellTable& cells, const IvOptions& opts) {
  return to_theta(estimate_arm_fits(cells, opts));
}

ThetaIV estimate_theta_iv(const Dataset& ds, const IvOptions& opts) { return estimate_theta_iv(tabulate(ds), opts); }

EstimateSet estimate_effects_iv(const CellTable& cells, const IvOptions& opts) {
  EstimateSet est;
  est.arms = estimate_arm_fits(cells, opts);
  est.n = cells.total();
  est.diagnostics = diagnostics(cells);
  std::uint64_t z_ones = 0;
  for (int d = 0; d < 2; ++d) {
    z_ones += cells.count(d, 1);
    if (!est.arms[d].outcome) est.weak_arms.push_back(d);
  }
  est.e_z_hat = static_cast<double>(z_ones) / static_cast<double>(est.n);
  if (est.weak_arms.empty()) est.theta_hat = to_theta(est.arms);

  const PartialIvEstimands fx = iv_mediation_estimands(est.arms, est.e_z_hat);
  est.effects = {fx.nie0_iv, fx.nie1_iv, fx.nde0_iv, fx.nde1_iv};
  return est;
}

EstimateSet estimate_effects_iv(const Dataset& ds, const IvOptions& opts) {
  return estimate_effects_iv(tabulate(ds), opts);
}

LsemEstimate estimate_effects_si(const CellTable& cells) {
  // Y on (1, D, M, DM) is saturated in the binary (D, M), so least squares
  // reproduces the four (d, m) cell means; M on (1, D) reproduces the arm means.
  double n_dm[2][2] = {};
  double sum_dm[2][2] = {};
  for (int d = 0; d < 2; ++d) {
    for (int z = 0; z < 2; ++z) {
      for (int m = 0; m < 2; ++m) {
        n_dm[d][m] += static_cast<double>(cells.count(d, z, m));
        sum_dm[d][m] += cells.sum_y(d, z, m);
      }
    }
  }
  for (int d = 0; d < 2; ++d) {
    if (n_dm[d][0] + n_dm[d][1] == 0.0) {
      throw SingularDesign("treatment arm D=" + std::to_string(d) + " has no observations");
    }
    for (int m = 0; m < 2; ++m) {
      if (n_dm[d][m] == 0.0) {
        throw SingularDesign("mediator is constant (never " + std::to_string(m) + ") in treatment arm D=" +
                             std::to_string(d));
      }
    }
  }
  auto ybar = [&](int d, int m) { return sum_dm[d][m] / n_dm[d][m]; };
  auto mbar = [&](int d) { return n_dm[d][1] / (n_dm[d][0] + n_dm[d][1]); };

  LsemEstimate e;
  e.a0 = mbar(0);
  e.a1 = mbar(1) - mbar(0);
  e.b0 = ybar(0, 0);
  e.b1 = ybar(1, 0) - ybar(0, 0);
  e.b2 = ybar(0, 1) - ybar(0, 0);
  e.b3 = (ybar(1, 1) - ybar(1, 0)) - e.b2;
  e.effects.nie0 = e.b2 * e.a1;
  e.effects.nie1 = (e.b2 + e.b3) * e.a1;
  e.effects.nde0 = e.b1 + e.b3 * e.a0;
  e.effects.nde1 = e.b1 + e.b3 * (e.a0 + e.a1);
  return e;
}

LsemEstimate estimate_effects_si(const Dataset& ds) { return estimate_effects_si(tabulate(ds)); }

double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

constexpr std::array<std::string_view, 4> kEffectNames = {"nie0", "nie1", "nde0", "nde1"};

std::array<std::optional<double>, 4> as_array(const EffectEstimates& e) { return {e.nie0, e.nie1, e.nde0, e.nde1}; }

struct Replicate {
  bool threw = false;
  std::array<std::optional<double>, 4> effects;
};

Replicate run_replicate(const Dataset& ds, EstimatorKind kind, std::uint64_t seed, std::size_t r,
                        const BootstrapOptions& opts) {
  rng::Stream stream(rng::derive_key({seed, r}));
  const std::uint64_t n = ds.size();
  CellTable cells;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Observation& o = ds.rows[stream.below(n)];
    cells.add(o.d, o.z, o.m, o.y);
  }
  Replicate rep;
  try {
    rep.effects = kind == EstimatorKind::kIv ? as_array(estimate_effects_iv(cells, opts.iv).effects)
                                             : as_array(estimate_effects_si(cells).effects);
  } catch (const StatisticalError&) {
    rep.threw = true;
  }
  return rep;
}

}  // namespace

BootstrapResult bootstrap(const Dataset& ds, EstimatorKind estimator, std::size_t reps, std::uint64_t seed,
                          const BootstrapOptions& opts) {
  if (reps == 0) throw DomainError("bootstrap needs at least one replicate");
  if (ds.size() == 0) throw DomainError("bootstrap of an empty dataset");
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw DomainError("bootstrap level must lie in (0, 1)");

  std::vector<Replicate> results(reps);
  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < reps; r = next++) results[r] = run_replicate(ds, estimator, seed, r, opts);
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  BootstrapResult out;
  out.estimator = estimator;
  out.reps = reps;
  out.level = opts.level;
  std::array<std::vector<double>, 4> draws;
  for (const Replicate& rep : results) {
    bool complete = !rep.threw;
    for (std::size_t k = 0; k < 4; ++k) {
      if (rep.effects[k]) {
        draws[k].push_back(*rep.effects[k]);
      } else {
        complete = false;
      }
    }
    if (!complete) ++out.failed_replicates;
  }

  bool any = false;
  const double tail = (1.0 - opts.level) / 2.0;
  for (std::size_t k = 0; k < 4; ++k) {
    EffectInterval& iv = out.intervals[k];
    iv.effect = kEffectNames[k];
    iv.successes = draws[k].size();
    if (draws[k].empty()) continue;
    any = true;
    std::sort(draws[k].begin(), draws[k].end());
    iv.lower = sorted_quantile(draws[k], tail);
    iv.upper = sorted_quantile(draws[k], 1.0 - tail);
  }
  if (!any) {
    throw AllReplicatesFailed("all " + std::to_string(reps) + " bootstrap replicates failed");
  }
  return out;
}

}  // namespace ivmed
