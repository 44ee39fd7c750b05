#include "ivmed/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "ivmed/rng.hpp"
#include "ivmed/sampler.hpp"

namespace ivmed {

void validate(const McConfig& cfg) {
  if (cfg.n_grid.empty()) throw DomainError("mc: n_grid must not be empty");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] == 0) throw DomainError("mc: n_grid entries must be positive");
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw DomainError("mc: n_grid must be strictly ascending");
  }
  if (cfg.reps < 2) throw DomainError("mc: reps must be at least 2");
  if (cfg.estimators.empty()) throw DomainError("mc: at least one estimator is required");
  require_valid(cfg.population);
}

std::uint64_t dataset_seed(std::uint64_t seed, std::size_t n, std::size_t rep) {
  return rng::derive_key({seed, n, rep});
}

std::optional<double> McCell::standard_error() const {
  if (!sd || count == 0) return std::nullopt;
  return *sd / std::sqrt(static_cast<double>(count));
}

const McCell* McReport::find(std::size_t n, EstimatorKind estimator, std::string_view quantity) const {
  for (const auto& c : cells) {
    if (c.n == n && c.estimator == estimator && c.quantity == quantity) return &c;
  }
  return nullptr;
}

namespace {

constexpr std::size_t kQuantities = 12;
constexpr std::array<std::string_view, kQuantities> kQuantityNames = {
    "nie0", "nie1", "nde0", "nde1", "alpha0", "alpha1", "beta0", "beta1", "pi0", "pi1", "tau0", "tau1"};

using Values = std::array<std::optional<double>, kQuantities>;

void put_effects(Values& v, const EffectEstimates& e) {
  v[0] = e.nie0;
  v[1] = e.nie1;
  v[2] = e.nde0;
  v[3] = e.nde1;
}

// alpha/tau from the D=1 arm, beta/pi from the D=0 arm.
void put_coefficients(Values& v, const ArmFits& arms) {
  if (arms[1].outcome) {
    v[4] = arms[1].outcome->intercept;
    v[5] = arms[1].outcome->slope;
  }
  if (arms[0].outcome) {
    v[6] = arms[0].outcome->intercept;
    v[7] = arms[0].outcome->slope;
  }
  v[8] = arms[0].mediator.intercept;
  v[9] = arms[0].mediator.slope;
  v[10] = arms[1].mediator.intercept;
  v[11] = arms[1].mediator.slope;
}

Values estimate_one(const CellTable& cells, EstimatorKind kind, const IvOptions& iv) {
  Values v;
  try {
    if (kind == EstimatorKind::kIv) {
      const EstimateSet est = estimate_effects_iv(cells, iv);
      put_effects(v, est.effects);
      put_coefficients(v, est.arms);
    } else {
      put_effects(v, estimate_effects_si(cells).effects);
    }
  } catch (const StatisticalError&) {
    // failure: every quantity stays absent
  }
  return v;
}

class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    carry_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

McReport run_mc(const McConfig& cfg) {
  validate(cfg);
  const Population& pop = cfg.population;

  McReport report;
  report.n_grid = cfg.n_grid;
  report.reps = cfg.reps;
  report.seed = cfg.seed;
  report.estimators = cfg.estimators;
  report.target = true_effect_set(pop);
  const ArmFits pop_arms = population_arm_fits(pop);
  report.estimand = iv_mediation_estimands(pop_arms, pop.p_z);

  Values truth;  // targets
  truth[0] = report.target.nie0;
  truth[1] = report.target.nie1;
  truth[2] = report.target.nde0;
  truth[3] = report.target.nde1;
  Values limit;  // IV probability limits
  put_effects(limit, {report.estimand.nie0_iv, report.estimand.nie1_iv, report.estimand.nde0_iv,
                      report.estimand.nde1_iv});
  put_coefficients(limit, pop_arms);

  const std::size_t n_est = cfg.estimators.size();
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.reps));

  for (const std::size_t n : cfg.n_grid) {
    // results[rep * n_est + e]
    std::vector<Values> results(cfg.reps * n_est);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t rep = next++; rep < cfg.reps; rep = next++) {
        const CellTable cells = draw_cells(pop, n, dataset_seed(cfg.seed, n, rep));
        for (std::size_t e = 0; e < n_est; ++e) {
          results[rep * n_est + e] = estimate_one(cells, cfg.estimators[e], cfg.iv);
        }
      }
    };
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    for (std::size_t e = 0; e < n_est; ++e) {
      const EstimatorKind kind = cfg.estimators[e];
      const std::size_t quantities = kind == EstimatorKind::kIv ? kQuantities : 4;
      for (std::size_t q = 0; q < quantities; ++q) {
        McCell cell;
        cell.n = n;
        cell.estimator = kind;
        cell.quantity = kQuantityNames[q];
        cell.target = truth[q];
        cell.estimand = limit[q];

        NeumaierSum sum;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
          if (const auto& x = results[rep * n_est + e][q]) {
            sum.add(*x);
            ++cell.count;
          }
        }
        cell.failures = cfg.reps - cell.count;
        cell.flagged = static_cast<double>(cell.failures) > kFailureFlagFraction * static_cast<double>(cfg.reps);
        if (cell.count > 0) {
          const double mean = sum.value() / static_cast<double>(cell.count);
          cell.mean = mean;
          if (cell.count >= 2) {
            NeumaierSum sq;
            for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
              if (const auto& x = results[rep * n_est + e][q]) sq.add((*x - mean) * (*x - mean));
            }
            cell.sd = std::sqrt(sq.value() / static_cast<double>(cell.count - 1));
          }
          if (cell.target) cell.bias_to_target = *cell.target - mean;
          if (cell.estimand) cell.bias_to_estimand = *cell.estimand - mean;
        }
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

}  // namespace ivmed
