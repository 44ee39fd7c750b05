#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ivmed/population.hpp"

namespace ivmed::testing {

inline Stratum make_stratum(double weight, std::array<std::array<int, 2>, 2> m,
                            std::array<std::array<double, 2>, 2> y, double noise_sd = 0.0) {
  Stratum s;
  s.weight = weight;
  for (int d = 0; d < 2; ++d) {
    for (int k = 0; k < 2; ++k) {
      s.response.m[d][k] = static_cast<std::uint8_t>(m[d][k]);
      s.outcomes.y[d][k] = y[d][k];
    }
  }
  s.noise_sd = noise_sd;
  return s;
}

/// Two strata, both monotone in D and Z, with heterogeneous mediator effects
/// correlated with response type.
inline Population pop_a(double noise_sd = 0.0) {
  return Population{{make_stratum(0.5, {{{0, 1}, {1, 1}}}, {{{0, 2}, {1, 4}}}, noise_sd),
                     make_stratum(0.5, {{{0, 0}, {0, 1}}}, {{{1, 1}, {1, 3}}}, noise_sd)},
                    0.5, 0.5};
}

/// POP-A response types sharing one outcome profile: constant effects and
/// no confounding between response type and outcome level.
inline Population unconfounded(double noise_sd = 1.0) {
  const std::array<std::array<double, 2>, 2> y = {{{0.5, 2.0}, {1.25, 3.5}}};
  return Population{{make_stratum(0.5, {{{0, 1}, {1, 1}}}, y, noise_sd),
                     make_stratum(0.5, {{{0, 0}, {0, 1}}}, y, noise_sd)},
                    0.5, 0.5};
}

inline Population single_stratum(std::array<std::array<int, 2>, 2> m, std::array<std::array<double, 2>, 2> y,
                                  double noise_sd = 0.0, double p_z = 0.5, double p_d = 0.5) {
  return Population{{make_stratum(1.0, m, y, noise_sd)}, p_z, p_d};
}

/// Mediator table from a 4-bit code: bit (2*d + z) holds M(d,z).
inline MediatorResponse response_from_code(int code) {
  MediatorResponse r;
  for (int d = 0; d < 2; ++d)
    for (int z = 0; z < 2; ++z) r.m[d][z] = static_cast<std::uint8_t>((code >> (2 * d + z)) & 1);
  return r;
}

inline bool doubly_monotone(const MediatorResponse& r) {
  return r.at(1, 0) >= r.at(0, 0) && r.at(1, 1) >= r.at(0, 1) && r.at(0, 1) >= r.at(0, 0) &&
         r.at(1, 1) >= r.at(1, 0);
}

enum class Shape {
  kAny,            ///< unrestricted response tables and outcomes
  kConstantEffect, ///< shared contrasts Y(d,m) - Y(0,0) across strata
  kDoublyMonotone, ///< responses monotone in D and in Z
};

struct RandomPopulationOptions {
  Shape shape = Shape::kAny;
  int max_strata = 6;
  /// Redraw until |E[M_{d,1} - M_{d,0}]| exceeds this in both arms (0 disables).
  double min_relevance = 0.0;
  /// Require relevance only in the D=0 arm.
  bool relevance_untreated_only = false;
};

/// Random valid population; weights normalized so they sum to 1 within 1e-15.
class PopulationGenerator {
 public:
  explicit PopulationGenerator(std::uint64_t seed) : rng_(seed) {}

  Population operator()(const RandomPopulationOptions& opts = {}) {
    for (;;) {
      Population pop = draw_once(opts);
      if (opts.min_relevance <= 0.0 || relevant(pop, opts)) return pop;
    }
  }

 private:
  Population draw_once(const RandomPopulationOptions& opts) {
    std::uniform_int_distribution<int> n_strata(1, opts.max_strata);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::uniform_real_distribution<double> level(-5.0, 5.0);
    std::uniform_real_distribution<double> prob(0.1, 0.9);

    std::vector<int> codes;
    for (int c = 0; c < 16; ++c) {
      if (opts.shape != Shape::kDoublyMonotone || doubly_monotone(response_from_code(c))) codes.push_back(c);
    }
    std::uniform_int_distribution<std::size_t> pick(0, codes.size() - 1);

    std::array<std::array<double, 2>, 2> shared{};
    for (auto& row : shared)
      for (auto& v : row) v = level(rng_);

    Population pop;
    const int k = n_strata(rng_);
    double total = 0.0;
    for (int s = 0; s < k; ++s) {
      Stratum st;
      st.weight = unit(rng_);
      total += st.weight;
      st.response = response_from_code(codes[pick(rng_)]);
      const double base = level(rng_);
      for (int d = 0; d < 2; ++d) {
        for (int m = 0; m < 2; ++m) {
          st.outcomes.y[d][m] =
              opts.shape == Shape::kConstantEffect ? base + (shared[d][m] - shared[0][0]) : level(rng_);
        }
      }
      st.noise_sd = unit(rng_);
      pop.strata.push_back(st);
    }
    for (auto& st : pop.strata) st.weight /= total;
    pop.p_z = prob(rng_);
    pop.p_d = prob(rng_);
    return pop;
  }

  bool relevant(const Population& pop, const RandomPopulationOptions& opts) const {
    for (int d = 0; d < (opts.relevance_untreated_only ? 1 : 2); ++d) {
      double shift = 0.0;
      for (const auto& s : pop.strata) shift += s.weight * (s.response.at(d, 1) - s.response.at(d, 0));
      if (std::abs(shift) <= opts.min_relevance) return false;
    }
    return true;
  }

  std::mt19937_64 rng_;
};

}  // namespace ivmed::testing
