#pragma once

// Synthetic cross-sections: mixtures of rational types over a patch layout,
// and populations of quasilinear Cobb-Douglas consumers.

#include <cstdint>
#include <vector>

#include "revpref/dataset.hpp"
#include "revpref/parallel.hpp"
#include "revpref/patches.hpp"
#include "revpref/types.hpp"

namespace revpref {

struct MixtureSpec {
  const PatchLayout* layout = nullptr;
  const TypeMatrix* types = nullptr;
  Vec nu_star;                    // on the simplex
  std::vector<int> sample_sizes;  // N_t
  double log_mean = 0.0;          // expenditure ~ lognormal(log_mean, log_sd)
  double log_sd = 0.25;
  std::uint64_t seed = 0;
  Execution execution = Execution::Parallel;
};

/// Each household draws a type from nu_star and picks a point strictly
/// inside that type's patch, scaled by a random expenditure.
StochasticDataset gen_mixture(const MixtureSpec& spec);

struct QuasilinearSpec {
  int goods = 2;
  int periods = 2;
  int households = 100;
  double price_low = 0.5;  // prices are log-uniform on [price_low, price_high]
  double price_high = 2.0;
  Vec dirichlet;  // Cobb-Douglas weight parameters; empty means all ones
  double scale_log_sd = 0.25;
  std::uint64_t seed = 0;
  Execution execution = Execution::Parallel;
};

struct QuasilinearSample {
  StochasticDataset data;
  std::vector<DeterministicDataset> panels;  // one per household
};

/// Household h maximizes s_h sum_i a_i log x_i - p.x, so x_i = s_h a_i / p_i.
QuasilinearSample gen_quasilinear(const QuasilinearSpec& spec);

/// Closed-form demand x_i = weights_i / p_i.
Vec quasilinear_demand(const Vec& weights, const Vec& prices);

}  // namespace revpref
