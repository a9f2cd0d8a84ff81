#pragma once

// Afriat numbers, the concave envelope utility they define, the augmented
// utility U(x, -e) that rationalizes GAPP-consistent data, and rankings of
// observed prices valid for every rationalization.

#include <optional>
#include <vector>

#include "revpref/dataset.hpp"
#include "revpref/error.hpp"
#include "revpref/relations.hpp"

namespace revpref {

/// phi^s <= phi^t + lambda^t p^t (x^s - x^t) for all t, s; lambda >= 1.
struct AfriatSolution {
  Vec phi;
  Vec lambda;
};

class GarpViolation : public ModelError {
 public:
  explicit GarpViolation(CycleWitness w);
  CycleWitness witness;
};

class GappViolation : public ModelError {
 public:
  explicit GappViolation(CycleWitness w);
  CycleWitness witness;
};

/// Extra requirement phi^better >= phi^worse (strictly, with unit margin, if strict).
struct UtilityOrder {
  int better = 0;
  int worse = 0;
  bool strict = true;
};

/// Minimizes sum(lambda) subject to the Afriat inequalities and lambda >= 1,
/// with phi^0 = 0. Throws GarpViolation when the data fail GARP.
AfriatSolution solve_afriat(const DeterministicDataset& data);

/// As solve_afriat with additional order constraints on phi; nullopt when the
/// system is infeasible.
std::optional<AfriatSolution> try_solve_afriat(const DeterministicDataset& data,
                                               const std::vector<UtilityOrder>& orders = {});

/// Largest violation of the Afriat inequalities (<= 0 when satisfied).
double afriat_residual(const AfriatSolution& sol, const DeterministicDataset& data);

/// min_t phi^t + lambda^t p^t (x - x^t); x may have negative components.
double evaluate_utility(const AfriatSolution& sol, const DeterministicDataset& data, const Vec& x);

/// Prices (p^t, 1) and bundles (x^t, M - p^t x^t).
DeterministicDataset augment_dataset(const DeterministicDataset& data, double budget_constant);

struct AugmentedUtility {
  AfriatSolution base;  // over the augmented data
  double budget_constant = 0.0;
  double penalty_exponent = 3.0;
  Mat source_prices;
  Mat source_bundles;

  /// U(x, -e) = envelope(x, M - e) - h(max(0, e - M)), h(k) = k^3.
  double evaluate(const Vec& x, double expenditure) const;
  /// U(x, -p^t x) for observed prices p^t.
  double at_prices(const Vec& x, int t) const;
};

/// Throws GappViolation when the data fail GAPP.
AugmentedUtility build_augmented_utility(const DeterministicDataset& data);

struct RationalizationAudit {
  bool at_observed_bundles = true;
  bool on_grid = true;
  /// First point found to beat x^t at prices p^t, with that t.
  std::optional<Vec> offending_point;
  int offending_period = -1;
};

/// Checks U(x^t, -p^t x^t) >= U(y, -p^t y) for y among the observed bundles
/// and among grid_points^L lattice points of [0, grid_radius]^L.
RationalizationAudit verify_rationalization(const AugmentedUtility& u, const DeterministicDataset& data,
                                            double grid_radius, int grid_points);

enum class PriceRanking { StrictlyPreferred, WeaklyPreferred, Unranked };

const char* to_string(PriceRanking r);

/// Ranking of p^t against p^s that holds for every rationalization.
/// Throws GappViolation when the data fail GAPP.
PriceRanking price_preference_query(const DeterministicDataset& data, int t, int s);

}  // namespace revpref
