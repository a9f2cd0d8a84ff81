#pragma once

// Revealed preference over bundles and over prices, their transitive
// closures, and the GARP / GAPP acyclicity checks.

#include <optional>
#include <vector>

#include "revpref/dataset.hpp"
#include "revpref/error.hpp"

namespace revpref {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Absolute tolerance on expenditure comparisons. Differences within it are
/// ties: weak but never strict.
inline constexpr double kRelationTol = 1e-9;

/// weak(i, j): i is (revealed) preferred to j. strict(i, j) implies weak(i, j).
struct RelationPair {
  BoolMatrix weak;
  BoolMatrix strict;

  int size() const { return static_cast<int>(weak.rows()); }
};

/// A closed walk t_1 -> t_2 -> ... -> t_N -> t_1 along weak direct edges;
/// the edge leaving sequence[strict_edge_at] is strict.
struct CycleWitness {
  std::vector<int> sequence;
  int strict_edge_at = 0;
};

struct AxiomCheck {
  bool passes = true;
  std::optional<CycleWitness> witness;
};

/// x^a >=_x x^b iff p^a x^a >= p^a x^b.
RelationPair direct_bundle_relations(const DeterministicDataset& data);

/// p^a >=_p p^b iff p^a x^b <= p^b x^b.
RelationPair direct_price_relations(const DeterministicDataset& data);

/// psi^a >=_p psi^b iff costs(a, b) <= costs(b, b).
RelationPair direct_price_relations(const CostMatrix& costs);

RelationPair transitive_closure(const RelationPair& direct);

/// Finds a cycle of weak edges containing a strict edge, if any.
AxiomCheck check_acyclic(const RelationPair& direct);

AxiomCheck check_garp(const DeterministicDataset& data);
AxiomCheck check_gapp(const DeterministicDataset& data);
AxiomCheck check_gapp_nonlinear(const CostMatrix& costs);

/// True iff every consecutive pair of the witness is a weak direct edge and
/// the flagged edge is strict.
bool witness_is_valid(const CycleWitness& witness, const RelationPair& direct);

/// Rescales each bundle to unit expenditure at its own prices.
DeterministicDataset normalize_expenditure(const DeterministicDataset& data);

struct RobustnessMargin {
  double min_gap = 0.0;      // min over t != s of |p^t x^t - p^s x^t|
  double bundle_norm = 0.0;  // max over t of sum_i |x_i^t|

  /// Whether price errors eps and wealth perturbations delta (sup norms) are
  /// small enough to leave every GAPP verdict unchanged:
  /// 2 max|delta| + 2 B max|eps| < min_gap.
  bool covers(double max_wealth_error, double max_price_error) const {
    return 2.0 * max_wealth_error + 2.0 * bundle_norm * max_price_error < min_gap;
  }
};

/// Thrown when some p^t x^t - p^s x^t is zero, so no margin exists.
class GenericityError : public InputError {
 public:
  GenericityError(int t, int s);
  int first, second;
};

// Unbounded wealth perturbations rationalize any dataset, so the margin is
// only meaningful for datasets that pass the genericity check below.
RobustnessMargin robustness_margin(const DeterministicDataset& data);

}  // namespace revpref
