#pragma once

// Cells cut out of each normalized budget plane {x >= 0 : p^t x = 1} by the
// other budget planes.

#include <cstdint>
#include <vector>

#include "revpref/dataset.hpp"
#include "revpref/error.hpp"
#include "revpref/parallel.hpp"

namespace revpref {

/// Position of a patch relative to another budget: Below means p^s x < 1.
enum class Side : std::int8_t { None = -1, Below = 0, Above = 1 };

inline constexpr double kSlackThreshold = 1e-7;
inline constexpr double kBoundaryTol = 1e-9;
inline constexpr double kDuplicateTol = 1e-9;

struct Patch {
  int budget = 0;
  /// One entry per budget; None for the budget itself and its duplicates.
  std::vector<Side> signs;
  Vec witness;
  /// Margin by which the witness satisfies every sign constraint.
  double margin = 0.0;
};

struct PatchLayout {
  Mat prices;  // T x L
  std::vector<std::vector<Patch>> per_budget;
  /// duplicate_of[t] is the smallest s with p^s == p^t.
  std::vector<int> duplicate_of;

  int budgets() const { return static_cast<int>(per_budget.size()); }
  int count(int t) const { return static_cast<int>(per_budget[t].size()); }
  int total_rows() const;
  /// Row of patch (t, 0) in the stacked layout.
  int offset(int t) const;
  /// Budgets other than t whose planes differ from B^t, in index order.
  std::vector<int> others(int t) const;
  std::vector<std::vector<int>> duplicate_classes() const;
  /// Which patch of budget t lies on the given side of budget s (None: s is t or a duplicate).
  Side side(int t, int patch, int s) const { return per_budget[t][patch].signs[s]; }
};

/// Thrown by assign_patch when the normalized point is within kBoundaryTol
/// of another budget plane.
class OnBoundary : public InputError {
 public:
  OnBoundary(int budget, int other, double distance);
  int budget, other;
  double distance;
};

/// Enumerates every sign pattern with a nonempty relative interior by a
/// depth-first search over the other budgets, pruned with slack LPs.
/// Patches are listed in lexicographic order of sign vectors (Below < Above).
PatchLayout enumerate_patches(const Mat& prices, Execution ex = Execution::Parallel);

/// Signs of p^s x - 1 for the normalized x = bundle / (p^t bundle).
std::vector<Side> sign_vector(const PatchLayout& layout, int t, const Vec& bundle);

/// Index of the patch of budget t containing the normalized bundle.
int assign_patch(const Vec& bundle, int t, const PatchLayout& layout);

/// FNV-1a hash of the prices and sign vectors; binds type matrices to layouts.
std::uint64_t layout_fingerprint(const PatchLayout& layout);

/// True iff the two layouts have the same prices and identical sign vectors.
bool same_layout(const PatchLayout& a, const PatchLayout& b);

}  // namespace revpref
