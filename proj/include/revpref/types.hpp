#pragma once

// Rational types: one patch per budget such that the implied revealed
// preference digraph is acyclic. The types are the columns of the binary
// matrix A.

#include <cstdint>
#include <vector>

#include "revpref/error.hpp"
#include "revpref/parallel.hpp"
#include "revpref/patches.hpp"
#include "revpref/solver.hpp"

namespace revpref {

struct TypeMatrix {
  int budgets = 0;
  int rows = 0;  // I
  /// Column j chooses patch assignments[j * budgets + t] at budget t.
  std::vector<std::uint16_t> assignments;
  SpMat matrix;  // I x H, one unit entry per budget block in each column
  std::uint64_t layout_id = 0;

  int columns() const { return budgets ? static_cast<int>(assignments.size() / budgets) : 0; }
  int patch(int column, int t) const { return assignments[static_cast<std::size_t>(column) * budgets + t]; }
};

class TypeBudgetExceeded : public InputError {
 public:
  TypeBudgetExceeded(long long cap, long long reached);
  long long cap, reached;
};

struct TypeOptions {
  long long cap = 10'000'000;
  Execution execution = Execution::Parallel;
};

/// Revealed preference edges between budgets: s -> s' iff the patch chosen at
/// s' lies Below budget s. Identical budgets share one node.
/// Types are listed in lexicographic order of their assignment tuples.
TypeMatrix enumerate_types(const PatchLayout& layout, const TypeOptions& options = {});

/// Builds A from explicit assignments (used when loading cached types).
TypeMatrix make_type_matrix(const PatchLayout& layout, std::vector<std::uint16_t> assignments);

/// True iff the assignment (one patch per budget) yields an acyclic digraph.
bool is_rational_assignment(const PatchLayout& layout, const std::vector<int>& assignment);

/// rho_j = 1 iff type j reveals p^t preferred to p^s through a chain of
/// distinct budgets. Requires t != s.
Vec type_indicator(const TypeMatrix& types, const PatchLayout& layout, int t, int s);

}  // namespace revpref
