#pragma once

// Dense deterministic optimization engines: a two-phase simplex LP solver and
// an active-set solver for bound- and equality-constrained weighted least
// squares.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <limits>
#include <optional>
#include <vector>

#include "revpref/error.hpp"

namespace revpref {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

struct LinearProgram {
  ObjectiveSense sense = ObjectiveSense::Minimize;
  Vec objective;                 // n
  Mat rows;                      // m x n
  std::vector<RowSense> senses;  // m
  Vec rhs;                       // m
  Vec lower;                     // n, may be -inf
  Vec upper;                     // n, may be +inf

  /// n variables in [0, inf), no rows, zero objective.
  static LinearProgram with_variables(int n, ObjectiveSense sense = ObjectiveSense::Minimize);
  int variables() const { return static_cast<int>(objective.size()); }
  int constraints() const { return static_cast<int>(rows.rows()); }
  void add_row(const Vec& coefficients, RowSense row_sense, double value);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double objective = 0.0;
  /// Row multipliers y with objective = rhs'y + bound terms (in the problem's own sense).
  Vec dual;
  double dual_objective = 0.0;
  int iterations = 0;
};

/// Two-phase dense tableau simplex. Entering variable by most negative
/// reduced cost (lowest index on ties); after a degenerate pivot it switches
/// to Bland's rule until progress resumes, so it cannot cycle. Throws
/// SolverError if the iteration cap 50 (n + m) is exceeded.
LpResult lp_solve(const LinearProgram& problem);

struct LinearEquality {
  Vec coefficients;
  double rhs = 0.0;
};

/// minimize sum_i w_i (target_i - (A x)_i)^2
/// subject to x >= lower_bounds and every equality e'x = rhs.
struct ConstrainedLeastSquares {
  SpMat design;
  Vec target;
  Vec weights;
  Vec lower_bounds;  // empty means all zero
  std::vector<LinearEquality> equalities;
};

struct KktResiduals {
  double stationarity = 0.0;       // max |reduced gradient| on the free set
  double dual_feasibility = 0.0;   // max(0, -min reduced gradient) at active bounds
  double complementarity = 0.0;    // max |(x_j - lb_j) * reduced gradient_j|
  double primal_feasibility = 0.0; // max equality / bound violation
};

struct ClsOptions {
  /// Feasible starting point; must satisfy all constraints.
  std::optional<Vec> initial;
  /// Columns to seed the free set with (warm start from a related solve).
  std::vector<int> warm_support;
  /// 0 selects the default cap of 100 (I + #equalities + 1) iterations.
  int max_iterations = 0;
};

struct ClsResult {
  Vec x;
  Vec fitted;  // A x
  double residual_norm_sq = 0.0;
  KktResiduals kkt;
  std::vector<int> support;  // indices with x_j > lb_j
  int iterations = 0;
};

/// Raised when the constraint set of a least-squares problem is empty.
class InfeasibleConstraints : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Reusable solver for many targets / bounds over one weighted design.
class ClsSolver {
 public:
  ClsSolver(const SpMat& design, const Vec& weights);

  ClsResult solve(const Vec& target, const Vec& lower_bounds, const std::vector<LinearEquality>& equalities,
                  const ClsOptions& options = {}) const;

  int rows() const { return static_cast<int>(weighted_.rows()); }
  int columns() const { return static_cast<int>(weighted_.cols()); }

 private:
  const SpMat& design_;
  SpMat weighted_;  // sqrt(weights) * design
  Vec sqrt_weights_;
  double column_scale_ = 0.0;
};

/// Active-set (Lawson-Hanson style) solver. Equalities are eliminated onto
/// their null space within each free-set subproblem. Without a supplied start,
/// a feasible point comes from an LP phase 1.
ClsResult cls_solve(const ConstrainedLeastSquares& problem, const ClsOptions& options = {});

/// Finds some x >= lower_bounds satisfying the equalities, or throws
/// InfeasibleConstraints.
Vec cls_feasible_point(const ConstrainedLeastSquares& problem);

SpMat to_sparse(const Mat& dense);

}  // namespace revpref
