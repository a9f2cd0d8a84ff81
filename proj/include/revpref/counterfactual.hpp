#pragma once

// Bounds on the share of consumers revealed better off at one price vector
// than at another, and confidence intervals for that share by test inversion.

#include <cstdint>
#include <optional>
#include <vector>

#include "revpref/parallel.hpp"
#include "revpref/patches.hpp"
#include "revpref/solver.hpp"
#include "revpref/stochastic_test.hpp"
#include "revpref/types.hpp"

namespace revpref {

struct WelfareRange {
  double lower = 0.0;
  double upper = 0.0;
  Vec nu_at_lower;
  Vec nu_at_upper;
};

/// min and max of rho'nu over {nu >= 0 : A nu = target}. Throws
/// InfeasibleConstraints when the target is outside cone(A).
WelfareRange welfare_range(const Vec& target, const TypeMatrix& types, const Vec& rho);

struct WelfareBounds {
  int t = 0;
  int s = 0;
  double lower = 0.0;
  double upper = 0.0;
  /// 1 - lower bound of the reversed pair: the largest share that some
  /// rationalization can rank p^t above p^s.
  double any_rationalization_upper = 0.0;
  Vec nu_at_lower;
  Vec nu_at_upper;
};

WelfareBounds welfare_bounds(const Vec& target, const TypeMatrix& types, const PatchLayout& layout, int t, int s);

/// pi-hat itself when jN = 0, otherwise A nu for the nu on the simplex that
/// minimizes the weighted distance to pi-hat.
Vec welfare_target(const ChoiceProbabilities& pi, const TypeMatrix& types, const Omega& omega, double jn);

struct ThetaPartition {
  double theta_max = 0.0;
  double theta_min = 0.0;
  std::vector<int> upper;   // rho_j == theta_max
  std::vector<int> lower;   // rho_j == theta_min
  std::vector<int> middle;  // the rest
  /// True when the range of rho is not of unit length and floors are
  /// computed on the rescaled parameter.
  bool normalized = false;
  int columns = 0;
};

/// Throws InputError when rho is constant.
ThetaPartition theta_partition(const Vec& rho);

struct Floors {
  Vec values;
  /// Set when the middle-set coefficient was negative and clamped to 0.
  bool clamped = false;
};

/// Lower bounds on nu defining the tightened set at theta. They sum to tau.
Floors tightened_lower_bounds(const ThetaPartition& part, double theta, double tau);

/// N min over nu on the simplex with rho'nu = theta (and nu >= floors when
/// given) of the weighted distance. Throws InfeasibleConstraints when the
/// floors and theta are incompatible.
double jn_theta(const ChoiceProbabilities& pi, const TypeMatrix& types, const Vec& rho, double theta,
                const Omega& omega, const Vec* floors = nullptr);

struct ThetaDiagnostics {
  double theta = 0.0;
  double jn = 0.0;
  double critical_value = 0.0;
  bool accepted = false;
  bool infeasible = false;
};

struct IntervalConfig {
  double alpha = 0.05;
  double grid_step = 0.01;
  int replications = 1000;
  std::optional<double> tau;
  std::uint64_t seed = 0;
  Execution execution = Execution::Parallel;
  /// Extra theta values (e.g. estimated bounds) added to the grid when in range.
  std::vector<double> extra_points;
};

struct ConfidenceInterval {
  std::vector<ThetaDiagnostics> grid;
  std::optional<std::pair<double, double>> hull;
  double alpha = 0.0;
  double tau = 0.0;
  int replications = 0;
  std::uint64_t seed = 0;
  bool clamped_floors = false;

  std::vector<double> accepted() const;
};

std::vector<double> theta_grid(const ThetaPartition& part, double step, const std::vector<double>& extra);

/// Accepts theta iff J_N(theta) is at most the ceil((1 - alpha) R)-th order
/// statistic of its tightened recentered bootstrap draws. All grid points
/// share the same household resamples.
ConfidenceInterval confidence_interval(const ChoiceProbabilities& pi, const TypeMatrix& types, const Vec& rho,
                                       const Omega& omega, const IntervalConfig& config);

}  // namespace revpref
