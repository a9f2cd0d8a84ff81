#include "revpref/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace revpref {

namespace {

constexpr double kRhoTol = 1e-12;

std::vector<LinearEquality> simplex_with_theta(const Vec& rho, double theta) {
  return {{Vec::Ones(rho.size()), 1.0}, {rho, theta}};
}

void check_rho(const Vec& rho, const TypeMatrix& types) {
  if (rho.size() != types.columns())
    throw InputError("indicator has " + std::to_string(rho.size()) + " entries, expected " +
                     std::to_string(types.columns()));
}

}  // namespace

WelfareRange welfare_range(const Vec& target, const TypeMatrix& types, const Vec& rho) {
  check_rho(rho, types);
  if (target.size() != types.rows) throw InputError("target has the wrong length");
  const Mat a(types.matrix);
  WelfareRange out;
  for (auto sense : {ObjectiveSense::Minimize, ObjectiveSense::Maximize}) {
    auto lp = LinearProgram::with_variables(types.columns(), sense);
    lp.objective = rho;
    lp.rows = a;
    lp.rhs = target;
    lp.senses.assign(types.rows, RowSense::Equal);
    const auto sol = lp_solve(lp);
    if (sol.status == LpStatus::Infeasible)
      throw InfeasibleConstraints("no distribution of types reproduces the choice probabilities");
    if (sol.status != LpStatus::Optimal) throw SolverError("welfare LP is unbounded");
    if (sense == ObjectiveSense::Minimize) {
      out.lower = sol.objective;
      out.nu_at_lower = sol.x;
    } else {
      out.upper = sol.objective;
      out.nu_at_upper = sol.x;
    }
  }
  return out;
}

WelfareBounds welfare_bounds(const Vec& target, const TypeMatrix& types, const PatchLayout& layout, int t, int s) {
  const Vec rho = type_indicator(types, layout, t, s);
  const Vec reversed = type_indicator(types, layout, s, t);
  const auto forward = welfare_range(target, types, rho);
  const auto backward = welfare_range(target, types, reversed);
  WelfareBounds b;
  b.t = t;
  b.s = s;
  b.lower = forward.lower;
  b.upper = forward.upper;
  b.any_rationalization_upper = 1.0 - backward.lower;
  b.nu_at_lower = forward.nu_at_lower;
  b.nu_at_upper = forward.nu_at_upper;
  return b;
}

Vec welfare_target(const ChoiceProbabilities& pi, const TypeMatrix& types, const Omega& omega, double jn) {
  if (jn == 0.0) return pi.stacked;
  const ClsSolver solver(types.matrix, omega.diagonal);
  return solver.solve(pi.stacked, Vec(), {{Vec::Ones(types.columns()), 1.0}}).fitted;
}

ThetaPartition theta_partition(const Vec& rho) {
  if (rho.size() < 1) throw InputError("indicator is empty");
  ThetaPartition p;
  p.columns = static_cast<int>(rho.size());
  p.theta_max = rho.maxCoeff();
  p.theta_min = rho.minCoeff();
  if (p.theta_max - p.theta_min <= kRhoTol)
    throw InputError("the parameter is degenerate: every type has the same indicator value");
  for (int j = 0; j < p.columns; ++j) {
    if (rho(j) >= p.theta_max - kRhoTol)
      p.upper.push_back(j);
    else if (rho(j) <= p.theta_min + kRhoTol)
      p.lower.push_back(j);
    else
      p.middle.push_back(j);
  }
  p.normalized = std::abs(p.theta_max - p.theta_min - 1.0) > kRhoTol;
  return p;
}

Floors tightened_lower_bounds(const ThetaPartition& part, double theta, double tau) {
  if (theta < part.theta_min - kRhoTol || theta > part.theta_max + kRhoTol)
    throw InputError("theta " + std::to_string(theta) + " is outside [" + std::to_string(part.theta_min) + ", " +
                     std::to_string(part.theta_max) + "]");
  if (!(tau > 0.0 && tau < 1.0)) throw InputError("tau must lie in (0, 1)");
  const double width = part.theta_max - part.theta_min;
  const double a = std::clamp((part.theta_max - theta) / width, 0.0, 1.0);
  const double b = std::clamp((theta - part.theta_min) / width, 0.0, 1.0);
  const double n_low = static_cast<double>(part.lower.size() + part.middle.size());
  const double n_up = static_cast<double>(part.upper.size() + part.middle.size());

  Floors f{Vec::Zero(part.columns), false};
  for (int j : part.lower) f.values(j) = a * tau / n_low;
  for (int j : part.upper) f.values(j) = b * tau / n_up;
  if (!part.middle.empty()) {
    double c = 1.0 - a * part.lower.size() / n_low - b * part.upper.size() / n_up;
    if (c < 0.0) {
      c = 0.0;
      f.clamped = true;
    }
    for (int j : part.middle) f.values(j) = c * tau / part.middle.size();
  }
  return f;
}

double jn_theta(const ChoiceProbabilities& pi, const TypeMatrix& types, const Vec& rho, double theta,
                const Omega& omega, const Vec* floors) {
  check_rho(rho, types);
  if (theta < rho.minCoeff() - kRhoTol || theta > rho.maxCoeff() + kRhoTol)
    throw InputError("theta is outside the range of the indicator");
  const ClsSolver solver(types.matrix, omega.diagonal);
  const auto sol = solver.solve(pi.stacked, floors ? *floors : Vec(), simplex_with_theta(rho, theta));
  return sol.residual_norm_sq <= zero_threshold(omega) ? 0.0 : pi.total_n * sol.residual_norm_sq;
}

std::vector<double> ConfidenceInterval::accepted() const {
  std::vector<double> out;
  for (const auto& g : grid)
    if (g.accepted) out.push_back(g.theta);
  return out;
}

std::vector<double> theta_grid(const ThetaPartition& part, double step, const std::vector<double>& extra) {
  if (!(step > 0.0 && step <= 0.25)) throw InputError("grid step must lie in (0, 0.25]");
  std::vector<double> grid;
  const double width = part.theta_max - part.theta_min;
  const auto steps = static_cast<long long>(std::floor(width / step + 1e-9));
  for (long long k = 0; k <= steps; ++k) grid.push_back(part.theta_min + static_cast<double>(k) * step);
  grid.push_back(part.theta_max);
  for (double v : extra)
    if (v >= part.theta_min - kRhoTol && v <= part.theta_max + kRhoTol)
      grid.push_back(std::clamp(v, part.theta_min, part.theta_max));
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double v : grid)
    if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
  return out;
}

ConfidenceInterval confidence_interval(const ChoiceProbabilities& pi, const TypeMatrix& types, const Vec& rho,
                                       const Omega& omega, const IntervalConfig& config) {
  check_rho(rho, types);
  if (!(config.alpha > 0.0 && config.alpha <= 0.5)) throw InputError("alpha must lie in (0, 0.5]");
  if (config.replications < 1) throw InputError("replications must be at least 1");
  const auto part = theta_partition(rho);
  const double tau = config.tau ? *config.tau : default_tau(pi.total_n);
  const auto thetas = theta_grid(part, config.grid_step, config.extra_points);
  const int reps = config.replications;

  ConfidenceInterval ci;
  ci.alpha = config.alpha;
  ci.tau = tau;
  ci.replications = reps;
  ci.seed = config.seed;

  // One set of household resamples, reused at every theta.
  Mat draws(pi.stacked.size(), reps);
  parallel_for(config.execution, reps, [&](long long r) {
    draws.col(r) = resample_frequencies(pi, config.seed, kIntervalStream, static_cast<std::uint64_t>(r));
  });

  const ClsSolver solver(types.matrix, omega.diagonal);
  const double zero = zero_threshold(omega);
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - config.alpha) * reps - 1e-9));
  ci.grid.resize(thetas.size());
  for (std::size_t g = 0; g < thetas.size(); ++g) {
    auto& d = ci.grid[g];
    d.theta = thetas[g];
    const auto eqs = simplex_with_theta(rho, d.theta);
    const auto unrestricted = solver.solve(pi.stacked, Vec(), eqs);
    d.jn = unrestricted.residual_norm_sq <= zero ? 0.0 : pi.total_n * unrestricted.residual_norm_sq;

    const auto floors = tightened_lower_bounds(part, d.theta, tau);
    ci.clamped_floors = ci.clamped_floors || floors.clamped;
    std::optional<ClsResult> restricted;
    try {
      restricted = solver.solve(pi.stacked, floors.values, eqs);
    } catch (const InfeasibleConstraints&) {
      d.infeasible = true;
      continue;
    }
    const Vec shift = restricted->fitted - pi.stacked;
    ClsOptions warm;
    warm.initial = restricted->x;
    warm.warm_support = restricted->support;
    std::vector<double> stats(reps);
    parallel_for(config.execution, reps, [&](long long r) {
      const Vec target = draws.col(r) + shift;
      stats[r] = pi.total_n * solver.solve(target, floors.values, eqs, warm).residual_norm_sq;
    });
    std::sort(stats.begin(), stats.end());
    d.critical_value = stats[std::clamp<std::size_t>(rank, 1, stats.size()) - 1];
    d.accepted = d.jn <= d.critical_value;
  }
  const auto acc = ci.accepted();
  if (!acc.empty()) ci.hull = std::make_pair(acc.front(), acc.back());
  return ci;
}

}  // namespace revpref
