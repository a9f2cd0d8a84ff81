#include "revpref/afriat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revpref/solver.hpp"

namespace revpref {

namespace {

std::string cycle_text(const CycleWitness& w) {
  std::string s;
  for (int t : w.sequence) s += std::to_string(t) + " -> ";
  return s + std::to_string(w.sequence.front());
}

constexpr double kUtilityTol = 1e-9;

}  // namespace

GarpViolation::GarpViolation(CycleWitness w)
    : ModelError("data violate GARP: cycle " + cycle_text(w)), witness(std::move(w)) {}

GappViolation::GappViolation(CycleWitness w)
    : ModelError("data violate GAPP: cycle " + cycle_text(w)), witness(std::move(w)) {}

std::optional<AfriatSolution> try_solve_afriat(const DeterministicDataset& data,
                                               const std::vector<UtilityOrder>& orders) {
  const int n = data.size();
  const Mat cross = data.cross_expenditure();
  // Variables: phi (n, free except phi^0 = 0), lambda (n, >= 1).
  auto lp = LinearProgram::with_variables(2 * n);
  for (int t = 0; t < n; ++t) {
    lp.lower(t) = -kInf;
    lp.lower(n + t) = 1.0;
    lp.objective(n + t) = 1.0;
  }
  lp.lower(0) = lp.upper(0) = 0.0;
  for (int t = 0; t < n; ++t)
    for (int s = 0; s < n; ++s) {
      if (s == t) continue;
      Vec row = Vec::Zero(2 * n);
      row(s) += 1.0;
      row(t) -= 1.0;
      row(n + t) = -(cross(t, s) - cross(t, t));
      lp.add_row(row, RowSense::LessEqual, 0.0);
    }
  for (const auto& o : orders) {
    if (o.better < 0 || o.better >= n || o.worse < 0 || o.worse >= n)
      throw InputError("order constraint index out of range");
    Vec row = Vec::Zero(2 * n);
    row(o.better) += 1.0;
    row(o.worse) -= 1.0;
    lp.add_row(row, RowSense::GreaterEqual, o.strict ? 1.0 : 0.0);
  }
  const auto sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  return AfriatSolution{sol.x.head(n), sol.x.tail(n)};
}

AfriatSolution solve_afriat(const DeterministicDataset& data) {
  const auto garp = check_garp(data);
  if (!garp.passes) throw GarpViolation(*garp.witness);
  auto sol = try_solve_afriat(data);
  if (!sol) throw SolverError("Afriat LP infeasible on data that pass GARP");
  return *sol;
}

double afriat_residual(const AfriatSolution& sol, const DeterministicDataset& data) {
  const Mat cross = data.cross_expenditure();
  double worst = -kInf;
  for (int t = 0; t < data.size(); ++t)
    for (int s = 0; s < data.size(); ++s) {
      if (s == t) continue;
      worst = std::max(worst, sol.phi(s) - sol.phi(t) - sol.lambda(t) * (cross(t, s) - cross(t, t)));
    }
  return data.size() > 1 ? worst : 0.0;
}

double evaluate_utility(const AfriatSolution& sol, const DeterministicDataset& data, const Vec& x) {
  if (x.size() != data.goods())
    throw InputError("bundle has " + std::to_string(x.size()) + " goods, expected " +
                     std::to_string(data.goods()));
  double u = kInf;
  for (int t = 0; t < data.size(); ++t)
    u = std::min(u, sol.phi(t) + sol.lambda(t) * data.prices().row(t).dot(x - data.bundle(t)));
  return u;
}

DeterministicDataset augment_dataset(const DeterministicDataset& data, double budget_constant) {
  const int n = data.size(), l = data.goods();
  Mat prices(n, l + 1), bundles(n, l + 1);
  prices.leftCols(l) = data.prices();
  prices.col(l).setOnes();
  bundles.leftCols(l) = data.bundles();
  for (int t = 0; t < n; ++t) bundles(t, l) = budget_constant - data.expenditure(t);
  return DeterministicDataset(std::move(prices), std::move(bundles), data.labels());
}

double AugmentedUtility::evaluate(const Vec& x, double expenditure) const {
  // Envelope at (x, M - e): phi^t + lambda^t (p^t x - e) after the M terms cancel.
  double u = kInf;
  for (Eigen::Index t = 0; t < source_prices.rows(); ++t)
    u = std::min(u, base.phi(t) + base.lambda(t) * (source_prices.row(t).dot(x) - expenditure));
  const double excess = std::max(0.0, expenditure - budget_constant);
  return u - std::pow(excess, penalty_exponent);
}

double AugmentedUtility::at_prices(const Vec& x, int t) const {
  return evaluate(x, source_prices.row(t).dot(x));
}

AugmentedUtility build_augmented_utility(const DeterministicDataset& data) {
  const auto gapp = check_gapp(data);
  if (!gapp.passes) throw GappViolation(*gapp.witness);
  double max_exp = 0.0;
  for (int t = 0; t < data.size(); ++t) max_exp = std::max(max_exp, data.expenditure(t));
  AugmentedUtility u;
  u.budget_constant = 2.0 * max_exp;
  u.source_prices = data.prices();
  u.source_bundles = data.bundles();
  const auto aug = augment_dataset(data, u.budget_constant);
  const auto garp = check_garp(aug);
  if (!garp.passes) throw SolverError("augmented data fail GARP although the data pass GAPP");
  auto sol = try_solve_afriat(aug);
  if (!sol) throw SolverError("Afriat LP infeasible on augmented data");
  u.base = std::move(*sol);
  return u;
}

RationalizationAudit verify_rationalization(const AugmentedUtility& u, const DeterministicDataset& data,
                                            double grid_radius, int grid_points) {
  RationalizationAudit audit;
  const int n = data.size(), l = data.goods();
  Vec chosen(n);
  for (int t = 0; t < n; ++t) chosen(t) = u.at_prices(data.bundle(t), t);
  auto tol = [&](int t) { return kUtilityTol * (1.0 + std::abs(chosen(t))); };

  for (int t = 0; t < n && audit.at_observed_bundles; ++t)
    for (int s = 0; s < n; ++s)
      if (u.at_prices(data.bundle(s), t) > chosen(t) + tol(t)) {
        audit.at_observed_bundles = false;
        audit.offending_point = data.bundle(s);
        audit.offending_period = t;
        break;
      }

  if (grid_points < 1) return audit;
  const double step = grid_points > 1 ? grid_radius / (grid_points - 1) : 0.0;
  long long total = 1;
  for (int i = 0; i < l; ++i) total *= grid_points;
  // U(g, -p^t g) = min_s phi^s + lambda^s (q_s - q_t) - h(q_t - M) with q = P g.
  const Mat& prices = u.source_prices;
  Vec g(l), q(n);
  for (long long k = 0; k < total && audit.on_grid; ++k) {
    long long rest = k;
    for (int i = 0; i < l; ++i) {
      g(i) = step * static_cast<double>(rest % grid_points);
      rest /= grid_points;
    }
    q.noalias() = prices * g;
    for (int t = 0; t < n; ++t) {
      double v = kInf;
      for (int s = 0; s < n; ++s) v = std::min(v, u.base.phi(s) + u.base.lambda(s) * (q(s) - q(t)));
      v -= std::pow(std::max(0.0, q(t) - u.budget_constant), u.penalty_exponent);
      if (v > chosen(t) + tol(t)) {
        audit.on_grid = false;
        if (audit.at_observed_bundles) {
          audit.offending_point = g;
          audit.offending_period = t;
        }
        break;
      }
    }
  }
  return audit;
}

const char* to_string(PriceRanking r) {
  switch (r) {
    case PriceRanking::StrictlyPreferred: return "strictly_preferred";
    case PriceRanking::WeaklyPreferred: return "weakly_preferred";
    case PriceRanking::Unranked: return "unranked";
  }
  return "unranked";
}

PriceRanking price_preference_query(const DeterministicDataset& data, int t, int s) {
  if (t < 0 || s < 0 || t >= data.size() || s >= data.size())
    throw InputError("observation index out of range");
  const auto direct = direct_price_relations(data);
  const auto gapp = check_acyclic(direct);
  if (!gapp.passes) throw GappViolation(*gapp.witness);
  const auto closure = transitive_closure(direct);
  if (closure.strict(t, s)) return PriceRanking::StrictlyPreferred;
  if (closure.weak(t, s)) return PriceRanking::WeaklyPreferred;
  return PriceRanking::Unranked;
}

}  // namespace revpref
