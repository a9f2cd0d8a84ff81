#include "revpref/patches.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revpref/solver.hpp"

namespace revpref {

int PatchLayout::total_rows() const {
  int n = 0;
  for (const auto& b : per_budget) n += static_cast<int>(b.size());
  return n;
}

int PatchLayout::offset(int t) const {
  int n = 0;
  for (int s = 0; s < t; ++s) n += count(s);
  return n;
}

std::vector<int> PatchLayout::others(int t) const {
  std::vector<int> out;
  for (int s = 0; s < budgets(); ++s)
    if (duplicate_of[s] != duplicate_of[t]) out.push_back(s);
  return out;
}

std::vector<std::vector<int>> PatchLayout::duplicate_classes() const {
  std::vector<std::vector<int>> classes;
  for (int t = 0; t < budgets(); ++t) {
    if (duplicate_of[t] == t)
      classes.push_back({t});
    else
      for (auto& c : classes)
        if (c.front() == duplicate_of[t]) c.push_back(t);
  }
  return classes;
}

OnBoundary::OnBoundary(int b, int o, double d)
    : InputError("choice on budget " + std::to_string(b) + " lies on the plane of budget " +
                 std::to_string(o) + " (distance " + std::to_string(d) + ")"),
      budget(b),
      other(o),
      distance(d) {}

namespace {

struct Region {
  int budget;
  const Mat& prices;
  const std::vector<int>& others;
};

// Largest s <= 1 with p^t x = 1, x >= 0 and margin s on the assigned signs.
// Returns s (or -inf when the LP fails) and the maximizer in x.
double max_slack(const Region& r, const std::vector<Side>& prefix, Vec& x) {
  const int l = static_cast<int>(r.prices.cols());
  auto lp = LinearProgram::with_variables(l + 1, ObjectiveSense::Maximize);
  lp.objective(l) = 1.0;
  lp.lower(l) = -kInf;
  lp.upper(l) = 1.0;
  Vec row = Vec::Zero(l + 1);
  row.head(l) = r.prices.row(r.budget).transpose();
  lp.add_row(row, RowSense::Equal, 1.0);
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    row.head(l) = r.prices.row(r.others[k]).transpose();
    if (prefix[k] == Side::Below) {
      row(l) = 1.0;
      lp.add_row(row, RowSense::LessEqual, 1.0);
    } else {
      row(l) = -1.0;
      lp.add_row(row, RowSense::GreaterEqual, 1.0);
    }
  }
  const auto sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) return -kInf;
  x = sol.x.head(l);
  return sol.x(l);
}

// Keeps margins of at least half the optimal slack and maximizes min_i x_i.
Vec centered_witness(const Region& r, const std::vector<Side>& signs, double slack, const Vec& fallback) {
  const int l = static_cast<int>(r.prices.cols());
  auto lp = LinearProgram::with_variables(l + 1, ObjectiveSense::Maximize);
  lp.objective(l) = 1.0;
  lp.lower(l) = -kInf;
  Vec row = Vec::Zero(l + 1);
  row.head(l) = r.prices.row(r.budget).transpose();
  lp.add_row(row, RowSense::Equal, 1.0);
  for (std::size_t k = 0; k < signs.size(); ++k) {
    row.head(l) = r.prices.row(r.others[k]).transpose();
    if (signs[k] == Side::Below)
      lp.add_row(row, RowSense::LessEqual, 1.0 - slack / 2);
    else
      lp.add_row(row, RowSense::GreaterEqual, 1.0 + slack / 2);
  }
  for (int i = 0; i < l; ++i) {
    row.setZero();
    row(i) = 1.0;
    row(l) = -1.0;
    lp.add_row(row, RowSense::GreaterEqual, 0.0);
  }
  const auto sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) return fallback;
  return sol.x.head(l).cwiseMax(0.0);
}

void search(const Region& r, std::vector<Side>& prefix, const Vec& x, double slack,
            std::vector<std::pair<std::vector<Side>, std::pair<Vec, double>>>& found) {
  if (prefix.size() == r.others.size()) {
    found.push_back({prefix, {x, slack}});
    return;
  }
  const Eigen::Index k = static_cast<Eigen::Index>(prefix.size());
  const double v = r.prices.row(r.others[k]).dot(x) - 1.0;
  for (Side side : {Side::Below, Side::Above}) {
    prefix.push_back(side);
    const double own = side == Side::Below ? -v : v;
    // The parent's maximizer already certifies this child when it is on the
    // right side of the new plane by more than the threshold.
    if (own > kSlackThreshold) {
      search(r, prefix, x, std::min(slack, own), found);
    } else {
      Vec y;
      const double s = max_slack(r, prefix, y);
      if (s > kSlackThreshold) search(r, prefix, y, s, found);
    }
    prefix.pop_back();
  }
}

std::vector<Patch> budget_patches(const Mat& prices, const std::vector<int>& duplicate_of, int t) {
  std::vector<int> others;
  for (int s = 0; s < prices.rows(); ++s)
    if (duplicate_of[s] != duplicate_of[t]) others.push_back(s);
  const Region region{t, prices, others};
  std::vector<Side> prefix;
  Vec x;
  const double s = max_slack(region, prefix, x);
  if (!(s > kSlackThreshold)) throw SolverError("budget plane " + std::to_string(t) + " has no interior");
  std::vector<std::pair<std::vector<Side>, std::pair<Vec, double>>> found;
  search(region, prefix, x, s, found);

  std::vector<Patch> patches;
  for (auto& [signs, cert] : found) {
    // Re-solve for the true slack of this sign vector before centering.
    Vec y;
    double slack = max_slack(region, signs, y);
    if (!(slack > kSlackThreshold)) {
      y = cert.first;
      slack = cert.second;
    }
    Patch p;
    p.budget = t;
    p.signs.assign(prices.rows(), Side::None);
    for (std::size_t k = 0; k < others.size(); ++k) p.signs[others[k]] = signs[k];
    p.witness = centered_witness(region, signs, slack, y);
    p.margin = kInf;
    for (std::size_t k = 0; k < others.size(); ++k) {
      const double v = prices.row(others[k]).dot(p.witness) - 1.0;
      p.margin = std::min(p.margin, signs[k] == Side::Below ? -v : v);
    }
    if (others.empty()) p.margin = 1.0;
    patches.push_back(std::move(p));
  }
  return patches;
}

}  // namespace

PatchLayout enumerate_patches(const Mat& prices, Execution ex) {
  const int n = static_cast<int>(prices.rows());
  if (n < 1 || prices.cols() < 1) throw InputError("need at least one budget and one good");
  if (n > 63) throw InputError("at most 63 budgets are supported");
  if (!prices.allFinite() || prices.minCoeff() <= 0.0) throw InputError("prices must be finite and positive");
  PatchLayout layout;
  layout.prices = prices;
  layout.duplicate_of.resize(n);
  for (int t = 0; t < n; ++t) {
    layout.duplicate_of[t] = t;
    for (int s = 0; s < t; ++s)
      if ((prices.row(s) - prices.row(t)).cwiseAbs().maxCoeff() <= kDuplicateTol) {
        layout.duplicate_of[t] = layout.duplicate_of[s];
        break;
      }
  }
  layout.per_budget.resize(n);
  parallel_for(ex, n, [&](long long t) {
    layout.per_budget[t] = budget_patches(prices, layout.duplicate_of, static_cast<int>(t));
  });
  return layout;
}

std::vector<Side> sign_vector(const PatchLayout& layout, int t, const Vec& bundle) {
  if (t < 0 || t >= layout.budgets()) throw InputError("budget index out of range");
  if (bundle.size() != layout.prices.cols()) throw InputError("bundle has the wrong number of goods");
  const double e = layout.prices.row(t).dot(bundle);
  if (!(e > 0.0)) throw InputError("bundle has zero expenditure at budget " + std::to_string(t));
  const Vec x = bundle / e;
  std::vector<Side> signs(layout.budgets(), Side::None);
  for (int s : layout.others(t)) {
    const double v = layout.prices.row(s).dot(x) - 1.0;
    if (std::abs(v) <= kBoundaryTol) throw OnBoundary(t, s, std::abs(v));
    signs[s] = v < 0.0 ? Side::Below : Side::Above;
  }
  return signs;
}

int assign_patch(const Vec& bundle, int t, const PatchLayout& layout) {
  const auto signs = sign_vector(layout, t, bundle);
  const auto& patches = layout.per_budget[t];
  const auto it = std::lower_bound(patches.begin(), patches.end(), signs,
                                   [](const Patch& p, const std::vector<Side>& s) { return p.signs < s; });
  if (it == patches.end() || it->signs != signs)
    throw SolverError("no patch of budget " + std::to_string(t) + " matches the sign vector of the choice");
  return static_cast<int>(it - patches.begin());
}

std::uint64_t layout_fingerprint(const PatchLayout& layout) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const Eigen::Index rows = layout.prices.rows(), cols = layout.prices.cols();
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  mix(layout.prices.data(), sizeof(double) * static_cast<std::size_t>(layout.prices.size()));
  for (const auto& budget : layout.per_budget)
    for (const auto& p : budget) mix(p.signs.data(), p.signs.size());
  return h;
}

bool same_layout(const PatchLayout& a, const PatchLayout& b) {
  if (a.budgets() != b.budgets() || a.prices != b.prices) return false;
  for (int t = 0; t < a.budgets(); ++t) {
    if (a.count(t) != b.count(t)) return false;
    for (int i = 0; i < a.count(t); ++i)
      if (a.per_budget[t][i].signs != b.per_budget[t][i].signs) return false;
  }
  return true;
}

}  // namespace revpref
