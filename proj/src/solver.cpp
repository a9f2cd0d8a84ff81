#include "revpref/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace revpref {

LinearProgram LinearProgram::with_variables(int n, ObjectiveSense sense) {
  LinearProgram lp;
  lp.sense = sense;
  lp.objective = Vec::Zero(n);
  lp.rows = Mat(0, n);
  lp.rhs = Vec(0);
  lp.lower = Vec::Zero(n);
  lp.upper = Vec::Constant(n, kInf);
  return lp;
}

void LinearProgram::add_row(const Vec& coefficients, RowSense row_sense, double value) {
  if (coefficients.size() != variables()) throw InputError("LP row has wrong length");
  const auto m = rows.rows();
  rows.conservativeResize(m + 1, Eigen::NoChange);
  rows.row(m) = coefficients.transpose();
  rhs.conservativeResize(m + 1);
  rhs(m) = value;
  senses.push_back(row_sense);
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// min c's  s.t.  A s = b, s >= 0, b >= 0, plus the map back to the caller's x.
struct StandardForm {
  Mat a;
  Vec b;
  Vec c;
  double c_offset = 0.0;
  std::vector<double> row_flip;  // +1 / -1 applied to each row
  int original_rows = 0;
  // x_j = offset_j + sum over terms (column, coefficient)
  std::vector<double> offset;
  std::vector<std::vector<std::pair<int, double>>> terms;
  std::vector<int> slack_of_row;  // column of a +1 slack, or -1
};

StandardForm standardize(const LinearProgram& lp) {
  const int n = lp.variables();
  const int m = lp.constraints();
  StandardForm sf;
  sf.original_rows = m;
  sf.offset.assign(n, 0.0);
  sf.terms.resize(n);

  const double sign = lp.sense == ObjectiveSense::Minimize ? 1.0 : -1.0;
  int cols = 0;
  std::vector<std::pair<int, double>> upper_rows;  // (column, u - l)
  for (int j = 0; j < n; ++j) {
    const double l = lp.lower(j), u = lp.upper(j);
    if (l > u) throw InputError("LP variable " + std::to_string(j) + " has lower > upper");
    if (std::isfinite(l)) {
      sf.offset[j] = l;
      sf.terms[j].push_back({cols, 1.0});
      if (std::isfinite(u)) upper_rows.push_back({cols, u - l});
      ++cols;
    } else if (std::isfinite(u)) {
      sf.offset[j] = u;
      sf.terms[j].push_back({cols++, -1.0});
    } else {
      sf.terms[j].push_back({cols++, 1.0});
      sf.terms[j].push_back({cols++, -1.0});
    }
  }
  const int structural = cols;
  const int total_rows = m + static_cast<int>(upper_rows.size());
  int slacks = 0;
  for (auto s : lp.senses) slacks += s != RowSense::Equal;
  slacks += static_cast<int>(upper_rows.size());

  sf.a = Mat::Zero(total_rows, structural + slacks);
  sf.b = Vec::Zero(total_rows);
  sf.c = Vec::Zero(structural + slacks);
  sf.slack_of_row.assign(total_rows, -1);
  sf.row_flip.assign(total_rows, 1.0);

  for (int j = 0; j < n; ++j) {
    sf.c_offset += sign * lp.objective(j) * sf.offset[j];
    for (auto [col, coef] : sf.terms[j]) sf.c(col) += sign * lp.objective(j) * coef;
  }

  int slack = structural;
  std::vector<double> slack_sign(total_rows, 0.0);
  for (int i = 0; i < m; ++i) {
    double value = lp.rhs(i);
    for (int j = 0; j < n; ++j) {
      const double aij = lp.rows(i, j);
      if (aij == 0.0) continue;
      value -= aij * sf.offset[j];
      for (auto [col, coef] : sf.terms[j]) sf.a(i, col) += aij * coef;
    }
    sf.b(i) = value;
    if (lp.senses[i] == RowSense::LessEqual) {
      sf.a(i, slack) = 1.0;
      slack_sign[i] = 1.0;
      sf.slack_of_row[i] = slack++;
    } else if (lp.senses[i] == RowSense::GreaterEqual) {
      sf.a(i, slack) = -1.0;
      slack_sign[i] = -1.0;
      sf.slack_of_row[i] = slack++;
    }
  }
  for (std::size_t k = 0; k < upper_rows.size(); ++k) {
    const int i = m + static_cast<int>(k);
    sf.a(i, upper_rows[k].first) = 1.0;
    sf.a(i, slack) = 1.0;
    slack_sign[i] = 1.0;
    sf.slack_of_row[i] = slack++;
    sf.b(i) = upper_rows[k].second;
  }
  for (int i = 0; i < total_rows; ++i) {
    if (sf.b(i) < 0.0) {
      sf.a.row(i) *= -1.0;
      sf.b(i) *= -1.0;
      sf.row_flip[i] = -1.0;
      slack_sign[i] *= -1.0;
    }
    if (slack_sign[i] <= 0.0) sf.slack_of_row[i] = -1;
  }
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, int cap) : cap_(cap) {
    const int m = static_cast<int>(sf.b.size());
    const int n = static_cast<int>(sf.c.size());
    int artificials = 0;
    for (int i = 0; i < m; ++i) artificials += sf.slack_of_row[i] < 0;
    first_artificial_ = n;
    cols_ = n + artificials;
    t_ = RowMat::Zero(m + 1, cols_ + 1);
    t_.topLeftCorner(m, n) = sf.a;
    t_.col(cols_).head(m) = sf.b;
    basis_.resize(m);
    rows_.resize(m);
    int art = n;
    for (int i = 0; i < m; ++i) {
      rows_[i] = i;
      if (sf.slack_of_row[i] >= 0) {
        basis_[i] = sf.slack_of_row[i];
      } else {
        t_(i, art) = 1.0;
        basis_[i] = art++;
      }
    }
  }

  int rows() const { return static_cast<int>(basis_.size()); }
  int first_artificial() const { return first_artificial_; }
  const std::vector<int>& basis() const { return basis_; }
  const std::vector<int>& kept_rows() const { return rows_; }
  int iterations() const { return iterations_; }
  double objective_row_rhs() const { return t_(rows(), cols_); }

  void set_phase_one() {
    const int m = rows();
    t_.row(m).setZero();
    for (int i = 0; i < m; ++i)
      if (basis_[i] >= first_artificial_) t_.row(m) -= t_.row(i);
    for (int i = 0; i < m; ++i)
      if (basis_[i] >= first_artificial_) t_(m, basis_[i]) = 0.0;
  }

  void set_phase_two(const Vec& c) {
    const int m = rows();
    t_.row(m).setZero();
    t_.row(m).head(c.size()) = c.transpose();
    for (int i = 0; i < m; ++i) {
      const double cb = basis_[i] < c.size() ? c(basis_[i]) : 0.0;
      if (cb != 0.0) t_.row(m) -= cb * t_.row(i);
    }
    allow_artificials_ = false;
  }

  // Returns false if unbounded.
  bool optimize() {
    const int m = rows();
    bool bland = false;
    for (;;) {
      const int limit = allow_artificials_ ? cols_ : first_artificial_;
      int enter = -1;
      double best = -kCostTol;
      for (int j = 0; j < limit; ++j) {
        const double d = t_(m, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double ratio = kInf;
      for (int i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double r = t_(i, cols_) / a;
        if (r < ratio - 1e-12 || (r <= ratio + 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
          if (r < ratio - 1e-12) ratio = r;
          leave = i;
        }
      }
      if (leave < 0) return false;
      bland = ratio <= 1e-12;
      pivot(leave, enter);
    }
  }

  // Moves zero-valued artificials out of the basis, dropping redundant rows.
  void expel_artificials() {
    for (int i = 0; i < rows();) {
      if (basis_[i] < first_artificial_) {
        ++i;
        continue;
      }
      int col = -1;
      double best = kPivotTol;
      for (int j = 0; j < first_artificial_; ++j)
        if (std::abs(t_(i, j)) > best) {
          best = std::abs(t_(i, j));
          col = j;
        }
      if (col >= 0) {
        pivot(i, col);
        ++i;
        continue;
      }
      RowMat shrunk(t_.rows() - 1, t_.cols());
      shrunk.topRows(i) = t_.topRows(i);
      shrunk.bottomRows(t_.rows() - 1 - i) = t_.bottomRows(t_.rows() - 1 - i);
      t_ = std::move(shrunk);
      basis_.erase(basis_.begin() + i);
      rows_.erase(rows_.begin() + i);
    }
  }

 private:
  void pivot(int r, int c) {
    if (++iterations_ > cap_)
      throw SolverError("simplex iteration cap " + std::to_string(cap_) + " exceeded (rows " +
                        std::to_string(rows()) + ", columns " + std::to_string(cols_) + ")");
    t_.row(r) /= t_(r, c);
    t_(r, c) = 1.0;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f == 0.0) continue;
      t_.row(i) -= f * t_.row(r);
      t_(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  RowMat t_;
  std::vector<int> basis_;
  std::vector<int> rows_;
  int cols_ = 0;
  int first_artificial_ = 0;
  int iterations_ = 0;
  int cap_ = 0;
  bool allow_artificials_ = true;
};

}  // namespace

LpResult lp_solve(const LinearProgram& problem) {
  const int n = problem.variables();
  const int m = problem.constraints();
  if (problem.lower.size() != n || problem.upper.size() != n || problem.rhs.size() != m ||
      static_cast<int>(problem.senses.size()) != m || (m > 0 && problem.rows.cols() != n))
    throw InputError("inconsistent LP dimensions");

  const StandardForm sf = standardize(problem);
  const int std_rows = static_cast<int>(sf.b.size());
  const int std_cols = static_cast<int>(sf.c.size());
  Tableau tab(sf, 50 * (std_rows + std_cols + 1));

  LpResult result;
  tab.set_phase_one();
  tab.optimize();
  const double infeasibility = -tab.objective_row_rhs();
  if (infeasibility > 1e-9 * (1.0 + sf.b.lpNorm<Eigen::Infinity>())) {
    result.status = LpStatus::Infeasible;
    result.iterations = tab.iterations();
    return result;
  }
  tab.expel_artificials();
  tab.set_phase_two(sf.c);
  if (!tab.optimize()) {
    result.status = LpStatus::Unbounded;
    result.iterations = tab.iterations();
    return result;
  }

  // Recover the vertex from the final basis with a fresh factorization.
  const auto& basis = tab.basis();
  const auto& kept = tab.kept_rows();
  const int k = static_cast<int>(basis.size());
  Mat bmat(k, k);
  Vec rhs(k), cb(k);
  for (int i = 0; i < k; ++i) {
    rhs(i) = sf.b(kept[i]);
    for (int j = 0; j < k; ++j) bmat(i, j) = sf.a(kept[i], basis[j]);
  }
  for (int j = 0; j < k; ++j) cb(j) = sf.c(basis[j]);
  Eigen::FullPivLU<Mat> lu(bmat);
  Vec xb = lu.solve(rhs);
  Vec y = lu.transpose().solve(cb);
  Vec s = Vec::Zero(std_cols);
  for (int j = 0; j < k; ++j) s(basis[j]) = std::max(0.0, xb(j));

  const double sign = problem.sense == ObjectiveSense::Minimize ? 1.0 : -1.0;
  result.status = LpStatus::Optimal;
  result.iterations = tab.iterations();
  result.x.resize(n);
  for (int j = 0; j < n; ++j) {
    double v = sf.offset[j];
    for (auto [col, coef] : sf.terms[j]) v += coef * s(col);
    result.x(j) = v;
  }
  result.objective = problem.objective.dot(result.x);
  Vec full_y = Vec::Zero(std_rows);
  for (int i = 0; i < k; ++i) full_y(kept[i]) = y(i);
  result.dual.resize(m);
  for (int i = 0; i < m; ++i) result.dual(i) = sign * sf.row_flip[i] * full_y(i);
  result.dual_objective = sign * (sf.b.dot(full_y) + sf.c_offset);
  return result;
}

SpMat to_sparse(const Mat& dense) { return dense.sparseView(); }

namespace {

struct ClsWork {
  int rows = 0, cols = 0, eqs = 0;
  const SpMat& aw;  // sqrt(weights) * design
  Vec b;            // sqrt(weights) * (target - design lb)
  Mat e;            // equalities in shifted variables
  Vec f;

  explicit ClsWork(const SpMat& weighted) : aw(weighted) {}

  Mat columns(const std::vector<int>& p) const {
    Mat out = Mat::Zero(rows, static_cast<Eigen::Index>(p.size()));
    for (std::size_t k = 0; k < p.size(); ++k)
      for (SpMat::InnerIterator it(aw, p[k]); it; ++it) out(it.row(), k) = it.value();
    return out;
  }

  // argmin over z supported on p of |b - A z|^2 subject to E z = f; returns z restricted to p.
  Vec solve(const std::vector<int>& p) const {
    const auto np = static_cast<Eigen::Index>(p.size());
    if (np == 0) return Vec();
    const Mat ap = columns(p);
    Vec zp;
    if (eqs == 0) {
      zp = ap.completeOrthogonalDecomposition().solve(b);
    } else {
      Mat ep(eqs, np);
      for (Eigen::Index k = 0; k < np; ++k) ep.col(k) = e.col(p[k]);
      const Vec z0 = ep.completeOrthogonalDecomposition().solve(f);
      Eigen::ColPivHouseholderQR<Mat> qr(ep.transpose());
      const auto rank = qr.rank();
      if (rank >= np) {
        zp = z0;
      } else {
        const Mat q = qr.householderQ();
        const Mat null_basis = q.rightCols(np - rank);
        const Vec y = (ap * null_basis).completeOrthogonalDecomposition().solve(b - ap * z0);
        zp = z0 + null_basis * y;
      }
    }
    return zp;
  }

  // Gradient of |b - A w|^2 for w supported on p.
  Vec gradient(const Vec& w, const std::vector<int>& p) const {
    Vec r = -b;
    for (int j : p)
      for (SpMat::InnerIterator it(aw, j); it; ++it) r(it.row()) += it.value() * w(j);
    return 2.0 * (aw.transpose() * r);
  }

  // Reduced gradient g + E'mu with mu fitted on the free set.
  Vec reduced(const Vec& g, const std::vector<int>& free) const {
    if (eqs == 0 || free.empty()) return g;
    Mat ept(static_cast<Eigen::Index>(free.size()), eqs);
    Vec gp(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) {
      ept.row(k) = e.col(free[k]).transpose();
      gp(k) = g(free[k]);
    }
    const Vec mu = ept.completeOrthogonalDecomposition().solve(-gp);
    return g + e.transpose() * mu;
  }
};

}  // namespace

Vec cls_feasible_point(const ConstrainedLeastSquares& problem) {
  const auto h = problem.design.cols();
  const Vec lb = problem.lower_bounds.size() ? problem.lower_bounds : Vec::Zero(h);
  if (problem.equalities.empty()) return lb;
  auto lp = LinearProgram::with_variables(static_cast<int>(h));
  lp.lower = lb;
  for (const auto& eq : problem.equalities) lp.add_row(eq.coefficients, RowSense::Equal, eq.rhs);
  const auto sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal)
    throw InfeasibleConstraints("constraint set is empty: lower bounds and equalities are incompatible");
  return sol.x.cwiseMax(lb);
}

ClsSolver::ClsSolver(const SpMat& design, const Vec& weights) : design_(design) {
  const Vec w = weights.size() ? weights : Vec::Ones(design.rows());
  if (w.size() != design.rows() || !(w.minCoeff() > 0.0))
    throw InputError("least squares weights must be positive, one per row");
  sqrt_weights_ = w.cwiseSqrt();
  weighted_ = sqrt_weights_.asDiagonal() * design;
  weighted_.makeCompressed();
  for (Eigen::Index j = 0; j < weighted_.cols(); ++j)
    column_scale_ = std::max(column_scale_, weighted_.col(j).norm());
}

ClsResult cls_solve(const ConstrainedLeastSquares& problem, const ClsOptions& options) {
  const ClsSolver solver(problem.design, problem.weights);
  return solver.solve(problem.target, problem.lower_bounds, problem.equalities, options);
}

ClsResult ClsSolver::solve(const Vec& target, const Vec& lower_bounds,
                           const std::vector<LinearEquality>& equalities, const ClsOptions& options) const {
  ClsWork w(weighted_);
  w.rows = rows();
  w.cols = columns();
  w.eqs = static_cast<int>(equalities.size());
  if (target.size() != w.rows) throw InputError("least squares target has wrong length");
  const Vec lb = lower_bounds.size() ? lower_bounds : Vec::Zero(w.cols);
  if (lb.size() != w.cols) throw InputError("lower bounds have wrong length");

  w.b = sqrt_weights_.cwiseProduct(target - design_ * lb);
  w.e.resize(w.eqs, w.cols);
  w.f.resize(w.eqs);
  for (int k = 0; k < w.eqs; ++k) {
    const auto& eq = equalities[k];
    if (eq.coefficients.size() != w.cols) throw InputError("equality has wrong length");
    w.e.row(k) = eq.coefficients.transpose();
    w.f(k) = eq.rhs - eq.coefficients.dot(lb);
  }
  const double feas_tol = 1e-8 * (1.0 + (w.eqs ? w.f.lpNorm<Eigen::Infinity>() : 0.0));

  Vec x;
  if (options.initial) {
    x = *options.initial - lb;
    if (x.size() != w.cols || x.minCoeff() < -1e-9 ||
        (w.eqs && (w.e * x - w.f).lpNorm<Eigen::Infinity>() > feas_tol))
      throw InputError("supplied starting point is infeasible");
    x = x.cwiseMax(0.0);
  } else {
    ConstrainedLeastSquares shape;
    shape.design.resize(0, w.cols);
    shape.lower_bounds = lb;
    shape.equalities = equalities;
    x = cls_feasible_point(shape) - lb;
  }

  const double scale = std::max(1.0, 2.0 * column_scale_ * (1.0 + w.b.lpNorm<Eigen::Infinity>()));
  const double grad_tol = 1e-11 * scale;
  const double neg_tol = 1e-14;

  std::vector<char> in_free(w.cols, 0);
  for (int j = 0; j < w.cols; ++j) in_free[j] = x(j) > 0.0;
  for (int j : options.warm_support)
    if (j >= 0 && j < w.cols) in_free[j] = 1;
  auto free_list = [&] {
    std::vector<int> p;
    for (int j = 0; j < w.cols; ++j)
      if (in_free[j]) p.push_back(j);
    return p;
  };

  const int cap = options.max_iterations > 0 ? options.max_iterations : 100 * (w.rows + w.eqs + 1);
  int iterations = 0;
  std::vector<char> blocked(w.cols, 0);
  int entered = -1;
  auto bump = [&] {
    if (++iterations > cap)
      throw SolverError("least squares iteration cap " + std::to_string(cap) + " exceeded");
  };

  for (;;) {
    // Inner loop: move towards the free-set optimum without leaving x >= 0.
    for (;;) {
      bump();
      const auto p = free_list();
      const Vec z = w.solve(p);
      const auto np = p.size();
      double alpha = 1.0;
      int limiting = -1;
      for (std::size_t k = 0; k < np; ++k) {
        const int j = p[k];
        if (z(k) >= -neg_tol) continue;
        const double a = x(j) / (x(j) - z(k));
        if (a < alpha) {
          alpha = a;
          limiting = j;
        }
      }
      if (limiting < 0) {
        for (std::size_t k = 0; k < np; ++k) x(p[k]) = std::max(0.0, z(k));
        if (entered >= 0 && x(entered) > 0.0) std::fill(blocked.begin(), blocked.end(), 0);
        break;
      }
      for (std::size_t k = 0; k < np; ++k) x(p[k]) += alpha * (z(k) - x(p[k]));
      x(limiting) = 0.0;
      double x_max = 0.0;
      for (int j : p) x_max = std::max(x_max, x(j));
      for (int j : p) {
        if (x(j) <= neg_tol * (1.0 + x_max)) {
          x(j) = 0.0;
          in_free[j] = 0;
        }
      }
      if (entered >= 0 && !in_free[entered] && alpha <= 1e-15) blocked[entered] = 1;
      entered = -1;
    }

    const auto p = free_list();
    const Vec g = w.gradient(x, p);
    const Vec d = w.reduced(g, p);
    int enter = -1;
    double best = -grad_tol;
    for (int j = 0; j < w.cols; ++j) {
      if (in_free[j] || blocked[j]) continue;
      if (d(j) < best) {
        best = d(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    in_free[enter] = 1;
    entered = enter;
  }

  ClsResult out;
  out.x = x + lb;
  out.fitted = design_ * out.x;
  out.residual_norm_sq = (w.aw * x - w.b).squaredNorm();
  out.iterations = iterations;
  for (int j = 0; j < w.cols; ++j)
    if (x(j) > 0.0) out.support.push_back(j);

  const Vec g = w.gradient(x, out.support);
  const Vec d = w.reduced(g, out.support);
  for (int j = 0; j < w.cols; ++j) {
    if (x(j) > 0.0)
      out.kkt.stationarity = std::max(out.kkt.stationarity, std::abs(d(j)));
    else
      out.kkt.dual_feasibility = std::max(out.kkt.dual_feasibility, -d(j));
    out.kkt.complementarity = std::max(out.kkt.complementarity, std::abs(x(j) * d(j)));
  }
  if (w.eqs) out.kkt.primal_feasibility = (w.e * x - w.f).lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace revpref
