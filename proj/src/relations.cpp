#include "revpref/relations.hpp"

#include <cmath>
#include <string>

namespace revpref {

namespace {

RelationPair empty_pair(int n) {
  RelationPair r{BoolMatrix::Constant(n, n, false), BoolMatrix::Constant(n, n, false)};
  for (int i = 0; i < n; ++i) r.weak(i, i) = true;
  return r;
}

// Weak closure with first-hop pointers for path recovery.
struct WeakClosure {
  BoolMatrix reach;
  Eigen::MatrixXi next;
};

WeakClosure close_weak(const BoolMatrix& weak) {
  const auto n = weak.rows();
  WeakClosure c{weak, Eigen::MatrixXi::Constant(n, n, -1)};
  for (Eigen::Index i = 0; i < n; ++i) {
    c.reach(i, i) = true;
    for (Eigen::Index j = 0; j < n; ++j)
      if (weak(i, j)) c.next(i, j) = static_cast<int>(j);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!c.reach(i, k)) continue;
      for (Eigen::Index j = 0; j < n; ++j)
        if (c.reach(k, j) && !c.reach(i, j)) {
          c.reach(i, j) = true;
          c.next(i, j) = c.next(i, k);
        }
    }
  return c;
}

}  // namespace

RelationPair direct_bundle_relations(const DeterministicDataset& data) {
  const int n = data.size();
  const Mat cross = data.cross_expenditure();
  auto r = empty_pair(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const double gap = cross(a, a) - cross(a, b);
      r.weak(a, b) = gap >= -kRelationTol;
      r.strict(a, b) = gap > kRelationTol;
    }
  return r;
}

RelationPair direct_price_relations(const CostMatrix& costs) {
  const int n = costs.size();
  const Mat& c = costs.costs();
  auto r = empty_pair(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const double gap = c(b, b) - c(a, b);
      r.weak(a, b) = gap >= -kRelationTol;
      r.strict(a, b) = gap > kRelationTol;
    }
  return r;
}

RelationPair direct_price_relations(const DeterministicDataset& data) {
  return direct_price_relations(CostMatrix::from_linear(data));
}

RelationPair transitive_closure(const RelationPair& direct) {
  const auto n = direct.weak.rows();
  RelationPair out{close_weak(direct.weak).reach, BoolMatrix::Constant(n, n, false)};
  // strict* = weak* o strict o weak*: some walk i -> j uses a strict edge.
  BoolMatrix tail = BoolMatrix::Constant(n, n, false);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      if (!direct.strict(a, b)) continue;
      for (Eigen::Index j = 0; j < n; ++j)
        if (out.weak(b, j)) tail(a, j) = true;
    }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < n; ++a) {
      if (!out.weak(i, a)) continue;
      for (Eigen::Index j = 0; j < n; ++j)
        if (tail(a, j)) out.strict(i, j) = true;
    }
  return out;
}

AxiomCheck check_acyclic(const RelationPair& direct) {
  const int n = direct.size();
  const auto closure = close_weak(direct.weak);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (!direct.strict(a, b) || !closure.reach(b, a)) continue;
      CycleWitness w;
      w.sequence.push_back(a);
      for (int v = b; v != a; v = closure.next(v, a)) w.sequence.push_back(v);
      w.strict_edge_at = 0;
      return {false, std::move(w)};
    }
  return {true, std::nullopt};
}

AxiomCheck check_garp(const DeterministicDataset& data) {
  return check_acyclic(direct_bundle_relations(data));
}

AxiomCheck check_gapp(const DeterministicDataset& data) {
  return check_acyclic(direct_price_relations(data));
}

AxiomCheck check_gapp_nonlinear(const CostMatrix& costs) {
  return check_acyclic(direct_price_relations(costs));
}

bool witness_is_valid(const CycleWitness& witness, const RelationPair& direct) {
  const auto& seq = witness.sequence;
  const int len = static_cast<int>(seq.size());
  if (len < 2 || witness.strict_edge_at < 0 || witness.strict_edge_at >= len) return false;
  for (int k = 0; k < len; ++k) {
    const int from = seq[k], to = seq[(k + 1) % len];
    if (from < 0 || to < 0 || from >= direct.size() || to >= direct.size()) return false;
    if (!direct.weak(from, to)) return false;
    if (k == witness.strict_edge_at && !direct.strict(from, to)) return false;
  }
  return true;
}

DeterministicDataset normalize_expenditure(const DeterministicDataset& data) {
  Mat bundles = data.bundles();
  for (int t = 0; t < data.size(); ++t) bundles.row(t) /= data.expenditure(t);
  return DeterministicDataset(data.prices(), std::move(bundles), data.labels());
}

GenericityError::GenericityError(int t, int s)
    : InputError("genericity failure: p^t x^t = p^s x^t for t=" + std::to_string(t) +
                 ", s=" + std::to_string(s)),
      first(t),
      second(s) {}

RobustnessMargin robustness_margin(const DeterministicDataset& data) {
  const Mat cross = data.cross_expenditure();
  RobustnessMargin m;
  m.min_gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < data.size(); ++t) {
    for (int s = 0; s < data.size(); ++s) {
      if (s == t) continue;
      const double gap = std::abs(cross(t, t) - cross(s, t));
      if (gap <= kRelationTol) throw GenericityError(t, s);
      m.min_gap = std::min(m.min_gap, gap);
    }
    m.bundle_norm = std::max(m.bundle_norm, data.bundles().row(t).cwiseAbs().sum());
  }
  return m;
}

}  // namespace revpref
