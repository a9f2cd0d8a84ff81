#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "revpref/dataset.hpp"
#include "revpref/patches.hpp"
#include "revpref/types.hpp"

namespace fixtures {

using revpref::DeterministicDataset;
using revpref::Mat;
using revpref::Vec;

inline Mat rows2(std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Budgets that do not cross: GARP holds but the price comparisons disagree.
inline DeterministicDataset crossing_prices() {
  return DeterministicDataset(rows2({{2, 1}, {1, 2}}), rows2({{4, 0}, {0, 1}}));
}

// Each bundle is strictly cheaper at the other observation's prices.
inline DeterministicDataset cheaper_elsewhere() {
  return DeterministicDataset(rows2({{2, 1}, {1, 4}}), rows2({{2, 1}, {0, 2}}));
}

inline Mat two_budgets() { return rows2({{2, 1}, {1, 2}}); }

// Reference type matrix for two_budgets(), rows ordered (t seg 1, t seg 2,
// t' seg 1, t' seg 2), with the observed frequencies and mixture weights in
// the same coordinates.
inline Mat reference_types() { return rows2({{1, 1, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 1}}); }
inline Vec reference_pi() { return (Vec(4) << 0.6, 0.4, 0.5, 0.5).finished(); }
inline Vec reference_nu() { return (Vec(3) << 0.1, 0.5, 0.4).finished(); }

/// Row and column permutations with computed(row[i], col[j]) == reference(i, j).
struct Alignment {
  std::vector<int> row;
  std::vector<int> col;
};

/// Rows may only move within their budget block (row_block gives the block of
/// each row, identical in both matrices).
inline std::optional<Alignment> align(const Mat& computed, const Mat& reference, const std::vector<int>& row_block) {
  if (computed.rows() != reference.rows() || computed.cols() != reference.cols()) return std::nullopt;
  std::vector<int> r(computed.rows()), c(computed.cols());
  std::iota(r.begin(), r.end(), 0);
  do {
    bool blocks_kept = true;
    for (std::size_t i = 0; i < r.size(); ++i) blocks_kept = blocks_kept && row_block[r[i]] == row_block[i];
    if (!blocks_kept) continue;
    std::iota(c.begin(), c.end(), 0);
    do {
      bool ok = true;
      for (Eigen::Index i = 0; i < reference.rows() && ok; ++i)
        for (Eigen::Index j = 0; j < reference.cols() && ok; ++j) ok = computed(r[i], c[j]) == reference(i, j);
      if (ok) return Alignment{r, c};
    } while (std::next_permutation(c.begin(), c.end()));
  } while (std::next_permutation(r.begin(), r.end()));
  return std::nullopt;
}

/// Reference-ordered vector mapped to computed coordinates.
inline Vec to_computed(const Vec& reference, const std::vector<int>& perm) {
  Vec out(reference.size());
  for (Eigen::Index i = 0; i < reference.size(); ++i) out(perm[i]) = reference(i);
  return out;
}

}  // namespace fixtures
