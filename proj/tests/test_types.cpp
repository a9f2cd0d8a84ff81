#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "revpref/relations.hpp"
#include "revpref/rng.hpp"
#include "revpref/types.hpp"

using namespace revpref;
using fixtures::rows2;

namespace {

std::set<std::vector<int>> columns_of(const TypeMatrix& tm) {
  std::set<std::vector<int>> out;
  for (int j = 0; j < tm.columns(); ++j) {
    std::vector<int> a(tm.budgets);
    for (int t = 0; t < tm.budgets; ++t) a[t] = tm.patch(j, t);
    out.insert(a);
  }
  return out;
}

std::vector<int> row_blocks(const PatchLayout& layout) {
  std::vector<int> b;
  for (int t = 0; t < layout.budgets(); ++t)
    for (int k = 0; k < layout.count(t); ++k) b.push_back(t);
  return b;
}

}  // namespace

TEST_SUITE("types") {
  TEST_CASE("two crossing budgets have three types") {
    const auto layout = enumerate_patches(fixtures::two_budgets());
    const auto tm = enumerate_types(layout);
    CHECK(tm.columns() == 3);
    CHECK(tm.rows == 4);
    const Mat a(tm.matrix);
    const auto al = fixtures::align(a, fixtures::reference_types(), row_blocks(layout));
    REQUIRE(al);
    // The second reference type is the one revealing p^t over p^t'.
    const Vec rho = type_indicator(tm, layout, 0, 1);
    for (int j = 0; j < 3; ++j) CHECK(rho(al->col[j]) == (j == 1 ? 1.0 : 0.0));
  }

  TEST_CASE("one budget, one type") {
    const auto layout = enumerate_patches(rows2({{1, 1}}));
    const auto tm = enumerate_types(layout);
    CHECK(tm.columns() == 1);
    CHECK(Mat(tm.matrix) == Mat::Ones(1, 1));
  }

  TEST_CASE("types equal exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      CounterRng rng(seed, 40);
      const int t = 2 + static_cast<int>(uniform_index(rng, 4));
      const int l = 2 + static_cast<int>(uniform_index(rng, 2));
      const auto layout = enumerate_patches(oracle::random_matrix(rng, t, l, 0.5, 2.0));
      const auto tm = enumerate_types(layout);
      CHECK(columns_of(tm) == oracle::rational_assignments(layout));
      CHECK(static_cast<int>(columns_of(tm).size()) == tm.columns());
    }
  }

  TEST_CASE("columns are in lexicographic order with one unit per block") {
    CounterRng rng(3, 41);
    const auto layout = enumerate_patches(oracle::random_matrix(rng, 5, 3, 0.5, 2.0));
    const auto tm = enumerate_types(layout);
    const Mat a(tm.matrix);
    for (int t = 0; t < layout.budgets(); ++t)
      CHECK((a.middleRows(layout.offset(t), layout.count(t)).colwise().sum().array() == 1.0).all());
    std::vector<std::vector<int>> cols;
    for (int j = 0; j < tm.columns(); ++j) {
      std::vector<int> c(tm.budgets);
      for (int s = 0; s < tm.budgets; ++s) c[s] = tm.patch(j, s);
      cols.push_back(c);
    }
    CHECK(std::is_sorted(cols.begin(), cols.end()));
    CHECK(std::adjacent_find(cols.begin(), cols.end()) == cols.end());
  }

  TEST_CASE("witness datasets of types pass GARP, and GAPP after rescaling") {
    CounterRng rng(8, 42);
    const auto layout = enumerate_patches(oracle::random_matrix(rng, 5, 3, 0.5, 2.0));
    const auto tm = enumerate_types(layout);
    for (int j = 0; j < tm.columns(); ++j) {
      Mat x(tm.budgets, 3);
      for (int t = 0; t < tm.budgets; ++t)
        x.row(t) = layout.per_budget[t][tm.patch(j, t)].witness.transpose() * (1.0 + uniform01(rng));
      const DeterministicDataset d(layout.prices, x);
      CHECK(check_garp(normalize_expenditure(d)).passes);
      CHECK(check_gapp(d).passes);
    }
  }

  TEST_CASE("indicators match price reachability; reversed pairs are disjoint") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CounterRng rng(seed, 43);
      const int n = 3 + static_cast<int>(uniform_index(rng, 2));
      const auto layout = enumerate_patches(oracle::random_matrix(rng, n, 2, 0.5, 2.0));
      const auto tm = enumerate_types(layout);
      for (int t = 0; t < n; ++t)
        for (int s = 0; s < n; ++s) {
          if (t == s) continue;
          const Vec fwd = type_indicator(tm, layout, t, s);
          const Vec back = type_indicator(tm, layout, s, t);
          CHECK(fwd.sum() + back.sum() <= tm.columns());
          CHECK((fwd.array() * back.array()).sum() == 0.0);
          for (int j = 0; j < tm.columns(); ++j) {
            std::vector<int> a(n);
            for (int k = 0; k < n; ++k) a[k] = tm.patch(j, k);
            CHECK((fwd(j) == 1.0) == oracle::price_reachable(layout, a, t, s));
          }
        }
    }
  }

  TEST_CASE("identical budgets") {
    const auto layout = enumerate_patches(rows2({{1, 2}, {1, 2}}));
    const auto tm = enumerate_types(layout);
    CHECK(tm.columns() == 1);
    CHECK(type_indicator(tm, layout, 0, 1).sum() == 0.0);
    CHECK_THROWS_AS(type_indicator(tm, layout, 0, 0), InputError);
  }

  TEST_CASE("cap and determinism") {
    CounterRng rng(1, 44);
    const auto layout = enumerate_patches(oracle::random_matrix(rng, 5, 3, 0.5, 2.0));
    const auto full = enumerate_types(layout);
    REQUIRE(full.columns() > 5);
    try {
      enumerate_types(layout, {5, Execution::Serial});
      FAIL("cap not enforced");
    } catch (const TypeBudgetExceeded& e) {
      CHECK(e.cap == 5);
      CHECK(e.reached > 5);
    }
    const auto serial = enumerate_types(layout, {10'000'000, Execution::Serial});
    CHECK(serial.assignments == full.assignments);
    CHECK(make_type_matrix(layout, full.assignments).assignments == full.assignments);
    const auto other = enumerate_patches(fixtures::two_budgets());
    CHECK_THROWS_AS(type_indicator(full, other, 0, 1), InputError);
  }

  TEST_CASE("rationality of explicit assignments") {
    const auto layout = enumerate_patches(fixtures::two_budgets());
    const auto all = oracle::rational_assignments(layout);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(is_rational_assignment(layout, {a, b}) == (all.count({a, b}) == 1));
  }
}
