#include "revpref/types.hpp"

#include <array>
#include <atomic>
#include <limits>
#include <string>

namespace revpref {

TypeBudgetExceeded::TypeBudgetExceeded(long long c, long long r)
    : InputError("type enumeration exceeded the cap of " + std::to_string(c) + " columns (reached " +
                 std::to_string(r) + ")"),
      cap(c),
      reached(r) {}

namespace {

using Mask = std::uint64_t;
using Reach = std::array<Mask, 64>;

constexpr Mask bit(int i) { return Mask{1} << i; }

class Enumerator {
 public:
  Enumerator(const PatchLayout& layout, long long cap, std::atomic<long long>& total)
      : layout_(layout), n_(layout.budgets()), cap_(cap), total_(total) {}

  // Adds budget k with patch i on top of reach; false if a cycle appears.
  bool extend(const Reach& reach, Mask seen, int k, int i, Reach& out) const {
    const int c = layout_.duplicate_of[k];
    Mask in = 0, outs = 0;
    for (int j = 0; j < k; ++j) {
      const int cj = layout_.duplicate_of[j];
      if (cj == c) continue;
      if (layout_.side(k, i, j) == Side::Below) in |= bit(cj);
      if (layout_.side(j, assignment_[j], k) == Side::Below) outs |= bit(cj);
    }
    const Mask own = (seen & bit(c)) ? reach[c] : bit(c);
    Mask s = own & ~bit(c);
    for (Mask o = outs; o; o &= o - 1) s |= reach[__builtin_ctzll(o)];
    if ((s & in) || (s & bit(c))) return false;
    out = reach;
    const Mask grown = own | s;
    out[c] = grown;
    const Mask targets = in | bit(c);
    for (Mask v = seen; v; v &= v - 1) {
      const int node = __builtin_ctzll(v);
      if (reach[node] & targets) out[node] |= grown;
    }
    return true;
  }

  void run(const Reach& reach, Mask seen, int k, int stop, std::vector<std::uint16_t>& sink) {
    if (k == stop) {
      sink.insert(sink.end(), assignment_.begin(), assignment_.begin() + stop);
      if (stop == n_ && total_.fetch_add(1, std::memory_order_relaxed) + 1 > cap_)
        throw TypeBudgetExceeded(cap_, total_.load());
      return;
    }
    Reach next;
    for (int i = 0; i < layout_.count(k); ++i) {
      assignment_[k] = static_cast<std::uint16_t>(i);
      if (extend(reach, seen, k, i, next)) run(next, seen | bit(layout_.duplicate_of[k]), k + 1, stop, sink);
    }
  }

  // Replays a prefix to recover the reach state after it.
  bool replay(const std::uint16_t* prefix, int depth, Reach& reach, Mask& seen) {
    reach.fill(0);
    seen = 0;
    Reach next;
    for (int k = 0; k < depth; ++k) {
      assignment_[k] = prefix[k];
      if (!extend(reach, seen, k, prefix[k], next)) return false;
      reach = next;
      seen |= bit(layout_.duplicate_of[k]);
    }
    return true;
  }

 private:
  const PatchLayout& layout_;
  int n_;
  long long cap_;
  std::atomic<long long>& total_;
  std::array<std::uint16_t, 64> assignment_{};
};

// Adjacency between duplicate-class nodes for one full assignment.
std::array<Mask, 64> type_edges(const PatchLayout& layout, const std::uint16_t* a) {
  std::array<Mask, 64> adj{};
  const int n = layout.budgets();
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to) {
      const int cf = layout.duplicate_of[from], ct = layout.duplicate_of[to];
      if (cf != ct && layout.side(to, a[to], from) == Side::Below) adj[cf] |= bit(ct);
    }
  return adj;
}

Mask reachable_from(const std::array<Mask, 64>& adj, int start) {
  Mask seen = 0, frontier = adj[start];
  while (frontier & ~seen) {
    const Mask fresh = frontier & ~seen;
    seen |= fresh;
    frontier = 0;
    for (Mask v = fresh; v; v &= v - 1) frontier |= adj[__builtin_ctzll(v)];
  }
  return seen;
}

}  // namespace

TypeMatrix make_type_matrix(const PatchLayout& layout, std::vector<std::uint16_t> assignments) {
  TypeMatrix tm;
  tm.budgets = layout.budgets();
  tm.rows = layout.total_rows();
  tm.assignments = std::move(assignments);
  tm.layout_id = layout_fingerprint(layout);
  if (tm.assignments.size() % tm.budgets != 0) throw InputError("type assignments have the wrong length");
  const int h = tm.columns();
  std::vector<int> offsets(tm.budgets);
  for (int t = 0; t < tm.budgets; ++t) offsets[t] = layout.offset(t);
  tm.matrix.resize(tm.rows, h);
  tm.matrix.reserve(Eigen::VectorXi::Constant(h, tm.budgets));
  for (int j = 0; j < h; ++j)
    for (int t = 0; t < tm.budgets; ++t) {
      const int p = tm.patch(j, t);
      if (p >= layout.count(t)) throw InputError("type assignment refers to a missing patch");
      tm.matrix.insert(offsets[t] + p, j) = 1.0;
    }
  tm.matrix.makeCompressed();
  return tm;
}

TypeMatrix enumerate_types(const PatchLayout& layout, const TypeOptions& options) {
  const int n = layout.budgets();
  std::atomic<long long> total{0};
  // Split the search at a shallow depth; branches run independently and are
  // concatenated in prefix order, which is the serial order.
  const int depth = std::min(n, 2);
  std::vector<std::uint16_t> prefixes;
  {
    std::atomic<long long> unused{0};
    Enumerator e(layout, std::numeric_limits<long long>::max(), unused);
    Reach empty{};
    e.run(empty, 0, 0, depth, prefixes);
  }
  const long long branches = static_cast<long long>(prefixes.size()) / depth;
  std::vector<std::vector<std::uint16_t>> parts(static_cast<std::size_t>(branches));
  parallel_for(options.execution, branches, [&](long long b) {
    Enumerator e(layout, options.cap, total);
    Reach reach;
    Mask seen;
    e.replay(&prefixes[static_cast<std::size_t>(b) * depth], depth, reach, seen);
    e.run(reach, seen, depth, n, parts[static_cast<std::size_t>(b)]);
  });
  std::vector<std::uint16_t> all;
  all.reserve(static_cast<std::size_t>(total.load()) * n);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return make_type_matrix(layout, std::move(all));
}

bool is_rational_assignment(const PatchLayout& layout, const std::vector<int>& assignment) {
  std::vector<std::uint16_t> a(assignment.begin(), assignment.end());
  const auto adj = type_edges(layout, a.data());
  for (int t = 0; t < layout.budgets(); ++t) {
    const int c = layout.duplicate_of[t];
    if (reachable_from(adj, c) & bit(c)) return false;
  }
  return true;
}

Vec type_indicator(const TypeMatrix& types, const PatchLayout& layout, int t, int s) {
  if (t < 0 || s < 0 || t >= layout.budgets() || s >= layout.budgets())
    throw InputError("budget index out of range");
  if (t == s) throw InputError("indicator needs two different budgets");
  if (types.layout_id != layout_fingerprint(layout)) throw InputError("type matrix was built from a different layout");
  const int h = types.columns();
  const int ct = layout.duplicate_of[t], cs = layout.duplicate_of[s];
  Vec rho = Vec::Zero(h);
  if (ct == cs) return rho;
  for (int j = 0; j < h; ++j) {
    const auto adj = type_edges(layout, &types.assignments[static_cast<std::size_t>(j) * types.budgets]);
    if (reachable_from(adj, ct) & bit(cs)) rho(j) = 1.0;
  }
  return rho;
}

}  // namespace revpref
