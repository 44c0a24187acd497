#pragma once

// Constrained minimum spanning trees and constrained 1-trees.
//
// A 1-tree is a spanning tree on {v2..vn} plus two edges at v1. The
// constrained variant must contain every edge of an include (white) set and
// none of an exclude (deleted) set. Its weight lower-bounds every tour that
// honours the same constraints, which makes it an admissible estimate for
// guiding ejection chains.

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stemcycle/instance.hpp"
#include "stemcycle/sc_structure.hpp"

namespace stemcycle {

/// Thrown when include and exclude overlap; that is a caller bug, not infeasibility.
class ContradictoryConstraints : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Provenance { fresh, reused_from_parent };

struct SpanningTree {
  std::vector<Edge> edges;  // sorted
  Weight weight = 0;
};

struct ConstrainedOneTree {
  std::vector<Edge> edges;  // sorted, n entries
  Weight total_weight = 0;
  Weight white_weight = 0;
  Weight nonwhite_weight = 0;
  Provenance provenance = Provenance::fresh;

  bool contains(const Edge& e) const { return std::binary_search(edges.begin(), edges.end(), e); }
};

/// g = weight of the white edges, h = weight of the rest of the tree.
struct CostSplit {
  Weight g = 0;
  Weight h = 0;
  Weight f() const { return g + h; }
};

namespace detail {

enum : unsigned char { kFree = 0, kInclude = 1, kExclude = 2 };

class EdgeFlags {
 public:
  EdgeFlags(int n, const EdgeSet& include, const EdgeSet& exclude)
      : n_(n), flags_(static_cast<std::size_t>(n + 1) * (n + 1), kFree) {
    for (const Edge& e : include) set(e, kInclude);
    for (const Edge& e : exclude) set(e, kExclude);
  }
  unsigned char operator()(NodeId a, NodeId b) const {
    return flags_[static_cast<std::size_t>(a) * (n_ + 1) + b];
  }

 private:
  void set(const Edge& e, unsigned char f) {
    if (e.u < 1 || e.v > n_ || e.u == e.v) throw std::invalid_argument("constraint edge out of range: " + to_string(e));
    flags_[static_cast<std::size_t>(e.u) * (n_ + 1) + e.v] = f;
    flags_[static_cast<std::size_t>(e.v) * (n_ + 1) + e.u] = f;
  }
  int n_;
  std::vector<unsigned char> flags_;
};

inline void check_disjoint(const EdgeSet& include, const EdgeSet& exclude) {
  for (const Edge& e : include)
    if (exclude.contains(e))
      throw ContradictoryConstraints("contradictory constraints: " + to_string(e) + " is both included and excluded");
}

inline bool includes_form_cycle(int n, const EdgeSet& include) {
  std::vector<int> parent(n + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : include) {
    if (e.touches(1)) continue;
    const int a = find(e.u), b = find(e.v);
    if (a == b) return true;
    parent[a] = b;
  }
  return false;
}

/// Prim on {2..n} over the dense graph. Candidate edges are ranked by
/// (included first, weight, lexicographic edge), which forces every include
/// edge in while otherwise minimising weight. Excluded edges never enter the
/// frontier. O(n^2).
inline std::optional<SpanningTree> prim_on_rest(const TspInstance& inst, const EdgeFlags& flags) {
  const int n = inst.n();
  struct Key {
    bool valid = false;
    bool forced = false;
    Weight w = 0;
    Edge e;
  };
  auto better = [](const Key& a, const Key& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.forced != b.forced) return a.forced;
    if (a.w != b.w) return a.w < b.w;
    return a.e < b.e;
  };

  std::vector<char> in_tree(n + 1, 0);
  std::vector<Key> key(n + 1);
  auto relax = [&](NodeId from) {
    for (NodeId v = 2; v <= n; ++v) {
      if (in_tree[v] || v == from) continue;
      const unsigned char f = flags(from, v);
      if (f == kExclude) continue;
      const Key cand{true, f == kInclude, inst.weight_unchecked(from, v), Edge(from, v)};
      if (better(cand, key[v])) key[v] = cand;
    }
  };

  SpanningTree tree;
  tree.edges.reserve(n - 2);
  in_tree[2] = 1;
  relax(2);
  for (int added = 0; added < n - 2; ++added) {
    NodeId pick = 0;
    for (NodeId v = 3; v <= n; ++v)
      if (!in_tree[v] && (pick == 0 || better(key[v], key[pick]))) pick = v;
    if (pick == 0 || !key[pick].valid) return std::nullopt;  // exclusions disconnect {v2..vn}
    in_tree[pick] = 1;
    tree.edges.push_back(key[pick].e);
    tree.weight += key[pick].w;
    relax(pick);
  }
  std::sort(tree.edges.begin(), tree.edges.end());
  return tree;
}

}  // namespace detail

/// Minimum spanning tree on {v2..vn} containing `include` and avoiding
/// `exclude`. Neither set may touch v1. Returns nullopt when infeasible.
inline std::optional<SpanningTree> constrained_mst(const TspInstance& inst, const EdgeSet& include,
                                                   const EdgeSet& exclude) {
  detail::check_disjoint(include, exclude);
  for (const EdgeSet* s : {&include, &exclude})
    for (const Edge& e : *s)
      if (e.touches(1)) throw std::invalid_argument("constrained_mst: edge " + to_string(e) + " touches v1");
  if (detail::includes_form_cycle(inst.n(), include)) return std::nullopt;
  return detail::prim_on_rest(inst, detail::EdgeFlags(inst.n(), include, exclude));
}

/// Constrained 1-tree. Include/exclude edges at v1 are handled by the v1
/// connection step: included edges there are taken regardless of cost,
/// excluded ones are discarded, and free slots go to the cheapest remaining
/// edges (ties by node id).
inline std::optional<ConstrainedOneTree> constrained_one_tree(const TspInstance& inst, const EdgeSet& include,
                                                              const EdgeSet& exclude) {
  detail::check_disjoint(include, exclude);
  const int n = inst.n();
  if (detail::includes_form_cycle(n, include)) return std::nullopt;
  const detail::EdgeFlags flags(n, include, exclude);

  std::vector<Edge> at_v1;
  for (const Edge& e : include)
    if (e.touches(1)) at_v1.push_back(e);
  if (at_v1.size() > 2) return std::nullopt;

  auto mst = detail::prim_on_rest(inst, flags);
  if (!mst) return std::nullopt;

  while (at_v1.size() < 2) {
    NodeId best = 0;
    for (NodeId u = 2; u <= n; ++u) {
      if (flags(1, u) != detail::kFree) continue;
      if (std::find(at_v1.begin(), at_v1.end(), Edge(1, u)) != at_v1.end()) continue;
      if (best == 0 || inst.weight_unchecked(1, u) < inst.weight_unchecked(1, best)) best = u;
    }
    if (best == 0) return std::nullopt;
    at_v1.emplace_back(1, best);
  }

  ConstrainedOneTree tree;
  tree.edges = std::move(mst->edges);
  tree.edges.insert(tree.edges.end(), at_v1.begin(), at_v1.end());
  std::sort(tree.edges.begin(), tree.edges.end());
  tree.total_weight = mst->weight + inst.weight_unchecked(1, at_v1[0].v) + inst.weight_unchecked(1, at_v1[1].v);
  for (const Edge& e : include) tree.white_weight += inst.weight_unchecked(e.u, e.v);
  tree.nonwhite_weight = tree.total_weight - tree.white_weight;
  return tree;
}

/// f = g + h equals the tree weight because every white edge is forced in.
inline CostSplit cost_split(const TspInstance& inst, const ConstrainedOneTree& tree, const EdgeSet& white) {
  CostSplit split;
  for (const Edge& e : white) {
    if (!tree.contains(e)) throw std::logic_error("cost_split: white edge " + to_string(e) + " missing from tree");
    split.g += inst.weight_unchecked(e.u, e.v);
  }
  split.h = tree.total_weight - split.g;
  return split;
}

}  // namespace stemcycle
