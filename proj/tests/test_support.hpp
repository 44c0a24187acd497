#pragma once

// Test-only oracles. Everything here is brute force and deliberately shares
// no code path with the library routines it is used to check.

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "stemcycle/stemcycle.hpp"

namespace stemcycle::testing {

inline TspInstance matrix_instance(int n, std::initializer_list<std::tuple<int, int, Weight>> weights,
                                   std::string name = "test") {
  std::vector<Weight> m(static_cast<std::size_t>(n) * n, 0);
  for (auto [i, j, w] : weights) {
    m[static_cast<std::size_t>(i - 1) * n + (j - 1)] = w;
    m[static_cast<std::size_t>(j - 1) * n + (i - 1)] = w;
  }
  return TspInstance(std::move(name), n, std::move(m));
}

/// w12=1 w13=2 w14=3 w23=1 w24=2 w34=1
inline TspInstance t4() {
  return matrix_instance(4, {{1, 2, 1}, {1, 3, 2}, {1, 4, 3}, {2, 3, 1}, {2, 4, 2}, {3, 4, 1}}, "T4");
}

/// w12=2 w13=9 w14=8 w15=3 w23=4 w24=8 w25=7 w34=5 w35=8 w45=6
inline TspInstance t5() {
  return matrix_instance(5,
                         {{1, 2, 2}, {1, 3, 9}, {1, 4, 8}, {1, 5, 3}, {2, 3, 4}, {2, 4, 8}, {2, 5, 7}, {3, 4, 5},
                          {3, 5, 8}, {4, 5, 6}},
                         "T5");
}

inline TspInstance random_matrix_instance(int n, Rng& rng, Weight max_weight = 100) {
  std::vector<Weight> m(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      m[static_cast<std::size_t>(i) * n + j] = m[static_cast<std::size_t>(j) * n + i] =
          1 + static_cast<Weight>(rng.below(static_cast<std::uint64_t>(max_weight)));
  return TspInstance("rand" + std::to_string(n), n, std::move(m));
}

inline TspInstance random_euclid_instance(int n, Rng& rng, int extent = 1000) {
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.x = static_cast<double>(rng.below(extent));
    p.y = static_cast<double>(rng.below(extent));
  }
  return TspInstance("euc" + std::to_string(n), WeightType::euc_2d, std::move(pts));
}

inline Weight edges_weight(const TspInstance& inst, const std::vector<Edge>& edges) {
  Weight w = 0;
  for (const Edge& e : edges) w += inst.weight(e.u, e.v);
  return w;
}

// ---------------------------------------------------------------------------
// Structure checker: works only from the edge list and the root/tip labels.

inline std::optional<std::string> structure_violation(const ScStructure& sc, int n) {
  const auto edges = sc.edges();
  if (static_cast<int>(edges.size()) != n) return "edge count " + std::to_string(edges.size()) + " != n";
  std::set<Edge> distinct(edges.begin(), edges.end());
  if (distinct.size() != edges.size()) return "duplicate edge";
  std::vector<std::vector<NodeId>> adj(n + 1);
  for (const Edge& e : edges) {
    if (e.u < 1 || e.v > n || e.u == e.v) return "edge out of range " + to_string(e);
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<char> seen(n + 1, 0);
  std::queue<NodeId> q;
  q.push(1);
  seen[1] = 1;
  int reached = 1;
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop();
    for (NodeId u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        q.push(u);
      }
  }
  if (reached != n) return "not connected";  // connected + n edges => exactly one cycle
  const NodeId root = sc.root(), tip = sc.tip();
  for (NodeId v = 1; v <= n; ++v) {
    const int deg = static_cast<int>(adj[v].size());
    int want = 2;
    if (tip != root && v == root) want = 3;
    if (tip != root && v == tip) want = 1;
    if (deg != want) return "node " + std::to_string(v) + " has degree " + std::to_string(deg);
  }
  if (sc.cycle().size() < 3) return "cycle shorter than 3";
  if (sc.subroot_left() == sc.subroot_right()) return "subroots coincide";
  // Root must be adjacent to both subroots.
  const auto& r = adj[root];
  if (std::count(r.begin(), r.end(), sc.subroot_left()) != 1 || std::count(r.begin(), r.end(), sc.subroot_right()) != 1)
    return "root not adjacent to both subroots";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Enumeration oracles

/// Calls fn(tour) once per undirected Hamiltonian cycle (node 1 first).
inline void for_each_tour(int n, const std::function<void(const Tour&)>& fn) {
  std::vector<NodeId> rest(n - 1);
  std::iota(rest.begin(), rest.end(), 2);
  do {
    if (rest.front() > rest.back()) continue;  // skip mirror images
    Tour t;
    t.order.push_back(1);
    t.order.insert(t.order.end(), rest.begin(), rest.end());
    fn(t);
  } while (std::next_permutation(rest.begin(), rest.end()));
}

inline Weight brute_force_optimum(const TspInstance& inst) {
  Weight best = std::numeric_limits<Weight>::max();
  for_each_tour(inst.n(), [&](const Tour& t) { best = std::min(best, tour_length(inst, t)); });
  return best;
}

/// Shortest tour containing every `include` edge and no `exclude` edge.
inline std::optional<Weight> best_consistent_tour(const TspInstance& inst, const EdgeSet& include,
                                                  const EdgeSet& exclude) {
  std::optional<Weight> best;
  for_each_tour(inst.n(), [&](const Tour& t) {
    const auto edges = tour_edges(t);
    const std::set<Edge> es(edges.begin(), edges.end());
    for (const Edge& e : include)
      if (!es.contains(e)) return;
    for (const Edge& e : exclude)
      if (es.contains(e)) return;
    const Weight len = tour_length(inst, t);
    if (!best || len < *best) best = len;
  });
  return best;
}

/// Minimum over every 1-tree (spanning tree on {2..n} plus two v1 edges)
/// that contains `include` and avoids `exclude`. Exponential; n <= 7.
inline std::optional<Weight> brute_force_one_tree(const TspInstance& inst, const EdgeSet& include,
                                                  const EdgeSet& exclude) {
  const int n = inst.n();
  std::vector<Edge> rest_edges;
  for (int i = 2; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) rest_edges.emplace_back(i, j);

  std::optional<Weight> best_tree;
  std::vector<Edge> pick;
  std::function<void(std::size_t)> choose = [&](std::size_t from) {
    if (static_cast<int>(pick.size()) == n - 2) {
      std::vector<int> parent(n + 1);
      std::iota(parent.begin(), parent.end(), 0);
      std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
      for (const Edge& e : pick) {
        const int a = find(e.u), b = find(e.v);
        if (a == b) return;
        parent[a] = b;
      }
      for (const Edge& e : include)
        if (!e.touches(1) && std::find(pick.begin(), pick.end(), e) == pick.end()) return;
      for (const Edge& e : pick)
        if (exclude.contains(e)) return;
      const Weight w = edges_weight(inst, pick);
      if (!best_tree || w < *best_tree) best_tree = w;
      return;
    }
    for (std::size_t k = from; k < rest_edges.size(); ++k) {
      pick.push_back(rest_edges[k]);
      choose(k + 1);
      pick.pop_back();
    }
  };
  choose(0);
  if (!best_tree) return std::nullopt;

  std::optional<Weight> best_pair;
  for (int a = 2; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) {
      const Edge ea(1, a), eb(1, b);
      if (exclude.contains(ea) || exclude.contains(eb)) continue;
      bool ok = true;
      for (const Edge& e : include)
        if (e.touches(1) && e != ea && e != eb) ok = false;
      if (!ok) continue;
      const Weight w = inst.weight(1, a) + inst.weight(1, b);
      if (!best_pair || w < *best_pair) best_pair = w;
    }
  if (!best_pair) return std::nullopt;
  return *best_tree + *best_pair;
}

// ---------------------------------------------------------------------------
// Random reachable states

struct ReachedState {
  ScStructure sc;
  ConstraintState cs;
  Tour start;
};

/// Random walk of up to `steps` uniformly chosen legitimate moves.
inline ReachedState random_reachable_state(const TspInstance& inst, Rng& rng, int steps) {
  Tour start = random_start_tour(inst, rng);
  ScStructure sc = from_tour(start, static_cast<NodeId>(1 + rng.below(inst.n())));
  ConstraintState cs;
  for (int s = 0; s < steps; ++s) {
    const auto moves = generate_moves(sc, cs, inst);
    if (moves.empty()) break;
    auto next = apply_move(sc, cs, moves[rng.below(moves.size())]);
    sc = std::move(next.first);
    cs = std::move(next.second);
  }
  return {std::move(sc), std::move(cs), std::move(start)};
}

inline std::string data_dir() { return STEMCYCLE_DATA_DIR; }

}  // namespace stemcycle::testing
