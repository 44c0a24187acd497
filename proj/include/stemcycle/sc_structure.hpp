#pragma once

// Stem-and-Cycle reference structure: a spanning subgraph made of a cycle
// through the root plus a simple path (the stem) hanging from the root and
// ending at the tip. When tip == root the structure is a Hamiltonian tour.

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stemcycle/instance.hpp"

namespace stemcycle {

/// Small sorted set of undirected edges. Chains never hold more than ~2n
/// constrained edges, so a flat vector beats a tree.
class EdgeSet {
 public:
  EdgeSet() = default;
  EdgeSet(std::initializer_list<Edge> edges) {
    for (const Edge& e : edges) insert(e);
  }
  explicit EdgeSet(std::span<const Edge> edges) {
    for (const Edge& e : edges) insert(e);
  }

  bool contains(const Edge& e) const { return std::binary_search(edges_.begin(), edges_.end(), e); }

  bool insert(const Edge& e) {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it != edges_.end() && *it == e) return false;
    edges_.insert(it, e);
    return true;
  }

  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  auto begin() const { return edges_.begin(); }
  auto end() const { return edges_.end(); }
  const std::vector<Edge>& items() const { return edges_; }

  bool intersects(const EdgeSet& other) const {
    return std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) { return other.contains(e); });
  }

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

 private:
  std::vector<Edge> edges_;
};

enum class EdgeColor { black, white };

/// White (forced-include) and deleted (tabu) edges accumulated along a chain.
struct ConstraintState {
  EdgeSet white;
  EdgeSet deleted;
  int level = 1;

  /// Moves made from an even level add white edges; the first move is black.
  EdgeColor next_color() const { return level % 2 == 0 ? EdgeColor::white : EdgeColor::black; }

  friend bool operator==(const ConstraintState&, const ConstraintState&) = default;
};

enum class MoveKind { cycle_ejection, stem_ejection, root_ejection };

inline const char* to_string(MoveKind k) {
  switch (k) {
    case MoveKind::cycle_ejection: return "cycle";
    case MoveKind::stem_ejection: return "stem";
    case MoveKind::root_ejection: return "root";
  }
  return "?";
}

/// Add (tip, pivot), drop (pivot, new_tip).
struct ScMove {
  Edge added;
  Edge removed;
  EdgeColor color = EdgeColor::black;
  MoveKind kind = MoveKind::cycle_ejection;
  NodeId pivot = 0;
  NodeId new_tip = 0;
  Weight ejection_value = 0;

  /// Deterministic tie-break key: lexicographic (added, removed).
  auto tie_key() const { return std::tie(added, removed); }
};

struct TrialSolution {
  Tour tour;
  Weight value = 0;   // change in weight relative to the structure
  NodeId subroot = 0; // 0 for the degenerate self-trial
};

class ScStructure {
 public:
  /// Degenerate structure whose cycle is the tour rotated to start at root.
  static ScStructure from_tour(const Tour& t, NodeId root) {
    const auto it = std::find(t.order.begin(), t.order.end(), root);
    if (it == t.order.end()) throw std::invalid_argument("from_tour: root not in tour");
    std::vector<NodeId> cycle;
    cycle.reserve(t.order.size());
    cycle.insert(cycle.end(), it, t.order.end());
    cycle.insert(cycle.end(), t.order.begin(), it);
    return ScStructure(std::move(cycle), {root});
  }

  NodeId root() const { return cycle_.front(); }
  NodeId tip() const { return stem_.back(); }
  NodeId subroot_left() const { return cycle_[1]; }
  NodeId subroot_right() const { return cycle_.back(); }
  bool is_degenerate() const { return stem_.size() == 1; }
  int node_count() const { return static_cast<int>(cycle_.size() + stem_.size() - 1); }

  /// Cycle order starting at the root; the closing edge back to the root is implicit.
  std::span<const NodeId> cycle() const { return cycle_; }
  /// Path from the root to the tip; just {root} when degenerate.
  std::span<const NodeId> stem() const { return stem_; }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(cycle_.size() + stem_.size());
    for (std::size_t k = 0; k < cycle_.size(); ++k)
      out.emplace_back(cycle_[k], cycle_[(k + 1) % cycle_.size()]);
    for (std::size_t k = 1; k < stem_.size(); ++k) out.emplace_back(stem_[k - 1], stem_[k]);
    return out;
  }

  Weight weight(const TspInstance& inst) const {
    Weight sum = 0;
    for (const Edge& e : edges()) sum += inst.weight_unchecked(e.u, e.v);
    return sum;
  }

  /// The tour a degenerate structure stands for.
  Tour as_tour() const {
    if (!is_degenerate()) throw std::logic_error("as_tour: structure is not degenerate");
    return Tour{cycle_};
  }

  friend bool operator==(const ScStructure&, const ScStructure&) = default;

 private:
  friend std::vector<ScMove> generate_moves(const ScStructure&, const ConstraintState&, const TspInstance&);
  friend std::pair<ScStructure, ConstraintState> apply_move(const ScStructure&, const ConstraintState&,
                                                            const ScMove&);
  friend ScStructure make_structure(std::vector<NodeId>, std::vector<NodeId>);

  ScStructure(std::vector<NodeId> cycle, std::vector<NodeId> stem)
      : cycle_(std::move(cycle)), stem_(std::move(stem)) {}

  std::vector<NodeId> cycle_;  // cycle_[0] == root
  std::vector<NodeId> stem_;   // stem_[0] == root, stem_.back() == tip
};

/// Build an arbitrary structure from explicit arcs (tests and diagnostics).
/// cycle[0] and stem[0] must both be the root.
inline ScStructure make_structure(std::vector<NodeId> cycle, std::vector<NodeId> stem) {
  if (cycle.size() < 3) throw std::invalid_argument("make_structure: cycle needs at least 3 nodes");
  if (stem.empty() || stem.front() != cycle.front())
    throw std::invalid_argument("make_structure: stem must start at the root");
  std::vector<NodeId> all(cycle);
  all.insert(all.end(), stem.begin() + 1, stem.end());
  std::sort(all.begin(), all.end());
  for (std::size_t k = 0; k < all.size(); ++k)
    if (all[k] != static_cast<NodeId>(k + 1))
      throw std::invalid_argument("make_structure: nodes must be exactly 1..n");
  return ScStructure(std::move(cycle), std::move(stem));
}

inline ScStructure from_tour(const Tour& t, NodeId root) { return ScStructure::from_tour(t, root); }
inline bool is_degenerate(const ScStructure& sc) { return sc.is_degenerate(); }

namespace detail {

/// Union-find over the white edges; answers whether a new white edge keeps
/// the white set extendable to a Hamiltonian cycle.
class WhiteForest {
 public:
  WhiteForest(int n, const EdgeSet& white) : parent_(n + 1), size_(n + 1, 1), degree_(n + 1, 0), n_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
    for (const Edge& e : white) {
      ++degree_[e.u];
      ++degree_[e.v];
      const int a = find(e.u), b = find(e.v);
      if (a != b) {
        parent_[a] = b;
        size_[b] += size_[a];
      }
    }
  }

  bool can_add(const Edge& e) {
    if (degree_[e.u] >= 2 || degree_[e.v] >= 2) return false;
    const int a = find(e.u), b = find(e.v);
    return a != b || size_[a] == n_;
  }

 private:
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<int> degree_;
  int n_;
};

}  // namespace detail

/// Enumerate every legitimate move (the set Gamma). At most 2n entries.
///
/// cycle-ejection: pivot on the cycle (not the root), drop either cycle edge
///   at the pivot whose other end is not the root; the far arc becomes the stem.
/// stem-ejection: pivot on the stem (not the tip), drop the stem edge towards
///   the tip; the tail of the stem is reversed.
/// root-ejection: join the tip to the root and drop a root-subroot edge; the
///   old stem closes into the new cycle.
inline std::vector<ScMove> generate_moves(const ScStructure& sc, const ConstraintState& cs,
                                          const TspInstance& inst) {
  const auto& cyc = sc.cycle_;
  const auto& stem = sc.stem_;
  const int k = static_cast<int>(cyc.size());
  const int m = static_cast<int>(stem.size()) - 1;
  const NodeId tip = sc.tip();
  const NodeId root = sc.root();
  const EdgeColor color = cs.next_color();

  detail::WhiteForest forest(sc.node_count(), cs.white);
  std::vector<ScMove> moves;
  moves.reserve(2 * static_cast<std::size_t>(k + m));

  auto consider = [&](MoveKind kind, NodeId pivot, NodeId far) {
    const Edge added(tip, pivot);
    const Edge removed(pivot, far);
    if (cs.deleted.contains(added) || cs.white.contains(removed)) return;
    if (color == EdgeColor::white && !forest.can_add(added)) return;
    moves.push_back(ScMove{added, removed, color, kind, pivot, far,
                           inst.weight_unchecked(added.u, added.v) - inst.weight_unchecked(removed.u, removed.v)});
  };

  for (int i = 1; i < k; ++i) {
    const NodeId pivot = cyc[i];
    // In the degenerate case the tip is the root, already joined to both subroots.
    if (m == 0 && (i == 1 || i == k - 1)) continue;
    if (i + 1 < k) consider(MoveKind::cycle_ejection, pivot, cyc[i + 1]);
    if (i - 1 > 0) consider(MoveKind::cycle_ejection, pivot, cyc[i - 1]);
  }
  for (int i = 0; i + 2 <= m; ++i) consider(MoveKind::stem_ejection, stem[i], stem[i + 1]);
  if (m >= 2) {
    consider(MoveKind::root_ejection, root, cyc[1]);
    consider(MoveKind::root_ejection, root, cyc[k - 1]);
  }
  return moves;
}

/// Successor structure and constraints. The move must come from generate_moves
/// on the same state.
inline std::pair<ScStructure, ConstraintState> apply_move(const ScStructure& sc, const ConstraintState& cs,
                                                          const ScMove& mv) {
  const auto& cyc = sc.cycle_;
  const auto& stem = sc.stem_;
  const int k = static_cast<int>(cyc.size());
  const int m = static_cast<int>(stem.size()) - 1;
  const NodeId tip = sc.tip();
  const NodeId root = sc.root();

  auto reject = [](const std::string& why) -> std::pair<ScStructure, ConstraintState> {
    throw std::logic_error("apply_move: illegitimate move (" + why + ")");
  };
  if (mv.added != Edge(tip, mv.pivot) || mv.removed != Edge(mv.pivot, mv.new_tip)) return reject("edge mismatch");
  if (cs.deleted.contains(mv.added)) return reject("added edge is tabu");
  if (cs.white.contains(mv.removed)) return reject("removed edge is white");
  if (mv.color != cs.next_color()) return reject("wrong colour for level");

  std::vector<NodeId> new_cycle;
  std::vector<NodeId> new_stem;
  new_cycle.reserve(k + m);
  new_stem.reserve(k + m);

  switch (mv.kind) {
    case MoveKind::cycle_ejection: {
      const auto pos = std::find(cyc.begin() + 1, cyc.end(), mv.pivot);
      if (pos == cyc.end()) return reject("pivot not on cycle");
      const int i = static_cast<int>(pos - cyc.begin());
      new_cycle.push_back(root);
      new_stem.push_back(root);
      if (i + 1 < k && cyc[i + 1] == mv.new_tip) {
        new_cycle.insert(new_cycle.end(), cyc.begin() + 1, cyc.begin() + i + 1);
        new_stem.insert(new_stem.end(), cyc.rbegin(), cyc.rend() - (i + 1));
      } else if (i - 1 > 0 && cyc[i - 1] == mv.new_tip) {
        new_cycle.insert(new_cycle.end(), cyc.rbegin(), cyc.rend() - i);
        new_stem.insert(new_stem.end(), cyc.begin() + 1, cyc.begin() + i);
      } else {
        return reject("removed edge is not a non-root cycle edge at the pivot");
      }
      if (m == 0 && (i == 1 || i == k - 1)) return reject("added edge already present");
      new_cycle.insert(new_cycle.end(), stem.rbegin(), stem.rend() - 1);
      break;
    }
    case MoveKind::stem_ejection: {
      const auto pos = std::find(stem.begin(), stem.end(), mv.pivot);
      if (pos == stem.end()) return reject("pivot not on stem");
      const int i = static_cast<int>(pos - stem.begin());
      if (i + 2 > m || stem[i + 1] != mv.new_tip) return reject("bad stem pivot");
      new_cycle = cyc;
      new_stem.insert(new_stem.end(), stem.begin(), stem.begin() + i + 1);
      new_stem.insert(new_stem.end(), stem.rbegin(), stem.rend() - (i + 1));
      break;
    }
    case MoveKind::root_ejection: {
      if (mv.pivot != root || m < 2) return reject("bad root ejection");
      new_cycle = stem;
      new_stem.push_back(root);
      if (mv.new_tip == cyc[1]) {
        new_stem.insert(new_stem.end(), cyc.rbegin(), cyc.rend() - 1);
      } else if (mv.new_tip == cyc[k - 1]) {
        new_stem.insert(new_stem.end(), cyc.begin() + 1, cyc.end());
      } else {
        return reject("removed edge is not a root-subroot edge");
      }
      break;
    }
  }

  ConstraintState next = cs;
  next.deleted.insert(mv.removed);
  if (mv.color == EdgeColor::white) next.white.insert(mv.added);
  ++next.level;
  return {ScStructure(std::move(new_cycle), std::move(new_stem)), std::move(next)};
}

/// Tours reachable by closing the stem onto a subroot: add (tip, s), drop
/// (s, root). A degenerate structure yields only itself with value 0.
inline std::vector<TrialSolution> trial_solutions(const ScStructure& sc, const TspInstance& inst) {
  if (sc.is_degenerate()) return {TrialSolution{sc.as_tour(), 0, 0}};
  const auto cyc = sc.cycle();
  const auto stem = sc.stem();
  const NodeId tip = sc.tip();
  const NodeId root = sc.root();
  std::vector<TrialSolution> out;
  for (const NodeId s : {sc.subroot_left(), sc.subroot_right()}) {
    // tip is a stem node and s a cycle node, so (tip, s) is never already present
    TrialSolution trial;
    trial.subroot = s;
    trial.value = inst.weight_unchecked(tip, s) - inst.weight_unchecked(s, root);
    trial.tour.order.assign(stem.begin(), stem.end());
    if (s == sc.subroot_left()) trial.tour.order.insert(trial.tour.order.end(), cyc.begin() + 1, cyc.end());
    else trial.tour.order.insert(trial.tour.order.end(), cyc.rbegin(), cyc.rend() - 1);
    out.push_back(std::move(trial));
  }
  return out;
}

/// min(trialValue) without building the tours.
inline Weight min_trial_value(const ScStructure& sc, const TspInstance& inst) {
  if (sc.is_degenerate()) return 0;
  const NodeId tip = sc.tip(), root = sc.root();
  const NodeId a = sc.subroot_left(), b = sc.subroot_right();
  return std::min(inst.weight_unchecked(tip, a) - inst.weight_unchecked(a, root),
                  inst.weight_unchecked(tip, b) - inst.weight_unchecked(b, root));
}

}  // namespace stemcycle
