#pragma once

// Ejection-chain engines over the Stem-and-Cycle structure.
//
//   sec   - successor = argmin over Gamma of ejectionValue + min(trialValue);
//           chains repeat from the improved tour until one fails to improve.
//   isec  - one maximal chain; successor = argmin of the constrained 1-tree
//           bound f = g + h of the successor's constraint state.
//   fisec - isec that reuses the parent's 1-tree when the move provably
//           leaves it a valid bound for the child.

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stemcycle/instance.hpp"
#include "stemcycle/onetree.hpp"
#include "stemcycle/sc_structure.hpp"

namespace stemcycle {

/// A structural guarantee of the search was broken. Indicates a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Algo { sec, isec, fisec };
enum class ChainCap { full, half };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::sec: return "sec";
    case Algo::isec: return "isec";
    case Algo::fisec: return "fisec";
  }
  return "?";
}

inline std::optional<Algo> parse_algo(std::string_view s) {
  if (s == "sec") return Algo::sec;
  if (s == "isec") return Algo::isec;
  if (s == "fisec") return Algo::fisec;
  return std::nullopt;
}

inline const char* to_string(ChainCap c) { return c == ChainCap::full ? "full" : "half"; }

/// Maximum number of moves per chain: 2n (full) or n (half).
inline int chain_cap_levels(int n, ChainCap cap) { return cap == ChainCap::full ? 2 * n : n; }

struct SearchParams {
  Algo algo = Algo::isec;
  ChainCap chain_cap = ChainCap::full;
  std::uint64_t seed = 0;
  /// fisec only: false turns every evaluation into a fresh 1-tree build.
  bool reuse = true;
  /// fisec only: rebuild the 1-tree behind every reused bound and compare.
  bool shadow_check = false;
  /// Keep a full ChainLevel record (structures included) for each level.
  bool record_levels = false;
  /// isec / fisec: order candidates with equal f by nn_score before the
  /// lexicographic (added, removed) key. Black moves add no constraint, so
  /// without this most of a black level ties on f.
  bool nn_tie_break = true;
};

// ---------------------------------------------------------------------------
// Change classification for 1-tree reuse

enum class ChangeTag { C1i, C1ii, C2, C3i, C3ii, C4 };
enum class BoundAction { reuse, recompute };

inline const char* to_string(ChangeTag t) {
  constexpr const char* names[] = {"C1i", "C1ii", "C2", "C3i", "C3ii", "C4"};
  return names[static_cast<int>(t)];
}

struct ChangeCase {
  ChangeTag tag = ChangeTag::C4;
  BoundAction action = BoundAction::recompute;
  friend bool operator==(const ChangeCase&, const ChangeCase&) = default;
};

/// How a move (add e_a, delete e_d) relates to the parent's 1-tree.
/// Reuse is sound whenever e_d is outside the tree and e_a either adds no
/// constraint (black) or is already in it.
inline ChangeCase classify_change(const Edge& added, bool added_white, const Edge& removed,
                                  const ConstrainedOneTree& parent_tree) {
  const bool a_in = parent_tree.contains(added);
  const bool d_in = parent_tree.contains(removed);
  if (!a_in && !d_in)
    return added_white ? ChangeCase{ChangeTag::C1ii, BoundAction::recompute}
                       : ChangeCase{ChangeTag::C1i, BoundAction::reuse};
  if (!a_in) return {ChangeTag::C2, BoundAction::recompute};
  if (!d_in)
    return added_white ? ChangeCase{ChangeTag::C3i, BoundAction::reuse}
                       : ChangeCase{ChangeTag::C3ii, BoundAction::reuse};
  return {ChangeTag::C4, BoundAction::recompute};
}

// ---------------------------------------------------------------------------
// Statistics

struct ChainLevel {
  ScStructure structure;
  ConstraintState constraints;
  ScMove move_taken;
  Weight f_value = 0;   // isec / fisec
  Weight h_value = 0;   // isec / fisec
  Weight nn_value = 0;  // sec
  Provenance bound_provenance = Provenance::fresh;
  Tour best_trial_here;
  Weight best_trial_length = 0;
};

struct ChainSummary {
  NodeId root = 0;
  int expansions = 0;
  std::uint64_t generations = 0;
  Weight start_length = 0;
  Weight best_trial_length = 0;
  std::vector<Weight> f_values;  // chosen successor per level (isec / fisec)
  std::vector<Weight> h_values;
  std::vector<ChainLevel> levels;  // only with SearchParams::record_levels
};

/// Shadow comparison of reused bounds against fresh rebuilds (fisec).
struct ShadowReport {
  std::uint64_t checks = 0;
  std::uint64_t c1_checks = 0;
  std::uint64_t c1_mismatches = 0;  // reused f != recomputed f
  std::uint64_t c3_checks = 0;
  std::uint64_t c3_violations = 0;  // reused f > recomputed f
  std::uint64_t c3_strictly_lower = 0;
};

struct SearchOutcome {
  Tour best_tour;
  Weight best_length = 0;
  Weight start_length = 0;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t nodes_generated = 0;
  std::uint64_t onetrees_computed = 0;
  std::uint64_t onetrees_reused = 0;
  std::uint64_t chains_built = 0;
  std::uint64_t f_monotonicity_violations = 0;
  double wall_ms = 0;
  std::array<std::uint64_t, 6> change_counts{};  // indexed by ChangeTag
  ShadowReport shadow;
  std::vector<ChainSummary> chains;

  double reuse_fraction() const {
    const auto total = onetrees_computed + onetrees_reused;
    return total == 0 ? 0.0 : static_cast<double>(onetrees_reused) / static_cast<double>(total);
  }
};

// ---------------------------------------------------------------------------

/// SEC's successor score: ejectionValue + min(trialValue) of the resulting structure.
inline Weight nn_score(const TspInstance& inst, const ScStructure& after_move, const ScMove& move) {
  return move.ejection_value + min_trial_value(after_move, inst);
}

namespace detail {

inline constexpr std::uint64_t kSearchSeedSalt = 0x9E3779B97F4A7C15ull;

struct Incumbent {
  Tour tour;
  Weight length = 0;
};

/// Track the best trial tour of a structure whose own weight is known.
inline void offer_trials(const ScStructure& sc, Weight structure_weight, const TspInstance& inst,
                         Incumbent& best, ChainLevel* level) {
  std::optional<TrialSolution> here;
  for (auto& trial : trial_solutions(sc, inst))
    if (!here || trial.value < here->value) here = std::move(trial);
  const Weight len = structure_weight + here->value;
  if (level) {
    level->best_trial_here = here->tour;
    level->best_trial_length = len;
  }
  if (len < best.length) {
    best.tour = std::move(here->tour);
    best.length = len;
  }
}

inline void check_chain_bounds(const TspInstance& inst, const ChainSummary& chain, int cap) {
  const auto n = static_cast<std::uint64_t>(inst.n());
  if (chain.expansions > cap || chain.expansions > 2 * inst.n())
    throw InvariantViolation("chain expanded " + std::to_string(chain.expansions) + " nodes, cap " +
                             std::to_string(cap));
  if (chain.generations > 4 * n * n)
    throw InvariantViolation("chain generated " + std::to_string(chain.generations) + " nodes, bound 4n^2 = " +
                             std::to_string(4 * n * n));
}

inline void check_gamma(const TspInstance& inst, const std::vector<ScMove>& moves) {
  if (moves.size() > 2 * static_cast<std::size_t>(inst.n()))
    throw InvariantViolation("|Gamma| = " + std::to_string(moves.size()) + " exceeds 2n");
}

template <typename Fn>
double timed_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Repeated nearest-neighbour guided chains until one fails to improve.
inline SearchOutcome sec_search(const TspInstance& inst, const Tour& start, const SearchParams& params) {
  if (params.algo != Algo::sec) throw std::invalid_argument("sec_search: params.algo must be sec");
  SearchOutcome out;
  out.wall_ms = detail::timed_ms([&] {
    const int n = inst.n();
    const int cap = chain_cap_levels(n, params.chain_cap);
    Rng rng(params.seed ^ detail::kSearchSeedSalt);
    detail::Incumbent current{start, tour_length(inst, start)};
    out.start_length = current.length;

    for (;;) {
      ChainSummary chain;
      chain.root = static_cast<NodeId>(1 + rng.below(n));
      chain.start_length = current.length;
      ScStructure sc = from_tour(current.tour, chain.root);
      ConstraintState cs;
      Weight sc_weight = current.length;
      detail::Incumbent best = current;

      while (chain.expansions < cap) {
        const auto moves = generate_moves(sc, cs, inst);
        detail::check_gamma(inst, moves);
        std::optional<std::pair<ScStructure, ConstraintState>> chosen;
        const ScMove* chosen_move = nullptr;
        Weight chosen_score = 0;
        for (const ScMove& mv : moves) {
          auto next = apply_move(sc, cs, mv);
          ++chain.generations;
          const Weight score = nn_score(inst, next.first, mv);
          if (!chosen_move || score < chosen_score ||
              (score == chosen_score && mv.tie_key() < chosen_move->tie_key())) {
            chosen = std::move(next);
            chosen_move = &mv;
            chosen_score = score;
          }
        }
        if (!chosen_move) break;
        sc = std::move(chosen->first);
        cs = std::move(chosen->second);
        sc_weight += chosen_move->ejection_value;
        ++chain.expansions;
        ChainLevel* level = nullptr;
        if (params.record_levels) {
          ChainLevel rec{sc, cs, *chosen_move, 0, 0, chosen_score, Provenance::fresh, {}, 0};
          chain.levels.push_back(std::move(rec));
          level = &chain.levels.back();
        }
        detail::offer_trials(sc, sc_weight, inst, best, level);
      }

      detail::check_chain_bounds(inst, chain, cap);
      chain.best_trial_length = best.length;
      out.nodes_expanded += chain.expansions;
      out.nodes_generated += chain.generations;
      ++out.chains_built;
      out.chains.push_back(std::move(chain));
      if (best.length >= current.length) break;
      current = std::move(best);
    }
    out.best_tour = std::move(current.tour);
    out.best_length = current.length;
  });
  return out;
}

namespace detail {

/// Bound of one candidate successor. `tree` may alias the parent's tree.
struct Bound {
  std::shared_ptr<const ConstrainedOneTree> tree;
  CostSplit split;
  Provenance provenance = Provenance::fresh;
};

inline std::optional<Bound> fresh_bound(const TspInstance& inst, const ConstraintState& cs) {
  auto tree = constrained_one_tree(inst, cs.white, cs.deleted);
  if (!tree) return std::nullopt;
  Bound b;
  b.split = cost_split(inst, *tree, cs.white);
  b.tree = std::make_shared<const ConstrainedOneTree>(std::move(*tree));
  return b;
}

/// Shared body of isec and fisec: a single chain guided by the 1-tree bound.
inline SearchOutcome informed_chain(const TspInstance& inst, const Tour& start, const SearchParams& params,
                                    bool allow_reuse) {
  SearchOutcome out;
  out.wall_ms = timed_ms([&] {
    const int n = inst.n();
    const int cap = chain_cap_levels(n, params.chain_cap);
    Rng rng(params.seed ^ kSearchSeedSalt);
    out.start_length = tour_length(inst, start);

    ChainSummary chain;
    chain.root = static_cast<NodeId>(1 + rng.below(n));
    chain.start_length = out.start_length;
    ScStructure sc = from_tour(start, chain.root);
    ConstraintState cs;
    Weight sc_weight = out.start_length;
    Incumbent best{start, out.start_length};

    std::shared_ptr<const ConstrainedOneTree> parent_tree;
    if (allow_reuse) {
      auto root_bound = fresh_bound(inst, cs);
      ++out.onetrees_computed;
      if (root_bound) parent_tree = root_bound->tree;
    }

    std::optional<Weight> previous_f;
    while (chain.expansions < cap) {
      const auto moves = generate_moves(sc, cs, inst);
      check_gamma(inst, moves);

      struct Candidate {
        ScStructure sc;
        ConstraintState cs;
        const ScMove* move;
        Bound bound;
        Weight secondary;
      };
      std::optional<Candidate> chosen;
      for (const ScMove& mv : moves) {
        auto [next_sc, next_cs] = apply_move(sc, cs, mv);
        ++chain.generations;

        std::optional<Bound> bound;
        bool reused = false;
        if (parent_tree) {
          const ChangeCase change = classify_change(mv.added, mv.color == EdgeColor::white, mv.removed, *parent_tree);
          ++out.change_counts[static_cast<int>(change.tag)];
          if (change.action == BoundAction::reuse) {
            reused = true;
            bound = Bound{parent_tree, {}, Provenance::reused_from_parent};
            // Re-label so that g carries every white edge, including a newly white e_a.
            bound->split = cost_split(inst, *parent_tree, next_cs.white);
            ++out.onetrees_reused;
          }
          if (reused && params.shadow_check) {
            auto shadow = constrained_one_tree(inst, next_cs.white, next_cs.deleted);
            auto& rep = out.shadow;
            ++rep.checks;
            const Weight fresh_f = shadow ? shadow->total_weight : std::numeric_limits<Weight>::max();
            const Weight reused_f = bound->split.f();
            if (change.tag == ChangeTag::C1i) {
              ++rep.c1_checks;
              if (reused_f != fresh_f) ++rep.c1_mismatches;
            } else {
              ++rep.c3_checks;
              if (reused_f > fresh_f) ++rep.c3_violations;
              if (reused_f < fresh_f) ++rep.c3_strictly_lower;
            }
          }
        }
        if (!reused) {
          bound = fresh_bound(inst, next_cs);
          ++out.onetrees_computed;
        }
        if (!bound) continue;  // infeasible successor: not legitimate

        const Weight f = bound->split.f();
        const Weight secondary = params.nn_tie_break ? nn_score(inst, next_sc, mv) : 0;
        const bool better = !chosen || [&] {
          const Weight cf = chosen->bound.split.f();
          if (f != cf) return f < cf;
          if (secondary != chosen->secondary) return secondary < chosen->secondary;
          return mv.tie_key() < chosen->move->tie_key();
        }();
        if (better) chosen = Candidate{std::move(next_sc), std::move(next_cs), &mv, std::move(*bound), secondary};
      }
      if (!chosen) break;

      const Weight f = chosen->bound.split.f();
      if (previous_f && f < *previous_f) ++out.f_monotonicity_violations;
      previous_f = f;

      sc = std::move(chosen->sc);
      cs = std::move(chosen->cs);
      sc_weight += chosen->move->ejection_value;
      if (allow_reuse) {
        if (chosen->bound.provenance == Provenance::reused_from_parent) {
          auto relabelled = std::make_shared<ConstrainedOneTree>(*chosen->bound.tree);
          relabelled->provenance = Provenance::reused_from_parent;
          relabelled->white_weight = chosen->bound.split.g;
          relabelled->nonwhite_weight = chosen->bound.split.h;
          parent_tree = std::move(relabelled);
        } else {
          parent_tree = chosen->bound.tree;
        }
      }
      ++chain.expansions;
      chain.f_values.push_back(f);
      chain.h_values.push_back(chosen->bound.split.h);

      ChainLevel* level = nullptr;
      if (params.record_levels) {
        ChainLevel rec{sc, cs, *chosen->move, f, chosen->bound.split.h, 0, chosen->bound.provenance, {}, 0};
        chain.levels.push_back(std::move(rec));
        level = &chain.levels.back();
      }
      offer_trials(sc, sc_weight, inst, best, level);
    }

    check_chain_bounds(inst, chain, cap);
    chain.best_trial_length = best.length;
    out.nodes_expanded = chain.expansions;
    out.nodes_generated = chain.generations;
    out.chains_built = 1;
    out.chains.push_back(std::move(chain));
    out.best_tour = std::move(best.tour);
    out.best_length = best.length;
  });
  return out;
}

}  // namespace detail

/// One maximal chain; every candidate's bound is a fresh constrained 1-tree.
inline SearchOutcome isec_chain(const TspInstance& inst, const Tour& start, const SearchParams& params) {
  if (params.algo != Algo::isec) throw std::invalid_argument("isec_chain: params.algo must be isec");
  return detail::informed_chain(inst, start, params, false);
}

/// isec with parent 1-tree reuse. With params.reuse == false it is isec.
inline SearchOutcome fisec_chain(const TspInstance& inst, const Tour& start, const SearchParams& params) {
  if (params.algo != Algo::fisec) throw std::invalid_argument("fisec_chain: params.algo must be fisec");
  return detail::informed_chain(inst, start, params, params.reuse);
}

inline SearchOutcome run_search(const TspInstance& inst, const Tour& start, const SearchParams& params) {
  if (!is_valid_tour(start, inst.n())) throw std::invalid_argument("start tour is not a permutation of 1..n");
  switch (params.algo) {
    case Algo::sec: return sec_search(inst, start, params);
    case Algo::isec: return isec_chain(inst, start, params);
    case Algo::fisec: return fisec_chain(inst, start, params);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace stemcycle
