#include <gtest/gtest.h>

#include "test_support.hpp"

namespace sc = stemcycle;
using sc::Algo;
using sc::Edge;
using sc::testing::t5;

namespace {

sc::SearchParams params_for(Algo algo, std::uint64_t seed = 1) {
  sc::SearchParams p;
  p.algo = algo;
  p.seed = seed;
  return p;
}

sc::TspInstance scaled(const sc::TspInstance& inst, sc::Weight factor) {
  const int n = inst.n();
  std::vector<sc::Weight> m(static_cast<std::size_t>(n) * n, 0);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      if (i != j) m[static_cast<std::size_t>(i - 1) * n + (j - 1)] = inst.weight(i, j) * factor;
  return sc::TspInstance(inst.name(), n, std::move(m));
}

std::vector<std::size_t> nn_argmin(const sc::TspInstance& inst, const sc::ScStructure& s, const sc::ConstraintState& cs) {
  const auto moves = sc::generate_moves(s, cs, inst);
  std::vector<sc::Weight> scores;
  for (const auto& mv : moves) scores.push_back(sc::nn_score(inst, sc::apply_move(s, cs, mv).first, mv));
  std::vector<std::size_t> arg;
  if (scores.empty()) return arg;
  const auto best = *std::min_element(scores.begin(), scores.end());
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (scores[k] == best) arg.push_back(k);
  return arg;
}

sc::ConstrainedOneTree tree_with(std::vector<Edge> edges) {
  sc::ConstrainedOneTree t;
  std::sort(edges.begin(), edges.end());
  t.edges = std::move(edges);
  return t;
}

}  // namespace

TEST(NnScore, T5HandTrace) {
  const auto inst = t5();
  const auto s0 = sc::from_tour(sc::Tour{{1, 2, 3, 4, 5}}, 1);
  for (const auto& mv : sc::generate_moves(s0, {}, inst)) {
    if (mv.added != Edge(1, 3) || mv.removed != Edge(2, 3)) continue;
    const auto s1 = sc::apply_move(s0, {}, mv).first;
    EXPECT_EQ(sc::nn_score(inst, s1, mv), 0);
    return;
  }
  FAIL() << "move not generated";
}

TEST(NnScore, DegenerateStructureScoresEjectionValue) {
  const auto inst = t5();
  const auto s = sc::from_tour(sc::Tour{{1, 2, 3, 4, 5}}, 1);
  sc::ScMove mv{};
  mv.ejection_value = 7;
  EXPECT_EQ(sc::nn_score(inst, s, mv), 7);
}

// Every move adds an edge at the tip and drops one that keeps a stem of at
// least one edge, so no successor is degenerate.
TEST(NnScore, SuccessorsAreNeverDegenerate) {
  sc::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = sc::testing::random_matrix_instance(8, rng);
    const auto st = sc::testing::random_reachable_state(inst, rng, static_cast<int>(rng.below(10)));
    for (const auto& mv : sc::generate_moves(st.sc, st.cs, inst))
      EXPECT_FALSE(sc::apply_move(st.sc, st.cs, mv).first.is_degenerate());
  }
}

TEST(NnScore, ArgminInvariantUnderScaling) {
  sc::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = sc::testing::random_matrix_instance(8, rng);
    const auto big = scaled(inst, 7);
    const auto st = sc::testing::random_reachable_state(inst, rng, static_cast<int>(rng.below(8)));
    EXPECT_EQ(nn_argmin(inst, st.sc, st.cs), nn_argmin(big, st.sc, st.cs));
  }
}

TEST(ClassifyChange, AllCases) {
  const auto parent = tree_with({{1, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6}, {2, 5}});
  const Edge in1(2, 4), in2(3, 5), out1(4, 5), out2(3, 6);
  using sc::BoundAction;
  using sc::ChangeTag;
  EXPECT_EQ(sc::classify_change(out1, false, out2, parent), (sc::ChangeCase{ChangeTag::C1i, BoundAction::reuse}));
  EXPECT_EQ(sc::classify_change(out1, true, out2, parent), (sc::ChangeCase{ChangeTag::C1ii, BoundAction::recompute}));
  EXPECT_EQ(sc::classify_change(out1, false, in1, parent), (sc::ChangeCase{ChangeTag::C2, BoundAction::recompute}));
  EXPECT_EQ(sc::classify_change(out1, true, in1, parent), (sc::ChangeCase{ChangeTag::C2, BoundAction::recompute}));
  EXPECT_EQ(sc::classify_change(in1, true, out2, parent), (sc::ChangeCase{ChangeTag::C3i, BoundAction::reuse}));
  EXPECT_EQ(sc::classify_change(in1, false, out2, parent), (sc::ChangeCase{ChangeTag::C3ii, BoundAction::reuse}));
  EXPECT_EQ(sc::classify_change(in1, false, in2, parent), (sc::ChangeCase{ChangeTag::C4, BoundAction::recompute}));
  EXPECT_STREQ(sc::to_string(ChangeTag::C3ii), "C3ii");
}

TEST(Algo, ParseRoundTrip) {
  for (Algo a : {Algo::sec, Algo::isec, Algo::fisec}) EXPECT_EQ(sc::parse_algo(sc::to_string(a)), a);
  EXPECT_FALSE(sc::parse_algo("lk"));
  EXPECT_EQ(sc::chain_cap_levels(10, sc::ChainCap::full), 20);
  EXPECT_EQ(sc::chain_cap_levels(10, sc::ChainCap::half), 10);
}

TEST(Sec, NeverWorsensT5) {
  const auto inst = t5();
  const sc::Tour start{{1, 2, 3, 4, 5}};
  ASSERT_EQ(sc::tour_length(inst, start), 20);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto out = sc::run_search(inst, start, params_for(Algo::sec, seed));
    EXPECT_LE(out.best_length, 20);
    EXPECT_GE(out.best_length, sc::held_karp_optimal(inst).second);
    EXPECT_EQ(sc::tour_length(inst, out.best_tour), out.best_length);
  }
}

TEST(Sec, LocalMinimumBaseCase) {
  // Uniform weights: every tour is optimal, so no chain can improve.
  const sc::TspInstance inst("flat", 7, std::vector<sc::Weight>(49, 4));
  const sc::Tour start{{3, 1, 7, 2, 6, 5, 4}};
  const auto out = sc::run_search(inst, start, params_for(Algo::sec, 5));
  EXPECT_EQ(out.best_tour.order, start.order);
  EXPECT_EQ(out.best_length, 28);
  EXPECT_EQ(out.chains_built, 1u);
}

TEST(Sec, IncumbentStrictlyDecreasesAcrossChains) {
  sc::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = sc::testing::random_euclid_instance(30, rng);
    const auto out = sc::run_search(inst, sc::random_start_tour(inst, rng), params_for(Algo::sec, trial));
    ASSERT_GE(out.chains.size(), 1u);
    for (std::size_t k = 1; k < out.chains.size(); ++k)
      EXPECT_LT(out.chains[k].start_length, out.chains[k - 1].start_length);
    // the last chain failed to improve
    EXPECT_GE(out.chains.back().best_trial_length, out.chains.back().start_length);
    EXPECT_EQ(out.best_length, out.chains.back().start_length);
    const auto cap = static_cast<std::uint64_t>(sc::chain_cap_levels(30, sc::ChainCap::full));
    EXPECT_LE(out.nodes_expanded, out.chains_built * cap);
  }
}

TEST(Search, AllAlgorithmsReturnValidImprovingTours) {
  sc::Rng rng(4);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(30));
    const auto inst = sc::testing::random_euclid_instance(n, rng);
    const auto start = sc::random_start_tour(inst, rng);
    for (Algo a : {Algo::sec, Algo::isec, Algo::fisec}) {
      const auto out = sc::run_search(inst, start, params_for(a, trial));
      ASSERT_TRUE(sc::is_valid_tour(out.best_tour, n));
      EXPECT_EQ(sc::tour_length(inst, out.best_tour), out.best_length);
      EXPECT_LE(out.best_length, out.start_length);
      EXPECT_EQ(out.start_length, sc::tour_length(inst, start));
    }
  }
}

TEST(Search, RejectsBadStartAndMismatchedAlgo) {
  const auto inst = t5();
  EXPECT_THROW(sc::run_search(inst, sc::Tour{{1, 2, 3}}, params_for(Algo::isec)), std::invalid_argument);
  EXPECT_THROW(sc::isec_chain(inst, sc::Tour{{1, 2, 3, 4, 5}}, params_for(Algo::sec)), std::invalid_argument);
  EXPECT_THROW(sc::fisec_chain(inst, sc::Tour{{1, 2, 3, 4, 5}}, params_for(Algo::isec)), std::invalid_argument);
}

TEST(Isec, StructuralBounds) {
  sc::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + static_cast<int>(rng.below(30));
    const auto inst = sc::testing::random_euclid_instance(n, rng);
    const auto start = sc::random_start_tour(inst, rng);
    for (auto cap : {sc::ChainCap::full, sc::ChainCap::half}) {
      auto p = params_for(Algo::isec, trial);
      p.chain_cap = cap;
      const auto out = sc::run_search(inst, start, p);
      ASSERT_EQ(out.chains.size(), 1u);
      EXPECT_LE(out.nodes_expanded, static_cast<std::uint64_t>(sc::chain_cap_levels(n, cap)));
      EXPECT_LE(out.nodes_generated, 4ull * n * n);
      EXPECT_EQ(out.onetrees_reused, 0u);
      EXPECT_EQ(out.onetrees_computed, out.nodes_generated);
    }
  }
}

TEST(Isec, FNonDecreasingAlongChain) {
  sc::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = sc::testing::random_matrix_instance(9, rng);
    const auto out = sc::run_search(inst, sc::random_start_tour(inst, rng), params_for(Algo::isec, trial));
    const auto& f = out.chains.front().f_values;
    for (std::size_t k = 1; k < f.size(); ++k) EXPECT_GE(f[k], f[k - 1]) << "trial " << trial << " level " << k;
    EXPECT_EQ(out.f_monotonicity_violations, 0u);
  }
}

// f at a chosen level never exceeds the cheapest tour consistent with that
// level's white and tabu sets.
TEST(Isec, FBelowEveryConsistentTour) {
  sc::Rng rng(14);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(3));
    const auto inst = sc::testing::random_matrix_instance(n, rng);
    auto p = params_for(Algo::isec, trial);
    p.record_levels = true;
    const auto out = sc::run_search(inst, sc::random_start_tour(inst, rng), p);
    for (const auto& level : out.chains.front().levels) {
      const auto best = sc::testing::best_consistent_tour(inst, level.constraints.white, level.constraints.deleted);
      if (!best) continue;
      ++checked;
      EXPECT_LE(level.f_value, *best);
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Fisec, ShadowCheckFindsNoViolations) {
  sc::Rng rng(15);
  std::uint64_t checks = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = sc::testing::random_euclid_instance(25, rng);
    auto p = params_for(Algo::fisec, trial);
    p.shadow_check = true;
    const auto out = sc::run_search(inst, sc::random_start_tour(inst, rng), p);
    EXPECT_EQ(out.shadow.c1_mismatches, 0u);
    EXPECT_EQ(out.shadow.c3_violations, 0u);
    EXPECT_EQ(out.shadow.checks, out.onetrees_reused);
    checks += out.shadow.checks;
  }
  EXPECT_GT(checks, 100u);
}

TEST(Fisec, WithoutReuseIsIsec) {
  sc::Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = sc::testing::random_euclid_instance(20, rng);
    const auto start = sc::random_start_tour(inst, rng);
    auto pf = params_for(Algo::fisec, trial);
    pf.reuse = false;
    const auto a = sc::run_search(inst, start, params_for(Algo::isec, trial));
    const auto b = sc::run_search(inst, start, pf);
    EXPECT_EQ(a.best_tour.order, b.best_tour.order);
    EXPECT_EQ(a.best_length, b.best_length);
    EXPECT_EQ(a.nodes_expanded, b.nodes_expanded);
    EXPECT_EQ(a.nodes_generated, b.nodes_generated);
    EXPECT_EQ(a.onetrees_computed, b.onetrees_computed);
    EXPECT_EQ(b.onetrees_reused, 0u);
    EXPECT_EQ(a.chains.front().f_values, b.chains.front().f_values);
  }
}

// The builder is exact, so a reused bound is the bound a rebuild would give
// and fisec follows the same chain as isec with fewer rebuilds.
TEST(Fisec, SameChainFewerBuilds) {
  sc::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = sc::testing::random_euclid_instance(30, rng);
    const auto start = sc::random_start_tour(inst, rng);
    const auto a = sc::run_search(inst, start, params_for(Algo::isec, trial));
    const auto b = sc::run_search(inst, start, params_for(Algo::fisec, trial));
    EXPECT_EQ(a.chains.front().f_values, b.chains.front().f_values);
    EXPECT_EQ(a.best_length, b.best_length);
    EXPECT_GT(b.onetrees_reused, 0u);
    // one extra build for the root state's tree
    EXPECT_EQ(b.onetrees_reused + b.onetrees_computed, b.nodes_generated + 1);
    EXPECT_LT(b.onetrees_computed, a.onetrees_computed);
    EXPECT_GT(b.reuse_fraction(), 0.0);
  }
}

TEST(Search, Deterministic) {
  sc::Rng rng(18);
  const auto inst = sc::testing::random_euclid_instance(40, rng);
  const auto start = sc::random_start_tour(inst, rng);
  for (Algo a : {Algo::sec, Algo::isec, Algo::fisec}) {
    const auto x = sc::run_search(inst, start, params_for(a, 99));
    const auto y = sc::run_search(inst, start, params_for(a, 99));
    EXPECT_EQ(x.best_tour.order, y.best_tour.order);
    EXPECT_EQ(x.nodes_expanded, y.nodes_expanded);
    EXPECT_EQ(x.nodes_generated, y.nodes_generated);
    EXPECT_EQ(x.onetrees_computed, y.onetrees_computed);
    EXPECT_EQ(x.onetrees_reused, y.onetrees_reused);
    EXPECT_EQ(x.change_counts, y.change_counts);
    EXPECT_EQ(x.chains_built, y.chains_built);
  }
}

TEST(Search, RecordedLevelsAreConsistent) {
  sc::Rng rng(19);
  const auto inst = sc::testing::random_euclid_instance(15, rng);
  auto p = params_for(Algo::fisec, 3);
  p.record_levels = true;
  const auto out = sc::run_search(inst, sc::random_start_tour(inst, rng), p);
  const auto& chain = out.chains.front();
  ASSERT_EQ(chain.levels.size(), static_cast<std::size_t>(chain.expansions));
  sc::Weight best = chain.start_length;
  for (std::size_t k = 0; k < chain.levels.size(); ++k) {
    const auto& lv = chain.levels[k];
    EXPECT_FALSE(sc::testing::structure_violation(lv.structure, 15));
    EXPECT_EQ(lv.f_value, chain.f_values[k]);
    EXPECT_EQ(lv.constraints.level, static_cast<int>(k) + 2);
    EXPECT_EQ(sc::tour_length(inst, lv.best_trial_here), lv.best_trial_length);
    const auto tree = sc::constrained_one_tree(inst, lv.constraints.white, lv.constraints.deleted);
    ASSERT_TRUE(tree);
    EXPECT_EQ(tree->total_weight, lv.f_value);
    best = std::min(best, lv.best_trial_length);
  }
  EXPECT_EQ(out.best_length, best);
}
