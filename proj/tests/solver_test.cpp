#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include <dpdt/solver.hpp>

#include "support.hpp"

namespace dpdt {
namespace {

DpdtConfig cart_config(std::size_t depth, std::size_t budget, double alpha = 0.0) {
  DpdtConfig c;
  c.max_depth = depth;
  c.alpha = alpha;
  c.generator = GeneratorSpec::cart_call(std::vector<std::size_t>(depth, budget));
  return c;
}

TEST(SolveState, PureStateIsAZeroValueLeaf) {
  Dataset d({1, 2, 3}, 1, {1, 1, 1}, 2);
  OpsCounter ops;
  for (std::size_t depth : {0u, 1u, 2u}) {
    StateValue v = solve_state(SampleView(d), depth, cart_config(2, 2), ops);
    EXPECT_TRUE(v.is_leaf());
    EXPECT_EQ(std::get<ClassIndex>(v.action), 1u);
    EXPECT_EQ(v.value, 0.0);
  }
}

TEST(SolveState, HorizonForcesALeaf) {
  Dataset d({1, 2, 3, 4}, 1, {0, 1, 0, 1}, 2);
  OpsCounter ops;
  StateValue v = solve_state(SampleView(d), 2, cart_config(2, 4), ops);
  EXPECT_TRUE(v.is_leaf());
  EXPECT_EQ(v.value, -0.5);
  EXPECT_EQ(ops.states_expanded(), 0u);
}

TEST(SolveState, XorRootSplitReachesZeroLoss) {
  Dataset d = generate_xor(10000, 15);
  OpsCounter ops;
  StateValue v = solve_state(SampleView(d), 0, cart_config(2, 2), ops);
  ASSERT_FALSE(v.is_leaf());
  EXPECT_EQ(v.value, 0.0);
  EXPECT_EQ(std::get<Split>(v.action).feature, 0u);
  EXPECT_LT(std::abs(std::get<Split>(v.action).threshold - 0.5), 1e-3);
}

TEST(SolveState, ValueRecursionInvariants) {
  Dataset d = testing::random_dataset(7, 120, 3, 3);
  OpsCounter ops;
  const double alpha = 0.01;
  DpdtConfig c = cart_config(3, 3, alpha);
  std::function<void(const StateValue&, const SampleView&, std::size_t)> check = [&](const StateValue& v,
                                                                                    const SampleView& view,
                                                                                    std::size_t depth) {
    if (depth == c.max_depth) {
      EXPECT_TRUE(v.is_leaf());
    }
    if (v.is_leaf()) {
      EXPECT_GE(v.value, -1.0);
      EXPECT_LE(v.value, 0.0);
      auto masses = view.class_masses();
      EXPECT_DOUBLE_EQ(v.value, -(1.0 - masses[std::get<ClassIndex>(v.action)] / view.mass()));
      return;
    }
    Partition part = partition(view, std::get<Split>(v.action));
    EXPECT_DOUBLE_EQ(v.p_left, part.p_left);
    EXPECT_NEAR(v.value, -alpha + part.p_left * v.children[0].value + part.p_right() * v.children[1].value, 1e-12);
    check(v.children[0], part.left, depth + 1);
    check(v.children[1], part.right, depth + 1);
  };
  SampleView root(d);
  check(solve_state(root, 0, c, ops), root, 0);
}

TEST(FitDpdt, DepthZeroIsMajorityLeaf) {
  Dataset d({1, 2, 3, 4, 5}, 1, {0, 1, 1, 0, 1}, 2);
  DpdtConfig c;
  c.max_depth = 0;
  c.generator = GeneratorSpec::cart_call({});
  DpdtResult r = fit_dpdt(d, c);
  EXPECT_TRUE(r.tree.is_leaf());
  EXPECT_EQ(r.tree.root().klass, 1u);
  EXPECT_DOUBLE_EQ(r.j_alpha, -0.4);
}

TEST(FitDpdt, BudgetOneReproducesGreedy) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset d = testing::random_dataset(seed, 100, 3, 2 + seed % 2);
    for (std::size_t depth = 1; depth <= 4; ++depth) {
      DpdtConfig c = cart_config(depth, 1);
      c.tie_break = TieBreak::prefer_split;
      GreedyConfig g;
      g.max_depth = depth;
      Tree greedy = fit_greedy(d, g);
      EXPECT_EQ(fit_dpdt(d, c).tree, greedy) << "seed " << seed << " depth " << depth;
      // Under the default tie-break the tree may drop loss-neutral splits but
      // its loss is unchanged.
      c.tie_break = TieBreak::prefer_leaf;
      DpdtResult leafy = fit_dpdt(d, c);
      EXPECT_EQ(accuracy(leafy.tree, d), accuracy(greedy, d));
      EXPECT_LE(leafy.tree.internal_count(), greedy.internal_count());
    }
  }
}

TEST(FitDpdt, ReturnEqualsNegatedRegularizedLoss) {
  SplitMix64 rng(99);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Dataset d = testing::random_dataset(seed, 100, 3, 2 + seed % 2);
    std::vector<double> w(d.size());
    for (double& x : w) x = rng.uniform();
    for (double alpha : {0.0, 0.01, 0.1}) {
      for (const SampleView& v : {SampleView(d), SampleView(d, w)}) {
        for (auto gen : {GeneratorSpec::cart_call({4, 2, 1}), GeneratorSpec::top_b({3, 3, 3})}) {
          DpdtConfig c;
          c.max_depth = 3;
          c.alpha = alpha;
          c.generator = gen;
          DpdtResult r = fit_dpdt(v, c);
          EXPECT_LT(std::abs(r.j_alpha + regularized_loss(r.tree, v, alpha)), 1e-12);
          EXPECT_LE(r.tree.depth(), 3u);
        }
      }
    }
  }
}

TEST(FitDpdt, NeverWorseThanGreedy) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset d = testing::random_dataset(seed + 100, 100, 3, 2 + seed % 2);
    for (double alpha : {0.0, 0.01, 0.1})
      for (std::size_t depth = 1; depth <= 3; ++depth) {
        GreedyConfig g;
        g.max_depth = depth;
        double greedy = regularized_loss(fit_greedy(d, g), SampleView(d), alpha);
        for (std::size_t b : {1u, 2u, 3u}) {
          DpdtResult r = fit_dpdt(d, cart_config(depth, b, alpha));
          EXPECT_LE(-r.j_alpha, greedy + 1e-12);
        }
      }
  }
}

TEST(FitDpdt, ExhaustiveMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Dataset d = testing::random_dataset(seed + 500, 12, 2, 2);
    for (double alpha : {0.0, 0.05}) {
      DpdtConfig c;
      c.max_depth = 2;
      c.alpha = alpha;
      c.generator = GeneratorSpec::exhaustive();
      DpdtResult r = fit_dpdt(d, c);
      double brute = testing::brute_force_min_loss_depth2(d, alpha);
      if (alpha == 0.0)
        EXPECT_EQ(-r.j_alpha, brute);
      else
        EXPECT_NEAR(-r.j_alpha, brute, 1e-12);
    }
  }
}

TEST(FitDpdt, LargerTopBBudgetsNeverHurt) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset d = testing::random_dataset(seed + 40, 80, 3, 3);
    for (double alpha : {0.0, 0.02}) {
      double previous = std::numeric_limits<double>::infinity();
      for (std::size_t b : {1u, 2u, 4u, 8u}) {
        DpdtConfig c;
        c.max_depth = 2;
        c.alpha = alpha;
        c.generator = GeneratorSpec::top_b({b, b});
        double loss = -fit_dpdt(d, c).j_alpha;
        EXPECT_LE(loss, previous + 1e-12);
        previous = loss;
      }
      DpdtConfig ex;
      ex.max_depth = 2;
      ex.alpha = alpha;
      ex.generator = GeneratorSpec::exhaustive();
      double exhaustive = -fit_dpdt(d, ex).j_alpha;
      EXPECT_LE(exhaustive, previous + 1e-12);
      EXPECT_LE(exhaustive, -fit_dpdt(d, cart_config(2, 4, alpha)).j_alpha + 1e-12);
    }
  }
}

TEST(FitDpdt, PreferLeafDropsUselessSplits) {
  // No single split changes the 0-1 loss: class 0 stays the majority on both sides.
  Dataset d({1, 2, 3, 4, 5, 6}, 1, {0, 0, 1, 0, 0, 0}, 2);
  DpdtConfig c;
  c.max_depth = 1;
  c.generator = GeneratorSpec::exhaustive();
  DpdtResult leafy = fit_dpdt(d, c);
  EXPECT_TRUE(leafy.tree.is_leaf());
  c.tie_break = TieBreak::prefer_split;
  DpdtResult splitty = fit_dpdt(d, c);
  EXPECT_FALSE(splitty.tree.is_leaf());
  EXPECT_EQ(splitty.j_alpha, leafy.j_alpha);
  EXPECT_DOUBLE_EQ(leafy.j_alpha, -1.0 / 6.0);
}

TEST(FitDpdt, ParallelRootMatchesSequential) {
  Dataset d = testing::random_dataset(77, 300, 4, 3);
  DpdtConfig c;
  c.max_depth = 3;
  c.alpha = 0.001;
  c.generator = GeneratorSpec::cart_call({8, 3, 1});
  DpdtResult seq = fit_dpdt(d, c);
  c.threads = 4;
  DpdtResult par = fit_dpdt(d, c);
  EXPECT_EQ(par.tree, seq.tree);
  EXPECT_EQ(par.j_alpha, seq.j_alpha);
  EXPECT_EQ(par.ops.candidate_splits_generated(), seq.ops.candidate_splits_generated());
  EXPECT_EQ(par.ops.states_expanded(), seq.ops.states_expanded());
}

TEST(FitDpdt, ConfigValidation) {
  Dataset d({1, 2}, 1, {0, 1}, 2);
  DpdtConfig c = cart_config(2, 2);
  c.alpha = 1.5;
  EXPECT_THROW(fit_dpdt(d, c), std::invalid_argument);
  c = cart_config(2, 2);
  c.generator.budgets = {2};
  EXPECT_THROW(fit_dpdt(d, c), std::invalid_argument);
}

}  // namespace
}  // namespace dpdt
