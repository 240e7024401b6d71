#include <gtest/gtest.h>

#include <dpdt/boosting.hpp>

#include "support.hpp"

namespace dpdt {
namespace {

GreedyConfig stumps() {
  GreedyConfig g;
  g.max_depth = 1;
  return g;
}

TEST(FitAdaboost, PerfectFirstLearnerStopsEarly) {
  Dataset d({1, 2, 3, 4, 5, 6}, 1, {0, 0, 0, 1, 1, 1}, 2);
  BoostResult r = fit_adaboost(d, stumps(), 10);
  EXPECT_EQ(r.rounds_completed(), 1u);
  EXPECT_EQ(r.stop, BoostStop::perfect_learner);
  EXPECT_DOUBLE_EQ(r.ensemble.members[0].beta, std::log(1e12));
  EXPECT_EQ(ensemble_accuracy(r.ensemble, d), 1.0);
}

TEST(FitAdaboost, ChanceLevelLearnerEndsTheLoop) {
  // Round 1 leaf errs on 1/4; reweighting balances the classes, so the round 2
  // leaf sits at 0.5 error and is discarded.
  Dataset d({1, 2, 3, 4}, 1, {0, 0, 0, 1}, 2);
  GreedyConfig leaf;
  leaf.max_depth = 0;
  BoostResult r = fit_adaboost(d, leaf, 5);
  ASSERT_EQ(r.rounds.size(), 2u);
  EXPECT_EQ(r.rounds_completed(), 1u);
  EXPECT_NEAR(r.rounds[1].weighted_error, 0.5, 1e-12);
  EXPECT_FALSE(r.rounds[1].retained);
  EXPECT_EQ(r.rounds[1].beta, 0.0);
  EXPECT_EQ(r.stop, BoostStop::no_better_than_chance);
  EXPECT_DOUBLE_EQ(r.ensemble.members[0].beta, std::log(3.0));
}

TEST(FitAdaboost, BalancedDataWithLeafLearnerCannotStart) {
  Dataset d({1, 2}, 1, {0, 1}, 2);
  GreedyConfig leaf;
  leaf.max_depth = 0;
  EXPECT_THROW(fit_adaboost(d, leaf, 3), std::domain_error);
}

TEST(FitAdaboost, WeightsStayADistributionAndMembersBeatChance) {
  Dataset d = generate_checkerboard(600, 3, 4);
  DpdtConfig weak;
  weak.max_depth = 2;
  weak.generator = GeneratorSpec::cart_call({2, 2});
  BoostResult r = fit_adaboost(d, weak, 20, 0.5);
  for (const auto& round : r.rounds) {
    if (!round.retained) continue;
    EXPECT_NEAR(round.weight_sum, 1.0, 1e-9);
    EXPECT_LT(round.weighted_error, 0.5);
  }
}

TEST(FitAdaboost, StumpsSeparateOneDimensionalData) {
  SplitMix64 rng(1);
  std::vector<double> x;
  std::vector<ClassIndex> y;
  for (int i = 0; i < 100; ++i) {
    double v = rng.uniform();
    x.push_back(v);
    y.push_back(v > 0.37 ? 1 : 0);
  }
  Dataset d(x, 1, y, 2);
  BoostResult r = fit_adaboost(d, stumps(), 10);
  EXPECT_LE(r.rounds.size(), 10u);
  EXPECT_EQ(ensemble_accuracy(r.ensemble, d), 1.0);
}

TEST(FitAdaboost, OneRoundEqualsSingleWeakFit) {
  Dataset d = generate_checkerboard(500, 3, 9);
  DpdtConfig weak;
  weak.max_depth = 2;
  weak.generator = GeneratorSpec::cart_call({2, 2});
  BoostResult r = fit_adaboost(d, weak, 1);
  EXPECT_EQ(ensemble_accuracy(r.ensemble, d), accuracy(fit_dpdt(d, weak).tree, d));
}

TEST(FitAdaboost, Preconditions) {
  Dataset d({1, 2}, 1, {0, 1}, 2);
  EXPECT_THROW(fit_adaboost(d, stumps(), 0), std::invalid_argument);
  EXPECT_THROW(fit_adaboost(d, stumps(), 3, 0.0), std::invalid_argument);
  EXPECT_THROW(fit_adaboost(d, stumps(), 3, 1.5), std::invalid_argument);
  Dataset one({1, 2}, 1, {0, 0}, 1);
  EXPECT_THROW(fit_adaboost(one, stumps(), 3), std::invalid_argument);
}

Ensemble two_members(double b0, double b1) {
  Ensemble e;
  e.class_count = 2;
  e.members.push_back({Tree::leaf(1), b0});
  e.members.push_back({Tree::leaf(0), b1});
  return e;
}

TEST(PredictEnsemble, Votes) {
  std::vector<double> x{0.3};
  Tree stump = Tree::internal({0, 0.5}, Tree::leaf(1), Tree::leaf(0));
  Ensemble one;
  one.class_count = 2;
  one.members.push_back({stump, 0.7});
  EXPECT_EQ(predict_ensemble(one, x), predict(stump, x));
  EXPECT_EQ(predict_ensemble(two_members(1.0, 1.0), x), 0u);
  EXPECT_EQ(predict_ensemble(two_members(2.0, 1.0), x), 1u);
  Ensemble agree;
  agree.class_count = 3;
  for (double b : {0.1, 5.0, 0.01}) agree.members.push_back({Tree::leaf(2), b});
  EXPECT_EQ(predict_ensemble(agree, x), 2u);
}

TEST(Ensemble, SerializationRoundTrip) {
  Dataset d = generate_checkerboard(300, 3, 2);
  GreedyConfig g;
  g.max_depth = 2;
  BoostResult r = fit_adaboost(d, g, 8);
  auto doc = r.ensemble.to_json();
  ASSERT_TRUE(doc.contains("members"));
  ASSERT_TRUE(doc.contains("k"));
  ASSERT_TRUE(doc["members"][0].contains("beta"));
  ASSERT_TRUE(doc["members"][0].contains("tree"));
  Ensemble back = Ensemble::parse(r.ensemble.dump());
  ASSERT_EQ(back.members.size(), r.ensemble.members.size());
  for (std::size_t i = 0; i < back.members.size(); ++i) {
    EXPECT_EQ(back.members[i].tree, r.ensemble.members[i].tree);
    EXPECT_EQ(back.members[i].beta, r.ensemble.members[i].beta);
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_EQ(predict_ensemble(back, d.row(i)), predict_ensemble(r.ensemble, d.row(i)));
  EXPECT_THROW(Ensemble::parse(R"({"members": [{"beta": 1}], "k": 2})"), FormatError);
  EXPECT_THROW(Ensemble::parse(R"({"members": [)"), FormatError);
}

}  // namespace
}  // namespace dpdt
