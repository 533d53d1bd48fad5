#include <gtest/gtest.h>

#include "support.hpp"
#include "triage/error.hpp"
#include "triage/planted.hpp"

namespace triage {
namespace {

TEST(Planted, ShapeAndGroundTruth) {
  PlantedOptions o;
  o.seed = 3;
  auto pc = make_planted_corpus(o);
  EXPECT_EQ(pc.warnings.size(), 40u);
  ASSERT_EQ(pc.planted_rules.size(), 3u);
  ASSERT_EQ(pc.clusters.size(), 3u);
  std::size_t un = 0;
  for (const auto& [id, v] : pc.ground_truth) un += v == LabelValue::uninteresting;
  EXPECT_EQ(un, 30u);
  IdSet seen;
  for (const auto& c : pc.clusters) {
    EXPECT_GE(c.size(), 5u);
    for (const auto& id : c) EXPECT_TRUE(seen.insert(id).second);
  }
  EXPECT_EQ(seen.size(), 30u);
}

TEST(Planted, RulesMatchExactlyTheirCluster) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PlantedOptions o;
    o.seed = seed;
    auto pc = make_planted_corpus(o);
    KnowledgeBase kb = pc.knowledge_base();
    for (std::size_t i = 0; i < pc.planted_rules.size(); ++i) {
      EXPECT_EQ(testing::brute_matched(kb, pc.planted_rules[i].predicates()), pc.clusters[i]);
      EXPECT_EQ(pc.planted_rules[i].id(), static_cast<RuleId>(i + 1));
    }
  }
}

TEST(Planted, DistractorsShareHalfSignatures) {
  auto pc = make_planted_corpus({});
  KnowledgeBase kb = pc.knowledge_base();
  for (const auto& r : pc.planted_rules) {
    for (const auto& p : r.predicates()) {
      bool interesting_holder = false;
      for (const auto& id : kb.holders(p)) {
        interesting_holder |= pc.ground_truth.at(id) == LabelValue::interesting;
      }
      EXPECT_TRUE(interesting_holder) << p.value;
    }
  }
}

TEST(Planted, DeterministicPerSeed) {
  PlantedOptions o;
  o.seed = 9;
  auto a = make_planted_corpus(o), b = make_planted_corpus(o);
  EXPECT_EQ(a.warnings, b.warnings);
  EXPECT_EQ(a.facts, b.facts);
  o.seed = 10;
  EXPECT_NE(make_planted_corpus(o).facts, a.facts);
}

TEST(Planted, RejectsImpossibleOptions) {
  PlantedOptions o;
  o.uninteresting = 10;
  o.min_cluster = 5;
  EXPECT_THROW(make_planted_corpus(o), InvalidArgument);
}

}  // namespace
}  // namespace triage
