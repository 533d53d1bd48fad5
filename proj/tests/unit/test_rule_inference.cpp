#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "triage/error.hpp"
#include "triage/rule_dsl.hpp"
#include "triage/rule_inference.hpp"

namespace triage {
namespace {

using namespace triage::testing;

Predicate pkg(const std::string& v) { return Predicate::make(Relation::package, v); }

IdSet minus(const IdSet& all, const IdSet& a, const IdSet& b) {
  IdSet out;
  for (const auto& id : all) {
    if (!a.contains(id) && !b.contains(id)) out.insert(id);
  }
  return out;
}

// A random labeling over a random KB: roughly a third each of E+, E-,
// unlabeled, with E- nonempty.
struct Instance {
  RandomKb r;
  IdSet all, e_plus, e_minus;
};

Instance random_instance(std::mt19937_64& rng, int max_w, int max_p) {
  Instance in;
  int w = 2 + static_cast<int>(rng() % (max_w - 1));
  int p = 1 + static_cast<int>(rng() % max_p);
  in.r = random_kb(rng, w, p, 0.25 + 0.3 * static_cast<double>(rng() % 100) / 100.0);
  for (const auto& id : in.r.ids) {
    in.all.insert(id);
    switch (rng() % 3) {
      case 0: in.e_plus.insert(id); break;
      case 1: in.e_minus.insert(id); break;
      default: break;
    }
  }
  if (in.e_minus.empty()) {
    in.e_plus.erase(in.r.ids[0]);
    in.e_minus.insert(in.r.ids[0]);
  }
  return in;
}

TEST(CandidatePredicates, EmptyEMinus) {
  KnowledgeBase kb;
  kb.add_fact("w", pkg("a"));
  EXPECT_TRUE(candidate_predicates(kb, {}, {}).empty());
}

TEST(CandidatePredicates, ExcludesPredicatesOffEMinus) {
  KnowledgeBase kb;
  kb.add_fact("w1", pkg("p"));
  kb.add_fact("w2", pkg("p"));
  kb.add_fact("w3", pkg("q"));
  EXPECT_EQ(candidate_predicates(kb, {}, {"w1", "w2"}), std::vector<Predicate>{pkg("p")});
}

TEST(CandidatePredicates, MatchesLinearScan) {
  std::mt19937_64 rng(5);
  auto r = random_kb(rng, 12, 10, 0.15);
  IdSet e_minus{r.ids[0], r.ids[3], r.ids[7]};
  std::vector<Predicate> expected;
  for (const auto& p : r.predicates) {
    for (const auto& id : e_minus) {
      if (r.kb.has_fact(id, p)) {
        expected.push_back(p);
        break;
      }
    }
  }
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(candidate_predicates(r.kb, {}, e_minus), expected);
}

TEST(InferRules, NoUninterestingLabelsMeansNoRules) {
  KnowledgeBase kb;
  kb.add_fact("w", pkg("a"));
  auto h = infer_rules(kb, {}, {}, {"w"}, {});
  EXPECT_TRUE(h.rules.empty());
}

TEST(InferRules, UniqueMinimalCleanCover) {
  KnowledgeBase kb;
  kb.add_fact("w1", pkg("a"));
  kb.add_fact("w2", pkg("a"));
  kb.add_fact("w3", pkg("b"));
  auto h = infer_rules(kb, {"w3"}, {"w1", "w2"}, {"w1", "w2", "w3"}, {});
  ASSERT_EQ(h.rules.size(), 1u);
  EXPECT_EQ(h.rules[0].predicates(), std::vector<Predicate>{pkg("a")});
  EXPECT_EQ(h.covered_uninteresting, (IdSet{"w1", "w2"}));
  EXPECT_EQ(h.rules[0].id(), 0);
}

TEST(InferRules, WarningWithoutFactsStaysUncovered) {
  KnowledgeBase kb;
  kb.add_fact("w1", pkg("a"));
  kb.add_warning("bare");
  auto h = infer_rules(kb, {}, {"w1", "bare"}, {"w1", "bare"}, {});
  EXPECT_EQ(h.uncovered_uninteresting, IdSet{"bare"});
}

TEST(InferRules, RejectsBadLabels) {
  KnowledgeBase kb;
  kb.add_fact("w1", pkg("a"));
  EXPECT_THROW(infer_rules(kb, {"w1"}, {"w1"}, {"w1"}, {}), InvalidArgument);
  EXPECT_THROW(infer_rules(kb, {}, {"ghost"}, {"w1"}, {}), NotFound);
  InferenceConfig bad;
  bad.max_rules = 0;
  EXPECT_THROW(infer_rules(kb, {}, {"w1"}, {"w1"}, bad), InvalidArgument);
}

TEST(InferRules, HighlightRefinement) {
  auto c = load_getproperty_corpus();
  Session s = c.session();
  KnowledgeBase kb = s.kb();
  IdSet all = s.warning_ids();
  auto h = infer_rules(kb, {}, {c.a, c.b}, all, {});
  ASSERT_EQ(h.rules.size(), 1u);
  EXPECT_EQ(h.rules[0].predicates(), std::vector<Predicate>{pkg("com.alibaba.nacos.client")});

  ExpressionElements e;
  e.calls = {"getProperty"};
  propagate_expression_facts(kb, e, c.warnings);
  h = infer_rules(kb, {c.d, c.e}, {c.a, c.b}, all, {});
  ASSERT_EQ(h.rules.size(), 1u);
  EXPECT_EQ(h.rules[0].predicates(),
            (std::vector<Predicate>{pkg("com.alibaba.nacos.client"),
                                    Predicate::make(Relation::code_element, "call:getProperty")}));
}

TEST(InferRules, PriorRulesKeepTheirIds) {
  KnowledgeBase kb;
  kb.add_fact("w1", pkg("a"));
  kb.add_fact("w2", pkg("a"));
  Rule prior(7, {pkg("a")});
  prior.set_display_name("mine");
  InferenceHints hints;
  hints.prior_rules = {prior};
  auto h = infer_rules(kb, {}, {"w1"}, {"w1", "w2"}, {}, hints);
  ASSERT_EQ(h.rules.size(), 1u);
  EXPECT_EQ(h.rules[0].id(), 7);
  EXPECT_EQ(h.rules[0].display_name(), "mine");
}

TEST(InferRules, PinnedPredicateIsRequired) {
  KnowledgeBase kb;
  for (const char* w : {"w1", "w2", "w3"}) kb.add_fact(w, pkg("a"));
  kb.add_fact("w1", Predicate::make(Relation::rettype, "void"));
  kb.add_fact("w2", Predicate::make(Relation::rettype, "void"));
  InferenceHints hints;
  hints.pinned = {Predicate::make(Relation::rettype, "void")};
  auto h = infer_rules(kb, {}, {"w1", "w2"}, {"w1", "w2", "w3"}, {}, hints);
  ASSERT_EQ(h.rules.size(), 1u);
  EXPECT_TRUE(h.rules[0].contains(Predicate::make(Relation::rettype, "void")));
}

TEST(InferRules, SoundAndNonRedundantOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 150; ++t) {
    auto in = random_instance(rng, 40, 20);
    auto h = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, {});
    auto a = audit(in.r.kb, h, in.e_plus);
    EXPECT_EQ(a.unsound_rules, 0) << "trial " << t;
    EXPECT_EQ(a.redundant_rules, 0) << "trial " << t;
    for (const auto& r : h.rules) {
      EXPECT_FALSE(has_redundant_predicate(in.r.kb, r.predicates(), in.e_plus));
      EXPECT_TRUE(is_clean(in.r.kb, r.predicates(), in.e_plus));
    }
    IdSet covered;
    for (const auto& r : h.rules) {
      for (const auto& id : brute_matched(in.r.kb, r.predicates())) {
        if (in.e_minus.contains(id)) covered.insert(id);
      }
    }
    EXPECT_EQ(covered, h.covered_uninteresting);
  }
}

TEST(InferRules, ExactIsOptimalAgainstEnumeration) {
  std::mt19937_64 rng(3);
  InferenceConfig cfg;
  cfg.strategy = SearchStrategy::exact;
  cfg.max_rules = 3;
  cfg.max_predicates_per_rule = 2;
  for (int t = 0; t < 40; ++t) {
    auto in = random_instance(rng, 12, 10);
    IdSet un = minus(in.all, in.e_plus, in.e_minus);
    auto h = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, cfg);
    EXPECT_EQ(h.mode, SearchMode::exact);
    Score got = score_of(in.r.kb, h, in.e_minus, un);
    Score best = enumerate_best(in.r.kb, in.e_plus, in.e_minus, un, 3, 2);
    EXPECT_EQ(got, best) << "trial " << t;
  }
}

TEST(InferRules, GreedyNeverBeatsExact) {
  std::mt19937_64 rng(17);
  InferenceConfig exact, greedy;
  exact.strategy = SearchStrategy::exact;
  greedy.strategy = SearchStrategy::greedy;
  for (int t = 0; t < 60; ++t) {
    auto in = random_instance(rng, 12, 10);
    auto he = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, exact);
    auto hg = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, greedy);
    EXPECT_EQ(hg.mode, SearchMode::greedy);
    EXPECT_LE(hg.covered_uninteresting.size(), he.covered_uninteresting.size());
  }
}

TEST(InferRules, IsDeterministic) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    auto in = random_instance(rng, 30, 14);
    auto h1 = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, {});
    auto h2 = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, {});
    EXPECT_EQ(nlohmann::json(h1).dump(), nlohmann::json(h2).dump());
  }
}

TEST(InferRules, MoreUninterestingLabelsNeverLowerMaxCoverage) {
  std::mt19937_64 rng(31);
  InferenceConfig cfg;
  cfg.strategy = SearchStrategy::exact;
  for (int t = 0; t < 25; ++t) {
    auto in = random_instance(rng, 12, 10);
    auto before = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, cfg);
    IdSet un = minus(in.all, in.e_plus, in.e_minus);
    if (un.empty()) continue;
    IdSet more = in.e_minus;
    more.insert(*un.begin());
    auto after = infer_rules(in.r.kb, in.e_plus, more, in.all, cfg);
    EXPECT_GE(after.covered_uninteresting.size(), before.covered_uninteresting.size());
  }
}

TEST(InferRules, BudgetExhaustionFallsBackToGreedy) {
  std::mt19937_64 rng(41);
  InferenceConfig cfg;
  cfg.strategy = SearchStrategy::exact;
  cfg.exact_node_budget = 1;
  auto in = random_instance(rng, 12, 10);
  auto h = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, cfg);
  EXPECT_EQ(h.mode, SearchMode::greedy);
  EXPECT_EQ(audit(in.r.kb, h, in.e_plus).unsound_rules, 0);
}

TEST(InferRules, LargeInstancesUseGreedy) {
  std::mt19937_64 rng(43);
  auto in = random_instance(rng, 200, 40);
  while (in.all.size() <= 60) in = random_instance(rng, 200, 40);
  auto h = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, {});
  EXPECT_EQ(h.mode, SearchMode::greedy);
}

TEST(Hypothesis, JsonRoundTrip) {
  KnowledgeBase kb;
  kb.add_fact("w1", pkg("a"));
  kb.add_fact("w2", pkg("a"));
  auto h = infer_rules(kb, {}, {"w1"}, {"w1", "w2"}, {});
  nlohmann::json j = h;
  EXPECT_EQ(j.get<Hypothesis>(), h);
  InferenceConfig cfg;
  cfg.strategy = SearchStrategy::greedy;
  nlohmann::json jc = cfg;
  EXPECT_EQ(jc.get<InferenceConfig>(), cfg);
}

}  // namespace
}  // namespace triage
