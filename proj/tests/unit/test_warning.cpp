#include <gtest/gtest.h>

#include "triage/error.hpp"
#include "triage/rule_dsl.hpp"
#include "triage/warning.hpp"

namespace triage {
namespace {

using nlohmann::json;

// Digests below were computed outside this code base with Python's hashlib:
// sha256("analyzer\x1fkind\x1fpath\x1fline\x1fmessage")[:16 hex digits].
TEST(WarningIdentity, MatchesIndependentlyComputedDigests) {
  EXPECT_EQ(warning_identity(Analyzer::infer, "NULL_DEREFERENCE", "X.java", 13, "object x is null"),
            "263c492cb42fa4fc");
  EXPECT_EQ(warning_identity(Analyzer::spotbugs, "NP_NULL_ON_SOME_PATH", "org/a/B.java", 42,
                             "Possible null pointer dereference"),
            "125feafa2fe54c4b");
}

TEST(WarningIdentity, IsDeterministic) {
  auto a = warning_identity(Analyzer::infer, "NULL_DEREFERENCE", "a/B.java", 13, "object `ex` could be null");
  auto b = warning_identity(Analyzer::infer, "NULL_DEREFERENCE", "a/B.java", 13, "object `ex` could be null");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 16u);
}

TEST(WarningIdentity, IgnoresWhitespaceRunsInMessage) {
  EXPECT_EQ(warning_identity(Analyzer::infer, "K", "a/B.java", 3, "object  `ex`\t could\nbe null"),
            warning_identity(Analyzer::infer, "K", "a/B.java", 3, "object `ex` could be null"));
}

TEST(WarningIdentity, IgnoresAbsolutePathPrefixesInMessage) {
  EXPECT_EQ(warning_identity(Analyzer::infer, "K", "a/B.java", 3, "leak in /home/ci/work/B.java"),
            warning_identity(Analyzer::infer, "K", "a/B.java", 3, "leak in B.java"));
}

TEST(WarningIdentity, DistinguishesEveryComponent) {
  auto base = warning_identity(Analyzer::infer, "K", "a/B.java", 3, "m");
  EXPECT_NE(base, warning_identity(Analyzer::spotbugs, "K", "a/B.java", 3, "m"));
  EXPECT_NE(base, warning_identity(Analyzer::infer, "K2", "a/B.java", 3, "m"));
  EXPECT_NE(base, warning_identity(Analyzer::infer, "K", "a/C.java", 3, "m"));
  EXPECT_NE(base, warning_identity(Analyzer::infer, "K", "a/B.java", 4, "m"));
  EXPECT_NE(base, warning_identity(Analyzer::infer, "K", "a/B.java", 3, "n"));
}

TEST(WarningIdentity, RejectsDegenerateInput) {
  EXPECT_THROW(warning_identity(Analyzer::infer, "", "a.java", 1, "m"), InvalidArgument);
  EXPECT_THROW(warning_identity(Analyzer::infer, "K", "", 1, "m"), InvalidArgument);
  EXPECT_THROW(warning_identity(Analyzer::infer, "K", "a.java", 0, "m"), InvalidArgument);
}

TEST(Predicate, NormalizationIsIdempotent) {
  for (Relation r : {Relation::package, Relation::classname, Relation::rettype, Relation::fields,
                     Relation::subtype, Relation::code_element}) {
    for (const char* raw : {" java.util . List < String > ", "call:get  Property", "a\tb"}) {
      std::string once = normalize_value(r, raw);
      EXPECT_EQ(normalize_value(r, once), once);
    }
  }
  EXPECT_EQ(normalize_value(Relation::rettype, " List < String > "), "List<String>");
  EXPECT_THROW(Predicate::make(Relation::package, "   "), InvalidArgument);
}

TEST(Rule, PredicateOrderIsCanonical) {
  auto p = Predicate::make(Relation::package, "com.acme");
  auto c = Predicate::make(Relation::code_element, "call:getProperty");
  auto f = Predicate::make(Relation::fields, "StringUtils.COMMA");
  Rule r1(1, {c, p, f});
  Rule r2(1, {f, c, p, c});
  EXPECT_EQ(r1, r2);
  ASSERT_EQ(r1.predicates().size(), 3u);
  EXPECT_EQ(r1.predicates()[0], p);
  EXPECT_EQ(r1.predicates()[2], c);
  EXPECT_EQ(r1.display_name(), "Rule 1");
}

TEST(Rule, RejectsEmptyConjunction) {
  EXPECT_THROW(Rule(1, {}), InvalidArgument);
}

TEST(Label, OriginAndRuleIdAgree) {
  Label ok{LabelValue::uninteresting, LabelOrigin::rule_application, 4};
  Label bad{LabelValue::uninteresting, LabelOrigin::instance, 4};
  EXPECT_TRUE(ok.valid());
  EXPECT_FALSE(bad.valid());
}

TEST(WarningJson, RoundTrips) {
  Warning w;
  w.id = "0123456789abcdef";
  w.analyzer = Analyzer::spotbugs;
  w.kind = "NP_NULL_ON_SOME_PATH";
  w.message = "Possible null";
  w.location = {"org/a/B.java", 42, 44, 3, 9};
  w.snippet = "a\nb\n";
  w.enclosing = {"org.a", "B", "run", "void", {"B.x"}, {"Runnable"}};
  json j = w;
  EXPECT_EQ(j.get<Warning>(), w);
  EXPECT_TRUE(j.at("enclosing").contains("fields_used"));
}

TEST(SourceSpan, Validity) {
  EXPECT_TRUE((SourceSpan{"f", 1, 1, 2, 5}).valid());
  EXPECT_FALSE((SourceSpan{"f", 3, 2, 0, 0}).valid());
  EXPECT_FALSE((SourceSpan{"f", 2, 2, 6, 5}).valid());
}

}  // namespace
}  // namespace triage
