#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "triage/knowledge_base.hpp"
#include "triage/warning.hpp"

namespace triage {

enum class SearchStrategy { automatic, exact, greedy };
enum class SearchMode { none, exact, greedy };

std::string_view to_string(SearchMode m);
SearchMode parse_search_mode(std::string_view s);

struct InferenceConfig {
  int max_predicates_per_rule = 3;
  int max_rules = 8;
  // Exact search runs when both limits hold; otherwise greedy.
  std::size_t exact_max_candidates = 14;
  std::size_t exact_max_warnings = 60;
  // Exact search falls back to greedy after this many search nodes.
  std::size_t exact_node_budget = 2'000'000;
  SearchStrategy strategy = SearchStrategy::automatic;
  // Recorded for reproducibility only; the search never draws from it.
  std::uint64_t random_seed = 0;

  void validate() const;
  bool operator==(const InferenceConfig&) const = default;
};

void to_json(nlohmann::json& j, const InferenceConfig& c);
void from_json(const nlohmann::json& j, InferenceConfig& c);

/// Extra steering for a refinement step.
struct InferenceHints {
  // Previous hypothesis; clean survivors are seeded and keep their ids.
  std::vector<Rule> prior_rules;
  // A rule matching any holder of a pinned predicate must contain it.
  std::vector<Predicate> pinned;
};

struct Hypothesis {
  std::vector<Rule> rules;  // canonical order
  IdSet covered_uninteresting;
  IdSet uncovered_uninteresting;
  std::size_t matched_uninspected_total = 0;  // |union of uninspected matches|
  SearchMode mode = SearchMode::none;

  const Rule* find(RuleId id) const;
  bool operator==(const Hypothesis&) const = default;
};

void to_json(nlohmann::json& j, const Hypothesis& h);
void from_json(const nlohmann::json& j, Hypothesis& h);

/// Predicates held by at least one E- warning, canonically ordered.
std::vector<Predicate> candidate_predicates(const KnowledgeBase& kb, const IdSet& e_plus,
                                            const IdSet& e_minus);

/// Searches for a set of conjunctive rules that match no E+ warning, in
/// priority order: cover the most E- warnings, use the fewest rules, match the
/// most uninspected warnings, then the canonically smallest rule set. Every
/// returned rule is free of redundant predicates. Rules carried over from
/// hints.prior_rules keep their id; new rules have id 0.
Hypothesis infer_rules(const KnowledgeBase& kb, const IdSet& e_plus, const IdSet& e_minus,
                       const IdSet& all_warnings, const InferenceConfig& cfg,
                       const InferenceHints& hints = {});

// True iff no E+ warning carries every predicate.
bool is_clean(const KnowledgeBase& kb, const std::vector<Predicate>& conjunction,
              const IdSet& e_plus);

// True iff some predicate can be dropped while the rule stays clean (and,
// with pins, still honors them). Single-predicate rules are never redundant.
bool has_redundant_predicate(const KnowledgeBase& kb, const std::vector<Predicate>& conjunction,
                             const IdSet& e_plus, const std::vector<Predicate>& pinned = {});

}  // namespace triage
