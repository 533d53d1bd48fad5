#include "triage/rule_inference.hpp"

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <map>
#include <optional>

#include "triage/error.hpp"

namespace triage {

using Bits = boost::dynamic_bitset<>;

std::string_view to_string(SearchMode m) {
  switch (m) {
    case SearchMode::none: return "none";
    case SearchMode::exact: return "exact";
    case SearchMode::greedy: return "greedy";
  }
  return "none";
}

SearchMode parse_search_mode(std::string_view s) {
  if (s == "none") return SearchMode::none;
  if (s == "exact") return SearchMode::exact;
  if (s == "greedy") return SearchMode::greedy;
  throw InvalidArgument("unknown search mode: '" + std::string(s) + "'");
}

void InferenceConfig::validate() const {
  if (max_predicates_per_rule < 1) throw InvalidArgument("max_predicates_per_rule must be >= 1");
  if (max_rules < 1) throw InvalidArgument("max_rules must be >= 1");
  if (exact_node_budget == 0) throw InvalidArgument("exact_node_budget must be positive");
}

void to_json(nlohmann::json& j, const InferenceConfig& c) {
  std::string strategy = c.strategy == SearchStrategy::exact    ? "exact"
                         : c.strategy == SearchStrategy::greedy ? "greedy"
                                                                : "automatic";
  j = {{"max_predicates_per_rule", c.max_predicates_per_rule},
       {"max_rules", c.max_rules},
       {"exact_max_candidates", c.exact_max_candidates},
       {"exact_max_warnings", c.exact_max_warnings},
       {"exact_node_budget", c.exact_node_budget},
       {"strategy", strategy},
       {"random_seed", c.random_seed}};
}

void from_json(const nlohmann::json& j, InferenceConfig& c) {
  InferenceConfig d;
  c.max_predicates_per_rule = j.value("max_predicates_per_rule", d.max_predicates_per_rule);
  c.max_rules = j.value("max_rules", d.max_rules);
  c.exact_max_candidates = j.value("exact_max_candidates", d.exact_max_candidates);
  c.exact_max_warnings = j.value("exact_max_warnings", d.exact_max_warnings);
  c.exact_node_budget = j.value("exact_node_budget", d.exact_node_budget);
  std::string strategy = j.value("strategy", std::string("automatic"));
  if (strategy == "exact") c.strategy = SearchStrategy::exact;
  else if (strategy == "greedy") c.strategy = SearchStrategy::greedy;
  else if (strategy == "automatic") c.strategy = SearchStrategy::automatic;
  else throw InvalidArgument("unknown search strategy: '" + strategy + "'");
  c.random_seed = j.value("random_seed", d.random_seed);
  c.validate();
}

const Rule* Hypothesis::find(RuleId id) const {
  for (const auto& r : rules) {
    if (r.id() == id) return &r;
  }
  return nullptr;
}

void to_json(nlohmann::json& j, const Hypothesis& h) {
  j = {{"rules", h.rules},
       {"covered_uninteresting", h.covered_uninteresting},
       {"uncovered_uninteresting", h.uncovered_uninteresting},
       {"matched_uninspected_total", h.matched_uninspected_total},
       {"mode", std::string(to_string(h.mode))}};
}

void from_json(const nlohmann::json& j, Hypothesis& h) {
  h.rules = j.at("rules").get<std::vector<Rule>>();
  h.covered_uninteresting = j.value("covered_uninteresting", IdSet{});
  h.uncovered_uninteresting = j.value("uncovered_uninteresting", IdSet{});
  h.matched_uninspected_total = j.value("matched_uninspected_total", std::size_t{0});
  h.mode = parse_search_mode(j.value("mode", std::string("none")));
}

std::vector<Predicate> candidate_predicates(const KnowledgeBase& kb, const IdSet& e_plus,
                                            const IdSet& e_minus) {
  (void)e_plus;
  std::vector<Predicate> out;
  if (e_minus.empty()) return out;
  for (const auto& p : kb.predicate_universe()) {
    const IdSet& h = kb.holders(p);
    if (std::any_of(h.begin(), h.end(), [&](const WarningId& id) { return e_minus.contains(id); })) {
      out.push_back(p);
    }
  }
  return out;
}

bool is_clean(const KnowledgeBase& kb, const std::vector<Predicate>& conjunction,
              const IdSet& e_plus) {
  for (const auto& id : e_plus) {
    const auto& preds = kb.predicates_of(id);
    if (std::all_of(conjunction.begin(), conjunction.end(),
                    [&](const Predicate& p) { return preds.contains(p); })) {
      return false;
    }
  }
  return true;
}

namespace {

bool honors_pins(const KnowledgeBase& kb, const std::vector<Predicate>& conjunction,
                 const std::vector<Predicate>& pinned) {
  if (pinned.empty()) return true;
  IdSet matched = kb.matched_set(conjunction);
  for (const auto& p : pinned) {
    if (std::find(conjunction.begin(), conjunction.end(), p) != conjunction.end()) continue;
    const IdSet& h = kb.holders(p);
    if (std::any_of(matched.begin(), matched.end(), [&](const WarningId& id) { return h.contains(id); })) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool has_redundant_predicate(const KnowledgeBase& kb, const std::vector<Predicate>& conjunction,
                             const IdSet& e_plus, const std::vector<Predicate>& pinned) {
  if (conjunction.size() < 2) return false;
  for (std::size_t i = 0; i < conjunction.size(); ++i) {
    std::vector<Predicate> reduced;
    for (std::size_t k = 0; k < conjunction.size(); ++k) {
      if (k != i) reduced.push_back(conjunction[k]);
    }
    if (is_clean(kb, reduced, e_plus) && honors_pins(kb, reduced, pinned)) return true;
  }
  return false;
}

namespace {

struct PoolRule {
  std::vector<Predicate> predicates;
  Bits uninteresting;  // matched E-
  Bits uninspected;    // matched uninspected
  bool seeded = false;
};

struct BudgetExceeded {};

// Lexicographic objective for a rule set; "better" means greater.
struct Score {
  std::size_t coverage = 0;
  std::size_t rule_count = 0;
  std::size_t uninspected = 0;
};

class Search {
 public:
  Search(const KnowledgeBase& kb, const IdSet& e_plus, const IdSet& e_minus,
         const IdSet& all_warnings, const InferenceConfig& cfg, const InferenceHints& hints)
      : kb_(kb), cfg_(cfg), hints_(hints) {
    IdSet universe = all_warnings;
    universe.insert(e_plus.begin(), e_plus.end());
    universe.insert(e_minus.begin(), e_minus.end());
    ids_.assign(universe.begin(), universe.end());
    for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = i;
    n_ = ids_.size();
    e_plus_ = to_bits(e_plus);
    e_minus_ = to_bits(e_minus);
    uninspected_ = ~(e_plus_ | e_minus_);
    for (const auto& p : hints.pinned) pinned_.emplace_back(p, holder_bits(p));
  }

  Hypothesis run(const IdSet& e_plus, const IdSet& e_minus) {
    candidates_ = candidate_predicates(kb_, e_plus, e_minus);
    for (const auto& p : candidates_) candidate_bits_.push_back(holder_bits(p));
    build_pool();

    std::vector<std::size_t> chosen;
    SearchMode mode = SearchMode::greedy;
    bool want_exact =
        cfg_.strategy == SearchStrategy::exact ||
        (cfg_.strategy == SearchStrategy::automatic &&
         candidates_.size() <= cfg_.exact_max_candidates && n_ <= cfg_.exact_max_warnings);
    if (want_exact) {
      try {
        chosen = exact();
        mode = SearchMode::exact;
      } catch (const BudgetExceeded&) {
        chosen = greedy();
      }
    } else {
      chosen = greedy();
    }
    if (pool_.empty()) mode = e_minus.empty() ? SearchMode::none : mode;
    return assemble(chosen, mode);
  }

 private:
  Bits to_bits(const IdSet& ids) const {
    Bits b(n_);
    for (const auto& id : ids) {
      if (auto it = index_.find(id); it != index_.end()) b.set(it->second);
    }
    return b;
  }

  const Bits& holder_bits(const Predicate& p) const {
    auto it = holder_cache_.find(p);
    if (it == holder_cache_.end()) it = holder_cache_.emplace(p, to_bits(kb_.holders(p))).first;
    return it->second;
  }

  bool pins_ok(const Bits& matched, const std::vector<Predicate>& conj) const {
    for (const auto& [p, holders] : pinned_) {
      if (std::find(conj.begin(), conj.end(), p) != conj.end()) continue;
      if (matched.intersects(holders)) return false;
    }
    return true;
  }

  bool valid(const Bits& matched, const std::vector<Predicate>& conj) const {
    return !matched.intersects(e_plus_) && pins_ok(matched, conj);
  }

  Bits match_bits(const std::vector<Predicate>& conj) const {
    Bits m(n_);
    m.set();
    for (const auto& p : conj) m &= holder_bits(p);
    return m;
  }

  bool non_redundant(const std::vector<Predicate>& conj) const {
    if (conj.size() < 2) return true;
    for (std::size_t i = 0; i < conj.size(); ++i) {
      std::vector<Predicate> reduced = conj;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
      if (valid(match_bits(reduced), reduced)) return false;
    }
    return true;
  }

  void build_pool() {
    Bits all(n_);
    all.set();
    std::vector<Predicate> conj;
    extend(0, all, conj);

    for (const auto& prior : hints_.prior_rules) {
      const auto& preds = prior.predicates();
      Bits m = match_bits(preds);
      if (!m.intersects(e_minus_) || !valid(m, preds) || !non_redundant(preds)) continue;
      auto it = std::find_if(pool_.begin(), pool_.end(),
                             [&](const PoolRule& r) { return r.predicates == preds; });
      if (it != pool_.end()) {
        it->seeded = true;
      } else {
        pool_.push_back({preds, m & e_minus_, m & uninspected_, true});
      }
    }
    std::sort(pool_.begin(), pool_.end(), [](const PoolRule& a, const PoolRule& b) {
      return a.predicates < b.predicates;
    });
  }

  // Depth-first over candidate combinations in canonical order. Clean
  // conjunctions are not extended: any extension would be redundant.
  void extend(std::size_t start, const Bits& matched, std::vector<Predicate>& conj) {
    for (std::size_t c = start; c < candidates_.size(); ++c) {
      Bits m = matched & candidate_bits_[c];
      if (!m.intersects(e_minus_)) continue;
      conj.push_back(candidates_[c]);
      bool clean = !m.intersects(e_plus_);
      if (clean && pins_ok(m, conj)) {
        if (non_redundant(conj)) pool_.push_back({conj, m & e_minus_, m & uninspected_, false});
      } else if (static_cast<int>(conj.size()) < cfg_.max_predicates_per_rule) {
        extend(c + 1, m, conj);
      }
      conj.pop_back();
    }
  }

  std::vector<std::size_t> greedy() const {
    std::vector<std::size_t> chosen;
    Bits covered(n_);
    while (static_cast<int>(chosen.size()) < cfg_.max_rules) {
      std::optional<std::size_t> best;
      std::size_t best_gain = 0, best_un = 0;
      bool best_seeded = false;
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        const auto& r = pool_[i];
        std::size_t gain = (r.uninteresting - covered).count();
        if (gain == 0) continue;
        std::size_t un = r.uninspected.count();
        bool better = !best || gain > best_gain ||
                      (gain == best_gain && (un > best_un || (un == best_un && r.seeded && !best_seeded)));
        if (better) {
          best = i;
          best_gain = gain;
          best_un = un;
          best_seeded = r.seeded;
        }
      }
      if (!best) break;
      chosen.push_back(*best);
      covered |= pool_[*best].uninteresting;
    }
    return chosen;
  }

  // ---- exact search ----

  Score score_of(const std::vector<std::size_t>& set) const {
    Bits cov(n_), un(n_);
    for (auto i : set) {
      cov |= pool_[i].uninteresting;
      un |= pool_[i].uninspected;
    }
    return {cov.count(), set.size(), un.count()};
  }

  // Canonical comparison of two rule sets (indexes into the sorted pool).
  static bool canonical_set_less(std::vector<std::size_t> a, std::vector<std::size_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a < b;
  }

  bool better(const Score& a, const std::vector<std::size_t>& sa, const Score& b,
              const std::vector<std::size_t>& sb) const {
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    if (a.rule_count != b.rule_count) return a.rule_count < b.rule_count;
    if (a.uninspected != b.uninspected) return a.uninspected > b.uninspected;
    return canonical_set_less(sa, sb);
  }

  void tick() {
    if (++nodes_ > cfg_.exact_node_budget) throw BudgetExceeded{};
  }

  std::vector<std::size_t> exact() {
    // Drop rules dominated by a canonically smaller rule; they can never be
    // part of the unique optimum.
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < i && !dominated; ++j) {
        if (!alive_[j]) continue;
        dominated = pool_[i].uninteresting.is_subset_of(pool_[j].uninteresting) &&
                    pool_[i].uninspected.is_subset_of(pool_[j].uninspected);
      }
      alive_.push_back(!dominated);
    }

    Bits target(n_);
    std::size_t max_gain = 0;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (!alive_[i]) continue;
      target |= pool_[i].uninteresting;
      max_gain = std::max(max_gain, pool_[i].uninteresting.count());
    }
    if (target.none()) return {};

    for (int k = 1; k <= cfg_.max_rules; ++k) {
      best_set_.clear();
      have_best_ = false;
      std::vector<std::size_t> set;
      cover(target, Bits(n_), set, static_cast<std::size_t>(k), max_gain);
      if (have_best_) return best_set_;
    }
    return max_coverage(target);
  }

  // Enumerates covers of `target` with at most `k` rules by branching on the
  // first uncovered element.
  void cover(const Bits& target, const Bits& covered, std::vector<std::size_t>& set,
             std::size_t k, std::size_t max_gain) {
    tick();
    Bits missing = target - covered;
    if (missing.none()) {
      consider(set);
      return;
    }
    std::size_t slots = k - set.size();
    if (slots == 0 || missing.count() > slots * max_gain) return;
    std::size_t element = missing.find_first();
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (!alive_[i] || !pool_[i].uninteresting.test(element)) continue;
      if (std::find(set.begin(), set.end(), i) != set.end()) continue;
      set.push_back(i);
      cover(target, covered | pool_[i].uninteresting, set, k, max_gain);
      set.pop_back();
    }
  }

  void consider(const std::vector<std::size_t>& set) {
    Score s = score_of(set);
    if (!have_best_ || better(s, set, best_score_, best_set_)) {
      best_score_ = s;
      best_set_ = set;
      have_best_ = true;
    }
  }

  // Max coverage when the whole target needs more than max_rules rules.
  std::vector<std::size_t> max_coverage(const Bits& target) {
    best_set_ = greedy();
    best_score_ = score_of(best_set_);
    have_best_ = true;
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (alive_[i]) alive.push_back(i);
    }
    std::vector<std::size_t> set;
    combine(alive, 0, Bits(n_), set, target);
    return best_set_;
  }

  void combine(const std::vector<std::size_t>& alive, std::size_t from, const Bits& covered,
               std::vector<std::size_t>& set, const Bits& target) {
    tick();
    if (!set.empty()) consider(set);
    if (static_cast<int>(set.size()) >= cfg_.max_rules) return;
    Bits reachable = covered;
    std::vector<std::size_t> gains;
    for (std::size_t a = from; a < alive.size(); ++a) {
      const Bits& u = pool_[alive[a]].uninteresting;
      reachable |= u;
      gains.push_back((u - covered).count());
    }
    std::sort(gains.rbegin(), gains.rend());
    std::size_t slots = static_cast<std::size_t>(cfg_.max_rules) - set.size();
    std::size_t optimistic = covered.count();
    for (std::size_t g = 0; g < std::min(slots, gains.size()); ++g) optimistic += gains[g];
    optimistic = std::min(optimistic, (reachable & target).count());
    if (optimistic < best_score_.coverage) return;
    for (std::size_t a = from; a < alive.size(); ++a) {
      set.push_back(alive[a]);
      combine(alive, a + 1, covered | pool_[alive[a]].uninteresting, set, target);
      set.pop_back();
    }
  }

  Hypothesis assemble(const std::vector<std::size_t>& chosen, SearchMode mode) const {
    Hypothesis h;
    h.mode = mode;
    Bits cov(n_), un(n_);
    for (auto i : chosen) {
      const auto& r = pool_[i];
      cov |= r.uninteresting;
      un |= r.uninspected;
      Rule rule(0, r.predicates);
      for (const auto& prior : hints_.prior_rules) {
        if (prior.predicates() == rule.predicates()) {
          rule = prior;
          break;
        }
      }
      h.rules.push_back(std::move(rule));
    }
    std::sort(h.rules.begin(), h.rules.end(), canonical_less);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!e_minus_.test(i)) continue;
      (cov.test(i) ? h.covered_uninteresting : h.uncovered_uninteresting).insert(ids_[i]);
    }
    h.matched_uninspected_total = un.count();
    return h;
  }

  const KnowledgeBase& kb_;
  const InferenceConfig& cfg_;
  const InferenceHints& hints_;
  std::vector<WarningId> ids_;
  std::map<WarningId, std::size_t> index_;
  std::size_t n_ = 0;
  Bits e_plus_, e_minus_, uninspected_;
  std::vector<std::pair<Predicate, Bits>> pinned_;
  std::vector<Predicate> candidates_;
  std::vector<Bits> candidate_bits_;
  mutable std::map<Predicate, Bits> holder_cache_;
  std::vector<PoolRule> pool_;
  std::vector<bool> alive_;

  std::size_t nodes_ = 0;
  bool have_best_ = false;
  Score best_score_;
  std::vector<std::size_t> best_set_;
};

}  // namespace

Hypothesis infer_rules(const KnowledgeBase& kb, const IdSet& e_plus, const IdSet& e_minus,
                       const IdSet& all_warnings, const InferenceConfig& cfg,
                       const InferenceHints& hints) {
  cfg.validate();
  for (const auto& id : e_plus) {
    if (e_minus.contains(id)) throw InvalidArgument("warning " + id + " is in both E+ and E-");
  }
  for (const auto* set : {&all_warnings, &e_plus, &e_minus}) {
    for (const auto& id : *set) {
      if (!kb.has_warning(id)) throw NotFound("unknown warning id: " + id);
    }
  }
  Search search(kb, e_plus, e_minus, all_warnings, cfg, hints);
  return search.run(e_plus, e_minus);
}

}  // namespace triage
