#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "triage/error.hpp"
#include "triage/fact_extraction.hpp"
#include "triage/ingestion.hpp"
#include "triage/knowledge_base.hpp"
#include "triage/rule_inference.hpp"
#include "triage/session.hpp"

namespace triage::testing {

inline std::filesystem::path fixture_dir() { return TRIAGE_FIXTURE_DIR; }

inline std::filesystem::path nacos_root() { return fixture_dir() / "nacos"; }
inline std::filesystem::path lucene_root() { return fixture_dir() / "lucene" / "src" / "java"; }

// Snippet-relative span of the first occurrence of `token`.
inline SourceSpan span_of(const std::string& snippet, const std::string& token) {
  std::size_t pos = snippet.find(token);
  if (pos == std::string::npos) throw std::runtime_error("token not in snippet: " + token);
  int line = 1 + static_cast<int>(std::count(snippet.begin(), snippet.begin() + pos, '\n'));
  std::size_t line_start = snippet.rfind('\n', pos);
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  int col = static_cast<int>(pos - line_start) + 1;
  SourceSpan s;
  s.start_line = s.end_line = line;
  s.start_col = col;
  s.end_col = col + static_cast<int>(token.size()) - 1;
  return s;
}

/// The Nacos-style corpus: warnings a, b, c in package com.alibaba.nacos.client
/// (all calling getProperty), d (readFile, same package, no getProperty) and
/// e (com.alibaba.nacos.core.cluster, calls getProperty).
struct GetPropertyCorpus {
  std::vector<Warning> warnings;
  std::vector<Fact> facts;
  WarningId a, b, c, d, e;

  Session session() const {
    KnowledgeBase kb;
    for (const auto& w : warnings) kb.add_warning(w.id);
    for (const auto& f : facts) kb.add_fact(f);
    CorpusManifest m{"nacos-getproperty", nacos_root(), {nacos_root() / "infer-getproperty.json"},
                     warnings.size()};
    return Session(m, warnings, kb);
  }
};

inline GetPropertyCorpus load_getproperty_corpus() {
  IngestResult parsed = parse_infer_report(read_file(nacos_root() / "infer-getproperty.json"));
  IngestResult snipped = attach_snippets(parsed.warnings, nacos_root());
  GetPropertyCorpus c;
  c.warnings = std::move(snipped.warnings);
  c.facts = extract_all_containment_facts(c.warnings, nacos_root()).facts;
  auto by_file = [&](const std::string& name) {
    for (const auto& w : c.warnings) {
      if (w.location.file_path.ends_with(name)) return w.id;
    }
    throw std::runtime_error("fixture warning missing: " + name);
  };
  c.a = by_file("ServerListManager.java");
  c.b = by_file("ServerHttpAgent.java");
  c.c = by_file("LogbackNacosLogging.java");
  c.d = by_file("ConfigFileManager.java");
  c.e = by_file("ServerMemberManager.java");
  return c;
}

struct RandomKb {
  KnowledgeBase kb;
  std::vector<WarningId> ids;
  std::vector<Predicate> predicates;
};

// Each warning holds each predicate independently with probability `density`.
inline RandomKb random_kb(std::mt19937_64& rng, int warnings, int predicates,
                          double density = 0.3) {
  static constexpr Relation kRelations[] = {Relation::package,  Relation::classname,
                                            Relation::rettype,  Relation::fields,
                                            Relation::subtype, Relation::code_element};
  RandomKb r;
  for (int p = 0; p < predicates; ++p) {
    r.predicates.push_back(Predicate::make(kRelations[p % 6], "v" + std::to_string(p)));
  }
  std::bernoulli_distribution has(density);
  for (int w = 0; w < warnings; ++w) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%03d", w);
    r.ids.emplace_back(buf);
    r.kb.add_warning(r.ids.back());
    for (const auto& p : r.predicates) {
      if (has(rng)) r.kb.add_fact(r.ids.back(), p);
    }
  }
  return r;
}

// Brute-force matching straight from the forward index.
inline bool brute_matches(const KnowledgeBase& kb, const WarningId& id,
                          const std::vector<Predicate>& conj) {
  const auto& held = kb.predicates_of(id);
  return std::all_of(conj.begin(), conj.end(), [&](const Predicate& p) { return held.contains(p); });
}

inline IdSet brute_matched(const KnowledgeBase& kb, const std::vector<Predicate>& conj) {
  IdSet out;
  for (const auto& id : kb.warning_ids()) {
    if (brute_matches(kb, id, conj)) out.insert(id);
  }
  return out;
}

inline bool brute_clean(const KnowledgeBase& kb, const std::vector<Predicate>& conj,
                        const IdSet& e_plus) {
  return std::none_of(e_plus.begin(), e_plus.end(),
                      [&](const WarningId& id) { return brute_matches(kb, id, conj); });
}

// Violations of soundness and of the no-redundancy constraint, checked
// without going through the engine's own predicates.
struct HypothesisAudit {
  int unsound_rules = 0;
  int redundant_rules = 0;
};

inline HypothesisAudit audit(const KnowledgeBase& kb, const Hypothesis& h, const IdSet& e_plus) {
  HypothesisAudit a;
  for (const auto& r : h.rules) {
    const auto& preds = r.predicates();
    if (!brute_clean(kb, preds, e_plus)) ++a.unsound_rules;
    if (preds.size() < 2) continue;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      std::vector<Predicate> dropped = preds;
      dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(i));
      if (brute_clean(kb, dropped, e_plus)) {
        ++a.redundant_rules;
        break;
      }
    }
  }
  return a;
}

/// Score of a rule set under the inference objective: E- coverage, rule
/// count, and the union of uninspected matches.
struct Score {
  std::size_t coverage = 0;
  std::size_t rules = 0;
  std::size_t uninspected = 0;

  // True if this score is strictly preferred over `o`.
  bool better_than(const Score& o) const {
    if (coverage != o.coverage) return coverage > o.coverage;
    if (rules != o.rules) return rules < o.rules;
    return uninspected > o.uninspected;
  }
  bool operator==(const Score&) const = default;
};

inline Score score_of(const KnowledgeBase& kb, const std::vector<std::vector<Predicate>>& rules,
                      const IdSet& e_minus, const IdSet& uninspected) {
  IdSet cov, un;
  for (const auto& r : rules) {
    for (const auto& id : brute_matched(kb, r)) {
      if (e_minus.contains(id)) cov.insert(id);
      if (uninspected.contains(id)) un.insert(id);
    }
  }
  return {cov.size(), rules.size(), un.size()};
}

inline Score score_of(const KnowledgeBase& kb, const Hypothesis& h, const IdSet& e_minus,
                      const IdSet& uninspected) {
  std::vector<std::vector<Predicate>> rules;
  for (const auto& r : h.rules) rules.push_back(r.predicates());
  return score_of(kb, rules, e_minus, uninspected);
}

// Best achievable score by exhaustive enumeration: every clean conjunction of
// up to `max_preds` predicates, every set of up to `max_rules` of them.
inline Score enumerate_best(const KnowledgeBase& kb, const IdSet& e_plus, const IdSet& e_minus,
                            const IdSet& uninspected, int max_rules, int max_preds) {
  std::vector<Predicate> universe = kb.predicate_universe();
  std::vector<std::vector<Predicate>> clean;
  std::vector<Predicate> cur;
  auto grow = [&](auto&& self, std::size_t from) -> void {
    if (!cur.empty() && brute_clean(kb, cur, e_plus)) clean.push_back(cur);
    if (static_cast<int>(cur.size()) == max_preds) return;
    for (std::size_t i = from; i < universe.size(); ++i) {
      cur.push_back(universe[i]);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  grow(grow, 0);

  Score best;  // the empty rule set
  std::vector<std::vector<Predicate>> chosen;
  auto pick = [&](auto&& self, std::size_t from) -> void {
    Score s = score_of(kb, chosen, e_minus, uninspected);
    if (s.better_than(best)) best = s;
    if (static_cast<int>(chosen.size()) == max_rules) return;
    for (std::size_t i = from; i < clean.size(); ++i) {
      chosen.push_back(clean[i]);
      self(self, i + 1);
      chosen.pop_back();
    }
  };
  pick(pick, 0);
  return best;
}

}  // namespace triage::testing
