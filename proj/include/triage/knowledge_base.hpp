#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "triage/warning.hpp"

namespace triage {

enum class Provenance { containment_scan, highlight, checkmark };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct Fact {
  WarningId warning_id;
  Predicate predicate;
  Provenance provenance = Provenance::containment_scan;

  bool operator==(const Fact&) const = default;
};

void to_json(nlohmann::json& j, const Fact& f);
void from_json(const nlohmann::json& j, Fact& f);

/// Warning <-> predicate incidence store. The forward and inverted indexes
/// are kept as exact transposes; single writer, many readers.
class KnowledgeBase {
 public:
  // Registers a warning with no facts. Idempotent.
  void add_warning(const WarningId& id);

  // Inserts a fact, registering the warning if needed. Returns false if the
  // (warning, predicate) pair was already present; the first provenance wins.
  bool add_fact(const WarningId& id, const Predicate& p,
                Provenance provenance = Provenance::containment_scan);
  bool add_fact(const Fact& f) { return add_fact(f.warning_id, f.predicate, f.provenance); }

  bool has_warning(const WarningId& id) const { return facts_.contains(id); }
  bool has_fact(const WarningId& id, const Predicate& p) const;

  // Throws NotFound for unknown ids.
  const std::set<Predicate>& predicates_of(const WarningId& id) const;

  // Empty set for predicates outside the universe.
  const IdSet& holders(const Predicate& p) const;

  // True iff every predicate of the rule is associated with the warning.
  // Throws NotFound for unknown ids.
  bool matches(const WarningId& id, const Rule& rule) const;

  // Intersection of the inverted sets of the rule's predicates.
  IdSet matched_set(const Rule& rule) const;
  IdSet matched_set(const std::vector<Predicate>& conjunction) const;

  // Canonically ordered, duplicate-free.
  std::vector<Predicate> predicate_universe() const;

  // A predicate that every warning holds, or that no labeled warning holds,
  // cannot separate interesting from uninteresting examples.
  bool is_non_discriminating(const Predicate& p, const IdSet& labeled) const;

  std::size_t warning_count() const noexcept { return facts_.size(); }
  std::size_t fact_count() const noexcept { return provenance_.size(); }
  std::vector<WarningId> warning_ids() const;

  // All facts in (warning id, predicate) order.
  std::vector<Fact> facts() const;
  std::optional<Provenance> provenance_of(const WarningId& id, const Predicate& p) const;

  bool operator==(const KnowledgeBase&) const = default;

 private:
  std::map<WarningId, std::set<Predicate>> facts_;
  std::map<Predicate, IdSet> inverted_;
  std::map<std::pair<WarningId, Predicate>, Provenance> provenance_;
};

// Facts file: JSON Lines of {warning_id, relation, value, provenance}.
void write_facts_jsonl(std::ostream& out, const std::vector<Fact>& facts);
std::vector<Fact> read_facts_jsonl(std::istream& in);

}  // namespace triage
