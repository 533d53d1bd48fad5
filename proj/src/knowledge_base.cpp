#include "triage/knowledge_base.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "triage/error.hpp"

namespace triage {

namespace {
const IdSet kEmptyIds;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::containment_scan: return "containment_scan";
    case Provenance::highlight: return "highlight";
    case Provenance::checkmark: return "checkmark";
  }
  return "containment_scan";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "containment_scan") return Provenance::containment_scan;
  if (s == "highlight") return Provenance::highlight;
  if (s == "checkmark") return Provenance::checkmark;
  throw InvalidArgument("unknown provenance: '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const Fact& f) {
  j = {{"warning_id", f.warning_id},
       {"relation", std::string(to_string(f.predicate.relation))},
       {"value", f.predicate.value},
       {"provenance", std::string(to_string(f.provenance))}};
}

void from_json(const nlohmann::json& j, Fact& f) {
  f.warning_id = j.at("warning_id").get<std::string>();
  f.predicate = Predicate::make(parse_relation(j.at("relation").get<std::string>()),
                                j.at("value").get<std::string>());
  f.provenance = parse_provenance(j.value("provenance", std::string("containment_scan")));
}

void KnowledgeBase::add_warning(const WarningId& id) { facts_.try_emplace(id); }

bool KnowledgeBase::add_fact(const WarningId& id, const Predicate& p, Provenance provenance) {
  auto& preds = facts_[id];
  if (!preds.insert(p).second) return false;
  inverted_[p].insert(id);
  provenance_.emplace(std::make_pair(id, p), provenance);
  return true;
}

bool KnowledgeBase::has_fact(const WarningId& id, const Predicate& p) const {
  auto it = facts_.find(id);
  return it != facts_.end() && it->second.contains(p);
}

const std::set<Predicate>& KnowledgeBase::predicates_of(const WarningId& id) const {
  auto it = facts_.find(id);
  if (it == facts_.end()) throw NotFound("unknown warning id: " + id);
  return it->second;
}

const IdSet& KnowledgeBase::holders(const Predicate& p) const {
  auto it = inverted_.find(p);
  return it == inverted_.end() ? kEmptyIds : it->second;
}

bool KnowledgeBase::matches(const WarningId& id, const Rule& rule) const {
  const auto& preds = predicates_of(id);
  return std::all_of(rule.predicates().begin(), rule.predicates().end(),
                     [&](const Predicate& p) { return preds.contains(p); });
}

IdSet KnowledgeBase::matched_set(const Rule& rule) const {
  return matched_set(rule.predicates());
}

IdSet KnowledgeBase::matched_set(const std::vector<Predicate>& conjunction) const {
  if (conjunction.empty()) return {};
  // Start from the rarest predicate.
  const IdSet* smallest = nullptr;
  for (const auto& p : conjunction) {
    const IdSet& h = holders(p);
    if (h.empty()) return {};
    if (smallest == nullptr || h.size() < smallest->size()) smallest = &h;
  }
  IdSet out;
  for (const auto& id : *smallest) {
    const auto& preds = facts_.at(id);
    if (std::all_of(conjunction.begin(), conjunction.end(),
                    [&](const Predicate& p) { return preds.contains(p); })) {
      out.insert(out.end(), id);
    }
  }
  return out;
}

std::vector<Predicate> KnowledgeBase::predicate_universe() const {
  std::vector<Predicate> out;
  out.reserve(inverted_.size());
  for (const auto& [p, ids] : inverted_) out.push_back(p);
  return out;
}

bool KnowledgeBase::is_non_discriminating(const Predicate& p, const IdSet& labeled) const {
  const IdSet& h = holders(p);
  if (h.size() == facts_.size()) return true;
  return std::none_of(h.begin(), h.end(), [&](const WarningId& id) { return labeled.contains(id); });
}

std::vector<WarningId> KnowledgeBase::warning_ids() const {
  std::vector<WarningId> out;
  out.reserve(facts_.size());
  for (const auto& [id, preds] : facts_) out.push_back(id);
  return out;
}

std::vector<Fact> KnowledgeBase::facts() const {
  std::vector<Fact> out;
  out.reserve(provenance_.size());
  for (const auto& [key, prov] : provenance_) out.push_back({key.first, key.second, prov});
  return out;
}

std::optional<Provenance> KnowledgeBase::provenance_of(const WarningId& id,
                                                       const Predicate& p) const {
  auto it = provenance_.find({id, p});
  if (it == provenance_.end()) return std::nullopt;
  return it->second;
}

void write_facts_jsonl(std::ostream& out, const std::vector<Fact>& facts) {
  for (const auto& f : facts) out << nlohmann::json(f).dump() << '\n';
}

std::vector<Fact> read_facts_jsonl(std::istream& in) {
  std::vector<Fact> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<Fact>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("facts line " + std::to_string(line_no) + ": " + e.what(), line_start);
    }
  }
  return out;
}

}  // namespace triage
