#include "triage/report.hpp"

#include "triage/rule_dsl.hpp"

namespace triage {

using nlohmann::json;

nlohmann::json rules_report(const Session& s) {
  json rules = json::array();
  for (const auto& r : s.hypothesis().rules) {
    rules.push_back({{"rule_id", r.id()},
                     {"display_name", r.display_name()},
                     {"dsl", format_rule(r)},
                     {"predicates", r.predicates()},
                     {"created_at_iteration", r.created_at_iteration()},
                     {"stats", s.rule_stats(r.id())}});
  }
  return {{"iteration", s.iteration()}, {"rules", rules}};
}

nlohmann::json hypothesis_summary(const Session& s) {
  const Hypothesis& h = s.hypothesis();
  json rules = json::array();
  for (const auto& r : h.rules) {
    rules.push_back({{"rule_id", r.id()}, {"display_name", r.display_name()}, {"dsl", format_rule(r)}});
  }
  return {{"iteration", s.iteration()},
          {"rules", rules},
          {"covered_uninteresting", h.covered_uninteresting.size()},
          {"uncovered_uninteresting", h.uncovered_uninteresting.size()},
          {"matched_uninspected_total", h.matched_uninspected_total},
          {"search_mode", std::string(to_string(h.mode))}};
}

nlohmann::json warning_view(const Session& s, const Warning& w) {
  json j = w;
  auto it = s.labels().find(w.id);
  if (it == s.labels().end()) {
    j["label"] = std::string(to_string(LabelValue::uninspected));
  } else {
    j["label"] = std::string(to_string(it->second.value));
    j["label_origin"] = std::string(to_string(it->second.origin));
    if (it->second.rule_id) j["label_rule_id"] = *it->second.rule_id;
  }
  j["matching_rules"] = s.matching_rules(w.id);
  return j;
}

}  // namespace triage
