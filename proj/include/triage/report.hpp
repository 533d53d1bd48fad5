#pragma once

#include "json.hpp"

#include "triage/session.hpp"

namespace triage {

// Shared JSON views of a session. The CLI and the HTTP service both render
// through these so the two interfaces agree byte for byte.

// {"iteration", "rules": [{rule_id, display_name, dsl, predicates,
// created_at_iteration, stats}]}
nlohmann::json rules_report(const Session& s);

// Compact hypothesis view returned after every mutation.
nlohmann::json hypothesis_summary(const Session& s);

// One warning with its label and matching rule ids.
nlohmann::json warning_view(const Session& s, const Warning& w);

}  // namespace triage
