#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "triage/warning.hpp"

namespace triage {

// One rule per line:
//   rule 3 "Config reads": package("com.acme") & code_element("call:getProperty")
// Values and names are double-quoted; '"' and '\' are backslash-escaped.
std::string format_rule(const Rule& rule);
std::string format_predicate(const Predicate& p);

// Throws ParseError (with the byte offset inside the line) on malformed input.
Rule parse_rule(std::string_view line);

// Parses a whole document, skipping blank lines and lines starting with '#'.
std::vector<Rule> parse_rules(std::string_view text);

}  // namespace triage
