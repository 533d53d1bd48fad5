#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "triage/warning.hpp"

namespace triage::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
  kPartialIngest = 3,  // finished, but some records or sources were skipped
};

// argv[0] is the program name. Primary output goes to `out`, diagnostics to
// `err`. Never throws.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

// "l1:c1-l2:c2", snippet-relative. Throws InvalidArgument.
SourceSpan parse_span(std::string_view text);

}  // namespace triage::cli
