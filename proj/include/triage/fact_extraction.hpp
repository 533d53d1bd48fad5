#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triage/ingestion.hpp"
#include "triage/knowledge_base.hpp"
#include "triage/warning.hpp"

namespace triage {

enum class ControlFlow { if_then, loop, try_catch, null_check };

std::string_view to_string(ControlFlow c);

/// Surface elements of a highlighted code expression. Each list is sorted
/// and duplicate-free.
struct ExpressionElements {
  std::vector<std::string> calls;
  std::vector<std::string> var_types;
  std::vector<std::string> literals;
  std::vector<ControlFlow> control_flow;

  bool empty() const {
    return calls.empty() && var_types.empty() && literals.empty() && control_flow.empty();
  }
  // Canonical code_element tags: "call:x", "type:x", "lit:x", "cf:x".
  std::vector<Predicate> predicates() const;

  bool operator==(const ExpressionElements&) const = default;
};

struct ContainmentResult {
  std::vector<Fact> facts;
  std::optional<Diagnostic> diagnostic;
};

/// Containment facts for one warning from its enclosing source unit: package,
/// classname, rettype, one fields fact per referenced field, one subtype fact
/// per direct supertype. Fills warning.enclosing. Never throws for bad input;
/// problems come back as a diagnostic with an empty fact list.
ContainmentResult extract_containment_facts(Warning& warning,
                                            const std::filesystem::path& source_root);

/// Batch form with a per-file parse cache. Warnings are updated in place.
struct ExtractionResult {
  std::vector<Fact> facts;
  std::vector<Diagnostic> diagnostics;
};
ExtractionResult extract_all_containment_facts(std::vector<Warning>& warnings,
                                               const std::filesystem::path& source_root);

/// Parses the highlighted span of a snippet. `highlight` is relative to the
/// snippet (line 1 = first snippet line; col 0 = line boundary). Throws
/// InvalidArgument if the span lies outside the snippet.
ExpressionElements extract_expression_elements(std::string_view snippet,
                                               const SourceSpan& highlight);

bool span_within_snippet(std::string_view snippet, const SourceSpan& span);

/// Adds code_element facts to every warning whose snippet contains one of the
/// elements. Returns the number of newly inserted facts; idempotent.
std::size_t propagate_expression_facts(KnowledgeBase& kb, const ExpressionElements& elements,
                                       const std::vector<Warning>& warnings,
                                       Provenance provenance = Provenance::highlight);

}  // namespace triage
