#include "triage/fact_extraction.hpp"

#include <algorithm>
#include <climits>
#include <set>

#include "triage/error.hpp"
#include "triage/java_source.hpp"

namespace triage {

namespace fs = std::filesystem;
using java::Token;
using java::TokenKind;

std::string_view to_string(ControlFlow c) {
  switch (c) {
    case ControlFlow::if_then: return "if_then";
    case ControlFlow::loop: return "loop";
    case ControlFlow::try_catch: return "try_catch";
    case ControlFlow::null_check: return "null_check";
  }
  return "if_then";
}

std::vector<Predicate> ExpressionElements::predicates() const {
  std::vector<Predicate> out;
  for (const auto& c : calls) out.push_back(Predicate::make(Relation::code_element, "call:" + c));
  for (const auto& t : var_types) out.push_back(Predicate::make(Relation::code_element, "type:" + t));
  for (const auto& l : literals) out.push_back(Predicate::make(Relation::code_element, "lit:" + l));
  for (auto c : control_flow) {
    out.push_back(Predicate::make(Relation::code_element, "cf:" + std::string(to_string(c))));
  }
  return out;
}

namespace {

bool is_op(const Token& t, std::string_view s) { return t.kind == TokenKind::op && t.text == s; }
bool is_kw(const Token& t, std::string_view s) {
  return t.kind == TokenKind::keyword && t.text == s;
}

bool type_end(const Token& t) {
  return t.kind == TokenKind::identifier || java::is_primitive(t.text) || is_op(t, ">") ||
         is_op(t, "]");
}

// Walks back from the last token of a type to its simple name.
std::optional<std::string> type_name_ending_at(const std::vector<Token>& toks, std::size_t k) {
  while (true) {
    const Token& t = toks[k];
    if (is_op(t, "]")) {
      if (k < 2) return std::nullopt;
      k -= 2;
      continue;
    }
    if (is_op(t, ">")) {
      int depth = 0;
      std::size_t j = k;
      while (true) {
        if (is_op(toks[j], ">")) ++depth;
        if (is_op(toks[j], "<") && --depth == 0) break;
        if (j == 0) return std::nullopt;
        --j;
      }
      if (j == 0) return std::nullopt;
      k = j - 1;
      continue;
    }
    if (t.kind == TokenKind::identifier || java::is_primitive(t.text)) return t.text;
    return std::nullopt;
  }
}

struct Declaration {
  std::size_t type_token;
  std::size_t name_token;
  std::string type;
};

std::vector<Declaration> declarations(const std::vector<Token>& toks) {
  std::vector<Declaration> out;
  for (std::size_t k = 1; k + 1 < toks.size(); ++k) {
    const Token& name = toks[k];
    const Token& next = toks[k + 1];
    if (name.kind != TokenKind::identifier) continue;
    if (!(is_op(next, "=") || is_op(next, ";") || is_op(next, ":") || is_op(next, ",") ||
          is_op(next, ")"))) {
      continue;
    }
    if (!type_end(toks[k - 1])) continue;
    // `x > y)` is a comparison, not a generic declaration.
    if (is_op(toks[k - 1], ">") && !is_op(next, "=") && !is_op(next, ";") && !is_op(next, ":")) {
      continue;
    }
    if (auto type = type_name_ending_at(toks, k - 1)) {
      out.push_back({k - 1, k, *type});
    }
  }
  return out;
}

bool is_call_site(const std::vector<Token>& toks, std::size_t k) {
  if (toks[k].kind != TokenKind::identifier) return false;
  if (k + 1 >= toks.size() || !is_op(toks[k + 1], "(")) return false;
  if (k == 0) return true;
  const Token& prev = toks[k - 1];
  if (is_kw(prev, "new")) return false;
  // `String readFile(` declares a method.
  if (prev.kind == TokenKind::identifier || java::is_primitive(prev.text)) return false;
  return true;
}

bool is_literal(const Token& t) {
  return t.kind == TokenKind::string_literal || t.kind == TokenKind::char_literal ||
         t.kind == TokenKind::number || is_kw(t, "true") || is_kw(t, "false");
}

std::optional<ControlFlow> control_flow_of(const Token& t) {
  if (t.kind != TokenKind::keyword) return std::nullopt;
  if (t.text == "if") return ControlFlow::if_then;
  if (t.text == "for" || t.text == "while" || t.text == "do") return ControlFlow::loop;
  if (t.text == "try" || t.text == "catch" || t.text == "finally") return ControlFlow::try_catch;
  return std::nullopt;
}

bool null_comparison_at(const std::vector<Token>& toks, std::size_t k,
                        const std::vector<bool>& selected) {
  if (!is_kw(toks[k], "null") || !selected[k]) return false;
  auto cmp = [&](std::size_t j) {
    return selected[j] && (is_op(toks[j], "==") || is_op(toks[j], "!="));
  };
  return (k > 0 && cmp(k - 1)) || (k + 1 < toks.size() && cmp(k + 1));
}

std::vector<std::string> snippet_lines(std::string_view snippet) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    std::size_t end = snippet.find('\n', start);
    if (end == std::string_view::npos) {
      lines.emplace_back(snippet.substr(start));
      break;
    }
    lines.emplace_back(snippet.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

struct SnippetFeatures {
  std::set<std::string> calls;
  std::set<std::string> words;
  std::set<std::string> literals;
  std::set<ControlFlow> control_flow;
};

SnippetFeatures scan_snippet(std::string_view snippet) {
  SnippetFeatures f;
  auto toks = java::tokenize(snippet);
  std::vector<bool> all(toks.size(), true);
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const Token& t = toks[k];
    if (is_call_site(toks, k)) f.calls.insert(t.text);
    if (t.kind == TokenKind::identifier || t.kind == TokenKind::keyword) f.words.insert(t.text);
    if (is_literal(t)) f.literals.insert(normalize_value(Relation::code_element, t.text));
    if (auto cf = control_flow_of(t)) f.control_flow.insert(*cf);
    if (null_comparison_at(toks, k, all)) f.control_flow.insert(ControlFlow::null_check);
  }
  return f;
}

void fill_facts(Warning& w, const java::Outline& outline, ContainmentResult& result) {
  int line = w.location.start_line;
  int type_index = outline.innermost_type(line);
  if (type_index < 0) {
    result.diagnostic = Diagnostic{"no enclosing type at " + w.location.file_path + ":" +
                                       std::to_string(line),
                                   std::nullopt};
    return;
  }
  const auto& type = outline.types[type_index];
  Enclosing enc;
  enc.package = outline.package;
  enc.class_name = type.name;
  enc.supertypes = type.supertypes;
  if (const auto* method = outline.enclosing_method(type_index, line)) {
    enc.method_name = method->name;
    enc.return_type = method->return_type;
    enc.fields_used = java::fields_used(outline, type_index, *method);
  }
  w.enclosing = enc;

  auto add = [&](Relation r, const std::string& value) {
    if (normalize_value(r, value).empty()) return;
    Fact f{w.id, Predicate::make(r, value), Provenance::containment_scan};
    if (std::find(result.facts.begin(), result.facts.end(), f) == result.facts.end()) {
      result.facts.push_back(std::move(f));
    }
  };
  add(Relation::package, enc.package);
  add(Relation::classname, enc.class_name);
  add(Relation::rettype, enc.return_type);
  for (const auto& f : enc.fields_used) add(Relation::fields, f);
  for (const auto& s : enc.supertypes) add(Relation::subtype, s);
}

}  // namespace

ContainmentResult extract_containment_facts(Warning& warning, const fs::path& source_root) {
  ContainmentResult result;
  std::string text;
  try {
    text = read_file(source_root / warning.location.file_path);
  } catch (const IoError&) {
    result.diagnostic =
        Diagnostic{"source file not found: " + warning.location.file_path, std::nullopt};
    return result;
  }
  fill_facts(warning, java::parse_outline(text), result);
  return result;
}

ExtractionResult extract_all_containment_facts(std::vector<Warning>& warnings,
                                               const fs::path& source_root) {
  std::map<std::string, std::optional<java::Outline>> cache;
  ExtractionResult out;
  for (std::size_t i = 0; i < warnings.size(); ++i) {
    Warning& w = warnings[i];
    auto [it, inserted] = cache.try_emplace(w.location.file_path);
    if (inserted) {
      try {
        it->second = java::parse_outline(read_file(source_root / w.location.file_path));
      } catch (const IoError&) {
      }
    }
    ContainmentResult r;
    if (!it->second) {
      r.diagnostic = Diagnostic{"source file not found: " + w.location.file_path, i};
    } else {
      fill_facts(w, *it->second, r);
    }
    out.facts.insert(out.facts.end(), r.facts.begin(), r.facts.end());
    if (r.diagnostic) {
      r.diagnostic->record_index = i;
      out.diagnostics.push_back(*r.diagnostic);
    }
  }
  return out;
}

bool span_within_snippet(std::string_view snippet, const SourceSpan& span) {
  if (!span.valid()) return false;
  auto lines = snippet_lines(snippet);
  if (span.end_line > static_cast<int>(lines.size())) return false;
  auto len = [&](int l) { return static_cast<int>(lines[static_cast<std::size_t>(l - 1)].size()); };
  if (span.start_col > len(span.start_line) + 1) return false;
  if (span.end_col > len(span.end_line) + 1) return false;
  return true;
}

ExpressionElements extract_expression_elements(std::string_view snippet,
                                               const SourceSpan& highlight) {
  if (!span_within_snippet(snippet, highlight)) {
    throw InvalidArgument("highlight span lies outside the snippet");
  }
  auto toks = java::tokenize(snippet);
  const int start_col = highlight.start_col == 0 ? 1 : highlight.start_col;
  const int end_col = highlight.end_col == 0 ? INT_MAX : highlight.end_col;
  std::vector<bool> selected(toks.size(), false);
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const Token& t = toks[k];
    bool starts_inside = t.line > highlight.start_line ||
                         (t.line == highlight.start_line && t.col >= start_col);
    bool ends_inside = t.end_line < highlight.end_line ||
                       (t.end_line == highlight.end_line && t.end_col <= end_col);
    selected[k] = starts_inside && ends_inside;
  }

  ExpressionElements out;
  std::map<std::string, std::string> declared;  // variable -> type, whole snippet
  for (const auto& d : declarations(toks)) {
    declared.try_emplace(toks[d.name_token].text, d.type);
    if (selected[d.type_token] || selected[d.name_token]) out.var_types.push_back(d.type);
  }

  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (!selected[k]) continue;
    const Token& t = toks[k];
    if (is_call_site(toks, k)) {
      out.calls.push_back(t.text);
    } else if (t.kind == TokenKind::identifier) {
      bool member = k > 0 && is_op(toks[k - 1], ".");
      if (!member) {
        if (auto it = declared.find(t.text); it != declared.end()) {
          out.var_types.push_back(it->second);
        }
      }
      if (k > 0 && is_kw(toks[k - 1], "new")) out.var_types.push_back(t.text);
    }
    if (is_literal(t)) out.literals.push_back(normalize_value(Relation::code_element, t.text));
    if (auto cf = control_flow_of(t)) out.control_flow.push_back(*cf);
    if (null_comparison_at(toks, k, selected)) out.control_flow.push_back(ControlFlow::null_check);
  }
  sort_unique(out.calls);
  sort_unique(out.var_types);
  sort_unique(out.literals);
  sort_unique(out.control_flow);
  out.literals.erase(std::remove(out.literals.begin(), out.literals.end(), std::string{}),
                     out.literals.end());
  return out;
}

std::size_t propagate_expression_facts(KnowledgeBase& kb, const ExpressionElements& elements,
                                       const std::vector<Warning>& warnings,
                                       Provenance provenance) {
  if (elements.empty()) return 0;
  std::size_t added = 0;
  for (const auto& w : warnings) {
    if (w.snippet.empty()) continue;
    SnippetFeatures f = scan_snippet(w.snippet);
    auto add = [&](const std::string& tag) {
      if (kb.add_fact(w.id, Predicate::make(Relation::code_element, tag), provenance)) ++added;
    };
    for (const auto& c : elements.calls) {
      if (f.calls.contains(c)) add("call:" + c);
    }
    for (const auto& t : elements.var_types) {
      if (f.words.contains(t)) add("type:" + t);
    }
    for (const auto& l : elements.literals) {
      if (f.literals.contains(l)) add("lit:" + l);
    }
    for (auto c : elements.control_flow) {
      if (f.control_flow.contains(c)) add("cf:" + std::string(to_string(c)));
    }
  }
  return added;
}

}  // namespace triage
