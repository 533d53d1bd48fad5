#include "triage/rule_dsl.hpp"

#include <cctype>
#include <charconv>

#include "triage/error.hpp"

namespace triage {

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class LineParser {
 public:
  explicit LineParser(std::string_view text) : text_(text) {}

  void skip_spaces() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_spaces();
    return pos_ >= text_.size();
  }

  void expect(std::string_view token) {
    skip_spaces();
    if (text_.substr(pos_, token.size()) != token) {
      fail("expected '" + std::string(token) + "'");
    }
    pos_ += token.size();
  }

  bool try_consume(char c) {
    skip_spaces();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RuleId integer() {
    skip_spaces();
    RuleId value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{}) fail("expected a rule id");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  std::string identifier() {
    skip_spaces();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a relation name");
    return std::string(text_.substr(start, pos_ - start));
  }

  // Unknown names are reported at their first byte.
  Relation relation() {
    skip_spaces();
    std::size_t start = pos_;
    std::string name = identifier();
    try {
      return parse_relation(name);
    } catch (const InvalidArgument& e) {
      throw ParseError("rule DSL: " + std::string(e.what()), start);
    }
  }

  std::string quoted() {
    skip_spaces();
    if (pos_ >= text_.size() || text_[pos_] != '"') fail("expected '\"'");
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        ++pos_;
        if (pos_ >= text_.size()) break;
      }
      out.push_back(text_[pos_++]);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("rule DSL: " + what, pos_);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string format_predicate(const Predicate& p) {
  return std::string(to_string(p.relation)) + "(" + quote(p.value) + ")";
}

std::string format_rule(const Rule& rule) {
  std::string out = "rule " + std::to_string(rule.id()) + " " + quote(rule.display_name()) + ": ";
  bool first = true;
  for (const auto& p : rule.predicates()) {
    if (!first) out += " & ";
    first = false;
    out += format_predicate(p);
  }
  return out;
}

Rule parse_rule(std::string_view line) {
  LineParser in(line);
  in.expect("rule");
  RuleId id = in.integer();
  std::string name = in.quoted();
  in.expect(":");
  std::vector<Predicate> preds;
  do {
    Relation relation = in.relation();
    in.expect("(");
    std::string value = in.quoted();
    in.expect(")");
    try {
      preds.push_back(Predicate::make(relation, value));
    } catch (const InvalidArgument& e) {
      in.fail(e.what());
    }
  } while (in.try_consume('&'));
  if (!in.at_end()) in.fail("trailing characters");
  Rule r(id, std::move(preds));
  r.set_display_name(std::move(name));
  return r;
}

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> rules;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') rules.push_back(parse_rule(line));
    start = end + 1;
  }
  return rules;
}

}  // namespace triage
