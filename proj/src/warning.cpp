#include "triage/warning.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include "triage/error.hpp"

namespace triage {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
                const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  throw InvalidArgument(std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 3> kAnalyzerNames{"infer", "spotbugs", "generic"};
constexpr std::array<std::string_view, 3> kLabelValueNames{"uninteresting", "interesting",
                                                           "uninspected"};
constexpr std::array<std::string_view, 3> kLabelOriginNames{"instance", "rule_application",
                                                            "simulated"};
constexpr std::array<std::string_view, 6> kRelationNames{
    "package", "classname", "rettype", "fields", "subtype", "code_element"};

}  // namespace

std::string_view to_string(Analyzer a) { return kAnalyzerNames[static_cast<std::size_t>(a)]; }
Analyzer parse_analyzer(std::string_view s) {
  return parse_enum<Analyzer>(s, kAnalyzerNames, "analyzer");
}
std::string_view to_string(LabelValue v) {
  return kLabelValueNames[static_cast<std::size_t>(v)];
}
LabelValue parse_label_value(std::string_view s) {
  return parse_enum<LabelValue>(s, kLabelValueNames, "label value");
}
std::string_view to_string(LabelOrigin o) {
  return kLabelOriginNames[static_cast<std::size_t>(o)];
}
LabelOrigin parse_label_origin(std::string_view s) {
  return parse_enum<LabelOrigin>(s, kLabelOriginNames, "label origin");
}
std::string_view to_string(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }
Relation parse_relation(std::string_view s) {
  return parse_enum<Relation>(s, kRelationNames, "relation");
}

bool SourceSpan::valid() const noexcept {
  if (start_line < 1 || end_line < start_line) return false;
  if (start_col < 0 || end_col < 0) return false;
  if (start_line == end_line && start_col > 0 && end_col > 0 && start_col > end_col) return false;
  return true;
}

std::string normalize_value(Relation r, std::string_view value) {
  if (r == Relation::code_element) return collapse_whitespace(value);
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    if (!is_space(c)) out.push_back(c);
  }
  return out;
}

Predicate Predicate::make(Relation relation, std::string_view value) {
  Predicate p{relation, normalize_value(relation, value)};
  if (p.value.empty()) {
    throw InvalidArgument("predicate " + std::string(to_string(relation)) + " has an empty value");
  }
  return p;
}

Rule::Rule(RuleId id, std::vector<Predicate> predicates, std::int64_t created_at_iteration)
    : id_(id), display_name_(default_rule_name(id)), predicates_(std::move(predicates)),
      created_at_(created_at_iteration) {
  std::sort(predicates_.begin(), predicates_.end());
  predicates_.erase(std::unique(predicates_.begin(), predicates_.end()), predicates_.end());
  if (predicates_.empty()) throw InvalidArgument("a rule needs at least one predicate");
}

bool Rule::contains(const Predicate& p) const {
  return std::binary_search(predicates_.begin(), predicates_.end(), p);
}

std::string default_rule_name(RuleId id) { return "Rule " + std::to_string(id); }

bool canonical_less(const Rule& a, const Rule& b) {
  return std::lexicographical_compare(a.predicates().begin(), a.predicates().end(),
                                      b.predicates().begin(), b.predicates().end());
}

std::string canonical_message(std::string_view message) {
  static const std::regex abs_path_prefix(
      R"((^|[\s"'`(\[])(?:[A-Za-z]:)?[/\\](?:[^\s/\\"'`]+[/\\])+)");
  std::string stripped =
      std::regex_replace(std::string(message), abs_path_prefix, "$1");
  return collapse_whitespace(stripped);
}

std::string canonical_path(std::string_view path) {
  std::string p(path);
  std::replace(p.begin(), p.end(), '\\', '/');
  while (p.rfind("./", 0) == 0) p.erase(0, 2);
  return p;
}

WarningId warning_identity(Analyzer analyzer, std::string_view kind, std::string_view path,
                           int line, std::string_view message) {
  if (kind.empty()) throw InvalidArgument("warning kind must not be empty");
  if (path.empty()) throw InvalidArgument("warning path must not be empty");
  if (line < 1) throw InvalidArgument("warning line must be >= 1");

  std::string material;
  material += to_string(analyzer);
  material += '\x1f';
  material += kind;
  material += '\x1f';
  material += canonical_path(path);
  material += '\x1f';
  material += std::to_string(line);
  material += '\x1f';
  material += canonical_message(message);

  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < 8; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---- JSON ----

void to_json(nlohmann::json& j, const SourceSpan& s) {
  j = {{"file_path", s.file_path}, {"start_line", s.start_line}, {"end_line", s.end_line},
       {"start_col", s.start_col}, {"end_col", s.end_col}};
}

void from_json(const nlohmann::json& j, SourceSpan& s) {
  s.file_path = j.value("file_path", std::string{});
  s.start_line = j.at("start_line").get<int>();
  s.end_line = j.value("end_line", s.start_line);
  s.start_col = j.value("start_col", 0);
  s.end_col = j.value("end_col", 0);
}

void to_json(nlohmann::json& j, const Enclosing& e) {
  j = {{"package", e.package},         {"class_name", e.class_name},
       {"method_name", e.method_name}, {"return_type", e.return_type},
       {"fields_used", e.fields_used}, {"supertypes", e.supertypes}};
}

void from_json(const nlohmann::json& j, Enclosing& e) {
  e.package = j.value("package", std::string{});
  e.class_name = j.value("class_name", std::string{});
  e.method_name = j.value("method_name", std::string{});
  e.return_type = j.value("return_type", std::string{});
  e.fields_used = j.value("fields_used", std::vector<std::string>{});
  e.supertypes = j.value("supertypes", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const Warning& w) {
  j = {{"id", w.id},
       {"analyzer", std::string(to_string(w.analyzer))},
       {"kind", w.kind},
       {"message", w.message},
       {"location", w.location},
       {"snippet", w.snippet},
       {"enclosing", w.enclosing}};
}

void from_json(const nlohmann::json& j, Warning& w) {
  w.id = j.at("id").get<std::string>();
  w.analyzer = parse_analyzer(j.at("analyzer").get<std::string>());
  w.kind = j.at("kind").get<std::string>();
  w.message = j.value("message", std::string{});
  w.location = j.at("location").get<SourceSpan>();
  w.snippet = j.value("snippet", std::string{});
  w.enclosing = j.contains("enclosing") ? j.at("enclosing").get<Enclosing>() : Enclosing{};
}

void to_json(nlohmann::json& j, const Label& l) {
  j = {{"value", std::string(to_string(l.value))}, {"origin", std::string(to_string(l.origin))}};
  if (l.rule_id) j["rule_id"] = *l.rule_id;
}

void from_json(const nlohmann::json& j, Label& l) {
  l.value = parse_label_value(j.at("value").get<std::string>());
  l.origin = parse_label_origin(j.value("origin", std::string("instance")));
  l.rule_id.reset();
  if (j.contains("rule_id")) l.rule_id = j.at("rule_id").get<RuleId>();
}

void to_json(nlohmann::json& j, const Predicate& p) {
  j = {{"relation", std::string(to_string(p.relation))}, {"value", p.value}};
}

void from_json(const nlohmann::json& j, Predicate& p) {
  p = Predicate::make(parse_relation(j.at("relation").get<std::string>()),
                      j.at("value").get<std::string>());
}

void to_json(nlohmann::json& j, const Rule& r) {
  j = {{"rule_id", r.id()},
       {"display_name", r.display_name()},
       {"predicates", r.predicates()},
       {"created_at_iteration", r.created_at_iteration()}};
}

void from_json(const nlohmann::json& j, Rule& r) {
  r = Rule(j.at("rule_id").get<RuleId>(), j.at("predicates").get<std::vector<Predicate>>(),
           j.value("created_at_iteration", std::int64_t{0}));
  if (j.contains("display_name")) r.set_display_name(j.at("display_name").get<std::string>());
}

}  // namespace triage
