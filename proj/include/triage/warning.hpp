#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace triage {

using WarningId = std::string;
using IdSet = std::set<WarningId>;
using RuleId = std::int64_t;

enum class Analyzer { infer, spotbugs, generic };

std::string_view to_string(Analyzer a);
Analyzer parse_analyzer(std::string_view s);

/// Location of a finding. Lines are 1-based; a column of 0 means unknown.
struct SourceSpan {
  std::string file_path;
  int start_line = 1;
  int end_line = 1;
  int start_col = 0;
  int end_col = 0;

  bool valid() const noexcept;
  bool operator==(const SourceSpan&) const = default;
};

/// Structural context of the code a warning points into. Every member may be
/// empty when the source could not be analyzed.
struct Enclosing {
  std::string package;
  std::string class_name;
  std::string method_name;
  std::string return_type;
  std::vector<std::string> fields_used;
  std::vector<std::string> supertypes;

  bool operator==(const Enclosing&) const = default;
};

struct Warning {
  WarningId id;
  Analyzer analyzer = Analyzer::generic;
  std::string kind;
  std::string message;
  SourceSpan location;
  std::string snippet;
  Enclosing enclosing;

  bool operator==(const Warning&) const = default;
};

enum class LabelValue { uninteresting, interesting, uninspected };
enum class LabelOrigin { instance, rule_application, simulated };

std::string_view to_string(LabelValue v);
std::string_view to_string(LabelOrigin o);
LabelValue parse_label_value(std::string_view s);
LabelOrigin parse_label_origin(std::string_view s);

struct Label {
  LabelValue value = LabelValue::uninspected;
  LabelOrigin origin = LabelOrigin::instance;
  std::optional<RuleId> rule_id;  // set iff origin == rule_application

  bool valid() const noexcept {
    return (origin == LabelOrigin::rule_application) == rule_id.has_value();
  }
  bool operator==(const Label&) const = default;
};

// Declaration order is the canonical predicate order.
enum class Relation { package, classname, rettype, fields, subtype, code_element };

std::string_view to_string(Relation r);
Relation parse_relation(std::string_view s);

/// Canonical form of a predicate value. Type-like relations drop all
/// whitespace; code elements collapse whitespace runs. Idempotent.
std::string normalize_value(Relation r, std::string_view value);

struct Predicate {
  Relation relation = Relation::package;
  std::string value;

  // Normalizes the value; throws InvalidArgument if it ends up empty.
  static Predicate make(Relation relation, std::string_view value);

  auto operator<=>(const Predicate&) const = default;
  bool operator==(const Predicate&) const = default;
};

/// A conjunction of predicates, kept sorted and duplicate-free.
class Rule {
 public:
  Rule() = default;
  Rule(RuleId id, std::vector<Predicate> predicates, std::int64_t created_at_iteration = 0);

  RuleId id() const noexcept { return id_; }
  void set_id(RuleId id) noexcept { id_ = id; }
  const std::string& display_name() const noexcept { return display_name_; }
  void set_display_name(std::string name) { display_name_ = std::move(name); }
  const std::vector<Predicate>& predicates() const noexcept { return predicates_; }
  std::int64_t created_at_iteration() const noexcept { return created_at_; }
  void set_created_at_iteration(std::int64_t it) noexcept { created_at_ = it; }

  bool same_predicates(const Rule& other) const { return predicates_ == other.predicates_; }
  bool contains(const Predicate& p) const;

  bool operator==(const Rule&) const = default;

 private:
  RuleId id_ = 0;
  std::string display_name_;
  std::vector<Predicate> predicates_;
  std::int64_t created_at_ = 0;
};

std::string default_rule_name(RuleId id);

// Canonical ordering of rules by predicate list only.
bool canonical_less(const Rule& a, const Rule& b);

/// Collapses whitespace runs and strips directory prefixes of absolute paths.
std::string canonical_message(std::string_view message);
std::string canonical_path(std::string_view path);

/// Stable 16-hex-digit identifier for a finding. Throws InvalidArgument on
/// empty kind/path or a non-positive line.
WarningId warning_identity(Analyzer analyzer, std::string_view kind, std::string_view path,
                           int line, std::string_view message);

// JSON mapping (field names match the struct members).
void to_json(nlohmann::json& j, const SourceSpan& s);
void from_json(const nlohmann::json& j, SourceSpan& s);
void to_json(nlohmann::json& j, const Enclosing& e);
void from_json(const nlohmann::json& j, Enclosing& e);
void to_json(nlohmann::json& j, const Warning& w);
void from_json(const nlohmann::json& j, Warning& w);
void to_json(nlohmann::json& j, const Label& l);
void from_json(const nlohmann::json& j, Label& l);
void to_json(nlohmann::json& j, const Predicate& p);
void from_json(const nlohmann::json& j, Predicate& p);
void to_json(nlohmann::json& j, const Rule& r);
void from_json(const nlohmann::json& j, Rule& r);

}  // namespace triage
