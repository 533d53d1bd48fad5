#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "triage/ingestion.hpp"
#include "triage/knowledge_base.hpp"
#include "triage/rule_inference.hpp"
#include "triage/warning.hpp"

namespace triage {

enum class EventKind { label_instance, label_rule, highlight, checkmark, rename_rule };

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

/// One feedback action. Payload keys by kind:
///   label_instance {warning_id, value}   label_rule {rule_id, value}
///   highlight {warning_id, span}         checkmark {warning_id, predicate}
///   rename_rule {rule_id, name}
struct FeedbackEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::label_instance;
  std::int64_t timestamp_ms = 0;  // supplied by the caller so replay is exact
  nlohmann::json payload;

  bool operator==(const FeedbackEvent&) const = default;
};

void to_json(nlohmann::json& j, const FeedbackEvent& e);
void from_json(const nlohmann::json& j, FeedbackEvent& e);

struct RuleStats {
  RuleId rule_id = 0;
  std::size_t total_matched = 0;
  std::size_t uninspected = 0;
  std::size_t marked_uninteresting = 0;
  std::size_t marked_interesting = 0;

  bool operator==(const RuleStats&) const = default;
};

void to_json(nlohmann::json& j, const RuleStats& s);
void from_json(const nlohmann::json& j, RuleStats& s);

inline constexpr int kSessionFormatVersion = 1;

/// State of one triage session. Every mutating call appends exactly one event
/// on success, re-runs inference, and leaves the state untouched on failure.
class Session {
 public:
  Session() = default;
  Session(CorpusManifest manifest, std::vector<Warning> corpus, KnowledgeBase kb,
          InferenceConfig config = {});

  const Hypothesis& label_instance(const WarningId& id, LabelValue value,
                                   std::int64_t timestamp_ms = 0);

  // Labels every uninspected warning the rule matches. Throws Conflict for a
  // rule id that existed earlier but is no longer in the hypothesis.
  std::size_t label_rule(RuleId rule_id, LabelValue value, std::int64_t timestamp_ms = 0);

  // Returns the number of new facts. `span` is snippet-relative.
  std::size_t highlight(const WarningId& id, const SourceSpan& span,
                        std::int64_t timestamp_ms = 0);

  // Toggles the pin on `predicate`; returns true if it is now pinned.
  bool checkmark(const WarningId& id, const Predicate& predicate, std::int64_t timestamp_ms = 0);

  void rename_rule(RuleId rule_id, const std::string& name, std::int64_t timestamp_ms = 0);

  // Dispatches a logged event; seq must be the next sequence number.
  void apply(const FeedbackEvent& event);

  std::vector<RuleStats> rule_stats() const;
  RuleStats rule_stats(RuleId rule_id) const;
  std::vector<RuleId> matching_rules(const WarningId& id) const;

  LabelValue label_of(const WarningId& id) const;
  IdSet e_plus() const;
  IdSet e_minus() const;
  IdSet warning_ids() const;
  const Warning& warning(const WarningId& id) const;

  const CorpusManifest& manifest() const noexcept { return manifest_; }
  const std::vector<Warning>& corpus() const noexcept { return corpus_; }
  const KnowledgeBase& kb() const noexcept { return kb_; }
  const std::map<WarningId, Label>& labels() const noexcept { return labels_; }
  const Hypothesis& hypothesis() const noexcept { return hypothesis_; }
  std::uint64_t iteration() const noexcept { return events_.size(); }
  const std::vector<FeedbackEvent>& events() const noexcept { return events_; }
  const std::set<Predicate>& pinned() const noexcept { return pinned_; }
  const InferenceConfig& config() const noexcept { return config_; }

  // A fresh session over the same corpus and containment facts, with the
  // event log replayed onto it.
  Session replay() const;

  nlohmann::json to_json() const;
  static Session from_json(const nlohmann::json& j);

  bool operator==(const Session&) const = default;

 private:
  void check_warning(const WarningId& id) const;
  const Rule& current_rule(RuleId rule_id) const;
  void append(EventKind kind, std::int64_t timestamp_ms, nlohmann::json payload);
  void reinfer();

  CorpusManifest manifest_;
  std::vector<Warning> corpus_;
  std::map<WarningId, std::size_t> index_;
  KnowledgeBase kb_;
  InferenceConfig config_;
  std::map<WarningId, Label> labels_;
  std::set<Predicate> pinned_;
  Hypothesis hypothesis_;
  RuleId next_rule_id_ = 1;
  std::vector<FeedbackEvent> events_;
};

// Serialized form: pretty-printed JSON with sorted keys, so equal sessions
// serialize to identical bytes.
std::string serialize_session(const Session& s);

// Atomic write via a temporary file and rename.
void save_session(const Session& s, const std::filesystem::path& path);
// Throws ParseError for malformed files and UnsupportedVersion for other
// format versions.
Session load_session(const std::filesystem::path& path);

/// Exclusive advisory lock on a session file, held as `<path>.lock`.
class SessionLock {
 public:
  explicit SessionLock(const std::filesystem::path& session_path);
  ~SessionLock();
  SessionLock(const SessionLock&) = delete;
  SessionLock& operator=(const SessionLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

}  // namespace triage
