#include "triage/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>

#include "triage/error.hpp"
#include "triage/fact_extraction.hpp"

namespace triage {

using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::label_instance: return "label_instance";
    case EventKind::label_rule: return "label_rule";
    case EventKind::highlight: return "highlight";
    case EventKind::checkmark: return "checkmark";
    case EventKind::rename_rule: return "rename_rule";
  }
  return "label_instance";
}

EventKind parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::label_instance, EventKind::label_rule, EventKind::highlight,
                 EventKind::checkmark, EventKind::rename_rule}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown event kind: '" + std::string(s) + "'");
}

void to_json(json& j, const FeedbackEvent& e) {
  j = {{"seq", e.seq},
       {"kind", std::string(to_string(e.kind))},
       {"timestamp_ms", e.timestamp_ms},
       {"payload", e.payload}};
}

void from_json(const json& j, FeedbackEvent& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
  e.payload = j.at("payload");
}

void to_json(json& j, const RuleStats& s) {
  j = {{"rule_id", s.rule_id},
       {"total_matched", s.total_matched},
       {"uninspected", s.uninspected},
       {"marked_uninteresting", s.marked_uninteresting},
       {"marked_interesting", s.marked_interesting}};
}

void from_json(const json& j, RuleStats& s) {
  s.rule_id = j.at("rule_id").get<RuleId>();
  s.total_matched = j.at("total_matched").get<std::size_t>();
  s.uninspected = j.at("uninspected").get<std::size_t>();
  s.marked_uninteresting = j.at("marked_uninteresting").get<std::size_t>();
  s.marked_interesting = j.at("marked_interesting").get<std::size_t>();
}

Session::Session(CorpusManifest manifest, std::vector<Warning> corpus, KnowledgeBase kb,
                 InferenceConfig config)
    : manifest_(std::move(manifest)),
      corpus_(std::move(corpus)),
      kb_(std::move(kb)),
      config_(config) {
  config_.validate();
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    if (!index_.emplace(corpus_[i].id, i).second) {
      throw InvalidArgument("duplicate warning id in corpus: " + corpus_[i].id);
    }
    kb_.add_warning(corpus_[i].id);
  }
  manifest_.warning_count = corpus_.size();
}

void Session::check_warning(const WarningId& id) const {
  if (!index_.contains(id)) throw NotFound("unknown warning id: " + id);
}

const Warning& Session::warning(const WarningId& id) const {
  check_warning(id);
  return corpus_[index_.at(id)];
}

const Rule& Session::current_rule(RuleId rule_id) const {
  if (const Rule* r = hypothesis_.find(rule_id)) return *r;
  if (rule_id >= 1 && rule_id < next_rule_id_) {
    throw StaleRule("rule " + std::to_string(rule_id) +
                   " is no longer part of the hypothesis; refresh the rule list");
  }
  throw NotFound("unknown rule id: " + std::to_string(rule_id));
}

static void require_label(LabelValue value) {
  if (value == LabelValue::uninspected) {
    throw InvalidArgument("label must be 'interesting' or 'uninteresting'");
  }
}

const Hypothesis& Session::label_instance(const WarningId& id, LabelValue value,
                                          std::int64_t timestamp_ms) {
  check_warning(id);
  require_label(value);
  labels_[id] = Label{value, LabelOrigin::instance, std::nullopt};
  append(EventKind::label_instance, timestamp_ms,
         {{"warning_id", id}, {"value", std::string(to_string(value))}});
  reinfer();
  return hypothesis_;
}

std::size_t Session::label_rule(RuleId rule_id, LabelValue value, std::int64_t timestamp_ms) {
  require_label(value);
  const Rule& rule = current_rule(rule_id);
  std::size_t labeled = 0;
  for (const auto& id : kb_.matched_set(rule)) {
    if (!index_.contains(id) || labels_.contains(id)) continue;
    labels_[id] = Label{value, LabelOrigin::rule_application, rule_id};
    ++labeled;
  }
  append(EventKind::label_rule, timestamp_ms,
         {{"rule_id", rule_id}, {"value", std::string(to_string(value))}});
  reinfer();
  return labeled;
}

std::size_t Session::highlight(const WarningId& id, const SourceSpan& span,
                               std::int64_t timestamp_ms) {
  const Warning& w = warning(id);
  ExpressionElements elements = extract_expression_elements(w.snippet, span);
  std::size_t added = propagate_expression_facts(kb_, elements, corpus_);
  append(EventKind::highlight, timestamp_ms, {{"warning_id", id}, {"span", span}});
  reinfer();
  return added;
}

bool Session::checkmark(const WarningId& id, const Predicate& predicate,
                        std::int64_t timestamp_ms) {
  check_warning(id);
  kb_.add_fact(id, predicate, Provenance::checkmark);
  bool now_pinned = pinned_.insert(predicate).second;
  if (!now_pinned) pinned_.erase(predicate);
  append(EventKind::checkmark, timestamp_ms, {{"warning_id", id}, {"predicate", predicate}});
  reinfer();
  return now_pinned;
}

void Session::rename_rule(RuleId rule_id, const std::string& name, std::int64_t timestamp_ms) {
  if (name.empty()) throw InvalidArgument("rule name must not be empty");
  current_rule(rule_id);
  for (auto& r : hypothesis_.rules) {
    if (r.id() == rule_id) r.set_display_name(name);
  }
  append(EventKind::rename_rule, timestamp_ms, {{"rule_id", rule_id}, {"name", name}});
}

void Session::apply(const FeedbackEvent& e) {
  if (e.seq != events_.size() + 1) {
    throw InvalidArgument("event seq " + std::to_string(e.seq) + " out of order; expected " +
                          std::to_string(events_.size() + 1));
  }
  const json& p = e.payload;
  switch (e.kind) {
    case EventKind::label_instance:
      label_instance(p.at("warning_id").get<std::string>(),
                     parse_label_value(p.at("value").get<std::string>()), e.timestamp_ms);
      break;
    case EventKind::label_rule:
      label_rule(p.at("rule_id").get<RuleId>(), parse_label_value(p.at("value").get<std::string>()),
                 e.timestamp_ms);
      break;
    case EventKind::highlight:
      highlight(p.at("warning_id").get<std::string>(), p.at("span").get<SourceSpan>(),
                e.timestamp_ms);
      break;
    case EventKind::checkmark:
      checkmark(p.at("warning_id").get<std::string>(), p.at("predicate").get<Predicate>(),
                e.timestamp_ms);
      break;
    case EventKind::rename_rule:
      rename_rule(p.at("rule_id").get<RuleId>(), p.at("name").get<std::string>(), e.timestamp_ms);
      break;
  }
}

void Session::append(EventKind kind, std::int64_t timestamp_ms, json payload) {
  events_.push_back({events_.size() + 1, kind, timestamp_ms, std::move(payload)});
}

void Session::reinfer() {
  InferenceHints hints;
  hints.prior_rules = hypothesis_.rules;
  hints.pinned.assign(pinned_.begin(), pinned_.end());
  Hypothesis next = infer_rules(kb_, e_plus(), e_minus(), warning_ids(), config_, hints);
  for (auto& r : next.rules) {
    if (r.id() != 0) continue;
    RuleId id = next_rule_id_++;
    r.set_id(id);
    r.set_display_name(default_rule_name(id));
    r.set_created_at_iteration(static_cast<std::int64_t>(iteration()));
  }
  hypothesis_ = std::move(next);
}

RuleStats Session::rule_stats(RuleId rule_id) const {
  const Rule& rule = current_rule(rule_id);
  RuleStats s;
  s.rule_id = rule_id;
  for (const auto& id : kb_.matched_set(rule)) {
    ++s.total_matched;
    switch (label_of(id)) {
      case LabelValue::uninspected: ++s.uninspected; break;
      case LabelValue::uninteresting: ++s.marked_uninteresting; break;
      case LabelValue::interesting: ++s.marked_interesting; break;
    }
  }
  return s;
}

std::vector<RuleStats> Session::rule_stats() const {
  std::vector<RuleStats> out;
  for (const auto& r : hypothesis_.rules) out.push_back(rule_stats(r.id()));
  return out;
}

std::vector<RuleId> Session::matching_rules(const WarningId& id) const {
  check_warning(id);
  std::vector<RuleId> out;
  for (const auto& r : hypothesis_.rules) {
    if (kb_.matches(id, r)) out.push_back(r.id());
  }
  return out;
}

LabelValue Session::label_of(const WarningId& id) const {
  auto it = labels_.find(id);
  return it == labels_.end() ? LabelValue::uninspected : it->second.value;
}

IdSet Session::e_plus() const {
  IdSet out;
  for (const auto& [id, l] : labels_) {
    if (l.value == LabelValue::interesting) out.insert(id);
  }
  return out;
}

IdSet Session::e_minus() const {
  IdSet out;
  for (const auto& [id, l] : labels_) {
    if (l.value == LabelValue::uninteresting) out.insert(id);
  }
  return out;
}

IdSet Session::warning_ids() const {
  IdSet out;
  for (const auto& [id, i] : index_) out.insert(id);
  return out;
}

Session Session::replay() const {
  KnowledgeBase base;
  for (const auto& f : kb_.facts()) {
    if (f.provenance == Provenance::containment_scan) base.add_fact(f);
  }
  Session fresh(manifest_, corpus_, std::move(base), config_);
  for (const auto& e : events_) fresh.apply(e);
  return fresh;
}

json Session::to_json() const {
  json labels = json::object();
  for (const auto& [id, l] : labels_) labels[id] = l;
  return {{"format_version", kSessionFormatVersion},
          {"manifest", manifest_},
          {"config", config_},
          {"corpus", corpus_},
          {"facts", kb_.facts()},
          {"labels", labels},
          {"pinned", std::vector<Predicate>(pinned_.begin(), pinned_.end())},
          {"hypothesis", hypothesis_},
          {"next_rule_id", next_rule_id_},
          {"iteration", iteration()},
          {"events", events_}};
}

Session Session::from_json(const json& j) {
  if (!j.is_object() || !j.contains("format_version")) {
    throw ParseError("session document lacks a format_version");
  }
  int version = j.at("format_version").get<int>();
  if (version != kSessionFormatVersion) {
    throw UnsupportedVersion("unsupported session format version " + std::to_string(version) +
                             " (expected " + std::to_string(kSessionFormatVersion) + ")");
  }
  try {
    KnowledgeBase kb;
    for (const auto& f : j.at("facts").get<std::vector<Fact>>()) kb.add_fact(f);
    Session s(j.at("manifest").get<CorpusManifest>(), j.at("corpus").get<std::vector<Warning>>(),
              std::move(kb), j.at("config").get<InferenceConfig>());
    for (const auto& [id, l] : j.at("labels").items()) {
      s.check_warning(id);
      s.labels_[id] = l.get<Label>();
    }
    for (const auto& p : j.at("pinned").get<std::vector<Predicate>>()) s.pinned_.insert(p);
    s.hypothesis_ = j.at("hypothesis").get<Hypothesis>();
    s.next_rule_id_ = j.at("next_rule_id").get<RuleId>();
    s.events_ = j.at("events").get<std::vector<FeedbackEvent>>();
    if (j.at("iteration").get<std::uint64_t>() != s.events_.size()) {
      throw ParseError("session iteration does not match the event log length");
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed session document: ") + e.what());
  }
}

std::string serialize_session(const Session& s) { return s.to_json().dump(2) + "\n"; }

void save_session(const Session& s, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << serialize_session(s);
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace " + path.string());
  }
}

Session load_session(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed session file " + path.string(), e.byte);
  }
  return Session::from_json(j);
}

SessionLock::SessionLock(const std::filesystem::path& session_path) : lock_path_(session_path) {
  lock_path_ += ".lock";
  int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Conflict("session is locked by another process (" + lock_path_.string() + ")");
    }
    throw IoError("cannot create lock file " + lock_path_.string());
  }
  std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

SessionLock::~SessionLock() {
  std::error_code ec;
  std::filesystem::remove(lock_path_, ec);
}

}  // namespace triage
