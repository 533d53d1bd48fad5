#include "triage/service_api.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <mutex>
#include <ostream>

#include "httplib.h"

#include "triage/fact_extraction.hpp"
#include "triage/report.hpp"

namespace triage {

using nlohmann::json;

json ApiError::body() const {
  return {{"error", {{"status", status_}, {"kind", kind_}, {"detail", what()}}}};
}

ApiError to_api_error(const std::exception& e, bool span_context) {
  if (auto* api = dynamic_cast<const ApiError*>(&e)) return *api;
  if (dynamic_cast<const NotFound*>(&e)) return {404, "not_found", e.what()};
  if (dynamic_cast<const StaleRule*>(&e)) return {409, "stale_rule", e.what()};
  if (dynamic_cast<const Conflict*>(&e)) return {409, "conflict", e.what()};
  if (span_context && dynamic_cast<const InvalidArgument*>(&e)) return {400, "bad_span", e.what()};
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const json::exception*>(&e)) {
    return {400, "bad_request", e.what()};
  }
  return {500, "internal", e.what()};
}

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

TriageService::TriageService(Session session, std::optional<std::filesystem::path> persist_path,
                             Clock clock)
    : session_(std::move(session)), persist_path_(std::move(persist_path)), clock_(std::move(clock)) {}

template <typename F>
json TriageService::write(F&& f, bool span_context) {
  std::unique_lock lock(mu_);
  Session backup = session_;
  try {
    json out = f(session_);
    if (persist_path_) save_session(session_, *persist_path_);
    return out;
  } catch (const std::exception& e) {
    session_ = std::move(backup);
    throw to_api_error(e, span_context);
  }
}

template <typename F>
json TriageService::read(F&& f) const {
  std::shared_lock lock(mu_);
  try {
    return f(session_);
  } catch (const std::exception& e) {
    throw to_api_error(e);
  }
}

namespace {

LabelValue label_from_body(const json& body) {
  if (!body.is_object() || !body.contains("value") || !body.at("value").is_string()) {
    throw InvalidArgument("body must be {\"value\": \"interesting\" | \"uninteresting\"}");
  }
  LabelValue v = parse_label_value(body.at("value").get<std::string>());
  if (v == LabelValue::uninspected) {
    throw InvalidArgument("value must be 'interesting' or 'uninteresting'");
  }
  return v;
}

}  // namespace

json TriageService::warnings(std::optional<RuleId> rule_id, std::optional<LabelValue> label,
                             std::size_t page, std::size_t page_size) const {
  return read([&](const Session& s) {
    if (page < 1) throw InvalidArgument("page must be >= 1");
    if (page_size < 1 || page_size > kMaxPageSize) {
      throw InvalidArgument("page_size must be in 1.." + std::to_string(kMaxPageSize));
    }
    std::optional<IdSet> allowed;
    if (rule_id) {
      const Rule* r = s.hypothesis().find(*rule_id);
      if (!r) s.rule_stats(*rule_id);  // throws stale_rule or not_found
      allowed = s.kb().matched_set(*r);
    }
    std::vector<const Warning*> selected;
    for (const auto& id : s.warning_ids()) {
      if (allowed && !allowed->contains(id)) continue;
      if (label && s.label_of(id) != *label) continue;
      selected.push_back(&s.warning(id));
    }
    json items = json::array();
    std::size_t begin = (page - 1) * page_size;
    for (std::size_t i = begin; i < selected.size() && i < begin + page_size; ++i) {
      items.push_back(warning_view(s, *selected[i]));
    }
    return json{{"page", page},
                {"page_size", page_size},
                {"total", selected.size()},
                {"warnings", items}};
  });
}

json TriageService::rules() const {
  return read([](const Session& s) { return rules_report(s); });
}

json TriageService::events() const {
  return read([](const Session& s) { return json{{"events", s.events()}}; });
}

json TriageService::health() const {
  return read([](const Session& s) {
    return json{{"status", "ok"},
                {"iteration", s.iteration()},
                {"warnings", s.corpus().size()},
                {"labeled", s.labels().size()}};
  });
}

json TriageService::label_warning(const WarningId& id, const json& body) {
  return write([&](Session& s) {
    LabelValue v = label_from_body(body);
    s.label_instance(id, v, clock_());
    return json{{"warning_id", id},
                {"value", std::string(to_string(v))},
                {"hypothesis", hypothesis_summary(s)}};
  });
}

json TriageService::label_all(RuleId rule_id, const json& body) {
  return write([&](Session& s) {
    LabelValue v = label_from_body(body);
    std::size_t n = s.label_rule(rule_id, v, clock_());
    return json{{"labeled", n}, {"hypothesis", hypothesis_summary(s)}};
  });
}

json TriageService::highlight(const WarningId& id, const json& body) {
  if (!body.is_object() || !body.contains("span")) {
    throw ApiError(400, "bad_request", "body must be {\"span\": {start_line, start_col, ...}}");
  }
  return write(
      [&](Session& s) {
        SourceSpan span = body.at("span").get<SourceSpan>();
        ExpressionElements elements = extract_expression_elements(s.warning(id).snippet, span);
        std::size_t n = s.highlight(id, span, clock_());
        json preds = elements.predicates();
        return json{{"new_facts", n}, {"elements", preds}, {"hypothesis", hypothesis_summary(s)}};
      },
      /*span_context=*/true);
}

json TriageService::rename(RuleId rule_id, const json& body) {
  return write([&](Session& s) {
    if (!body.is_object() || !body.contains("name") || !body.at("name").is_string()) {
      throw InvalidArgument("body must be {\"name\": \"...\"}");
    }
    std::string name = body.at("name").get<std::string>();
    s.rename_rule(rule_id, name, clock_());
    return json{{"rule_id", rule_id}, {"display_name", name}};
  });
}

json TriageService::checkmark(const json& body) {
  return write([&](Session& s) {
    if (!body.is_object() || !body.contains("warning_id") || !body.contains("predicate")) {
      throw InvalidArgument("body must be {\"warning_id\": ..., \"predicate\": {relation, value}}");
    }
    WarningId id = body.at("warning_id").get<std::string>();
    Predicate p = body.at("predicate").get<Predicate>();
    bool pinned = s.checkmark(id, p, clock_());
    return json{{"predicate", p}, {"pinned", pinned}, {"hypothesis", hypothesis_summary(s)}};
  });
}

Session TriageService::snapshot() const {
  std::shared_lock lock(mu_);
  return session_;
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ApiError(400, "bad_request", std::string("malformed JSON body: ") + e.what());
  }
}

RuleId parse_rule_id(const std::string& text) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ApiError(400, "bad_request", "rule id must be an integer: '" + text + "'");
}

std::size_t parse_count(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    long long n = std::stoll(v, &used);
    if (used == v.size() && n >= 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw ApiError(400, "bad_request", std::string(key) + " must be a non-negative integer");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, f(req));
    } catch (const std::exception& e) {
      ApiError err = to_api_error(e);
      send_json(res, err.body(), err.status());
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, TriageService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server.Get("/api/health", guarded([&](const httplib::Request&) { return service.health(); }));
  server.Get("/api/rules", guarded([&](const httplib::Request&) { return service.rules(); }));
  server.Get("/api/events", guarded([&](const httplib::Request&) { return service.events(); }));
  server.Get("/api/warnings", guarded([&](const httplib::Request& req) {
               std::optional<RuleId> rule_id;
               std::optional<LabelValue> label;
               if (req.has_param("rule_id") && !req.get_param_value("rule_id").empty()) {
                 rule_id = parse_rule_id(req.get_param_value("rule_id"));
               }
               if (req.has_param("label") && !req.get_param_value("label").empty()) {
                 label = parse_label_value(req.get_param_value("label"));
               }
               return service.warnings(rule_id, label, parse_count(req, "page", 1),
                                       parse_count(req, "page_size", kDefaultPageSize));
             }));
  server.Post(R"(/api/warnings/([^/]+)/label)", guarded([&](const httplib::Request& req) {
                return service.label_warning(req.matches[1], parse_body(req));
              }));
  server.Post(R"(/api/warnings/([^/]+)/highlight)", guarded([&](const httplib::Request& req) {
                return service.highlight(req.matches[1], parse_body(req));
              }));
  server.Post(R"(/api/rules/([^/]+)/label-all)", guarded([&](const httplib::Request& req) {
                return service.label_all(parse_rule_id(req.matches[1]), parse_body(req));
              }));
  server.Post(R"(/api/rules/([^/]+)/rename)", guarded([&](const httplib::Request& req) {
                return service.rename(parse_rule_id(req.matches[1]), parse_body(req));
              }));
  server.Post("/api/predicates/checkmark", guarded([&](const httplib::Request& req) {
                return service.checkmark(parse_body(req));
              }));
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      ApiError err(res.status, res.status == 404 ? "not_found" : "bad_request",
                   "no such endpoint or method");
      res.set_content(err.body().dump(2) + "\n", "application/json");
    }
  });
}

namespace {

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int serve(const std::filesystem::path& session_path, const ServeOptions& opts, std::ostream& log) {
  SessionLock lock(session_path);
  TriageService service(load_session(session_path), session_path);
  httplib::Server server;
  register_routes(server, service);
  if (opts.static_dir && !server.set_mount_point("/", opts.static_dir->string())) {
    throw IoError("static directory not found: " + opts.static_dir->string());
  }
  if (!server.bind_to_port(opts.host, opts.port)) {
    throw IoError("cannot bind " + opts.host + ":" + std::to_string(opts.port));
  }
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  log << "serving " << session_path.string() << " on http://" << opts.host << ":" << opts.port
      << "\n"
      << std::flush;
  bool ok = server.listen_after_bind();
  g_server = nullptr;
  return ok ? 0 : 1;
}

}  // namespace triage
