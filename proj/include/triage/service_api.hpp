#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"

#include "triage/error.hpp"
#include "triage/session.hpp"

namespace httplib {
class Server;
}

namespace triage {

/// Error as reported over HTTP. kind is one of not_found, stale_rule,
/// bad_span, conflict, bad_request.
class ApiError : public Error {
 public:
  ApiError(int status, std::string kind, std::string detail)
      : Error(detail), status_(status), kind_(std::move(kind)) {}

  int status() const noexcept { return status_; }
  const std::string& kind() const noexcept { return kind_; }
  nlohmann::json body() const;

 private:
  int status_;
  std::string kind_;
};

// Maps engine exceptions onto API errors. `span_context` marks errors raised
// while interpreting a highlight span.
ApiError to_api_error(const std::exception& e, bool span_context = false);

using Clock = std::function<std::int64_t()>;
std::int64_t wall_clock_ms();

inline constexpr std::size_t kDefaultPageSize = 50;
inline constexpr std::size_t kMaxPageSize = 500;

/// The session behind the HTTP endpoints. Writes are serialized and persisted
/// (when a path is given) before the response is produced; reads share the
/// last committed state. Every method throws ApiError.
class TriageService {
 public:
  explicit TriageService(Session session, std::optional<std::filesystem::path> persist_path = {},
                         Clock clock = wall_clock_ms);

  nlohmann::json warnings(std::optional<RuleId> rule_id, std::optional<LabelValue> label,
                          std::size_t page = 1, std::size_t page_size = kDefaultPageSize) const;
  nlohmann::json rules() const;
  nlohmann::json events() const;
  nlohmann::json health() const;

  nlohmann::json label_warning(const WarningId& id, const nlohmann::json& body);
  nlohmann::json label_all(RuleId rule_id, const nlohmann::json& body);
  nlohmann::json highlight(const WarningId& id, const nlohmann::json& body);
  nlohmann::json rename(RuleId rule_id, const nlohmann::json& body);
  nlohmann::json checkmark(const nlohmann::json& body);

  Session snapshot() const;

 private:
  template <typename F>
  nlohmann::json write(F&& f, bool span_context = false);
  template <typename F>
  nlohmann::json read(F&& f) const;

  mutable std::shared_mutex mu_;
  Session session_;
  std::optional<std::filesystem::path> persist_path_;
  Clock clock_;
};

// Installs the /api routes, CORS headers and error mapping.
void register_routes(httplib::Server& server, TriageService& service);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 7070;
  std::optional<std::filesystem::path> static_dir;
};

// Loads the session, holds its lock file and serves until SIGINT/SIGTERM.
// Returns a process exit code.
int serve(const std::filesystem::path& session_path, const ServeOptions& opts, std::ostream& log);

}  // namespace triage
