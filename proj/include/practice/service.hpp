#pragma once

#include "practice/error.hpp"
#include "practice/events.hpp"
#include "practice/executor.hpp"
#include "practice/session.hpp"

#include <json.hpp>

#include <cstddef>
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

namespace practice {

struct ApiError {
  int http_status = 500;
  std::string code;
  std::string message;

  nlohmann::json to_json() const;
};

ApiError to_api_error(const Error& e);

struct ServiceConfig {
  // Empty path keeps everything in memory.
  std::filesystem::path data_dir;
  AssignmentMode default_mode;
  // Group label -> mode, for running experimental groups side by side.
  std::map<std::string, ModeKind> group_modes;
  std::size_t snapshot_every = 200;
  EngineConfig engine;
  // Shell command used to run learner code when no transcript is posted,
  // e.g. "python3 {source}".
  std::optional<std::string> exec_command;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// HTTP-shaped front end of the engine. `handle` is transport-free so the
/// routing and error mapping can be exercised without sockets.
class Service {
 public:
  Service(ConceptGraph graph, QuestionBank bank, ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse handle(const ApiRequest& request);

  /// Writes a snapshot and flushes the log.
  void checkpoint();

  /// Blocks serving HTTP until `stop` is called.
  bool listen(const std::string& host, int port);
  void stop();
  /// Port actually bound (useful with port 0).
  int bound_port() const noexcept { return bound_port_.load(); }
  bool running() const;

  const Engine& engine() const noexcept { return engine_; }
  std::filesystem::path log_path() const;
  std::filesystem::path snapshot_path() const;

 private:
  ApiResponse dispatch(const ApiRequest& request);
  void maybe_snapshot();

  ServiceConfig config_;
  Engine engine_;
  std::unique_ptr<CommandExecutor> executor_;
  std::unique_ptr<JsonlWriter> writer_;
  std::size_t last_snapshot_events_ = 0;
  mutable std::shared_mutex mutex_;

  struct Http;
  std::unique_ptr<Http> http_;
  std::atomic<int> bound_port_{0};
};

}  // namespace practice
