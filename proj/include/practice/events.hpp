#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace practice {

enum class EventKind {
  QuestionnaireAnswered,
  ConceptSelected,
  PretestScored,
  ExerciseAssigned,
  Submitted,
  Skipped,
  Promoted,
  Demoted,
  ConceptCompleted,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view text);

/// One line of the learning log. `payload` holds the kind-specific fields.
struct LogEvent {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  std::string learner_id;
  EventKind kind = EventKind::QuestionnaireAnswered;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

nlohmann::json to_json(const LogEvent& e);
LogEvent event_from_json(const nlohmann::json& j);  // throws CorruptLog
std::string to_jsonl_line(const LogEvent& e);

std::vector<LogEvent> parse_jsonl(std::string_view text);  // throws CorruptLog
std::vector<LogEvent> read_jsonl_file(const std::string& path);
std::string to_jsonl(const std::vector<LogEvent>& events);

/// Append-only JSON Lines writer. Each append is flushed before returning.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path);

  void append(const LogEvent& e);
  void flush();

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace practice
