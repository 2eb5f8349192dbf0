#include "practice/events.hpp"

#include "practice/error.hpp"

#include <array>
#include <sstream>

namespace practice {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 9> kKindNames{{
    {EventKind::QuestionnaireAnswered, "questionnaire_answered"},
    {EventKind::ConceptSelected, "concept_selected"},
    {EventKind::PretestScored, "pretest_scored"},
    {EventKind::ExerciseAssigned, "exercise_assigned"},
    {EventKind::Submitted, "submitted"},
    {EventKind::Skipped, "skipped"},
    {EventKind::Promoted, "promoted"},
    {EventKind::Demoted, "demoted"},
    {EventKind::ConceptCompleted, "concept_completed"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

nlohmann::json to_json(const LogEvent& e) {
  return {{"seq", e.seq},
          {"ts", e.timestamp_ms},
          {"learner", e.learner_id},
          {"kind", to_string(e.kind)},
          {"payload", e.payload}};
}

LogEvent event_from_json(const nlohmann::json& j) {
  LogEvent e;
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp_ms = j.at("ts").get<std::int64_t>();
    e.learner_id = j.at("learner").get<std::string>();
    const auto kind_name = j.at("kind").get<std::string>();
    auto kind = event_kind_from_string(kind_name);
    if (!kind) throw Error(ErrorCode::CorruptLog, "unknown event kind '" + kind_name + "'");
    e.kind = *kind;
    e.payload = j.value("payload", nlohmann::json::object());
    if (!e.payload.is_object()) throw Error(ErrorCode::CorruptLog, "event payload must be an object");
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::CorruptLog, std::string("malformed event: ") + ex.what());
  }
  return e;
}

std::string to_jsonl_line(const LogEvent& e) { return to_json(e).dump() + "\n"; }

std::vector<LogEvent> parse_jsonl(std::string_view text) {
  std::vector<LogEvent> events;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + ": " + ex.what());
    }
    events.push_back(event_from_json(j));
  }
  return events;
}

std::vector<LogEvent> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_jsonl(buffer.str());
}

std::string to_jsonl(const std::vector<LogEvent>& events) {
  std::string out;
  for (const auto& e : events) out += to_jsonl_line(e);
  return out;
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw Error(ErrorCode::InvalidArgument, "cannot open log " + path);
}

void JsonlWriter::append(const LogEvent& e) {
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << to_jsonl_line(e);
  out_.flush();
}

void JsonlWriter::flush() {
  std::lock_guard<std::mutex> lock(mutex_);
  out_.flush();
}

}  // namespace practice
