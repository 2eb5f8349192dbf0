#pragma once

#include "practice/bank.hpp"
#include "practice/events.hpp"
#include "practice/grading.hpp"
#include "practice/ontology.hpp"
#include "practice/rating.hpp"
#include "practice/scheduler.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace practice {

struct LearnerProfile {
  std::string learner_id;
  bool has_programming_experience = false;
  AssignmentMode mode;
  std::string language = "python";
  std::string group;  // free-form cohort label carried into analytics
};

struct EngineConfig {
  std::string recommended_concept = "variables";
  PretestBands pretest_bands;
  double threshold = rating::kMasteryThreshold;
  GradeOptions grade_options;
  // Overrides the pool-size rule for the learning rate.
  std::optional<double> fixed_k;
};

struct AssignedQuestion {
  QuestionId id = 0;
  std::string prompt_en;
  std::optional<std::string> prompt_th;
  Level level = Level::Easy;
  std::vector<HintItem> hints;
};

/// What the learner sees. Random-mode views never carry a level.
struct SessionView {
  std::string learner_id;
  ModeKind mode = ModeKind::Adaptive;
  std::optional<ConceptId> concept_id;
  std::optional<Level> level;
  std::optional<AssignedQuestion> question;
  std::optional<ConceptId> recommendation;
  bool concept_complete = false;
  // Nothing left to serve at this level (all correct, nothing to recycle).
  bool exhausted = false;
  std::map<ConceptId, ConceptStatus> progress;
};

nlohmann::json to_json(const SessionView& view);

struct SelectResult {
  bool pretest_required = false;
  Level level = Level::Easy;  // resume level when no pretest is required
  std::vector<QuestionId> pretest_questions;
};

struct SubmitResult {
  nlohmann::json feedback;
  rating::Transition transition = rating::Transition::Stay;
  bool missing_logic = false;
  bool concept_complete = false;
};

struct CompletionPage {
  ConceptId concept_id;
  std::vector<ConceptId> suggestions;
  std::vector<QuestionId> never_tried;
  std::vector<QuestionId> incomplete;
};

nlohmann::json to_json(const CompletionPage& page);

/// The practice engine. All state is derived from the event log: each
/// mutating call builds events and applies them through the same path that
/// replay uses.
///
/// Not thread-safe; callers serialize mutating calls.
class Engine {
 public:
  using Clock = std::function<std::int64_t()>;
  using Sink = std::function<void(const LogEvent&)>;

  Engine(ConceptGraph graph, QuestionBank bank, EngineConfig config = {});

  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_sink(Sink sink) { sink_ = std::move(sink); }
  void set_executor(Executor* executor) { executor_ = executor; }

  SessionView start_session(const LearnerProfile& profile);
  SelectResult select_concept(const std::string& learner, const ConceptId& concept_id,
                              const std::optional<std::string>& request_id = {});
  Level submit_pretest(const std::string& learner, const ConceptId& concept_id,
                       const std::map<QuestionId, Submission>& answers,
                       const std::optional<std::string>& request_id = {});
  SessionView request_exercise(const std::string& learner, const ConceptId& concept_id);
  SubmitResult submit_code(const std::string& learner, QuestionId question, const Submission& submission,
                           const std::optional<std::string>& request_id = {});
  SessionView skip_exercise(const std::string& learner, QuestionId question,
                            const std::optional<std::string>& request_id = {});
  CompletionPage completion_page(const std::string& learner, const ConceptId& concept_id) const;
  /// Completion-page re-entry: a specific question of the concept, or a
  /// uniform draw over never-tried and incomplete questions.
  SessionView reenter(const std::string& learner, const ConceptId& concept_id,
                      std::optional<QuestionId> question = std::nullopt);

  SessionView view(const std::string& learner, const std::optional<ConceptId>& concept_id) const;
  std::map<ConceptId, ConceptStatus> progress(const std::string& learner) const;
  nlohmann::json concepts_payload(const std::string& learner) const;

  /// Applies previously recorded events (fresh engine or snapshot tail).
  void replay(const std::vector<LogEvent>& events);
  nlohmann::json snapshot() const;
  /// Loads a snapshot taken after `events[0, n)` and replays the rest.
  void restore(const nlohmann::json& snapshot, const std::vector<LogEvent>& events);

  const std::vector<LogEvent>& events() const noexcept { return events_; }
  bool has_profile(const std::string& learner) const { return profiles_.count(learner) != 0; }
  const LearnerProfile& profile(const std::string& learner) const;
  const LearnerState* state(const std::string& learner, const ConceptId& concept_id) const;
  const ItemTable& items() const noexcept { return items_; }
  std::optional<std::pair<ConceptId, QuestionId>> assignment(const std::string& learner) const;
  bool seen_request(const std::string& learner, const std::string& request_id) const;

  const ConceptGraph& graph() const noexcept { return graph_; }
  const QuestionBank& bank() const noexcept { return bank_; }
  const EngineConfig& config() const noexcept { return config_; }

 private:
  using StateKey = std::pair<std::string, ConceptId>;

  void commit(const std::string& learner, EventKind kind, nlohmann::json payload);
  void apply_event(const LogEvent& e);

  LearnerState& mutable_state(const std::string& learner, const ConceptId& concept_id);
  const LearnerProfile& require_profile(const std::string& learner) const;
  std::optional<ConceptId> recommendation_for(const LearnerProfile& p) const;
  std::uint64_t draw_seed(const LearnerProfile& p, const ConceptId& concept_id, std::uint64_t draw) const;
  AssignedQuestion describe(const Question& q, const ConceptId& selected) const;
  std::vector<Question> exercise_questions(const std::string& language) const;
  const LogEvent* request_event(const std::string& learner, const std::string& request_id) const;

  ConceptGraph graph_;
  QuestionBank bank_;
  EngineConfig config_;
  Executor* executor_ = nullptr;
  Clock clock_;
  Sink sink_;

  std::vector<LogEvent> events_;
  std::map<std::string, LearnerProfile> profiles_;
  std::map<StateKey, LearnerState> states_;
  ItemTable items_;
  std::map<std::string, std::pair<ConceptId, QuestionId>> assignments_;
  std::map<StateKey, std::uint64_t> draws_;
  std::map<std::string, std::int64_t> last_ts_;
  std::map<std::pair<std::string, std::string>, std::size_t> requests_;  // -> index in events_
  std::uint64_t next_seq_ = 1;
};

}  // namespace practice
