#pragma once

#include "practice/bank.hpp"
#include "practice/rating.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace practice {

enum class ModeKind { Adaptive, Random };

struct AssignmentMode {
  ModeKind kind = ModeKind::Adaptive;
  std::uint64_t seed = 0;  // used only in Random mode

  static AssignmentMode adaptive() { return {ModeKind::Adaptive, 0}; }
  static AssignmentMode random(std::uint64_t seed) { return {ModeKind::Random, seed}; }
};

std::string to_string(ModeKind kind);
ModeKind mode_from_string(std::string_view text);

/// Practice state of one learner in one concept.
struct LearnerState {
  std::string learner_id;
  std::string language;
  ConceptId concept_id;
  Level current_level = Level::Easy;
  // Last recorded skill per level; a level never practised has no entry.
  std::map<Level, rating::Skill> skills;
  std::set<QuestionId> correct_qs;
  std::set<QuestionId> incorrect_qs;
  std::set<QuestionId> skipped_qs;
  bool pretest_done = false;
  bool complete = false;

  rating::Skill skill_at(Level level) const;
  rating::Skill current_skill() const { return skill_at(current_level); }

  friend bool operator==(const LearnerState&, const LearnerState&) = default;
};

enum class AttemptRecord { Correct, Incorrect, Skipped };

/// Files `q` under the matching set. A correct answer moves the id out of
/// incorrect/skipped; a correct id is never demoted.
void record_attempt(LearnerState& state, QuestionId q, AttemptRecord r);

struct ItemState {
  QuestionId question_id = 0;
  rating::Difficulty difficulty;
  int attempt_count = 0;

  friend bool operator==(const ItemState&, const ItemState&) = default;
};

using ItemTable = std::map<QuestionId, ItemState>;

struct PretestBands {
  double standard_from = 1.0 / 3.0;
  double difficult_from = 2.0 / 3.0;
};

Level initial_level_from_pretest(double score_fraction, const PretestBands& bands = {});

/// Closest item to the learner's current-level skill among `pool` minus
/// correct and skipped questions; ties go to the smaller id.
/// Throws PoolExhausted when nothing is eligible.
QuestionId next_question_adaptive(const LearnerState& state, const ItemTable& items,
                                  const std::vector<QuestionId>& pool);

/// Seeded uniform draw over `pool` minus correct questions.
QuestionId next_question_random(const LearnerState& state, const std::vector<QuestionId>& pool,
                                std::uint64_t seed);

/// Uniform draw over an explicit candidate list (completion-page re-entry).
QuestionId draw_uniform(const std::vector<QuestionId>& candidates, std::uint64_t seed);

struct LevelEvent {
  enum class Kind { Promoted, Demoted, ConceptCompleted };
  Kind kind = Kind::Promoted;
  Level from = Level::Easy;
  Level to = Level::Easy;
  double skill = 0.0;  // skill recorded at `to` after the change
};

struct OutcomeContext {
  ModeKind mode = ModeKind::Adaptive;
  rating::LearningRate k;
  Level question_level = Level::Easy;
  // Exercise questions in the concept (random-mode completion denominator).
  int concept_question_count = 0;
  double threshold = rating::kMasteryThreshold;
};

struct OutcomeResult {
  LearnerState state;
  ItemState item;
  rating::Transition transition = rating::Transition::Stay;
  std::vector<LevelEvent> events;
  Level skill_level = Level::Easy;  // level whose skill slot was updated
  double theta_before = 0.0;
  double theta_after = 0.0;
  double raw_theta = 0.0;
  double d_before = 0.0;
  double d_after = 0.0;
};

/// Skill retained on demotion: one correct answer at even odds gains k/2,
/// so the cap sits 0.45k below the threshold.
double demotion_cap(rating::LearningRate k, double threshold = rating::kMasteryThreshold);

OutcomeResult apply_outcome(const LearnerState& state, const ItemState& item,
                            rating::Outcome outcome, const OutcomeContext& ctx);

/// Skip: scored like an incorrect answer, recorded in skipped_qs.
OutcomeResult apply_skip(const LearnerState& state, const ItemState& item, const OutcomeContext& ctx);

bool concept_complete_random(const LearnerState& state, int concept_question_count);

struct CompletionLists {
  std::vector<QuestionId> never_tried;
  std::vector<QuestionId> incomplete;
};

CompletionLists completion_lists(const LearnerState& state, const std::vector<QuestionId>& pool);

/// Makes skipped ids of `level_pool` eligible again by moving them to
/// incorrect_qs; returns the moved ids.
std::vector<QuestionId> recycle_skipped(LearnerState& state, const std::vector<QuestionId>& level_pool);

}  // namespace practice
