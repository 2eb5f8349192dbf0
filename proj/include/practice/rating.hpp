#pragma once

#include <optional>
#include <string>

namespace practice::rating {

inline constexpr double kMasteryThreshold = 0.85;

/// Learner skill estimate for one (concept, level). Always held in [0, 1].
class Skill {
 public:
  constexpr Skill() = default;
  explicit Skill(double value);

  double value() const noexcept { return value_; }

  friend bool operator==(Skill, Skill) = default;

 private:
  double value_ = 0.0;
};

/// Item difficulty. Unbounded but finite.
struct Difficulty {
  double value = 0.0;

  friend bool operator==(Difficulty, Difficulty) = default;
};

struct LearningRate {
  double k = 0.7;
};

enum class Outcome { Incorrect = 0, Correct = 1 };

enum class Transition { Stay, Promote, Demote };

std::string to_string(Transition t);

/// Logistic probability of a correct answer for skill `theta` against
/// difficulty `d`.
double probability_correct(double theta, double d);

struct UpdateResult {
  Skill skill;                 // clamped to [0, 1]
  Difficulty difficulty;       // unclamped
  double raw_skill = 0.0;      // before clamping; raw_skill + difficulty == theta + d
  double probability = 0.0;    // expected success used for the step
};

/// Paired skill/difficulty step. Both sides are computed from the
/// pre-update pair; only the skill is clamped afterwards.
UpdateResult update(Skill theta, Difficulty d, LearningRate k, Outcome outcome);

struct KSelection {
  LearningRate rate;
  // Set when the level has fewer than four questions.
  std::optional<std::string> warning;
};

/// Learning rate from the number of questions at a level:
/// 4-5 -> 0.7, 6 -> 0.6, 7-8 -> 0.5, >=9 -> 0.4, 1-3 -> 0.7 plus a warning.
KSelection select_k(int level_question_count);

Transition check_transition(Skill theta_post, double threshold = kMasteryThreshold);

}  // namespace practice::rating
