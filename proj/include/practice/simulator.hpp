#pragma once

#include "practice/events.hpp"
#include "practice/rating.hpp"
#include "practice/session.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace practice::sim {

struct AlwaysCorrect {};
struct AlwaysIncorrect {};
struct Bernoulli {
  double p = 0.5;
};
/// Answers correctly with probability 1 / (1 + e^-(ability - true difficulty)).
struct Logistic {
  double true_ability = 0.0;
};

using LearnerPolicy = std::variant<AlwaysCorrect, AlwaysIncorrect, Bernoulli, Logistic>;

std::string describe(const LearnerPolicy& policy);
/// Parses "always-correct", "always-incorrect", "bernoulli:<p>", "logistic:<a>".
LearnerPolicy parse_policy(const std::string& text);

bool answers_correctly(const LearnerPolicy& policy, double true_difficulty, std::mt19937_64& rng);

inline constexpr int kStepCap = 10'000;

/// Correct answers needed to reach `threshold` from skill 0 when every
/// question is fresh (difficulty 0). Throws NonTerminating past kStepCap.
int steps_to_threshold(rating::LearningRate k, double threshold = rating::kMasteryThreshold);

/// Difficulty of one item after each successive fresh learner (skill 0)
/// attempts it.
std::vector<double> difficulty_convergence(const LearnerPolicy& policy, rating::Difficulty start,
                                           rating::LearningRate k, int trials, std::uint64_t seed,
                                           double true_difficulty = 0.0);

struct TraceEntry {
  std::string learner_id;
  QuestionId question_id = 0;
  bool skipped = false;
  bool correct = false;
  double theta_before = 0.0;
  double theta_after = 0.0;
  double d_before = 0.0;
  double d_after = 0.0;
  rating::Transition transition = rating::Transition::Stay;
};

using SimulationTrace = std::vector<TraceEntry>;

SimulationTrace trace_from_log(const std::vector<LogEvent>& log,
                               const std::optional<std::string>& learner = std::nullopt);
std::string trace_to_jsonl(const SimulationTrace& trace);

struct CohortConfig {
  int n_learners = 0;
  std::vector<LearnerPolicy> policy_mix{AlwaysCorrect{}};
  AssignmentMode mode;
  std::uint64_t seed = 0;
  std::string group = "cohort";
  std::string language = "python";
  // Concepts practised by every learner, in order.
  std::vector<ConceptId> concepts;
  int max_attempts_per_concept = 60;
  double skip_probability = 0.0;
  // Chance that a failing submission omits the concept's syntax markers.
  double missing_logic_probability = 0.0;
  double experience_probability = 0.5;
  // Latent difficulty per level, used by Logistic learners.
  std::array<double, 3> true_difficulty{-0.5, 0.5, 1.5};
  // Stop once the engine's log holds this many events.
  std::optional<std::size_t> max_events;
  std::int64_t start_time_ms = 1'700'000'000'000;
};

/// Drives `engine` through the full practice flow for every simulated learner.
/// Learner ids are "<group>-<index>". Deterministic given the config.
void drive_cohort(Engine& engine, const CohortConfig& config);

/// Fresh in-memory engine over `graph`/`bank`; returns its event log.
std::vector<LogEvent> run_cohort(const ConceptGraph& graph, const QuestionBank& bank,
                                 const CohortConfig& config, EngineConfig engine_config = {});

struct Calibration {
  double mean_theta = 0.0;      // mean skill over the measured window
  double correct_rate = 0.0;    // empirical correct rate over the same window
  double implied_theta = 0.0;   // skill at which the logistic predicts correct_rate
};

/// A Logistic learner answers `trials` fresh items of true and initial
/// difficulty 0 with learning rate `k`; measures the second half.
Calibration calibrate(double true_ability, rating::LearningRate k, int trials, std::uint64_t seed);

}  // namespace practice::sim
