#pragma once

#include "practice/events.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace practice {

/// Six log-derived features of one learner (or one aggregate stream).
/// Submission rates are percentages of `submissions`; concept counts are
/// reported with their denominator `concepts_selected`.
struct SixFeatures {
  double correct_submission_rate = 0.0;
  double incorrect_submission_rate = 0.0;
  double missing_logic_rate = 0.0;
  long skip_count = 0;
  long successful_concepts = 0;
  long unsuccessful_concepts = 0;

  long submissions = 0;
  long correct_submissions = 0;
  long incorrect_submissions = 0;
  long missing_logic_submissions = 0;
  long concepts_selected = 0;

  double successful_concept_rate() const;
  double unsuccessful_concept_rate() const;

  friend bool operator==(const SixFeatures&, const SixFeatures&) = default;
};

/// Classification: all-correct submissions are correct; failing ones with the
/// missing-logic flag are missing-logic; the rest are incorrect.
/// Throws CorruptLog on a malformed submitted event.
SixFeatures compute_features(const std::vector<LogEvent>& log,
                             const std::optional<std::string>& learner = std::nullopt);

struct LearnerFeatures {
  std::string learner_id;
  std::string group;
  SixFeatures features;
};

/// One row per learner seen in the log, ascending by learner id. The group
/// label comes from the learner's questionnaire event, or `default_group`.
std::vector<LearnerFeatures> per_learner_features(const std::vector<LogEvent>& log,
                                                  const std::string& default_group = "");

std::string features_csv(const std::vector<LearnerFeatures>& rows);

struct FeatureStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for fewer than two learners
};

struct GroupSummary {
  std::string group;
  long learners = 0;
  long submissions = 0;
  std::map<std::string, FeatureStats> stats;  // keyed by feature column name
};

std::vector<GroupSummary> summarize_groups(const std::map<std::string, std::vector<LogEvent>>& logs);
std::string summary_csv(const std::vector<GroupSummary>& summaries);

/// Names of the per-learner feature columns, in CSV order.
const std::vector<std::string>& feature_columns();

}  // namespace practice
