#include "practice/rating.hpp"

#include "practice/error.hpp"

#include <algorithm>
#include <cmath>

namespace practice::rating {

Skill::Skill(double value) : value_(std::clamp(value, 0.0, 1.0)) {
  if (std::isnan(value)) {
    throw Error(ErrorCode::InvalidArgument, "skill must not be NaN");
  }
}

std::string to_string(Transition t) {
  switch (t) {
    case Transition::Stay:
      return "stay";
    case Transition::Promote:
      return "promote";
    case Transition::Demote:
      return "demote";
  }
  return "stay";
}

double probability_correct(double theta, double d) {
  return 1.0 / (1.0 + std::exp(-(theta - d)));
}

UpdateResult update(Skill theta, Difficulty d, LearningRate k, Outcome outcome) {
  const double p = probability_correct(theta.value(), d.value);
  const double observed = outcome == Outcome::Correct ? 1.0 : 0.0;
  const double step = k.k * (observed - p);

  UpdateResult result;
  result.probability = p;
  result.raw_skill = theta.value() + step;
  result.difficulty = Difficulty{d.value - step};
  result.skill = Skill(result.raw_skill);
  return result;
}

KSelection select_k(int level_question_count) {
  if (level_question_count < 1) {
    throw Error(ErrorCode::InvalidArgument, "level question count must be positive");
  }
  if (level_question_count >= 9) {
    return {LearningRate{0.4}, std::nullopt};
  }
  if (level_question_count >= 7) {
    return {LearningRate{0.5}, std::nullopt};
  }
  if (level_question_count == 6) {
    return {LearningRate{0.6}, std::nullopt};
  }
  if (level_question_count >= 4) {
    return {LearningRate{0.7}, std::nullopt};
  }
  return {LearningRate{0.7},
          "level has " + std::to_string(level_question_count) +
              " question(s); at least 4 are recommended"};
}

Transition check_transition(Skill theta_post, double threshold) {
  if (theta_post.value() >= threshold) {
    return Transition::Promote;
  }
  if (theta_post.value() <= 0.0) {
    return Transition::Demote;
  }
  return Transition::Stay;
}

}  // namespace practice::rating
