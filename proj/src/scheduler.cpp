#include "practice/scheduler.hpp"

#include "practice/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace practice {

using rating::Outcome;
using rating::Skill;
using rating::Transition;

std::string to_string(ModeKind kind) { return kind == ModeKind::Adaptive ? "adaptive" : "random"; }

ModeKind mode_from_string(std::string_view text) {
  if (text == "adaptive") return ModeKind::Adaptive;
  if (text == "random") return ModeKind::Random;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

Skill LearnerState::skill_at(Level level) const {
  auto it = skills.find(level);
  return it == skills.end() ? Skill{} : it->second;
}

Level initial_level_from_pretest(double score_fraction, const PretestBands& bands) {
  if (!(score_fraction >= 0.0 && score_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "pretest score must lie in [0, 1]");
  }
  if (score_fraction >= bands.difficult_from) return Level::Difficult;
  if (score_fraction >= bands.standard_from) return Level::Standard;
  return Level::Easy;
}

QuestionId next_question_adaptive(const LearnerState& state, const ItemTable& items,
                                  const std::vector<QuestionId>& pool) {
  const double theta = state.current_skill().value();
  std::optional<QuestionId> best;
  double best_distance = 0.0;
  for (QuestionId q : pool) {
    if (state.correct_qs.count(q) != 0 || state.skipped_qs.count(q) != 0) continue;
    auto it = items.find(q);
    const double d = it == items.end() ? 0.0 : it->second.difficulty.value;
    const double distance = std::fabs(theta - d);
    if (!best || distance < best_distance || (distance == best_distance && q < *best)) {
      best = q;
      best_distance = distance;
    }
  }
  if (!best) {
    throw Error(ErrorCode::PoolExhausted, "no eligible question at " + to_string(state.current_level) +
                                              " level of '" + state.concept_id + "'");
  }
  return *best;
}

QuestionId draw_uniform(const std::vector<QuestionId>& candidates, std::uint64_t seed) {
  if (candidates.empty()) throw Error(ErrorCode::PoolExhausted, "no candidate questions");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

QuestionId next_question_random(const LearnerState& state, const std::vector<QuestionId>& pool,
                                std::uint64_t seed) {
  std::vector<QuestionId> eligible;
  for (QuestionId q : pool) {
    if (state.correct_qs.count(q) == 0) eligible.push_back(q);
  }
  std::sort(eligible.begin(), eligible.end());
  eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
  if (eligible.empty()) {
    throw Error(ErrorCode::PoolExhausted, "every question of '" + state.concept_id + "' is correct");
  }
  return draw_uniform(eligible, seed);
}

double demotion_cap(rating::LearningRate k, double threshold) { return threshold - k.k * 0.5 * 0.9; }

void record_attempt(LearnerState& s, QuestionId q, AttemptRecord r) {
  switch (r) {
    case AttemptRecord::Correct:
      s.incorrect_qs.erase(q);
      s.skipped_qs.erase(q);
      s.correct_qs.insert(q);
      break;
    case AttemptRecord::Incorrect:
      if (s.correct_qs.count(q) != 0) return;
      s.skipped_qs.erase(q);
      s.incorrect_qs.insert(q);
      break;
    case AttemptRecord::Skipped:
      if (s.correct_qs.count(q) != 0) return;
      s.incorrect_qs.erase(q);
      s.skipped_qs.insert(q);
      break;
  }
}

namespace {

Level next_level(Level l) { return l == Level::Easy ? Level::Standard : Level::Difficult; }
Level previous_level(Level l) { return l == Level::Difficult ? Level::Standard : Level::Easy; }

OutcomeResult apply(const LearnerState& state, const ItemState& item, Outcome outcome, AttemptRecord rec,
                    const OutcomeContext& ctx) {
  if (ctx.k.k <= 0.0 || !std::isfinite(ctx.k.k)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  }
  const bool adaptive_flow = ctx.mode == ModeKind::Adaptive && !state.complete;
  if (adaptive_flow && ctx.question_level != state.current_level) {
    throw Error(ErrorCode::StateMismatch, "question " + std::to_string(item.question_id) + " is at " +
                                              to_string(ctx.question_level) + " but learner is at " +
                                              to_string(state.current_level));
  }

  OutcomeResult r;
  r.state = state;
  r.item = item;
  r.skill_level = adaptive_flow ? state.current_level : ctx.question_level;

  const Skill theta = state.skill_at(r.skill_level);
  const auto up = rating::update(theta, item.difficulty, ctx.k, outcome);
  r.theta_before = theta.value();
  r.theta_after = up.skill.value();
  r.raw_theta = up.raw_skill;
  r.d_before = item.difficulty.value;
  r.d_after = up.difficulty.value;

  r.state.skills[r.skill_level] = up.skill;
  r.item.difficulty = up.difficulty;
  r.item.attempt_count += 1;
  record_attempt(r.state, item.question_id, rec);

  if (state.complete) return r;

  if (ctx.mode == ModeKind::Random) {
    if (concept_complete_random(r.state, ctx.concept_question_count)) {
      r.state.complete = true;
      r.events.push_back({LevelEvent::Kind::ConceptCompleted, r.skill_level, r.skill_level, r.theta_after});
    }
    return r;
  }

  const Transition t = rating::check_transition(up.skill, ctx.threshold);
  const Level from = state.current_level;
  if (t == Transition::Promote) {
    r.transition = Transition::Promote;
    if (from == Level::Difficult) {
      r.state.complete = true;
      r.events.push_back({LevelEvent::Kind::ConceptCompleted, from, from, r.theta_after});
    } else {
      const Level to = next_level(from);
      r.state.current_level = to;
      r.state.skills[to] = Skill{0.0};
      r.events.push_back({LevelEvent::Kind::Promoted, from, to, 0.0});
    }
  } else if (t == Transition::Demote && from != Level::Easy) {
    r.transition = Transition::Demote;
    const Level to = previous_level(from);
    const double cap = demotion_cap(ctx.k, ctx.threshold);
    auto it = state.skills.find(to);
    // A level never practised (placed above it by the pretest) counts as mastered.
    const double retained = it == state.skills.end() ? cap : std::min(it->second.value(), cap);
    r.state.current_level = to;
    r.state.skills[to] = Skill{retained};
    r.events.push_back({LevelEvent::Kind::Demoted, from, to, r.state.skills[to].value()});
  }
  return r;
}

}  // namespace

OutcomeResult apply_outcome(const LearnerState& state, const ItemState& item, Outcome outcome,
                            const OutcomeContext& ctx) {
  return apply(state, item, outcome, outcome == Outcome::Correct ? AttemptRecord::Correct : AttemptRecord::Incorrect,
               ctx);
}

OutcomeResult apply_skip(const LearnerState& state, const ItemState& item, const OutcomeContext& ctx) {
  return apply(state, item, Outcome::Incorrect, AttemptRecord::Skipped, ctx);
}

bool concept_complete_random(const LearnerState& state, int concept_question_count) {
  if (concept_question_count < 1) return false;
  // Integer form of correct / total > 0.6.
  return 5 * static_cast<long long>(state.correct_qs.size()) > 3LL * concept_question_count;
}

CompletionLists completion_lists(const LearnerState& state, const std::vector<QuestionId>& pool) {
  CompletionLists lists;
  for (QuestionId q : pool) {
    if (state.correct_qs.count(q) == 0 && state.incorrect_qs.count(q) == 0 &&
        state.skipped_qs.count(q) == 0) {
      lists.never_tried.push_back(q);
    }
  }
  std::set_union(state.incorrect_qs.begin(), state.incorrect_qs.end(), state.skipped_qs.begin(),
                 state.skipped_qs.end(), std::back_inserter(lists.incomplete));
  std::sort(lists.never_tried.begin(), lists.never_tried.end());
  lists.never_tried.erase(std::unique(lists.never_tried.begin(), lists.never_tried.end()),
                          lists.never_tried.end());
  return lists;
}

std::vector<QuestionId> recycle_skipped(LearnerState& state, const std::vector<QuestionId>& level_pool) {
  std::vector<QuestionId> cleared;
  for (QuestionId q : level_pool) {
    if (state.skipped_qs.erase(q) != 0) {
      // Still attempted-but-unsolved, so it stays on the incomplete list.
      state.incorrect_qs.insert(q);
      cleared.push_back(q);
    }
  }
  return cleared;
}

}  // namespace practice
