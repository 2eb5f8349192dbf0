#include "practice/error.hpp"
#include "practice/scheduler.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace practice;
using rating::Outcome;
using rating::Skill;
using rating::Transition;

namespace {

LearnerState fresh(Level level = Level::Easy) {
  LearnerState s;
  s.learner_id = "l1";
  s.language = "python";
  s.concept_id = "conditionals";
  s.current_level = level;
  s.pretest_done = true;
  return s;
}

ItemState item(QuestionId id, double d = 0.0) { return {id, rating::Difficulty{d}, 0}; }

OutcomeContext ctx(double k = 0.7, Level level = Level::Easy, ModeKind mode = ModeKind::Adaptive, int total = 10) {
  OutcomeContext c;
  c.k = rating::LearningRate{k};
  c.question_level = level;
  c.mode = mode;
  c.concept_question_count = total;
  return c;
}

QuestionId brute_force(const LearnerState& st, const ItemTable& items, const std::vector<QuestionId>& pool) {
  const double theta = st.current_skill().value();
  std::optional<QuestionId> best;
  double best_gap = 0.0;
  for (QuestionId q : pool) {
    if (st.correct_qs.count(q) || st.skipped_qs.count(q)) continue;
    auto it = items.find(q);
    const double gap = std::fabs(theta - (it == items.end() ? 0.0 : it->second.difficulty.value));
    if (!best || gap < best_gap || (gap == best_gap && q < *best)) {
      best = q;
      best_gap = gap;
    }
  }
  if (!best) throw Error(ErrorCode::PoolExhausted, "empty");
  return *best;
}

bool disjoint(const LearnerState& s) {
  for (QuestionId q : s.correct_qs) {
    if (s.incorrect_qs.count(q) || s.skipped_qs.count(q)) return false;
  }
  for (QuestionId q : s.incorrect_qs) {
    if (s.skipped_qs.count(q)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pretest bands") {
  CHECK(initial_level_from_pretest(0.0) == Level::Easy);
  CHECK(initial_level_from_pretest(1.0 / 3.0 - 1e-9) == Level::Easy);
  CHECK(initial_level_from_pretest(0.5) == Level::Standard);
  CHECK(initial_level_from_pretest(2.0 / 3.0) == Level::Difficult);
  CHECK(initial_level_from_pretest(1.0) == Level::Difficult);
}

TEST_CASE("adaptive selection picks the closest difficulty") {
  LearnerState s = fresh();
  s.skills[Level::Easy] = Skill{0.36};
  const ItemTable items{{1, item(1, 0.30)}, {2, item(2, 0.70)}, {3, item(3, 0.55)}};
  CHECK(next_question_adaptive(s, items, {1, 2, 3}) == 1);
}

TEST_CASE("adaptive ties go to the lower id") {
  LearnerState s = fresh();
  s.skills[Level::Easy] = Skill{0.4};
  const ItemTable items{{7, item(7, 0.2)}, {3, item(3, 0.6)}};
  CHECK(next_question_adaptive(s, items, {7, 3}) == 3);
}

TEST_CASE("adaptive selection excludes correct and skipped") {
  LearnerState s = fresh();
  s.correct_qs = {1};
  s.skipped_qs = {2};
  CHECK(next_question_adaptive(s, {}, {1, 2, 3}) == 3);
  s.skipped_qs.insert(3);
  CHECK_THROWS_AS(next_question_adaptive(s, {}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(next_question_adaptive(fresh(), {}, {}), Error);
}

TEST_CASE("adaptive selection matches brute force on random instances") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    LearnerState s = fresh();
    // Coarse grid values make exact ties common.
    s.skills[Level::Easy] = Skill{std::uniform_int_distribution<int>(0, 10)(rng) / 10.0};
    const int n = std::uniform_int_distribution<int>(1, 20)(rng);
    std::vector<QuestionId> pool;
    ItemTable items;
    for (int i = 0; i < n; ++i) {
      const QuestionId id = std::uniform_int_distribution<int>(1, 200)(rng);
      if (std::find(pool.begin(), pool.end(), id) != pool.end()) continue;
      pool.push_back(id);
      if (std::bernoulli_distribution(0.8)(rng)) {
        items[id] = item(id, std::uniform_int_distribution<int>(-10, 20)(rng) / 10.0);
      }
      const int r = std::uniform_int_distribution<int>(0, 9)(rng);
      if (r == 0) s.correct_qs.insert(id);
      if (r == 1) s.skipped_qs.insert(id);
      if (r == 2) s.incorrect_qs.insert(id);
    }
    std::optional<QuestionId> expected, actual;
    try {
      expected = brute_force(s, items, pool);
    } catch (const Error&) {
    }
    try {
      actual = next_question_adaptive(s, items, pool);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PoolExhausted);
    }
    REQUIRE(expected == actual);
  }
}

TEST_CASE("random selection is seeded and avoids correct questions") {
  LearnerState s = fresh();
  s.correct_qs = {2};
  const std::vector<QuestionId> pool{1, 2, 3, 4, 5};
  const QuestionId a = next_question_random(s, pool, 99);
  CHECK(a == next_question_random(s, pool, 99));
  CHECK(a != 2);
  std::set<QuestionId> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const QuestionId q = next_question_random(s, pool, seed);
    CHECK(q != 2);
    seen.insert(q);
  }
  CHECK(seen == std::set<QuestionId>{1, 3, 4, 5});

  s.correct_qs = {1, 2, 3, 4};
  CHECK(next_question_random(s, pool, 5) == 5);
  s.correct_qs.insert(5);
  CHECK_THROWS_AS(next_question_random(s, pool, 5), Error);
  CHECK_THROWS_AS(draw_uniform({}, 1), Error);
}

TEST_CASE("outcome arithmetic from a fresh state") {
  const auto r = apply_outcome(fresh(), item(1), Outcome::Correct, ctx());
  CHECK(r.theta_after == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(r.d_after == doctest::Approx(-0.35).epsilon(1e-15));
  CHECK(r.transition == Transition::Stay);
  CHECK(r.state.correct_qs.count(1) == 1);
  CHECK(r.item.attempt_count == 1);

  LearnerState s = fresh();
  s.skills[Level::Easy] = Skill{0.63936769475786896};
  const auto p = apply_outcome(s, item(2), Outcome::Correct, ctx());
  // mpmath: third step of the always-correct iteration
  CHECK(p.theta_after == doctest::Approx(0.88114033554622891).epsilon(1e-12));
  CHECK(p.transition == Transition::Promote);
  CHECK(p.state.current_level == Level::Standard);
  CHECK(p.state.skills.at(Level::Standard).value() == 0.0);
}

TEST_CASE("promotion resets the new level's skill") {
  for (Level from : {Level::Easy, Level::Standard}) {
    LearnerState s = fresh(from);
    s.skills[from] = Skill{0.84};
    s.skills[from == Level::Easy ? Level::Standard : Level::Difficult] = Skill{0.5};
    const auto r = apply_outcome(s, item(1), Outcome::Correct, ctx(0.7, from));
    REQUIRE(r.transition == Transition::Promote);
    CHECK(r.state.current_skill().value() == 0.0);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == LevelEvent::Kind::Promoted);
  }
}

TEST_CASE("promotion at Difficult completes the concept") {
  LearnerState s = fresh(Level::Difficult);
  s.skills[Level::Difficult] = Skill{0.84};
  const auto r = apply_outcome(s, item(1), Outcome::Correct, ctx(0.7, Level::Difficult));
  CHECK(r.state.complete);
  CHECK(r.state.current_level == Level::Difficult);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == LevelEvent::Kind::ConceptCompleted);

  // Further answers update skill but never transition again.
  const auto again = apply_outcome(r.state, item(2, -3.0), Outcome::Correct, ctx(0.7, Level::Easy));
  CHECK(again.events.empty());
  CHECK(again.transition == Transition::Stay);
}

TEST_CASE("demotion from Standard caps the retained Easy skill") {
  LearnerState s = fresh(Level::Standard);
  s.skills[Level::Easy] = Skill{0.88};
  s.skills[Level::Standard] = Skill{0.1};
  const auto r = apply_outcome(s, item(5, 0.0), Outcome::Incorrect, ctx(0.7, Level::Standard));
  REQUIRE(r.transition == Transition::Demote);
  CHECK(r.state.current_level == Level::Easy);
  CHECK(r.state.current_skill().value() == doctest::Approx(0.535));
  CHECK(r.state.current_skill().value() < 0.85);
  CHECK(demotion_cap(rating::LearningRate{0.7}) == doctest::Approx(0.535));

  // A lower retained skill is kept as is.
  s.skills[Level::Easy] = Skill{0.3};
  CHECK(apply_outcome(s, item(5), Outcome::Incorrect, ctx(0.7, Level::Standard)).state.current_skill().value() == 0.3);

  // Never practised below: the cap.
  LearnerState placed = fresh(Level::Standard);
  CHECK(apply_outcome(placed, item(5), Outcome::Incorrect, ctx(0.7, Level::Standard)).state.current_skill().value() ==
        doctest::Approx(0.535));
}

TEST_CASE("demotion at Easy stays") {
  const auto r = apply_outcome(fresh(), item(1), Outcome::Incorrect, ctx());
  CHECK(r.transition == Transition::Stay);
  CHECK(r.events.empty());
  CHECK(r.theta_after == 0.0);
}

TEST_CASE("after demotion one correct answer near the skill re-promotes") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const double k = std::vector<double>{0.4, 0.5, 0.6, 0.7}[trial % 4];
    // Reaching Standard required Easy skill at or above the threshold.
    LearnerState s = fresh(Level::Standard);
    s.skills[Level::Easy] = Skill{std::uniform_real_distribution<double>(0.85, 1.0)(rng)};
    const auto down = apply_outcome(s, item(1), Outcome::Incorrect, ctx(k, Level::Standard));
    REQUIRE(down.transition == Transition::Demote);
    const double theta = down.state.current_skill().value();
    REQUIRE(theta < 0.85);
    const double d = theta - std::uniform_real_distribution<double>(0.0, 0.2)(rng);
    const auto up = apply_outcome(down.state, item(2, d), Outcome::Correct, ctx(k, Level::Easy));
    CHECK(up.transition == Transition::Promote);
  }
}

TEST_CASE("question level must match in the adaptive flow") {
  CHECK_THROWS_AS(apply_outcome(fresh(), item(1), Outcome::Correct, ctx(0.7, Level::Standard)), Error);
  CHECK_THROWS_AS(apply_outcome(fresh(), item(1), Outcome::Correct, ctx(0.0)), Error);
}

TEST_CASE("skip is scored as incorrect and recorded") {
  const auto r = apply_skip(fresh(), item(4), ctx());
  CHECK(r.theta_after == 0.0);
  CHECK(r.d_after == doctest::Approx(0.35));
  CHECK(r.state.skipped_qs.count(4) == 1);
  CHECK_THROWS_AS(next_question_adaptive(r.state, {}, {4}), Error);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    LearnerState s = fresh();
    s.skills[Level::Easy] = Skill{std::uniform_real_distribution<double>(0.0, 0.84)(rng)};
    const auto sk = apply_skip(s, item(1, std::uniform_real_distribution<double>(-2, 2)(rng)), ctx());
    CHECK(sk.theta_after <= sk.theta_before);
  }
}

TEST_CASE("attempt sets stay disjoint") {
  std::mt19937_64 rng(6);
  LearnerState s = fresh();
  for (int i = 0; i < 2000; ++i) {
    const QuestionId q = std::uniform_int_distribution<int>(1, 15)(rng);
    record_attempt(s, q, static_cast<AttemptRecord>(std::uniform_int_distribution<int>(0, 2)(rng)));
    REQUIRE(disjoint(s));
  }
  LearnerState t = fresh();
  record_attempt(t, 1, AttemptRecord::Correct);
  record_attempt(t, 1, AttemptRecord::Incorrect);
  CHECK(t.correct_qs.count(1) == 1);
}

TEST_CASE("random-mode completion needs strictly more than sixty percent") {
  LearnerState s = fresh();
  for (int q = 1; q <= 6; ++q) s.correct_qs.insert(q);
  CHECK_FALSE(concept_complete_random(s, 10));
  s.correct_qs.insert(7);
  CHECK(concept_complete_random(s, 10));
  CHECK_FALSE(concept_complete_random(fresh(), 10));
  CHECK_FALSE(concept_complete_random(fresh(), 0));
}

TEST_CASE("random mode never transitions") {
  LearnerState s = fresh(Level::Easy);
  s.skills[Level::Difficult] = Skill{0.84};
  const auto r = apply_outcome(s, item(1), Outcome::Correct, ctx(0.7, Level::Difficult, ModeKind::Random, 10));
  CHECK(r.transition == Transition::Stay);
  CHECK(r.events.empty());
  CHECK(r.skill_level == Level::Difficult);
  CHECK(r.state.current_level == Level::Easy);

  LearnerState six = fresh();
  for (int q = 1; q <= 6; ++q) six.correct_qs.insert(q);
  const auto done = apply_outcome(six, item(7), Outcome::Correct, ctx(0.7, Level::Standard, ModeKind::Random, 10));
  CHECK(done.state.complete);
  REQUIRE(done.events.size() == 1);
  CHECK(done.events[0].kind == LevelEvent::Kind::ConceptCompleted);
}

TEST_CASE("completion lists") {
  const std::vector<QuestionId> pool{48, 55, 56, 57, 58, 61, 64, 65, 66, 67};
  LearnerState s = fresh(Level::Difficult);
  s.correct_qs = {55, 56, 57};
  s.incorrect_qs = {58};
  s.skipped_qs = {61};
  const auto lists = completion_lists(s, pool);
  CHECK(lists.never_tried == std::vector<QuestionId>{48, 64, 65, 66, 67});
  CHECK(lists.incomplete == std::vector<QuestionId>{58, 61});

  LearnerState all = fresh();
  all.correct_qs = {pool.begin(), pool.end()};
  CHECK(completion_lists(all, pool).never_tried.empty());
  CHECK(completion_lists(all, pool).incomplete.empty());
  CHECK(completion_lists(fresh(), pool).never_tried == pool);
}

TEST_CASE("recycling skipped questions") {
  LearnerState s = fresh();
  s.correct_qs = {1};
  s.skipped_qs = {2, 9};
  const auto moved = recycle_skipped(s, {1, 2, 3});
  CHECK(moved == std::vector<QuestionId>{2});
  CHECK(s.incorrect_qs.count(2) == 1);
  CHECK(s.skipped_qs == std::set<QuestionId>{9});
  CHECK(next_question_adaptive(s, {}, {1, 2}) == 2);
}

TEST_CASE("mode names") {
  CHECK(mode_from_string(to_string(ModeKind::Random)) == ModeKind::Random);
  CHECK(mode_from_string("adaptive") == ModeKind::Adaptive);
  CHECK_THROWS_AS(mode_from_string("chaos"), Error);
}
