#include "practice/error.hpp"
#include "practice/session.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace practice;
using nlohmann::json;
using testing_support::make_question;

namespace {

// conditionals: easy 1-4, standard 5-8, difficult 9-12, pretest 13-15.
// functions: a single easy question tagged with conditionals too.
QuestionBank small_bank() {
  std::vector<Question> qs;
  for (int i = 1; i <= 12; ++i) {
    const Level l = i <= 4 ? Level::Easy : (i <= 8 ? Level::Standard : Level::Difficult);
    qs.push_back(make_question(i, {"conditionals"}, l));
  }
  for (int i = 13; i <= 15; ++i) {
    qs.push_back(make_question(i, {"conditionals"}, Level::Easy));
    qs.back().pretest = true;
  }
  qs.push_back(make_question(16, {"functions", "conditionals"}, Level::Easy));
  return QuestionBank(qs);
}

Submission answer(bool correct) {
  Submission s;
  s.source = "if x:\n    print('ok')\n";
  s.outputs = std::vector<std::optional<std::string>>{std::string(correct ? "ok" : "no")};
  return s;
}

struct Fixture {
  Engine engine{testing_support::sample_graph(), small_bank()};
  std::vector<LogEvent> sunk;
  std::int64_t now = 0;

  Fixture() {
    engine.set_clock([this] { return now += 1000; });
    engine.set_sink([this](const LogEvent& e) { sunk.push_back(e); });
  }

  void start(const std::string& learner, AssignmentMode mode = AssignmentMode::adaptive(), bool experienced = false) {
    LearnerProfile p;
    p.learner_id = learner;
    p.has_programming_experience = experienced;
    p.mode = mode;
    engine.start_session(p);
  }

  // Selects conditionals and answers `right` of the three pretest questions.
  Level enter(const std::string& learner, int right) {
    engine.select_concept(learner, "conditionals");
    std::map<QuestionId, Submission> answers;
    for (int i = 0; i < 3; ++i) answers[13 + i] = answer(i < right);
    return engine.submit_pretest(learner, "conditionals", answers);
  }

  QuestionId next(const std::string& learner) {
    const SessionView v = engine.request_exercise(learner, "conditionals");
    REQUIRE(v.question.has_value());
    return v.question->id;
  }

  SubmitResult play(const std::string& learner, bool correct) {
    return engine.submit_code(learner, next(learner), answer(correct));
  }
};

long count_kind(const std::vector<LogEvent>& log, EventKind kind) {
  return std::count_if(log.begin(), log.end(), [&](const LogEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("questionnaire and recommendation") {
  Fixture f;
  f.start("novice");
  CHECK(f.engine.view("novice", std::nullopt).recommendation == std::optional<ConceptId>("variables"));
  f.start("veteran", AssignmentMode::adaptive(), true);
  CHECK_FALSE(f.engine.view("veteran", std::nullopt).recommendation.has_value());

  // A repeat visit is not asked again.
  const auto before = f.engine.events().size();
  f.start("novice", AssignmentMode::adaptive(), true);
  CHECK(f.engine.events().size() == before);
  CHECK_FALSE(f.engine.profile("novice").has_programming_experience);

  CHECK_THROWS_AS(f.engine.select_concept("stranger", "conditionals"), Error);
}

TEST_CASE("pretest gates the first visit only") {
  Fixture f;
  f.start("a");
  const SelectResult first = f.engine.select_concept("a", "conditionals");
  CHECK(first.pretest_required);
  CHECK(first.pretest_questions == std::vector<QuestionId>{13, 14, 15});
  try {
    f.engine.request_exercise("a", "conditionals");
    FAIL("expected pretest_required");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PretestRequired);
  }
  std::map<QuestionId, Submission> answers{{13, answer(true)}, {14, answer(false)}, {15, answer(false)}};
  CHECK(f.engine.submit_pretest("a", "conditionals", answers) == Level::Standard);
  CHECK_THROWS_AS(f.engine.submit_pretest("a", "conditionals", answers), Error);

  const SelectResult again = f.engine.select_concept("a", "conditionals");
  CHECK_FALSE(again.pretest_required);
  CHECK(again.level == Level::Standard);
}

TEST_CASE("pretest bands") {
  for (int right = 0; right <= 3; ++right) {
    Fixture f;
    f.start("a");
    const Level expected = right == 0 ? Level::Easy : (right == 1 ? Level::Standard : Level::Difficult);
    CHECK(f.enter("a", right) == expected);
  }
}

TEST_CASE("unknown and unselected concepts") {
  Fixture f;
  f.start("a");
  CHECK_THROWS_AS(f.engine.select_concept("a", "quantum"), Error);
  try {
    f.engine.request_exercise("a", "functions");
    FAIL("expected concept_not_selected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConceptNotSelected);
  }
}

TEST_CASE("adaptive path from easy to completion") {
  Fixture f;
  f.start("a");
  REQUIRE(f.enter("a", 0) == Level::Easy);
  // k = 0.7 with four questions per level: three correct answers reach 0.85.
  std::vector<rating::Transition> transitions;
  bool complete = false;
  int steps = 0;
  while (!complete && steps < 20) {
    const SubmitResult r = f.play("a", true);
    transitions.push_back(r.transition);
    complete = r.concept_complete;
    ++steps;
  }
  CHECK(complete);
  CHECK(steps == 9);
  CHECK(transitions[2] == rating::Transition::Promote);
  CHECK(transitions[5] == rating::Transition::Promote);
  CHECK(transitions[8] == rating::Transition::Promote);
  CHECK(count_kind(f.engine.events(), EventKind::Promoted) == 2);
  CHECK(count_kind(f.engine.events(), EventKind::ConceptCompleted) == 1);

  // Further work on a complete concept never re-completes it.
  const SessionView v = f.engine.reenter("a", "conditionals");
  REQUIRE(v.question.has_value());
  f.engine.submit_code("a", v.question->id, answer(true));
  CHECK(count_kind(f.engine.events(), EventKind::ConceptCompleted) == 1);
  CHECK(f.engine.progress("a").at("conditionals") == ConceptStatus::Complete);
}

TEST_CASE("a wrong first answer on a new level demotes") {
  Fixture f;
  f.start("a");
  REQUIRE(f.enter("a", 1) == Level::Standard);
  const SubmitResult r = f.play("a", false);
  CHECK(r.transition == rating::Transition::Demote);
  CHECK(f.engine.state("a", "conditionals")->current_level == Level::Easy);
  CHECK(f.engine.view("a", std::string("conditionals")).level == Level::Easy);
}

TEST_CASE("submissions must match the assignment") {
  Fixture f;
  f.start("a");
  f.enter("a", 0);
  const QuestionId q = f.next("a");
  const json before = f.engine.snapshot();
  const auto events = f.engine.events().size();
  try {
    f.engine.submit_code("a", q == 1 ? 2 : 1, answer(true));
    FAIL("expected not_assigned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAssigned);
  }
  CHECK_THROWS_AS(f.engine.skip_exercise("a", 99), Error);
  CHECK(f.engine.snapshot() == before);
  CHECK(f.engine.events().size() == events);
  // Requesting again returns the same open question.
  CHECK(f.next("a") == q);
}

TEST_CASE("request ids make retries idempotent") {
  Fixture f;
  f.start("a");
  f.enter("a", 0);
  const QuestionId q = f.next("a");
  const SubmitResult first = f.engine.submit_code("a", q, answer(false), std::string("r1"));
  const auto events = f.engine.events().size();
  const SubmitResult retry = f.engine.submit_code("a", q, answer(false), std::string("r1"));
  CHECK(f.engine.events().size() == events);
  CHECK(retry.feedback == first.feedback);
  CHECK(retry.transition == first.transition);

  const QuestionId q2 = f.next("a");
  f.engine.skip_exercise("a", q2, std::string("s1"));
  const auto after_skip = f.engine.events().size();
  f.engine.skip_exercise("a", q2, std::string("s1"));
  CHECK(f.engine.events().size() == after_skip);
  CHECK_THROWS_AS(f.engine.submit_code("a", q2, answer(true), std::string("s1")), Error);
}

TEST_CASE("skips are recorded and the next question is served") {
  Fixture f;
  f.start("a");
  f.enter("a", 0);
  const QuestionId q = f.next("a");
  const SessionView v = f.engine.skip_exercise("a", q);
  CHECK(f.engine.state("a", "conditionals")->skipped_qs.count(q) == 1);
  REQUIRE(v.question.has_value());
  CHECK(v.question->id != q);
  CHECK(count_kind(f.engine.events(), EventKind::Skipped) == 1);
}

TEST_CASE("random mode hides levels and completes on the majority rule") {
  Fixture f;
  f.start("r", AssignmentMode::random(5));
  f.engine.select_concept("r", "conditionals");
  const SessionView v = f.engine.request_exercise("r", "conditionals");
  REQUIRE(v.question.has_value());
  CHECK_FALSE(v.level.has_value());
  const json j = to_json(v);
  CHECK_FALSE(j.contains("level"));
  CHECK_FALSE(j["question"].contains("level"));

  // Thirteen exercise questions: completion needs 5 * correct > 3 * 13, i.e. 8.
  int correct = 0;
  bool complete = false;
  QuestionId q = v.question->id;
  while (!complete) {
    const SubmitResult r = f.engine.submit_code("r", q, answer(true));
    CHECK(r.transition == rating::Transition::Stay);
    ++correct;
    complete = r.concept_complete;
    if (!complete) q = f.next("r");
  }
  CHECK(correct == 8);
  CHECK(count_kind(f.engine.events(), EventKind::Promoted) == 0);
}

TEST_CASE("random draws are reproducible from the seed") {
  auto draws = [](std::uint64_t seed) {
    Fixture f;
    f.start("r", AssignmentMode::random(seed));
    f.engine.select_concept("r", "conditionals");
    std::vector<QuestionId> out;
    for (int i = 0; i < 6; ++i) {
      const QuestionId q = f.next("r");
      out.push_back(q);
      f.engine.submit_code("r", q, answer(i % 2 == 0));
    }
    return out;
  };
  CHECK(draws(42) == draws(42));
}

TEST_CASE("replay and snapshot reproduce state") {
  Fixture f;
  f.start("a");
  f.start("b", AssignmentMode::random(3));
  f.enter("a", 0);
  f.engine.select_concept("b", "conditionals");
  for (int i = 0; i < 7; ++i) {
    f.play("a", i % 3 != 1);
    f.engine.submit_code("b", f.next("b"), answer(i % 2 == 0));
  }
  f.next("a");  // leave an open assignment
  CHECK(f.sunk == f.engine.events());

  Engine replayed(testing_support::sample_graph(), small_bank());
  std::vector<LogEvent> sink_calls;
  replayed.set_sink([&](const LogEvent& e) { sink_calls.push_back(e); });
  replayed.replay(f.engine.events());
  CHECK(sink_calls.empty());
  CHECK(replayed.snapshot() == f.engine.snapshot());
  CHECK(replayed.concepts_payload("a") == f.engine.concepts_payload("a"));

  const std::size_t cut = f.engine.events().size() / 2;
  Engine partial(testing_support::sample_graph(), small_bank());
  partial.replay({f.engine.events().begin(), f.engine.events().begin() + static_cast<long>(cut)});
  Engine restored(testing_support::sample_graph(), small_bank());
  restored.restore(partial.snapshot(), f.engine.events());
  CHECK(restored.snapshot() == f.engine.snapshot());

  json stale = partial.snapshot();
  stale["last_seq"] = 999999;
  Engine bad(testing_support::sample_graph(), small_bank());
  CHECK_THROWS_AS(bad.restore(stale, f.engine.events()), Error);
}

TEST_CASE("replay rejects out-of-order logs") {
  Fixture f;
  f.start("a");
  f.enter("a", 0);
  std::vector<LogEvent> log = f.engine.events();
  std::swap(log[1], log[2]);
  Engine e(testing_support::sample_graph(), small_bank());
  CHECK_THROWS_AS(e.replay(log), Error);
}

TEST_CASE("completion page") {
  Fixture f;
  f.start("a");
  f.enter("a", 0);
  CHECK_THROWS_AS(f.engine.completion_page("a", "conditionals"), Error);
  // Skip one easy question, then pass everything else.
  f.engine.skip_exercise("a", f.next("a"));
  while (!f.play("a", true).concept_complete) {
  }
  const CompletionPage page = f.engine.completion_page("a", "conditionals");
  CHECK(page.incomplete.size() == 1);
  for (QuestionId q : page.never_tried) CHECK(f.engine.state("a", "conditionals")->correct_qs.count(q) == 0);
  // functions co-occurs once only, below the frequency filter.
  CHECK(page.suggestions.empty());
  const json j = to_json(page);
  CHECK(j["concept"] == "conditionals");

  const SessionView v = f.engine.reenter("a", "conditionals", page.incomplete.front());
  REQUIRE(v.question.has_value());
  CHECK(v.question->id == page.incomplete.front());
  CHECK_THROWS_AS(f.engine.reenter("a", "conditionals", QuestionId{999}), Error);
}

TEST_CASE("timestamps never decrease per learner") {
  Fixture f;
  f.start("a");
  f.now = 50000;
  f.engine.select_concept("a", "conditionals");
  f.now = 0;  // clock steps backwards
  f.engine.select_concept("a", "conditionals");
  const auto& ev = f.engine.events();
  CHECK(ev.back().timestamp_ms >= ev[ev.size() - 2].timestamp_ms);
}
