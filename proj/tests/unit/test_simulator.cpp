#include "practice/error.hpp"
#include "practice/simulator.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace practice;
using namespace practice::sim;

namespace {

CohortConfig cohort(int n, LearnerPolicy policy, std::uint64_t seed = 1) {
  CohortConfig c;
  c.n_learners = n;
  c.policy_mix = {policy};
  c.seed = seed;
  c.concepts = {"conditionals"};
  return c;
}

std::vector<LogEvent> run(const CohortConfig& c) {
  return run_cohort(testing_support::sample_graph(), testing_support::sample_bank(), c);
}

long count_kind(const std::vector<LogEvent>& log, EventKind kind) {
  return std::count_if(log.begin(), log.end(), [&](const LogEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("steps to threshold") {
  // Independently iterated: theta += k * (1 - sigmoid(theta)) from 0.
  const std::vector<std::pair<double, int>> oracle{{0.7, 3}, {0.6, 4}, {0.5, 5}, {0.4, 6},
                                                   {0.3, 8}, {0.2, 11}, {0.1, 22}};
  int previous = 0;
  for (const auto& [k, steps] : oracle) {
    CAPTURE(k);
    CHECK(steps_to_threshold(rating::LearningRate{k}) == steps);
    CHECK(steps >= previous);
    previous = steps;
  }
  CHECK(steps_to_threshold(rating::LearningRate{0.7}, 0.0) == 1);
  CHECK_THROWS_AS(steps_to_threshold(rating::LearningRate{0.0}), Error);
  CHECK_THROWS_AS(steps_to_threshold(rating::LearningRate{-0.5}), Error);
}

TEST_CASE("steps are non-increasing in k") {
  int previous = steps_to_threshold(rating::LearningRate{0.05});
  for (int i = 2; i <= 40; ++i) {
    const int s = steps_to_threshold(rating::LearningRate{0.05 * i});
    CHECK(s <= previous);
    previous = s;
  }
}

TEST_CASE("difficulty convergence") {
  const auto t = difficulty_convergence(AlwaysCorrect{}, rating::Difficulty{0.0}, rating::LearningRate{0.7}, 2, 1);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == doctest::Approx(-0.35).epsilon(1e-15));
  CHECK(t[1] == doctest::Approx(-0.6393676947578688).epsilon(1e-14));

  const auto up = difficulty_convergence(AlwaysIncorrect{}, rating::Difficulty{0.0}, rating::LearningRate{0.4}, 30, 1);
  CHECK(std::is_sorted(up.begin(), up.end()));
  CHECK(up.front() > 0.0);

  CHECK(difficulty_convergence(AlwaysCorrect{}, rating::Difficulty{0.0}, rating::LearningRate{0.4}, 0, 1).empty());
}

TEST_CASE("policies") {
  CHECK(std::holds_alternative<AlwaysCorrect>(parse_policy("always-correct")));
  CHECK(std::holds_alternative<AlwaysIncorrect>(parse_policy("always-incorrect")));
  CHECK(std::get<Bernoulli>(parse_policy("bernoulli:0.25")).p == 0.25);
  CHECK(std::get<Logistic>(parse_policy("logistic:-1")).true_ability == -1.0);
  CHECK_THROWS_AS(parse_policy("bernoulli:2"), Error);
  CHECK_THROWS_AS(parse_policy("lucky"), Error);
  CHECK(describe(parse_policy("always-correct")) == "always-correct");

  std::mt19937_64 rng(4);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) hits += answers_correctly(Bernoulli{0.3}, 0.0, rng);
  CHECK(hits / 20000.0 == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("calibration recovers the latent ability") {
  for (double a : {0.2, 0.5, 0.8}) {
    CAPTURE(a);
    const Calibration c = calibrate(a, rating::LearningRate{0.1}, 20000, 7);
    CHECK(std::abs(c.mean_theta - a) < 0.15);
    CHECK(std::abs(c.implied_theta - a) < 0.15);
  }
  CHECK_THROWS_AS(calibrate(0.5, rating::LearningRate{0.1}, 1, 7), Error);
}

TEST_CASE("always-correct learner completes from the top band") {
  const auto log = run(cohort(1, AlwaysCorrect{}));
  const auto trace = trace_from_log(log);
  // Perfect pretest puts the learner at difficult; k = 0.7 needs three answers.
  REQUIRE(trace.size() == 3);
  CHECK(trace[2].transition == rating::Transition::Promote);
  CHECK(count_kind(log, EventKind::ConceptCompleted) == 1);
}

TEST_CASE("always-incorrect learner never advances") {
  const auto log = run(cohort(1, AlwaysIncorrect{}));
  CHECK(count_kind(log, EventKind::Promoted) == 0);
  CHECK(count_kind(log, EventKind::ConceptCompleted) == 0);
  CHECK(count_kind(log, EventKind::Submitted) == 60);
  for (const auto& t : trace_from_log(log)) CHECK(t.theta_after == 0.0);
}

TEST_CASE("a failed first answer above easy demotes") {
  // Bernoulli learners land in various bands; look for any demotion event.
  CohortConfig c = cohort(40, Bernoulli{0.5}, 3);
  const auto log = run(c);
  CHECK(count_kind(log, EventKind::Demoted) > 0);
  for (const auto& e : log) {
    if (e.kind != EventKind::Demoted) continue;
    CHECK(e.payload["from"] != "easy");
  }
}

TEST_CASE("empty cohort and event caps") {
  CHECK(run(cohort(0, AlwaysCorrect{})).empty());
  CohortConfig c = cohort(20, Bernoulli{0.6});
  c.max_events = 100;
  const auto log = run(c);
  CHECK(log.size() >= 100);
  CHECK(log.size() < 110);
}

TEST_CASE("trace length equals recorded attempts") {
  CohortConfig c = cohort(10, Bernoulli{0.6}, 9);
  c.skip_probability = 0.1;
  c.missing_logic_probability = 0.5;
  const auto log = run(c);
  const auto trace = trace_from_log(log);
  CHECK(static_cast<long>(trace.size()) ==
        count_kind(log, EventKind::Submitted) + count_kind(log, EventKind::Skipped));
  CHECK(std::count_if(trace.begin(), trace.end(), [](const TraceEntry& t) { return t.skipped; }) ==
        count_kind(log, EventKind::Skipped));
  CHECK(trace_from_log(log, std::string("cohort-0")).size() <= trace.size());
  bool flagged = false;
  for (const auto& e : log) flagged |= e.kind == EventKind::Submitted && e.payload.value("missing_logic", false);
  CHECK(flagged);
}

TEST_CASE("cohorts are deterministic") {
  CohortConfig c = cohort(8, Logistic{0.3}, 21);
  c.policy_mix = {Logistic{0.3}, Bernoulli{0.7}, AlwaysIncorrect{}};
  c.skip_probability = 0.05;
  const auto a = run(c);
  const auto b = run(c);
  CHECK(to_jsonl(a) == to_jsonl(b));
  CHECK(trace_to_jsonl(trace_from_log(a)) == trace_to_jsonl(trace_from_log(b)));
  c.seed = 22;
  CHECK(to_jsonl(run(c)) != to_jsonl(a));
}

TEST_CASE("random-mode cohorts never change level") {
  CohortConfig c = cohort(5, Bernoulli{0.8}, 4);
  c.mode = AssignmentMode::random(11);
  const auto log = run(c);
  CHECK(count_kind(log, EventKind::Promoted) == 0);
  CHECK(count_kind(log, EventKind::Demoted) == 0);
}
