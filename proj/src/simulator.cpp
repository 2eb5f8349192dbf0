#include "practice/simulator.hpp"

#include "practice/error.hpp"

#include <cmath>
#include <sstream>

namespace practice::sim {

using rating::Outcome;

std::string describe(const LearnerPolicy& policy) {
  struct Visitor {
    std::string operator()(const AlwaysCorrect&) const { return "always-correct"; }
    std::string operator()(const AlwaysIncorrect&) const { return "always-incorrect"; }
    std::string operator()(const Bernoulli& b) const { return "bernoulli:" + std::to_string(b.p); }
    std::string operator()(const Logistic& l) const { return "logistic:" + std::to_string(l.true_ability); }
  };
  return std::visit(Visitor{}, policy);
}

LearnerPolicy parse_policy(const std::string& text) {
  if (text == "always-correct") return AlwaysCorrect{};
  if (text == "always-incorrect") return AlwaysIncorrect{};
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string name = text.substr(0, colon);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad policy parameter in '" + text + "'");
    }
    if (name == "bernoulli") {
      if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::InvalidArgument, "bernoulli p must lie in [0, 1]");
      return Bernoulli{value};
    }
    if (name == "logistic") {
      if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "logistic ability must be finite");
      return Logistic{value};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + text + "'");
}

bool answers_correctly(const LearnerPolicy& policy, double true_difficulty, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (std::holds_alternative<AlwaysCorrect>(policy)) return true;
  if (std::holds_alternative<AlwaysIncorrect>(policy)) return false;
  if (const auto* b = std::get_if<Bernoulli>(&policy)) return u(rng) < b->p;
  const auto& l = std::get<Logistic>(policy);
  return u(rng) < rating::probability_correct(l.true_ability, true_difficulty);
}

int steps_to_threshold(rating::LearningRate k, double threshold) {
  rating::Skill theta;
  for (int step = 1; step <= kStepCap; ++step) {
    theta = rating::update(theta, rating::Difficulty{0.0}, k, Outcome::Correct).skill;
    if (theta.value() >= threshold) return step;
  }
  throw Error(ErrorCode::NonTerminating,
              "threshold not reached within " + std::to_string(kStepCap) + " steps (k = " + std::to_string(k.k) + ")");
}

std::vector<double> difficulty_convergence(const LearnerPolicy& policy, rating::Difficulty start,
                                           rating::LearningRate k, int trials, std::uint64_t seed,
                                           double true_difficulty) {
  std::mt19937_64 rng(seed);
  std::vector<double> trace;
  rating::Difficulty d = start;
  for (int i = 0; i < trials; ++i) {
    const bool ok = answers_correctly(policy, true_difficulty, rng);
    d = rating::update(rating::Skill{0.0}, d, k, ok ? Outcome::Correct : Outcome::Incorrect).difficulty;
    trace.push_back(d.value);
  }
  return trace;
}

SimulationTrace trace_from_log(const std::vector<LogEvent>& log, const std::optional<std::string>& learner) {
  SimulationTrace trace;
  for (const auto& e : log) {
    if (learner && e.learner_id != *learner) continue;
    if (e.kind != EventKind::Submitted && e.kind != EventKind::Skipped) continue;
    const auto& p = e.payload;
    TraceEntry t;
    t.learner_id = e.learner_id;
    t.question_id = p.at("question_id").get<QuestionId>();
    t.skipped = e.kind == EventKind::Skipped;
    t.correct = !t.skipped && p.at("all_correct").get<bool>();
    t.theta_before = p.at("theta_before").get<double>();
    t.theta_after = p.at("theta_after").get<double>();
    t.d_before = p.at("d_before").get<double>();
    t.d_after = p.at("d_after").get<double>();
    const auto tr = p.value("transition", std::string("stay"));
    t.transition = tr == "promote" ? rating::Transition::Promote
                   : tr == "demote" ? rating::Transition::Demote
                                    : rating::Transition::Stay;
    trace.push_back(t);
  }
  return trace;
}

std::string trace_to_jsonl(const SimulationTrace& trace) {
  std::string out;
  for (const auto& t : trace) {
    nlohmann::json j{{"learner", t.learner_id},
                     {"question_id", t.question_id},
                     {"outcome", t.skipped ? "skip" : (t.correct ? "correct" : "incorrect")},
                     {"theta_before", t.theta_before},
                     {"theta_after", t.theta_after},
                     {"d_before", t.d_before},
                     {"d_after", t.d_after},
                     {"transition", rating::to_string(t.transition)}};
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

std::string join_markers(const Engine& engine, const Question& q) {
  std::string src = "value = input()\n";
  for (const auto& tag : q.concept_tags) {
    for (const auto& m : engine.graph().markers(tag, q.language)) src += m + " value\n";
  }
  return src;
}

Submission make_submission(const Engine& engine, const Question& q, bool correct, bool omit_logic,
                           std::mt19937_64& rng) {
  Submission s;
  std::vector<std::optional<std::string>> outputs;
  for (const auto& tc : q.test_cases) {
    if (correct) {
      std::string text;
      for (const auto& line : tc.expected_stdout_lines) text += line + "\n";
      outputs.emplace_back(std::move(text));
    } else {
      outputs.emplace_back(std::string("wrong answer\n"));
    }
  }
  s.outputs = std::move(outputs);
  s.source = omit_logic ? std::string("pass\n") : join_markers(engine, q);
  std::uniform_real_distribution<double> secs(20.0, 400.0);
  s.elapsed_seconds = std::round(secs(rng) * 10.0) / 10.0;
  return s;
}

}  // namespace

void drive_cohort(Engine& engine, const CohortConfig& config) {
  if (config.policy_mix.empty()) throw Error(ErrorCode::InvalidArgument, "policy mix is empty");
  engine.set_clock([now = config.start_time_ms]() mutable { return now += 1000; });
  auto budget_left = [&] { return !config.max_events || engine.events().size() < *config.max_events; };

  for (int i = 0; i < config.n_learners && budget_left(); ++i) {
    std::mt19937_64 rng(config.seed * 1'000'003ULL + static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const LearnerPolicy& policy = config.policy_mix[static_cast<std::size_t>(i) % config.policy_mix.size()];

    LearnerProfile profile;
    profile.learner_id = config.group + "-" + std::to_string(i);
    profile.has_programming_experience = u(rng) < config.experience_probability;
    profile.mode = config.mode;
    profile.language = config.language;
    profile.group = config.group;
    engine.start_session(profile);

    for (const auto& concept_id : config.concepts) {
      if (!budget_left()) break;
      const SelectResult sel = engine.select_concept(profile.learner_id, concept_id);
      if (sel.pretest_required && budget_left()) {
        std::map<QuestionId, Submission> answers;
        for (QuestionId q : sel.pretest_questions) {
          const Question& question = engine.bank().at(q);
          const double dt = config.true_difficulty[static_cast<std::size_t>(question.level)];
          answers[q] = make_submission(engine, question, answers_correctly(policy, dt, rng), false, rng);
        }
        engine.submit_pretest(profile.learner_id, concept_id, answers);
      }
      for (int attempt = 0; attempt < config.max_attempts_per_concept && budget_left(); ++attempt) {
        const SessionView v = engine.request_exercise(profile.learner_id, concept_id);
        if (v.concept_complete || v.exhausted || !v.question) break;
        const Question& question = engine.bank().at(v.question->id);
        if (u(rng) < config.skip_probability) {
          engine.skip_exercise(profile.learner_id, question.id);
          continue;
        }
        const double dt = config.true_difficulty[static_cast<std::size_t>(question.level)];
        const bool correct = answers_correctly(policy, dt, rng);
        const bool omit = !correct && u(rng) < config.missing_logic_probability;
        const SubmitResult r =
            engine.submit_code(profile.learner_id, question.id, make_submission(engine, question, correct, omit, rng));
        if (r.concept_complete) break;
      }
    }
  }
}

std::vector<LogEvent> run_cohort(const ConceptGraph& graph, const QuestionBank& bank, const CohortConfig& config,
                                 EngineConfig engine_config) {
  Engine engine(graph, bank, std::move(engine_config));
  drive_cohort(engine, config);
  return engine.events();
}

Calibration calibrate(double true_ability, rating::LearningRate k, int trials, std::uint64_t seed) {
  if (trials < 2) throw Error(ErrorCode::InvalidArgument, "calibration needs at least two trials");
  std::mt19937_64 rng(seed);
  const LearnerPolicy policy = Logistic{true_ability};
  rating::Skill theta;
  double theta_sum = 0.0;
  long correct = 0;
  long measured = 0;
  for (int i = 0; i < trials; ++i) {
    const bool ok = answers_correctly(policy, 0.0, rng);
    theta = rating::update(theta, rating::Difficulty{0.0}, k, ok ? Outcome::Correct : Outcome::Incorrect).skill;
    if (i >= trials / 2) {
      theta_sum += theta.value();
      correct += ok ? 1 : 0;
      ++measured;
    }
  }
  Calibration c;
  c.mean_theta = theta_sum / static_cast<double>(measured);
  c.correct_rate = static_cast<double>(correct) / static_cast<double>(measured);
  const double r = std::clamp(c.correct_rate, 1e-9, 1.0 - 1e-9);
  c.implied_theta = std::log(r / (1.0 - r));
  return c;
}

}  // namespace practice::sim
