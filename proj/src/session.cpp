#include "practice/session.hpp"

#include "practice/error.hpp"

#include <algorithm>
#include <chrono>

namespace practice {

using rating::Outcome;
using rating::Transition;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Transition transition_from_string(const std::string& s) {
  if (s == "promote") return Transition::Promote;
  if (s == "demote") return Transition::Demote;
  return Transition::Stay;
}

json hints_to_json(const std::vector<HintItem>& hints) {
  json out = json::array();
  for (const auto& h : hints) {
    json item{{"concept", h.concept_id}, {"emphasized", h.emphasized}};
    if (h.parent_id) item["parent"] = *h.parent_id;
    out.push_back(std::move(item));
  }
  return out;
}

template <typename T>
std::vector<T> sorted_vector(const std::set<T>& s) {
  return {s.begin(), s.end()};
}

}  // namespace

json to_json(const SessionView& view) {
  json j;
  j["learner"] = view.learner_id;
  j["mode"] = to_string(view.mode);
  if (view.concept_id) j["concept"] = *view.concept_id;
  if (view.level && view.mode == ModeKind::Adaptive) j["level"] = to_string(*view.level);
  if (view.question) {
    const auto& q = *view.question;
    json qj{{"id", q.id}, {"prompt_en", q.prompt_en}, {"hints", hints_to_json(q.hints)}};
    if (q.prompt_th) qj["prompt_th"] = *q.prompt_th;
    if (view.mode == ModeKind::Adaptive) qj["level"] = to_string(q.level);
    j["question"] = std::move(qj);
  }
  if (view.recommendation) j["recommendation"] = *view.recommendation;
  j["concept_complete"] = view.concept_complete;
  j["exhausted"] = view.exhausted;
  json progress = json::object();
  for (const auto& [id, status] : view.progress) progress[id] = to_string(status);
  j["progress"] = std::move(progress);
  return j;
}

json to_json(const CompletionPage& page) {
  return {{"concept", page.concept_id},
          {"suggestions", page.suggestions},
          {"never_tried", page.never_tried},
          {"incomplete", page.incomplete}};
}

Engine::Engine(ConceptGraph graph, QuestionBank bank, EngineConfig config)
    : graph_(std::move(graph)), bank_(std::move(bank)), config_(std::move(config)), clock_(wall_clock_ms) {
  for (const auto& q : bank_.questions()) {
    for (const auto& tag : q.concept_tags) graph_.at(tag);
  }
}

// ---------------------------------------------------------------------------
// Event application

void Engine::commit(const std::string& learner, EventKind kind, json payload) {
  LogEvent e;
  e.seq = next_seq_;
  e.learner_id = learner;
  e.kind = kind;
  e.payload = std::move(payload);
  const std::int64_t now = clock_();
  auto it = last_ts_.find(learner);
  e.timestamp_ms = it == last_ts_.end() ? now : std::max(now, it->second);
  apply_event(e);
  if (sink_) sink_(events_.back());
}

void Engine::apply_event(const LogEvent& e) {
  const json& p = e.payload;
  const std::string& learner = e.learner_id;
  try {
    switch (e.kind) {
      case EventKind::QuestionnaireAnswered: {
        LearnerProfile prof;
        prof.learner_id = learner;
        prof.has_programming_experience = p.at("has_programming_experience").get<bool>();
        prof.mode.kind = mode_from_string(p.at("mode").get<std::string>());
        prof.mode.seed = p.value("seed", std::uint64_t{0});
        prof.language = p.at("language").get<std::string>();
        prof.group = p.value("group", std::string{});
        profiles_[learner] = std::move(prof);
        break;
      }
      case EventKind::ConceptSelected: {
        const ConceptId concept_id = p.at("concept").get<std::string>();
        const StateKey key{learner, concept_id};
        if (states_.count(key) == 0) {
          LearnerState st;
          st.learner_id = learner;
          st.language = require_profile(learner).language;
          st.concept_id = concept_id;
          states_.emplace(key, std::move(st));
        }
        break;
      }
      case EventKind::PretestScored: {
        LearnerState& st = mutable_state(learner, p.at("concept").get<std::string>());
        st.pretest_done = true;
        st.current_level = level_from_string(p.at("level").get<std::string>());
        break;
      }
      case EventKind::ExerciseAssigned: {
        const ConceptId concept_id = p.at("concept").get<std::string>();
        LearnerState& st = mutable_state(learner, concept_id);
        for (QuestionId q : p.value("recycled", std::vector<QuestionId>{})) {
          st.skipped_qs.erase(q);
          st.incorrect_qs.insert(q);
        }
        if (p.contains("draw")) draws_[{learner, concept_id}] = p["draw"].get<std::uint64_t>() + 1;
        assignments_[learner] = {concept_id, p.at("question_id").get<QuestionId>()};
        break;
      }
      case EventKind::Submitted:
      case EventKind::Skipped: {
        const ConceptId concept_id = p.at("concept").get<std::string>();
        const QuestionId q = p.at("question_id").get<QuestionId>();
        LearnerState& st = mutable_state(learner, concept_id);
        st.skills[level_from_string(p.at("level").get<std::string>())] =
            rating::Skill(p.at("theta_after").get<double>());
        ItemState& item = items_[q];
        item.question_id = q;
        item.difficulty = rating::Difficulty{p.at("d_after").get<double>()};
        item.attempt_count += 1;
        AttemptRecord rec = AttemptRecord::Skipped;
        if (e.kind == EventKind::Submitted) {
          rec = p.at("all_correct").get<bool>() ? AttemptRecord::Correct : AttemptRecord::Incorrect;
        }
        record_attempt(st, q, rec);
        assignments_.erase(learner);
        break;
      }
      case EventKind::Promoted:
      case EventKind::Demoted: {
        LearnerState& st = mutable_state(learner, p.at("concept").get<std::string>());
        const Level to = level_from_string(p.at("to").get<std::string>());
        st.current_level = to;
        st.skills[to] = rating::Skill(p.at("skill").get<double>());
        break;
      }
      case EventKind::ConceptCompleted: {
        mutable_state(learner, p.at("concept").get<std::string>()).complete = true;
        break;
      }
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::CorruptLog,
                "event " + std::to_string(e.seq) + " (" + std::string(to_string(e.kind)) + "): " + ex.what());
  }

  if (p.contains("request_id") && p["request_id"].is_string()) {
    requests_[{learner, p["request_id"].get<std::string>()}] = events_.size();
  }
  last_ts_[learner] = std::max(last_ts_[learner], e.timestamp_ms);
  next_seq_ = std::max(next_seq_, e.seq + 1);
  events_.push_back(e);
}

void Engine::replay(const std::vector<LogEvent>& events) {
  std::map<std::string, std::int64_t> seen_ts = last_ts_;
  for (const auto& e : events) {
    if (e.seq < next_seq_ && !events_.empty()) {
      throw Error(ErrorCode::CorruptLog, "event sequence goes backwards at " + std::to_string(e.seq));
    }
    if (auto it = seen_ts.find(e.learner_id); it != seen_ts.end() && e.timestamp_ms < it->second) {
      throw Error(ErrorCode::CorruptLog, "timestamps decrease for learner " + e.learner_id);
    }
    seen_ts[e.learner_id] = e.timestamp_ms;
    apply_event(e);
  }
}

LearnerState& Engine::mutable_state(const std::string& learner, const ConceptId& concept_id) {
  auto it = states_.find({learner, concept_id});
  if (it == states_.end()) {
    throw Error(ErrorCode::ConceptNotSelected,
                "learner " + learner + " has not selected concept '" + concept_id + "'");
  }
  return it->second;
}

const LearnerProfile& Engine::require_profile(const std::string& learner) const {
  auto it = profiles_.find(learner);
  if (it == profiles_.end()) {
    throw Error(ErrorCode::QuestionnaireRequired, "learner " + learner + " has not started a session");
  }
  return it->second;
}

const LearnerProfile& Engine::profile(const std::string& learner) const { return require_profile(learner); }

const LearnerState* Engine::state(const std::string& learner, const ConceptId& concept_id) const {
  auto it = states_.find({learner, concept_id});
  return it == states_.end() ? nullptr : &it->second;
}

std::optional<std::pair<ConceptId, QuestionId>> Engine::assignment(const std::string& learner) const {
  auto it = assignments_.find(learner);
  if (it == assignments_.end()) return std::nullopt;
  return it->second;
}

bool Engine::seen_request(const std::string& learner, const std::string& request_id) const {
  return requests_.count({learner, request_id}) != 0;
}

const LogEvent* Engine::request_event(const std::string& learner, const std::string& request_id) const {
  auto it = requests_.find({learner, request_id});
  return it == requests_.end() ? nullptr : &events_[it->second];
}

// ---------------------------------------------------------------------------
// Queries

std::optional<ConceptId> Engine::recommendation_for(const LearnerProfile& p) const {
  if (p.has_programming_experience) return std::nullopt;
  if (const Concept* c = graph_.find(config_.recommended_concept);
      c != nullptr && c->languages.count(p.language) != 0) {
    return c->id;
  }
  for (const auto& root : graph_.roots()) {
    if (graph_.at(root).languages.count(p.language) != 0) return root;
  }
  return std::nullopt;
}

std::map<ConceptId, ConceptStatus> Engine::progress(const std::string& learner) const {
  const LearnerProfile& p = require_profile(learner);
  std::map<ConceptId, ConceptStatus> out;
  for (const auto& id : graph_.concepts_for_language(p.language)) {
    const LearnerState* st = state(learner, id);
    out[id] = st == nullptr ? ConceptStatus::NotStarted
                            : (st->complete ? ConceptStatus::Complete : ConceptStatus::InProgress);
  }
  return out;
}

json Engine::concepts_payload(const std::string& learner) const {
  const LearnerProfile& p = require_profile(learner);
  const auto statuses = progress(learner);
  json nodes = json::array();
  for (const auto& [id, status] : statuses) {
    const Concept& c = graph_.at(id);
    json node{{"id", id}, {"display_name", c.display_name}, {"status", to_string(status)}};
    node["parent"] = c.parent ? json(*c.parent) : json(nullptr);
    nodes.push_back(std::move(node));
  }
  json roots = json::array();
  for (const auto& r : graph_.roots()) {
    if (statuses.count(r) != 0) roots.push_back(r);
  }
  return {{"learner", learner}, {"language", p.language}, {"concepts", std::move(nodes)}, {"roots", std::move(roots)}};
}

AssignedQuestion Engine::describe(const Question& q, const ConceptId& selected) const {
  AssignedQuestion a;
  a.id = q.id;
  a.prompt_en = q.prompt_en;
  a.prompt_th = q.prompt_th;
  a.level = q.level;
  a.hints = hint_list(q, graph_, selected);
  return a;
}

SessionView Engine::view(const std::string& learner, const std::optional<ConceptId>& concept_id) const {
  const LearnerProfile& p = require_profile(learner);
  SessionView v;
  v.learner_id = learner;
  v.mode = p.mode.kind;
  v.recommendation = recommendation_for(p);
  v.progress = progress(learner);
  if (!concept_id) return v;
  v.concept_id = concept_id;
  const LearnerState* st = state(learner, *concept_id);
  if (st == nullptr) return v;
  v.concept_complete = st->complete;
  if (p.mode.kind == ModeKind::Adaptive) v.level = st->current_level;
  if (auto a = assignment(learner); a && a->first == *concept_id) {
    v.question = describe(bank_.at(a->second), *concept_id);
  }
  return v;
}

std::vector<Question> Engine::exercise_questions(const std::string& language) const {
  std::vector<Question> out;
  for (const auto& q : bank_.questions()) {
    if (!q.pretest && q.language == language) out.push_back(q);
  }
  return out;
}

std::uint64_t Engine::draw_seed(const LearnerProfile& p, const ConceptId& concept_id,
                                std::uint64_t draw) const {
  std::uint64_t h = splitmix64(p.mode.seed);
  h = splitmix64(h ^ fnv1a(p.learner_id));
  h = splitmix64(h ^ fnv1a(concept_id));
  return splitmix64(h ^ draw);
}

// ---------------------------------------------------------------------------
// Flow

SessionView Engine::start_session(const LearnerProfile& profile) {
  if (profiles_.count(profile.learner_id) == 0) {
    json payload{{"has_programming_experience", profile.has_programming_experience},
                 {"mode", to_string(profile.mode.kind)},
                 {"seed", profile.mode.seed},
                 {"language", profile.language},
                 {"group", profile.group}};
    commit(profile.learner_id, EventKind::QuestionnaireAnswered, std::move(payload));
  }
  return view(profile.learner_id, std::nullopt);
}

SelectResult Engine::select_concept(const std::string& learner, const ConceptId& concept_id,
                                    const std::optional<std::string>& request_id) {
  const LearnerProfile& p = require_profile(learner);
  const Concept& c = graph_.at(concept_id);
  if (c.languages.count(p.language) == 0) {
    throw Error(ErrorCode::UnknownConcept,
                "concept '" + concept_id + "' is not defined for " + p.language);
  }
  auto current = [&] {
    const LearnerState* st = state(learner, concept_id);
    SelectResult r;
    r.pretest_required = st == nullptr || !st->pretest_done;
    r.level = st == nullptr ? Level::Easy : st->current_level;
    if (r.pretest_required) r.pretest_questions = bank_.pretest_pool(concept_id, p.language);
    return r;
  };
  if (request_id && seen_request(learner, *request_id)) return current();

  const bool first = state(learner, concept_id) == nullptr;
  SelectResult r = current();
  json payload{{"concept", concept_id}, {"first", first}, {"pretest_required", r.pretest_required}};
  if (request_id) payload["request_id"] = *request_id;
  commit(learner, EventKind::ConceptSelected, std::move(payload));
  return r;
}

Level Engine::submit_pretest(const std::string& learner, const ConceptId& concept_id,
                             const std::map<QuestionId, Submission>& answers,
                             const std::optional<std::string>& request_id) {
  const LearnerProfile& p = require_profile(learner);
  if (request_id) {
    if (const LogEvent* e = request_event(learner, *request_id)) {
      return level_from_string(e->payload.at("level").get<std::string>());
    }
  }
  const LearnerState* st = state(learner, concept_id);
  if (st == nullptr || st->pretest_done) {
    throw Error(ErrorCode::NoPretestPending, "no pretest pending for '" + concept_id + "'");
  }
  const auto pool = bank_.pretest_pool(concept_id, p.language);
  int correct = 0;
  for (QuestionId q : pool) {
    auto it = answers.find(q);
    if (it == answers.end()) continue;
    if (grade(it->second, bank_.at(q), executor_, config_.grade_options).all_correct) ++correct;
  }
  const double score = pool.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pool.size());
  const Level level = initial_level_from_pretest(score, config_.pretest_bands);
  json payload{{"concept", concept_id},
               {"score", score},
               {"correct", correct},
               {"total", pool.size()},
               {"level", to_string(level)}};
  if (request_id) payload["request_id"] = *request_id;
  commit(learner, EventKind::PretestScored, std::move(payload));
  return level;
}

SessionView Engine::request_exercise(const std::string& learner, const ConceptId& concept_id) {
  const LearnerProfile& p = require_profile(learner);
  graph_.at(concept_id);
  const LearnerState* st = state(learner, concept_id);
  if (st == nullptr) {
    throw Error(ErrorCode::ConceptNotSelected, "concept '" + concept_id + "' has not been selected");
  }
  if (st->complete) return view(learner, concept_id);
  if (auto a = assignment(learner); a && a->first == concept_id) return view(learner, concept_id);

  json payload{{"concept", concept_id}};
  if (p.mode.kind == ModeKind::Adaptive) {
    if (!st->pretest_done) {
      throw Error(ErrorCode::PretestRequired, "pretest for '" + concept_id + "' not submitted");
    }
    const auto pool = bank_.level_pool(concept_id, p.language, st->current_level);
    LearnerState probe = *st;
    std::vector<QuestionId> recycled;
    bool eligible = std::any_of(pool.begin(), pool.end(), [&](QuestionId q) {
      return probe.correct_qs.count(q) == 0 && probe.skipped_qs.count(q) == 0;
    });
    if (!eligible) {
      recycled = recycle_skipped(probe, pool);
      eligible = !recycled.empty();
    }
    if (!eligible) {
      SessionView v = view(learner, concept_id);
      v.exhausted = true;
      return v;
    }
    const QuestionId q = next_question_adaptive(probe, items_, pool);
    payload["question_id"] = q;
    payload["level"] = to_string(st->current_level);
    if (!recycled.empty()) payload["recycled"] = recycled;
  } else {
    const auto pool = bank_.concept_pool(concept_id, p.language);
    const bool eligible = std::any_of(pool.begin(), pool.end(),
                                      [&](QuestionId q) { return st->correct_qs.count(q) == 0; });
    if (!eligible) {
      SessionView v = view(learner, concept_id);
      v.exhausted = true;
      return v;
    }
    auto it = draws_.find({learner, concept_id});
    const std::uint64_t draw = it == draws_.end() ? 0 : it->second;
    const QuestionId q = next_question_random(*st, pool, draw_seed(p, concept_id, draw));
    payload["question_id"] = q;
    payload["level"] = to_string(bank_.at(q).level);
    payload["draw"] = draw;
  }
  commit(learner, EventKind::ExerciseAssigned, std::move(payload));
  return view(learner, concept_id);
}

SubmitResult Engine::submit_code(const std::string& learner, QuestionId question_id,
                                 const Submission& submission, const std::optional<std::string>& request_id) {
  const LearnerProfile& p = require_profile(learner);
  if (request_id) {
    if (const LogEvent* e = request_event(learner, *request_id)) {
      if (e->kind != EventKind::Submitted) {
        throw Error(ErrorCode::InvalidArgument, "request id reused for a different operation");
      }
      SubmitResult r;
      r.feedback = e->payload.at("feedback");
      r.transition = transition_from_string(e->payload.value("transition", std::string("stay")));
      r.missing_logic = e->payload.value("missing_logic", false);
      const LearnerState* st = state(learner, e->payload.at("concept").get<std::string>());
      r.concept_complete = st != nullptr && st->complete;
      return r;
    }
  }
  const auto a = assignment(learner);
  if (!a || a->second != question_id) {
    throw Error(ErrorCode::NotAssigned, "question " + std::to_string(question_id) + " is not assigned");
  }
  const ConceptId concept_id = a->first;
  const Question& question = bank_.at(question_id);
  const LearnerState& st = *state(learner, concept_id);

  const GradeReport report = grade(submission, question, executor_, config_.grade_options);
  const bool missing_logic = detect_missing_logic(submission.source, question, graph_, report);

  OutcomeContext ctx;
  ctx.mode = p.mode.kind;
  ctx.question_level = question.level;
  ctx.threshold = config_.threshold;
  ctx.k = config_.fixed_k ? rating::LearningRate{*config_.fixed_k}
                         : rating::select_k(static_cast<int>(
                                                bank_.level_pool(concept_id, p.language, question.level).size()))
                               .rate;
  ctx.concept_question_count = static_cast<int>(bank_.concept_pool(concept_id, p.language).size());

  ItemState item;
  if (auto it = items_.find(question_id); it != items_.end()) item = it->second;
  item.question_id = question_id;
  const OutcomeResult res =
      apply_outcome(st, item, report.all_correct ? Outcome::Correct : Outcome::Incorrect, ctx);

  json failures = json::array();
  for (const auto& c : report.per_case) failures.push_back(c.failure ? json(*c.failure) : json(nullptr));
  json feedback = render_feedback(report);
  json payload{{"concept", concept_id},
               {"question_id", question_id},
               {"level", to_string(res.skill_level)},
               {"question_level", to_string(question.level)},
               {"all_correct", report.all_correct},
               {"missing_logic", missing_logic},
               {"theta_before", res.theta_before},
               {"theta_after", res.theta_after},
               {"d_before", res.d_before},
               {"d_after", res.d_after},
               {"k", ctx.k.k},
               {"elapsed_seconds", submission.elapsed_seconds},
               {"source", submission.source},
               {"feedback", feedback},
               {"execution_failures", std::move(failures)},
               {"transition", rating::to_string(res.transition)}};
  if (request_id) payload["request_id"] = *request_id;
  commit(learner, EventKind::Submitted, std::move(payload));

  for (const auto& ev : res.events) {
    json lp{{"concept", concept_id}, {"from", to_string(ev.from)}, {"to", to_string(ev.to)}, {"skill", ev.skill}};
    switch (ev.kind) {
      case LevelEvent::Kind::Promoted:
        commit(learner, EventKind::Promoted, std::move(lp));
        break;
      case LevelEvent::Kind::Demoted:
        commit(learner, EventKind::Demoted, std::move(lp));
        break;
      case LevelEvent::Kind::ConceptCompleted:
        commit(learner, EventKind::ConceptCompleted,
               json{{"concept", concept_id}, {"level", to_string(ev.to)}, {"skill", ev.skill}});
        break;
    }
  }

  SubmitResult r;
  r.feedback = std::move(feedback);
  r.transition = res.transition;
  r.missing_logic = missing_logic;
  r.concept_complete = res.state.complete;
  return r;
}

SessionView Engine::skip_exercise(const std::string& learner, QuestionId question_id,
                                  const std::optional<std::string>& request_id) {
  const LearnerProfile& p = require_profile(learner);
  if (request_id) {
    if (const LogEvent* e = request_event(learner, *request_id)) {
      return view(learner, e->payload.at("concept").get<std::string>());
    }
  }
  const auto a = assignment(learner);
  if (!a || a->second != question_id) {
    throw Error(ErrorCode::NotAssigned, "question " + std::to_string(question_id) + " is not assigned");
  }
  const ConceptId concept_id = a->first;
  const Question& question = bank_.at(question_id);
  const LearnerState& st = *state(learner, concept_id);

  OutcomeContext ctx;
  ctx.mode = p.mode.kind;
  ctx.question_level = question.level;
  ctx.threshold = config_.threshold;
  ctx.k = config_.fixed_k ? rating::LearningRate{*config_.fixed_k}
                         : rating::select_k(static_cast<int>(
                                                bank_.level_pool(concept_id, p.language, question.level).size()))
                               .rate;
  ctx.concept_question_count = static_cast<int>(bank_.concept_pool(concept_id, p.language).size());

  ItemState item;
  if (auto it = items_.find(question_id); it != items_.end()) item = it->second;
  item.question_id = question_id;
  const OutcomeResult res = apply_skip(st, item, ctx);

  json payload{{"concept", concept_id},
               {"question_id", question_id},
               {"level", to_string(res.skill_level)},
               {"question_level", to_string(question.level)},
               {"theta_before", res.theta_before},
               {"theta_after", res.theta_after},
               {"d_before", res.d_before},
               {"d_after", res.d_after},
               {"k", ctx.k.k},
               {"transition", rating::to_string(res.transition)}};
  if (request_id) payload["request_id"] = *request_id;
  commit(learner, EventKind::Skipped, std::move(payload));
  for (const auto& ev : res.events) {
    json lp{{"concept", concept_id}, {"from", to_string(ev.from)}, {"to", to_string(ev.to)}, {"skill", ev.skill}};
    commit(learner, ev.kind == LevelEvent::Kind::Demoted ? EventKind::Demoted : EventKind::Promoted,
           std::move(lp));
  }
  return request_exercise(learner, concept_id);
}

CompletionPage Engine::completion_page(const std::string& learner, const ConceptId& concept_id) const {
  const LearnerProfile& p = require_profile(learner);
  const LearnerState* st = state(learner, concept_id);
  if (st == nullptr || !st->complete) {
    throw Error(ErrorCode::ConceptNotComplete, "concept '" + concept_id + "' is not complete");
  }
  CompletionPage page;
  page.concept_id = concept_id;
  page.suggestions = suggest_next(exercise_questions(p.language), graph_, concept_id, progress(learner));
  const auto lists = completion_lists(*st, bank_.concept_pool(concept_id, p.language));
  page.never_tried = lists.never_tried;
  page.incomplete = lists.incomplete;
  return page;
}

SessionView Engine::reenter(const std::string& learner, const ConceptId& concept_id,
                            std::optional<QuestionId> question) {
  const LearnerProfile& p = require_profile(learner);
  const CompletionPage page = completion_page(learner, concept_id);
  const auto pool = bank_.concept_pool(concept_id, p.language);
  json payload{{"concept", concept_id}, {"reentry", true}};
  QuestionId q = 0;
  if (question) {
    if (std::find(pool.begin(), pool.end(), *question) == pool.end()) {
      throw Error(ErrorCode::UnknownQuestion,
                  "question " + std::to_string(*question) + " is not part of '" + concept_id + "'");
    }
    q = *question;
  } else {
    std::vector<QuestionId> candidates = page.never_tried;
    candidates.insert(candidates.end(), page.incomplete.begin(), page.incomplete.end());
    std::sort(candidates.begin(), candidates.end());
    auto it = draws_.find({learner, concept_id});
    const std::uint64_t draw = it == draws_.end() ? 0 : it->second;
    q = draw_uniform(candidates, draw_seed(p, concept_id, draw));
    payload["draw"] = draw;
  }
  payload["question_id"] = q;
  payload["level"] = to_string(bank_.at(q).level);
  commit(learner, EventKind::ExerciseAssigned, std::move(payload));
  return view(learner, concept_id);
}

// ---------------------------------------------------------------------------
// Snapshots

json Engine::snapshot() const {
  json profiles = json::array();
  for (const auto& [id, prof] : profiles_) {
    profiles.push_back({{"learner", id},
                        {"has_programming_experience", prof.has_programming_experience},
                        {"mode", to_string(prof.mode.kind)},
                        {"seed", prof.mode.seed},
                        {"language", prof.language},
                        {"group", prof.group}});
  }
  json states = json::array();
  for (const auto& [key, st] : states_) {
    json skills = json::object();
    for (const auto& [lvl, s] : st.skills) skills[to_string(lvl)] = s.value();
    states.push_back({{"learner", st.learner_id},
                      {"language", st.language},
                      {"concept", st.concept_id},
                      {"current_level", to_string(st.current_level)},
                      {"skills", skills},
                      {"correct", sorted_vector(st.correct_qs)},
                      {"incorrect", sorted_vector(st.incorrect_qs)},
                      {"skipped", sorted_vector(st.skipped_qs)},
                      {"pretest_done", st.pretest_done},
                      {"complete", st.complete}});
  }
  json items = json::array();
  for (const auto& [id, item] : items_) {
    items.push_back({{"question_id", id}, {"difficulty", item.difficulty.value}, {"attempts", item.attempt_count}});
  }
  json assignments = json::array();
  for (const auto& [learner, a] : assignments_) {
    assignments.push_back({{"learner", learner}, {"concept", a.first}, {"question_id", a.second}});
  }
  json draws = json::array();
  for (const auto& [key, n] : draws_) draws.push_back({{"learner", key.first}, {"concept", key.second}, {"next", n}});
  json last_ts = json::object();
  for (const auto& [learner, ts] : last_ts_) last_ts[learner] = ts;
  json requests = json::array();
  for (const auto& [key, idx] : requests_) {
    requests.push_back({{"learner", key.first}, {"request_id", key.second}, {"event_index", idx}});
  }
  return {{"event_count", events_.size()},
          {"last_seq", events_.empty() ? 0 : events_.back().seq},
          {"profiles", profiles},
          {"states", states},
          {"items", items},
          {"assignments", assignments},
          {"draws", draws},
          {"last_ts", last_ts},
          {"requests", requests}};
}

void Engine::restore(const json& snap, const std::vector<LogEvent>& events) {
  const std::size_t count = snap.at("event_count").get<std::size_t>();
  if (count > events.size() ||
      (count > 0 && events[count - 1].seq != snap.at("last_seq").get<std::uint64_t>())) {
    throw Error(ErrorCode::CorruptLog, "snapshot does not match the event log");
  }
  profiles_.clear();
  states_.clear();
  items_.clear();
  assignments_.clear();
  draws_.clear();
  last_ts_.clear();
  requests_.clear();
  try {
    for (const auto& j : snap.at("profiles")) {
      LearnerProfile prof;
      prof.learner_id = j.at("learner").get<std::string>();
      prof.has_programming_experience = j.at("has_programming_experience").get<bool>();
      prof.mode.kind = mode_from_string(j.at("mode").get<std::string>());
      prof.mode.seed = j.at("seed").get<std::uint64_t>();
      prof.language = j.at("language").get<std::string>();
      prof.group = j.at("group").get<std::string>();
      profiles_[prof.learner_id] = prof;
    }
    for (const auto& j : snap.at("states")) {
      LearnerState st;
      st.learner_id = j.at("learner").get<std::string>();
      st.language = j.at("language").get<std::string>();
      st.concept_id = j.at("concept").get<std::string>();
      st.current_level = level_from_string(j.at("current_level").get<std::string>());
      for (const auto& [lvl, v] : j.at("skills").items()) st.skills[level_from_string(lvl)] = rating::Skill(v.get<double>());
      for (QuestionId q : j.at("correct").get<std::vector<QuestionId>>()) st.correct_qs.insert(q);
      for (QuestionId q : j.at("incorrect").get<std::vector<QuestionId>>()) st.incorrect_qs.insert(q);
      for (QuestionId q : j.at("skipped").get<std::vector<QuestionId>>()) st.skipped_qs.insert(q);
      st.pretest_done = j.at("pretest_done").get<bool>();
      st.complete = j.at("complete").get<bool>();
      states_[{st.learner_id, st.concept_id}] = st;
    }
    for (const auto& j : snap.at("items")) {
      ItemState item;
      item.question_id = j.at("question_id").get<QuestionId>();
      item.difficulty = rating::Difficulty{j.at("difficulty").get<double>()};
      item.attempt_count = j.at("attempts").get<int>();
      items_[item.question_id] = item;
    }
    for (const auto& j : snap.at("assignments")) {
      assignments_[j.at("learner").get<std::string>()] = {j.at("concept").get<std::string>(),
                                                           j.at("question_id").get<QuestionId>()};
    }
    for (const auto& j : snap.at("draws")) {
      draws_[{j.at("learner").get<std::string>(), j.at("concept").get<std::string>()}] =
          j.at("next").get<std::uint64_t>();
    }
    for (const auto& [learner, ts] : snap.at("last_ts").items()) last_ts_[learner] = ts.get<std::int64_t>();
    for (const auto& j : snap.at("requests")) {
      requests_[{j.at("learner").get<std::string>(), j.at("request_id").get<std::string>()}] =
          j.at("event_index").get<std::size_t>();
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::CorruptLog, std::string("malformed snapshot: ") + ex.what());
  }
  events_.assign(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(count));
  next_seq_ = events_.empty() ? 1 : events_.back().seq + 1;
  replay(std::vector<LogEvent>(events.begin() + static_cast<std::ptrdiff_t>(count), events.end()));
}

}  // namespace practice
