#include "practice/service.hpp"

#include <httplib.h>

#include <fstream>
#include <mutex>
#include <regex>

namespace practice {

using nlohmann::json;

nlohmann::json ApiError::to_json() const { return {{"code", code}, {"message", message}}; }

ApiError to_api_error(const Error& e) {
  int status = 500;
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingTranscript:
      status = 400;
      break;
    case ErrorCode::UnknownConcept:
    case ErrorCode::UnknownQuestion:
    case ErrorCode::UnknownLearner:
      status = 404;
      break;
    case ErrorCode::NotAssigned:
    case ErrorCode::StateMismatch:
    case ErrorCode::PoolExhausted:
    case ErrorCode::NoPretestPending:
    case ErrorCode::PretestRequired:
    case ErrorCode::ConceptNotSelected:
    case ErrorCode::ConceptNotComplete:
    case ErrorCode::QuestionnaireRequired:
      status = 409;
      break;
    case ErrorCode::ExecutorFailure:
      status = 502;
      break;
    case ErrorCode::CycleError:
    case ErrorCode::DanglingParent:
    case ErrorCode::DuplicateId:
    case ErrorCode::CorruptLog:
    case ErrorCode::NonTerminating:
      status = 500;
      break;
  }
  return {status, std::string(error_code_name(e.code())), e.what()};
}

namespace {

ApiResponse error_response(int status, std::string code, std::string message) {
  return {status, ApiError{status, std::move(code), std::move(message)}.to_json()};
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
  return j;
}

template <typename T>
std::optional<T> optional_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
T required_field(const json& body, const char* name) {
  auto v = optional_field<T>(body, name);
  if (!v) throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  return *v;
}

Submission submission_from(const json& body) {
  Submission s;
  s.source = optional_field<std::string>(body, "source").value_or("");
  s.elapsed_seconds = optional_field<double>(body, "elapsed_seconds").value_or(0.0);
  auto it = body.find("outputs");
  if (it != body.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::ParseError, "outputs must be an array");
    std::vector<std::optional<std::string>> outs;
    for (const auto& o : *it) {
      if (o.is_null()) {
        outs.emplace_back(std::nullopt);
      } else if (o.is_string()) {
        outs.emplace_back(o.get<std::string>());
      } else {
        throw Error(ErrorCode::ParseError, "outputs entries must be strings or null");
      }
    }
    s.outputs = std::move(outs);
  }
  return s;
}

std::string learner_of(const ApiRequest& req, const json& body) {
  if (auto it = req.headers.find("x-learner-id"); it != req.headers.end() && !it->second.empty()) return it->second;
  if (auto it = req.query.find("learner"); it != req.query.end() && !it->second.empty()) return it->second;
  if (auto v = optional_field<std::string>(body, "learner"); v && !v->empty()) return *v;
  throw Error(ErrorCode::InvalidArgument, "learner id required (X-Learner-Id header or 'learner' field)");
}

std::optional<std::string> query_param(const ApiRequest& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end()) return std::nullopt;
  return it->second;
}

json question_brief(const Question& q) {
  json j{{"id", q.id}, {"prompt_en", q.prompt_en}};
  j["prompt_th"] = q.prompt_th ? json(*q.prompt_th) : json(nullptr);
  return j;
}

}  // namespace

struct Service::Http {
  httplib::Server server;
};

Service::Service(ConceptGraph graph, QuestionBank bank, ServiceConfig config)
    : config_(std::move(config)),
      engine_(std::move(graph), std::move(bank), config_.engine),
      http_(std::make_unique<Http>()) {
  if (config_.exec_command) {
    executor_ = std::make_unique<CommandExecutor>(*config_.exec_command, std::chrono::seconds(5), ".py");
    engine_.set_executor(executor_.get());
  }
  if (!config_.data_dir.empty()) {
    std::filesystem::create_directories(config_.data_dir);
    const auto events = read_jsonl_file(log_path().string());
    bool restored = false;
    if (std::filesystem::exists(snapshot_path())) {
      std::ifstream in(snapshot_path());
      json snap = json::parse(in, nullptr, false);
      if (!snap.is_discarded()) {
        try {
          engine_.restore(snap, events);
          restored = true;
        } catch (const Error&) {
          // A stale or damaged snapshot is only a cache; fall back to the log.
        }
      }
    }
    if (!restored) {
      engine_ = Engine(engine_.graph(), engine_.bank(), config_.engine);
      if (executor_) engine_.set_executor(executor_.get());
      engine_.replay(events);
    }
    last_snapshot_events_ = engine_.events().size();
    writer_ = std::make_unique<JsonlWriter>(log_path().string());
    engine_.set_sink([this](const LogEvent& e) { writer_->append(e); });
  }
}

Service::~Service() {
  try {
    checkpoint();
  } catch (...) {
  }
}

std::filesystem::path Service::log_path() const { return config_.data_dir / "events.jsonl"; }
std::filesystem::path Service::snapshot_path() const { return config_.data_dir / "snapshot.json"; }

void Service::checkpoint() {
  std::unique_lock lock(mutex_);
  if (config_.data_dir.empty()) return;
  if (writer_) writer_->flush();
  const auto tmp = snapshot_path().string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << engine_.snapshot().dump() << "\n";
  }
  std::filesystem::rename(tmp, snapshot_path());
  last_snapshot_events_ = engine_.events().size();
}

void Service::maybe_snapshot() {
  if (config_.data_dir.empty() || config_.snapshot_every == 0) return;
  if (engine_.events().size() - last_snapshot_events_ < config_.snapshot_every) return;
  const auto tmp = snapshot_path().string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << engine_.snapshot().dump() << "\n";
  }
  std::filesystem::rename(tmp, snapshot_path());
  last_snapshot_events_ = engine_.events().size();
}

ApiResponse Service::handle(const ApiRequest& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    const ApiError api = to_api_error(e);
    return {api.http_status, api.to_json()};
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

ApiResponse Service::dispatch(const ApiRequest& req) {
  static const std::regex kConceptAction(R"(^/concepts/([a-z0-9_-]+)/(select|pretest|completion|reenter)$)");
  const json body = parse_body(req.body);
  std::smatch m;

  if (req.method == "GET" && req.path == "/concepts") {
    const std::string learner = learner_of(req, body);
    std::shared_lock lock(mutex_);
    return {200, engine_.concepts_payload(learner)};
  }

  if (req.method == "POST" && req.path == "/session") {
    LearnerProfile prof;
    prof.learner_id = learner_of(req, body);
    prof.has_programming_experience = required_field<bool>(body, "has_programming_experience");
    prof.language = optional_field<std::string>(body, "language").value_or("python");
    prof.group = optional_field<std::string>(body, "group").value_or("");
    prof.mode = config_.default_mode;
    if (auto it = config_.group_modes.find(prof.group); it != config_.group_modes.end()) prof.mode.kind = it->second;
    std::unique_lock lock(mutex_);
    auto view = engine_.start_session(prof);
    maybe_snapshot();
    return {200, to_json(view)};
  }

  if (std::regex_match(req.path, m, kConceptAction)) {
    const ConceptId concept_id = m[1];
    const std::string action = m[2];
    const std::string learner = learner_of(req, body);
    const auto request_id = optional_field<std::string>(body, "request_id");

    if (req.method == "GET" && action == "completion") {
      std::shared_lock lock(mutex_);
      return {200, to_json(engine_.completion_page(learner, concept_id))};
    }
    if (req.method == "POST" && action == "select") {
      std::unique_lock lock(mutex_);
      const SelectResult r = engine_.select_concept(learner, concept_id, request_id);
      json out{{"concept", concept_id}, {"pretest_required", r.pretest_required}};
      if (engine_.profile(learner).mode.kind == ModeKind::Adaptive) out["level"] = to_string(r.level);
      json qs = json::array();
      for (QuestionId q : r.pretest_questions) qs.push_back(question_brief(engine_.bank().at(q)));
      out["pretest_questions"] = qs;
      maybe_snapshot();
      return {200, out};
    }
    if (req.method == "POST" && action == "pretest") {
      std::map<QuestionId, Submission> answers;
      auto it = body.find("answers");
      if (it == body.end() || !it->is_array()) throw Error(ErrorCode::ParseError, "answers must be an array");
      for (const auto& a : *it) {
        if (!a.is_object()) throw Error(ErrorCode::ParseError, "answers entries must be objects");
        answers[required_field<QuestionId>(a, "question_id")] = submission_from(a);
      }
      std::unique_lock lock(mutex_);
      const Level level = engine_.submit_pretest(learner, concept_id, answers, request_id);
      json out{{"concept", concept_id}};
      if (engine_.profile(learner).mode.kind == ModeKind::Adaptive) out["level"] = to_string(level);
      maybe_snapshot();
      return {200, out};
    }
    if (req.method == "POST" && action == "reenter") {
      std::unique_lock lock(mutex_);
      auto view = engine_.reenter(learner, concept_id, optional_field<QuestionId>(body, "question_id"));
      maybe_snapshot();
      return {200, to_json(view)};
    }
    return error_response(405, "method_not_allowed", req.method + " " + req.path);
  }

  if (req.method == "GET" && req.path == "/exercise/next") {
    const std::string learner = learner_of(req, body);
    const auto concept_id = query_param(req, "concept");
    if (!concept_id) throw Error(ErrorCode::InvalidArgument, "query parameter 'concept' required");
    // Assigning a question is a mutation even though the route is a GET.
    std::unique_lock lock(mutex_);
    auto view = engine_.request_exercise(learner, *concept_id);
    maybe_snapshot();
    return {200, to_json(view)};
  }

  if (req.method == "POST" && req.path == "/submission") {
    const std::string learner = learner_of(req, body);
    const auto question = required_field<QuestionId>(body, "question_id");
    const Submission sub = submission_from(body);
    std::unique_lock lock(mutex_);
    const SubmitResult r =
        engine_.submit_code(learner, question, sub, optional_field<std::string>(body, "request_id"));
    json out{{"question_id", question},
             {"feedback", r.feedback},
             {"missing_logic", r.missing_logic},
             {"concept_complete", r.concept_complete}};
    if (engine_.profile(learner).mode.kind == ModeKind::Adaptive) out["transition"] = rating::to_string(r.transition);
    maybe_snapshot();
    return {200, out};
  }

  if (req.method == "POST" && req.path == "/skip") {
    const std::string learner = learner_of(req, body);
    const auto question = required_field<QuestionId>(body, "question_id");
    std::unique_lock lock(mutex_);
    auto view = engine_.skip_exercise(learner, question, optional_field<std::string>(body, "request_id"));
    maybe_snapshot();
    return {200, to_json(view)};
  }

  return error_response(404, "not_found", "no route for " + req.method + " " + req.path);
}

bool Service::listen(const std::string& host, int port) {
  auto& srv = http_->server;
  auto bridge = [this](const httplib::Request& r, httplib::Response& res) {
    ApiRequest req;
    req.method = r.method;
    req.path = r.path;
    for (const auto& [k, v] : r.params) req.query[k] = v;
    for (const auto& [k, v] : r.headers) {
      std::string key = k;
      for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      req.headers[key] = v;
    }
    req.body = r.body;
    const ApiResponse out = handle(req);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json; charset=utf-8");
  };
  srv.Get(".*", bridge);
  srv.Post(".*", bridge);
  if (port == 0) {
    bound_port_ = srv.bind_to_any_port(host);
  } else {
    if (!srv.bind_to_port(host, port)) return false;
    bound_port_ = port;
  }
  if (bound_port_ <= 0) return false;
  const bool ok = srv.listen_after_bind();
  checkpoint();
  return ok;
}

void Service::stop() { http_->server.stop(); }

bool Service::running() const { return http_->server.is_running(); }

}  // namespace practice
