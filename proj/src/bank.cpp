#include "practice/bank.hpp"

#include "practice/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace practice {

std::string to_string(Level level) {
  switch (level) {
    case Level::Easy:
      return "easy";
    case Level::Standard:
      return "standard";
    case Level::Difficult:
      return "difficult";
  }
  return "easy";
}

Level level_from_string(std::string_view text) {
  if (text == "easy") return Level::Easy;
  if (text == "standard") return Level::Standard;
  if (text == "difficult") return Level::Difficult;
  throw Error(ErrorCode::ParseError, "unknown level '" + std::string(text) + "'");
}

bool Question::has_tag(std::string_view concept_id) const {
  return std::find(concept_tags.begin(), concept_tags.end(), concept_id) != concept_tags.end();
}

QuestionBank::QuestionBank(std::vector<Question> questions) : questions_(std::move(questions)) {
  std::sort(questions_.begin(), questions_.end(),
            [](const Question& a, const Question& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    if (!index_.emplace(questions_[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId,
                  "duplicate question id " + std::to_string(questions_[i].id));
    }
  }
}

const Question* QuestionBank::find(QuestionId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &questions_[it->second];
}

const Question& QuestionBank::at(QuestionId id) const {
  const Question* q = find(id);
  if (q == nullptr) {
    throw Error(ErrorCode::UnknownQuestion, "unknown question id " + std::to_string(id));
  }
  return *q;
}

std::vector<QuestionId> QuestionBank::concept_pool(std::string_view concept_id,
                                                   std::string_view language) const {
  std::vector<QuestionId> out;
  for (const auto& q : questions_) {
    if (!q.pretest && q.language == language && q.has_tag(concept_id)) out.push_back(q.id);
  }
  return out;
}

std::vector<QuestionId> QuestionBank::level_pool(std::string_view concept_id,
                                                 std::string_view language,
                                                 Level level) const {
  std::vector<QuestionId> out;
  for (const auto& q : questions_) {
    if (!q.pretest && q.level == level && q.language == language && q.has_tag(concept_id)) {
      out.push_back(q.id);
    }
  }
  return out;
}

std::vector<QuestionId> QuestionBank::pretest_pool(std::string_view concept_id,
                                                   std::string_view language) const {
  std::vector<QuestionId> out;
  for (const auto& q : questions_) {
    if (q.pretest && q.language == language && q.has_tag(concept_id)) out.push_back(q.id);
  }
  return out;
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) {
    throw Error(ErrorCode::ParseError, std::string(field) + " must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw Error(ErrorCode::ParseError, std::string(field) + " must be an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

Question parse_question(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "question must be an object");
  Question q;
  try {
    q.id = j.at("id").get<int>();
    q.language = j.at("language").get<std::string>();
    q.level = level_from_string(j.at("level").get<std::string>());
    q.concept_tags = string_list(j.at("concept_tags"), "concept_tags");
    q.prompt_en = j.value("prompt_en", std::string{});
    if (j.contains("prompt_th") && !j["prompt_th"].is_null()) {
      q.prompt_th = j["prompt_th"].get<std::string>();
    }
    if (j.contains("reference_solution") && !j["reference_solution"].is_null()) {
      q.reference_solution = j["reference_solution"].get<std::string>();
    }
    q.pretest = j.value("pretest", false);
    for (const auto& tc : j.at("test_cases")) {
      TestCase t;
      t.stdin_lines = string_list(tc.at("stdin"), "stdin");
      t.expected_stdout_lines = string_list(tc.at("expected_stdout"), "expected_stdout");
      if (t.expected_stdout_lines.empty()) {
        throw Error(ErrorCode::ParseError,
                    "question " + std::to_string(q.id) + " has a test case with empty expected output");
      }
      q.test_cases.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed question: ") + e.what());
  }
  if (q.test_cases.empty()) {
    throw Error(ErrorCode::ParseError, "question " + std::to_string(q.id) + " has no test cases");
  }
  if (q.concept_tags.empty()) {
    throw Error(ErrorCode::ParseError, "question " + std::to_string(q.id) + " has no concept tags");
  }
  return q;
}

}  // namespace

QuestionBank parse_bank(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("questions") || !doc["questions"].is_array()) {
    throw Error(ErrorCode::ParseError, "bank document needs a \"questions\" array");
  }
  std::vector<Question> questions;
  for (const auto& j : doc["questions"]) questions.push_back(parse_question(j));
  return QuestionBank(std::move(questions));
}

QuestionBank load_bank_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return parse_bank(doc);
}

nlohmann::json question_to_json(const Question& q) {
  nlohmann::json j;
  j["id"] = q.id;
  j["language"] = q.language;
  j["level"] = to_string(q.level);
  j["concept_tags"] = q.concept_tags;
  j["prompt_en"] = q.prompt_en;
  if (q.prompt_th) j["prompt_th"] = *q.prompt_th;
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& tc : q.test_cases) {
    cases.push_back({{"stdin", tc.stdin_lines}, {"expected_stdout", tc.expected_stdout_lines}});
  }
  j["test_cases"] = std::move(cases);
  if (q.reference_solution) j["reference_solution"] = *q.reference_solution;
  if (q.pretest) j["pretest"] = true;
  return j;
}

}  // namespace practice
