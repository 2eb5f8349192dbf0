#pragma once

#include "practice/bank.hpp"
#include "practice/grading.hpp"
#include "practice/ontology.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace testing_support {

inline std::string source_path(const std::string& rel) { return std::string(PRACTICE_SOURCE_DIR) + "/" + rel; }

inline nlohmann::json read_json(const std::string& rel) {
  std::ifstream in(source_path(rel));
  return nlohmann::json::parse(in);
}

inline practice::ConceptGraph sample_graph() { return practice::load_ontology_file(source_path("data/ontology.json")); }
inline practice::QuestionBank sample_bank() { return practice::load_bank_file(source_path("data/bank.json")); }
inline practice::QuestionBank listing_bank() {
  return practice::load_bank_file(source_path("tests/fixtures/conditionals_listing.json"));
}

inline practice::Question make_question(practice::QuestionId id, std::vector<std::string> tags,
                                        practice::Level level = practice::Level::Easy,
                                        const std::string& language = "python") {
  practice::Question q;
  q.id = id;
  q.language = language;
  q.concept_tags = std::move(tags);
  q.level = level;
  q.prompt_en = "question " + std::to_string(id);
  q.test_cases = {{{"1"}, {"ok"}}};
  return q;
}

/// Transcript-per-case executor keyed by the first stdin line.
class ScriptedExecutor : public practice::Executor {
 public:
  std::map<std::string, practice::ExecutionResult> by_input;
  int calls = 0;

  practice::ExecutionResult run(std::string_view, const std::vector<std::string>& stdin_lines) override {
    ++calls;
    const std::string key = stdin_lines.empty() ? "" : stdin_lines.front();
    auto it = by_input.find(key);
    if (it == by_input.end()) return {false, "", "no script"};
    return it->second;
  }
};

}  // namespace testing_support
