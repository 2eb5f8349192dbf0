#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace practice {

enum class Level { Easy = 0, Standard = 1, Difficult = 2 };

inline constexpr Level kAllLevels[] = {Level::Easy, Level::Standard, Level::Difficult};

std::string to_string(Level level);
Level level_from_string(std::string_view text);

using QuestionId = int;
using ConceptId = std::string;

struct TestCase {
  std::vector<std::string> stdin_lines;
  std::vector<std::string> expected_stdout_lines;
};

struct Question {
  QuestionId id = 0;
  std::string language;
  std::vector<ConceptId> concept_tags;
  Level level = Level::Easy;
  std::string prompt_en;
  std::optional<std::string> prompt_th;
  std::vector<TestCase> test_cases;
  std::optional<std::string> reference_solution;
  // Level-setting question: graded normally, never served as an exercise,
  // never touches Elo state.
  bool pretest = false;

  bool has_tag(std::string_view concept_id) const;
};

/// Question bank indexed by id. Ids are unique; iteration is ascending by id.
class QuestionBank {
 public:
  QuestionBank() = default;
  explicit QuestionBank(std::vector<Question> questions);

  const std::vector<Question>& questions() const noexcept { return questions_; }
  const Question* find(QuestionId id) const;
  const Question& at(QuestionId id) const;
  bool empty() const noexcept { return questions_.empty(); }
  std::size_t size() const noexcept { return questions_.size(); }

  /// Exercise questions (no pretests) tagged with `concept_id`, ascending ids.
  std::vector<QuestionId> concept_pool(std::string_view concept_id,
                                       std::string_view language) const;
  std::vector<QuestionId> level_pool(std::string_view concept_id, std::string_view language,
                                     Level level) const;
  std::vector<QuestionId> pretest_pool(std::string_view concept_id,
                                       std::string_view language) const;

 private:
  std::vector<Question> questions_;
  std::map<QuestionId, std::size_t> index_;
};

// Parsing follows the bank JSON document; malformed input raises
// Error(ParseError). Duplicate ids raise Error(DuplicateId).
QuestionBank parse_bank(const nlohmann::json& doc);
QuestionBank load_bank_file(const std::string& path);
nlohmann::json question_to_json(const Question& q);

}  // namespace practice
