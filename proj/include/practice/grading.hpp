#pragma once

#include "practice/bank.hpp"
#include "practice/ontology.hpp"

#include <json.hpp>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace practice {

enum class Verdict { Correct, Incorrect };

std::string to_string(Verdict v);

struct CaseResult {
  Verdict verdict = Verdict::Incorrect;
  std::vector<std::string> input_shown;
  std::vector<std::string> expected_shown;
  // Absent when the program crashed, timed out or produced no transcript;
  // rendered as the null marker.
  std::optional<std::vector<std::string>> actual_shown;
  // Executor-side failure description ("exit status 1", "timeout").
  std::optional<std::string> failure;
};

struct GradeReport {
  std::vector<CaseResult> per_case;
  bool all_correct = false;

  bool any_execution_failure() const;
};

struct Submission {
  std::string source;
  // One stdout transcript per test case; nullopt marks a crashed run.
  std::optional<std::vector<std::optional<std::string>>> outputs;
  std::int64_t timestamp_ms = 0;
  double elapsed_seconds = 0.0;
};

struct ExecutionResult {
  bool ok = false;
  std::string stdout_text;
  std::optional<std::string> failure;
};

/// Runs learner code against one test case's stdin.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecutionResult run(std::string_view source, const std::vector<std::string>& stdin_lines) = 0;
};

struct GradeOptions {
  bool case_insensitive = false;
  std::optional<double> numeric_tolerance;
};

/// Splits on '\n', strips trailing whitespace per line and drops trailing
/// blank lines.
std::vector<std::string> normalize_lines(std::string_view text);

GradeReport grade(const Submission& submission, const Question& question, Executor* executor,
                  const GradeOptions& options = {});

/// True when a failing submission contains none of the syntax markers of any
/// tagged concept (comments stripped). Abstains when no tag has markers.
bool detect_missing_logic(std::string_view source, const Question& question,
                          const ConceptGraph& graph, const GradeReport& report);

std::string strip_comments(std::string_view source, const LanguageSyntax& syntax);
bool contains_token(std::string_view haystack, std::string_view marker);

nlohmann::json render_feedback(const GradeReport& report);
GradeReport report_from_feedback(const nlohmann::json& doc);

}  // namespace practice
