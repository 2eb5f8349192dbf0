#include "practice/grading.hpp"

#include "practice/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace practice {

std::string to_string(Verdict v) { return v == Verdict::Correct ? "Correct" : "Incorrect"; }

bool GradeReport::any_execution_failure() const {
  return std::any_of(per_case.begin(), per_case.end(),
                     [](const CaseResult& c) { return c.failure.has_value(); });
}

std::vector<std::string> normalize_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    lines.emplace_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool lines_equal(const std::string& actual, const std::string& expected, const GradeOptions& opt) {
  if (actual == expected) return true;
  if (opt.numeric_tolerance) {
    auto a = parse_number(actual);
    auto e = parse_number(expected);
    if (a && e && std::fabs(*a - *e) <= *opt.numeric_tolerance) return true;
  }
  if (opt.case_insensitive && actual.size() == expected.size()) {
    return std::equal(actual.begin(), actual.end(), expected.begin(), [](char x, char y) {
      return std::tolower(static_cast<unsigned char>(x)) ==
             std::tolower(static_cast<unsigned char>(y));
    });
  }
  return false;
}

bool transcript_matches(const std::vector<std::string>& actual,
                        const std::vector<std::string>& expected, const GradeOptions& opt) {
  if (actual.size() != expected.size()) return false;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!lines_equal(actual[i], expected[i], opt)) return false;
  }
  return true;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace

GradeReport grade(const Submission& submission, const Question& question, Executor* executor,
                  const GradeOptions& options) {
  const auto& cases = question.test_cases;
  if (cases.empty()) {
    throw Error(ErrorCode::MissingTranscript, "question " + std::to_string(question.id) + " has no test cases");
  }
  if (submission.outputs) {
    if (submission.outputs->size() != cases.size()) {
      throw Error(ErrorCode::MissingTranscript,
                  "expected " + std::to_string(cases.size()) + " transcripts, got " +
                      std::to_string(submission.outputs->size()));
    }
  } else if (executor == nullptr) {
    throw Error(ErrorCode::MissingTranscript, "no transcripts supplied and no executor configured");
  }

  GradeReport report;
  report.all_correct = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const TestCase& tc = cases[i];
    const auto expected = normalize_lines(join_lines(tc.expected_stdout_lines));

    CaseResult result;
    result.input_shown = tc.stdin_lines;
    result.expected_shown = tc.expected_stdout_lines;
    if (submission.outputs) {
      const auto& transcript = (*submission.outputs)[i];
      if (transcript) {
        result.actual_shown = normalize_lines(*transcript);
      } else {
        result.failure = "no output";
      }
    } else {
      ExecutionResult run = executor->run(submission.source, tc.stdin_lines);
      if (run.ok) {
        result.actual_shown = normalize_lines(run.stdout_text);
      } else {
        result.failure = run.failure.value_or("execution failed");
      }
    }

    const bool ok = result.actual_shown && transcript_matches(*result.actual_shown, expected, options);
    result.verdict = ok ? Verdict::Correct : Verdict::Incorrect;
    report.all_correct = report.all_correct && ok;
    report.per_case.push_back(std::move(result));
  }
  return report;
}

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

bool contains_token(std::string_view haystack, std::string_view marker) {
  if (marker.empty()) return false;
  const bool check_front = is_ident_char(marker.front());
  const bool check_back = is_ident_char(marker.back());
  std::size_t pos = haystack.find(marker);
  while (pos != std::string_view::npos) {
    const bool front_ok = !check_front || pos == 0 || !is_ident_char(haystack[pos - 1]);
    const std::size_t after = pos + marker.size();
    const bool back_ok = !check_back || after >= haystack.size() || !is_ident_char(haystack[after]);
    if (front_ok && back_ok) return true;
    pos = haystack.find(marker, pos + 1);
  }
  return false;
}

std::string strip_comments(std::string_view source, const LanguageSyntax& syntax) {
  std::string out;
  out.reserve(source.size());
  std::size_t i = 0;
  while (i < source.size()) {
    bool consumed = false;
    for (const auto& [open, close] : syntax.block_comments) {
      if (!open.empty() && source.compare(i, open.size(), open) == 0) {
        const std::size_t end = source.find(close, i + open.size());
        i = end == std::string_view::npos ? source.size() : end + close.size();
        out += ' ';
        consumed = true;
        break;
      }
    }
    if (consumed) continue;
    for (const auto& lc : syntax.line_comments) {
      if (!lc.empty() && source.compare(i, lc.size(), lc) == 0) {
        const std::size_t end = source.find('\n', i);
        i = end == std::string_view::npos ? source.size() : end;
        consumed = true;
        break;
      }
    }
    if (consumed) continue;
    out += source[i++];
  }
  return out;
}

bool detect_missing_logic(std::string_view source, const Question& question,
                          const ConceptGraph& graph, const GradeReport& report) {
  bool any_markers = false;
  const std::string stripped = strip_comments(source, graph.syntax(question.language));
  bool found = false;
  for (const auto& tag : question.concept_tags) {
    const auto& markers = graph.markers(tag, question.language);
    if (markers.empty()) continue;
    any_markers = true;
    for (const auto& m : markers) {
      if (contains_token(stripped, m)) found = true;
    }
  }
  if (report.all_correct || !any_markers) return false;
  return !found;
}

nlohmann::json render_feedback(const GradeReport& report) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : report.per_case) {
    nlohmann::json block;
    block["verdict"] = to_string(c.verdict);
    if (c.verdict == Verdict::Incorrect) {
      block["input"] = c.input_shown;
      block["expected"] = c.expected_shown;
      block["actual"] = c.actual_shown ? nlohmann::json(*c.actual_shown) : nlohmann::json(nullptr);
    }
    cases.push_back(std::move(block));
  }
  return {{"cases", std::move(cases)}, {"all_correct", report.all_correct}};
}

GradeReport report_from_feedback(const nlohmann::json& doc) {
  GradeReport report;
  report.all_correct = doc.at("all_correct").get<bool>();
  for (const auto& block : doc.at("cases")) {
    CaseResult c;
    c.verdict = block.at("verdict").get<std::string>() == "Correct" ? Verdict::Correct
                                                                    : Verdict::Incorrect;
    if (block.contains("input")) c.input_shown = block["input"].get<std::vector<std::string>>();
    if (block.contains("expected")) {
      c.expected_shown = block["expected"].get<std::vector<std::string>>();
    }
    if (block.contains("actual") && !block["actual"].is_null()) {
      c.actual_shown = block["actual"].get<std::vector<std::string>>();
    }
    report.per_case.push_back(std::move(c));
  }
  return report;
}

}  // namespace practice
