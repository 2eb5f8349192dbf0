#pragma once

#include "practice/grading.hpp"

#include <chrono>
#include <string>

namespace practice {

/// Runs a configured shell command per test case. The template's `{source}`
/// placeholder is replaced by the path of a temporary file holding the
/// submission. Test-case stdin is written to the child's stdin; stdout is
/// captured. Nonzero exit or timeout yields a failed result.
///
/// Not a sandbox: the command runs with the service's privileges.
class CommandExecutor : public Executor {
 public:
  explicit CommandExecutor(std::string command_template,
                           std::chrono::milliseconds timeout = std::chrono::seconds(5),
                           std::string source_suffix = ".txt");

  ExecutionResult run(std::string_view source, const std::vector<std::string>& stdin_lines) override;

 private:
  std::string command_template_;
  std::chrono::milliseconds timeout_;
  std::string source_suffix_;
};

}  // namespace practice
