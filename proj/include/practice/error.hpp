#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace practice {

enum class ErrorCode {
  ParseError,
  CycleError,
  DanglingParent,
  DuplicateId,
  UnknownConcept,
  UnknownQuestion,
  UnknownLearner,
  PoolExhausted,
  StateMismatch,
  ExecutorFailure,
  MissingTranscript,
  NotAssigned,
  NoPretestPending,
  PretestRequired,
  ConceptNotSelected,
  ConceptNotComplete,
  QuestionnaireRequired,
  CorruptLog,
  NonTerminating,
  InvalidArgument,
};

// Stable snake_case identifier used on the wire and in logs.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace practice
