#include "practice/error.hpp"

namespace practice {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
      return "parse_error";
    case ErrorCode::CycleError:
      return "cycle_error";
    case ErrorCode::DanglingParent:
      return "dangling_parent";
    case ErrorCode::DuplicateId:
      return "duplicate_id";
    case ErrorCode::UnknownConcept:
      return "unknown_concept";
    case ErrorCode::UnknownQuestion:
      return "unknown_question";
    case ErrorCode::UnknownLearner:
      return "unknown_learner";
    case ErrorCode::PoolExhausted:
      return "pool_exhausted";
    case ErrorCode::StateMismatch:
      return "state_mismatch";
    case ErrorCode::ExecutorFailure:
      return "executor_failure";
    case ErrorCode::MissingTranscript:
      return "missing_transcript";
    case ErrorCode::NotAssigned:
      return "not_assigned";
    case ErrorCode::NoPretestPending:
      return "no_pretest_pending";
    case ErrorCode::PretestRequired:
      return "pretest_required";
    case ErrorCode::ConceptNotSelected:
      return "concept_not_selected";
    case ErrorCode::ConceptNotComplete:
      return "concept_not_complete";
    case ErrorCode::QuestionnaireRequired:
      return "questionnaire_required";
    case ErrorCode::CorruptLog:
      return "corrupt_log";
    case ErrorCode::NonTerminating:
      return "non_terminating";
    case ErrorCode::InvalidArgument:
      return "invalid_argument";
  }
  return "unknown";
}

}  // namespace practice
