#pragma once

#include "practice/bank.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace practice {

struct Concept {
  ConceptId id;
  std::string display_name;
  std::optional<ConceptId> parent;
  std::set<std::string> languages;
  // language -> syntax markers searched for by missing-logic detection.
  std::map<std::string, std::vector<std::string>> markers;
};

/// Comment syntax of a programming language, used when stripping comments
/// before marker search.
struct LanguageSyntax {
  std::string name;
  std::vector<std::string> line_comments;
  std::vector<std::pair<std::string, std::string>> block_comments;
};

enum class ConceptStatus { NotStarted, InProgress, Complete };

std::string to_string(ConceptStatus status);

/// Immutable, validated concept tree. Every concept has at most one parent;
/// parent chains end at a root.
class ConceptGraph {
 public:
  ConceptGraph() = default;

  const std::map<ConceptId, Concept>& concepts() const noexcept { return concepts_; }
  const std::vector<ConceptId>& roots() const noexcept { return roots_; }

  const Concept* find(std::string_view id) const;
  const Concept& at(std::string_view id) const;  // throws UnknownConcept
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::vector<ConceptId> children(std::string_view id) const;
  std::vector<ConceptId> concepts_for_language(std::string_view language) const;
  const std::vector<std::string>& markers(std::string_view id, std::string_view language) const;

  // Built-in defaults apply for well-known languages when the document has none.
  LanguageSyntax syntax(std::string_view language) const;

 private:
  friend ConceptGraph load_ontology(const nlohmann::json& doc);

  std::map<ConceptId, Concept> concepts_;
  std::vector<ConceptId> roots_;
  std::map<std::string, LanguageSyntax> languages_;
};

ConceptGraph load_ontology(const nlohmann::json& doc);
ConceptGraph load_ontology_file(const std::string& path);

struct HintItem {
  ConceptId concept_id;
  std::optional<ConceptId> parent_id;
  bool emphasized = false;
};

std::vector<HintItem> hint_list(const Question& question, const ConceptGraph& graph,
                                std::string_view selected_concept);

struct FrequencyRow {
  ConceptId concept_id;
  int frequency = 0;

  friend bool operator==(const FrequencyRow&, const FrequencyRow&) = default;
};

struct FrequencyTable {
  ConceptId anchor;
  std::vector<FrequencyRow> rows;  // ascending by concept id

  int frequency_of(std::string_view concept_id) const;
};

FrequencyTable cooccurrence_table(const std::vector<Question>& bank, std::string_view anchor);

/// Next-concept candidates: partners tagged together with `anchor` in a
/// two-tag question, co-occurring more than once, and not yet complete.
/// Ordered by frequency descending, then id ascending.
std::vector<ConceptId> suggest_next(const std::vector<Question>& bank, const ConceptGraph& graph,
                                    std::string_view anchor,
                                    const std::map<ConceptId, ConceptStatus>& progress);

struct ValidationFinding {
  enum class Severity { Warning, Error };
  enum class Kind { UnknownConcept, NearDuplicateTag, UnderMinimumLevel, EmptyLevel, LanguageMismatch };

  Severity severity = Severity::Warning;
  Kind kind = Kind::UnknownConcept;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;

  bool empty() const noexcept { return findings.empty(); }
  bool has_errors() const;
  std::size_t count(ValidationFinding::Kind kind) const;
};

inline constexpr int kMinQuestionsPerLevel = 4;

ValidationReport validate_bank(const ConceptGraph& graph, const QuestionBank& bank);

}  // namespace practice
