#include "practice/ontology.hpp"

#include "practice/error.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <tuple>

namespace practice {

std::string to_string(ConceptStatus status) {
  switch (status) {
    case ConceptStatus::NotStarted:
      return "not_started";
    case ConceptStatus::InProgress:
      return "in_progress";
    case ConceptStatus::Complete:
      return "complete";
  }
  return "not_started";
}

const Concept* ConceptGraph::find(std::string_view id) const {
  auto it = concepts_.find(ConceptId(id));
  return it == concepts_.end() ? nullptr : &it->second;
}

const Concept& ConceptGraph::at(std::string_view id) const {
  const Concept* c = find(id);
  if (c == nullptr) {
    throw Error(ErrorCode::UnknownConcept, "unknown concept '" + std::string(id) + "'");
  }
  return *c;
}

std::vector<ConceptId> ConceptGraph::children(std::string_view id) const {
  std::vector<ConceptId> out;
  for (const auto& [cid, c] : concepts_) {
    if (c.parent && *c.parent == id) out.push_back(cid);
  }
  return out;
}

std::vector<ConceptId> ConceptGraph::concepts_for_language(std::string_view language) const {
  std::vector<ConceptId> out;
  for (const auto& [cid, c] : concepts_) {
    if (c.languages.count(std::string(language)) != 0) out.push_back(cid);
  }
  return out;
}

const std::vector<std::string>& ConceptGraph::markers(std::string_view id,
                                                      std::string_view language) const {
  static const std::vector<std::string> kNone;
  const Concept& c = at(id);
  auto it = c.markers.find(std::string(language));
  return it == c.markers.end() ? kNone : it->second;
}

LanguageSyntax ConceptGraph::syntax(std::string_view language) const {
  if (auto it = languages_.find(std::string(language)); it != languages_.end()) {
    return it->second;
  }
  LanguageSyntax s;
  s.name = std::string(language);
  if (language == "python" || language == "ruby" || language == "r" || language == "shell") {
    s.line_comments = {"#"};
  } else if (language == "c" || language == "cpp" || language == "java" ||
             language == "javascript" || language == "typescript" || language == "go" ||
             language == "rust" || language == "csharp" || language == "kotlin") {
    s.line_comments = {"//"};
    s.block_comments = {{"/*", "*/"}};
  }
  return s;
}

namespace {

const std::regex& id_pattern() {
  static const std::regex re("^[a-z0-9_-]+$");
  return re;
}

}  // namespace

ConceptGraph load_ontology(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("concepts") || !doc["concepts"].is_array()) {
    throw Error(ErrorCode::ParseError, "ontology document needs a \"concepts\" array");
  }
  ConceptGraph graph;
  std::vector<ConceptId> order;
  try {
    for (const auto& j : doc["concepts"]) {
      Concept c;
      c.id = j.at("id").get<std::string>();
      if (!std::regex_match(c.id, id_pattern())) {
        throw Error(ErrorCode::ParseError, "invalid concept id '" + c.id + "'");
      }
      c.display_name = j.value("display_name", c.id);
      if (j.contains("parent") && !j["parent"].is_null()) {
        c.parent = j["parent"].get<std::string>();
      }
      for (const auto& lang : j.at("languages")) c.languages.insert(lang.get<std::string>());
      if (j.contains("markers")) {
        for (const auto& [lang, list] : j["markers"].items()) {
          c.markers[lang] = list.get<std::vector<std::string>>();
        }
      }
      order.push_back(c.id);
      if (!graph.concepts_.emplace(c.id, c).second) {
        throw Error(ErrorCode::DuplicateId, "duplicate concept id '" + c.id + "'");
      }
    }
    if (doc.contains("languages")) {
      for (const auto& j : doc["languages"]) {
        LanguageSyntax s;
        s.name = j.at("name").get<std::string>();
        if (j.contains("line_comment")) {
          const auto& lc = j["line_comment"];
          if (lc.is_array()) {
            s.line_comments = lc.get<std::vector<std::string>>();
          } else {
            s.line_comments = {lc.get<std::string>()};
          }
        }
        if (j.contains("block_comment")) {
          const auto& bc = j["block_comment"];
          if (bc.size() != 2) {
            throw Error(ErrorCode::ParseError, "block_comment must be [open, close]");
          }
          s.block_comments.emplace_back(bc[0].get<std::string>(), bc[1].get<std::string>());
        }
        graph.languages_[s.name] = std::move(s);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed ontology: ") + e.what());
  }

  for (const auto& [id, c] : graph.concepts_) {
    if (c.parent && graph.concepts_.count(*c.parent) == 0) {
      throw Error(ErrorCode::DanglingParent,
                  "concept '" + id + "' has unknown parent '" + *c.parent + "'");
    }
  }
  // A chain longer than the concept count must revisit a node.
  const std::size_t n = graph.concepts_.size();
  for (const auto& [id, c] : graph.concepts_) {
    const Concept* cur = &c;
    std::size_t steps = 0;
    while (cur->parent) {
      if (++steps > n) {
        throw Error(ErrorCode::CycleError, "parent cycle through concept '" + id + "'");
      }
      cur = &graph.concepts_.at(*cur->parent);
    }
  }
  for (const auto& id : order) {
    if (!graph.concepts_.at(id).parent) graph.roots_.push_back(id);
  }
  return graph;
}

ConceptGraph load_ontology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return load_ontology(doc);
}

std::vector<HintItem> hint_list(const Question& question, const ConceptGraph& graph,
                                std::string_view selected_concept) {
  std::vector<HintItem> out;
  out.reserve(question.concept_tags.size());
  for (const auto& tag : question.concept_tags) {
    const Concept& c = graph.at(tag);
    out.push_back(HintItem{c.id, c.parent, c.id == selected_concept});
  }
  return out;
}

int FrequencyTable::frequency_of(std::string_view concept_id) const {
  for (const auto& row : rows) {
    if (row.concept_id == concept_id) return row.frequency;
  }
  return 0;
}

FrequencyTable cooccurrence_table(const std::vector<Question>& bank, std::string_view anchor) {
  std::map<ConceptId, int> counts;
  for (const auto& q : bank) {
    if (!q.has_tag(anchor)) continue;
    // A tag repeated within one question still counts that question once.
    std::set<ConceptId> seen(q.concept_tags.begin(), q.concept_tags.end());
    for (const auto& tag : seen) {
      if (tag != anchor) ++counts[tag];
    }
  }
  FrequencyTable table;
  table.anchor = std::string(anchor);
  for (const auto& [id, n] : counts) table.rows.push_back({id, n});
  return table;
}

std::vector<ConceptId> suggest_next(const std::vector<Question>& bank, const ConceptGraph& graph,
                                    std::string_view anchor,
                                    const std::map<ConceptId, ConceptStatus>& progress) {
  graph.at(anchor);
  const FrequencyTable table = cooccurrence_table(bank, anchor);

  std::set<ConceptId> partners;
  for (const auto& q : bank) {
    std::set<ConceptId> tags(q.concept_tags.begin(), q.concept_tags.end());
    if (tags.size() == 2 && tags.count(std::string(anchor)) != 0) {
      for (const auto& t : tags) {
        if (t != anchor) partners.insert(t);
      }
    }
  }

  std::vector<std::pair<int, ConceptId>> ranked;
  for (const auto& partner : partners) {
    const int freq = table.frequency_of(partner);
    if (freq <= 1) continue;
    auto it = progress.find(partner);
    const ConceptStatus status = it == progress.end() ? ConceptStatus::NotStarted : it->second;
    if (status == ConceptStatus::Complete) continue;
    ranked.emplace_back(freq, partner);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::tie(b.first, a.second) < std::tie(a.first, b.second);
  });
  std::vector<ConceptId> out;
  for (auto& [freq, id] : ranked) out.push_back(std::move(id));
  return out;
}

bool ValidationReport::has_errors() const {
  return std::any_of(findings.begin(), findings.end(), [](const ValidationFinding& f) {
    return f.severity == ValidationFinding::Severity::Error;
  });
}

std::size_t ValidationReport::count(ValidationFinding::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [kind](const ValidationFinding& f) { return f.kind == kind; }));
}

namespace {

bool within_one_edit(const std::string& a, const std::string& b) {
  if (a == b) return false;
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  if (la > lb + 1 || lb > la + 1) return false;
  if (la == lb) {
    int diffs = 0;
    for (std::size_t i = 0; i < la; ++i) diffs += a[i] != b[i];
    return diffs == 1;
  }
  const std::string& shorter = la < lb ? a : b;
  const std::string& longer = la < lb ? b : a;
  std::size_t i = 0;
  while (i < shorter.size() && shorter[i] == longer[i]) ++i;
  return shorter.compare(i, std::string::npos, longer, i + 1, std::string::npos) == 0;
}

}  // namespace

ValidationReport validate_bank(const ConceptGraph& graph, const QuestionBank& bank) {
  using Kind = ValidationFinding::Kind;
  using Severity = ValidationFinding::Severity;
  ValidationReport report;

  std::set<ConceptId> tags;
  std::set<std::pair<std::string, ConceptId>> used;  // (language, concept)
  for (const auto& q : bank.questions()) {
    for (const auto& tag : q.concept_tags) {
      tags.insert(tag);
      const Concept* c = graph.find(tag);
      if (c == nullptr) {
        report.findings.push_back({Severity::Error, Kind::UnknownConcept,
                                   "question " + std::to_string(q.id) + ": unknown concept '" +
                                       tag + "'"});
        continue;
      }
      if (c->languages.count(q.language) == 0) {
        report.findings.push_back({Severity::Warning, Kind::LanguageMismatch,
                                   "question " + std::to_string(q.id) + ": concept '" + tag +
                                       "' is not declared for language '" + q.language + "'"});
      }
      if (!q.pretest) used.emplace(q.language, tag);
    }
  }

  for (auto a = tags.begin(); a != tags.end(); ++a) {
    for (auto b = std::next(a); b != tags.end(); ++b) {
      if (within_one_edit(*a, *b)) {
        report.findings.push_back({Severity::Warning, Kind::NearDuplicateTag,
                                   "tags '" + *a + "' and '" + *b + "' differ by one edit"});
      }
    }
  }

  for (const auto& [language, concept_id] : used) {
    for (Level level : kAllLevels) {
      const auto n = bank.level_pool(concept_id, language, level).size();
      if (n == 0) {
        report.findings.push_back({Severity::Warning, Kind::EmptyLevel,
                                   language + "/" + concept_id + "/" + to_string(level) +
                                       ": no questions"});
      } else if (n < static_cast<std::size_t>(kMinQuestionsPerLevel)) {
        report.findings.push_back({Severity::Warning, Kind::UnderMinimumLevel,
                                   language + "/" + concept_id + "/" + to_string(level) + ": " +
                                       std::to_string(n) + " question(s), at least " +
                                       std::to_string(kMinQuestionsPerLevel) + " recommended"});
      }
    }
  }
  return report;
}

}  // namespace practice
