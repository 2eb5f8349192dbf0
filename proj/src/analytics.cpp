#include "practice/analytics.hpp"

#include "practice/error.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace practice {

double SixFeatures::successful_concept_rate() const {
  return concepts_selected == 0 ? 0.0 : 100.0 * static_cast<double>(successful_concepts) / static_cast<double>(concepts_selected);
}

double SixFeatures::unsuccessful_concept_rate() const {
  return concepts_selected == 0 ? 0.0 : 100.0 * static_cast<double>(unsuccessful_concepts) / static_cast<double>(concepts_selected);
}

namespace {

std::string concept_of(const LogEvent& e) {
  auto it = e.payload.find("concept");
  if (it == e.payload.end() || !it->is_string()) {
    throw Error(ErrorCode::CorruptLog, "event " + std::to_string(e.seq) + " lacks a concept");
  }
  return it->get<std::string>();
}

double percent(long part, long whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

SixFeatures compute_features(const std::vector<LogEvent>& log, const std::optional<std::string>& learner) {
  SixFeatures f;
  std::set<std::pair<std::string, std::string>> selected;
  std::set<std::pair<std::string, std::string>> completed;
  for (const auto& e : log) {
    if (learner && e.learner_id != *learner) continue;
    switch (e.kind) {
      case EventKind::Submitted: {
        auto ac = e.payload.find("all_correct");
        if (ac == e.payload.end() || !ac->is_boolean()) {
          throw Error(ErrorCode::CorruptLog, "submitted event " + std::to_string(e.seq) + " lacks all_correct");
        }
        ++f.submissions;
        if (ac->get<bool>()) {
          ++f.correct_submissions;
        } else if (e.payload.value("missing_logic", false)) {
          ++f.missing_logic_submissions;
        } else {
          ++f.incorrect_submissions;
        }
        break;
      }
      case EventKind::Skipped:
        ++f.skip_count;
        break;
      case EventKind::ConceptSelected:
        selected.emplace(e.learner_id, concept_of(e));
        break;
      case EventKind::ConceptCompleted:
        completed.emplace(e.learner_id, concept_of(e));
        break;
      default:
        break;
    }
  }
  f.correct_submission_rate = percent(f.correct_submissions, f.submissions);
  f.incorrect_submission_rate = percent(f.incorrect_submissions, f.submissions);
  f.missing_logic_rate = percent(f.missing_logic_submissions, f.submissions);
  f.successful_concepts = static_cast<long>(completed.size());
  f.concepts_selected = static_cast<long>(selected.size());
  for (const auto& key : selected) {
    if (completed.count(key) == 0) ++f.unsuccessful_concepts;
  }
  return f;
}

std::vector<LearnerFeatures> per_learner_features(const std::vector<LogEvent>& log,
                                                  const std::string& default_group) {
  std::map<std::string, std::string> groups;
  for (const auto& e : log) {
    auto& g = groups.try_emplace(e.learner_id, default_group).first->second;
    if (e.kind == EventKind::QuestionnaireAnswered) {
      const auto label = e.payload.value("group", std::string{});
      if (!label.empty()) g = label;
    }
  }
  std::vector<LearnerFeatures> rows;
  for (const auto& [learner, group] : groups) {
    rows.push_back({learner, group, compute_features(log, learner)});
  }
  return rows;
}

const std::vector<std::string>& feature_columns() {
  static const std::vector<std::string> kColumns{
      "correct_submission_rate", "incorrect_submission_rate", "missing_logic_rate",
      "skip_count",              "successful_concepts",       "unsuccessful_concepts",
      "submissions",             "concepts_selected",         "successful_concept_rate",
      "unsuccessful_concept_rate"};
  return kColumns;
}

namespace {

std::vector<double> feature_values(const SixFeatures& f) {
  return {f.correct_submission_rate,
          f.incorrect_submission_rate,
          f.missing_logic_rate,
          static_cast<double>(f.skip_count),
          static_cast<double>(f.successful_concepts),
          static_cast<double>(f.unsuccessful_concepts),
          static_cast<double>(f.submissions),
          static_cast<double>(f.concepts_selected),
          f.successful_concept_rate(),
          f.unsuccessful_concept_rate()};
}

}  // namespace

std::string features_csv(const std::vector<LearnerFeatures>& rows) {
  std::string out = "learner,group";
  for (const auto& c : feature_columns()) out += "," + c;
  out += "\n";
  for (const auto& row : rows) {
    const SixFeatures& f = row.features;
    out += row.learner_id + "," + row.group + "," + fmt(f.correct_submission_rate) + "," +
           fmt(f.incorrect_submission_rate) + "," + fmt(f.missing_logic_rate) + "," +
           std::to_string(f.skip_count) + "," + std::to_string(f.successful_concepts) + "," +
           std::to_string(f.unsuccessful_concepts) + "," + std::to_string(f.submissions) + "," +
           std::to_string(f.concepts_selected) + "," + fmt(f.successful_concept_rate()) + "," +
           fmt(f.unsuccessful_concept_rate()) + "\n";
  }
  return out;
}

std::vector<GroupSummary> summarize_groups(const std::map<std::string, std::vector<LogEvent>>& logs) {
  std::vector<GroupSummary> out;
  const auto& columns = feature_columns();
  for (const auto& [group, log] : logs) {
    const auto rows = per_learner_features(log, group);
    GroupSummary s;
    s.group = group;
    s.learners = static_cast<long>(rows.size());
    std::vector<std::vector<double>> values(columns.size());
    for (const auto& r : rows) {
      s.submissions += r.features.submissions;
      const auto v = feature_values(r.features);
      for (std::size_t i = 0; i < columns.size(); ++i) values[i].push_back(v[i]);
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
      FeatureStats st;
      const auto& xs = values[i];
      if (!xs.empty()) {
        double sum = 0.0;
        for (double x : xs) sum += x;
        st.mean = sum / static_cast<double>(xs.size());
        if (xs.size() > 1) {
          double ss = 0.0;
          for (double x : xs) ss += (x - st.mean) * (x - st.mean);
          st.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        }
      }
      s.stats[columns[i]] = st;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string summary_csv(const std::vector<GroupSummary>& summaries) {
  std::string out = "group,learners,submissions";
  for (const auto& c : feature_columns()) out += "," + c + "_mean," + c + "_sd";
  out += "\n";
  for (const auto& s : summaries) {
    out += s.group + "," + std::to_string(s.learners) + "," + std::to_string(s.submissions);
    for (const auto& c : feature_columns()) {
      const auto& st = s.stats.at(c);
      out += "," + fmt(st.mean) + "," + fmt(st.sd);
    }
    out += "\n";
  }
  return out;
}

}  // namespace practice
