// practice: administrative CLI for the adaptive practice engine.
#include "practice/analytics.hpp"
#include "practice/bank.hpp"
#include "practice/error.hpp"
#include "practice/events.hpp"
#include "practice/ontology.hpp"
#include "practice/service.hpp"
#include "practice/simulator.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace practice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

const char* severity_name(ValidationFinding::Severity s) {
  return s == ValidationFinding::Severity::Error ? "error" : "warning";
}

int cmd_validate(const std::string& ontology_path, const std::string& bank_path, bool strict) {
  ConceptGraph graph;
  QuestionBank bank;
  try {
    graph = load_ontology_file(ontology_path);
    bank = load_bank_file(bank_path);
  } catch (const Error& e) {
    std::cout << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitFindings;
  }
  const ValidationReport report = validate_bank(graph, bank);
  std::size_t errors = 0;
  for (const auto& f : report.findings) {
    if (f.severity == ValidationFinding::Severity::Error) ++errors;
    std::cout << severity_name(f.severity) << ": " << f.message << "\n";
  }
  std::cout << bank.size() << " questions, " << errors << " errors, " << report.findings.size() - errors
            << " warnings\n";
  if (errors > 0 || (strict && !report.empty())) return kExitFindings;
  return kExitOk;
}

std::vector<ConceptId> concepts_with_questions(const ConceptGraph& graph, const QuestionBank& bank,
                                               const std::string& language) {
  std::vector<ConceptId> out;
  for (const auto& id : graph.concepts_for_language(language)) {
    bool full = true;
    for (Level l : kAllLevels) full = full && !bank.level_pool(id, language, l).empty();
    if (full) out.push_back(id);
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive programming practice: validation, simulation, analytics and service."};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "Check an ontology and question bank");
  std::string v_ontology, v_bank;
  bool v_strict = false;
  validate->add_option("ontology", v_ontology, "Ontology JSON")->required();
  validate->add_option("bank", v_bank, "Question bank JSON")->required();
  validate->add_flag("--strict", v_strict, "Treat warnings as findings");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a simulated cohort and print its trace as JSON Lines");
  double s_k = 0.0;
  std::vector<std::string> s_policies{"always-correct"};
  std::uint64_t s_seed = 0;
  int s_learners = 1;
  std::string s_ontology = "data/ontology.json", s_bank = "data/bank.json", s_mode = "adaptive";
  std::string s_group = "sim", s_log, s_trace;
  std::vector<std::string> s_concepts;
  double s_skip = 0.0, s_missing = 0.0;
  auto* k_opt = simulate->add_option("--k", s_k, "Fixed learning rate (default: pool-size rule)");
  k_opt->check(CLI::PositiveNumber);
  simulate->add_option("--policy", s_policies,
                       "always-correct | always-incorrect | bernoulli:<p> | logistic:<ability>; repeat to mix");
  simulate->add_option("--seed", s_seed, "RNG seed");
  simulate->add_option("--learners", s_learners, "Number of learners")->check(CLI::NonNegativeNumber);
  simulate->add_option("--ontology", s_ontology, "Ontology JSON");
  simulate->add_option("--bank", s_bank, "Question bank JSON");
  simulate->add_option("--mode", s_mode, "adaptive | random")->check(CLI::IsMember({"adaptive", "random"}));
  simulate->add_option("--concept", s_concepts, "Concepts to practise (default: every concept with all levels)");
  simulate->add_option("--group", s_group, "Cohort label");
  simulate->add_option("--skip", s_skip, "Skip probability")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--missing-logic", s_missing, "Chance a failing submission lacks the concept syntax")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--log", s_log, "Write the event log here");
  simulate->add_option("--trace", s_trace, "Write the trace here instead of stdout");

  // steps-to-threshold
  auto* steps = app.add_subcommand("steps-to-threshold", "Correct answers needed to promote from skill 0");
  double t_k = 0.0, t_threshold = rating::kMasteryThreshold;
  steps->add_option("--k", t_k, "Learning rate")->required();
  steps->add_option("--threshold", t_threshold, "Promotion threshold");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Per-learner behaviour features from an event log");
  std::string a_log, a_csv, a_group;
  analyze->add_option("log", a_log, "Event log (JSON Lines)")->required();
  analyze->add_option("--csv", a_csv, "Output CSV")->required();
  analyze->add_option("--group", a_group, "Group label for learners without one");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int p_port = 8080;
  std::string p_host = "127.0.0.1", p_data_dir, p_mode = "adaptive", p_ontology = "data/ontology.json",
              p_bank = "data/bank.json", p_exec;
  std::uint64_t p_seed = 0;
  std::vector<std::string> p_group_modes;
  std::size_t p_snapshot_every = 200;
  serve->add_option("--port", p_port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", p_host, "Bind address");
  serve->add_option("--data-dir", p_data_dir, "Directory for the event log and snapshots")->envname("DATA_DIR");
  serve->add_option("--mode", p_mode, "Default assignment mode")->check(CLI::IsMember({"adaptive", "random"}));
  serve->add_option("--seed", p_seed, "Seed for random-mode draws");
  serve->add_option("--group-mode", p_group_modes, "Per-group mode override, e.g. control=random");
  serve->add_option("--ontology", p_ontology, "Ontology JSON");
  serve->add_option("--bank", p_bank, "Question bank JSON");
  serve->add_option("--exec", p_exec, "Command to run submissions, e.g. 'python3 {source}'");
  serve->add_option("--snapshot-every", p_snapshot_every, "Events between snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(v_ontology, v_bank, v_strict);

    if (*steps) {
      std::cout << sim::steps_to_threshold(rating::LearningRate{t_k}, t_threshold) << "\n";
      return kExitOk;
    }

    if (*analyze) {
      const auto log = read_jsonl_file(a_log);
      auto rows = per_learner_features(log, a_group);
      rows.push_back({"all", "all", compute_features(log)});
      write_file(a_csv, features_csv(rows));
      return kExitOk;
    }

    if (*simulate) {
      const ConceptGraph graph = load_ontology_file(s_ontology);
      const QuestionBank bank = load_bank_file(s_bank);
      sim::CohortConfig cfg;
      cfg.n_learners = s_learners;
      cfg.seed = s_seed;
      cfg.group = s_group;
      cfg.mode = s_mode == "random" ? AssignmentMode::random(s_seed) : AssignmentMode::adaptive();
      cfg.policy_mix.clear();
      for (const auto& p : s_policies) cfg.policy_mix.push_back(sim::parse_policy(p));
      cfg.concepts = s_concepts.empty() ? concepts_with_questions(graph, bank, cfg.language) : s_concepts;
      cfg.skip_probability = s_skip;
      cfg.missing_logic_probability = s_missing;
      EngineConfig ecfg;
      if (*k_opt) ecfg.fixed_k = s_k;
      const auto log = sim::run_cohort(graph, bank, cfg, ecfg);
      const std::string trace = sim::trace_to_jsonl(sim::trace_from_log(log));
      if (!s_log.empty()) write_file(s_log, to_jsonl(log));
      if (s_trace.empty()) {
        std::cout << trace;
      } else {
        write_file(s_trace, trace);
      }
      std::cerr << log.size() << " events\n";
      return kExitOk;
    }

    if (*serve) {
      ServiceConfig cfg;
      cfg.data_dir = p_data_dir;
      cfg.default_mode = p_mode == "random" ? AssignmentMode::random(p_seed) : AssignmentMode::adaptive();
      cfg.default_mode.seed = p_seed;
      cfg.snapshot_every = p_snapshot_every;
      for (const auto& gm : p_group_modes) {
        const auto eq = gm.find('=');
        if (eq == std::string::npos) {
          std::cerr << "--group-mode expects group=mode\n";
          return kExitUsage;
        }
        cfg.group_modes[gm.substr(0, eq)] = mode_from_string(gm.substr(eq + 1));
      }
      if (!p_exec.empty()) cfg.exec_command = p_exec;

      ConceptGraph graph = load_ontology_file(p_ontology);
      QuestionBank bank = load_bank_file(p_bank);
      const ValidationReport report = validate_bank(graph, bank);
      for (const auto& f : report.findings) std::cerr << severity_name(f.severity) << ": " << f.message << "\n";
      if (report.has_errors()) {
        std::cerr << "refusing to start: the question bank has errors\n";
        return kExitFindings;
      }
      Service service(std::move(graph), std::move(bank), cfg);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << p_host << ":" << p_port << "\n";
      const bool ok = service.listen(p_host, p_port);
      g_service = nullptr;
      if (!ok) {
        std::cerr << "could not bind " << p_host << ":" << p_port << "\n";
        return kExitFindings;
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFindings;
  }
  return kExitUsage;
}
