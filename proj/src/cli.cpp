#include "apiknow/cli.hpp"

#include "apiknow/doc_miner.hpp"
#include "apiknow/emitter.hpp"
#include "apiknow/error.hpp"
#include "apiknow/test_synth.hpp"
#include "apiknow/usage_miner.hpp"
#include "apiknow/util.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <ostream>

namespace apiknow {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// check summaries

CheckSummary summarize_suite(const TestSuite& suite, const KnowledgeBase& kb, const PatternIndex& patterns,
                             std::string label) {
  CheckSummary s;
  s.label = label.empty() ? (suite.label.empty() ? std::string(to_string(suite.backend)) : suite.label) : label;
  s.target = suite.target;
  s.backend = to_string(suite.backend);
  s.seed = suite.seed;
  s.tests = suite.tests.size();
  for (const auto& test : suite.tests) {
    s.test_ids.push_back(test.id);
    auto verdict = check_test(test, kb);
    (verdict.valid ? s.valid : s.invalid)++;
    s.violations.insert(s.violations.end(), verdict.violations.begin(), verdict.violations.end());
    for (const auto& w : verdict.warnings) log().warn("{}: {}", test.id, w);
  }
  s.proxy = model_coverage(suite, suite.target, kb, patterns).score;
  return s;
}

json check_to_json(const CheckSummary& s) {
  json violations = json::array();
  for (const auto& v : s.violations) violations.push_back(violation_to_json(v));
  return json{{"format", "apiknow-check/1"},
              {"label", s.label},
              {"target", s.target},
              {"backend", s.backend},
              {"seed", s.seed},
              {"tests", s.tests},
              {"valid", s.valid},
              {"invalid", s.invalid},
              {"invalid_rate", s.invalid_rate()},
              {"proxy", s.proxy},
              {"test_ids", s.test_ids},
              {"violations", std::move(violations)}};
}

CheckSummary check_from_json(const json& j) {
  CheckSummary s;
  try {
    s.label = j.at("label").get<std::string>();
    s.target = j.value("target", std::string());
    s.backend = j.value("backend", std::string());
    s.seed = j.value("seed", std::uint64_t{0});
    s.tests = j.at("tests").get<std::size_t>();
    s.valid = j.at("valid").get<std::size_t>();
    s.invalid = j.at("invalid").get<std::size_t>();
    s.proxy = j.value("proxy", 0.0);
    s.test_ids = j.value("test_ids", std::vector<std::string>{});
    for (const auto& v : j.value("violations", json::array())) s.violations.push_back(violation_from_json(v));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed check results: ") + e.what());
  }
  if (s.valid + s.invalid != s.tests) throw Error(ErrorKind::invariant, "check results for " + s.label + " do not add up");
  return s;
}

std::string render_report(const std::vector<CheckSummary>& checks, const CoverageFeedback* feedback) {
  std::string out = fmt::format("{:<16} {:>6} {:>6} {:>8} {:>9} {:>7}", "configuration", "#test", "valid", "invalid",
                                "invalid%", "proxy");
  if (feedback) out += fmt::format(" {:>9} {:>12}", "coverage", "improvement");
  out += "\n";
  std::optional<double> baseline;
  for (const auto& c : checks) {
    out += fmt::format("{:<16} {:>6} {:>6} {:>8} {:>9.1f} {:>7.4f}", c.label, c.tests, c.valid, c.invalid,
                       100.0 * c.invalid_rate(), c.proxy);
    if (feedback) {
      double coverage = feedback->coverage_of(c.test_ids);
      out += fmt::format(" {:>8.1f}%", 100.0 * coverage);
      if (!baseline) {
        baseline = coverage;
        out += fmt::format(" {:>12}", "baseline");
      } else if (*baseline > 0) {
        out += fmt::format(" {:>+11.1f}%", 100.0 * (coverage - *baseline) / *baseline);
      } else {
        out += fmt::format(" {:>12}", "n/a");
      }
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommands

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return exit_usage;
    case ErrorKind::io:
    case ErrorKind::persistence: return exit_missing_input;
    case ErrorKind::parse:
    case ErrorKind::invariant:
    case ErrorKind::framework_mismatch:
    case ErrorKind::duplicate_api: return exit_schema;
    case ErrorKind::generation: return exit_failure;
  }
  return exit_failure;
}

struct MineDocsOptions {
  std::string docs, out, framework, version;
};

struct MineUsageOptions {
  std::string transactions, out;
  std::int64_t min_support = 2;
  std::string min_confidence = "0.5";
};

struct GenOptions {
  std::string kb, patterns, target, backend = "random", out, feedback, label;
  double budget_seconds = 300;
  std::uint64_t seed = 0;
  bool blind = false;
  std::size_t max_sequence_length = 12;
  std::size_t population = 20;
  std::size_t max_tests = 100;
  double units_per_second = 1.0;
};

struct CheckOptions {
  std::string kb, suite, out, patterns, label;
};

struct ReportOptions {
  std::vector<std::string> checks;
  std::string feedback, out;
};

PatternIndex load_index(const std::string& path) {
  if (path.empty()) return {};
  return build_pattern_index(load_patterns(path).rules);
}

int mine_docs(const MineDocsOptions& o, std::ostream& out) {
  auto corpus = load_doc_corpus(o.docs);
  auto kb = build_kb(corpus, o.framework, o.version);
  kb_save(kb, o.out);
  std::size_t params = 0, constrained = 0;
  for (const auto& [id, entry] : kb.entries) {
    for (const auto& [name, c] : entry.constraints) {
      ++params;
      constrained += c.value_undefined() ? 0 : 1;
    }
  }
  out << fmt::format("{} APIs, {} parameters, {} with value constraints -> {}\n", kb.entries.size(), params,
                     constrained, o.out);
  return exit_ok;
}

int mine_usage(const MineUsageOptions& o, std::ostream& out) {
  if (o.min_support < 1) throw Error(ErrorKind::usage, "--min-support must be >= 1");
  auto confidence = Fraction::parse(o.min_confidence);
  if (confidence > Fraction{1, 1}) throw Error(ErrorKind::usage, "--min-confidence must be <= 1");
  auto transactions = load_transactions(o.transactions);
  auto itemsets = mine_frequent_itemsets(transactions, o.min_support);
  PatternFile file{o.min_support, confidence, derive_rules(itemsets, confidence, o.min_support)};
  save_patterns(file, o.out);
  out << fmt::format("{} transactions, {} frequent itemsets, {} rules -> {}\n", transactions.size(), itemsets.size(),
                     file.rules.size(), o.out);
  return exit_ok;
}

int gen(const GenOptions& o, std::ostream& out) {
  GenConfig config;
  auto backend = parse_backend(o.backend);
  if (!backend) throw Error(ErrorKind::usage, "--backend must be random or search");
  config.backend = *backend;
  config.budget_seconds = o.budget_seconds;
  config.seed = o.seed;
  config.max_sequence_length = o.max_sequence_length;
  config.population_size = o.population;
  config.max_tests = o.max_tests;
  config.units_per_second = o.units_per_second;
  validate(config);

  auto kb = kb_load(o.kb);
  PatternIndex patterns = load_index(o.patterns);
  std::optional<CoverageFeedback> feedback;
  if (!o.feedback.empty()) feedback = load_feedback(o.feedback);
  if (o.blind) {
    kb = strip_knowledge(kb);
    patterns = {};
  }
  if (target_entries(kb, o.target).empty()) {
    throw Error(ErrorKind::usage, "target " + o.target + " has no API in " + o.kb);
  }
  TestSuite suite;
  if (config.work_units() > 0) {
    suite = config.backend == Backend::random
                ? gen_random_suite(o.target, kb, patterns, config)
                : gen_search_suite(o.target, kb, patterns, config, feedback ? &*feedback : nullptr);
  } else {
    suite.target = o.target;
    suite.backend = config.backend;
    suite.seed = config.seed;
  }
  suite.label = o.label.empty() ? std::string(o.blind ? "blind" : "guided") : o.label;
  auto files = emit_suite(suite, o.out);
  out << fmt::format("{} tests -> {}\n", suite.tests.size(), o.out);
  return exit_ok;
}

int check(const CheckOptions& o, std::ostream& out) {
  auto kb = kb_load(o.kb);
  auto suite = load_suite(o.suite);
  auto summary = summarize_suite(suite, kb, load_index(o.patterns), o.label);
  write_file(o.out, check_to_json(summary).dump(2) + "\n");
  out << fmt::format("{}: {} tests, {} invalid ({:.1f}%), {} violations -> {}\n", summary.label, summary.tests,
                     summary.invalid, 100.0 * summary.invalid_rate(), summary.violations.size(), o.out);
  return exit_ok;
}

int report(const ReportOptions& o, std::ostream& out) {
  std::vector<CheckSummary> checks;
  for (const auto& path : o.checks) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing check results " + path);
    try {
      checks.push_back(check_from_json(json::parse(read_file(path))));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, path + ": " + e.what());
    }
  }
  std::optional<CoverageFeedback> feedback;
  if (!o.feedback.empty()) feedback = load_feedback(o.feedback);
  auto text = render_report(checks, feedback ? &*feedback : nullptr);
  if (!o.out.empty()) write_file(o.out, text);
  out << text;
  return exit_ok;
}

} // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-guided unit test generation for library APIs", "apiknow"};
  app.require_subcommand(1);

  MineDocsOptions md;
  auto* mine_docs_cmd = app.add_subcommand("mine-docs", "Mine API constraints from a documentation corpus");
  mine_docs_cmd->add_option("--docs", md.docs, "Documentation corpus (JSON)")->required();
  mine_docs_cmd->add_option("--out", md.out, "Knowledge base output file")->required();
  mine_docs_cmd->add_option("--framework", md.framework, "Framework name recorded in the knowledge base");
  mine_docs_cmd->add_option("--framework-version", md.version, "Framework version recorded in the knowledge base");

  MineUsageOptions mu;
  auto* mine_usage_cmd = app.add_subcommand("mine-usage", "Mine API usage patterns from transactions");
  mine_usage_cmd->add_option("--transactions", mu.transactions, "Transactions file (TSV)")->required();
  mine_usage_cmd->add_option("--min-support", mu.min_support, "Minimum support count")->capture_default_str();
  mine_usage_cmd->add_option("--min-confidence", mu.min_confidence, "Minimum confidence (decimal or a/b)")
      ->capture_default_str();
  mine_usage_cmd->add_option("--out", mu.out, "Patterns output file")->required();

  GenOptions g;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a test suite for a target module");
  gen_cmd->add_option("--kb", g.kb, "Knowledge base file")->required();
  gen_cmd->add_option("--patterns", g.patterns, "Patterns file");
  gen_cmd->add_option("--target", g.target, "Target module or API id")->required();
  gen_cmd->add_option("--backend", g.backend, "random or search")->capture_default_str();
  gen_cmd->add_option("--budget-seconds", g.budget_seconds, "Generation budget")->capture_default_str();
  gen_cmd->add_option("--seed", g.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", g.out, "Output directory")->required();
  gen_cmd->add_option("--feedback", g.feedback, "Coverage feedback file (search backend)");
  gen_cmd->add_flag("--blind", g.blind, "Ignore mined constraints and patterns (baseline)");
  gen_cmd->add_option("--label", g.label, "Configuration label stored in the manifest");
  gen_cmd->add_option("--max-sequence-length", g.max_sequence_length, "Calls per test")->capture_default_str();
  gen_cmd->add_option("--population", g.population, "Search population size")->capture_default_str();
  gen_cmd->add_option("--max-tests", g.max_tests, "Random backend test cap")->capture_default_str();
  gen_cmd->add_option("--units-per-second", g.units_per_second, "Work units per budget second")
      ->capture_default_str();

  CheckOptions c;
  auto* check_cmd = app.add_subcommand("check", "Check a suite against the knowledge base");
  check_cmd->add_option("--kb", c.kb, "Knowledge base file")->required();
  check_cmd->add_option("--suite", c.suite, "Suite directory")->required();
  check_cmd->add_option("--out", c.out, "Check results output file")->required();
  check_cmd->add_option("--patterns", c.patterns, "Patterns file for the coverage proxy");
  check_cmd->add_option("--label", c.label, "Configuration label");

  ReportOptions r;
  auto* report_cmd = app.add_subcommand("report", "Tabulate check results");
  report_cmd->add_option("--checks", r.checks, "Check results; repeat per configuration, baseline first")
      ->required();
  report_cmd->add_option("--feedback", r.feedback, "Coverage feedback file");
  report_cmd->add_option("--out", r.out, "Also write the report to this file");

  std::vector<const char*> raw;
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  }

  try {
    if (*mine_docs_cmd) return mine_docs(md, out);
    if (*mine_usage_cmd) return mine_usage(mu, out);
    if (*gen_cmd) return gen(g, out);
    if (*check_cmd) return check(c, out);
    if (*report_cmd) return report(r, out);
  } catch (const Error& e) {
    err << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_usage;
}

} // namespace apiknow
