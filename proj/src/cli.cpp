#include "triage/cli.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"

#include "triage/error.hpp"
#include "triage/fact_extraction.hpp"
#include "triage/ingestion.hpp"
#include "triage/planted.hpp"
#include "triage/report.hpp"
#include "triage/rule_dsl.hpp"
#include "triage/service_api.hpp"
#include "triage/session.hpp"
#include "triage/simulation.hpp"

namespace triage::cli {

namespace fs = std::filesystem;
using nlohmann::json;

SourceSpan parse_span(std::string_view text) {
  static const std::regex re(R"(^\s*(\d+):(\d+)-(\d+):(\d+)\s*$)");
  std::cmatch m;
  if (!std::regex_match(text.begin(), text.end(), m, re)) {
    throw InvalidArgument("span must look like L1:C1-L2:C2, got '" + std::string(text) + "'");
  }
  SourceSpan s;
  s.start_line = std::stoi(m[1]);
  s.start_col = std::stoi(m[2]);
  s.end_line = std::stoi(m[3]);
  s.end_col = std::stoi(m[4]);
  if (s.start_line < 1 || s.end_line < 1) throw InvalidArgument("span lines are 1-based");
  if (std::pair(s.start_line, s.start_col) > std::pair(s.end_line, s.end_col)) {
    throw InvalidArgument("span end precedes its start: '" + std::string(text) + "'");
  }
  return s;
}

namespace {

struct Style {
  bool color = false;
  std::string bold(const std::string& s) const { return color ? "\x1b[1m" + s + "\x1b[0m" : s; }
};

Style style_for(std::ostream& out) {
  bool tty = &out == &std::cout && ::isatty(STDOUT_FILENO);
  return {tty && std::getenv("NO_COLOR") == nullptr};
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read " + p.string());
  return f;
}

std::vector<Warning> load_corpus(const fs::path& p) {
  auto in = open_in(p);
  return read_corpus_jsonl(in);
}

KnowledgeBase load_kb(const std::vector<Warning>& corpus, const fs::path& facts) {
  KnowledgeBase kb;
  for (const auto& w : corpus) kb.add_warning(w.id);
  auto in = open_in(facts);
  for (const auto& f : read_facts_jsonl(in)) {
    if (!kb.has_warning(f.warning_id)) {
      throw InvalidArgument("facts file mentions unknown warning " + f.warning_id);
    }
    kb.add_fact(f);
  }
  return kb;
}

void print_diagnostics(std::ostream& err, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    err << "warning: " << d.message << "\n";
  }
}

// Loads, mutates and atomically rewrites a session under its lock file.
template <typename F>
void mutate_session(const fs::path& path, F&& f) {
  SessionLock lock(path);
  Session s = load_session(path);
  f(s);
  save_session(s, path);
}

void print_stats_table(std::ostream& out, const Session& s) {
  Style st = style_for(out);
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %-20s %7s %11s %13s %11s", "id", "name", "total",
                "uninspected", "uninteresting", "interesting");
  out << st.bold(line) << "\n";
  for (const auto& r : s.hypothesis().rules) {
    RuleStats rs = s.rule_stats(r.id());
    std::snprintf(line, sizeof line, "%-6lld %-20s %7zu %11zu %13zu %11zu",
                  static_cast<long long>(r.id()), r.display_name().c_str(), rs.total_matched,
                  rs.uninspected, rs.marked_uninteresting, rs.marked_interesting);
    out << line << "\n       " << format_rule(r) << "\n";
  }
}

LabelValue parse_feedback_value(const std::string& s) {
  LabelValue v = parse_label_value(s);
  if (v == LabelValue::uninspected) {
    throw InvalidArgument("value must be 'interesting' or 'uninteresting'");
  }
  return v;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Warning triage: rule inference over static-analysis warnings", "triage"};
  app.require_subcommand(1);
  app.fallthrough(false);
  int status = kOk;

  // ingest
  std::string tool, report, source_root, corpus_path, facts_path, out_path, session_path;
  int context = kDefaultContextLines;
  auto* ingest = app.add_subcommand("ingest", "Parse an analyzer report into a corpus");
  ingest->add_option("--format,--tool", tool, "Report format: infer | spotbugs | canonical")
      ->required()
      ->check(CLI::IsMember({"infer", "spotbugs", "canonical"}));
  ingest->add_option("--report", report, "Report file")->required();
  ingest->add_option("--source-root", source_root, "Project root for snippets")->required();
  ingest->add_option("--context", context, "Snippet context lines")->check(CLI::NonNegativeNumber);
  ingest->add_option("--out", out_path, "Corpus JSONL (default: stdout)");
  ingest->callback([&] {
    std::string bytes = read_file(report);
    IngestResult parsed;
    if (tool == "infer") {
      parsed = parse_infer_report(bytes);
    } else if (tool == "spotbugs") {
      parsed = parse_spotbugs_report(bytes);
    } else {
      std::istringstream in(bytes);
      parsed.warnings = read_corpus_jsonl(in);
    }
    IngestResult snipped = attach_snippets(std::move(parsed.warnings), source_root, context);
    std::vector<Diagnostic> diags = parsed.diagnostics;
    diags.insert(diags.end(), snipped.diagnostics.begin(), snipped.diagnostics.end());
    if (out_path.empty()) {
      write_corpus_jsonl(out, snipped.warnings);
    } else {
      auto f = open_out(out_path);
      write_corpus_jsonl(f, snipped.warnings);
    }
    print_diagnostics(err, diags);
    err << snipped.warnings.size() << " warnings, " << diags.size() << " diagnostics\n";
    if (!diags.empty()) status = kPartialIngest;
  });

  // extract
  std::string corpus_out;
  auto* extract = app.add_subcommand("extract", "Extract containment facts from sources");
  extract->add_option("--corpus", corpus_path, "Corpus JSONL")->required();
  extract->add_option("--source-root", source_root, "Project root")->required();
  extract->add_option("--out", out_path, "Facts JSONL (default: stdout)");
  extract->add_option("--corpus-out", corpus_out, "Rewrite the corpus with enclosing context");
  extract->callback([&] {
    std::vector<Warning> corpus = load_corpus(corpus_path);
    ExtractionResult r = extract_all_containment_facts(corpus, source_root);
    if (out_path.empty()) {
      write_facts_jsonl(out, r.facts);
    } else {
      auto f = open_out(out_path);
      write_facts_jsonl(f, r.facts);
    }
    if (!corpus_out.empty()) {
      auto f = open_out(corpus_out);
      write_corpus_jsonl(f, corpus);
    }
    print_diagnostics(err, r.diagnostics);
    err << r.facts.size() << " facts for " << corpus.size() << " warnings\n";
    if (!r.diagnostics.empty()) status = kPartialIngest;
  });

  // init
  std::string name = "corpus";
  InferenceConfig icfg;
  auto* init = app.add_subcommand("init", "Create a session file from a corpus and facts");
  init->add_option("--corpus", corpus_path, "Corpus JSONL")->required();
  init->add_option("--facts", facts_path, "Facts JSONL")->required();
  init->add_option("--out", out_path, "Session file to create")->required();
  init->add_option("--name", name, "Corpus name");
  init->add_option("--source-root", source_root, "Recorded in the manifest");
  init->add_option("--max-rules", icfg.max_rules)->check(CLI::PositiveNumber);
  init->add_option("--max-predicates", icfg.max_predicates_per_rule)->check(CLI::PositiveNumber);
  init->callback([&] {
    if (fs::exists(out_path)) throw Conflict(out_path + " already exists");
    std::vector<Warning> corpus = load_corpus(corpus_path);
    KnowledgeBase kb = load_kb(corpus, facts_path);
    CorpusManifest m;
    m.corpus_name = name;
    m.source_root = source_root;
    Session s(m, std::move(corpus), std::move(kb), icfg);
    save_session(s, out_path);
    err << "created " << out_path << " with " << s.corpus().size() << " warnings\n";
  });

  // infer
  std::string format = "dsl";
  auto* infer = app.add_subcommand("infer", "Print the current rules");
  infer->add_option("--session", session_path, "Session file")->required();
  infer->add_option("--format", format, "dsl | json")->check(CLI::IsMember({"dsl", "json"}));
  infer->callback([&] {
    Session s = load_session(session_path);
    if (format == "json") {
      out << json(s.hypothesis()).dump(2) << "\n";
    } else {
      for (const auto& r : s.hypothesis().rules) out << format_rule(r) << "\n";
    }
  });

  // label
  std::string warning_id, value;
  auto* label = app.add_subcommand("label", "Label one warning");
  label->add_option("--session", session_path, "Session file")->required();
  label->add_option("--warning", warning_id, "Warning id")->required();
  label->add_option("--value", value, "interesting | uninteresting")->required();
  label->callback([&] {
    LabelValue v = parse_feedback_value(value);
    mutate_session(session_path, [&](Session& s) {
      s.label_instance(warning_id, v, wall_clock_ms());
      out << hypothesis_summary(s).dump(2) << "\n";
    });
  });

  // apply-rule
  RuleId rule_id = 0;
  auto* apply = app.add_subcommand("apply-rule", "Label every uninspected match of a rule");
  apply->add_option("--session", session_path, "Session file")->required();
  apply->add_option("--rule", rule_id, "Rule id")->required();
  apply->add_option("--value", value, "interesting | uninteresting")->required();
  apply->callback([&] {
    LabelValue v = parse_feedback_value(value);
    mutate_session(session_path, [&](Session& s) {
      std::size_t n = s.label_rule(rule_id, v, wall_clock_ms());
      out << json{{"labeled", n}, {"hypothesis", hypothesis_summary(s)}}.dump(2) << "\n";
    });
  });

  // highlight
  std::string span_text;
  auto* highlight = app.add_subcommand("highlight", "Highlight a code expression in a snippet");
  highlight->add_option("--session", session_path, "Session file")->required();
  highlight->add_option("--warning", warning_id, "Warning id")->required();
  highlight->add_option("--span", span_text, "Snippet-relative L1:C1-L2:C2")->required();
  highlight->callback([&] {
    SourceSpan span = parse_span(span_text);
    mutate_session(session_path, [&](Session& s) {
      json elements = extract_expression_elements(s.warning(warning_id).snippet, span).predicates();
      std::size_t n = s.highlight(warning_id, span, wall_clock_ms());
      out << json{{"new_facts", n}, {"elements", elements}, {"hypothesis", hypothesis_summary(s)}}
                 .dump(2)
          << "\n";
    });
  });

  // stats
  std::string stats_format = "json";
  auto* stats = app.add_subcommand("stats", "Per-rule inspection statistics");
  stats->add_option("--session", session_path, "Session file")->required();
  stats->add_option("--format", stats_format, "json | table")
      ->check(CLI::IsMember({"json", "table"}));
  stats->callback([&] {
    Session s = load_session(session_path);
    if (stats_format == "table") {
      print_stats_table(out, s);
    } else {
      out << rules_report(s).dump(2) << "\n";
    }
  });

  // simulate
  SimulationConfig scfg;
  std::string heuristic = "all", ground_truth_path, plot_path, examination = "counterexample";
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate users and record alignment curves");
  simulate_cmd->add_option("--corpus", corpus_path, "Corpus JSONL")->required();
  simulate_cmd->add_option("--facts", facts_path, "Facts JSONL")->required();
  simulate_cmd->add_option("--ground-truth", ground_truth_path, "JSON map id -> label")->required();
  simulate_cmd->add_option("--heuristic", heuristic, "shorter | api | container | all")
      ->check(CLI::IsMember({"shorter", "api", "container", "all"}));
  simulate_cmd->add_option("--p", scfg.p, "Probability of rule-level feedback")
      ->check(CLI::Range(0.0, 1.0));
  simulate_cmd->add_option("--k", scfg.alignment_threshold_k, "Alignment threshold");
  simulate_cmd->add_option("--runs", scfg.runs, "Runs")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", scfg.seed, "Seed");
  simulate_cmd->add_option("--rule-examination", examination, "counterexample | apply_only")
      ->check(CLI::IsMember({"counterexample", "apply_only"}));
  simulate_cmd->add_option("--out", out_path, "Curves CSV (default: stdout)");
  simulate_cmd->add_option("--plot", plot_path, "Write an SVG plot of the mean curve");
  simulate_cmd->callback([&] {
    std::vector<Warning> corpus = load_corpus(corpus_path);
    KnowledgeBase kb = load_kb(corpus, facts_path);
    auto gt_in = open_in(ground_truth_path);
    scfg.ground_truth = read_ground_truth(gt_in);
    scfg.heuristic = parse_heuristic(heuristic);
    scfg.rule_examination = parse_rule_examination(examination);
    std::vector<AlignmentCurve> curves = simulate(corpus, kb, scfg);
    if (out_path.empty()) {
      write_curves_csv(out, curves);
    } else {
      auto f = open_out(out_path);
      write_curves_csv(f, curves);
    }
    if (!plot_path.empty()) {
      auto f = open_out(plot_path);
      std::ostringstream title;
      title << "mean rules aligned >= " << scfg.alignment_threshold_k << " (" << heuristic
            << ", p=" << scfg.p << ", " << scfg.runs << " runs)";
      write_curves_svg(f, curves, title.str());
    }
    err << "mean iterations to " << scfg.alignment_threshold_k << ": "
        << mean_iterations_to_threshold(curves, scfg.alignment_threshold_k) << "\n";
  });

  // serve
  ServeOptions sopts;
  std::string static_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API for one session");
  serve_cmd->add_option("--session", session_path, "Session file")->required();
  serve_cmd->add_option("--host", sopts.host, "Bind address");
  serve_cmd->add_option("--port", sopts.port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--static", static_dir, "Directory of UI assets to serve at /");
  serve_cmd->callback([&] {
    if (!static_dir.empty()) sopts.static_dir = static_dir;
    status = serve(session_path, sopts, err);
  });

  // export-rules
  auto* export_cmd = app.add_subcommand("export-rules", "Write the current rules as DSL");
  export_cmd->add_option("--session", session_path, "Session file")->required();
  export_cmd->add_option("--out", out_path, "Output file (default: stdout)");
  export_cmd->callback([&] {
    Session s = load_session(session_path);
    std::ostringstream text;
    for (const auto& r : s.hypothesis().rules) text << format_rule(r) << "\n";
    if (out_path.empty()) {
      out << text.str();
    } else {
      auto f = open_out(out_path);
      f << text.str();
    }
  });

  // plant
  PlantedOptions popts;
  std::string out_dir;
  auto* plant = app.add_subcommand("plant", "Write a synthetic corpus with known ground truth");
  plant->add_option("--out-dir", out_dir, "Directory for corpus, facts and ground truth")
      ->required();
  plant->add_option("--rules", popts.rules)->check(CLI::PositiveNumber);
  plant->add_option("--uninteresting", popts.uninteresting)->check(CLI::PositiveNumber);
  plant->add_option("--interesting", popts.interesting)->check(CLI::NonNegativeNumber);
  plant->add_option("--min-cluster", popts.min_cluster)->check(CLI::PositiveNumber);
  plant->add_option("--seed", popts.seed);
  plant->callback([&] {
    PlantedCorpus pc = make_planted_corpus(popts);
    fs::create_directories(out_dir);
    auto c = open_out(fs::path(out_dir) / "corpus.jsonl");
    write_corpus_jsonl(c, pc.warnings);
    auto f = open_out(fs::path(out_dir) / "facts.jsonl");
    write_facts_jsonl(f, pc.facts);
    auto g = open_out(fs::path(out_dir) / "ground_truth.json");
    write_ground_truth(g, pc.ground_truth);
    for (const auto& r : pc.planted_rules) out << format_rule(r) << "\n";
  });

  std::vector<const char*> args;
  for (const auto& a : argv) args.push_back(a.c_str());
  if (args.empty()) args.push_back("triage");
  try {
    if (args.size() == 1) {
      err << app.help();
      return kUsageError;
    }
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return status;
}

}  // namespace triage::cli
