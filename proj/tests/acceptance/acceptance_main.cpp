// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// nonzero if any criterion fails.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "support.hpp"
#include "triage/cli.hpp"
#include "triage/planted.hpp"
#include "triage/rule_dsl.hpp"
#include "triage/simulation.hpp"

namespace triage::acceptance {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace triage::testing;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

IdSet unlabeled(const IdSet& all, const IdSet& e_plus, const IdSet& e_minus) {
  IdSet out;
  for (const auto& id : all) {
    if (!e_plus.contains(id) && !e_minus.contains(id)) out.insert(id);
  }
  return out;
}

struct Instance {
  RandomKb r;
  IdSet all, e_plus, e_minus;
};

Instance random_instance(std::mt19937_64& rng, int max_w, int max_p) {
  Instance in;
  int w = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_w - 1));
  int p = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_p));
  double density = 0.2 + 0.4 * static_cast<double>(rng() % 1000) / 1000.0;
  in.r = random_kb(rng, w, p, density);
  for (const auto& id : in.r.ids) {
    in.all.insert(id);
    switch (rng() % 3) {
      case 0: in.e_plus.insert(id); break;
      case 1: in.e_minus.insert(id); break;
      default: break;
    }
  }
  if (in.e_minus.empty()) {
    in.e_plus.erase(in.r.ids[0]);
    in.e_minus.insert(in.r.ids[0]);
  }
  return in;
}

// ---- A1 ----------------------------------------------------------------

Outcome a1_matching_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  int ok = 0, queries = 0;
  for (int kb_i = 0; kb_i < 200; ++kb_i) {
    int w = 1 + static_cast<int>(rng() % 50), p = 1 + static_cast<int>(rng() % 30);
    RandomKb r = random_kb(rng, w, p, 0.1 + 0.5 * static_cast<double>(rng() % 100) / 100.0);
    bool all_equal = true;
    for (int q = 0; q < 25; ++q) {
      std::vector<Predicate> conj;
      int n = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i) conj.push_back(r.predicates[rng() % r.predicates.size()]);
      if (q % 10 == 9) conj.push_back(Predicate::make(Relation::classname, "NotInUniverse"));
      Rule rule(1, conj);
      ++queries;
      IdSet expected = brute_matched(r.kb, rule.predicates());
      if (r.kb.matched_set(rule) != expected) all_equal = false;
      for (const auto& id : r.ids) {
        if (r.kb.matches(id, rule) != expected.contains(id)) all_equal = false;
      }
    }
    ok += all_equal;
  }
  double secs = seconds_since(t0);
  return {ok == 200 && secs < 10.0, std::to_string(ok) + "/200 KBs agree with brute force over " +
                                        std::to_string(queries) + " rules, " + fmt(secs) + " s"};
}

// ---- A2 ----------------------------------------------------------------

Outcome a2_soundness() {
  std::mt19937_64 rng(2002);
  long runs = 0, rules = 0, unsound = 0, redundant = 0;
  auto check = [&](const KnowledgeBase& kb, const Hypothesis& h, const IdSet& e_plus) {
    auto a = audit(kb, h, e_plus);
    ++runs;
    rules += static_cast<long>(h.rules.size());
    unsound += a.unsound_rules;
    redundant += a.redundant_rules;
  };

  for (int t = 0; t < 300; ++t) {
    Instance in = random_instance(rng, t % 2 ? 12 : 50, t % 2 ? 10 : 30);
    for (auto strategy : {SearchStrategy::automatic, SearchStrategy::exact, SearchStrategy::greedy}) {
      InferenceConfig cfg;
      cfg.strategy = strategy;
      check(in.r.kb, infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, cfg), in.e_plus);
    }
  }

  // Every refinement along simulated sessions, re-derived event by event.
  PlantedOptions po;
  po.seed = 5;
  PlantedCorpus pc = make_planted_corpus(po);
  KnowledgeBase kb = pc.knowledge_base();
  SimulationConfig sc;
  sc.ground_truth = pc.ground_truth;
  sc.seed = 77;
  for (double p : {0.0, 0.5, 1.0}) {
    sc.p = p;
    for (int run = 0; run < 4; ++run) {
      RunResult rr = simulate_run(pc.warnings, kb, sc, run);
      Session s(rr.session.manifest(), pc.warnings, kb, sc.inference);
      for (const auto& e : rr.session.events()) {
        s.apply(e);
        check(s.kb(), s.hypothesis(), s.e_plus());
      }
    }
  }
  return {unsound == 0 && redundant == 0,
          std::to_string(runs) + " inference runs, " + std::to_string(rules) + " rules: " +
              std::to_string(unsound) + " match E+, " + std::to_string(redundant) +
              " have a redundant predicate"};
}

// ---- A3 ----------------------------------------------------------------

Outcome a3_exact_optimality() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3003);
  InferenceConfig exact, greedy;
  exact.strategy = SearchStrategy::exact;
  exact.max_rules = greedy.max_rules = 3;
  exact.max_predicates_per_rule = greedy.max_predicates_per_rule = 2;
  greedy.strategy = SearchStrategy::greedy;
  int optimal = 0, greedy_ok = 0, exact_mode = 0;
  for (int t = 0; t < 100; ++t) {
    Instance in = random_instance(rng, 12, 10);
    IdSet un = unlabeled(in.all, in.e_plus, in.e_minus);
    Hypothesis he = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, exact);
    Hypothesis hg = infer_rules(in.r.kb, in.e_plus, in.e_minus, in.all, greedy);
    exact_mode += he.mode == SearchMode::exact;
    Score best = enumerate_best(in.r.kb, in.e_plus, in.e_minus, un, 3, 2);
    optimal += score_of(in.r.kb, he, in.e_minus, un) == best;
    greedy_ok += hg.covered_uninteresting.size() <= he.covered_uninteresting.size();
  }
  double secs = seconds_since(t0);
  return {optimal == 100 && greedy_ok == 100 && exact_mode == 100 && secs < 60.0,
          "exact optimal on " + std::to_string(optimal) + "/100, greedy <= exact on " +
              std::to_string(greedy_ok) + "/100, " + fmt(secs) + " s"};
}

// ---- A4 ----------------------------------------------------------------

// Groups uninteresting warnings by the set of rules that match them.
std::set<IdSet> partition_of(const KnowledgeBase& kb, const std::vector<std::vector<Predicate>>& rules,
                             const IdSet& uninteresting) {
  std::map<std::vector<std::size_t>, IdSet> groups;
  for (const auto& id : uninteresting) {
    std::vector<std::size_t> sig;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (brute_matches(kb, id, rules[i])) sig.push_back(i);
    }
    groups[sig].insert(id);
  }
  std::set<IdSet> out;
  for (auto& [sig, ids] : groups) out.insert(ids);
  return out;
}

Outcome a4_planted_recovery() {
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PlantedOptions po;
    po.seed = seed;
    PlantedCorpus pc = make_planted_corpus(po);
    KnowledgeBase kb = pc.knowledge_base();
    IdSet all, e_plus, e_minus, uninteresting;
    for (const auto& [id, v] : pc.ground_truth) {
      all.insert(id);
      if (v == LabelValue::interesting) e_plus.insert(id);
      else uninteresting.insert(id);
    }
    for (const auto& cluster : pc.clusters) {
      auto it = cluster.begin();
      e_minus.insert(*it++);
      e_minus.insert(*it);
    }
    Hypothesis h = infer_rules(kb, e_plus, e_minus, all, {});
    std::vector<std::vector<Predicate>> inferred, planted;
    for (const auto& r : h.rules) inferred.push_back(r.predicates());
    for (const auto& r : pc.planted_rules) planted.push_back(r.predicates());
    recovered += partition_of(kb, inferred, uninteresting) == partition_of(kb, planted, uninteresting);
  }
  return {recovered >= 18, std::to_string(recovered) + "/20 corpora induce the planted partition"};
}

// ---- A5 ----------------------------------------------------------------

PlantedOptions replication_corpus() {
  PlantedOptions po;
  po.rules = 4;
  po.uninteresting = 25;
  po.interesting = 33;
  po.seed = 0;
  return po;
}

Outcome a5_simulation_direction() {
  auto t0 = std::chrono::steady_clock::now();
  PlantedCorpus pc = make_planted_corpus(replication_corpus());
  KnowledgeBase kb = pc.knowledge_base();
  SimulationConfig sc;
  sc.heuristic = Heuristic::all_combined;
  sc.runs = 20;
  sc.seed = 42;
  sc.ground_truth = pc.ground_truth;
  std::map<double, double> mean;
  for (double p : {1.0, 0.5, 0.0}) {
    sc.p = p;
    mean[p] = mean_iterations_to_threshold(simulate(pc.warnings, kb, sc), 0.8);
  }
  double secs = seconds_since(t0);
  bool pass = pc.warnings.size() == 58 && mean[1.0] < mean[0.5] && mean[0.5] < mean[0.0] &&
              mean[1.0] <= 0.8 * mean[0.0] && secs < 300.0;
  return {pass, "|corpus|=" + std::to_string(pc.warnings.size()) + ", mean iterations to 80%: p=1 " +
                    fmt(mean[1.0]) + ", p=0.5 " + fmt(mean[0.5]) + ", p=0 " + fmt(mean[0.0]) +
                    ", " + fmt(secs) + " s"};
}

// ---- A6 ----------------------------------------------------------------

fs::path a6_golden_path() { return fixture_dir() / "golden" / "full_alignment_iterations.json"; }

Outcome a6_full_alignment() {
  std::vector<std::pair<std::string, PlantedOptions>> corpora;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PlantedOptions po;
    po.seed = seed;
    corpora.emplace_back("planted-3x30+10-seed" + std::to_string(seed), po);
  }
  corpora.emplace_back("planted-4x25+33-seed0", replication_corpus());

  json observed = json::object();
  int runs = 0, reached = 0;
  for (const auto& [name, po] : corpora) {
    PlantedCorpus pc = make_planted_corpus(po);
    KnowledgeBase kb = pc.knowledge_base();
    SimulationConfig sc;
    sc.p = 1.0;
    sc.runs = 20;
    sc.seed = 42;
    sc.ground_truth = pc.ground_truth;
    json per_run = json::array();
    for (const auto& curve : simulate(pc.warnings, kb, sc)) {
      ++runs;
      json at = nullptr;
      for (const auto& pt : curve.per_iteration) {
        if (pt.pct_rules_aligned == 1.0 && pt.labeled_count < pc.warnings.size()) {
          at = pt.iteration;
          break;
        }
      }
      reached += !at.is_null();
      per_run.push_back(at);
    }
    observed[name] = per_run;
  }

  if (std::getenv("TRIAGE_UPDATE_GOLDEN")) {
    std::ofstream(a6_golden_path()) << observed.dump(2) << "\n";
  }
  json golden = json::parse(read_file(a6_golden_path()));
  bool frozen = golden == observed;
  return {reached == runs && frozen,
          std::to_string(reached) + "/" + std::to_string(runs) +
              " p=1 runs reach 100% alignment before labeling completes; per-seed iterations " +
              (frozen ? "match" : "DIFFER FROM") + " the frozen golden"};
}

// ---- A7 ----------------------------------------------------------------

Outcome a7_alignment_arithmetic() {
  KnowledgeBase kb;
  GroundTruth gt;
  auto p = Predicate::make(Relation::package, "com.example");
  for (int i = 0; i < 5; ++i) {
    std::string id = "w" + std::to_string(i);
    kb.add_fact(id, p);
    gt[id] = i < 4 ? LabelValue::uninteresting : LabelValue::interesting;
  }
  auto a = rule_alignment(Rule(1, {p}), kb, gt);
  bool pass = a.has_value() && *a == 0.8;
  return {pass, "alignment = " + (a ? fmt(*a, 17) : std::string("none"))};
}

// ---- A8 ----------------------------------------------------------------

struct Corpus22 {
  std::vector<Warning> warnings;
  KnowledgeBase kb;
};

Corpus22 load_corpus22() {
  auto parsed = parse_infer_report(read_file(nacos_root() / "infer-report.json"));
  Corpus22 c;
  c.warnings = attach_snippets(parsed.warnings, nacos_root()).warnings;
  auto facts = extract_all_containment_facts(c.warnings, nacos_root()).facts;
  for (const auto& w : c.warnings) c.kb.add_warning(w.id);
  for (const auto& f : facts) c.kb.add_fact(f);
  return c;
}

SourceSpan random_span(std::mt19937_64& rng, const std::string& snippet) {
  std::vector<std::string> lines;
  std::istringstream in(snippet);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  SourceSpan s;
  s.start_line = s.end_line = 1 + static_cast<int>(rng() % lines.size());
  int len = static_cast<int>(lines[static_cast<std::size_t>(s.start_line - 1)].size());
  if (len == 0) return s;
  s.start_col = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(len));
  s.end_col = s.start_col + static_cast<int>(rng() % 20);
  s.end_col = std::min(s.end_col, len);
  return s;
}

Outcome a8_replay_determinism() {
  Corpus22 c = load_corpus22();
  CorpusManifest m{"nacos", nacos_root(), {}, c.warnings.size()};
  std::mt19937_64 rng(8008);
  int identical = 0;
  std::size_t applied = 0, rejected = 0;
  for (int seq = 0; seq < 50; ++seq) {
    Session s(m, c.warnings, c.kb);
    std::int64_t ts = 1'700'000'000'000;
    int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      ts += static_cast<std::int64_t>(rng() % 5000);
      const Warning& w = c.warnings[rng() % c.warnings.size()];
      const auto& rules = s.hypothesis().rules;
      int kind = static_cast<int>(rng() % 100);
      try {
        if (kind < 45) {
          s.label_instance(w.id, rng() % 2 ? LabelValue::interesting : LabelValue::uninteresting, ts);
        } else if (kind < 60 && !rules.empty()) {
          s.label_rule(rules[rng() % rules.size()].id(), LabelValue::uninteresting, ts);
        } else if (kind < 75) {
          s.highlight(w.id, random_span(rng, w.snippet), ts);
        } else if (kind < 85) {
          const auto& preds = s.kb().predicates_of(w.id);
          auto it = preds.begin();
          std::advance(it, static_cast<long>(rng() % preds.size()));
          s.checkmark(w.id, *it, ts);
        } else if (kind < 95 && !rules.empty()) {
          s.rename_rule(rules[rng() % rules.size()].id(), "name " + std::to_string(i), ts);
        } else {
          s.label_rule(1 + static_cast<RuleId>(rng() % 6), LabelValue::uninteresting, ts);
        }
        ++applied;
      } catch (const Error&) {
        ++rejected;  // stale or unknown rule, span outside the snippet: not logged
      }
    }
    std::string bytes = serialize_session(s);
    Session manual(m, c.warnings, c.kb);
    for (const auto& e : s.events()) manual.apply(e);
    bool same = serialize_session(manual) == bytes && serialize_session(s.replay()) == bytes &&
                serialize_session(Session::from_json(json::parse(bytes))) == bytes;
    identical += same;
  }
  return {identical == 50, std::to_string(identical) + "/50 random logs replay byte-identically (" +
                               std::to_string(applied) + " events applied, " +
                               std::to_string(rejected) + " rejected)"};
}

// ---- A9 ----------------------------------------------------------------

Outcome a9_fixture_fidelity() {
  const std::string package_rule = "rule 1 \"Rule 1\": package(\"com.alibaba.nacos.client\")";
  const std::string composite_rule =
      "rule 2 \"Rule 2\": package(\"com.alibaba.nacos.client\") & "
      "code_element(\"call:getProperty\")";
  GetPropertyCorpus c = load_getproperty_corpus();
  Session s = c.session();
  auto dsl = [&] {
    std::string out;
    for (const auto& r : s.hypothesis().rules) out += (out.empty() ? "" : "\n") + format_rule(r);
    return out;
  };
  s.label_instance(c.a, LabelValue::uninteresting);
  s.label_instance(c.b, LabelValue::uninteresting);
  std::string after_two = dsl();
  s.label_instance(c.e, LabelValue::interesting);
  std::size_t added = s.highlight(c.b, span_of(s.warning(c.b).snippet, "getProperty"));
  s.label_instance(c.d, LabelValue::interesting);
  std::string after_refine = dsl();
  bool pass = after_two == package_rule && after_refine == composite_rule && added == 4;
  return {pass, "after two labels [" + after_two + "]; after highlight (" + std::to_string(added) +
                    " facts) and interesting label [" + after_refine + "]"};
}

// ---- A10 ---------------------------------------------------------------

Outcome a10_ingestion_counts() {
  auto infer = parse_infer_report(read_file(nacos_root() / "infer-report.json"));
  auto spot = parse_spotbugs_report(read_file(fixture_dir() / "lucene" / "spotbugsXml.xml"));
  fs::path tmp = fs::temp_directory_path() / ("triage_a10_" + std::to_string(::getpid()));
  fs::create_directories(tmp);
  std::ostringstream out, err;
  int infer_code = cli::run({"triage", "ingest", "--format", "infer", "--report",
                             (nacos_root() / "infer-report.json").string(), "--source-root",
                             nacos_root().string(), "--out", (tmp / "c.jsonl").string()},
                            out, err);
  int spot_code = cli::run({"triage", "ingest", "--format", "spotbugs", "--report",
                            (fixture_dir() / "lucene" / "spotbugsXml.xml").string(), "--source-root",
                            lucene_root().string(), "--out", (tmp / "s.jsonl").string()},
                           out, err);
  fs::remove_all(tmp);
  bool pass = infer.warnings.size() == 22 && infer.diagnostics.size() == 3 && infer_code == 3 &&
              spot.warnings.size() == 25 && spot_code == 0;
  return {pass, "Infer " + std::to_string(infer.warnings.size()) + " warnings + " +
                    std::to_string(infer.diagnostics.size()) + " diagnostics, exit " +
                    std::to_string(infer_code) + "; SpotBugs " +
                    std::to_string(spot.warnings.size()) + " warnings, exit " +
                    std::to_string(spot_code)};
}

}  // namespace
}  // namespace triage::acceptance

int main() {
  using namespace triage::acceptance;
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {"A1", "matching oracle", a1_matching_oracle},
      {"A2", "soundness and no redundancy", a2_soundness},
      {"A3", "exact-search optimality", a3_exact_optimality},
      {"A4", "planted-rule recovery", a4_planted_recovery},
      {"A5", "simulation direction", a5_simulation_direction},
      {"A6", "full alignment", a6_full_alignment},
      {"A7", "alignment arithmetic", a7_alignment_arithmetic},
      {"A8", "event-sourcing determinism", a8_replay_determinism},
      {"A9", "fixture fidelity", a9_fixture_fidelity},
      {"A10", "ingestion counts", a10_ingestion_counts},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << std::left << std::setw(4) << c.id << (o.pass ? "PASS " : "FAIL ") << c.title
              << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all primary criteria pass" : std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
