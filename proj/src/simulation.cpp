#include "triage/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <ostream>
#include <tuple>

#include "json.hpp"

#include "triage/error.hpp"

namespace triage {

std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::shorter_first: return "shorter_first";
    case Heuristic::similar_api_calls: return "similar_api_calls";
    case Heuristic::similar_container: return "similar_container";
    case Heuristic::all_combined: return "all_combined";
  }
  return "all_combined";
}

Heuristic parse_heuristic(std::string_view s) {
  if (s == "shorter" || s == "shorter_first") return Heuristic::shorter_first;
  if (s == "api" || s == "similar_api_calls") return Heuristic::similar_api_calls;
  if (s == "container" || s == "similar_container") return Heuristic::similar_container;
  if (s == "all" || s == "all_combined") return Heuristic::all_combined;
  throw InvalidArgument("unknown heuristic: '" + std::string(s) + "'");
}

std::string_view to_string(RuleExamination r) {
  return r == RuleExamination::apply_only ? "apply_only" : "counterexample";
}

RuleExamination parse_rule_examination(std::string_view s) {
  if (s == "apply_only") return RuleExamination::apply_only;
  if (s == "counterexample") return RuleExamination::counterexample;
  throw InvalidArgument("unknown rule examination mode: '" + std::string(s) + "'");
}

GroundTruth read_ground_truth(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed ground truth", e.byte);
  }
  if (!j.is_object()) throw ParseError("ground truth must be a JSON object");
  GroundTruth gt;
  for (const auto& [id, v] : j.items()) {
    if (!v.is_string()) throw ParseError("ground truth label for " + id + " is not a string");
    LabelValue value = parse_label_value(v.get<std::string>());
    if (value == LabelValue::uninspected) {
      throw InvalidArgument("ground truth for " + id + " must be interesting or uninteresting");
    }
    gt[id] = value;
  }
  return gt;
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, v] : gt) j[id] = std::string(to_string(v));
  out << j.dump(2) << "\n";
}

void SimulationConfig::validate(const std::vector<Warning>& corpus) const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
  if (!(alignment_threshold_k > 0.0 && alignment_threshold_k <= 1.0)) {
    throw InvalidArgument("alignment threshold k must lie in (0, 1]");
  }
  if (runs < 1) throw InvalidArgument("runs must be >= 1");
  for (const auto& w : corpus) {
    if (!ground_truth.contains(w.id)) throw InvalidArgument("no ground truth for warning " + w.id);
  }
  inference.validate();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::optional<double> rule_alignment(const Rule& rule, const KnowledgeBase& kb,
                                     const GroundTruth& gt) {
  IdSet matched = kb.matched_set(rule);
  if (matched.empty()) return std::nullopt;
  std::size_t agree = 0;
  for (const auto& id : matched) {
    auto it = gt.find(id);
    if (it != gt.end() && it->second == LabelValue::uninteresting) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(matched.size());
}

double pct_rules_aligned(const Hypothesis& h, const KnowledgeBase& kb, const GroundTruth& gt,
                         double k) {
  std::size_t counted = 0, aligned = 0;
  for (const auto& r : h.rules) {
    auto a = rule_alignment(r, kb, gt);
    if (!a) continue;
    ++counted;
    if (*a >= k) ++aligned;
  }
  return counted == 0 ? 0.0 : static_cast<double>(aligned) / static_cast<double>(counted);
}

std::size_t snippet_line_count(std::string_view snippet) {
  if (snippet.empty()) return 0;
  std::size_t n = static_cast<std::size_t>(std::count(snippet.begin(), snippet.end(), '\n'));
  return snippet.back() == '\n' ? n : n + 1;
}

namespace {

auto shorter_key(const Warning& w) { return std::make_tuple(snippet_line_count(w.snippet), w.id); }

std::set<std::string> values_of(const KnowledgeBase& kb, const WarningId& id, Relation rel,
                                std::string_view prefix = {}) {
  std::set<std::string> out;
  for (const auto& p : kb.predicates_of(id)) {
    if (p.relation == rel && p.value.starts_with(prefix)) out.insert(p.value);
  }
  return out;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::any_of(a.begin(), a.end(), [&](const std::string& v) { return b.contains(v); });
}

std::size_t shared_calls(const KnowledgeBase& kb, const Warning& a, const Warning& b) {
  auto ca = values_of(kb, a.id, Relation::code_element, "call:");
  auto cb = values_of(kb, b.id, Relation::code_element, "call:");
  return static_cast<std::size_t>(
      std::count_if(ca.begin(), ca.end(), [&](const std::string& v) { return cb.contains(v); }));
}

std::size_t container_matches(const KnowledgeBase& kb, const Warning& a, const Warning& b) {
  std::size_t n = 0;
  if (intersects(values_of(kb, a.id, Relation::package), values_of(kb, b.id, Relation::package))) ++n;
  if (intersects(values_of(kb, a.id, Relation::classname), values_of(kb, b.id, Relation::classname))) {
    ++n;
  }
  namespace fs = std::filesystem;
  if (fs::path(a.location.file_path).parent_path() == fs::path(b.location.file_path).parent_path()) {
    ++n;
  }
  return n;
}

template <typename Score>
const Warning& best_by(const std::vector<const Warning*>& pool, Score score) {
  const Warning* best = pool.front();
  std::size_t best_score = score(*best);
  for (const Warning* w : pool) {
    std::size_t s = score(*w);
    if (s > best_score || (s == best_score && shorter_key(*w) < shorter_key(*best))) {
      best = w;
      best_score = s;
    }
  }
  return *best;
}

}  // namespace

const Warning& next_warning(Heuristic heuristic, const std::vector<const Warning*>& uninspected,
                            const Warning* last, const KnowledgeBase& kb, SimRng& rng) {
  if (uninspected.empty()) throw InvalidArgument("no uninspected warnings left");
  if (heuristic == Heuristic::all_combined) {
    heuristic = static_cast<Heuristic>(rng.below(3));
  }
  if (heuristic == Heuristic::shorter_first || last == nullptr) {
    return best_by(uninspected, [](const Warning&) { return std::size_t{0}; });
  }
  if (heuristic == Heuristic::similar_api_calls) {
    return best_by(uninspected, [&](const Warning& w) { return shared_calls(kb, *last, w); });
  }
  return best_by(uninspected, [&](const Warning& w) { return container_matches(kb, *last, w); });
}

RunResult simulate_run(const std::vector<Warning>& corpus, const KnowledgeBase& kb,
                       const SimulationConfig& cfg, int run) {
  cfg.validate(corpus);
  SimRng rng(splitmix64(cfg.seed + static_cast<std::uint64_t>(run)));
  CorpusManifest manifest;
  manifest.corpus_name = "simulation";
  RunResult result{{run, {}}, Session(manifest, corpus, kb, cfg.inference)};
  Session& s = result.session;

  const std::uint64_t cap = 3 * corpus.size();
  const Warning* last = nullptr;
  std::uint64_t iteration = 0;
  while (s.labels().size() < corpus.size() && iteration < cap) {
    bool rule_step = false;
    if (rng.uniform() < cfg.p) {
      // Examine the current rule with the most uninspected matches (only
      // fully consistent ones in apply_only mode).
      const Rule* pick = nullptr;
      std::size_t pick_uninspected = 0;
      bool pick_consistent = false;
      for (const auto& r : s.hypothesis().rules) {
        RuleStats st = s.rule_stats(r.id());
        if (st.uninspected == 0) continue;
        auto a = rule_alignment(r, s.kb(), cfg.ground_truth);
        bool consistent = a && *a >= 1.0 && *a >= cfg.alignment_threshold_k;
        if (!consistent && cfg.rule_examination == RuleExamination::apply_only) continue;
        if (!pick || st.uninspected > pick_uninspected) {
          pick = &r;
          pick_uninspected = st.uninspected;
          pick_consistent = consistent;
        }
      }
      const auto ts = static_cast<std::int64_t>(iteration + 1);
      if (pick && pick_consistent) {
        // A rational user applies a rule only when it agrees with their own
        // judgement on every warning it matches.
        s.label_rule(pick->id(), LabelValue::uninteresting, ts);
        rule_step = true;
      } else if (pick) {
        // The rule groups a warning the user considers interesting; they
        // label that counterexample instead.
        const Warning* counter = nullptr;
        for (const auto& id : s.kb().matched_set(*pick)) {
          if (s.label_of(id) != LabelValue::uninspected ||
              cfg.ground_truth.at(id) != LabelValue::interesting) {
            continue;
          }
          const Warning& w = s.warning(id);
          if (!counter || shorter_key(w) < shorter_key(*counter)) counter = &w;
        }
        s.label_instance(counter->id, LabelValue::interesting, ts);
        last = counter;
        rule_step = true;
      }
    }
    if (!rule_step) {
      std::vector<const Warning*> open;
      for (const auto& w : corpus) {
        if (s.label_of(w.id) == LabelValue::uninspected) open.push_back(&w);
      }
      const Warning& w = next_warning(cfg.heuristic, open, last, s.kb(), rng);
      s.label_instance(w.id, cfg.ground_truth.at(w.id), static_cast<std::int64_t>(iteration + 1));
      last = &w;
    }
    ++iteration;
    result.curve.per_iteration.push_back(
        {iteration,
         pct_rules_aligned(s.hypothesis(), s.kb(), cfg.ground_truth, cfg.alignment_threshold_k),
         s.hypothesis().rules.size(), s.labels().size()});
  }
  return result;
}

std::vector<AlignmentCurve> simulate(const std::vector<Warning>& corpus, const KnowledgeBase& kb,
                                     const SimulationConfig& cfg) {
  std::vector<AlignmentCurve> out;
  for (int run = 0; run < cfg.runs; ++run) out.push_back(simulate_run(corpus, kb, cfg, run).curve);
  return out;
}

std::uint64_t iterations_to_threshold(const AlignmentCurve& curve, double threshold) {
  for (const auto& pt : curve.per_iteration) {
    if (pt.pct_rules_aligned >= threshold) return pt.iteration;
  }
  return curve.per_iteration.empty() ? 1 : curve.per_iteration.back().iteration + 1;
}

double mean_iterations_to_threshold(const std::vector<AlignmentCurve>& curves, double threshold) {
  if (curves.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : curves) sum += static_cast<double>(iterations_to_threshold(c, threshold));
  return sum / static_cast<double>(curves.size());
}

void write_curves_csv(std::ostream& out, const std::vector<AlignmentCurve>& curves) {
  out << "run,iteration,pct_rules_aligned,rules_count,labeled_count\n";
  char buf[32];
  for (const auto& c : curves) {
    for (const auto& pt : c.per_iteration) {
      std::snprintf(buf, sizeof buf, "%.6f", pt.pct_rules_aligned);
      out << c.run << ',' << pt.iteration << ',' << buf << ',' << pt.rules_count << ','
          << pt.labeled_count << '\n';
    }
  }
}

void write_curves_svg(std::ostream& out, const std::vector<AlignmentCurve>& curves,
                      std::string_view title) {
  std::size_t len = 0;
  for (const auto& c : curves) len = std::max(len, c.per_iteration.size());
  // Runs that finished early hold their last value.
  std::vector<double> mean(len, 0.0), lo(len, 1.0), hi(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    for (const auto& c : curves) {
      double v = i < c.per_iteration.size() ? c.per_iteration[i].pct_rules_aligned
                                            : c.per_iteration.back().pct_rules_aligned;
      mean[i] += v / static_cast<double>(curves.size());
      lo[i] = std::min(lo[i], v);
      hi[i] = std::max(hi[i], v);
    }
  }

  const double w = 640, h = 400, left = 60, right = 20, top = 40, bottom = 50;
  auto x = [&](std::size_t i) {
    return left + (len <= 1 ? 0.0 : (w - left - right) * static_cast<double>(i) / static_cast<double>(len - 1));
  };
  auto y = [&](double v) { return top + (h - top - bottom) * (1.0 - v); };
  char buf[64];
  auto pt = [&](double px, double py) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
    return std::string(buf);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << w - right << "\" y2=\""
      << y(0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << left << "\" y2=\"" << y(1)
      << "\" stroke=\"black\"/>\n";
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">"
        << static_cast<int>(v * 100) << "%</text>\n";
  }
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\">iteration (1.." << len << ")</text>\n";
  if (len > 0) {
    std::string band;
    for (std::size_t i = 0; i < len; ++i) band += pt(x(i), y(hi[i]));
    for (std::size_t i = len; i-- > 0;) band += pt(x(i), y(lo[i]));
    out << "<polygon points=\"" << band << "\" fill=\"#9ecae1\" fill-opacity=\"0.5\"/>\n";
    std::string line;
    for (std::size_t i = 0; i < len; ++i) line += pt(x(i), y(mean[i]));
    out << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace triage
