#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "triage/knowledge_base.hpp"
#include "triage/rule_inference.hpp"
#include "triage/session.hpp"
#include "triage/warning.hpp"

namespace triage {

enum class Heuristic { shorter_first, similar_api_calls, similar_container, all_combined };

std::string_view to_string(Heuristic h);
// Accepts the long names and the CLI short forms shorter|api|container|all.
Heuristic parse_heuristic(std::string_view s);

// What a simulated user does when a rule-level interaction examines a rule.
//   apply_only:     only rules consistent with the user's ground truth are
//                   examined, and all their uninspected matches are labeled
//                   uninteresting.
//   counterexample: the rule with the most uninspected matches is examined;
//                   if it groups an interesting warning, the user labels
//                   that warning interesting instead.
enum class RuleExamination { apply_only, counterexample };

std::string_view to_string(RuleExamination r);
RuleExamination parse_rule_examination(std::string_view s);

using GroundTruth = std::map<WarningId, LabelValue>;

GroundTruth read_ground_truth(std::istream& in);
void write_ground_truth(std::ostream& out, const GroundTruth& gt);

struct SimulationConfig {
  Heuristic heuristic = Heuristic::all_combined;
  double p = 0.0;
  double alignment_threshold_k = 0.8;
  int runs = 20;
  RuleExamination rule_examination = RuleExamination::counterexample;
  std::uint64_t seed = 0;
  GroundTruth ground_truth;
  InferenceConfig inference;

  void validate(const std::vector<Warning>& corpus) const;
};

struct CurvePoint {
  std::uint64_t iteration = 0;
  double pct_rules_aligned = 0.0;
  std::size_t rules_count = 0;
  std::size_t labeled_count = 0;

  bool operator==(const CurvePoint&) const = default;
};

struct AlignmentCurve {
  int run = 0;
  std::vector<CurvePoint> per_iteration;

  bool operator==(const AlignmentCurve&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-run random source. Uniform reals use the top 53 bits of each draw so
/// sequences do not depend on the standard library's distributions.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * n); }

 private:
  std::mt19937_64 engine_;
};

// Fraction of matched warnings that are ground-truth uninteresting; nullopt
// when the rule matches nothing.
std::optional<double> rule_alignment(const Rule& rule, const KnowledgeBase& kb,
                                     const GroundTruth& gt);

// Share of rules (with a nonempty match set) aligned at least k; 0 for an
// empty hypothesis.
double pct_rules_aligned(const Hypothesis& h, const KnowledgeBase& kb, const GroundTruth& gt,
                         double k);

std::size_t snippet_line_count(std::string_view snippet);

/// Picks the next warning to inspect. `last` is the most recently
/// instance-inspected warning, if any.
const Warning& next_warning(Heuristic heuristic, const std::vector<const Warning*>& uninspected,
                            const Warning* last, const KnowledgeBase& kb, SimRng& rng);

struct RunResult {
  AlignmentCurve curve;
  Session session;  // final state, including the event log
};

RunResult simulate_run(const std::vector<Warning>& corpus, const KnowledgeBase& kb,
                       const SimulationConfig& cfg, int run);

// One curve per run, in run order.
std::vector<AlignmentCurve> simulate(const std::vector<Warning>& corpus, const KnowledgeBase& kb,
                                     const SimulationConfig& cfg);

// First iteration with pct_rules_aligned >= threshold; a run that never gets
// there counts as its final iteration + 1.
std::uint64_t iterations_to_threshold(const AlignmentCurve& curve, double threshold);

double mean_iterations_to_threshold(const std::vector<AlignmentCurve>& curves, double threshold);

void write_curves_csv(std::ostream& out, const std::vector<AlignmentCurve>& curves);

// Mean curve with a min/max band, as a standalone SVG document.
void write_curves_svg(std::ostream& out, const std::vector<AlignmentCurve>& curves,
                      std::string_view title);

}  // namespace triage
