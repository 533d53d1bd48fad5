#pragma once

#include <cstdint>
#include <vector>

#include "triage/knowledge_base.hpp"
#include "triage/simulation.hpp"
#include "triage/warning.hpp"

namespace triage {

struct PlantedOptions {
  int rules = 3;
  int uninteresting = 30;
  int interesting = 10;
  int min_cluster = 5;
  std::uint64_t seed = 0;
};

/// A synthetic corpus with known ground truth. Each planted rule is a
/// package + call signature whose matches are exactly one cluster of
/// uninteresting warnings. Interesting distractors share one half of some
/// signature, and every warning carries shared noise facts.
struct PlantedCorpus {
  std::vector<Warning> warnings;
  std::vector<Fact> facts;
  GroundTruth ground_truth;
  std::vector<Rule> planted_rules;
  std::vector<IdSet> clusters;  // clusters[i] = uninteresting warnings of planted_rules[i]

  KnowledgeBase knowledge_base() const;
};

PlantedCorpus make_planted_corpus(const PlantedOptions& opts);

}  // namespace triage
