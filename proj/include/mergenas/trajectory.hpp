#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mergenas/genotype.hpp"
#include "mergenas/search_space.hpp"
#include "mergenas/tensor.hpp"

namespace mergenas {

// Categorical distribution over the candidate actions of one step.
struct StepDistribution {
  std::vector<std::string> actions;
  std::vector<double> probs;
  std::vector<double> logits;
};

struct StepRecord {
  std::string state;
  std::vector<std::string> candidates;
  std::vector<double> probs;        // policy distribution (no exploration mixing)
  std::vector<double> probs_mixed;  // distribution actually sampled from
  int chosen = -1;
  double logp_mixed = 0.0;
  std::vector<Tensor> attention;  // per encoder layer, the chosen candidate's map

  const std::string& action() const { return candidates[chosen]; }
  double entropy() const;  // of the unmixed distribution
};

// One sampled action sequence from start to terminal. The forced start-state
// step conditions the sequence but is not a decision; `steps` holds only the
// M sampled decisions.
struct Trajectory {
  PairKey pair;
  std::vector<StepRecord> steps;
  std::optional<Genotype> genotype;
  std::optional<double> reward;

  std::vector<std::string> actions() const;
  double total_logp_mixed() const;
  double mean_entropy() const;
  // Canonical genotype key when decoded, else the concatenated action names.
  std::string key() const;
};

}  // namespace mergenas
