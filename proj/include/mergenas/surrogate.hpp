#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mergenas/oracles.hpp"
#include "mergenas/rng.hpp"

namespace mergenas {

// Separable synthetic benchmark: per-vertex operation scores plus per-edge
// scores, summed over the parts of the cell that lie on some input-to-output
// path, then squashed into [0,1] by a fixed affine map derived from the
// tables. Test accuracy adds small per-genotype noise so model-selection
// machinery has something to select against.
struct SurrogateParams {
  uint64_t seed = 42;
  int num_vertices = 7;
  double noise_amp = 0.01;
  std::vector<std::array<double, 3>> op_score;  // vertices 2..V-1
  std::vector<double> edge_score;               // C(V,2), lexicographic
  double lo = 0.0, hi = 1.0;                    // squash bounds

  static SurrogateParams make(uint64_t seed, int num_vertices = 7, double noise_amp = 0.01);
  double squash(double raw) const;
};

// Allowed choices when the optimum is taken over a restricted member space.
struct SpaceRestriction {
  std::vector<uint8_t> edge_allowed;           // per edge slot
  std::vector<std::vector<int>> ops_allowed;   // per intermediate vertex, values 1..3

  static SpaceRestriction full(int num_vertices);
  // Drop the given intermediate vertex and restrict every op choice.
  static SpaceRestriction reduced(int num_vertices, int removed_vertex,
                                  const std::vector<int>& ops);
};

double surrogate_reward(const SurrogateParams& p, const Genotype& g);
double surrogate_test_acc(const SurrogateParams& p, const Genotype& g);

struct SurrogateOptimum {
  Genotype best_by_valid;
  double best_valid = 0.0;
  double best_test = 0.0;  // max test accuracy over the restricted space
};

// Exact optimum by enumerating all edge subsets within the edge budget;
// op choices are optimized per vertex (valid) or refined exhaustively near
// the top (test, when noise is on).
SurrogateOptimum surrogate_optimum(const SurrogateParams& p, const SpaceRestriction& r);

class SurrogateOracle final : public Oracle {
 public:
  SurrogateOracle(SurrogateParams params, SpaceRestriction restriction);
  std::string name() const override;
  EvalResult evaluate_genotype(const Genotype& g) const override;
  std::optional<double> best_valid() const override { return opt_.best_valid; }
  std::optional<double> best_test() const override { return opt_.best_test; }
  const SurrogateParams& params() const { return params_; }
  const SurrogateOptimum& optimum() const { return opt_; }

 private:
  SurrogateParams params_;
  SpaceRestriction restriction_;
  SurrogateOptimum opt_;
};

// All valid genotypes of a (small) space, for exhaustive checks and exports.
std::vector<Genotype> enumerate_valid_genotypes(int num_vertices, const SpaceRestriction& r,
                                                int max_edges = kMaxEdges);

// CSV rows "genotype,valid_acc,test_acc" in the tabular-oracle format.
void export_surrogate_csv(const SurrogateParams& p, const std::vector<Genotype>& genotypes,
                          const std::string& path);

}  // namespace mergenas
