#pragma once

#include "mergenas/evolution.hpp"
#include "mergenas/trainer.hpp"

namespace mergenas {

// One uniform draw with validity rejection, evaluated by the oracle.
std::pair<Genotype, EvalResult> random_search_step(int num_vertices, const Oracle& oracle,
                                                   Rng& rng, int max_edges = kMaxEdges,
                                                   long long max_rejects = 1000000);

// Full random-search run emitting the shared trial-record schema.
std::vector<TrialRecord> run_random_search(int num_vertices, const Oracle& oracle,
                                           const PairKey& pair, long long budget, Rng& rng,
                                           int max_edges = kMaxEdges);

// Full aging-evolution run (warm-up evaluations count as trials).
std::vector<TrialRecord> run_regularized_evolution(int num_vertices, const Oracle& oracle,
                                                   const PairKey& pair, long long budget,
                                                   const EvolutionConfig& cfg, Rng& rng);

}  // namespace mergenas
