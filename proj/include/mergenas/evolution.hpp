#pragma once

#include <deque>

#include "mergenas/oracles.hpp"
#include "mergenas/rng.hpp"

namespace mergenas {

struct Individual {
  Genotype genotype;
  double reward = 0.0;    // set before entering the population
  long long birth = 0;    // insertion index (age)
};

struct EvolutionConfig {
  int population_size = 100;
  int tournament_size = 8;
  int max_mutation_retries = 10000;
  int max_edges = kMaxEdges;
};

// Uniform random genotype with rejection of invalid ones. `rejects` counts
// discarded draws (not trials).
Genotype random_valid_genotype(int num_vertices, Rng& rng, int max_edges = kMaxEdges,
                               long long max_rejects = 1000000,
                               long long* rejects = nullptr);

// Evenly split between flipping one edge bit and replacing one operation
// with a different one; re-mutates from the parent until the child is valid.
Genotype mutate(const Genotype& parent, Rng& rng, int max_edges = kMaxEdges,
                int max_retries = 10000);

// Aging evolution: tournament of `tournament_size` distinct individuals,
// best reward wins (ties to the older), child replaces the oldest member.
class Population {
 public:
  explicit Population(const EvolutionConfig& cfg) : cfg_(cfg) {}

  bool at_capacity() const {
    return static_cast<int>(ring_.size()) == cfg_.population_size;
  }
  int size() const { return static_cast<int>(ring_.size()); }
  const std::deque<Individual>& ring() const { return ring_; }

  // Warm-up insert of an evaluated random individual.
  void seed_individual(Individual ind);

  // One evolution step; returns the evaluated child.
  Individual step(const Oracle& oracle, Rng& rng);

 private:
  EvolutionConfig cfg_;
  std::deque<Individual> ring_;
  long long next_birth_ = 0;
};

}  // namespace mergenas
