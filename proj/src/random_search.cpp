#include "mergenas/random_search.hpp"

namespace mergenas {

std::pair<Genotype, EvalResult> random_search_step(int num_vertices, const Oracle& oracle,
                                                   Rng& rng, int max_edges,
                                                   long long max_rejects) {
  Genotype g = random_valid_genotype(num_vertices, rng, max_edges, max_rejects);
  EvalResult r = oracle.evaluate_genotype(g);
  return {std::move(g), r};
}

std::vector<TrialRecord> run_random_search(int num_vertices, const Oracle& oracle,
                                           const PairKey& pair, long long budget, Rng& rng,
                                           int max_edges) {
  std::vector<TrialRecord> records;
  records.reserve(static_cast<size_t>(budget));
  for (long long i = 1; i <= budget; ++i) {
    auto [g, r] = random_search_step(num_vertices, oracle, rng, max_edges);
    TrialRecord rec;
    rec.trial = i;
    rec.pair = pair;
    rec.genotype_key = canonical_key(g);
    rec.reward = r.valid_acc;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TrialRecord> run_regularized_evolution(int num_vertices, const Oracle& oracle,
                                                   const PairKey& pair, long long budget,
                                                   const EvolutionConfig& cfg, Rng& rng) {
  std::vector<TrialRecord> records;
  records.reserve(static_cast<size_t>(budget));
  Population pop(cfg);
  long long trial = 0;

  auto record = [&](const Genotype& g, double reward) {
    TrialRecord rec;
    rec.trial = ++trial;
    rec.pair = pair;
    rec.genotype_key = canonical_key(g);
    rec.reward = reward;
    records.push_back(std::move(rec));
  };

  while (trial < budget && !pop.at_capacity()) {
    Individual ind;
    ind.genotype = random_valid_genotype(num_vertices, rng, cfg.max_edges);
    ind.reward = oracle.evaluate_genotype(ind.genotype).valid_acc;
    record(ind.genotype, ind.reward);
    pop.seed_individual(std::move(ind));
  }
  while (trial < budget) {
    const Individual child = pop.step(oracle, rng);
    record(child.genotype, child.reward);
  }
  return records;
}

}  // namespace mergenas
