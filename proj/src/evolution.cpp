#include "mergenas/evolution.hpp"

namespace mergenas {

Genotype random_valid_genotype(int num_vertices, Rng& rng, int max_edges,
                               long long max_rejects, long long* rejects) {
  Genotype g = Genotype::empty(num_vertices);
  long long rejected = 0;
  for (;;) {
    for (auto& e : g.edges) e = rng.coin() ? 1 : 0;
    for (auto& o : g.ops) o = static_cast<uint8_t>(1 + rng.index(kNumOps));
    if (validate(g, max_edges)) {
      if (rejects) *rejects = rejected;
      return g;
    }
    if (++rejected >= max_rejects)
      throw exhaustion_error("random_valid_genotype: rejection limit", rejected);
  }
}

Genotype mutate(const Genotype& parent, Rng& rng, int max_edges, int max_retries) {
  if (!validate(parent, max_edges)) throw contract_error("mutate: invalid parent");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Genotype child = parent;
    if (rng.coin()) {
      const int e = rng.index(static_cast<int>(child.edges.size()));
      child.edges[e] ^= 1;
    } else {
      const int pos = rng.index(static_cast<int>(child.ops.size()));
      // a different operator, uniformly among the other two
      const int cur = child.ops[pos];
      int pick = 1 + rng.index(kNumOps - 1);
      if (pick >= cur) ++pick;
      child.ops[pos] = static_cast<uint8_t>(pick);
    }
    if (validate(child, max_edges)) return child;
  }
  throw exhaustion_error("mutate: no valid child", max_retries);
}

void Population::seed_individual(Individual ind) {
  if (at_capacity()) throw contract_error("Population::seed_individual: already full");
  ind.birth = next_birth_++;
  ring_.push_back(std::move(ind));
}

Individual Population::step(const Oracle& oracle, Rng& rng) {
  if (!at_capacity())
    throw contract_error("Population::step: population below capacity (" +
                         std::to_string(ring_.size()) + "/" +
                         std::to_string(cfg_.population_size) + ")");
  const std::vector<int> sample =
      rng.sample_without_replacement(cfg_.population_size, cfg_.tournament_size);
  int best = sample[0];
  for (int idx : sample) {
    if (ring_[idx].reward > ring_[best].reward ||
        (ring_[idx].reward == ring_[best].reward && ring_[idx].birth < ring_[best].birth))
      best = idx;
  }
  Individual child;
  child.genotype = mutate(ring_[best].genotype, rng, cfg_.max_edges, cfg_.max_mutation_retries);
  child.reward = oracle.evaluate_genotype(child.genotype).valid_acc;
  child.birth = next_birth_++;
  ring_.push_back(child);
  ring_.pop_front();  // aging eviction
  return child;
}

}  // namespace mergenas
