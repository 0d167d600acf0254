#include "mergenas/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mergenas {

namespace {

// Forward/backward reachability over the directed low->high edges.
struct Reach {
  uint32_t from_input = 0;  // bitmask over vertices (bit v-1)
  uint32_t to_output = 0;
};

Reach reachability(const Genotype& g) {
  const int v = g.num_vertices;
  Reach r;
  r.from_input = 1u;  // vertex 1
  for (int i = 1; i <= v; ++i) {
    if (!(r.from_input >> (i - 1) & 1u)) continue;
    for (int j = i + 1; j <= v; ++j)
      if (g.edges[edge_index(i, j, v)]) r.from_input |= 1u << (j - 1);
  }
  r.to_output = 1u << (v - 1);
  for (int j = v; j >= 1; --j) {
    if (!(r.to_output >> (j - 1) & 1u)) continue;
    for (int i = 1; i < j; ++i)
      if (g.edges[edge_index(i, j, v)]) r.to_output |= 1u << (i - 1);
  }
  return r;
}

double raw_score(const SurrogateParams& p, const Genotype& g) {
  const int v = g.num_vertices;
  const Reach r = reachability(g);
  const uint32_t on_path = r.from_input & r.to_output;
  double raw = 0.0;
  for (int i = 1; i <= v; ++i) {
    if (!(r.from_input >> (i - 1) & 1u)) continue;
    for (int j = i + 1; j <= v; ++j) {
      if (!g.edges[edge_index(i, j, v)]) continue;
      if (r.to_output >> (j - 1) & 1u) raw += p.edge_score[edge_index(i, j, v)];
    }
  }
  for (int k = 2; k <= v - 1; ++k)
    if (on_path >> (k - 1) & 1u) raw += p.op_score[k - 2][g.ops[k - 2] - 1];
  return raw;
}

double noise_for(const SurrogateParams& p, const Genotype& g) {
  if (p.noise_amp == 0.0) return 0.0;
  const std::string key = canonical_key(g);
  const uint64_t h = hash_bytes(p.seed, key.data(), key.size());
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
  return p.noise_amp * (2.0 * u - 1.0);
}

}  // namespace

SurrogateParams SurrogateParams::make(uint64_t seed, int num_vertices, double noise_amp) {
  if (num_vertices < 3) throw contract_error("SurrogateParams: need at least 3 vertices");
  SurrogateParams p;
  p.seed = seed;
  p.num_vertices = num_vertices;
  p.noise_amp = noise_amp;
  Rng rng(seed);
  p.op_score.resize(num_vertices - 2);
  for (auto& row : p.op_score)
    for (double& v : row) v = rng.uniform(-1.0, 1.0);
  p.edge_score.resize(num_vertices * (num_vertices - 1) / 2);
  for (double& v : p.edge_score) v = rng.uniform(-1.0, 1.0);

  // Attainability bound: each edge contributes its score or nothing; each
  // intermediate vertex contributes one op score or nothing.
  double lo = 0.0, hi = 0.0;
  for (double d : p.edge_score) {
    lo += std::min(0.0, d);
    hi += std::max(0.0, d);
  }
  for (const auto& row : p.op_score) {
    const double mn = *std::min_element(row.begin(), row.end());
    const double mx = *std::max_element(row.begin(), row.end());
    lo += std::min(0.0, mn);
    hi += std::max(0.0, mx);
  }
  p.lo = lo;
  p.hi = hi;
  return p;
}

double SurrogateParams::squash(double raw) const {
  const double x = (raw - lo) / (hi - lo);
  return std::clamp(x, 0.0, 1.0);
}

SpaceRestriction SpaceRestriction::full(int num_vertices) {
  SpaceRestriction r;
  r.edge_allowed.assign(num_vertices * (num_vertices - 1) / 2, 1);
  r.ops_allowed.assign(num_vertices - 2, {1, 2, 3});
  return r;
}

SpaceRestriction SpaceRestriction::reduced(int num_vertices, int removed_vertex,
                                           const std::vector<int>& ops) {
  SpaceRestriction r = full(num_vertices);
  for (int i = 1; i <= num_vertices; ++i)
    for (int j = i + 1; j <= num_vertices; ++j)
      if (i == removed_vertex || j == removed_vertex)
        r.edge_allowed[edge_index(i, j, num_vertices)] = 0;
  for (int k = 2; k <= num_vertices - 1; ++k)
    if (k != removed_vertex) r.ops_allowed[k - 2] = ops;
  return r;
}

double surrogate_reward(const SurrogateParams& p, const Genotype& g) {
  if (g.num_vertices != p.num_vertices)
    throw contract_error("surrogate_reward: genotype has " + std::to_string(g.num_vertices) +
                         " vertices, oracle " + std::to_string(p.num_vertices));
  if (!validate(g)) throw contract_error("surrogate_reward: invalid genotype");
  return p.squash(raw_score(p, g));
}

double surrogate_test_acc(const SurrogateParams& p, const Genotype& g) {
  return std::clamp(surrogate_reward(p, g) + noise_for(p, g), 0.0, 1.0);
}

SurrogateOptimum surrogate_optimum(const SurrogateParams& p, const SpaceRestriction& r) {
  const int v = p.num_vertices;
  const int n_edges = v * (v - 1) / 2;
  std::vector<int> allowed_edges;
  for (int e = 0; e < n_edges; ++e)
    if (r.edge_allowed[e]) allowed_edges.push_back(e);

  Genotype g = Genotype::empty(v);
  SurrogateOptimum best;
  best.best_valid = -1.0;
  double best_raw = 0.0;

  // Near-optimal edge subsets kept for the exact test-accuracy refinement.
  struct SubsetScore {
    std::vector<uint8_t> edges;
    double raw;
  };
  std::vector<SubsetScore> subsets;

  std::vector<int> chosen;
  auto evaluate_subset = [&]() {
    if (!validate(g)) return;
    const Reach reach = reachability(g);
    const uint32_t on_path = reach.from_input & reach.to_output;
    double raw = 0.0;
    for (int e : allowed_edges)
      if (g.edges[e]) {
        const auto [i, j] = edge_pair(e, v);
        if ((reach.from_input >> (i - 1) & 1u) && (reach.to_output >> (j - 1) & 1u))
          raw += p.edge_score[e];
      }
    std::vector<uint8_t> ops(v - 2, 0);
    for (int k = 2; k <= v - 1; ++k) {
      int arg = r.ops_allowed[k - 2].front();
      if (on_path >> (k - 1) & 1u) {
        double mx = -1e300;
        for (int op : r.ops_allowed[k - 2])
          if (p.op_score[k - 2][op - 1] > mx) {
            mx = p.op_score[k - 2][op - 1];
            arg = op;
          }
        raw += mx;
      }
      ops[k - 2] = static_cast<uint8_t>(arg);
    }
    subsets.push_back({g.edges, raw});
    const double valid = p.squash(raw);
    if (valid > best.best_valid) {
      best.best_valid = valid;
      best_raw = raw;
      best.best_by_valid = g;
      best.best_by_valid.ops = ops;
    }
  };

  // All subsets of allowed edges with size <= kMaxEdges.
  auto rec = [&](auto&& self, size_t start, int remaining) -> void {
    evaluate_subset();
    if (remaining == 0) return;
    for (size_t idx = start; idx < allowed_edges.size(); ++idx) {
      g.edges[allowed_edges[idx]] = 1;
      self(self, idx + 1, remaining - 1);
      g.edges[allowed_edges[idx]] = 0;
    }
  };
  rec(rec, 0, kMaxEdges);

  if (best.best_valid < 0.0)
    throw contract_error("surrogate_optimum: space has no valid genotype");

  if (p.noise_amp == 0.0) {
    best.best_test = best.best_valid;
    return best;
  }

  // Exact max of valid+noise: only genotypes whose valid accuracy is within
  // 2*amp of the optimum can beat it after adding noise in [-amp, amp].
  const double raw_floor = best_raw - 2.0 * p.noise_amp * (p.hi - p.lo);
  best.best_test = 0.0;
  Genotype t = Genotype::empty(v);
  for (const SubsetScore& s : subsets) {
    if (s.raw < raw_floor) continue;
    t.edges = s.edges;
    // exhaustive op combinations (off-path ops change only the noise draw)
    std::vector<size_t> pick(v - 2, 0);
    for (;;) {
      for (int k = 2; k <= v - 1; ++k)
        t.ops[k - 2] = static_cast<uint8_t>(r.ops_allowed[k - 2][pick[k - 2]]);
      const double test = surrogate_test_acc(p, t);
      if (test > best.best_test) best.best_test = test;
      int d = 0;
      while (d < v - 2 && ++pick[d] == r.ops_allowed[d].size()) pick[d++] = 0;
      if (d == v - 2) break;
    }
  }
  return best;
}

SurrogateOracle::SurrogateOracle(SurrogateParams params, SpaceRestriction restriction)
    : params_(std::move(params)),
      restriction_(std::move(restriction)),
      opt_(surrogate_optimum(params_, restriction_)) {}

std::string SurrogateOracle::name() const {
  return "surrogate(seed=" + std::to_string(params_.seed) +
         ",v=" + std::to_string(params_.num_vertices) + ")";
}

EvalResult SurrogateOracle::evaluate_genotype(const Genotype& g) const {
  EvalResult r;
  r.valid_acc = surrogate_reward(params_, g);
  r.test_acc = std::clamp(r.valid_acc + noise_for(params_, g), 0.0, 1.0);
  return r;
}

std::vector<Genotype> enumerate_valid_genotypes(int num_vertices, const SpaceRestriction& r,
                                                int max_edges) {
  std::vector<int> allowed_edges;
  const int n_edges = num_vertices * (num_vertices - 1) / 2;
  for (int e = 0; e < n_edges; ++e)
    if (r.edge_allowed[e]) allowed_edges.push_back(e);

  std::vector<Genotype> out;
  Genotype g = Genotype::empty(num_vertices);
  auto expand_ops = [&](auto&& self, int k) -> void {
    if (k > num_vertices - 1) {
      out.push_back(g);
      return;
    }
    for (int op : r.ops_allowed[k - 2]) {
      g.ops[k - 2] = static_cast<uint8_t>(op);
      self(self, k + 1);
    }
  };
  auto rec = [&](auto&& self, size_t start, int remaining) -> void {
    if (validate(g, max_edges)) expand_ops(expand_ops, 2);
    if (remaining == 0) return;
    for (size_t idx = start; idx < allowed_edges.size(); ++idx) {
      g.edges[allowed_edges[idx]] = 1;
      self(self, idx + 1, remaining - 1);
      g.edges[allowed_edges[idx]] = 0;
    }
  };
  rec(rec, 0, max_edges);
  return out;
}

void export_surrogate_csv(const SurrogateParams& p, const std::vector<Genotype>& genotypes,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "genotype,valid_acc,test_acc\n";
  char buf[128];
  for (const Genotype& g : genotypes) {
    const double valid = surrogate_reward(p, g);
    const double test = surrogate_test_acc(p, g);
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", canonical_key(g).c_str(), valid, test);
    out << buf;
  }
}

}  // namespace mergenas
