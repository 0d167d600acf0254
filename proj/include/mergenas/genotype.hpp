#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mergenas/search_space.hpp"

namespace mergenas {

inline constexpr int kMaxEdges = 9;
inline constexpr int kNumOps = 3;  // 1=conv3x3, 2=conv1x1, 3=maxpool3x3

inline const std::vector<std::string>& op_action_names() {
  static const std::vector<std::string> names = {"conv3x3", "conv1x1", "maxpool3x3"};
  return names;
}

int op_value(const std::string& action_name);  // 1..3

// A decoded architecture over `num_vertices` vertices: vertex 1 is the input,
// vertex num_vertices the output. Edge bits cover all (i,j), i<j, in
// lexicographic order; ops cover intermediate vertices 2..num_vertices-1.
struct Genotype {
  int num_vertices = 7;
  std::vector<uint8_t> edges;  // C(V,2) bits
  std::vector<uint8_t> ops;    // V-2 values in 1..3

  static Genotype empty(int num_vertices);
  int num_edges_slots() const { return num_vertices * (num_vertices - 1) / 2; }
  int edge_count() const;

  bool operator==(const Genotype& o) const {
    return num_vertices == o.num_vertices && edges == o.edges && ops == o.ops;
  }
};

// Lexicographic index of edge (i,j), 1 <= i < j <= V.
int edge_index(int i, int j, int num_vertices);
std::pair<int, int> edge_pair(int index, int num_vertices);

// True iff the edge count is within the budget and a directed path exists
// from the input vertex to the output vertex.
bool validate(const Genotype& g, int max_edges = kMaxEdges);

// "<edge bits>;<op digits>", e.g. "010...;13213".
std::string canonical_key(const Genotype& g);
Genotype parse_canonical_key(const std::string& key, int num_vertices = 7);

// Maps a terminal trajectory's actions into the full representation. States
// absent from the pair's chain decode to absent edges / a fixed default op
// (such vertices carry no edges, so the oracle never reads the value).
Genotype decode(const MergedSpace& m, const PairKey& pair,
                const std::vector<std::string>& actions_after_start);

// Action sequence (excluding the start selector) that decodes back to g under
// the given pair. Every state of the pair's chain must be determined by g.
std::vector<std::string> encode_actions(const MergedSpace& m, const PairKey& pair,
                                        const Genotype& g);

}  // namespace mergenas
