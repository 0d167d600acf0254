#pragma once

#include <string>

#include "mergenas/dsl.hpp"

namespace mergenas {

// Chain of 7 binary states S1..S7 paired with one task.
std::string xor_space_dsl(const std::string& space_id = "xor",
                          const std::string& task_id = "bits");

// Cell search over `num_vertices` vertices: one binary state per possible
// edge (lexicographic), then one operation state per intermediate vertex.
std::string cell_space_dsl(int num_vertices, const std::string& space_id,
                           const std::string& task_id);

// Full cell space plus two reduced spaces: the last intermediate vertex is
// dropped (its edge and op states absent) and the op choices are restricted
// to {conv3x3, conv1x1} and {conv3x3, maxpool3x3} respectively. Emits three
// `space` declarations and one `pair` per space, sharing one task.
struct CellFamilyIds {
  std::string full = "nb_full";
  std::string sub1 = "nb_sub1";
  std::string sub2 = "nb_sub2";
  std::string task = "cifar";
};

std::string cell_family_dsl(int num_vertices = 7, const CellFamilyIds& ids = {});

}  // namespace mergenas
