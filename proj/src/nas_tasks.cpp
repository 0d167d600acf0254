#include "mergenas/nas_tasks.hpp"

#include <sstream>

#include "mergenas/genotype.hpp"

namespace mergenas {

namespace {

std::string q(const std::string& s) { return "\"" + s + "\""; }

std::string edge_state(int i, int j) {
  return "Edge[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

std::string op_state(int v) { return "Op[" + std::to_string(v) + "]"; }

}  // namespace

std::string xor_space_dsl(const std::string& space_id, const std::string& task_id) {
  std::ostringstream out;
  for (int i = 1; i <= 7; ++i) out << "state S" << i << " { 0, 1 }\n";
  out << "space " << space_id << " = [";
  for (int i = 1; i <= 7; ++i) out << (i > 1 ? ", " : "") << "S" << i;
  out << "]\n";
  out << "pair " << space_id << " " << task_id << "\n";
  return out.str();
}

std::string cell_space_dsl(int num_vertices, const std::string& space_id,
                           const std::string& task_id) {
  std::ostringstream out;
  const int v = num_vertices;
  for (int i = 1; i <= v; ++i)
    for (int j = i + 1; j <= v; ++j)
      out << "state " << q(edge_state(i, j)) << " { 0, 1 }\n";
  for (int k = 2; k <= v - 1; ++k)
    out << "state " << q(op_state(k)) << " { conv3x3, conv1x1, maxpool3x3 }\n";
  out << "space " << space_id << " = [";
  bool first = true;
  for (int i = 1; i <= v; ++i)
    for (int j = i + 1; j <= v; ++j) {
      out << (first ? "" : ", ") << q(edge_state(i, j));
      first = false;
    }
  for (int k = 2; k <= v - 1; ++k) out << ", " << q(op_state(k));
  out << "]\n";
  out << "pair " << space_id << " " << task_id << "\n";
  return out.str();
}

std::string cell_family_dsl(int num_vertices, const CellFamilyIds& ids) {
  const int v = num_vertices;
  const int removed = v - 1;  // last intermediate vertex absent from the subspaces
  std::ostringstream out;
  for (int i = 1; i <= v; ++i)
    for (int j = i + 1; j <= v; ++j)
      out << "state " << q(edge_state(i, j)) << " { 0, 1 }\n";
  for (int k = 2; k <= v - 1; ++k)
    out << "state " << q(op_state(k)) << " { conv3x3, conv1x1, maxpool3x3 }\n";

  auto emit_space = [&](const std::string& id, bool drop_removed) {
    out << "space " << id << " = [";
    bool first = true;
    for (int i = 1; i <= v; ++i)
      for (int j = i + 1; j <= v; ++j) {
        if (drop_removed && (i == removed || j == removed)) continue;
        out << (first ? "" : ", ") << q(edge_state(i, j));
        first = false;
      }
    for (int k = 2; k <= v - 1; ++k) {
      if (drop_removed && k == removed) continue;
      out << ", " << q(op_state(k));
    }
    out << "]\n";
  };

  emit_space(ids.full, false);
  emit_space(ids.sub1, true);
  emit_space(ids.sub2, true);
  for (int k = 2; k <= v - 1; ++k) {
    if (k == removed) continue;
    out << "restrict " << ids.sub1 << "." << q(op_state(k)) << " to { conv3x3, conv1x1 }\n";
    out << "restrict " << ids.sub2 << "." << q(op_state(k))
        << " to { conv3x3, maxpool3x3 }\n";
  }
  out << "pair " << ids.full << " " << ids.task << "\n";
  out << "pair " << ids.sub1 << " " << ids.task << "\n";
  out << "pair " << ids.sub2 << " " << ids.task << "\n";
  return out.str();
}

}  // namespace mergenas
