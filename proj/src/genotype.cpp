#include "mergenas/genotype.hpp"

#include <algorithm>

namespace mergenas {

namespace {

bool parse_edge_state(const std::string& s, int& i, int& j) {
  if (s.rfind("Edge[", 0) != 0 || s.back() != ']') return false;
  const size_t comma = s.find(',', 5);
  if (comma == std::string::npos) return false;
  i = std::stoi(s.substr(5, comma - 5));
  j = std::stoi(s.substr(comma + 1, s.size() - comma - 2));
  return true;
}

bool parse_op_state(const std::string& s, int& v) {
  if (s.rfind("Op[", 0) != 0 || s.back() != ']') return false;
  v = std::stoi(s.substr(3, s.size() - 4));
  return true;
}

}  // namespace

int op_value(const std::string& action_name) {
  const auto& names = op_action_names();
  for (size_t k = 0; k < names.size(); ++k)
    if (names[k] == action_name) return static_cast<int>(k) + 1;
  throw contract_error("unknown operation action '" + action_name + "'");
}

Genotype Genotype::empty(int num_vertices) {
  if (num_vertices < 3) throw contract_error("Genotype: need at least 3 vertices");
  Genotype g;
  g.num_vertices = num_vertices;
  g.edges.assign(num_vertices * (num_vertices - 1) / 2, 0);
  g.ops.assign(num_vertices - 2, 1);
  return g;
}

int Genotype::edge_count() const {
  int n = 0;
  for (uint8_t b : edges) n += b;
  return n;
}

int edge_index(int i, int j, int num_vertices) {
  if (i < 1 || j <= i || j > num_vertices)
    throw contract_error("edge_index: bad edge (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
  // edges (1,2)..(1,V), (2,3)..(2,V), ...
  int idx = 0;
  for (int a = 1; a < i; ++a) idx += num_vertices - a;
  return idx + (j - i - 1);
}

std::pair<int, int> edge_pair(int index, int num_vertices) {
  for (int i = 1; i < num_vertices; ++i) {
    const int span = num_vertices - i;
    if (index < span) return {i, i + 1 + index};
    index -= span;
  }
  throw contract_error("edge_pair: index out of range");
}

bool validate(const Genotype& g, int max_edges) {
  if (g.edge_count() > max_edges) return false;
  const int v = g.num_vertices;
  std::vector<uint8_t> reach(v + 1, 0);
  reach[1] = 1;
  // edges are directed low->high, so one ascending sweep settles reachability
  for (int i = 1; i <= v; ++i) {
    if (!reach[i]) continue;
    for (int j = i + 1; j <= v; ++j)
      if (g.edges[edge_index(i, j, v)]) reach[j] = 1;
  }
  return reach[v] != 0;
}

std::string canonical_key(const Genotype& g) {
  std::string s;
  s.reserve(g.edges.size() + 1 + g.ops.size());
  for (uint8_t b : g.edges) s += b ? '1' : '0';
  s += ';';
  for (uint8_t o : g.ops) s += static_cast<char>('0' + o);
  return s;
}

Genotype parse_canonical_key(const std::string& key, int num_vertices) {
  Genotype g = Genotype::empty(num_vertices);
  const size_t nbits = g.edges.size();
  const size_t nops = g.ops.size();
  if (key.size() != nbits + 1 + nops || key[nbits] != ';')
    throw contract_error("genotype key '" + key + "' does not match " +
                         std::to_string(nbits) + " edge bits + " + std::to_string(nops) +
                         " op digits");
  for (size_t i = 0; i < nbits; ++i) {
    if (key[i] != '0' && key[i] != '1')
      throw contract_error("genotype key: bad edge bit at position " + std::to_string(i));
    g.edges[i] = key[i] == '1';
  }
  for (size_t i = 0; i < nops; ++i) {
    const char c = key[nbits + 1 + i];
    if (c < '1' || c > '3')
      throw contract_error("genotype key: bad op digit at position " + std::to_string(i));
    g.ops[i] = static_cast<uint8_t>(c - '0');
  }
  return g;
}

Genotype decode(const MergedSpace& m, const PairKey& pair,
                const std::vector<std::string>& actions) {
  if (!m.nas_naming())
    throw contract_error("decode: space has no architecture encoding");
  const std::vector<std::string>& chain = m.chain_for(pair);
  if (actions.size() != chain.size())
    throw contract_error("decode: trajectory not terminal (" + std::to_string(actions.size()) +
                         " of " + std::to_string(chain.size()) + " actions)");
  Genotype g = Genotype::empty(m.nas_naming()->num_vertices);
  for (size_t k = 0; k < chain.size(); ++k) {
    int i, j, v;
    if (parse_edge_state(chain[k], i, j)) {
      g.edges[edge_index(i, j, g.num_vertices)] = actions[k] == "1";
    } else if (parse_op_state(chain[k], v)) {
      g.ops[v - 2] = static_cast<uint8_t>(op_value(actions[k]));
    } else {
      throw contract_error("decode: state '" + chain[k] + "' has no encoding");
    }
  }
  return g;
}

std::vector<std::string> encode_actions(const MergedSpace& m, const PairKey& pair,
                                        const Genotype& g) {
  const std::vector<std::string>& chain = m.chain_for(pair);
  std::vector<std::string> actions;
  actions.reserve(chain.size());
  for (const std::string& st : chain) {
    int i, j, v;
    if (parse_edge_state(st, i, j)) {
      actions.push_back(g.edges[edge_index(i, j, g.num_vertices)] ? "1" : "0");
    } else if (parse_op_state(st, v)) {
      actions.push_back(op_action_names()[g.ops[v - 2] - 1]);
    } else {
      throw contract_error("encode_actions: state '" + st + "' has no encoding");
    }
  }
  return actions;
}

}  // namespace mergenas
