#include "mergenas/search_space.hpp"

#include <algorithm>
#include <set>

namespace mergenas {

namespace {

// "Edge[i,j]" -> (i, j); "Op[v]" -> v. Returns false when the name does not
// match the scheme.
bool parse_edge_name(const std::string& s, int& i, int& j) {
  if (s.rfind("Edge[", 0) != 0 || s.back() != ']') return false;
  const size_t comma = s.find(',', 5);
  if (comma == std::string::npos) return false;
  try {
    i = std::stoi(s.substr(5, comma - 5));
    j = std::stoi(s.substr(comma + 1, s.size() - comma - 2));
  } catch (...) {
    return false;
  }
  return i >= 1 && j > i;
}

bool parse_op_name(const std::string& s, int& v) {
  if (s.rfind("Op[", 0) != 0 || s.back() != ']') return false;
  try {
    v = std::stoi(s.substr(3, s.size() - 4));
  } catch (...) {
    return false;
  }
  return v >= 2;
}

}  // namespace

const StateDef& MergedSpace::state(const std::string& name) const {
  auto it = states_.find(name);
  if (it == states_.end()) throw missing_key_error("no state named '" + name + "'");
  return it->second;
}

const SearchSpaceDef& MergedSpace::space(const std::string& id) const {
  auto it = spaces_.find(id);
  if (it == spaces_.end()) throw missing_key_error("no space named '" + id + "'");
  return it->second;
}

const std::vector<std::string>& MergedSpace::chain_for(const PairKey& pair) const {
  return space(pair.space).chain;
}

std::vector<std::string> MergedSpace::actions_at(const PairKey& pair,
                                                 const std::string& st) const {
  if (st == kStartState) return space_ids_;
  if (st == kTerminalState) return {};
  const SearchSpaceDef& ss = space(pair.space);
  if (const auto* restricted = ss.restriction(st)) return *restricted;
  return state(st).actions;
}

MergedSpace::Position MergedSpace::available_actions(
    const PairKey& pair, const std::vector<std::string>& history) const {
  bool known = false;
  for (const PairKey& p : pairs_.pairs) known = known || p == pair;
  if (!known) throw contract_error("available_actions: pair " + pair.str() + " not in pair set");

  const std::vector<std::string>& chain = chain_for(pair);
  if (history.size() > chain.size() + 1)
    throw contract_error("available_actions: history longer than chain for " + pair.str());

  if (!history.empty()) {
    if (history[0] != pair.space)
      throw contract_error("available_actions: history starts with '" + history[0] +
                           "', pair selects '" + pair.space + "'");
    for (size_t i = 1; i < history.size(); ++i) {
      const std::vector<std::string> legal = actions_at(pair, chain[i - 1]);
      if (std::find(legal.begin(), legal.end(), history[i]) == legal.end())
        throw contract_error("available_actions: action '" + history[i] +
                             "' not available at state '" + chain[i - 1] + "'");
    }
  }

  Position pos;
  if (history.empty()) {
    pos.state = kStartState;
    pos.actions = space_ids_;
  } else if (history.size() == chain.size() + 1) {
    pos.state = kTerminalState;
  } else {
    pos.state = chain[history.size() - 1];
    pos.actions = actions_at(pair, pos.state);
  }
  return pos;
}

MergedSpace merge(const std::vector<SearchSpaceDef>& spaces,
                  const std::vector<StateDef>& state_defs, const PairSet& pairs) {
  if (spaces.empty()) throw contract_error("merge: no spaces given");
  if (pairs.pairs.empty()) throw contract_error("merge: empty pair set");

  std::map<std::string, StateDef> defs;
  for (const StateDef& sd : state_defs) {
    if (sd.name.empty()) throw contract_error("merge: state with empty name");
    if (sd.name == kStartState || sd.name == kTerminalState)
      throw contract_error("merge: state name '" + sd.name + "' is reserved");
    if (sd.actions.empty()) throw contract_error("merge: state '" + sd.name + "' has no actions");
    std::set<std::string> uniq(sd.actions.begin(), sd.actions.end());
    if (uniq.size() != sd.actions.size())
      throw contract_error("merge: duplicate action in state '" + sd.name + "'");
    auto [it, inserted] = defs.emplace(sd.name, sd);
    if (!inserted && it->second.actions != sd.actions)
      throw contract_error("merge conflict: state '" + sd.name +
                           "' declared with differing action lists");
  }

  MergedSpace m;
  std::set<std::string> seen_spaces;
  for (const SearchSpaceDef& ss : spaces) {
    if (ss.id.empty()) throw contract_error("merge: space with empty id");
    if (!seen_spaces.insert(ss.id).second)
      throw contract_error("merge: duplicate space id '" + ss.id + "'");
    for (const std::string& st : ss.chain) {
      auto it = defs.find(st);
      if (it == defs.end())
        throw contract_error("merge: space '" + ss.id + "' references undeclared state '" +
                             st + "'");
      if (std::find(m.ordered_states_.begin(), m.ordered_states_.end(), st) ==
          m.ordered_states_.end())
        m.ordered_states_.push_back(st);
    }
    for (const auto& [st, acts] : ss.allowed) {
      auto it = defs.find(st);
      if (it == defs.end())
        throw contract_error("merge: restriction on undeclared state '" + st + "'");
      if (std::find(ss.chain.begin(), ss.chain.end(), st) == ss.chain.end())
        throw contract_error("merge: restriction on state '" + st + "' outside space '" +
                             ss.id + "'");
      if (acts.empty())
        throw contract_error("merge: empty restriction for state '" + st + "' in '" + ss.id +
                             "'");
      for (const std::string& a : acts)
        if (std::find(it->second.actions.begin(), it->second.actions.end(), a) ==
            it->second.actions.end())
          throw contract_error("merge: restriction names unknown action '" + a +
                               "' of state '" + st + "'");
    }
    m.spaces_.emplace(ss.id, ss);
    m.space_ids_.push_back(ss.id);
  }
  m.ordered_states_.insert(m.ordered_states_.begin(), kStartState);

  for (const PairKey& p : pairs.pairs) {
    if (!seen_spaces.count(p.space))
      throw contract_error("merge: pair references unknown space '" + p.space + "'");
    if (std::count(pairs.pairs.begin(), pairs.pairs.end(), p) != 1)
      throw contract_error("merge: duplicate pair " + p.str());
    if (std::find(m.task_ids_.begin(), m.task_ids_.end(), p.task) == m.task_ids_.end())
      m.task_ids_.push_back(p.task);
  }
  m.pairs_ = pairs;

  for (const auto& [name, def] : defs) m.states_.emplace(name, def);

  // Detect the architecture-encoding naming scheme.
  int max_vertex = 0;
  bool all_match = true;
  for (const std::string& st : m.ordered_states_) {
    if (st == kStartState) continue;
    int i, j, v;
    if (parse_edge_name(st, i, j)) {
      max_vertex = std::max(max_vertex, j);
    } else if (parse_op_name(st, v)) {
      max_vertex = std::max(max_vertex, v + 1);
    } else {
      all_match = false;
      break;
    }
  }
  if (all_match && max_vertex >= 3) m.nas_naming_ = NasNaming{max_vertex};

  return m;
}

}  // namespace mergenas
