#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mergenas/errors.hpp"

namespace mergenas {

// Names "S" and "T" are reserved for the synthetic start and terminal states
// of a merged space.
inline constexpr const char* kStartState = "S";
inline constexpr const char* kTerminalState = "T";

// A named decision point. The name is the identity used for embedding sharing
// across spaces; two states with the same name must list identical actions.
struct StateDef {
  std::string name;
  std::vector<std::string> actions;  // ordered, unique
};

// An ordered chain of states plus optional per-state restrictions of the
// action set available inside this space.
struct SearchSpaceDef {
  std::string id;
  std::vector<std::string> chain;  // state names, in decision order
  std::map<std::string, std::vector<std::string>> allowed;  // state -> subset

  const std::vector<std::string>* restriction(const std::string& state) const {
    auto it = allowed.find(state);
    return it == allowed.end() ? nullptr : &it->second;
  }
};

struct PairKey {
  std::string space;
  std::string task;
  bool operator<(const PairKey& o) const {
    return space != o.space ? space < o.space : task < o.task;
  }
  bool operator==(const PairKey& o) const { return space == o.space && task == o.task; }
  std::string str() const { return space + ":" + task; }
};

struct PairSet {
  std::vector<PairKey> pairs;  // nonempty, no duplicates
};

// Shape of the architecture-encoding state family, derived from state names
// of the form "Edge[i,j]" / "Op[v]" at merge time. Present only when every
// decision state matches that scheme.
struct NasNaming {
  int num_vertices = 0;
};

// Several chains folded into one conditional space: states deduplicated by
// name, a start state whose actions select the member space, and action
// availability conditioned on the sampled (space, task) pair.
class MergedSpace {
 public:
  const StateDef& state(const std::string& name) const;
  bool has_state(const std::string& name) const { return states_.count(name) != 0; }
  const SearchSpaceDef& space(const std::string& id) const;
  const PairSet& pairs() const { return pairs_; }

  // State names in canonical order: start state, then chain states in first
  // declaration order. Initialization and checkpoint layouts follow this.
  const std::vector<std::string>& ordered_states() const { return ordered_states_; }
  const std::vector<std::string>& space_ids() const { return space_ids_; }
  const std::vector<std::string>& task_ids() const { return task_ids_; }

  const std::vector<std::string>& chain_for(const PairKey& pair) const;
  int chain_length(const PairKey& pair) const {
    return static_cast<int>(chain_for(pair).size());
  }

  // Actions legal at `state` for this pair (the space's restriction if any,
  // else the state's full list). At the start state every member space's
  // selector action is listed.
  std::vector<std::string> actions_at(const PairKey& pair, const std::string& state) const;

  // Current state and available actions after a history of chosen actions.
  // The history includes the start-state selector as its first element.
  struct Position {
    std::string state;
    std::vector<std::string> actions;  // empty iff state == terminal
  };
  Position available_actions(const PairKey& pair,
                             const std::vector<std::string>& history) const;

  const std::optional<NasNaming>& nas_naming() const { return nas_naming_; }

  friend MergedSpace merge(const std::vector<SearchSpaceDef>& spaces,
                           const std::vector<StateDef>& state_defs, const PairSet& pairs);

 private:
  std::map<std::string, StateDef> states_;
  std::map<std::string, SearchSpaceDef> spaces_;
  std::vector<std::string> ordered_states_;
  std::vector<std::string> space_ids_;
  std::vector<std::string> task_ids_;
  PairSet pairs_;
  std::optional<NasNaming> nas_naming_;
};

MergedSpace merge(const std::vector<SearchSpaceDef>& spaces,
                  const std::vector<StateDef>& state_defs, const PairSet& pairs);

}  // namespace mergenas
