#pragma once

#include <string>
#include <vector>

#include "mergenas/search_space.hpp"

namespace mergenas {

// Parsed form of a search-space description file. Grammar documented in
// docs/search-space-dsl.md.
struct SpaceDocument {
  std::vector<StateDef> states;
  std::vector<SearchSpaceDef> spaces;
  PairSet pairs;
};

SpaceDocument parse_space_document(const std::string& text);

// Convenience for single-space documents; the document must declare exactly
// one `space`.
SearchSpaceDef define_space(const std::string& text);

// The document's states/spaces/pairs merged in one step.
MergedSpace merge_document(const SpaceDocument& doc);

}  // namespace mergenas
