#pragma once

#include <vector>

#include "spanreg/graph.hpp"

namespace spanreg {

enum class Base { cycle, path };

// Parametric blow-up of a path or cycle. half=true thins every other
// base edge to K_{t,t} minus the identity matching; for cycles the
// reduced edges are (2i, 2i+1), for paths the first edge is reduced.
struct BlowupSpec {
  Base base = Base::cycle;
  int k = 3;    // base length
  int t = 1;    // blow-up factor
  bool half = false;
};

// Throws domain_error when the spec invariants fail (k >= 3 for cycles,
// k >= 1 for paths, t >= 1, half cycles need even k).
void validate(const BlowupSpec& spec);

// Vertex b*t+i is position i of block b; blocks are consecutive id ranges.
Graph build_blowup(const BlowupSpec& spec);

// Expected degree for every vertex of build_blowup(spec), same indexing.
std::vector<int> blowup_degree_profile(const BlowupSpec& spec);

// Recognizer: true iff `edges` is exactly the blow-up of a path along the
// given tuple sequence, all tuples the same size and pairwise disjoint.
// half=false joins consecutive tuples completely; half=true thins edges
// 0, 2, 4, ... to "complete minus positional matching".
bool is_path_blowup_on_tuples(const std::vector<std::vector<int>>& tuples,
                              const std::vector<Edge>& edges, bool half = false);

}  // namespace spanreg
