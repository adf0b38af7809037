#pragma once

#include <vector>

#include "spanreg/graph.hpp"
#include "spanreg/verifier.hpp"

namespace spanreg {

struct SearchBudget {
  long long max_nodes = 20'000'000;
};

// "none" is a completed, exhaustive negative; "unknown" is a budget stop
// and must never be treated as a negative by callers.
enum class SearchStatus { found, none, unknown };

struct FactorSearch {
  SearchStatus status = SearchStatus::unknown;
  Certificate cert;      // set when found
  long long nodes = 0;   // decision nodes explored
};

struct BlowupSearch {
  SearchStatus status = SearchStatus::unknown;
  std::vector<Edge> edges;  // set when found
  long long nodes = 0;
};

// Exhaustive search for a spanning r-regular subgraph with connectivity
// >= r. Edges are tried in (min endpoint degree, id) order, include
// branch first, so the first solution is the lexicographically first in
// that order. Degree-feasibility and closed-component pruning; candidates
// failing the connectivity bar are rejected and the search continues.
// kappa(host) < r short-circuits to "none": any spanning subgraph has
// connectivity at most the host's.
FactorSearch brute_force_spanning(const Graph& g, int r, SearchBudget budget = {});

// Two cliques of size (n+r)/2 sharing r-slack vertices, on n+slack
// vertices total. slack=0 meets the degree threshold with equality and
// has connectivity exactly r; slack=1 drops connectivity to r-1, killing
// every spanning r-connected subgraph.
Graph build_tightness_example(int n, int r, int slack);

// Two disjoint cliques K_{n/2-2} plus four vertices joined to all of
// them. Needs n even, n % 4 != 0, n >= 10. Meets the r=4 threshold yet
// has no spanning 2-blow-up of a cycle.
Graph build_divisibility_example(int n);

// Exhaustive search for a spanning subgraph isomorphic to the full
// t-blow-up of a cycle of length n/t: an ordered partition into blocks of
// t with all consecutive joins complete. Block 0 is anchored at vertex 0.
BlowupSearch search_spanning_blowup_cycle(const Graph& g, int t, SearchBudget budget = {});

}  // namespace spanreg
