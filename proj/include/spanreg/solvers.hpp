#pragma once

#include <string>
#include <vector>

#include "spanreg/gadgets.hpp"
#include "spanreg/graph.hpp"
#include "spanreg/verifier.hpp"

namespace spanreg {

enum class ExtremalCase { one, two };

// Vertex classes feeding an extremal solver.  Case one carries two
// near-clique sides plus a small leftover set c; case two carries a
// near-bipartition with imbalance m, |a| + m = n/2 = |b| - m.
struct ExtremalDecomposition {
  ExtremalCase kind = ExtremalCase::one;
  std::vector<int> a, b, c;
  Rat alpha{3, 100};
  int m = 0;
};

// Validates shape: a/b/c are sorted, disjoint and partition 0..n-1, both
// sides sit near half, and the leftover set resp. the imbalance stays
// within the alpha budget.  Case two additionally needs an empty c, even
// order and even imbalance.  Throws domain_error on any violation.
ExtremalDecomposition make_extremal_decomposition(const Graph& g, ExtremalCase kind,
                                                  std::vector<int> a, std::vector<int> b,
                                                  std::vector<int> c, Rat alpha);

struct SolveStage {
  std::string name;
  bool ok = true;
  std::string detail;
};

// A failed stage leaves cert empty and names itself in failed_stage; a
// successful run always carries a re-verified certificate.
struct SolveResult {
  bool ok = false;
  Certificate cert;
  VerifyReport report;
  std::vector<SolveStage> stages;
  std::string failed_stage;
};

// 2m vertex-disjoint K_{1,s}, centers taken greedily from the residual
// graph's maximum degree (lowest id on ties).  Requires min degree
// >= m+s-1; a stall under that floor is a bug and raises logic_error.
std::vector<Star> find_disjoint_stars(const Graph& g, int m, int s);

// Near-clique case: cross matching, bridges, side chains glued from the
// bridge ends, leftover and divisibility absorbers, then a blow-up path
// closure inside each side.  r=2 degenerates to two Hamilton threads.
SolveResult solve_extremal_one(const Graph& g, const ExtremalDecomposition& dec, int r);

// Near-bipartition case: star / K_{1,r} harvesting on the large side, a
// path started from a typical tuple pair, unit absorption, low-cross-degree
// absorption, then a blow-up path closure over the balanced remainder.
SolveResult solve_extremal_two(const Graph& g, const ExtremalDecomposition& dec, int r);

}  // namespace spanreg
