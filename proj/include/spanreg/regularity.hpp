#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spanreg/graph.hpp"

namespace spanreg {

// Exact rational arithmetic used by the density machinery.
Rat rat_add(Rat a, Rat b);
Rat rat_sub(Rat a, Rat b);
Rat rat_mul(Rat a, Rat b);
// Nearest simple fraction (continued-fraction expansion, den <= max_den).
Rat rat_from_double(double x, long long max_den = 1'000'000);

// Bipartite pair (a,b) inside a host, carrying its regularity parameter
// and exact density. `verified` is set by callers after a successful
// exact regularity check; slicing uses it to assert the density drift.
struct RegularPair {
  const Graph* host = nullptr;
  std::vector<int> a, b;
  Rat eps;
  Rat d;
  bool verified = false;
};

RegularPair make_regular_pair(const Graph& host, std::vector<int> a, std::vector<int> b,
                              Rat eps);

struct RegularityWitness {
  std::vector<int> x, y;
  Rat dxy;
};

struct RegCheck {
  bool regular = false;
  std::optional<RegularityWitness> witness;  // set when regular == false
};

// Exact decision: enumerates all X on the smaller side; for each X the
// extreme Y of every admissible size is a sorted-prefix, which is
// sufficient (any other Y's density lies between the extremes). Sides
// above 14 are rejected (2^14 subsets is the enumeration budget); use the
// sampled mode there.
RegCheck is_eps_regular_exact(const RegularPair& p);

// One-sided: "regular" here only means no violation was found in
// `trials` random X draws (Y still handled exactly per draw). A negative
// answer always carries a concrete verified witness.
RegCheck is_eps_regular_sampled(const RegularPair& p, int trials, std::uint64_t seed);

// Restriction to a2 x b2 with the doubled parameter 2*eps. Caller
// supplies gamma > eps such that |a2| >= gamma*|a|, |b2| >= gamma*|b|.
// For an input pair marked verified, the density drift |d - d'| <= eps
// is asserted.
RegularPair slice_pair(const RegularPair& p, std::vector<int> a2, std::vector<int> b2,
                       Rat gamma);

struct SuperRegResult {
  bool ok = false;
  RegularPair pair;                     // shrunken, balanced
  std::vector<int> removed_a, removed_b;  // for the caller's exceptional set
  std::string diagnostic;               // set when !ok
};

// Repeatedly drops vertices with degree below (d-eps) fraction of the
// current opposite side, then trims the larger side (highest ids first)
// to balance. Fails when more than an eps fraction of either side had to
// go. Output satisfies the (d-3eps) degree bound on both sides; the
// output pair keeps the input d and carries 2*eps.
SuperRegResult super_regularize(const RegularPair& p);

// True iff every a-vertex has >= threshold*|b| neighbors in b and vice
// versa. Direct scan; used as the independent check on super_regularize.
bool passes_degree_scan(const Graph& host, const std::vector<int>& a,
                        const std::vector<int>& b, Rat threshold);

struct Partition {
  const Graph* host = nullptr;
  std::vector<int> exceptional;            // V_0
  std::vector<std::vector<int>> clusters;  // V_1..V_ell, each of size L
  int L = 0;
  Graph reduced;
  Rat eps, d;
  // a posteriori verification record
  bool p1_ok = false;                      // |V_0| <= eps*n + ell
  std::vector<int> p2_violators;           // vertices failing the degree bound
  bool p4_ok = false;                      // reduced edges recounted >= d
  std::vector<std::pair<int, int>> irregular_pairs;  // failed sampled check
};

// Seeded equipartition plus bounded local swap repair; emits the reduced
// graph (edge iff sampled-regular and density >= d) and the verification
// record. This checks its output instead of guaranteeing it.
Partition regular_partition(const Graph& g, Rat eps, Rat d, int ell, std::uint64_t seed,
                            int trials = 48, int refine_rounds = 40);

// Cross-edge count where an edge inside the overlap counts once, over
// |A|*|B| slots. The witness predicate for extremality.
Rat overlap_density(const Graph& g, const std::vector<int>& a, const std::vector<int>& b);

struct ExtremalWitness {
  std::vector<int> a, b;
  Rat density;
};

// Looks for two (possibly overlapping) sets within the size window
// [(1/2-alpha)n, n/2] whose density is below alpha. Exact enumeration
// with branch-and-bound for n <= 16; seeded greedy descent above that.
// "none" above n=16 is one-sided.
std::optional<ExtremalWitness> detect_alpha_extremal(const Graph& g, Rat alpha,
                                                     long long budget = 2'000'000,
                                                     std::uint64_t seed = 1);

enum class CaseKind { non_extremal, extremal_one, extremal_two };

struct ClassifyResult {
  CaseKind kind = CaseKind::non_extremal;
  std::vector<int> a, b, c;   // extremal_one: near-cliques + leftover;
                              // extremal_two: sparse side + rest
  bool cleanup_ok = true;
  std::string note;
};

// Dispatcher: detect, split by witness overlap, then greedy profile
// cleanup with alpha' = 4*alpha. Requires the theorem's degree bound.
ClassifyResult classify_case(const Graph& g, int r, Rat alpha, long long budget = 2'000'000,
                             std::uint64_t seed = 1);

struct EmbedOptions {
  bool half = false;              // thin every other join to "minus matching"
  bool first_join_reduced = true; // which alternation phase (half only)
  long long max_nodes = 4'000'000;
  // 0 explores vertices in sorted order; anything else seeds a shuffled
  // exploration order, turning repeated calls into randomized restarts
  std::uint64_t order_seed = 0;
};

struct EmbedResult {
  bool ok = false;
  bool budget_exhausted = false;
  std::vector<std::vector<int>> tuples;  // alternating a-side, b-side
  std::vector<Edge> edges;
  std::size_t deepest = 0;  // deepest block frontier reached
  long long nodes = 0;
};

// Spanning s-blow-up of a path across (a,b), first tuple inside start
// (subset of a), last tuple inside end (subset of b). Empty constraint
// means unconstrained. Backtracking over ordered tuples with
// degree-feasibility (Hall-style) pruning; deterministic.
EmbedResult embed_spanning_path_blowup(const Graph& host, const std::vector<int>& a,
                                       const std::vector<int>& b, int s,
                                       const std::vector<int>& start,
                                       const std::vector<int>& end, EmbedOptions opt = {});

}  // namespace spanreg
