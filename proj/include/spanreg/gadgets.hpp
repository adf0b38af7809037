#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spanreg/graph.hpp"

namespace spanreg {

// Deficiency tags for live tuple ends.  A tuple tagged needs_full_join is
// short by |tuple| edges per vertex; needs_join_minus_matching is short by
// |tuple|-1.  Two ends may be joined directly only when their tags agree.
enum class Tag { needs_full_join, needs_join_minus_matching };

int tuple_width(int r);
int end_deficiency(Tag tag, int width);

struct EndTuple {
  std::vector<int> verts;  // order matters for aligned (minus-matching) joins
  Tag tag = Tag::needs_full_join;
  std::string label;
};

// One embedded gadget.  `roles` names every vertex the gadget touches;
// `attach` lists vertices whose degree completes outside this unit (previous
// path ends, cross-matching endpoints); `consumed` is the newly claimed set.
struct GadgetEmbedding {
  std::string kind;
  std::vector<std::pair<std::string, int>> roles;
  std::vector<Edge> edges;
  std::vector<int> consumed;
  std::vector<int> attach;
  std::vector<EndTuple> ends;

  void add_role(const std::string& name, int v);
  int role(const std::string& name) const;  // throws domain_error if absent
};

struct GadgetResult {
  bool ok = false;
  GadgetEmbedding emb;
  std::string role;    // unsatisfiable role on failure
  std::string reason;
};

GadgetResult gadget_ok(GadgetEmbedding emb);
GadgetResult gadget_fail(std::string role, std::string reason);

struct EmbeddingCheck {
  bool ok = true;
  std::string detail;
};

// Full structural scan: edges in host, endpoints within roles, consumed =
// roles minus attach, interior degree exactly r, end deficiency per tag.
EmbeddingCheck validate_embedding(const Graph& g, const GadgetEmbedding& emb, int r);

// Edges of the join two equal-tagged ends need: complete bipartite for
// needs_full_join, complete minus the positional matching otherwise.
std::vector<Edge> join_edges(const EndTuple& x, const EndTuple& y);

std::string embedding_to_json(const GadgetEmbedding& emb);
std::string embedding_to_dot(const GadgetEmbedding& emb);

// k vertex-disjoint cross edges whose endpoints each have at least
// well_conn_frac * n(g) neighbors on their own side, plus `special` extra
// disjoint cross edges whose endpoints only need special_min_deg same-side
// neighbors.  Endpoints land in attach.
GadgetResult find_cross_matching(const Graph& g, const std::vector<int>& a,
                                 const std::vector<int>& b, int k, Rat well_conn_frac,
                                 int special = 0, int special_min_deg = 0);

// Two-cross-edge bridge unit.  Each side is a four-column segment
// [end][x1-col][x2-col][end]; even r joins are complete with the x-pair
// dropped in the middle, odd r alternates minus-matching joins so every
// interior vertex lands on degree r.  Ends are labeled a_left, a_right,
// b_left, b_right, all tagged needs_full_join.
GadgetResult build_bridge(const Graph& g, Edge cross1, Edge cross2,
                          const std::vector<int>& pool_a, const std::vector<int>& pool_b,
                          int r);
GadgetResult build_bridge_even(const Graph& g, Edge cross1, Edge cross2,
                               const std::vector<int>& pool_a,
                               const std::vector<int>& pool_b, int r);

// Odd-r single-cross bridge: a four-column minus-matching segment per side
// whose middle join has (r-1)/2 disjoint edges subdivided through the rider
// vertex.  Consumes an odd number of vertices per side.
GadgetResult build_rider_bridge(const Graph& g, Edge cross,
                                const std::vector<int>& pool_a,
                                const std::vector<int>& pool_b, int r);

// Inserts j fresh blocks between two ends (j = 0 joins them directly).  Odd r
// requires equal tags for even j and differing tags for odd j; the join
// sequence alternates so each fresh vertex lands on degree r exactly.
GadgetResult connect_ends(const Graph& g, const EndTuple& x, const EndTuple& y,
                          const std::vector<int>& pool, int r, int j = 2);
GadgetResult glue_GE(const Graph& g, const EndTuple& d1, const EndTuple& d2,
                     const std::vector<int>& pool, int r);
GadgetResult glue_GO(const Graph& g, const EndTuple& d1, const EndTuple& d2,
                     const std::vector<int>& pool, int r);

enum class AbsorberKind { xi_even, xi_prime_even, xi_odd, xi_prime_odd };

// Absorbs one target vertex (two adjacent targets for xi_prime_odd) into a
// path segment with two live ends, selecting helper vertices lowest-id-first
// from the pool.
GadgetResult build_absorber(const Graph& g, AbsorberKind kind,
                            const std::vector<int>& targets,
                            const std::vector<int>& pool, int r);

struct Star {
  int center;
  std::vector<int> leaves;
};

// A growing r-regular path structure; front/back are the live ends.
struct PathStructure {
  int r = 0;
  int s = 0;
  std::vector<GadgetEmbedding> segments;
  std::vector<Edge> edges;
  std::vector<int> used;  // sorted
  EndTuple front, back;

  void absorb(const GadgetEmbedding& emb);
};

struct PathCheck {
  bool ok = true;
  std::string detail;
};

// Cumulative scan: interior degree r over all segments, end deficiency per
// tag, no vertex claimed twice.
PathCheck validate_path(const Graph& g, const PathStructure& ps);

// Starts a structure from a complete join between an a-side and b-side tuple.
GadgetResult make_path_start(const Graph& g, const std::vector<int>& a_tuple,
                             const std::vector<int>& b_tuple, int r,
                             PathStructure* out);

// Extends the back end by one fresh block from the pool; the join type is the
// end's tag, and for odd r the new end's tag flips.
GadgetResult extend_block(const Graph& g, PathStructure& ps,
                          const std::vector<int>& pool);

// Absorbs two K_{1,s} stars (centers and leaves on the back end's side).
// Even r applies the one-star unit twice; odd r applies the coupled two-star
// unit.  Fresh columns come from pool_a on the opposite side; pool_b is only
// consulted where a pattern needs a fresh vertex on the star side.
GadgetResult extend_with_star_pair(const Graph& g, PathStructure& ps, const Star& s1,
                                   const Star& s2, const std::vector<int>& pool_a,
                                   const std::vector<int>& pool_b);

// List form used by the solvers: absorbs stars two at a time; an empty list
// leaves the structure unchanged.
GadgetResult extend_with_stars(const Graph& g, PathStructure& ps,
                               const std::vector<Star>& stars,
                               const std::vector<int>& pool_a,
                               const std::vector<int>& pool_b);

// Absorbs one K_{1,r}; the center's structure edges are exactly its star
// edges, so its other adjacencies are never consulted.
GadgetResult extend_with_K1r(const Graph& g, PathStructure& ps, const Star& star,
                             const std::vector<int>& pool_a,
                             const std::vector<int>& pool_b);

// Joins front to back through j filler blocks (see connect_ends), turning the
// structure into a closed r-regular graph on `used`.
GadgetResult close_path(const Graph& g, PathStructure& ps,
                        const std::vector<int>& pool, int j);

}  // namespace spanreg
