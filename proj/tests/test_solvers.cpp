#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "spanreg/errors.hpp"
#include "spanreg/oracle.hpp"
#include "spanreg/solvers.hpp"

using namespace spanreg;

namespace {

// Two cliques of sizes na, nb with a modular cross pattern: side-b vertex j
// reaches the d side-a vertices (j*d+t) mod na, t = 0..d-1.
Graph clique_pair(int na, int nb, int d) {
  std::vector<Edge> es;
  for (int i = 0; i < na; ++i)
    for (int j = i + 1; j < na; ++j) es.push_back({i, j});
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) es.push_back({na + i, na + j});
  for (int j = 0; j < nb; ++j)
    for (int t = 0; t < d; ++t) es.push_back({(j * d + t) % na, na + j});
  return Graph(na + nb, std::move(es));
}

Graph with_universal(const Graph& g) {
  std::vector<Edge> es = g.edges();
  for (int v = 0; v < g.n(); ++v) es.push_back({v, g.n()});
  return Graph(g.n() + 1, std::move(es));
}

std::vector<int> range_vec(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

const SolveStage* find_stage(const SolveResult& res, const std::string& name) {
  for (const auto& st : res.stages)
    if (st.name == name) return &st;
  return nullptr;
}

void check_solved(const Graph& g, const SolveResult& res, int r) {
  REQUIRE(res.ok);
  CHECK(res.failed_stage.empty());
  CHECK(res.report.spanning);
  CHECK(res.report.regular);
  CHECK(res.report.kappa_ok);
  CHECK(res.report.kappa >= r);
  CHECK(static_cast<long long>(res.cert.edges.size()) == static_cast<long long>(g.n()) * r / 2);
  const SolveStage* verify = find_stage(res, "verify");
  REQUIRE(verify != nullptr);
  CHECK(verify->ok);
}

// Complete bipartite sides of sizes na, nb plus explicit internal edges
// (given in global ids).
Graph bipartite_plus(int na, int nb, const std::vector<Edge>& internal) {
  std::vector<Edge> es = internal;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) es.push_back({i, na + j});
  return Graph(na + nb, std::move(es));
}

}  // namespace

TEST_CASE("decomposition factory checks the partition") {
  Graph g = testutil::complete_graph(8);
  SUBCASE("valid case one") {
    ExtremalDecomposition dec = make_extremal_decomposition(
        g, ExtremalCase::one, {3, 1, 0, 2}, {4, 5, 6}, {7}, {1, 10});
    CHECK(dec.kind == ExtremalCase::one);
    CHECK(dec.a == range_vec(0, 4));
    CHECK(dec.b == std::vector<int>{4, 5, 6});
    CHECK(dec.c == std::vector<int>{7});
    CHECK(dec.m == 0);
  }
  SUBCASE("valid case two computes the imbalance and orders the sides") {
    ExtremalDecomposition dec = make_extremal_decomposition(
        g, ExtremalCase::two, {3, 4, 5, 6, 7}, {0, 1, 2}, {}, {1, 4});
    CHECK(dec.a == std::vector<int>{0, 1, 2});
    CHECK(dec.b == std::vector<int>{3, 4, 5, 6, 7});
    CHECK(dec.m == 1);
  }
  SUBCASE("overlapping classes are rejected") {
    CHECK_THROWS_AS(make_extremal_decomposition(g, ExtremalCase::one, {0, 1, 2, 3}, {3, 4, 5, 6},
                                                {7}, {1, 10}),
                    domain_error);
  }
  SUBCASE("missing vertices are rejected") {
    CHECK_THROWS_AS(
        make_extremal_decomposition(g, ExtremalCase::one, {0, 1, 2}, {4, 5, 6}, {7}, {1, 10}),
        domain_error);
  }
  SUBCASE("alpha outside (0, 1/4] is rejected") {
    CHECK_THROWS_AS(make_extremal_decomposition(g, ExtremalCase::one, range_vec(0, 4),
                                                range_vec(4, 8), {}, {0, 10}),
                    domain_error);
    CHECK_THROWS_AS(make_extremal_decomposition(g, ExtremalCase::one, range_vec(0, 4),
                                                range_vec(4, 8), {}, {1, 3}),
                    domain_error);
  }
  SUBCASE("leftover set beyond the alpha budget is rejected") {
    CHECK_THROWS_AS(make_extremal_decomposition(g, ExtremalCase::one, {2, 3, 4}, {5, 6, 7},
                                                {0, 1}, {1, 10}),
                    domain_error);
  }
  SUBCASE("case two rejects a leftover set and odd orders") {
    CHECK_THROWS_AS(make_extremal_decomposition(g, ExtremalCase::two, {0, 1, 2}, {4, 5, 6, 7},
                                                {3}, {1, 4}),
                    domain_error);
    Graph g7 = testutil::complete_graph(7);
    CHECK_THROWS_AS(make_extremal_decomposition(g7, ExtremalCase::two, {0, 1, 2}, {3, 4, 5, 6},
                                                {}, {1, 4}),
                    domain_error);
  }
  SUBCASE("imbalance beyond the alpha budget is rejected") {
    Graph g12 = testutil::complete_graph(12);
    CHECK_THROWS_AS(make_extremal_decomposition(g12, ExtremalCase::two, range_vec(0, 3),
                                                range_vec(3, 12), {}, {1, 6}),
                    domain_error);
  }
  SUBCASE("sides below the near-half floor are rejected") {
    Graph g20 = testutil::complete_graph(20);
    CHECK_THROWS_AS(make_extremal_decomposition(g20, ExtremalCase::one, {0}, range_vec(1, 19),
                                                {19}, {1, 20}),
                    domain_error);
  }
}

TEST_CASE("disjoint star harvest") {
  SUBCASE("six-cycle yields the frozen pair of stars") {
    std::vector<Star> stars = find_disjoint_stars(testutil::cycle_graph(6), 1, 2);
    REQUIRE(stars.size() == 2);
    CHECK(stars[0].center == 0);
    CHECK(stars[0].leaves == std::vector<int>{1, 5});
    CHECK(stars[1].center == 3);
    CHECK(stars[1].leaves == std::vector<int>{2, 4});
  }
  SUBCASE("zero stars is an empty list") {
    CHECK(find_disjoint_stars(testutil::cycle_graph(6), 0, 2).empty());
  }
  SUBCASE("degree floor is enforced") {
    Graph star = testutil::complete_bipartite(1, 4);
    CHECK_THROWS_AS(find_disjoint_stars(star, 1, 2), domain_error);
  }
  SUBCASE("seeded graphs always yield disjoint, well-formed stars") {
    for (int seed = 1; seed <= 10; ++seed) {
      Rng rng(static_cast<std::uint64_t>(seed));
      int s = 2 + seed % 2;
      int m = 1 + seed % 3;
      Graph g = testutil::random_graph_min_degree(40, 0.85, 27, rng);
      std::vector<Star> stars = find_disjoint_stars(g, m, s);
      REQUIRE(static_cast<int>(stars.size()) == 2 * m);
      std::set<int> seen;
      for (const Star& st : stars) {
        CHECK(static_cast<int>(st.leaves.size()) == s);
        CHECK(seen.insert(st.center).second);
        for (int l : st.leaves) {
          CHECK(seen.insert(l).second);
          CHECK(g.has_edge(st.center, l));
        }
      }
    }
  }
}

TEST_CASE("degree floor preconditions on the solvers") {
  Graph c6 = testutil::cycle_graph(6);
  ExtremalDecomposition dec =
      make_extremal_decomposition(c6, ExtremalCase::one, {0, 1, 2}, {3, 4, 5}, {}, {1, 4});
  SUBCASE("kind mismatch") {
    CHECK_THROWS_AS(solve_extremal_two(c6, dec, 2), domain_error);
  }
  SUBCASE("minimum degree below the floor") {
    CHECK_THROWS_AS(solve_extremal_one(c6, dec, 3), domain_error);
  }
  SUBCASE("odd vertex-degree product") {
    Graph k5 = testutil::complete_graph(5);
    ExtremalDecomposition d5 =
        make_extremal_decomposition(k5, ExtremalCase::one, {0, 1}, {2, 3, 4}, {}, {1, 4});
    CHECK_THROWS_AS(solve_extremal_one(k5, d5, 3), domain_error);
  }
}

TEST_CASE("two near-cliques close into a Hamilton cycle") {
  Graph g(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {0, 3}, {1, 4}, {2, 5}});
  ExtremalDecomposition dec =
      make_extremal_decomposition(g, ExtremalCase::one, {0, 1, 2}, {3, 4, 5}, {}, {1, 4});
  SolveResult res = solve_extremal_one(g, dec, 2);
  check_solved(g, res, 2);
  CHECK(res.report.kappa == 2);
  FactorSearch oracle = brute_force_spanning(g, 2);
  CHECK(oracle.status == SearchStatus::found);
}

TEST_CASE("even degree pipeline with the exact footprint") {
  Graph g = clique_pair(20, 20, 4);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 20), range_vec(20, 40), {}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 4);
  check_solved(g, res, 4);
  for (const char* name : {"cross_matching", "bridges", "glue_bridges", "divisibility", "closure"}) {
    const SolveStage* st = find_stage(res, name);
    REQUIRE(st != nullptr);
    CHECK(st->ok);
  }
}

TEST_CASE("even degree pipeline embeds the side remainders") {
  Graph g = clique_pair(24, 24, 4);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 24), range_vec(24, 48), {}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 4);
  check_solved(g, res, 4);
}

TEST_CASE("even degree pipeline trims an odd side with a shift absorber") {
  Graph g = clique_pair(33, 20, 9);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 33), range_vec(33, 53), {}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 4);
  check_solved(g, res, 4);
}

TEST_CASE("even degree pipeline absorbs a leftover vertex") {
  Graph g = with_universal(clique_pair(29, 20, 6));
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 29), range_vec(29, 49), {49}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 4);
  check_solved(g, res, 4);
  const SolveStage* st = find_stage(res, "absorb_exceptional");
  REQUIRE(st != nullptr);
  CHECK(st->detail == "1 leftover vertices");
}

TEST_CASE("odd degree pipeline with the exact footprint") {
  Graph g = clique_pair(20, 20, 2);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 20), range_vec(20, 40), {}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 3);
  check_solved(g, res, 3);
}

TEST_CASE("odd degree pipeline rides a special cross edge on odd sides") {
  Graph g = clique_pair(21, 21, 2);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 21), range_vec(21, 42), {}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 3);
  check_solved(g, res, 3);
  const SolveStage* st = find_stage(res, "cross_matching");
  REQUIRE(st != nullptr);
  CHECK(st->detail == "3 disjoint cross edges");
}

TEST_CASE("odd degree pipeline absorbs a leftover vertex") {
  Graph g = with_universal(clique_pair(31, 20, 7));
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 31), range_vec(31, 51), {51}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 3);
  check_solved(g, res, 3);
}

TEST_CASE("odd degree pipeline fixes divisibility with a paired absorber") {
  Graph g = clique_pair(30, 20, 7);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::one, range_vec(0, 30), range_vec(30, 50), {}, {1, 10});
  SolveResult res = solve_extremal_one(g, dec, 3);
  check_solved(g, res, 3);
}

TEST_CASE("undersized near-clique hosts fail honestly at the bridge stage") {
  SUBCASE("two twelve-cliques with a four-regular cross") {
    Graph g = clique_pair(12, 12, 4);
    ExtremalDecomposition dec = make_extremal_decomposition(
        g, ExtremalCase::one, range_vec(0, 12), range_vec(12, 24), {}, {1, 10});
    SolveResult res = solve_extremal_one(g, dec, 4);
    CHECK_FALSE(res.ok);
    CHECK(res.failed_stage == "bridges");
  }
  SUBCASE("uneven cliques with a universal leftover vertex") {
    Graph g = with_universal(clique_pair(11, 10, 3));
    ExtremalDecomposition dec = make_extremal_decomposition(
        g, ExtremalCase::one, range_vec(0, 11), range_vec(11, 21), {21}, {1, 10});
    SolveResult res = solve_extremal_one(g, dec, 3);
    CHECK_FALSE(res.ok);
    CHECK(res.failed_stage == "bridges");
  }
}

TEST_CASE("balanced near-bipartition with side matchings") {
  std::vector<Edge> pm;
  for (int i = 0; i < 16; i += 2) pm.push_back({i, i + 1});
  Graph g = bipartite_plus(8, 8, pm);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 8), range_vec(8, 16), {}, {3, 100});
  SolveResult res = solve_extremal_two(g, dec, 4);
  check_solved(g, res, 4);
  for (const char* name : {"harvest", "start", "balance_one", "balance_two", "closure"}) {
    const SolveStage* st = find_stage(res, name);
    REQUIRE(st != nullptr);
    CHECK(st->ok);
  }
}

TEST_CASE("small near-bipartition matches the exhaustive search") {
  Graph g = bipartite_plus(4, 4, {{0, 1}, {2, 3}, {4, 5}, {6, 7}});
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 4), range_vec(4, 8), {}, {1, 8});
  SolveResult res = solve_extremal_two(g, dec, 3);
  check_solved(g, res, 3);
  CHECK(res.report.kappa == 3);
  FactorSearch oracle = brute_force_spanning(g, 3);
  CHECK(oracle.status == SearchStatus::found);
}

TEST_CASE("imbalanced near-bipartition routes a degree-r unit") {
  // One dense side-b vertex carries the imbalance as a K_{1,4} unit.
  std::vector<Edge> internal = {{7, 8},   {7, 9},   {7, 10},  {7, 11},  {7, 12},
                                {8, 9},   {10, 11}, {12, 13}, {13, 14}, {14, 15},
                                {12, 15}};
  Graph g = bipartite_plus(7, 9, internal);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 7), range_vec(7, 16), {}, {1, 16});
  SolveResult res = solve_extremal_two(g, dec, 4);
  check_solved(g, res, 4);
  const SolveStage* st = find_stage(res, "harvest");
  REQUIRE(st != nullptr);
  CHECK(st->detail.find("k1r 1") != std::string::npos);
}

TEST_CASE("imbalanced near-bipartition absorbs a star pair") {
  std::vector<Edge> internal;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) internal.push_back({i, j});
  for (int i = 0; i < 10; ++i) internal.push_back({8 + i, 8 + (i + 1) % 10});
  Graph g(18, std::move(internal));
  std::vector<Edge> es = g.edges();
  for (int i = 0; i < 8; ++i)
    for (int j = 8; j < 18; ++j) es.push_back({i, j});
  g = Graph(18, std::move(es));
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 8), range_vec(8, 18), {}, {1, 12});
  SolveResult res = solve_extremal_two(g, dec, 3);
  check_solved(g, res, 3);
  const SolveStage* st = find_stage(res, "harvest");
  REQUIRE(st != nullptr);
  CHECK(st->detail.find("stars 2") != std::string::npos);
}

TEST_CASE("wide imbalance absorbs two star pairs") {
  std::vector<Edge> internal;
  for (int i = 0; i < 32; ++i) {
    internal.push_back({28 + i, 28 + (i + 1) % 32});
    internal.push_back({28 + i, 28 + (i + 2) % 32});
  }
  Graph g = bipartite_plus(28, 32, internal);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 28), range_vec(28, 60), {}, {1, 20});
  SolveResult res = solve_extremal_two(g, dec, 4);
  check_solved(g, res, 4);
  const SolveStage* st = find_stage(res, "harvest");
  REQUIRE(st != nullptr);
  CHECK(st->detail.find("stars 4") != std::string::npos);
}

TEST_CASE("units consuming both sides exactly close with a direct join") {
  // Two K_{1,4} units inside a complete side-b interior; the remainder after
  // absorption is empty on both sides.
  std::vector<Edge> internal;
  for (int i = 8; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) internal.push_back({i, j});
  Graph g = bipartite_plus(8, 12, internal);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 8), range_vec(8, 20), {}, {1, 10});
  SolveResult res = solve_extremal_two(g, dec, 4);
  check_solved(g, res, 4);
  const SolveStage* st = find_stage(res, "closure");
  REQUIRE(st != nullptr);
  CHECK(st->detail == "direct join");
}

TEST_CASE("unit harvest fails honestly when dense centers collide") {
  // Both dense vertices are neighbors, so the first unit swallows the
  // second center as a leaf.
  std::vector<Edge> internal;
  for (int v = 9; v < 18; ++v) internal.push_back({8, v});
  for (int v = 10; v < 18; ++v) internal.push_back({9, v});
  for (int i = 0; i < 8; ++i) internal.push_back({10 + i, 10 + (i + 1) % 8});
  internal.push_back({18, 19});
  internal.push_back({18, 10});
  internal.push_back({18, 11});
  internal.push_back({19, 12});
  internal.push_back({19, 13});
  Graph g = bipartite_plus(8, 12, internal);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 8), range_vec(8, 20), {}, {1, 10});
  SolveResult res = solve_extremal_two(g, dec, 4);
  CHECK_FALSE(res.ok);
  CHECK(res.failed_stage == "harvest");
}

TEST_CASE("exceptional vertex is forced into the structure") {
  // Vertex 0 sees only four side-b vertices; the absorber threads it through
  // a forced column.
  std::vector<Edge> es;
  for (int v = 1; v < 30; ++v) es.push_back({0, v});
  for (int i = 0; i < 30; ++i) es.push_back({30 + i, 30 + (i + 1) % 30});
  for (int i = 1; i < 30; ++i)
    for (int j = 30; j < 60; ++j) es.push_back({i, j});
  for (int j = 30; j < 34; ++j) es.push_back({0, j});
  Graph g(60, std::move(es));
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 30), range_vec(30, 60), {}, {1, 100});
  SolveResult res = solve_extremal_two(g, dec, 4);
  check_solved(g, res, 4);
  const SolveStage* st = find_stage(res, "absorb_exceptional");
  REQUIRE(st != nullptr);
  CHECK(st->detail == "1+0 low-cross vertices");
}

TEST_CASE("bipartite host closes into a Hamilton cycle through the pipeline") {
  Graph g = testutil::complete_bipartite(6, 6);
  ExtremalDecomposition dec = make_extremal_decomposition(
      g, ExtremalCase::two, range_vec(0, 6), range_vec(6, 12), {}, {1, 12});
  SolveResult res = solve_extremal_two(g, dec, 2);
  check_solved(g, res, 2);
  CHECK(res.report.kappa == 2);
}
