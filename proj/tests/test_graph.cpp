#include "doctest.h"
#include "spanreg/errors.hpp"
#include "spanreg/graph.hpp"
#include "spanreg/graph_io.hpp"
#include "spanreg/rng.hpp"

using namespace spanreg;

namespace {

Graph cycle(int n) {
  std::vector<Edge> es;
  for (int i = 0; i < n; ++i) es.push_back({i, (i + 1) % n});
  return Graph(n, std::move(es));
}

Graph complete(int n) {
  std::vector<Edge> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) es.push_back({i, j});
  return Graph(n, std::move(es));
}

}  // namespace

TEST_CASE("graph construction normalizes and validates edges") {
  Graph g(4, {{2, 0}, {1, 3}, {0, 1}});
  CHECK(g.n() == 4);
  CHECK(g.m() == 3);
  CHECK(g.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}});
  CHECK(g.has_edge(2, 0));
  CHECK_FALSE(g.has_edge(2, 3));
  CHECK_THROWS_AS(Graph(3, {{0, 0}}), domain_error);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), domain_error);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), domain_error);
}

TEST_CASE("degrees and neighborhoods on a cycle") {
  Graph g = cycle(6);
  CHECK(g.min_degree() == 2);
  CHECK(g.max_degree() == 2);
  CHECK(g.neighbors(0) == std::vector<int>{1, 5});
  CHECK(g.degree_into(0, {1, 2, 3}) == 1);
  CHECK(g.is_connected());
  Graph two(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(two.is_connected());
}

TEST_CASE("common neighbors intersects adjacency rows") {
  Graph g = complete(5);
  CHECK(common_neighbors(g, {0, 1}) == std::vector<int>{2, 3, 4});
  Graph c = cycle(5);
  CHECK(common_neighbors(c, {0, 2}) == std::vector<int>{1});
  CHECK(common_neighbors(c, {0, 1, 2}).empty());
}

TEST_CASE("edge counting between overlapping sets counts each edge once") {
  Graph g = complete(4);
  CHECK(edges_between(g, {0, 1}, {2, 3}) == 4);
  CHECK(edges_between(g, {0, 1, 2}, {1, 2, 3}) == 6);  // all edges touch both sets
  CHECK(edges_between(g, {0}, {0}) == 0);
}

TEST_CASE("pair density is exact") {
  Graph c4 = cycle(4);
  CHECK(pair_density(c4, {0, 2}, {1, 3}) == Rat(1, 1));
  Graph p(3, {{0, 1}});
  CHECK(pair_density(p, {0}, {1, 2}) == Rat(1, 2));
  CHECK_THROWS_AS(pair_density(p, {0, 1}, {1, 2}), domain_error);
  CHECK(Rat(2, 4) == Rat(1, 2));
  CHECK(Rat(1, 3) < Rat(1, 2));
  CHECK(Rat(-2, -4) == Rat(1, 2));
}

TEST_CASE("induced subgraph preserves adjacency through the map") {
  Graph g = cycle(6);
  Graph h = induced_subgraph(g, {0, 1, 3, 4});
  CHECK(h.n() == 4);
  CHECK(h.m() == 2);  // 0-1 and 3-4 survive
  CHECK(h.has_edge(0, 1));
  CHECK(h.has_edge(2, 3));
}

TEST_CASE("relabel permutes vertex ids") {
  Graph g(3, {{0, 1}});
  Graph h = relabel(g, {2, 1, 0});
  CHECK(h.has_edge(2, 1));
  CHECK_FALSE(h.has_edge(0, 1));
}

TEST_CASE("json round trip") {
  Graph g = cycle(5);
  Graph h = from_json(to_json(g));
  CHECK(h.n() == g.n());
  CHECK(h.edges() == g.edges());
  CHECK_THROWS_AS(from_json("{\"n\": 3}"), domain_error);
  CHECK_THROWS_AS(from_json("not json"), domain_error);
  CHECK(to_json(Graph(2, {{0, 1}})) == "{\"edges\":[[0,1]],\"n\":2}");
}

TEST_CASE("dot output lists vertices then edges") {
  std::string dot = to_dot(Graph(2, {{0, 1}}));
  CHECK(dot == "graph {\n  0;\n  1;\n  0 -- 1;\n}\n");
}

TEST_CASE("rng determinism and bounds") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.below(17) == b.below(17));
  Rng c(7);
  for (int i = 0; i < 1000; ++i) {
    auto x = c.below(10);
    CHECK(x < 10);
    double u = c.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  auto s = c.sample(20, 5);
  CHECK(s.size() == 5);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
}
