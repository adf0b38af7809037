#include "doctest.h"
#include "spanreg/errors.hpp"
#include "spanreg/graph.hpp"
#include "spanreg/rng.hpp"
#include "spanreg/verifier.hpp"

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

Graph petersen() {
  std::vector<Edge> es;
  for (int i = 0; i < 5; ++i) es.push_back({i, (i + 1) % 5});
  for (int i = 0; i < 5; ++i) es.push_back({5 + i, 5 + (i + 2) % 5});
  for (int i = 0; i < 5; ++i) es.push_back({i, i + 5});
  return Graph(10, std::move(es));
}

Graph random_graph(int n, double p, Rng& rng) {
  std::vector<Edge> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.coin(p)) es.push_back({i, j});
  return Graph(n, std::move(es));
}

}  // namespace

TEST_CASE("regularity check") {
  CHECK(is_r_regular(cycle(7), 2));
  CHECK_FALSE(is_r_regular(cycle(7), 3));
  CHECK(is_r_regular(petersen(), 3));
  CHECK(is_r_regular(Graph(3, {}), 0));
}

TEST_CASE("connectivity of standard graphs") {
  CHECK(vertex_connectivity(cycle(5)) == 2);
  CHECK(vertex_connectivity(petersen()) == 3);
  CHECK(vertex_connectivity(complete(6)) == 5);
  CHECK(vertex_connectivity(Graph(1, {})) == 0);
  CHECK(vertex_connectivity(Graph(2, {{0, 1}})) == 1);
  CHECK(vertex_connectivity(Graph(4, {{0, 1}, {2, 3}})) == 0);
  // path
  CHECK(vertex_connectivity(Graph(4, {{0, 1}, {1, 2}, {2, 3}})) == 1);
  // two triangles sharing vertex 2
  CHECK(vertex_connectivity(Graph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4}, {3, 4}})) == 1);
  // complete bipartite K_{3,3}
  Graph k33(6, {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
  CHECK(vertex_connectivity(k33) == 3);
}

TEST_CASE("flow connectivity matches brute force on random small graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 4 + rng.below_int(5);
    Graph g = random_graph(n, 0.25 + 0.5 * rng.unit(), rng);
    CAPTURE(trial);
    CHECK(vertex_connectivity(g) == vertex_connectivity_brute(g));
  }
}

TEST_CASE("local connectivity counts disjoint paths") {
  Graph c = cycle(6);
  CHECK(local_connectivity(c, 0, 3) == 2);
  CHECK(local_connectivity(c, 0, 1) == 2);  // direct edge plus the long way
  CHECK(local_connectivity(complete(5), 0, 4) == 4);
  CHECK_THROWS_AS(local_connectivity(c, 2, 2), domain_error);
}

TEST_CASE("certificate verification accepts a valid 2-factor") {
  Graph host = complete(6);
  Certificate c;
  c.r = 2;
  for (int i = 0; i < 6; ++i) c.edges.push_back({i, (i + 1) % 6});
  VerifyReport rep = verify_certificate(host, c);
  CHECK(rep.ok);
  CHECK(rep.kappa == 2);
  CHECK(rep.host_checked);
  CHECK(rep.detail.empty());
}

TEST_CASE("certificate verification rejects each failure mode with a reason") {
  Graph host = cycle(6);
  SUBCASE("edge outside host") {
    Certificate c{2, {{0, 1}, {0, 3}}};
    VerifyReport rep = verify_certificate(host, c);
    CHECK_FALSE(rep.ok);
    CHECK(rep.detail.find("not in host") != std::string::npos);
  }
  SUBCASE("wrong degree") {
    Certificate c{2, {{0, 1}, {1, 2}}};
    VerifyReport rep = verify_certificate(host, c);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.regular);
    CHECK(rep.detail.find("degree") != std::string::npos);
  }
  SUBCASE("disconnected 2-factor fails the connectivity bar") {
    Graph host2 = complete(8);
    Certificate c;
    c.r = 2;
    for (int i = 0; i < 4; ++i) c.edges.push_back({i, (i + 1) % 4});
    for (int i = 0; i < 4; ++i) c.edges.push_back({4 + i, 4 + (i + 1) % 4});
    VerifyReport rep = verify_certificate(host2, c);
    CHECK_FALSE(rep.ok);
    CHECK(rep.regular);
    CHECK(rep.kappa == 0);
  }
}

TEST_CASE("subgraph connectivity never exceeds host connectivity") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 5 + rng.below_int(4);
    Graph g = random_graph(n, 0.5, rng);
    // random spanning subgraph: keep each edge with probability 1/2
    std::vector<Edge> kept;
    for (const auto& e : g.edges())
      if (rng.coin(0.5)) kept.push_back(e);
    Graph h(n, std::move(kept));
    CHECK(vertex_connectivity(h) <= vertex_connectivity(g));
  }
}

TEST_CASE("certificate json round trip") {
  Certificate c{3, {{2, 0}, {1, 2}}};
  int n = -1;
  Certificate d = certificate_from_json(certificate_to_json(c, 4), &n);
  CHECK(n == 4);
  CHECK(d.r == 3);
  CHECK(d.edges == std::vector<Edge>{{0, 2}, {1, 2}});
  CHECK_THROWS_AS(certificate_from_json("{}"), domain_error);
}
