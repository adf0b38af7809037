#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "spanreg/blowup.hpp"
#include "spanreg/errors.hpp"
#include "spanreg/oracle.hpp"
#include "spanreg/verifier.hpp"

using namespace spanreg;
using testutil::complete_graph;
using testutil::cycle_graph;

TEST_CASE("K4 has a unique 3-regular spanning subgraph: itself") {
  FactorSearch res = brute_force_spanning(complete_graph(4), 3);
  CHECK(res.status == SearchStatus::found);
  std::vector<Edge> es = res.cert.edges;
  std::sort(es.begin(), es.end());
  CHECK(es == complete_graph(4).edges());
}

TEST_CASE("K5 yields the first Hamilton cycle in search order") {
  FactorSearch res = brute_force_spanning(complete_graph(5), 2);
  REQUIRE(res.status == SearchStatus::found);
  std::vector<Edge> es = res.cert.edges;
  std::sort(es.begin(), es.end());
  // include-first over id-ordered edges lands on the cycle 0-1-3-4-2-0
  CHECK(es == std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 4}});
  CHECK(verify_certificate(complete_graph(5), res.cert).ok);
}

TEST_CASE("parity-impossible requests are domain errors") {
  CHECK_THROWS_AS(brute_force_spanning(cycle_graph(5), 3), domain_error);
  CHECK_THROWS_AS(brute_force_spanning(complete_graph(4), 4), domain_error);
}

TEST_CASE("cut vertex kills every 2-connected spanning subgraph") {
  Graph g = build_tightness_example(8, 2, 1);  // two K_5 sharing one vertex
  CHECK(g.n() == 9);
  FactorSearch res = brute_force_spanning(g, 2);
  CHECK(res.status == SearchStatus::none);
  CHECK(res.nodes == 0);  // connectivity precheck settles it
}

TEST_CASE("tightness generator meets the threshold exactly at slack 0") {
  Graph g = build_tightness_example(12, 4, 0);
  CHECK(g.n() == 12);
  CHECK(g.min_degree() == 7);  // (12+4-2)/2
  CHECK(vertex_connectivity(g) == 4);

  Graph h = build_tightness_example(12, 4, 1);
  CHECK(h.n() == 13);
  CHECK(vertex_connectivity(h) == 3);
  CHECK(brute_force_spanning(h, 4).status == SearchStatus::none);

  CHECK_THROWS_AS(build_tightness_example(11, 4, 0), domain_error);
  CHECK_THROWS_AS(build_tightness_example(8, 2, 2), domain_error);
  CHECK_THROWS_AS(build_tightness_example(9, 2, 0), domain_error);
}

TEST_CASE("divisibility example shape and degree") {
  Graph g = build_divisibility_example(10);
  CHECK(g.n() == 10);
  CHECK(g.min_degree() == 6);  // n/2 + 1
  // extras are mutually non-adjacent
  CHECK_FALSE(g.has_edge(6, 7));
  CHECK(g.degree(6) == 6);
  CHECK_THROWS_AS(build_divisibility_example(12), domain_error);
  CHECK_THROWS_AS(build_divisibility_example(11), domain_error);
  CHECK_THROWS_AS(build_divisibility_example(8), domain_error);
}

TEST_CASE("blow-up cycle search finds itself on a blow-up host") {
  Graph host = build_blowup({Base::cycle, 5, 2, false});
  BlowupSearch res = search_spanning_blowup_cycle(host, 2);
  REQUIRE(res.status == SearchStatus::found);
  CHECK(res.edges == host.edges());
}

TEST_CASE("blow-up cycle search succeeds on complete hosts") {
  BlowupSearch res = search_spanning_blowup_cycle(complete_graph(10), 2);
  REQUIRE(res.status == SearchStatus::found);
  CHECK(res.edges.size() == 20);
  // found edges form a spanning 4-regular subgraph of K_10
  Graph h(10, res.edges);
  CHECK(is_r_regular(h, 4));
}

TEST_CASE("blow-up cycle search preconditions") {
  CHECK_THROWS_AS(search_spanning_blowup_cycle(complete_graph(9), 2), domain_error);
  CHECK_THROWS_AS(search_spanning_blowup_cycle(complete_graph(4), 2), domain_error);
}

TEST_CASE("budget exhaustion reports unknown, not none") {
  FactorSearch res = brute_force_spanning(complete_graph(10), 3, SearchBudget{5});
  CHECK(res.status == SearchStatus::unknown);
  BlowupSearch bres = search_spanning_blowup_cycle(complete_graph(12), 2, SearchBudget{3});
  CHECK(bres.status == SearchStatus::unknown);
}

TEST_CASE("found certificates always verify on dense Dirac hosts") {
  Rng rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 8 + 2 * rng.below_int(3);
    Graph g = testutil::random_graph_min_degree(n, 0.7, (n + 1) / 2, rng);
    FactorSearch res = brute_force_spanning(g, 2);
    REQUIRE(res.status == SearchStatus::found);  // Dirac guarantees a Hamilton cycle
    CHECK(verify_certificate(g, res.cert).ok);
  }
}

TEST_CASE("r=0 factor is the empty graph") {
  FactorSearch res = brute_force_spanning(cycle_graph(4), 0);
  CHECK(res.status == SearchStatus::found);
  CHECK(res.cert.edges.empty());
}
