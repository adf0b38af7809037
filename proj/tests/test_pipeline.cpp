#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "spanreg/errors.hpp"
#include "spanreg/pipeline.hpp"

using namespace spanreg;

namespace {

// Exact maximum matching by subset DP, for cross-checking the blossom code.
int matching_oracle(const Graph& g) {
  int n = g.n();
  std::vector<int> dp(std::size_t(1) << n, 0);
  for (int mask = 1; mask < (1 << n); ++mask) {
    int v = __builtin_ctz(static_cast<unsigned>(mask));
    int best = dp[mask ^ (1 << v)];
    for (int u : g.neighbors(v))
      if ((mask >> u) & 1) best = std::max(best, 1 + dp[mask ^ (1 << v) ^ (1 << u)]);
    dp[mask] = best;
  }
  return dp[(1 << n) - 1];
}

Graph star_graph(int leaves) {
  std::vector<Edge> es;
  for (int i = 1; i <= leaves; ++i) es.push_back({0, i});
  return Graph(leaves + 1, std::move(es));
}

Graph disjoint_cliques(int half) {
  std::vector<Edge> es;
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < half; ++i)
      for (int j = i + 1; j < half; ++j) es.push_back({s * half + i, s * half + j});
  return Graph(2 * half, std::move(es));
}

Graph two_clique_reduced(int half) {
  std::vector<Edge> es;
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < half; ++i)
      for (int j = i + 1; j < half; ++j) es.push_back({s * half + i, s * half + j});
  return Graph(2 * half, std::move(es));
}

// Consecutive equal blocks with a prescribed reduced graph; remainder
// vertices land in the exceptional set.
Partition block_partition(const Graph& host, int ell, Graph reduced) {
  Partition part;
  part.host = &host;
  int L = host.n() / ell;
  part.L = L;
  for (int c = 0; c < ell; ++c) {
    std::vector<int> cl;
    for (int i = 0; i < L; ++i) cl.push_back(c * L + i);
    part.clusters.push_back(std::move(cl));
  }
  for (int v = ell * L; v < host.n(); ++v) part.exceptional.push_back(v);
  part.reduced = std::move(reduced);
  part.eps = Rat{1, 100};
  part.d = Rat{1, 20};
  return part;
}

const SolveStage* find_stage(const std::vector<SolveStage>& stages, const std::string& name) {
  for (const auto& st : stages)
    if (st.name == name) return &st;
  return nullptr;
}

void check_certificate(const Graph& g, const SolveResult& res, int r) {
  REQUIRE(res.ok);
  CHECK(res.report.spanning);
  CHECK(res.report.regular);
  CHECK(res.report.kappa_ok);
  CHECK(res.report.kappa == r);
  CHECK(static_cast<long long>(res.cert.edges.size()) == static_cast<long long>(g.n()) * r / 2);
}

}  // namespace

TEST_CASE("maximum matching matches the subset oracle") {
  CHECK(maximum_matching(testutil::complete_graph(20)).size() == 10);
  CHECK(maximum_matching(star_graph(19)).size() == 1);
  CHECK(maximum_matching(testutil::cycle_graph(5)).size() == 2);
  CHECK(maximum_matching(testutil::cycle_graph(7)).size() == 3);
  CHECK(maximum_matching(testutil::complete_bipartite(4, 7)).size() == 4);

  Rng rng(20240817);
  for (int trial = 0; trial < 150; ++trial) {
    int n = 4 + static_cast<int>(rng.below(9));  // up to 12
    double p = 0.15 + 0.7 * rng.unit();
    Graph g = testutil::random_graph(n, p, rng);
    auto m = maximum_matching(g);
    std::set<int> touched;
    for (auto [u, v] : m) {
      CHECK(g.has_edge(u, v));
      CHECK(!touched.count(u));
      CHECK(!touched.count(v));
      touched.insert(u);
      touched.insert(v);
    }
    CHECK(static_cast<int>(m.size()) == matching_oracle(g));
  }
}

TEST_CASE("path edge enumeration honours every join kind") {
  BlowupPath p;
  p.tuples = {{0, 1}, {2, 3}, {4, 5}};
  p.joins = {JoinKind::full, JoinKind::minus_matching};
  std::vector<Edge> want = {{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 5}, {3, 4}};
  std::sort(want.begin(), want.end());
  CHECK(path_edges(p) == want);

  BlowupPath q;
  q.tuples = {{0, 1}, {2, 3}};
  q.joins = {JoinKind::minus_upper};
  CHECK(path_edges(q) == std::vector<Edge>{{0, 2}, {0, 3}, {1, 2}});
  q.joins = {JoinKind::minus_zero};
  CHECK(path_edges(q) == std::vector<Edge>{{0, 3}, {1, 2}, {1, 3}});

  BlowupPath e;
  e.tuples = {{0, 1}, {2, 3}};
  e.joins = {JoinKind::full};
  e.extra = {{0, 5}};
  CHECK(path_edges(e).size() == 5);
}

TEST_CASE("star reduced graph fails the matching floor") {
  Graph host = testutil::complete_graph(160);
  NonExtremalPipeline pipe(host, 4);
  REQUIRE(pipe.begin_with_partition(block_partition(host, 20, star_graph(19))));
  CHECK(!pipe.build_cluster_matching());
  const SolveStage* st = find_stage(pipe.stages(), "cluster_matching");
  REQUIRE(st != nullptr);
  CHECK(!st->ok);
  CHECK(st->detail.find("matching of 1") != std::string::npos);
  CHECK_THROWS_AS(pipe.connect_pairs(), std::logic_error);
}

TEST_CASE("two isolated clique families fail connection with a checkable witness") {
  Graph host = disjoint_cliques(80);
  NonExtremalPipeline pipe(host, 4);
  REQUIRE(pipe.begin_with_partition(block_partition(host, 20, two_clique_reduced(10))));
  REQUIRE(pipe.build_cluster_matching());
  CHECK(pipe.pair_count() == 10);
  CHECK(!pipe.connect_pairs());
  const SolveStage* st = find_stage(pipe.stages(), "connect_pairs");
  REQUIRE(st != nullptr);
  CHECK(!st->ok);
  REQUIRE(pipe.cut_witness().has_value());
  const SparseCutWitness& wit = *pipe.cut_witness();
  CHECK(!wit.side_a.empty());
  CHECK(!wit.side_b.empty());
  // the witness re-checks: the two cluster families span no reduced edge,
  // so their density sits under alpha/2
  const Graph& red = pipe.partition().reduced;
  long long cross = 0;
  for (int a : wit.side_a)
    for (int b : wit.side_b)
      if (a != b && red.has_edge(a, b)) ++cross;
  CHECK(cross == 0);
  Rat alpha = PipelineConstants{}.alpha;
  CHECK(rat_mul(Rat{2, 1}, wit.density) < alpha);
}

TEST_CASE("complete host runs every stage to a verified certificate") {
  Graph host = testutil::complete_graph(160);
  PipelineOptions opt;
  opt.seed = 5;
  NonExtremalPipeline pipe(host, 4, opt);

  REQUIRE(pipe.regularise());
  pipe.assert_invariants();
  const SolveStage* st = find_stage(pipe.stages(), "regularise");
  REQUIRE(st != nullptr);
  CHECK(st->detail.find("ell=20") != std::string::npos);

  REQUIRE(pipe.build_cluster_matching());
  pipe.assert_invariants();
  CHECK(pipe.pair_count() == 10);

  REQUIRE(pipe.connect_pairs());
  pipe.assert_invariants();
  st = find_stage(pipe.stages(), "connect_pairs");
  REQUIRE(st != nullptr);
  CHECK(st->detail.find("0 detours") != std::string::npos);
  CHECK(pipe.paths().size() == 10);
  for (const auto& p : pipe.paths()) {
    CHECK(p.tuples.size() == 2);
    for (const auto& t : p.tuples) CHECK(t.size() == 2);
  }

  REQUIRE(pipe.super_regularize_matching());
  pipe.assert_invariants();
  CHECK(pipe.in_flight() == 0);
  for (int p = 0; p < pipe.pair_count(); ++p) CHECK(pipe.surplus(p) == 0);

  REQUIRE(pipe.absorb_exceptional());
  pipe.assert_invariants();
  st = find_stage(pipe.stages(), "absorb_exceptional");
  REQUIRE(st != nullptr);
  CHECK(pipe.exceptional().empty());

  REQUIRE(pipe.complete_spanning());
  SolveResult res = pipe.finish();
  check_certificate(host, res, 4);
  CHECK(find_stage(res.stages, "verify") != nullptr);
}

TEST_CASE("complete host with odd degree uses the half-join lattice") {
  Graph host = testutil::complete_graph(160);
  PipelineOptions opt;
  opt.seed = 9;
  SolveResult res = solve_non_extremal(host, 3, opt);
  check_certificate(host, res, 3);
}

TEST_CASE("empty exceptional set is a recorded no-op") {
  Graph host = testutil::complete_graph(160);
  NonExtremalPipeline pipe(host, 4);
  REQUIRE(pipe.regularise());
  REQUIRE(pipe.build_cluster_matching());
  REQUIRE(pipe.connect_pairs());
  REQUIRE(pipe.super_regularize_matching());
  if (pipe.exceptional().empty()) {
    REQUIRE(pipe.absorb_exceptional());
    const SolveStage* st = find_stage(pipe.stages(), "absorb_exceptional");
    REQUIRE(st != nullptr);
    CHECK(st->detail == "exceptional set empty");
  }
}

TEST_CASE("pipeline constructor rejects bad inputs") {
  Graph host = testutil::complete_graph(160);
  CHECK_THROWS_AS(NonExtremalPipeline(host, 2), domain_error);
  CHECK_THROWS_AS(NonExtremalPipeline(testutil::complete_graph(161), 3), domain_error);
  Rng rng(3);
  Graph sparse = testutil::random_graph(80, 0.2, rng);
  CHECK_THROWS_AS(NonExtremalPipeline(sparse, 4), domain_error);
}

TEST_CASE("random dense partition yields a near-perfect cluster matching") {
  Rng rng(7);
  Graph g = testutil::random_graph_min_degree(600, 0.55, 301, rng);
  // eps = 1/5 is the honest sampled-regularity margin at cluster size 30;
  // the asymptotic default makes single-vertex subsets violators
  Partition part = regular_partition(g, Rat{1, 5}, Rat{1, 20}, 20, 7);
  auto m = maximum_matching(part.reduced);
  CHECK(m.size() >= 9);
}

TEST_CASE("random dense host r=4 end to end") {
  Rng rng(11);
  Graph g = testutil::random_graph_min_degree(600, 0.55, 301, rng);
  PipelineOptions opt;
  opt.seed = 11;
  opt.constants.eps = Rat{1, 5};
  SolveResult res = solve_non_extremal(g, 4, opt);
  check_certificate(g, res, 4);
}

TEST_CASE("random dense host r=3 end to end") {
  Rng rng(12);
  Graph g = testutil::random_graph_min_degree(600, 0.55, 301, rng);
  PipelineOptions opt;
  opt.seed = 12;
  opt.constants.eps = Rat{1, 5};
  SolveResult res = solve_non_extremal(g, 3, opt);
  check_certificate(g, res, 3);
}

TEST_CASE("leftover exceptional vertices trigger the even-degree endgame") {
  Rng rng(13);
  Graph g = testutil::random_graph_min_degree(602, 0.55, 302, rng);
  PipelineOptions opt;
  opt.seed = 13;
  opt.constants.eps = Rat{1, 5};
  NonExtremalPipeline pipe(g, 4, opt);
  REQUIRE(pipe.regularise());
  REQUIRE(pipe.build_cluster_matching());
  REQUIRE(pipe.connect_pairs());
  REQUIRE(pipe.super_regularize_matching());
  int leftover = static_cast<int>(pipe.exceptional().size());
  CHECK(leftover >= 1);
  REQUIRE(pipe.absorb_exceptional());
  CHECK(pipe.exceptional().empty());
  CHECK(pipe.in_flight() == 0);
  if (leftover % (2 * pipe.tuple_width()) != 0) CHECK(pipe.absorb_stats().endgame_even >= 1);
  REQUIRE(pipe.complete_spanning());
  SolveResult res = pipe.finish();
  check_certificate(g, res, 4);
}

TEST_CASE("leftover exceptional pair triggers the odd-degree endgame") {
  Rng rng(14);
  Graph g = testutil::random_graph_min_degree(602, 0.55, 302, rng);
  PipelineOptions opt;
  opt.seed = 14;
  opt.constants.eps = Rat{1, 5};
  NonExtremalPipeline pipe(g, 3, opt);
  REQUIRE(pipe.regularise());
  REQUIRE(pipe.build_cluster_matching());
  REQUIRE(pipe.connect_pairs());
  REQUIRE(pipe.super_regularize_matching());
  int leftover = static_cast<int>(pipe.exceptional().size());
  CHECK(leftover % 2 == 0);
  REQUIRE(pipe.absorb_exceptional());
  if (leftover > 0 && leftover < 2 * pipe.tuple_width())
    CHECK(pipe.absorb_stats().endgame_odd >= 1);
  REQUIRE(pipe.complete_spanning());
  SolveResult res = pipe.finish();
  check_certificate(g, res, 3);
}

TEST_CASE("large exceptional set exercises chains, balancing, and resets") {
  Rng rng(15);
  Graph g = testutil::random_graph_min_degree(610, 0.55, 306, rng);
  PipelineOptions opt;
  opt.seed = 15;
  opt.constants.eps = Rat{1, 5};
  opt.constants.nu = Rat{1, 200};  // force a reset after every batch
  NonExtremalPipeline pipe(g, 4, opt);
  REQUIRE(pipe.regularise());
  REQUIRE(pipe.build_cluster_matching());
  REQUIRE(pipe.connect_pairs());
  REQUIRE(pipe.super_regularize_matching());
  int leftover = static_cast<int>(pipe.exceptional().size());
  REQUIRE(pipe.absorb_exceptional());
  const AbsorbStats& st = pipe.absorb_stats();
  if (leftover >= 2 * 2 * pipe.tuple_width()) {
    CHECK(st.single >= 2);
    CHECK(st.chain >= 2);
    CHECK(st.balance >= 1);
    CHECK(st.resets >= 1);
  }
  CHECK(pipe.in_flight() == 0);
  for (int p = 0; p < pipe.pair_count(); ++p) CHECK(pipe.surplus(p) == 0);
  REQUIRE(pipe.complete_spanning());
  SolveResult res = pipe.finish();
  check_certificate(g, res, 4);
}

TEST_CASE("pipeline is deterministic under a fixed seed") {
  Graph host = testutil::complete_graph(160);
  PipelineOptions opt;
  opt.seed = 21;
  SolveResult first = solve_non_extremal(host, 4, opt);
  SolveResult second = solve_non_extremal(host, 4, opt);
  REQUIRE(first.ok);
  REQUIRE(second.ok);
  CHECK(first.cert.edges == second.cert.edges);
}
