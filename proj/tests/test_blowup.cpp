#include "doctest.h"
#include "spanreg/blowup.hpp"
#include "spanreg/errors.hpp"
#include "spanreg/verifier.hpp"

using namespace spanreg;

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(validate({Base::cycle, 2, 2, false}), domain_error);
  CHECK_THROWS_AS(validate({Base::cycle, 5, 2, true}), domain_error);
  CHECK_THROWS_AS(validate({Base::path, 0, 1, false}), domain_error);
  CHECK_THROWS_AS(validate({Base::path, 3, 0, false}), domain_error);
  CHECK_NOTHROW(validate({Base::cycle, 4, 1, true}));
}

TEST_CASE("known blow-up shapes") {
  Graph g = build_blowup({Base::cycle, 3, 2, false});
  CHECK(g.n() == 6);
  CHECK(g.m() == 12);
  CHECK(is_r_regular(g, 4));

  Graph e = build_blowup({Base::path, 2, 1, false});
  CHECK(e.n() == 2);
  CHECK(e.edges() == std::vector<Edge>{{0, 1}});

  Graph h = build_blowup({Base::cycle, 4, 2, true});
  CHECK(h.n() == 8);
  CHECK(is_r_regular(h, 3));
}

TEST_CASE("degree profiles match built graphs for all desk specs") {
  for (int k = 3; k <= 10; ++k) {
    for (int t = 1; t <= 3; ++t) {
      for (int half = 0; half <= 1; ++half) {
        for (int base = 0; base <= 1; ++base) {
          BlowupSpec spec{base ? Base::path : Base::cycle, k, t, half == 1};
          if (spec.base == Base::cycle && spec.half && k % 2) continue;
          Graph g = build_blowup(spec);
          std::vector<int> want = blowup_degree_profile(spec);
          REQUIRE(static_cast<int>(want.size()) == g.n());
          for (int v = 0; v < g.n(); ++v) {
            CAPTURE(k);
            CAPTURE(t);
            CAPTURE(half);
            CAPTURE(base);
            CAPTURE(v);
            CHECK(g.degree(v) == want[v]);
          }
        }
      }
    }
  }
}

TEST_CASE("path profiles follow ends and alternation") {
  auto p = blowup_degree_profile({Base::path, 3, 2, false});
  CHECK(p == std::vector<int>{2, 2, 4, 4, 2, 2});
  auto q = blowup_degree_profile({Base::path, 3, 2, true});
  // first edge reduced: block0 gets 1, block1 gets 1+2, block2 gets 2
  CHECK(q == std::vector<int>{1, 1, 3, 3, 2, 2});
  auto c = blowup_degree_profile({Base::cycle, 6, 3, true});
  for (int d : c) CHECK(d == 5);
}

TEST_CASE("construction is deterministic") {
  Graph a = build_blowup({Base::cycle, 8, 2, true});
  Graph b = build_blowup({Base::cycle, 8, 2, true});
  CHECK(a.edges() == b.edges());
}

TEST_CASE("cycle blow-up connectivity equals regularity degree") {
  // the acceptance suite scans the full k <= 10, t <= 3 grid; spot-check here
  CHECK(vertex_connectivity(build_blowup({Base::cycle, 5, 2, false})) == 4);
  CHECK(vertex_connectivity(build_blowup({Base::cycle, 6, 2, true})) == 3);
  CHECK(vertex_connectivity(build_blowup({Base::cycle, 4, 3, true})) == 5);
}

TEST_CASE("path blow-up recognizer") {
  std::vector<std::vector<int>> tuples = {{0, 1}, {2, 3}, {4, 5}};
  std::vector<Edge> full = {{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}};
  CHECK(is_path_blowup_on_tuples(tuples, full, false));
  CHECK_FALSE(is_path_blowup_on_tuples(tuples, full, true));
  std::vector<Edge> half = {{0, 3}, {1, 2}, {2, 4}, {2, 5}, {3, 4}, {3, 5}};
  CHECK(is_path_blowup_on_tuples(tuples, half, true));
  std::vector<Edge> missing(full.begin(), full.end() - 1);
  CHECK_FALSE(is_path_blowup_on_tuples(tuples, missing, false));
  CHECK_FALSE(is_path_blowup_on_tuples({{0, 1}, {1, 2}}, {}, false));  // overlap
}
