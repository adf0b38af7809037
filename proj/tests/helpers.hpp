#pragma once

#include "spanreg/graph.hpp"
#include "spanreg/rng.hpp"

namespace testutil {

inline spanreg::Graph cycle_graph(int n) {
  std::vector<spanreg::Edge> es;
  for (int i = 0; i < n; ++i) es.push_back({i, (i + 1) % n});
  return spanreg::Graph(n, std::move(es));
}

inline spanreg::Graph complete_graph(int n) {
  std::vector<spanreg::Edge> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) es.push_back({i, j});
  return spanreg::Graph(n, std::move(es));
}

inline spanreg::Graph complete_bipartite(int a, int b) {
  std::vector<spanreg::Edge> es;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) es.push_back({i, a + j});
  return spanreg::Graph(a + b, std::move(es));
}

inline spanreg::Graph random_graph(int n, double p, spanreg::Rng& rng) {
  std::vector<spanreg::Edge> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.coin(p)) es.push_back({i, j});
  return spanreg::Graph(n, std::move(es));
}

// Random graph conditioned on minimum degree >= bound (resamples).
inline spanreg::Graph random_graph_min_degree(int n, double p, int bound, spanreg::Rng& rng) {
  for (int tries = 0; tries < 1000; ++tries) {
    spanreg::Graph g = random_graph(n, p, rng);
    if (g.min_degree() >= bound) return g;
  }
  throw std::runtime_error("could not hit the degree bound; raise p");
}

}  // namespace testutil
