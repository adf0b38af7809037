#include "spanreg/oracle.hpp"

#include <algorithm>
#include <numeric>

#include "spanreg/errors.hpp"

namespace spanreg {

namespace {

struct FactorState {
  const Graph* g = nullptr;
  int r = 0;
  long long max_nodes = 0;
  long long nodes = 0;
  bool out_of_budget = false;
  std::vector<Edge> order;       // edges in search order
  std::vector<int> rem;          // degree still needed per vertex
  std::vector<int> avail;        // undecided incident edges per vertex
  std::vector<char> included;    // per position in order
  std::vector<std::vector<int>> inc_adj;  // included subgraph, adjacency
  std::vector<Edge> found;
};

// True when u's included component is finished (every vertex satisfied)
// but does not span; no completion can reconnect it.
bool closed_short_component(const FactorState& st, int u) {
  std::vector<char> seen(st.rem.size(), 0);
  std::vector<int> stack{u};
  seen[u] = 1;
  int size = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (st.rem[v] > 0) return false;
    for (int w : st.inc_adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++size;
        stack.push_back(w);
      }
  }
  return size < st.g->n();
}

bool factor_dfs(FactorState& st, std::size_t pos) {
  if (++st.nodes > st.max_nodes) {
    st.out_of_budget = true;
    return false;
  }
  if (pos == st.order.size()) {
    std::vector<Edge> cand;
    for (std::size_t i = 0; i < st.order.size(); ++i)
      if (st.included[i]) cand.push_back(st.order[i]);
    Graph h(st.g->n(), cand);
    if (!is_r_regular(h, st.r)) return false;
    if (vertex_connectivity(h) < st.r) return false;
    st.found = std::move(cand);
    return true;
  }
  auto [u, v] = st.order[pos];
  // include first: the first full assignment found is lexicographically
  // first w.r.t. the search order
  if (st.rem[u] > 0 && st.rem[v] > 0) {
    --st.rem[u];
    --st.rem[v];
    --st.avail[u];
    --st.avail[v];
    st.included[pos] = 1;
    st.inc_adj[u].push_back(v);
    st.inc_adj[v].push_back(u);
    bool dead = st.rem[u] == 0 && st.rem[v] == 0 && closed_short_component(st, u);
    if (!dead && factor_dfs(st, pos + 1)) return true;
    st.inc_adj[u].pop_back();
    st.inc_adj[v].pop_back();
    st.included[pos] = 0;
    ++st.rem[u];
    ++st.rem[v];
    ++st.avail[u];
    ++st.avail[v];
    if (st.out_of_budget) return false;
  }
  // exclude: illegal when the edge is forced (remaining supply would not
  // cover the demand at an endpoint)
  if (st.avail[u] - 1 >= st.rem[u] && st.avail[v] - 1 >= st.rem[v]) {
    --st.avail[u];
    --st.avail[v];
    if (factor_dfs(st, pos + 1)) return true;
    ++st.avail[u];
    ++st.avail[v];
  }
  return false;
}

}  // namespace

FactorSearch brute_force_spanning(const Graph& g, int r, SearchBudget budget) {
  if (r < 0 || r >= g.n()) throw domain_error("degree target out of range");
  if (static_cast<long long>(g.n()) * r % 2 != 0)
    throw domain_error("n*r odd: no r-regular graph on n vertices exists");

  FactorSearch out;
  out.cert.r = r;
  if (r == 0) {
    out.status = SearchStatus::found;
    return out;
  }
  if (g.min_degree() < r || vertex_connectivity(g) < r) {
    out.status = SearchStatus::none;
    return out;
  }

  FactorState st;
  st.g = &g;
  st.r = r;
  st.max_nodes = budget.max_nodes;
  st.rem.assign(g.n(), r);
  st.avail.assign(g.n(), 0);
  st.inc_adj.assign(g.n(), {});
  std::vector<int> ids(g.edges().size());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    const auto& ea = g.edges()[a];
    const auto& eb = g.edges()[b];
    int da = std::min(g.degree(ea.first), g.degree(ea.second));
    int db = std::min(g.degree(eb.first), g.degree(eb.second));
    if (da != db) return da < db;
    return a < b;
  });
  for (int id : ids) st.order.push_back(g.edges()[id]);
  st.included.assign(st.order.size(), 0);
  for (const auto& [u, v] : st.order) {
    ++st.avail[u];
    ++st.avail[v];
  }

  bool ok = factor_dfs(st, 0);
  out.nodes = st.nodes;
  if (ok) {
    out.status = SearchStatus::found;
    out.cert.edges = st.found;
  } else {
    out.status = st.out_of_budget ? SearchStatus::unknown : SearchStatus::none;
  }
  return out;
}

Graph build_tightness_example(int n, int r, int slack) {
  if (slack != 0 && slack != 1) throw domain_error("slack must be 0 or 1");
  if (r < 1) throw domain_error("r must be positive");
  if ((n + r) % 2 != 0) throw domain_error("n+r must be even");
  if (n < 2 * r + 4) throw domain_error("n too small for the two-clique example");
  int c = (n + r) / 2;
  int shared = r - slack;
  std::vector<Edge> es;
  // clique A = [0, c), clique B = [c - shared, 2c - shared)
  for (int i = 0; i < c; ++i)
    for (int j = i + 1; j < c; ++j) es.push_back({i, j});
  int lo = c - shared, hi = 2 * c - shared;
  for (int i = lo; i < hi; ++i)
    for (int j = i + 1; j < hi; ++j)
      if (i >= c || j >= c) es.push_back({i, j});
  return Graph(n + slack, std::move(es));
}

Graph build_divisibility_example(int n) {
  if (n % 2 != 0) throw domain_error("n must be even");
  if (n % 4 == 0) throw domain_error("n must not be divisible by 4");
  if (n < 10) throw domain_error("n must be at least 10");
  int half = n / 2 - 2;
  std::vector<Edge> es;
  for (int i = 0; i < half; ++i)
    for (int j = i + 1; j < half; ++j) es.push_back({i, j});
  for (int i = half; i < 2 * half; ++i)
    for (int j = i + 1; j < 2 * half; ++j) es.push_back({i, j});
  for (int x = 2 * half; x < n; ++x)
    for (int v = 0; v < 2 * half; ++v) es.push_back({v, x});
  return Graph(n, std::move(es));
}

namespace {

struct BlowupState {
  const Graph* g = nullptr;
  int t = 0, k = 0;
  long long max_nodes = 0;
  long long nodes = 0;
  bool out_of_budget = false;
  std::vector<std::vector<int>> blocks;
  std::vector<char> used;
  bool done = false;
};

// Fill block b from position p onward, members ascending within a block.
bool blowup_dfs(BlowupState& st, int b, int p, int min_vertex) {
  if (++st.nodes > st.max_nodes) {
    st.out_of_budget = true;
    return false;
  }
  if (p == st.t) {
    if (b + 1 == st.k) return true;
    return blowup_dfs(st, b + 1, 0, 0);
  }
  for (int v = min_vertex; v < st.g->n(); ++v) {
    if (st.used[v]) continue;
    bool ok = true;
    if (b > 0)
      for (int w : st.blocks[b - 1])
        if (!st.g->has_edge(v, w)) {
          ok = false;
          break;
        }
    if (ok && b == st.k - 1)
      for (int w : st.blocks[0])
        if (!st.g->has_edge(v, w)) {
          ok = false;
          break;
        }
    if (!ok) continue;
    st.used[v] = 1;
    st.blocks[b].push_back(v);
    if (blowup_dfs(st, b, p + 1, v + 1)) return true;
    st.blocks[b].pop_back();
    st.used[v] = 0;
    if (st.out_of_budget) return false;
  }
  return false;
}

}  // namespace

BlowupSearch search_spanning_blowup_cycle(const Graph& g, int t, SearchBudget budget) {
  if (t < 1) throw domain_error("blow-up factor must be positive");
  if (g.n() % t != 0) throw domain_error("t must divide n");
  int k = g.n() / t;
  if (k < 3) throw domain_error("base cycle needs length >= 3");

  BlowupState st;
  st.g = &g;
  st.t = t;
  st.k = k;
  st.max_nodes = budget.max_nodes;
  st.blocks.assign(static_cast<std::size_t>(k), {});
  st.used.assign(static_cast<std::size_t>(g.n()), 0);
  // anchor: block 0 contains vertex 0 (kills rotation symmetry only)
  st.used[0] = 1;
  st.blocks[0].push_back(0);
  bool ok = st.t == 1 ? blowup_dfs(st, 1, 0, 0) : blowup_dfs(st, 0, 1, 1);

  BlowupSearch out;
  out.nodes = st.nodes;
  if (ok) {
    out.status = SearchStatus::found;
    for (int b = 0; b < k; ++b)
      for (int u : st.blocks[b])
        for (int v : st.blocks[(b + 1) % k]) out.edges.push_back({std::min(u, v), std::max(u, v)});
    std::sort(out.edges.begin(), out.edges.end());
  } else {
    out.status = st.out_of_budget ? SearchStatus::unknown : SearchStatus::none;
  }
  return out;
}

}  // namespace spanreg
