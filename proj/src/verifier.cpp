#include "spanreg/verifier.hpp"

#include <algorithm>
#include <queue>

#include "json.hpp"
#include "spanreg/errors.hpp"

namespace spanreg {

namespace {

// Unit-capacity Dinic, small graphs, int capacities.
class Dinic {
 public:
  explicit Dinic(int n) : adj_(static_cast<std::size_t>(n)), level_(n), it_(n) {}

  void add_arc(int u, int v, int cap) {
    adj_[u].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({v, cap});
    adj_[v].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({u, 0});
  }

  int max_flow(int s, int t, int stop_at = INT32_MAX) {
    int flow = 0;
    while (flow < stop_at && bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (int f = dfs(s, t, INT32_MAX)) {
        flow += f;
        if (flow >= stop_at) break;
      }
    }
    return flow;
  }

 private:
  struct Arc {
    int to, cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int id : adj_[v]) {
        if (arcs_[id].cap > 0 && level_[arcs_[id].to] < 0) {
          level_[arcs_[id].to] = level_[v] + 1;
          q.push(arcs_[id].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  int dfs(int v, int t, int f) {
    if (v == t) return f;
    for (int& i = it_[v]; i < static_cast<int>(adj_[v].size()); ++i) {
      int id = adj_[v][i];
      Arc& a = arcs_[id];
      if (a.cap > 0 && level_[a.to] == level_[v] + 1) {
        int got = dfs(a.to, t, std::min(f, a.cap));
        if (got > 0) {
          a.cap -= got;
          arcs_[id ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> level_, it_;
};

// Internally disjoint s-t paths via vertex splitting: node 2v is "in",
// 2v+1 is "out", internal capacity 1. skip_direct drops the s-t arc.
int split_flow(const Graph& g, int s, int t, bool skip_direct) {
  Dinic d(2 * g.n());
  for (int v = 0; v < g.n(); ++v) d.add_arc(2 * v, 2 * v + 1, 1);
  for (const auto& [a, b] : g.edges()) {
    if (skip_direct && ((a == s && b == t) || (a == t && b == s))) continue;
    d.add_arc(2 * a + 1, 2 * b, g.n());
    d.add_arc(2 * b + 1, 2 * a, g.n());
  }
  return d.max_flow(2 * s + 1, 2 * t);
}

}  // namespace

bool is_r_regular(const Graph& g, int r) {
  for (int v = 0; v < g.n(); ++v)
    if (g.degree(v) != r) return false;
  return true;
}

bool is_spanning_subgraph(const Graph& host, const Graph& sub) {
  if (host.n() != sub.n()) return false;
  for (const auto& [u, v] : sub.edges())
    if (!host.has_edge(u, v)) return false;
  return true;
}

int local_connectivity(const Graph& g, int u, int v) {
  if (u == v || u < 0 || v < 0 || u >= g.n() || v >= g.n())
    throw domain_error("local connectivity needs two distinct vertices");
  if (g.has_edge(u, v)) return split_flow(g, u, v, true) + 1;
  return split_flow(g, u, v, false);
}

int vertex_connectivity(const Graph& g) {
  int n = g.n();
  if (n <= 1) return 0;
  if (!g.is_connected()) return 0;
  if (g.m() == static_cast<long long>(n) * (n - 1) / 2) return n - 1;

  int s = 0;
  for (int v = 1; v < n; ++v)
    if (g.degree(v) < g.degree(s)) s = v;

  int best = n - 1;
  // A minimum separator avoiding s leaves some vertex on the far side,
  // necessarily a non-neighbor of s.
  for (int v = 0; v < n; ++v) {
    if (v == s || g.has_edge(s, v)) continue;
    best = std::min(best, split_flow(g, s, v, false));
  }
  // One containing s is witnessed between two of s's neighbors in
  // different components of the remainder; such a pair is non-adjacent.
  std::vector<int> nb = g.neighbors(s);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (!g.has_edge(nb[i], nb[j]))
        best = std::min(best, split_flow(g, nb[i], nb[j], false));
  return best;
}

int vertex_connectivity_brute(const Graph& g) {
  int n = g.n();
  if (n <= 1) return 0;
  if (!g.is_connected()) return 0;
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[i] = i;
  for (int k = 1; k <= n - 2; ++k) {
    std::vector<int> pick(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<int> rest = set_minus(all, pick);
      if (!induced_subgraph(g, rest).is_connected()) return k;
      int i = k - 1;
      while (i >= 0 && pick[i] == n - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return n - 1;
}

VerifyReport verify_certificate(const Graph& host, const Certificate& cert,
                                int host_kappa_limit) {
  VerifyReport rep;
  Graph sub;
  try {
    sub = Graph(host.n(), cert.edges);
  } catch (const domain_error& e) {
    rep.detail = std::string("certificate edges malformed: ") + e.what();
    return rep;
  }
  for (const auto& [u, v] : sub.edges()) {
    if (!host.has_edge(u, v)) {
      rep.detail = "edge (" + std::to_string(u) + "," + std::to_string(v) + ") not in host";
      return rep;
    }
  }
  rep.spanning = true;
  rep.regular = is_r_regular(sub, cert.r);
  if (!rep.regular) {
    for (int v = 0; v < sub.n(); ++v) {
      if (sub.degree(v) != cert.r) {
        rep.detail = "vertex " + std::to_string(v) + " has degree " +
                     std::to_string(sub.degree(v)) + ", want " + std::to_string(cert.r);
        break;
      }
    }
    return rep;
  }
  rep.kappa = vertex_connectivity(sub);
  rep.kappa_ok = rep.kappa >= cert.r;
  if (!rep.kappa_ok) {
    rep.detail = "subgraph connectivity " + std::to_string(rep.kappa) + " < " +
                 std::to_string(cert.r);
    return rep;
  }
  if (host.n() <= host_kappa_limit) {
    rep.host_checked = true;
    int hk = vertex_connectivity(host);
    if (rep.kappa > hk) {
      rep.detail = "subgraph connectivity exceeds host connectivity";  // cannot happen
      return rep;
    }
  }
  rep.ok = true;
  return rep;
}

std::string certificate_to_json(const Certificate& c, int n) {
  nlohmann::json j;
  j["n"] = n;
  j["r"] = c.r;
  auto& arr = j["edges"] = nlohmann::json::array();
  std::vector<Edge> es = c.edges;
  for (auto& [u, v] : es)
    if (u > v) std::swap(u, v);
  std::sort(es.begin(), es.end());
  for (const auto& [u, v] : es) arr.push_back({u, v});
  return j.dump();
}

Certificate certificate_from_json(const std::string& text, int* n_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw domain_error(std::string("bad certificate json: ") + e.what());
  }
  if (!j.contains("r") || !j.contains("edges"))
    throw domain_error("certificate json needs fields r and edges");
  Certificate c;
  c.r = j["r"].get<int>();
  for (const auto& e : j["edges"]) c.edges.push_back({e[0].get<int>(), e[1].get<int>()});
  if (n_out && j.contains("n")) *n_out = j["n"].get<int>();
  return c;
}

}  // namespace spanreg
