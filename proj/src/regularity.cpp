#include "spanreg/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "spanreg/errors.hpp"
#include "spanreg/rng.hpp"

namespace spanreg {

Rat rat_add(Rat a, Rat b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
Rat rat_sub(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
Rat rat_mul(Rat a, Rat b) { return Rat(a.num * b.num, a.den * b.den); }

Rat rat_from_double(double x, long long max_den) {
  if (!(std::abs(x) < 1e15)) throw domain_error("value out of rational range");
  bool neg = x < 0;
  if (neg) x = -x;
  // continued fractions; convergents p/q
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int i = 0; i < 64; ++i) {
    long long a = static_cast<long long>(std::floor(frac));
    long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double rem = frac - static_cast<double>(a);
    if (rem < 1e-12) break;
    frac = 1.0 / rem;
  }
  return Rat(neg ? -p1 : p1, q1);
}

RegularPair make_regular_pair(const Graph& host, std::vector<int> a, std::vector<int> b,
                              Rat eps) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.empty() || b.empty()) throw domain_error("regular pair sides must be non-empty");
  if (!set_intersect(a, b).empty()) throw domain_error("regular pair sides must be disjoint");
  RegularPair p;
  p.host = &host;
  p.d = pair_density(host, a, b);
  p.a = std::move(a);
  p.b = std::move(b);
  p.eps = eps;
  return p;
}

namespace {

// |edges/cells - d| > eps, exactly.
bool density_deviates(long long edges, long long cells, const Rat& d, const Rat& eps) {
  __int128 lhs = static_cast<__int128>(edges) * d.den - static_cast<__int128>(d.num) * cells;
  if (lhs < 0) lhs = -lhs;
  __int128 rhs = static_cast<__int128>(eps.num) * cells * d.den;
  return lhs * eps.den > rhs;
}

// smallest k with k >= eps * size
int min_subset_size(const Rat& eps, int size) {
  long long k = (eps.num * size + eps.den - 1) / eps.den;
  return static_cast<int>(std::max(1LL, k));
}

// Given X (as degree counts into X for each opposite vertex), scan every
// admissible |Y|; extremes are sorted prefixes/suffixes. Returns a
// violating Y or empty.
std::vector<int> extreme_y_violation(const std::vector<int>& opposite,
                                     const std::vector<int>& deg_into_x, int x_size,
                                     const Rat& d, const Rat& eps, int y_min) {
  int m = static_cast<int>(opposite.size());
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) {
    if (deg_into_x[i] != deg_into_x[j]) return deg_into_x[i] < deg_into_x[j];
    return i < j;
  });
  std::vector<long long> prefix(m + 1, 0);
  for (int i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + deg_into_x[idx[i]];
  for (int k = y_min; k <= m; ++k) {
    long long cells = static_cast<long long>(x_size) * k;
    long long lo = prefix[k];
    long long hi = prefix[m] - prefix[m - k];
    if (density_deviates(lo, cells, d, eps)) {
      std::vector<int> y;
      for (int i = 0; i < k; ++i) y.push_back(opposite[idx[i]]);
      std::sort(y.begin(), y.end());
      return y;
    }
    if (density_deviates(hi, cells, d, eps)) {
      std::vector<int> y;
      for (int i = m - k; i < m; ++i) y.push_back(opposite[idx[i]]);
      std::sort(y.begin(), y.end());
      return y;
    }
  }
  return {};
}

}  // namespace

RegCheck is_eps_regular_exact(const RegularPair& p) {
  const std::vector<int>& xs = p.a.size() <= p.b.size() ? p.a : p.b;
  const std::vector<int>& ys = p.a.size() <= p.b.size() ? p.b : p.a;
  if (xs.size() > 14 || ys.size() > 14)
    throw domain_error("exact regularity check limited to sides <= 14; use the sampled mode");
  int nx = static_cast<int>(xs.size());
  int x_min = min_subset_size(p.eps, nx);
  // adjacency of each y restricted to xs, as bitmasks over xs positions
  std::vector<std::uint32_t> adj(ys.size(), 0);
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (int j = 0; j < nx; ++j)
      if (p.host->has_edge(ys[i], xs[j])) adj[i] |= 1u << j;

  for (std::uint32_t mask = 1; mask < (1u << nx); ++mask) {
    int popcnt = std::popcount(mask);
    if (popcnt < x_min) continue;
    std::vector<int> deg(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i)
      deg[i] = std::popcount(adj[i] & mask);
    std::vector<int> y = extreme_y_violation(ys, deg, popcnt, p.d, p.eps,
                                             min_subset_size(p.eps, static_cast<int>(ys.size())));
    if (!y.empty()) {
      std::vector<int> x;
      for (int j = 0; j < nx; ++j)
        if (mask & (1u << j)) x.push_back(xs[j]);
      RegCheck out;
      out.regular = false;
      RegularityWitness w;
      bool x_is_a = &xs == &p.a;
      w.x = x_is_a ? x : y;
      w.y = x_is_a ? y : x;
      w.dxy = Rat(edges_between(*p.host, w.x, w.y),
                  static_cast<long long>(w.x.size()) * static_cast<long long>(w.y.size()));
      out.witness = std::move(w);
      return out;
    }
  }
  RegCheck out;
  out.regular = true;
  return out;
}

RegCheck is_eps_regular_sampled(const RegularPair& p, int trials, std::uint64_t seed) {
  if (trials < 1) throw domain_error("sampled regularity needs at least one trial");
  Rng rng(seed);
  int na = static_cast<int>(p.a.size());
  int nb = static_cast<int>(p.b.size());
  // Coarse one-sided check: samples subsets no smaller than half a side, so it
  // measures bulk uniformity rather than small-subset noise.  Any witness it
  // returns is a genuine violation at an admissible size.
  int a_min = std::max(min_subset_size(p.eps, na), (na + 1) / 2);
  int b_min = std::max(min_subset_size(p.eps, nb), (nb + 1) / 2);
  auto draw = [&](const std::vector<int>& side, int lo) {
    int n = static_cast<int>(side.size());
    int k = lo + (n > lo ? rng.below_int(n - lo + 1) : 0);
    std::vector<int> pos = rng.sample(n, k);
    std::vector<int> out;
    out.reserve(pos.size());
    for (int i : pos) out.push_back(side[i]);
    return out;
  };
  for (int t = 0; t < trials; ++t) {
    std::vector<int> x = draw(p.a, a_min);
    std::vector<int> y = draw(p.b, b_min);
    long long e = edges_between(*p.host, x, y);
    long long cells = static_cast<long long>(x.size()) * static_cast<long long>(y.size());
    if (density_deviates(e, cells, p.d, p.eps)) {
      RegCheck out;
      out.regular = false;
      RegularityWitness w;
      w.x = std::move(x);
      w.y = std::move(y);
      w.dxy = Rat(e, cells);
      out.witness = std::move(w);
      return out;
    }
  }
  RegCheck out;
  out.regular = true;
  return out;
}

RegularPair slice_pair(const RegularPair& p, std::vector<int> a2, std::vector<int> b2,
                       Rat gamma) {
  std::sort(a2.begin(), a2.end());
  std::sort(b2.begin(), b2.end());
  if (set_minus(a2, p.a).size() || set_minus(b2, p.b).size())
    throw domain_error("slice must take subsets of the pair sides");
  if (gamma <= p.eps) throw domain_error("slice fraction must exceed eps");
  // |a2| >= gamma * |a|
  if (static_cast<long long>(a2.size()) * gamma.den <
          gamma.num * static_cast<long long>(p.a.size()) ||
      static_cast<long long>(b2.size()) * gamma.den <
          gamma.num * static_cast<long long>(p.b.size()))
    throw domain_error("slice sides below the gamma fraction");
  RegularPair q = make_regular_pair(*p.host, std::move(a2), std::move(b2),
                                    rat_add(p.eps, p.eps));
  if (p.verified) {
    Rat drift = rat_sub(q.d, p.d);
    if (drift.num < 0) drift = Rat(-drift.num, drift.den);
    if (p.eps < drift)
      throw domain_error("sliced density drifted beyond eps from a verified-regular pair");
  }
  return q;
}

bool passes_degree_scan(const Graph& host, const std::vector<int>& a,
                        const std::vector<int>& b, Rat threshold) {
  for (int v : a)
    if (static_cast<long long>(host.degree_into(v, b)) * threshold.den <
        threshold.num * static_cast<long long>(b.size()))
      return false;
  for (int v : b)
    if (static_cast<long long>(host.degree_into(v, a)) * threshold.den <
        threshold.num * static_cast<long long>(a.size()))
      return false;
  return true;
}

SuperRegResult super_regularize(const RegularPair& p) {
  SuperRegResult res;
  Rat cut = rat_sub(p.d, p.eps);
  std::vector<int> a = p.a, b = p.b;
  bool changed = true;
  while (changed && !a.empty() && !b.empty()) {
    changed = false;
    std::vector<int> keep;
    for (int v : a) {
      if (static_cast<long long>(p.host->degree_into(v, b)) * cut.den <
          cut.num * static_cast<long long>(b.size())) {
        res.removed_a.push_back(v);
        changed = true;
      } else {
        keep.push_back(v);
      }
    }
    a.swap(keep);
    keep.clear();
    for (int v : b) {
      if (!a.empty() && static_cast<long long>(p.host->degree_into(v, a)) * cut.den <
                            cut.num * static_cast<long long>(a.size())) {
        res.removed_b.push_back(v);
        changed = true;
      } else {
        keep.push_back(v);
      }
    }
    b.swap(keep);
  }
  // low-degree removals capped at an eps fraction per side
  if (static_cast<long long>(res.removed_a.size()) * p.eps.den >
          p.eps.num * static_cast<long long>(p.a.size()) ||
      static_cast<long long>(res.removed_b.size()) * p.eps.den >
          p.eps.num * static_cast<long long>(p.b.size())) {
    res.diagnostic = "more than an eps fraction removed; input pair was not regular";
    return res;
  }
  while (a.size() > b.size()) {
    res.removed_a.push_back(a.back());
    a.pop_back();
  }
  while (b.size() > a.size()) {
    res.removed_b.push_back(b.back());
    b.pop_back();
  }
  if (a.empty()) {
    res.diagnostic = "pair vanished";
    return res;
  }
  Rat bar = rat_sub(p.d, rat_mul(Rat(3, 1), p.eps));
  if (!passes_degree_scan(*p.host, a, b, bar)) {
    res.diagnostic = "output failed the (d-3eps) degree scan";
    return res;
  }
  res.pair = make_regular_pair(*p.host, std::move(a), std::move(b), rat_add(p.eps, p.eps));
  std::sort(res.removed_a.begin(), res.removed_a.end());
  std::sort(res.removed_b.begin(), res.removed_b.end());
  res.ok = true;
  return res;
}

namespace {

struct PairStatus {
  bool regular = false;
  Rat density;
  bool edge = false;
};

PairStatus eval_pair(const Graph& g, const std::vector<int>& vi, const std::vector<int>& vj,
                     Rat eps, Rat d, int trials, std::uint64_t seed) {
  PairStatus st;
  st.density = pair_density(g, vi, vj);
  RegularPair p;
  p.host = &g;
  p.a = vi;
  p.b = vj;
  p.eps = eps;
  p.d = st.density;
  st.regular = is_eps_regular_sampled(p, trials, seed).regular;
  st.edge = st.regular && d <= st.density;
  return st;
}

}  // namespace

Partition regular_partition(const Graph& g, Rat eps, Rat d, int ell, std::uint64_t seed,
                            int trials, int refine_rounds) {
  if (ell < 1 || g.n() < ell) throw domain_error("cluster count out of range");
  Partition part;
  part.host = &g;
  part.eps = eps;
  part.d = d;
  part.L = g.n() / ell;

  Rng rng(seed);
  std::vector<int> ids(static_cast<std::size_t>(g.n()));
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);
  part.clusters.assign(static_cast<std::size_t>(ell), {});
  for (int i = 0; i < ell; ++i) {
    part.clusters[i] = {ids.begin() + static_cast<long>(i) * part.L,
                        ids.begin() + static_cast<long>(i + 1) * part.L};
    std::sort(part.clusters[i].begin(), part.clusters[i].end());
  }
  part.exceptional = {ids.begin() + static_cast<long>(ell) * part.L, ids.end()};
  std::sort(part.exceptional.begin(), part.exceptional.end());

  auto pair_seed = [&](int i, int j) { return seed ^ (static_cast<std::uint64_t>(i) * 1000003 + j); };
  std::vector<std::vector<PairStatus>> status(ell, std::vector<PairStatus>(ell));
  auto eval_all_with = [&](int i) {
    for (int j = 0; j < ell; ++j) {
      if (j == i) continue;
      int x = std::min(i, j), y = std::max(i, j);
      status[x][y] = eval_pair(g, part.clusters[x], part.clusters[y], eps, d, trials,
                               pair_seed(x, y));
    }
  };
  for (int i = 0; i < ell; ++i)
    for (int j = i + 1; j < ell; ++j)
      status[i][j] = eval_pair(g, part.clusters[i], part.clusters[j], eps, d, trials,
                               pair_seed(i, j));

  // bounded swap repair on irregular pairs
  for (int round = 0; round < refine_rounds; ++round) {
    int bi = -1, bj = -1;
    for (int i = 0; i < ell && bi < 0; ++i)
      for (int j = i + 1; j < ell; ++j)
        if (!status[i][j].regular) {
          bi = i;
          bj = j;
          break;
        }
    if (bi < 0) break;
    std::vector<int> save_i = part.clusters[bi], save_j = part.clusters[bj];
    int pi = rng.below_int(part.L), pj = rng.below_int(part.L);
    std::swap(part.clusters[bi][pi], part.clusters[bj][pj]);
    std::sort(part.clusters[bi].begin(), part.clusters[bi].end());
    std::sort(part.clusters[bj].begin(), part.clusters[bj].end());
    PairStatus after = eval_pair(g, part.clusters[bi], part.clusters[bj], eps, d, trials,
                                 pair_seed(bi, bj) + round + 1);
    if (after.regular) {
      status[bi][bj] = after;
      eval_all_with(bi);
      eval_all_with(bj);
    } else {
      part.clusters[bi] = std::move(save_i);
      part.clusters[bj] = std::move(save_j);
    }
  }

  std::vector<Edge> redges;
  for (int i = 0; i < ell; ++i)
    for (int j = i + 1; j < ell; ++j) {
      if (!status[i][j].regular) part.irregular_pairs.push_back({i, j});
      if (status[i][j].edge) redges.push_back({i, j});
    }
  part.reduced = Graph(ell, std::move(redges));

  // (P1) with additive rounding slack ell
  part.p1_ok = (static_cast<long long>(part.exceptional.size()) - ell) * eps.den <=
               eps.num * static_cast<long long>(g.n());
  // (P2): degree into the kept pairs does not drop more than (d+eps)n
  Rat drop = rat_add(d, eps);
  for (int i = 0; i < ell; ++i) {
    for (int v : part.clusters[i]) {
      long long kept = 0;
      for (int u : part.reduced.neighbors(i)) kept += g.degree_into(v, part.clusters[u]);
      // kept >= deg(v) - (d+eps)*n ?
      if (kept * drop.den < static_cast<long long>(g.degree(v)) * drop.den -
                                drop.num * static_cast<long long>(g.n()))
        part.p2_violators.push_back(v);
    }
  }
  // (P4): recount every reduced edge's density
  part.p4_ok = true;
  for (const auto& [i, j] : part.reduced.edges()) {
    Rat dens = pair_density(g, part.clusters[i], part.clusters[j]);
    if (dens < d) part.p4_ok = false;
  }
  return part;
}

Rat overlap_density(const Graph& g, const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw domain_error("density of empty set");
  return Rat(edges_between(g, a, b),
             static_cast<long long>(a.size()) * static_cast<long long>(b.size()));
}

namespace {

struct ExtremalSearch {
  const Graph* g = nullptr;
  Rat alpha;
  int lo = 0, hi = 0;
  long long budget = 0;
  long long nodes = 0;
  std::optional<ExtremalWitness> found;
};

// Exact per-A search: minimize e(A,B) over window-sized B, where an edge
// inside A∩B counts once. DFS over vertices sorted by degree into A with
// a credit-bounded lower bound.
void best_b_for_a(ExtremalSearch& st, const std::vector<int>& a) {
  int n = st.g->n();
  std::vector<int> w(n);
  for (int v = 0; v < n; ++v) w[v] = st.g->degree_into(v, a);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return w[x] < w[y]; });
  std::vector<long long> pref(n + 1, 0);
  for (int i = 0; i < n; ++i) pref[i + 1] = pref[i] + w[order[i]];

  long long sa = static_cast<long long>(a.size());
  // threshold(k): e < alpha * |A| * k
  auto beats = [&](long long e, int k) {
    return e * st.alpha.den < st.alpha.num * sa * k;
  };

  std::vector<int> chosen;
  std::vector<int> chosen_in_a;  // members of chosen ∩ A
  long long sum_w = 0, credit = 0;

  // lower bound over all completions to any window size; prune if none can win
  auto promising = [&](int pos) {
    int cnt = static_cast<int>(chosen.size());
    int o = static_cast<int>(chosen_in_a.size());
    int avail = n - pos;
    int avail_in_a = 0;
    for (int i = pos; i < n; ++i)
      if (set_contains(a, order[i])) ++avail_in_a;
    for (int k = std::max(cnt, st.lo); k <= st.hi; ++k) {
      int t = k - cnt;
      if (t > avail) break;
      long long future = pref[pos + t] - pref[pos];  // t smallest remaining
      int op = o + std::min(t, avail_in_a);
      long long max_credit = static_cast<long long>(op) * (op - 1) / 2;
      if (beats(sum_w + future - max_credit, k)) return true;
    }
    return false;
  };

  std::function<void(int)> dfs = [&](int pos) {
    if (st.found || ++st.nodes > st.budget) return;
    int cnt = static_cast<int>(chosen.size());
    if (cnt >= st.lo && cnt <= st.hi && beats(sum_w - credit, cnt)) {
      ExtremalWitness wit;
      wit.a = a;
      wit.b = chosen;
      std::sort(wit.b.begin(), wit.b.end());
      wit.density = overlap_density(*st.g, wit.a, wit.b);
      st.found = wit;
      return;
    }
    if (cnt == st.hi || pos == st.g->n()) return;
    if (!promising(pos)) return;
    int v = order[pos];
    // include v
    long long add_credit = 0;
    bool in_a = set_contains(a, v);
    if (in_a)
      for (int u : chosen_in_a) add_credit += st.g->has_edge(u, v) ? 1 : 0;
    chosen.push_back(v);
    if (in_a) chosen_in_a.push_back(v);
    sum_w += w[v];
    credit += add_credit;
    dfs(pos + 1);
    credit -= add_credit;
    sum_w -= w[v];
    if (in_a) chosen_in_a.pop_back();
    chosen.pop_back();
    if (st.found) return;
    // exclude v
    dfs(pos + 1);
  };
  dfs(0);
}

// Greedy: B = the k lowest-degree-into-A vertices (no overlap credit;
// sound for witness finding since the credit only lowers the count).
std::vector<int> greedy_b(const Graph& g, const std::vector<int>& a, int k) {
  std::vector<int> order(static_cast<std::size_t>(g.n()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return g.degree_into(x, a) < g.degree_into(y, a);
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

std::optional<ExtremalWitness> detect_alpha_extremal(const Graph& g, Rat alpha,
                                                     long long budget, std::uint64_t seed) {
  if (alpha.num <= 0 || Rat(1, 4) <= alpha)
    throw domain_error("alpha must lie in (0, 1/4)");
  int n = g.n();
  // window: ceil((1/2 - alpha) n) .. floor(n/2)
  long long num = static_cast<long long>(n) * (alpha.den - 2 * alpha.num);
  long long den = 2 * alpha.den;
  int lo = static_cast<int>((num + den - 1) / den);
  int hi = n / 2;
  if (lo < 1) lo = 1;
  if (hi < lo) return std::nullopt;

  if (n <= 16) {
    ExtremalSearch st;
    st.g = &g;
    st.alpha = alpha;
    st.lo = lo;
    st.hi = hi;
    st.budget = std::max<long long>(budget, 100'000'000);  // exact mode ignores small budgets
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      int pc = std::popcount(mask);
      if (pc < lo || pc > hi) continue;
      std::vector<int> a;
      for (int v = 0; v < n; ++v)
        if (mask & (1u << v)) a.push_back(v);
      best_b_for_a(st, a);
      if (st.found) return st.found;
    }
    return std::nullopt;
  }

  // seeded descent: BFS-cluster seeds and low-degree seeds, then
  // alternate greedy refinement
  Rng rng(seed);
  long long spent = 0;
  auto try_pair = [&](std::vector<int> a) -> std::optional<ExtremalWitness> {
    for (int round = 0; round < 12; ++round) {
      for (int k : {lo, hi}) {
        std::vector<int> b = greedy_b(g, a, k);
        Rat den2 = overlap_density(g, a, b);
        spent += n;
        if (den2 < alpha) {
          ExtremalWitness w{a, b, den2};
          return w;
        }
        std::vector<int> a2 = greedy_b(g, b, static_cast<int>(a.size()));
        if (a2 == a) break;
        a = std::move(a2);
      }
      if (spent > budget) break;
    }
    return std::nullopt;
  };

  std::vector<std::vector<int>> seeds;
  // BFS clusters from a few roots
  for (int root_try = 0; root_try < 6 && spent < budget; ++root_try) {
    int root = root_try == 0 ? 0 : rng.below_int(n);
    std::vector<int> order;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> q{root};
    seen[root] = 1;
    for (std::size_t h = 0; h < q.size() && static_cast<int>(order.size()) < lo; ++h) {
      order.push_back(q[h]);
      for (int u : g.neighbors(q[h]))
        if (!seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
    }
    for (int v : q)
      if (static_cast<int>(order.size()) < lo &&
          std::find(order.begin(), order.end(), v) == order.end())
        order.push_back(v);
    if (static_cast<int>(order.size()) >= lo) {
      order.resize(static_cast<std::size_t>(lo));
      std::sort(order.begin(), order.end());
      seeds.push_back(order);
    }
  }
  // lowest-degree seed
  {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return g.degree(x) < g.degree(y); });
    order.resize(static_cast<std::size_t>(lo));
    std::sort(order.begin(), order.end());
    seeds.push_back(order);
  }
  // random seeds until budget
  while (spent < budget && seeds.size() < 24) {
    seeds.push_back(rng.sample(n, lo));
    spent += n;
  }
  for (auto& s : seeds) {
    auto res = try_pair(std::move(s));
    if (res) return res;
    if (spent > budget) break;
  }
  return std::nullopt;
}

ClassifyResult classify_case(const Graph& g, int r, Rat alpha, long long budget,
                             std::uint64_t seed) {
  int n = g.n();
  if (2 * g.min_degree() < n + r - 2)
    throw domain_error("minimum degree below (n+r-2)/2");
  ClassifyResult out;
  auto wit = detect_alpha_extremal(g, alpha, budget, seed);
  if (!wit) {
    out.kind = CaseKind::non_extremal;
    return out;
  }
  const std::vector<int>& A = wit->a;
  const std::vector<int>& B = wit->b;
  std::vector<int> inter = set_intersect(A, B);
  long long mn = static_cast<long long>(std::min(A.size(), B.size()));
  // alpha' = 4*alpha; profile threshold (1/2 - 3*alpha') n
  Rat thr = rat_sub(Rat(1, 2), rat_mul(Rat(12, 1), alpha));
  long long max_moves = (10 * alpha.num * n + alpha.den - 1) / alpha.den;

  auto deg_ok = [&](int v, const std::vector<int>& into) {
    return static_cast<long long>(g.degree_into(v, into)) * thr.den >=
           thr.num * static_cast<long long>(n);
  };

  if (static_cast<long long>(inter.size()) * alpha.den >=
      mn * (alpha.den - 10 * alpha.num)) {
    // nearly the same set: extremal two, A* = A ∪ B, B* = rest
    out.kind = CaseKind::extremal_two;
    std::vector<int> a_star = set_union(A, B);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> b_star = set_minus(all, a_star);
    long long moves = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < a_star.size(); ++i) {
        if (!deg_ok(a_star[i], b_star)) {
          b_star = set_union(b_star, {a_star[i]});
          a_star.erase(a_star.begin() + static_cast<long>(i));
          changed = true;
          if (++moves > max_moves) {
            out.cleanup_ok = false;
            out.note = "profile cleanup exceeded the move cap";
            break;
          }
          break;
        }
      }
      if (!out.cleanup_ok) break;
    }
    out.a = std::move(a_star);
    out.b = std::move(b_star);
    return out;
  }
  if (static_cast<long long>(inter.size()) * alpha.den <= 10 * alpha.num * mn) {
    // nearly disjoint: extremal one
    out.kind = CaseKind::extremal_one;
    std::vector<int> a_star = set_minus(A, inter);
    std::vector<int> b_star = set_minus(B, inter);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> c_star = set_minus(set_minus(all, a_star), b_star);
    long long moves = 0;
    bool changed = true;
    while (changed && out.cleanup_ok) {
      changed = false;
      for (std::size_t i = 0; i < a_star.size() && !changed; ++i)
        if (!deg_ok(a_star[i], a_star)) {
          c_star = set_union(c_star, {a_star[i]});
          a_star.erase(a_star.begin() + static_cast<long>(i));
          changed = true;
        }
      for (std::size_t i = 0; i < b_star.size() && !changed; ++i)
        if (!deg_ok(b_star[i], b_star)) {
          c_star = set_union(c_star, {b_star[i]});
          b_star.erase(b_star.begin() + static_cast<long>(i));
          changed = true;
        }
      if (changed && ++moves > max_moves) {
        out.cleanup_ok = false;
        out.note = "profile cleanup exceeded the move cap";
      }
    }
    out.a = std::move(a_star);
    out.b = std::move(b_star);
    out.c = std::move(c_star);
    return out;
  }
  out.kind = CaseKind::non_extremal;
  out.note = "witness overlap matched neither profile; treated as non-extremal";
  return out;
}

namespace {

struct EmbedState {
  const Graph* host = nullptr;
  int s = 0;
  int blocks = 0;
  bool half = false;
  bool first_reduced = true;
  long long max_nodes = 0;
  long long nodes = 0;
  bool budget_out = false;
  std::vector<int> side_a, side_b;
  std::vector<int> start, end;  // effective constraint sets (sorted)
  std::vector<char> used_a, used_b;
  std::vector<std::vector<int>> tuples;
  std::size_t deepest = 0;
};

bool join_reduced(const EmbedState& st, int join_index) {
  if (!st.half) return false;
  bool even = join_index % 2 == 0;
  return st.first_reduced ? even : !even;
}

// every unused vertex keeps enough partners among unused ∪ frontier
bool degree_feasible(const EmbedState& st) {
  int need = st.half ? st.s - 1 : st.s;
  if (need <= 0) return true;
  static const std::vector<int> kEmpty;
  const std::vector<int>& frontier = st.tuples.empty() ? kEmpty : st.tuples.back();
  for (int pass = 0; pass < 2; ++pass) {
    const std::vector<int>& mine = pass == 0 ? st.side_a : st.side_b;
    const std::vector<char>& used = pass == 0 ? st.used_a : st.used_b;
    const std::vector<int>& other = pass == 0 ? st.side_b : st.side_a;
    const std::vector<char>& other_used = pass == 0 ? st.used_b : st.used_a;
    for (std::size_t i = 0; i < mine.size(); ++i) {
      if (used[i]) continue;
      int have = 0;
      for (std::size_t j = 0; j < other.size() && have < need; ++j)
        if (!other_used[j] && st.host->has_edge(mine[i], other[j])) ++have;
      if (have < need)
        for (int f : frontier) {
          if (st.host->has_edge(mine[i], f)) ++have;
          if (have >= need) break;
        }
      if (have < need) return false;
    }
  }
  return true;
}

bool place_block(EmbedState& st, int b);

bool place_position(EmbedState& st, int b, int pos, int min_idx) {
  if (++st.nodes > st.max_nodes) {
    st.budget_out = true;
    return false;
  }
  std::size_t depth = static_cast<std::size_t>(b) * st.s + pos;
  if (depth > st.deepest) st.deepest = depth;
  if (pos == st.s) {
    if (!degree_feasible(st)) return false;
    return place_block(st, b + 1);
  }
  bool a_side = b % 2 == 0;
  const std::vector<int>& side = a_side ? st.side_a : st.side_b;
  std::vector<char>& used = a_side ? st.used_a : st.used_b;
  bool reduced_prev = b > 0 && join_reduced(st, b - 1);
  bool full_prev = b == 0 || !reduced_prev;
  bool full_next = b == st.blocks - 1 || !join_reduced(st, b);
  bool ascending = full_prev && full_next;
  const std::vector<int>* constraint = nullptr;
  if (b == 0 && !st.start.empty()) constraint = &st.start;
  if (b == st.blocks - 1 && !st.end.empty()) constraint = &st.end;
  const std::vector<int>& prev = b > 0 ? st.tuples[b - 1] : st.side_a;

  int from = ascending ? min_idx : 0;
  for (int i = from; i < static_cast<int>(side.size()); ++i) {
    if (used[i]) continue;
    int v = side[i];
    if (constraint && !set_contains(*constraint, v)) continue;
    if (b > 0) {
      bool ok = true;
      for (int l = 0; l < st.s; ++l) {
        if (reduced_prev && l == pos) continue;
        if (!st.host->has_edge(v, prev[l])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
    }
    used[i] = 1;
    st.tuples[b].push_back(v);
    if (place_position(st, b, pos + 1, i + 1)) return true;
    st.tuples[b].pop_back();
    used[i] = 0;
    if (st.budget_out) return false;
  }
  return false;
}

bool place_block(EmbedState& st, int b) {
  if (b == st.blocks) return true;
  // the final opposite-side block must fit inside the end constraint
  if (!st.end.empty() && b < st.blocks - 1) {
    int left = 0;
    for (std::size_t j = 0; j < st.side_b.size(); ++j)
      if (!st.used_b[j] && set_contains(st.end, st.side_b[j])) ++left;
    if (left < st.s) return false;
  }
  st.tuples.resize(static_cast<std::size_t>(b) + 1);
  bool ok = place_position(st, b, 0, 0);
  if (!ok) st.tuples.resize(static_cast<std::size_t>(b));
  return ok;
}

}  // namespace

EmbedResult embed_spanning_path_blowup(const Graph& host, const std::vector<int>& a,
                                       const std::vector<int>& b, int s,
                                       const std::vector<int>& start,
                                       const std::vector<int>& end, EmbedOptions opt) {
  if (s < 1) throw domain_error("tuple size must be positive");
  if (a.size() != b.size()) throw domain_error("sides must balance");
  if (a.size() % s != 0) throw domain_error("side size must be a multiple of s");
  if (a.size() > 40) throw domain_error("side size capped at 40");
  EmbedResult res;
  if (a.empty()) {
    res.ok = true;
    return res;
  }
  EmbedState st;
  st.host = &host;
  st.s = s;
  st.blocks = 2 * static_cast<int>(a.size()) / s;
  st.half = opt.half;
  st.first_reduced = opt.first_join_reduced;
  st.max_nodes = opt.max_nodes;
  st.side_a = a;
  st.side_b = b;
  std::sort(st.side_a.begin(), st.side_a.end());
  std::sort(st.side_b.begin(), st.side_b.end());
  if (opt.order_seed != 0) {
    Rng order_rng(opt.order_seed);
    order_rng.shuffle(st.side_a);
    order_rng.shuffle(st.side_b);
  }
  st.start = start;
  st.end = end;
  std::sort(st.start.begin(), st.start.end());
  std::sort(st.end.begin(), st.end.end());
  st.used_a.assign(st.side_a.size(), 0);
  st.used_b.assign(st.side_b.size(), 0);
  // recursion holds references into tuples; capacity must cover every block
  st.tuples.reserve(static_cast<std::size_t>(st.blocks));

  bool ok = place_block(st, 0);
  res.nodes = st.nodes;
  res.deepest = st.deepest;
  res.budget_exhausted = st.budget_out;
  if (!ok) return res;
  res.ok = true;
  res.tuples = st.tuples;
  for (int j = 0; j + 1 < st.blocks; ++j) {
    bool red = join_reduced(st, j);
    for (int i = 0; i < s; ++i)
      for (int l = 0; l < s; ++l) {
        if (red && i == l) continue;
        int u = res.tuples[j][i], v = res.tuples[j + 1][l];
        res.edges.push_back({std::min(u, v), std::max(u, v)});
      }
  }
  std::sort(res.edges.begin(), res.edges.end());
  return res;
}

}  // namespace spanreg
