#include "spanreg/solvers.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spanreg/errors.hpp"
#include "spanreg/regularity.hpp"

namespace spanreg {

namespace {

std::vector<int> sorted_copy(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

Edge norm_edge(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

void check_degree_floor(const Graph& g, int r) {
  if (r < 2) throw domain_error("degree target must be at least 2");
  const long long n = g.n();
  if (n == 0) throw domain_error("empty host");
  if (n * r % 2 != 0) throw domain_error("n*r must be even");
  if (2LL * g.min_degree() < n + r - 2)
    throw domain_error("minimum degree below (n+r-2)/2");
}

// Running solver state: claimed vertices, the edge set placed so far and
// the stage log.  Side remainders are always recomputed from `used` so
// every stage sees the live ledger.
struct Assembly {
  const Graph* g = nullptr;
  int r = 0;
  std::vector<char> used;
  std::set<Edge> edges;
  std::vector<SolveStage> stages;

  Assembly(const Graph& host, int deg)
      : g(&host), r(deg), used(static_cast<std::size_t>(host.n()), 0) {}

  std::vector<int> remaining(const std::vector<int>& side) const {
    std::vector<int> out;
    for (int v : side)
      if (!used[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
  }

  std::vector<int> used_list() const {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(used.size()); ++v)
      if (used[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
  }

  void claim(const std::vector<int>& vs) {
    for (int v : vs) used[static_cast<std::size_t>(v)] = 1;
  }

  void add_edges(const std::vector<Edge>& es) {
    for (const Edge& e : es) edges.insert(norm_edge(e.first, e.second));
  }

  void take(const GadgetEmbedding& emb) {
    claim(emb.consumed);
    add_edges(emb.edges);
  }

  void log(std::string name, bool ok, std::string detail) {
    stages.push_back({std::move(name), ok, std::move(detail)});
  }
};

SolveResult failed(Assembly& as, const std::string& stage, const std::string& detail) {
  as.log(stage, false, detail);
  SolveResult out;
  out.stages = as.stages;
  out.failed_stage = stage;
  return out;
}

SolveResult completed(Assembly& as) {
  SolveResult out;
  out.cert.r = as.r;
  out.cert.edges.assign(as.edges.begin(), as.edges.end());
  out.report = verify_certificate(*as.g, out.cert);
  as.log("verify", out.report.ok,
         out.report.ok ? "kappa " + std::to_string(out.report.kappa) : out.report.detail);
  out.stages = as.stages;
  out.ok = out.report.ok;
  if (!out.ok) out.failed_stage = "verify";
  return out;
}

std::string fail_text(const GadgetResult& res) {
  if (res.role.empty()) return res.reason;
  return res.role + ": " + res.reason;
}

const EndTuple& end_by_label(const GadgetEmbedding& emb, const std::string& label) {
  for (const EndTuple& e : emb.ends)
    if (e.label == label) return e;
  throw std::logic_error("gadget is missing its '" + label + "' end");
}

// One side's growing chain through bridges and absorbers.
struct Chain {
  EndTuple front, back;
};

// Joins x to y through fresh blocks from the side remainder; equal tags
// take two blocks, a tag flip takes one.
bool link_ends(const Graph& g, Assembly& as, const std::vector<int>& side,
               const EndTuple& x, const EndTuple& y, int r, std::string* why) {
  int j = x.tag == y.tag ? 2 : 1;
  GadgetResult res = connect_ends(g, x, y, as.remaining(side), r, j);
  if (!res.ok) {
    *why = fail_text(res);
    return false;
  }
  as.take(res.emb);
  return true;
}

// Extends a minus-matching end by one fresh block so later glues and the
// closure seams only ever meet full-join ends.
bool ensure_full_end(const Graph& g, Assembly& as, const std::vector<int>& side,
                     EndTuple* end, int r, std::string* why) {
  if (end->tag == Tag::needs_full_join) return true;
  PathStructure ps;
  ps.r = r;
  ps.s = tuple_width(r);
  ps.used = as.used_list();
  ps.back = *end;
  GadgetResult res = extend_block(g, ps, as.remaining(side));
  if (!res.ok) {
    *why = fail_text(res);
    return false;
  }
  as.take(res.emb);
  *end = ps.back;
  return true;
}

// Builds the absorber for one leftover vertex, glues it onto the chain and
// advances the chain past it.  dirty reports whether any state changed, so
// a caller may retry the other side only after a clean failure.
bool absorb_leftover(const Graph& g, Assembly& as, const std::vector<int>& side, Chain* ch,
                     int u, int r, bool* dirty, std::string* why) {
  *dirty = false;
  AbsorberKind kind = r % 2 == 0 ? AbsorberKind::xi_even : AbsorberKind::xi_odd;
  GadgetResult res = build_absorber(g, kind, {u}, as.remaining(side), r);
  if (!res.ok) {
    *why = fail_text(res);
    return false;
  }
  *dirty = true;
  as.take(res.emb);
  if (!link_ends(g, as, side, ch->back, end_by_label(res.emb, "left"), r, why)) return false;
  ch->back = end_by_label(res.emb, "right");
  return ensure_full_end(g, as, side, &ch->back, r, why);
}

// Depth-first Hamilton path on g[span] anchored at from/to outside it,
// lowest id first.  The node budget bounds pathological hosts; span is
// empty-allowed (the direct edge).
bool hamilton_thread(const Graph& g, const std::vector<int>& span, int from, int to,
                     std::vector<Edge>* out) {
  if (span.empty()) {
    if (!g.has_edge(from, to)) return false;
    out->push_back(norm_edge(from, to));
    return true;
  }
  std::vector<int> order;
  std::vector<char> taken(span.size(), 0);
  long long budget = 4'000'000;
  std::function<bool(int)> go = [&](int cur) -> bool {
    if (--budget < 0) return false;
    if (order.size() == span.size()) return g.has_edge(cur, to);
    for (std::size_t i = 0; i < span.size(); ++i) {
      if (taken[i] || !g.has_edge(cur, span[i])) continue;
      taken[i] = 1;
      order.push_back(span[i]);
      if (go(span[i])) return true;
      taken[i] = 0;
      order.pop_back();
    }
    return false;
  };
  if (!go(from)) return false;
  int prev = from;
  for (int v : order) {
    out->push_back(norm_edge(prev, v));
    prev = v;
  }
  out->push_back(norm_edge(prev, to));
  return true;
}

// r=2: the bridge degenerates to the two cross edges themselves and each
// side closes with a Hamilton thread between its cross endpoints.
SolveResult solve_one_hamilton(const Graph& g, Assembly& as, const std::vector<int>& A,
                               const std::vector<int>& B, const std::vector<int>& C) {
  const int n = g.n();
  GadgetResult mt = find_cross_matching(g, A, B, 2, Rat{1, 5});
  if (!mt.ok) return failed(as, "cross_matching", fail_text(mt));
  int a1 = mt.emb.role("x_a_1"), b1 = mt.emb.role("x_b_1");
  int a2 = mt.emb.role("x_a_2"), b2 = mt.emb.role("x_b_2");
  as.log("cross_matching", true, "2 cross edges");

  GadgetEmbedding bridge;
  bridge.kind = "bridge_even";
  bridge.add_role("x_a_1", a1);
  bridge.add_role("x_b_1", b1);
  bridge.add_role("x_a_2", a2);
  bridge.add_role("x_b_2", b2);
  bridge.edges = {norm_edge(a1, b1), norm_edge(a2, b2)};
  std::sort(bridge.edges.begin(), bridge.edges.end());
  bridge.consumed = sorted_copy({a1, a2, b1, b2});
  bridge.ends = {{{a1}, Tag::needs_full_join, "a_left"},
                 {{a2}, Tag::needs_full_join, "a_right"},
                 {{b1}, Tag::needs_full_join, "b_left"},
                 {{b2}, Tag::needs_full_join, "b_right"}};
  EmbeddingCheck ec = validate_embedding(g, bridge, 2);
  if (!ec.ok) return failed(as, "bridges", ec.detail);
  as.take(bridge);
  as.log("bridges", true, "degenerate width-1 bridge");

  std::vector<int> span_a = as.remaining(A);
  std::vector<int> span_b = as.remaining(B);
  for (int u : C)
    (5LL * g.degree_into(u, A) >= n ? span_a : span_b).push_back(u);
  std::sort(span_a.begin(), span_a.end());
  std::sort(span_b.begin(), span_b.end());

  std::vector<Edge> path;
  if (!hamilton_thread(g, span_a, a1, a2, &path))
    return failed(as, "closure", "a side has no Hamilton thread between its cross endpoints");
  if (!hamilton_thread(g, span_b, b1, b2, &path))
    return failed(as, "closure", "b side has no Hamilton thread between its cross endpoints");
  as.add_edges(path);
  as.claim(span_a);
  as.claim(span_b);
  as.log("closure", true,
         "threaded " + std::to_string(span_a.size()) + "+" + std::to_string(span_b.size()) +
             " side vertices");
  return completed(as);
}

// Splits rem alternately, tiles fresh blocks onto the chain while a half
// exceeds the embedding cap, then embeds the blow-up path and seams it to
// both chain ends with direct full joins.
bool close_side(const Graph& g, Assembly& as, const std::vector<int>& side, Chain* ch, int r,
                std::string* why) {
  const int s = tuple_width(r);
  const bool even = r % 2 == 0;
  std::vector<int> rem = as.remaining(side);
  if (rem.empty()) {
    GadgetResult res = connect_ends(g, ch->front, ch->back, {}, r, 0);
    if (!res.ok) {
      *why = fail_text(res);
      return false;
    }
    as.take(res.emb);
    return true;
  }
  if (rem.size() % 2 != 0) {
    *why = "odd side remainder";
    return false;
  }
  while (rem.size() > 80) {
    for (int t = 0; t < 2; ++t) {
      PathStructure ps;
      ps.r = r;
      ps.s = s;
      ps.used = as.used_list();
      ps.back = ch->back;
      GadgetResult res = extend_block(g, ps, as.remaining(side));
      if (!res.ok) {
        *why = "tiling: " + fail_text(res);
        return false;
      }
      as.take(res.emb);
      ch->back = ps.back;
    }
    rem = as.remaining(side);
  }
  std::vector<int> h1, h2;
  for (std::size_t i = 0; i < rem.size(); ++i) (i % 2 == 0 ? h1 : h2).push_back(rem[i]);
  if (h1.size() % static_cast<std::size_t>(s) != 0) {
    *why = "remainder " + std::to_string(rem.size()) + " not tuple-divisible";
    return false;
  }
  std::vector<int> startc = set_intersect(h1, common_neighbors(g, ch->front.verts));
  std::vector<int> endc = set_intersect(h2, common_neighbors(g, ch->back.verts));
  if (static_cast<int>(startc.size()) < s || static_cast<int>(endc.size()) < s) {
    *why = "seam neighborhoods too small";
    return false;
  }
  EmbedOptions opt;
  opt.half = !even;
  opt.first_join_reduced = true;
  EmbedResult er = embed_spanning_path_blowup(g, h1, h2, s, startc, endc, opt);
  if (!er.ok) {
    *why = er.budget_exhausted ? "embedding budget exhausted" : "no tuple path embeds";
    return false;
  }
  as.add_edges(er.edges);
  as.claim(rem);
  EndTuple t1{er.tuples.front(), Tag::needs_full_join, "seam"};
  EndTuple tk{er.tuples.back(), Tag::needs_full_join, "seam"};
  GadgetResult s1 = connect_ends(g, ch->front, t1, {}, r, 0);
  if (!s1.ok) {
    *why = "front seam: " + fail_text(s1);
    return false;
  }
  as.take(s1.emb);
  GadgetResult s2 = connect_ends(g, tk, ch->back, {}, r, 0);
  if (!s2.ok) {
    *why = "back seam: " + fail_text(s2);
    return false;
  }
  as.take(s2.emb);
  return true;
}

}  // namespace

ExtremalDecomposition make_extremal_decomposition(const Graph& g, ExtremalCase kind,
                                                  std::vector<int> a, std::vector<int> b,
                                                  std::vector<int> c, Rat alpha) {
  const int n = g.n();
  if (alpha.num <= 0 || 4 * alpha.num > alpha.den)
    throw domain_error("alpha must lie in (0, 1/4]");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::sort(c.begin(), c.end());
  std::vector<int> all;
  all.reserve(a.size() + b.size() + c.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  all.insert(all.end(), c.begin(), c.end());
  std::sort(all.begin(), all.end());
  if (static_cast<int>(all.size()) != n)
    throw domain_error("classes must cover every vertex exactly once");
  for (int v = 0; v < n; ++v)
    if (all[static_cast<std::size_t>(v)] != v)
      throw domain_error("classes must cover every vertex exactly once");
  if (a.empty() || b.empty()) throw domain_error("sides must be nonempty");
  auto near_half = [&](std::size_t sz) {
    return 2 * alpha.den * static_cast<long long>(sz) >=
           static_cast<long long>(n) * (alpha.den - 4 * alpha.num);
  };
  if (!near_half(a.size()) || !near_half(b.size()))
    throw domain_error("sides fall below the near-half floor");

  ExtremalDecomposition dec;
  dec.kind = kind;
  dec.alpha = alpha;
  if (kind == ExtremalCase::one) {
    if (static_cast<long long>(c.size()) * alpha.den > 2LL * alpha.num * n)
      throw domain_error("leftover set exceeds the alpha budget");
  } else {
    if (!c.empty()) throw domain_error("case two has no leftover set");
    if (n % 2 != 0) throw domain_error("case two needs an even order");
    if (a.size() > b.size()) std::swap(a, b);
    if ((b.size() - a.size()) % 2 != 0) throw domain_error("side imbalance must be even");
    int m = static_cast<int>(b.size() - a.size()) / 2;
    if (static_cast<long long>(m) * alpha.den > static_cast<long long>(alpha.num) * n)
      throw domain_error("imbalance exceeds the alpha budget");
    dec.m = m;
  }
  dec.a = std::move(a);
  dec.b = std::move(b);
  dec.c = std::move(c);
  return dec;
}

std::vector<Star> find_disjoint_stars(const Graph& g, int m, int s) {
  if (s < 1) throw domain_error("leaf count must be positive");
  if (m < 0) throw domain_error("star count must be nonnegative");
  if (m == 0) return {};
  if (g.min_degree() < m + s - 1)
    throw domain_error("minimum degree " + std::to_string(g.min_degree()) + " too low for " +
                       std::to_string(2 * m) + " disjoint stars");
  std::vector<char> alive(static_cast<std::size_t>(g.n()), 1);
  std::vector<int> deg(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) deg[static_cast<std::size_t>(v)] = g.degree(v);
  std::vector<Star> out;
  while (static_cast<int>(out.size()) < 2 * m) {
    int best = -1;
    for (int v = 0; v < g.n(); ++v)
      if (alive[static_cast<std::size_t>(v)] && deg[static_cast<std::size_t>(v)] >= s &&
          (best == -1 || deg[static_cast<std::size_t>(v)] > deg[static_cast<std::size_t>(best)]))
        best = v;
    if (best == -1)
      throw std::logic_error("disjoint star harvest stalled despite the degree floor");
    Star st;
    st.center = best;
    for (int y : g.neighbors(best)) {
      if (!alive[static_cast<std::size_t>(y)]) continue;
      st.leaves.push_back(y);
      if (static_cast<int>(st.leaves.size()) == s) break;
    }
    std::vector<int> verts = st.leaves;
    verts.push_back(best);
    for (int x : verts) {
      alive[static_cast<std::size_t>(x)] = 0;
      for (int y : g.neighbors(x))
        if (alive[static_cast<std::size_t>(y)]) --deg[static_cast<std::size_t>(y)];
    }
    out.push_back(std::move(st));
  }
  return out;
}

SolveResult solve_extremal_one(const Graph& g, const ExtremalDecomposition& dec, int r) {
  if (dec.kind != ExtremalCase::one) throw domain_error("decomposition is not case one");
  check_degree_floor(g, r);
  const int n = g.n();
  Assembly as(g, r);

  std::vector<int> A = sorted_copy(dec.a);
  std::vector<int> B = sorted_copy(dec.b);
  if (A.size() > B.size()) A.swap(B);
  const std::vector<int> C = sorted_copy(dec.c);

  if (r == 2) return solve_one_hamilton(g, as, A, B, C);

  const bool even = r % 2 == 0;

  // Cross matching.  Odd r with no leftovers and odd sides swaps one
  // bridge pair for the single-cross rider to fix the side parity.
  bool rider = !even && C.empty() && A.size() % 2 == 1;
  int pairs = even ? r / 2 : (rider ? (r - 1) / 2 : (r + 1) / 2);
  GadgetResult mt = find_cross_matching(g, A, B, 2 * pairs, Rat{1, 5}, rider ? 1 : 0,
                                        rider ? r - 1 : 0);
  if (!mt.ok) return failed(as, "cross_matching", fail_text(mt));
  std::vector<Edge> crosses;
  for (int i = 1; i <= 2 * pairs; ++i)
    crosses.push_back({mt.emb.role("x_a_" + std::to_string(i)),
                       mt.emb.role("x_b_" + std::to_string(i))});
  Edge rider_edge{-1, -1};
  if (rider)
    rider_edge = {mt.emb.role("x_a_special_1"), mt.emb.role("x_b_special_1")};
  const std::vector<int> endpoints = mt.emb.attach;
  as.log("cross_matching", true,
         std::to_string(2 * pairs + (rider ? 1 : 0)) + " disjoint cross edges");

  // Bridges.  Unclaimed matching endpoints stay out of the filler pools.
  std::vector<GadgetEmbedding> units;
  for (int i = 0; i < pairs; ++i) {
    std::vector<int> pa = set_minus(as.remaining(A), endpoints);
    std::vector<int> pb = set_minus(as.remaining(B), endpoints);
    GadgetResult res = build_bridge(g, crosses[2 * static_cast<std::size_t>(i)],
                                    crosses[2 * static_cast<std::size_t>(i) + 1], pa, pb, r);
    if (!res.ok) return failed(as, "bridges", fail_text(res));
    as.take(res.emb);
    units.push_back(res.emb);
  }
  if (rider) {
    std::vector<int> pa = set_minus(as.remaining(A), endpoints);
    std::vector<int> pb = set_minus(as.remaining(B), endpoints);
    GadgetResult res = build_rider_bridge(g, rider_edge, pa, pb, r);
    if (!res.ok) return failed(as, "bridges", fail_text(res));
    as.take(res.emb);
    units.push_back(res.emb);
  }
  as.log("bridges", true, std::to_string(units.size()) + " bridges");

  // Glue the bridges into one chain per side.
  Chain ca{end_by_label(units.front(), "a_left"), end_by_label(units.front(), "a_right")};
  Chain cb{end_by_label(units.front(), "b_left"), end_by_label(units.front(), "b_right")};
  for (std::size_t i = 1; i < units.size(); ++i) {
    std::string why;
    if (!link_ends(g, as, A, ca.back, end_by_label(units[i], "a_left"), r, &why))
      return failed(as, "glue_bridges", "a side: " + why);
    ca.back = end_by_label(units[i], "a_right");
    if (!link_ends(g, as, B, cb.back, end_by_label(units[i], "b_left"), r, &why))
      return failed(as, "glue_bridges", "b side: " + why);
    cb.back = end_by_label(units[i], "b_right");
  }
  as.log("glue_bridges", true, std::to_string(units.size() - 1) + " joins per side");

  // Leftover absorption.  Each vertex goes to the side holding a fifth of
  // the graph among its neighbors; for odd r the absorber claims an odd
  // vertex count, so one assignment may flip to fix the side parity.
  std::vector<char> to_a(C.size(), 0);
  for (std::size_t i = 0; i < C.size(); ++i)
    to_a[i] = 5LL * g.degree_into(C[i], A) >= n ? 1 : 0;
  if (!even && !C.empty()) {
    long long cnt_a = std::count(to_a.begin(), to_a.end(), static_cast<char>(1));
    if ((static_cast<long long>(as.remaining(A).size()) - cnt_a) % 2 != 0) {
      std::size_t flip = 0;
      long long best = -1;
      for (std::size_t i = 0; i < C.size(); ++i) {
        long long slack = g.degree_into(C[i], to_a[i] ? B : A);
        if (slack > best) {
          best = slack;
          flip = i;
        }
      }
      to_a[flip] ^= 1;
    }
  }
  for (std::size_t i = 0; i < C.size(); ++i) {
    std::string why;
    bool dirty = false;
    bool ok =
        absorb_leftover(g, as, to_a[i] ? A : B, to_a[i] ? &ca : &cb, C[i], r, &dirty, &why);
    if (!ok && even && !dirty)
      ok = absorb_leftover(g, as, to_a[i] ? B : A, to_a[i] ? &cb : &ca, C[i], r, &dirty, &why);
    if (!ok)
      return failed(as, "absorb_exceptional",
                    "vertex " + std::to_string(C[i]) + ": " + why);
  }
  as.log("absorb_exceptional", true, std::to_string(C.size()) + " leftover vertices");

  // Divisibility: trim each remainder to 0 mod r (even) resp. 0 mod r+1
  // (odd) with degree-shifting absorbers.
  for (int side_ix = 0; side_ix < 2; ++side_ix) {
    const std::vector<int>& side = side_ix ? B : A;
    Chain* ch = side_ix ? &cb : &ca;
    const char* label = side_ix ? "b side" : "a side";
    if (even) {
      int need = static_cast<int>(as.remaining(side).size()) % r;
      for (int t = 0; t < need; ++t) {
        std::vector<int> rem = as.remaining(side);
        if (rem.empty())
          return failed(as, "divisibility", std::string(label) + ": remainder exhausted");
        int target = rem.front();
        GadgetResult res = build_absorber(g, AbsorberKind::xi_prime_even, {target},
                                          set_minus(rem, {target}), r);
        if (!res.ok) return failed(as, "divisibility", std::string(label) + ": " + fail_text(res));
        as.take(res.emb);
        std::string why;
        if (!link_ends(g, as, side, ch->back, end_by_label(res.emb, "left"), r, &why))
          return failed(as, "divisibility", std::string(label) + ": " + why);
        ch->back = end_by_label(res.emb, "right");
      }
    } else {
      std::vector<int> rem = as.remaining(side);
      if (rem.size() % 2 != 0)
        return failed(as, "divisibility", std::string(label) + ": odd remainder after absorption");
      int need = static_cast<int>(rem.size()) % (r + 1);
      for (int t = 0; t < need / 2; ++t) {
        rem = as.remaining(side);
        int u1 = -1, u2 = -1;
        for (std::size_t i = 0; i < rem.size() && u1 < 0; ++i)
          for (std::size_t j = i + 1; j < rem.size(); ++j)
            if (g.has_edge(rem[i], rem[j])) {
              u1 = rem[i];
              u2 = rem[j];
              break;
            }
        if (u1 < 0)
          return failed(as, "divisibility", std::string(label) + ": no remainder edge to absorb");
        GadgetResult res = build_absorber(g, AbsorberKind::xi_prime_odd, {u1, u2},
                                          set_minus(rem, {u1, u2}), r);
        if (!res.ok) return failed(as, "divisibility", std::string(label) + ": " + fail_text(res));
        as.take(res.emb);
        std::string why;
        if (!link_ends(g, as, side, ch->back, end_by_label(res.emb, "left"), r, &why))
          return failed(as, "divisibility", std::string(label) + ": " + why);
        ch->back = end_by_label(res.emb, "right");
        if (!ensure_full_end(g, as, side, &ch->back, r, &why))
          return failed(as, "divisibility", std::string(label) + ": " + why);
      }
    }
  }
  as.log("divisibility", true,
         "remainders " + std::to_string(as.remaining(A).size()) + "+" +
             std::to_string(as.remaining(B).size()));

  std::string why;
  if (!close_side(g, as, A, &ca, r, &why)) return failed(as, "closure", "a side: " + why);
  if (!close_side(g, as, B, &cb, r, &why)) return failed(as, "closure", "b side: " + why);
  as.log("closure", true, "both sides closed");
  return completed(as);
}

SolveResult solve_extremal_two(const Graph& g, const ExtremalDecomposition& dec, int r) {
  if (dec.kind != ExtremalCase::two) throw domain_error("decomposition is not case two");
  check_degree_floor(g, r);
  const int n = g.n();
  const int s = tuple_width(r);
  const bool even = r % 2 == 0;
  Assembly as(g, r);
  const std::vector<int> A = sorted_copy(dec.a);
  const std::vector<int> B = sorted_copy(dec.b);
  const int m = dec.m;

  // Harvest: 2(m-m') disjoint K_{1,s} inside the sparse part of b, plus m'
  // K_{1,r} centered on dense vertices, m' capped by how many exist.
  std::vector<int> b_sparse, b_dense;
  for (int v : B) {
    long long d = g.degree_into(v, B);
    if (d * dec.alpha.den <= 2LL * s * dec.alpha.num * n)
      b_sparse.push_back(v);
    else
      b_dense.push_back(v);
  }
  int mp = std::min(static_cast<int>(b_dense.size()), m);
  std::vector<Star> stars;
  if (m - mp > 0) {
    Graph gb = induced_subgraph(g, b_sparse);
    std::vector<Star> local;
    try {
      local = find_disjoint_stars(gb, m - mp, s);
    } catch (const domain_error& e) {
      return failed(as, "harvest", e.what());
    }
    for (const Star& st : local) {
      Star mapped;
      mapped.center = b_sparse[static_cast<std::size_t>(st.center)];
      for (int l : st.leaves) mapped.leaves.push_back(b_sparse[static_cast<std::size_t>(l)]);
      stars.push_back(std::move(mapped));
    }
  }
  std::vector<char> in_unit(static_cast<std::size_t>(n), 0);
  for (const Star& st : stars) {
    in_unit[static_cast<std::size_t>(st.center)] = 1;
    for (int l : st.leaves) in_unit[static_cast<std::size_t>(l)] = 1;
  }
  std::vector<int> centers = b_dense;
  std::sort(centers.begin(), centers.end(), [&](int x, int y) {
    int dx = g.degree_into(x, B), dy = g.degree_into(y, B);
    return dx != dy ? dx > dy : x < y;
  });
  std::vector<Star> deg_units;
  for (int t = 0; t < mp; ++t) {
    bool placed = false;
    for (int x : centers) {
      if (in_unit[static_cast<std::size_t>(x)]) continue;
      std::vector<int> leaves;
      for (int y : g.neighbors(x)) {
        if (in_unit[static_cast<std::size_t>(y)] || !set_contains(B, y)) continue;
        leaves.push_back(y);
        if (static_cast<int>(leaves.size()) == r) break;
      }
      if (static_cast<int>(leaves.size()) < r) continue;
      in_unit[static_cast<std::size_t>(x)] = 1;
      for (int l : leaves) in_unit[static_cast<std::size_t>(l)] = 1;
      deg_units.push_back({x, std::move(leaves)});
      placed = true;
      break;
    }
    if (!placed)
      return failed(as, "harvest", "no degree-r star center with enough free neighbors");
  }
  std::vector<int> unit_verts;
  for (int v = 0; v < n; ++v)
    if (in_unit[static_cast<std::size_t>(v)]) unit_verts.push_back(v);
  as.log("harvest", true,
         "sparse " + std::to_string(b_sparse.size()) + ", stars " +
             std::to_string(stars.size()) + ", k1r " + std::to_string(deg_units.size()));

  // Start from a high-cross-degree a tuple and its joint b neighborhood.
  std::vector<int> by_cross = A;
  std::sort(by_cross.begin(), by_cross.end(), [&](int x, int y) {
    int dx = g.degree_into(x, B), dy = g.degree_into(y, B);
    return dx != dy ? dx > dy : x < y;
  });
  if (static_cast<int>(by_cross.size()) < s)
    return failed(as, "start", "a side smaller than the tuple width");
  std::vector<int> v_tuple(by_cross.begin(), by_cross.begin() + s);
  std::sort(v_tuple.begin(), v_tuple.end());
  std::vector<int> joint = set_minus(set_intersect(common_neighbors(g, v_tuple), B), unit_verts);
  if (static_cast<int>(joint.size()) < s)
    return failed(as, "start", "no joint b neighborhood for the start tuple");
  std::vector<int> u_tuple(joint.begin(), joint.begin() + s);
  PathStructure ps;
  GadgetResult st = make_path_start(g, v_tuple, u_tuple, r, &ps);
  if (!st.ok) return failed(as, "start", fail_text(st));
  as.log("start", true, "tuples placed");

  // Unit absorption; fresh b vertices never land inside another unit.
  const std::vector<int> pool_a = A;
  const std::vector<int> pool_b = set_minus(B, unit_verts);
  if (!stars.empty()) {
    GadgetResult res = extend_with_stars(g, ps, stars, pool_a, pool_b);
    if (!res.ok) return failed(as, "absorb_units", "stars: " + fail_text(res));
  }
  for (const Star& unit : deg_units) {
    GadgetResult res = extend_with_K1r(g, ps, unit, pool_a, pool_b);
    if (!res.ok) return failed(as, "absorb_units", "k1r: " + fail_text(res));
  }
  as.log("absorb_units", true,
         std::to_string(stars.size()) + " stars, " + std::to_string(deg_units.size()) +
             " degree-r stars");

  std::vector<int> a1 = set_minus(A, ps.used);
  std::vector<int> b1 = set_minus(B, ps.used);
  if (a1.size() != b1.size())
    return failed(as, "balance_one",
                  std::to_string(a1.size()) + " vs " + std::to_string(b1.size()));
  as.log("balance_one", true, "sides balanced at " + std::to_string(a1.size()));

  // Low-cross-degree absorption: thread each exceptional vertex through a
  // forced column, then restore the side alternation with a typical block.
  const long long rhs =
      static_cast<long long>(a1.size()) * dec.alpha.den - 5LL * s * dec.alpha.num * n;
  std::vector<int> ex_a, ex_b;
  for (int x : a1)
    if (static_cast<long long>(g.degree_into(x, b1)) * dec.alpha.den <= rhs) ex_a.push_back(x);
  for (int x : b1)
    if (static_cast<long long>(g.degree_into(x, a1)) * dec.alpha.den <= rhs) ex_b.push_back(x);
  const std::vector<int> pending = set_union(ex_a, ex_b);
  auto forced_pool = [&](int w, const std::vector<int>& side) {
    std::vector<int> pool{w};
    for (int u : set_minus(side, ps.used))
      if (u > w && !set_contains(pending, u)) pool.push_back(u);
    return pool;
  };
  auto typical_pool = [&](const std::vector<int>& side) {
    return set_minus(set_minus(side, ps.used), pending);
  };
  for (int w : ex_a) {
    if (set_contains(ps.used, w)) continue;
    GadgetResult r1 = extend_block(g, ps, forced_pool(w, A));
    if (!r1.ok)
      return failed(as, "absorb_exceptional",
                    "vertex " + std::to_string(w) + ": " + fail_text(r1));
    if (!set_contains(ps.used, w))
      return failed(as, "absorb_exceptional",
                    "vertex " + std::to_string(w) + " displaced from its forced column");
    GadgetResult r2 = extend_block(g, ps, typical_pool(B));
    if (!r2.ok) return failed(as, "absorb_exceptional", "rebalance: " + fail_text(r2));
  }
  for (int w : ex_b) {
    if (set_contains(ps.used, w)) continue;
    GadgetResult r1 = extend_block(g, ps, typical_pool(A));
    if (!r1.ok) return failed(as, "absorb_exceptional", "rebalance: " + fail_text(r1));
    GadgetResult r2 = extend_block(g, ps, forced_pool(w, B));
    if (!r2.ok)
      return failed(as, "absorb_exceptional",
                    "vertex " + std::to_string(w) + ": " + fail_text(r2));
    if (!set_contains(ps.used, w))
      return failed(as, "absorb_exceptional",
                    "vertex " + std::to_string(w) + " displaced from its forced column");
  }
  as.log("absorb_exceptional", true,
         std::to_string(ex_a.size()) + "+" + std::to_string(ex_b.size()) +
             " low-cross vertices");

  std::vector<int> a2 = set_minus(A, ps.used);
  std::vector<int> b2 = set_minus(B, ps.used);
  if (a2.size() != b2.size())
    return failed(as, "balance_two",
                  std::to_string(a2.size()) + " vs " + std::to_string(b2.size()));
  as.log("balance_two", true, "sides balanced at " + std::to_string(a2.size()));

  // Closure: blow-up path over the remainder, seamed to both live ends.
  if (a2.size() % static_cast<std::size_t>(s) != 0)
    return failed(as, "closure", "remainder not tuple-divisible");
  if (a2.empty()) {
    GadgetResult res = close_path(g, ps, {}, 0);
    if (!res.ok) return failed(as, "closure", fail_text(res));
    PathCheck pc = validate_path(g, ps);
    if (!pc.ok) return failed(as, "closure", pc.detail);
    as.add_edges(ps.edges);
    as.log("closure", true, "direct join");
    return completed(as);
  }
  while (a2.size() > 40) {
    GadgetResult r1 = extend_block(g, ps, set_minus(A, ps.used));
    if (!r1.ok) return failed(as, "closure", "tiling: " + fail_text(r1));
    GadgetResult r2 = extend_block(g, ps, set_minus(B, ps.used));
    if (!r2.ok) return failed(as, "closure", "tiling: " + fail_text(r2));
    a2 = set_minus(A, ps.used);
    b2 = set_minus(B, ps.used);
  }
  std::vector<int> startc = set_intersect(b2, common_neighbors(g, ps.front.verts));
  std::vector<int> endc = set_intersect(a2, common_neighbors(g, ps.back.verts));
  if (static_cast<int>(startc.size()) < s || static_cast<int>(endc.size()) < s)
    return failed(as, "closure", "seam neighborhoods too small");
  EmbedOptions opt;
  opt.half = !even;
  opt.first_join_reduced = false;
  EmbedResult er = embed_spanning_path_blowup(g, b2, a2, s, startc, endc, opt);
  if (!er.ok)
    return failed(as, "closure",
                  er.budget_exhausted ? "embedding budget exhausted" : "no tuple path embeds");
  EndTuple t1{er.tuples.front(), ps.front.tag, "seam"};
  EndTuple tk{er.tuples.back(), ps.back.tag, "seam"};
  GadgetResult s1 = connect_ends(g, ps.front, t1, {}, r, 0);
  if (!s1.ok) return failed(as, "closure", "front seam: " + fail_text(s1));
  GadgetResult s2 = connect_ends(g, tk, ps.back, {}, r, 0);
  if (!s2.ok) return failed(as, "closure", "back seam: " + fail_text(s2));
  as.add_edges(ps.edges);
  as.add_edges(er.edges);
  as.add_edges(s1.emb.edges);
  as.add_edges(s2.emb.edges);
  as.log("closure", true, std::to_string(a2.size() / static_cast<std::size_t>(s) * 2) +
                              " blow-up tuples");
  return completed(as);
}

}  // namespace spanreg
