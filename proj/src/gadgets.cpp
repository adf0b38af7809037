#include "spanreg/gadgets.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "json.hpp"
#include "spanreg/errors.hpp"

namespace spanreg {

int tuple_width(int r) {
  if (r < 2) throw domain_error("degree target must be at least 2");
  return (r + 1) / 2;
}

int end_deficiency(Tag tag, int width) {
  return tag == Tag::needs_full_join ? width : width - 1;
}

void GadgetEmbedding::add_role(const std::string& name, int v) { roles.push_back({name, v}); }

int GadgetEmbedding::role(const std::string& name) const {
  for (const auto& [rn, v] : roles)
    if (rn == name) return v;
  throw domain_error("no role named " + name);
}

GadgetResult gadget_ok(GadgetEmbedding emb) {
  GadgetResult res;
  res.ok = true;
  res.emb = std::move(emb);
  return res;
}

GadgetResult gadget_fail(std::string role, std::string reason) {
  GadgetResult res;
  res.ok = false;
  res.role = std::move(role);
  res.reason = std::move(reason);
  return res;
}

namespace {

Edge norm_edge(int u, int v) {
  if (u == v) throw domain_error("self loop in gadget edge set");
  return u < v ? Edge{u, v} : Edge{v, u};
}

std::string tag_name(Tag t) {
  return t == Tag::needs_full_join ? "needs_full_join" : "needs_join_minus_matching";
}

Tag flip(Tag t) {
  return t == Tag::needs_full_join ? Tag::needs_join_minus_matching : Tag::needs_full_join;
}

std::vector<int> canon_pool(const Graph& g, const std::vector<int>& pool) {
  std::vector<int> p = pool;
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  for (int v : p)
    if (v < 0 || v >= g.n()) throw domain_error("pool vertex out of range");
  return p;
}

// Symbolic embedding plan.  Slots are materialized in creation order; a pick
// slot takes the lowest pool vertex adjacent to every already-materialized
// linked slot, so every emitted edge is verified exactly once, at its later
// endpoint.  Fixed slots re-check host edges to earlier fixed slots the same
// way, which is what makes j = 0 direct joins honest.
class Plan {
 public:
  explicit Plan(const Graph& g) : g_(&g) {}

  int add_fixed(const std::string& name, int v) {
    if (v < 0 || v >= g_->n()) throw domain_error("vertex out of range in gadget input: " + name);
    names_.push_back(name);
    fixed_.push_back(v);
    pools_.push_back(nullptr);
    adj_.emplace_back();
    return static_cast<int>(names_.size()) - 1;
  }

  std::vector<int> add_fixed_tuple(const std::string& prefix, const std::vector<int>& verts) {
    std::vector<int> slots;
    for (std::size_t i = 0; i < verts.size(); ++i)
      slots.push_back(add_fixed(prefix + "_" + std::to_string(i + 1), verts[i]));
    return slots;
  }

  int add_pick(const std::string& name, const std::vector<int>* pool) {
    names_.push_back(name);
    fixed_.push_back(-1);
    pools_.push_back(pool);
    adj_.emplace_back();
    return static_cast<int>(names_.size()) - 1;
  }

  std::vector<int> add_pick_tuple(const std::string& prefix, int k, const std::vector<int>* pool) {
    std::vector<int> slots;
    for (int i = 0; i < k; ++i)
      slots.push_back(add_pick(prefix + "_" + std::to_string(i + 1), pool));
    return slots;
  }

  void link(int a, int b) {
    links_.push_back({a, b});
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }

  void link_full(const std::vector<int>& lhs, const std::vector<int>& rhs) {
    for (int a : lhs)
      for (int b : rhs) link(a, b);
  }

  void link_minus_matching(const std::vector<int>& lhs, const std::vector<int>& rhs) {
    if (lhs.size() != rhs.size()) throw domain_error("minus-matching join needs equal widths");
    for (std::size_t i = 0; i < lhs.size(); ++i)
      for (std::size_t j = 0; j < rhs.size(); ++j)
        if (i != j) link(lhs[i], rhs[j]);
  }

  // Materializes every slot.  On success verts() gives slot -> host vertex.
  GadgetResult run(const std::vector<int>& reserved) {
    int n = g_->n();
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (int v : reserved)
      if (0 <= v && v < n) taken[static_cast<std::size_t>(v)] = 1;
    std::vector<char> fixed_seen(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < fixed_.size(); ++i) {
      int v = fixed_[i];
      if (v < 0) continue;
      if (fixed_seen[static_cast<std::size_t>(v)])
        throw domain_error("duplicate vertex in gadget input: " + names_[i]);
      fixed_seen[static_cast<std::size_t>(v)] = 1;
      taken[static_cast<std::size_t>(v)] = 1;
    }
    verts_.assign(names_.size(), -1);
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (fixed_[i] >= 0) {
        int v = fixed_[i];
        for (int j : adj_[i]) {
          if (verts_[static_cast<std::size_t>(j)] < 0) continue;
          if (!g_->has_edge(v, verts_[static_cast<std::size_t>(j)]))
            return gadget_fail(names_[i],
                               "host lacks edge to " + names_[static_cast<std::size_t>(j)]);
        }
        verts_[i] = v;
        continue;
      }
      int choice = -1;
      for (int c : *pools_[i]) {
        if (taken[static_cast<std::size_t>(c)]) continue;
        bool fits = true;
        for (int j : adj_[i]) {
          int w = verts_[static_cast<std::size_t>(j)];
          if (w >= 0 && !g_->has_edge(c, w)) {
            fits = false;
            break;
          }
        }
        if (fits) {
          choice = c;
          break;
        }
      }
      if (choice < 0)
        return gadget_fail(names_[i], "pool exhausted under adjacency constraints");
      verts_[i] = choice;
      taken[static_cast<std::size_t>(choice)] = 1;
    }
    return gadget_ok(GadgetEmbedding{});
  }

  int vert(int slot) const { return verts_[static_cast<std::size_t>(slot)]; }

  std::vector<int> verts_of(const std::vector<int>& slots) const {
    std::vector<int> out;
    for (int s : slots) out.push_back(vert(s));
    return out;
  }

  // Packages roles and the deduplicated, sorted edge list.
  void fill(GadgetEmbedding& emb) const {
    for (std::size_t i = 0; i < names_.size(); ++i) emb.add_role(names_[i], verts_[i]);
    std::vector<Edge> es;
    es.reserve(links_.size());
    for (const auto& [a, b] : links_)
      es.push_back(norm_edge(verts_[static_cast<std::size_t>(a)],
                             verts_[static_cast<std::size_t>(b)]));
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    emb.edges = std::move(es);
  }

 private:
  const Graph* g_;
  std::vector<std::string> names_;
  std::vector<int> fixed_;
  std::vector<const std::vector<int>*> pools_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::pair<int, int>> links_;
  std::vector<int> verts_;
};

std::vector<int> sorted_copy(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

EmbeddingCheck validate_embedding(const Graph& g, const GadgetEmbedding& emb, int r) {
  int width = tuple_width(r);
  auto fail = [](std::string d) { return EmbeddingCheck{false, std::move(d)}; };

  std::vector<int> role_verts;
  {
    std::vector<std::string> names;
    for (const auto& [name, v] : emb.roles) {
      if (v < 0 || v >= g.n()) return fail("role " + name + " out of range");
      names.push_back(name);
      role_verts.push_back(v);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      return fail("duplicate role name");
  }
  std::vector<int> rset = sorted_copy(role_verts);
  if (std::adjacent_find(rset.begin(), rset.end()) != rset.end())
    return fail("vertex carries two roles");

  std::vector<int> attach = sorted_copy(emb.attach);
  if (set_minus(attach, rset) != std::vector<int>{}) return fail("attach vertex has no role");
  if (sorted_copy(emb.consumed) != set_minus(rset, attach))
    return fail("consumed set is not roles minus attach");

  std::vector<Edge> es = emb.edges;
  for (auto& [u, v] : es) {
    if (u == v) return fail("self loop");
    if (u > v) std::swap(u, v);
  }
  std::sort(es.begin(), es.end());
  if (std::adjacent_find(es.begin(), es.end()) != es.end()) return fail("duplicate edge");
  std::vector<int> deg(static_cast<std::size_t>(g.n()), 0);
  for (const auto& [u, v] : es) {
    if (!g.has_edge(u, v))
      return fail("edge " + std::to_string(u) + "-" + std::to_string(v) + " not in host");
    if (!set_contains(rset, u) || !set_contains(rset, v))
      return fail("edge endpoint without a role");
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }

  std::vector<int> expected(static_cast<std::size_t>(g.n()), r);
  std::vector<char> in_end(static_cast<std::size_t>(g.n()), 0);
  for (const auto& end : emb.ends) {
    if (static_cast<int>(end.verts.size()) != width)
      return fail("end " + end.label + " has wrong width");
    for (int v : end.verts) {
      if (!set_contains(emb.consumed, v))
        return fail("end vertex " + std::to_string(v) + " not consumed");
      if (in_end[static_cast<std::size_t>(v)])
        return fail("vertex " + std::to_string(v) + " sits in two ends");
      in_end[static_cast<std::size_t>(v)] = 1;
      expected[static_cast<std::size_t>(v)] = r - end_deficiency(end.tag, width);
    }
  }
  for (int v : emb.consumed)
    if (deg[static_cast<std::size_t>(v)] != expected[static_cast<std::size_t>(v)])
      return fail("vertex " + std::to_string(v) + " has degree " +
                  std::to_string(deg[static_cast<std::size_t>(v)]) + ", expected " +
                  std::to_string(expected[static_cast<std::size_t>(v)]));
  return EmbeddingCheck{};
}

std::vector<Edge> join_edges(const EndTuple& x, const EndTuple& y) {
  if (x.tag != y.tag) throw domain_error("joined ends must carry equal tags");
  if (x.verts.size() != y.verts.size()) throw domain_error("joined ends must have equal width");
  std::vector<Edge> es;
  for (std::size_t i = 0; i < x.verts.size(); ++i)
    for (std::size_t j = 0; j < y.verts.size(); ++j) {
      if (x.tag == Tag::needs_join_minus_matching && i == j) continue;
      es.push_back(norm_edge(x.verts[i], y.verts[j]));
    }
  std::sort(es.begin(), es.end());
  return es;
}

std::string embedding_to_json(const GadgetEmbedding& emb) {
  nlohmann::json j;
  j["kind"] = emb.kind;
  auto& roles = j["roles"] = nlohmann::json::object();
  for (const auto& [name, v] : emb.roles) roles[name] = v;
  auto& arr = j["edges"] = nlohmann::json::array();
  std::vector<Edge> es = emb.edges;
  std::sort(es.begin(), es.end());
  for (const auto& [u, v] : es) arr.push_back({u, v});
  j["consumed"] = emb.consumed;
  j["attach"] = emb.attach;
  auto& ends = j["ends"] = nlohmann::json::array();
  for (const auto& e : emb.ends)
    ends.push_back({{"label", e.label}, {"tag", tag_name(e.tag)}, {"verts", e.verts}});
  return j.dump();
}

std::string embedding_to_dot(const GadgetEmbedding& emb) {
  std::ostringstream os;
  os << "graph {\n";
  for (const auto& [name, v] : emb.roles)
    os << "  " << v << " [label=\"" << name << "\"];\n";
  std::vector<Edge> es = emb.edges;
  std::sort(es.begin(), es.end());
  for (const auto& [u, v] : es) os << "  " << u << " -- " << v << ";\n";
  os << "}\n";
  return os.str();
}

GadgetResult find_cross_matching(const Graph& g, const std::vector<int>& a,
                                 const std::vector<int>& b, int k, Rat well_conn_frac,
                                 int special, int special_min_deg) {
  if (k < 0 || special < 0) throw domain_error("cross matching sizes must be nonnegative");
  std::vector<int> sa = canon_pool(g, a);
  std::vector<int> sb = canon_pool(g, b);
  if (!set_intersect(sa, sb).empty()) throw domain_error("cross matching sides must be disjoint");

  long long n = g.n();
  auto well_connected = [&](int v, const std::vector<int>& side) {
    long long d = g.degree_into(v, side);
    return d * well_conn_frac.den >= well_conn_frac.num * n;
  };
  std::vector<char> taken(static_cast<std::size_t>(g.n()), 0);
  GadgetEmbedding emb;
  emb.kind = "cross_matching";

  auto harvest = [&](int want, const std::string& suffix, auto qual_a, auto qual_b) {
    int found = 0;
    for (int u : sa) {
      if (found == want) break;
      if (taken[static_cast<std::size_t>(u)] || !qual_a(u)) continue;
      for (int v : sb) {
        if (taken[static_cast<std::size_t>(v)] || !qual_b(v)) continue;
        if (!g.has_edge(u, v)) continue;
        ++found;
        taken[static_cast<std::size_t>(u)] = 1;
        taken[static_cast<std::size_t>(v)] = 1;
        emb.add_role("x_a" + suffix + "_" + std::to_string(found), u);
        emb.add_role("x_b" + suffix + "_" + std::to_string(found), v);
        emb.edges.push_back(norm_edge(u, v));
        emb.attach.push_back(u);
        emb.attach.push_back(v);
        break;
      }
    }
    return found;
  };

  int got = harvest(
      k, "", [&](int u) { return well_connected(u, sa); },
      [&](int v) { return well_connected(v, sb); });
  if (got < k)
    return gadget_fail("x_a_" + std::to_string(got + 1),
                       "no disjoint cross edge with well-connected endpoints remains");
  int got_special = harvest(
      special, "_special", [&](int u) { return g.degree_into(u, sa) >= special_min_deg; },
      [&](int v) { return g.degree_into(v, sb) >= special_min_deg; });
  if (got_special < special)
    return gadget_fail("x_a_special_" + std::to_string(got_special + 1),
                       "no disjoint cross edge with the relaxed degree bound remains");

  std::sort(emb.attach.begin(), emb.attach.end());
  std::sort(emb.edges.begin(), emb.edges.end());
  return gadget_ok(std::move(emb));
}

namespace {

struct BridgeSide {
  std::vector<int> col1, col2m, col3m, col4;  // middle columns exclude the x slots
  int x1 = -1, x2 = -1;
};

// Four-column bridge side.  Even r: complete joins with the x pair dropped in
// the middle.  Odd r: minus-matching outer joins with each x sitting at the
// last position of its column.
BridgeSide add_bridge_side(Plan& plan, const std::string& p, int xa1, int xa2, int s, bool even,
                           const std::vector<int>* pool) {
  BridgeSide side;
  side.x1 = plan.add_fixed("x_" + p + "_1", xa1);
  side.x2 = plan.add_fixed("x_" + p + "_2", xa2);
  if (even) {
    side.col1 = plan.add_pick_tuple(p + "1", s, pool);
    side.col2m = plan.add_pick_tuple(p + "2", s - 1, pool);
    side.col3m = plan.add_pick_tuple(p + "3", s - 1, pool);
  } else {
    // The outer joins drop aligned pairs, so the middle columns carry the
    // binding constraints and are picked first.
    side.col2m = plan.add_pick_tuple(p + "2", s - 1, pool);
    side.col3m = plan.add_pick_tuple(p + "3", s - 1, pool);
    side.col1 = plan.add_pick_tuple(p + "1", s, pool);
  }
  side.col4 = plan.add_pick_tuple(p + "4", s, pool);

  std::vector<int> col2 = side.col2m;
  std::vector<int> col3 = side.col3m;
  if (even) {
    col2.insert(col2.begin(), side.x1);
    col3.insert(col3.begin(), side.x2);
    plan.link_full(side.col1, col2);
    plan.link_full(col3, side.col4);
  } else {
    col2.push_back(side.x1);
    col3.push_back(side.x2);
    plan.link_minus_matching(side.col1, col2);
    plan.link_minus_matching(col3, side.col4);
  }
  for (std::size_t i = 0; i < col2.size(); ++i)
    for (std::size_t j = 0; j < col3.size(); ++j)
      if (col2[i] != side.x1 || col3[j] != side.x2) plan.link(col2[i], col3[j]);
  return side;
}

}  // namespace

GadgetResult build_bridge(const Graph& g, Edge cross1, Edge cross2,
                          const std::vector<int>& pool_a, const std::vector<int>& pool_b,
                          int r) {
  int s = tuple_width(r);
  bool even = r % 2 == 0;
  if (!g.has_edge(cross1.first, cross1.second))
    return gadget_fail("x_a_1", "cross edge not in host");
  if (!g.has_edge(cross2.first, cross2.second))
    return gadget_fail("x_a_2", "cross edge not in host");

  std::vector<int> pa = canon_pool(g, pool_a);
  std::vector<int> pb = canon_pool(g, pool_b);
  Plan plan(g);
  BridgeSide sa = add_bridge_side(plan, "a", cross1.first, cross2.first, s, even, &pa);
  BridgeSide sb = add_bridge_side(plan, "b", cross1.second, cross2.second, s, even, &pb);
  plan.link(sa.x1, sb.x1);
  plan.link(sa.x2, sb.x2);

  GadgetResult res = plan.run({});
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = even ? "bridge_even" : "bridge_odd";
  plan.fill(emb);
  for (const auto& [name, v] : emb.roles) {
    (void)name;
    emb.consumed.push_back(v);
  }
  std::sort(emb.consumed.begin(), emb.consumed.end());
  emb.ends = {
      {plan.verts_of(sa.col1), Tag::needs_full_join, "a_left"},
      {plan.verts_of(sa.col4), Tag::needs_full_join, "a_right"},
      {plan.verts_of(sb.col1), Tag::needs_full_join, "b_left"},
      {plan.verts_of(sb.col4), Tag::needs_full_join, "b_right"},
  };
  return res;
}

GadgetResult build_bridge_even(const Graph& g, Edge cross1, Edge cross2,
                               const std::vector<int>& pool_a, const std::vector<int>& pool_b,
                               int r) {
  if (r % 2 != 0) throw domain_error("even bridge needs even degree target");
  return build_bridge(g, cross1, cross2, pool_a, pool_b, r);
}

GadgetResult build_rider_bridge(const Graph& g, Edge cross, const std::vector<int>& pool_a,
                                const std::vector<int>& pool_b, int r) {
  if (r % 2 == 0) throw domain_error("rider bridge needs odd degree target");
  int s = tuple_width(r);
  if (!g.has_edge(cross.first, cross.second)) return gadget_fail("x_a", "cross edge not in host");

  // (r-1)/2 vertex-disjoint middle-join edges rerouted through the rider, at
  // canonical position pairs (0,1),(1,0),(2,3),(3,2),...
  int want = (r - 1) / 2;
  std::vector<std::pair<int, int>> pairs;
  for (int t = 0; static_cast<int>(pairs.size()) < want; t += 2) {
    pairs.push_back({t, t + 1});
    if (static_cast<int>(pairs.size()) < want) pairs.push_back({t + 1, t});
  }

  std::vector<int> pa = canon_pool(g, pool_a);
  std::vector<int> pb = canon_pool(g, pool_b);
  Plan plan(g);
  struct Side {
    int x;
    std::vector<int> c1, c2, c3, c4;
  };
  auto add_side = [&](const std::string& p, int xv, const std::vector<int>* pool) {
    Side side;
    side.x = plan.add_fixed("x_" + p, xv);
    side.c2 = plan.add_pick_tuple(p + "2", s, pool);
    side.c3 = plan.add_pick_tuple(p + "3", s, pool);
    side.c1 = plan.add_pick_tuple(p + "1", s, pool);
    side.c4 = plan.add_pick_tuple(p + "4", s, pool);
    plan.link_minus_matching(side.c1, side.c2);
    plan.link_minus_matching(side.c3, side.c4);
    std::vector<std::pair<int, int>> cut(pairs.begin(), pairs.end());
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        bool dropped = false;
        for (const auto& [pi, qj] : cut)
          if (pi == i && qj == j) dropped = true;
        if (!dropped) plan.link(side.c2[static_cast<std::size_t>(i)],
                                side.c3[static_cast<std::size_t>(j)]);
      }
    for (const auto& [pi, qj] : cut) {
      plan.link(side.x, side.c2[static_cast<std::size_t>(pi)]);
      plan.link(side.x, side.c3[static_cast<std::size_t>(qj)]);
    }
    return side;
  };
  Side sa = add_side("a", cross.first, &pa);
  Side sb = add_side("b", cross.second, &pb);
  plan.link(sa.x, sb.x);

  GadgetResult res = plan.run({});
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = "rider_bridge";
  plan.fill(emb);
  for (const auto& [name, v] : emb.roles) {
    (void)name;
    emb.consumed.push_back(v);
  }
  std::sort(emb.consumed.begin(), emb.consumed.end());
  emb.ends = {
      {plan.verts_of(sa.c1), Tag::needs_full_join, "a_left"},
      {plan.verts_of(sa.c4), Tag::needs_full_join, "a_right"},
      {plan.verts_of(sb.c1), Tag::needs_full_join, "b_left"},
      {plan.verts_of(sb.c4), Tag::needs_full_join, "b_right"},
  };
  return res;
}

namespace {

GadgetResult connect_ends_impl(const Graph& g, const EndTuple& x, const EndTuple& y,
                               const std::vector<int>& pool, int r, int j,
                               const std::vector<int>& reserved) {
  int s = tuple_width(r);
  if (static_cast<int>(x.verts.size()) != s || static_cast<int>(y.verts.size()) != s)
    throw domain_error("end tuples must have width " + std::to_string(s));
  if (j < 0) throw domain_error("block count must be nonnegative");
  bool even = r % 2 == 0;
  if (even) {
    if (x.tag != Tag::needs_full_join || y.tag != Tag::needs_full_join)
      throw domain_error("even degree targets only produce full-join ends");
  } else {
    bool same = x.tag == y.tag;
    if (same != (j % 2 == 0))
      throw domain_error("join parity mismatch: equal tags need an even block count");
  }

  std::vector<int> p = canon_pool(g, pool);
  Plan plan(g);
  std::vector<std::vector<int>> cols;
  cols.push_back(plan.add_fixed_tuple("left", x.verts));
  std::vector<std::vector<int>> blocks;
  std::vector<int> right = plan.add_fixed_tuple("right", y.verts);
  for (int t = 1; t <= j; ++t)
    blocks.push_back(plan.add_pick_tuple("blk" + std::to_string(t), s, &p));
  for (auto& b : blocks) cols.push_back(b);
  cols.push_back(right);

  for (int t = 0; t <= j; ++t) {
    Tag jt = even ? Tag::needs_full_join : (t % 2 == 0 ? x.tag : flip(x.tag));
    if (jt == Tag::needs_full_join)
      plan.link_full(cols[static_cast<std::size_t>(t)], cols[static_cast<std::size_t>(t) + 1]);
    else
      plan.link_minus_matching(cols[static_cast<std::size_t>(t)],
                               cols[static_cast<std::size_t>(t) + 1]);
  }

  GadgetResult res = plan.run(reserved);
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = "connector";
  plan.fill(emb);
  for (const auto& b : blocks)
    for (int slot : b) emb.consumed.push_back(plan.vert(slot));
  std::sort(emb.consumed.begin(), emb.consumed.end());
  emb.attach = set_union(sorted_copy(x.verts), sorted_copy(y.verts));
  return res;
}

}  // namespace

GadgetResult connect_ends(const Graph& g, const EndTuple& x, const EndTuple& y,
                          const std::vector<int>& pool, int r, int j) {
  return connect_ends_impl(g, x, y, pool, r, j, {});
}

GadgetResult glue_GE(const Graph& g, const EndTuple& d1, const EndTuple& d2,
                     const std::vector<int>& pool, int r) {
  if (r % 2 != 0) throw domain_error("glue_GE needs an even degree target");
  GadgetResult res = connect_ends(g, d1, d2, pool, r, 2);
  if (res.ok) res.emb.kind = "glue_GE";
  return res;
}

GadgetResult glue_GO(const Graph& g, const EndTuple& d1, const EndTuple& d2,
                     const std::vector<int>& pool, int r) {
  if (r % 2 == 0) throw domain_error("glue_GO needs an odd degree target");
  GadgetResult res = connect_ends(g, d1, d2, pool, r, 2);
  if (res.ok) res.emb.kind = "glue_GO";
  return res;
}

namespace {

GadgetResult finish_absorber(Plan& plan, GadgetResult res, const char* kind,
                             const std::vector<int>& left_slots,
                             const std::vector<int>& right_slots, Tag end_tag) {
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = kind;
  plan.fill(emb);
  for (const auto& [name, v] : emb.roles) {
    (void)name;
    emb.consumed.push_back(v);
  }
  std::sort(emb.consumed.begin(), emb.consumed.end());
  emb.ends = {
      {plan.verts_of(left_slots), end_tag, "left"},
      {plan.verts_of(right_slots), end_tag, "right"},
  };
  return res;
}

}  // namespace

GadgetResult build_absorber(const Graph& g, AbsorberKind kind, const std::vector<int>& targets,
                            const std::vector<int>& pool, int r) {
  int s = tuple_width(r);
  bool even = r % 2 == 0;
  std::vector<int> p = canon_pool(g, pool);

  if (kind == AbsorberKind::xi_even || kind == AbsorberKind::xi_prime_even) {
    if (!even) throw domain_error("even absorber needs an even degree target");
    if (targets.size() != 1) throw domain_error("absorber takes exactly one target");
    Plan plan(g);
    int u = plan.add_fixed("u", targets[0]);
    std::vector<int> d1 = plan.add_pick_tuple("d1", s, &p);
    std::vector<int> d2 = plan.add_pick_tuple("d2", s, &p);
    std::vector<int> dp = plan.add_pick_tuple("dp", s - 1, &p);
    std::vector<int> mid = dp;
    mid.push_back(u);
    plan.link_full(d1, mid);
    plan.link_full(d2, mid);
    if (kind == AbsorberKind::xi_even) {
      GadgetResult res = plan.run({});
      return finish_absorber(plan, std::move(res), "xi_even", d1, d2, Tag::needs_full_join);
    }
    std::vector<int> e0 = plan.add_pick_tuple("e0", s, &p);
    int estar = plan.add_pick("e_star", &p);
    plan.link_minus_matching(e0, d1);
    for (int slot : e0) plan.link(estar, slot);
    for (int slot : d1) plan.link(estar, slot);
    GadgetResult res = plan.run({});
    return finish_absorber(plan, std::move(res), "xi_prime_even", e0, d2, Tag::needs_full_join);
  }

  if (kind == AbsorberKind::xi_odd) {
    if (even) throw domain_error("odd absorber needs an odd degree target");
    if (targets.size() != 1) throw domain_error("absorber takes exactly one target");
    Plan plan(g);
    int u = plan.add_fixed("u", targets[0]);
    std::vector<int> d1 = plan.add_pick_tuple("d1", s, &p);
    std::vector<int> dp = plan.add_pick_tuple("dp", s - 1, &p);
    std::vector<int> d2 = plan.add_pick_tuple("d2", s, &p);
    std::vector<int> e0 = plan.add_pick_tuple("e0", s, &p);
    std::vector<int> mid = dp;
    mid.push_back(u);  // aligned with d2, so the u-d2 matching edge is dropped
    plan.link_full(d1, mid);
    plan.link_minus_matching(d2, mid);
    plan.link_minus_matching(e0, d1);
    GadgetResult res = plan.run({});
    return finish_absorber(plan, std::move(res), "xi_odd", e0, d2, Tag::needs_full_join);
  }

  if (even) throw domain_error("odd absorber needs an odd degree target");
  if (targets.size() != 2) throw domain_error("edge absorber takes exactly two targets");
  Plan plan(g);
  int u1 = plan.add_fixed("u1", targets[0]);
  int u2 = plan.add_fixed("u2", targets[1]);
  plan.link(u1, u2);
  std::vector<int> f = plan.add_pick_tuple("f", s, &p);
  std::vector<int> fp = plan.add_pick_tuple("fp", s, &p);
  for (int i = 0; i < s - 1; ++i) {
    plan.link(f[static_cast<std::size_t>(i)], u1);
    plan.link(fp[static_cast<std::size_t>(i)], u1);
  }
  for (int i = 1; i < s; ++i) {
    plan.link(f[static_cast<std::size_t>(i)], u2);
    plan.link(fp[static_cast<std::size_t>(i)], u2);
  }
  plan.link(f.front(), fp.front());
  plan.link(f.back(), fp.back());
  // Ring completion: offsets 2..1+k/2 on the cycle [f_1..f_s, f'_s..f'_1]
  // plus the antipodal matching when k is odd, k = (r-5)/2 per vertex.
  if (r >= 5) {
    std::vector<int> ring = f;
    for (int i = s - 1; i >= 0; --i) ring.push_back(fp[static_cast<std::size_t>(i)]);
    int nring = 2 * s;
    int k = (r - 5) / 2;
    for (int o = 2; o <= 1 + k / 2; ++o)
      for (int i = 0; i < nring; ++i)
        plan.link(ring[static_cast<std::size_t>(i)],
                  ring[static_cast<std::size_t>((i + o) % nring)]);
    if (k % 2 == 1)
      for (int i = 0; i < s; ++i)
        plan.link(ring[static_cast<std::size_t>(i)], ring[static_cast<std::size_t>(i + s)]);
  }
  GadgetResult res = plan.run({});
  Tag end_tag = r == 3 ? Tag::needs_join_minus_matching : Tag::needs_full_join;
  return finish_absorber(plan, std::move(res), "xi_prime_odd", f, fp, end_tag);
}

void PathStructure::absorb(const GadgetEmbedding& emb) {
  segments.push_back(emb);
  edges.insert(edges.end(), emb.edges.begin(), emb.edges.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<int> c = emb.consumed;
  std::sort(c.begin(), c.end());
  used = set_union(used, c);
}

PathCheck validate_path(const Graph& g, const PathStructure& ps) {
  auto fail = [](std::string d) { return PathCheck{false, std::move(d)}; };
  int width = tuple_width(ps.r);
  if (ps.s != width) return fail("structure width disagrees with degree target");

  std::vector<int> all;
  for (const auto& seg : ps.segments)
    all.insert(all.end(), seg.consumed.begin(), seg.consumed.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    return fail("vertex consumed by two segments");
  if (all != ps.used) return fail("used set disagrees with segment consumption");
  for (const auto& seg : ps.segments)
    if (set_minus(sorted_copy(seg.attach), ps.used) != std::vector<int>{})
      return fail("segment attaches outside the structure");

  std::vector<Edge> es = ps.edges;
  std::sort(es.begin(), es.end());
  if (std::adjacent_find(es.begin(), es.end()) != es.end()) return fail("duplicate edge");
  std::vector<int> deg(static_cast<std::size_t>(g.n()), 0);
  for (const auto& [u, v] : es) {
    if (!g.has_edge(u, v))
      return fail("edge " + std::to_string(u) + "-" + std::to_string(v) + " not in host");
    if (!set_contains(ps.used, u) || !set_contains(ps.used, v))
      return fail("edge leaves the structure");
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }

  std::vector<int> expected(static_cast<std::size_t>(g.n()), ps.r);
  for (const EndTuple* end : {&ps.front, &ps.back}) {
    if (end->verts.empty()) continue;
    if (static_cast<int>(end->verts.size()) != width) return fail("live end has wrong width");
    for (int v : end->verts) {
      if (!set_contains(ps.used, v)) return fail("live end outside the structure");
      expected[static_cast<std::size_t>(v)] = ps.r - end_deficiency(end->tag, width);
    }
  }
  for (int v : ps.used)
    if (deg[static_cast<std::size_t>(v)] != expected[static_cast<std::size_t>(v)])
      return fail("vertex " + std::to_string(v) + " has degree " +
                  std::to_string(deg[static_cast<std::size_t>(v)]) + ", expected " +
                  std::to_string(expected[static_cast<std::size_t>(v)]));
  return PathCheck{};
}

GadgetResult make_path_start(const Graph& g, const std::vector<int>& a_tuple,
                             const std::vector<int>& b_tuple, int r, PathStructure* out) {
  if (out == nullptr) throw domain_error("path start needs an output structure");
  int s = tuple_width(r);
  if (static_cast<int>(a_tuple.size()) != s || static_cast<int>(b_tuple.size()) != s)
    throw domain_error("start tuples must have width " + std::to_string(s));

  Plan plan(g);
  std::vector<int> fr = plan.add_fixed_tuple("front", a_tuple);
  std::vector<int> bk = plan.add_fixed_tuple("back", b_tuple);
  plan.link_full(fr, bk);
  GadgetResult res = plan.run({});
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = "path_start";
  plan.fill(emb);
  emb.consumed = set_union(sorted_copy(a_tuple), sorted_copy(b_tuple));
  Tag tag = r % 2 == 0 ? Tag::needs_full_join : Tag::needs_join_minus_matching;
  emb.ends = {{a_tuple, tag, "front"}, {b_tuple, tag, "back"}};

  *out = PathStructure{};
  out->r = r;
  out->s = s;
  out->absorb(emb);
  out->front = {a_tuple, tag, "front"};
  out->back = {b_tuple, tag, "back"};
  return res;
}

GadgetResult extend_block(const Graph& g, PathStructure& ps, const std::vector<int>& pool) {
  if (ps.back.verts.empty()) throw domain_error("structure has no live back end");
  std::vector<int> p = canon_pool(g, pool);
  Plan plan(g);
  std::vector<int> prev = plan.add_fixed_tuple("prev", ps.back.verts);
  std::vector<int> col = plan.add_pick_tuple("col", ps.s, &p);
  if (ps.back.tag == Tag::needs_full_join)
    plan.link_full(prev, col);
  else
    plan.link_minus_matching(prev, col);
  GadgetResult res = plan.run(ps.used);
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = "extend_block";
  plan.fill(emb);
  emb.consumed = sorted_copy(plan.verts_of(col));
  emb.attach = sorted_copy(ps.back.verts);
  Tag next = ps.r % 2 == 0 ? Tag::needs_full_join : flip(ps.back.tag);
  emb.ends = {{plan.verts_of(col), next, "back"}};
  ps.absorb(emb);
  ps.back = {plan.verts_of(col), next, "back"};
  return res;
}

namespace {

void check_star_shape(const Star& st, int want_leaves, const char* what) {
  if (static_cast<int>(st.leaves.size()) != want_leaves)
    throw domain_error(std::string(what) + " needs exactly " + std::to_string(want_leaves) +
                       " leaves");
  std::vector<int> vs = st.leaves;
  vs.push_back(st.center);
  std::sort(vs.begin(), vs.end());
  if (std::adjacent_find(vs.begin(), vs.end()) != vs.end())
    throw domain_error(std::string(what) + " repeats a vertex");
}

}  // namespace

GadgetResult extend_with_star_pair(const Graph& g, PathStructure& ps, const Star& s1,
                                   const Star& s2, const std::vector<int>& pool_a,
                                   const std::vector<int>& pool_b) {
  (void)pool_b;  // both star-pair patterns draw fresh columns from the a side only
  if (ps.back.verts.empty()) throw domain_error("structure has no live back end");
  int s = ps.s;
  check_star_shape(s1, s, "star unit");
  check_star_shape(s2, s, "star unit");
  bool even = ps.r % 2 == 0;
  Tag need = even ? Tag::needs_full_join : Tag::needs_join_minus_matching;
  if (ps.back.tag != need) throw domain_error("star pair needs the opposite end tag; extend first");

  std::vector<int> pa = canon_pool(g, pool_a);
  Plan plan(g);
  std::vector<int> prev = plan.add_fixed_tuple("prev", ps.back.verts);
  int c1 = plan.add_fixed("c1", s1.center);
  std::vector<int> l1 = plan.add_fixed_tuple("l1", s1.leaves);
  int c2 = plan.add_fixed("c2", s2.center);
  std::vector<int> l2 = plan.add_fixed_tuple("l2", s2.leaves);
  std::vector<int> a1 = plan.add_pick_tuple("a1", s, &pa);
  std::vector<int> a2 = plan.add_pick_tuple("a2", s, &pa);

  if (even) {
    // Two one-star units in a row: [prev] F [a1] H+center [l1] F [a2] H+center [l2].
    plan.link_full(prev, a1);
    plan.link_minus_matching(a1, l1);
    for (int slot : a1) plan.link(c1, slot);
    for (int slot : l1) plan.link(c1, slot);
    plan.link_full(l1, a2);
    plan.link_minus_matching(a2, l2);
    for (int slot : a2) plan.link(c2, slot);
    for (int slot : l2) plan.link(c2, slot);
  } else {
    // Coupled unit: the first center skips its last leaf's star edge, the
    // leaf-to-a2 join keeps the last matching pair, and the second center
    // reaches a2 on the first s-1 positions only.
    plan.link_minus_matching(prev, a1);
    for (int slot : a1) plan.link(c1, slot);
    plan.link_minus_matching(a1, l1);
    for (int i = 0; i < s - 1; ++i) plan.link(c1, l1[static_cast<std::size_t>(i)]);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        if (i != j || i == s - 1) plan.link(l1[static_cast<std::size_t>(i)],
                                            a2[static_cast<std::size_t>(j)]);
    for (int i = 0; i < s - 1; ++i) plan.link(c2, a2[static_cast<std::size_t>(i)]);
    plan.link_minus_matching(a2, l2);
    for (int slot : l2) plan.link(c2, slot);
  }

  GadgetResult res = plan.run(ps.used);
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = "star_pair";
  plan.fill(emb);
  for (const auto& [name, v] : emb.roles) {
    (void)name;
    emb.consumed.push_back(v);
  }
  emb.consumed = set_minus(sorted_copy(emb.consumed), sorted_copy(ps.back.verts));
  emb.attach = sorted_copy(ps.back.verts);
  Tag next = even ? Tag::needs_full_join : Tag::needs_join_minus_matching;
  emb.ends = {{plan.verts_of(l2), next, "back"}};
  ps.absorb(emb);
  ps.back = {plan.verts_of(l2), next, "back"};
  return res;
}

GadgetResult extend_with_stars(const Graph& g, PathStructure& ps, const std::vector<Star>& stars,
                               const std::vector<int>& pool_a, const std::vector<int>& pool_b) {
  if (stars.size() % 2 != 0) throw domain_error("stars are absorbed in pairs");
  GadgetResult res = gadget_ok(GadgetEmbedding{});
  res.emb.kind = "star_pair";
  for (std::size_t i = 0; i + 1 < stars.size(); i += 2) {
    res = extend_with_star_pair(g, ps, stars[i], stars[i + 1], pool_a, pool_b);
    if (!res.ok) return res;
  }
  return res;
}

GadgetResult extend_with_K1r(const Graph& g, PathStructure& ps, const Star& star,
                             const std::vector<int>& pool_a, const std::vector<int>& pool_b) {
  if (ps.back.verts.empty()) throw domain_error("structure has no live back end");
  int r = ps.r;
  int s = ps.s;
  check_star_shape(star, r, "degree-r star unit");
  bool even = r % 2 == 0;
  Tag need = even ? Tag::needs_full_join : Tag::needs_join_minus_matching;
  if (ps.back.tag != need) throw domain_error("star unit needs the opposite end tag; extend first");

  std::vector<int> pa = canon_pool(g, pool_a);
  std::vector<int> pb = canon_pool(g, pool_b);
  Plan plan(g);
  std::vector<int> prev = plan.add_fixed_tuple("prev", ps.back.verts);
  int c = plan.add_fixed("c", star.center);
  std::vector<int> leaves = plan.add_fixed_tuple("leaf", star.leaves);
  std::vector<int> back_slots;

  if (even) {
    // [prev] F [a1] F [leaves 1..s] F [c + a2] F [leaves s+1..2s]; the center
    // only ever uses its own star edges.
    std::vector<int> a1 = plan.add_pick_tuple("a1", s, &pa);
    std::vector<int> a2 = plan.add_pick_tuple("a2", s - 1, &pa);
    std::vector<int> lf(leaves.begin(), leaves.begin() + s);
    std::vector<int> ll(leaves.begin() + s, leaves.end());
    std::vector<int> col3 = {c};
    col3.insert(col3.end(), a2.begin(), a2.end());
    plan.link_full(prev, a1);
    plan.link_full(a1, lf);
    plan.link_full(lf, col3);
    plan.link_full(col3, ll);
    back_slots = ll;
  } else {
    // [prev] H [a1] F [fresh_b + leaves 1..s-1] H [c + a2] F [leaves s..r];
    // aligning the center with the fresh b vertex keeps it on star edges only.
    std::vector<int> a1 = plan.add_pick_tuple("a1", s, &pa);
    int bf = plan.add_pick("bf", &pb);
    std::vector<int> a2 = plan.add_pick_tuple("a2", s - 1, &pa);
    std::vector<int> b2 = {bf};
    b2.insert(b2.end(), leaves.begin(), leaves.begin() + (s - 1));
    std::vector<int> col3 = {c};
    col3.insert(col3.end(), a2.begin(), a2.end());
    std::vector<int> b3(leaves.begin() + (s - 1), leaves.end());
    plan.link_minus_matching(prev, a1);
    plan.link_full(a1, b2);
    plan.link_minus_matching(b2, col3);
    plan.link_full(col3, b3);
    back_slots = b3;
  }

  GadgetResult res = plan.run(ps.used);
  if (!res.ok) return res;
  GadgetEmbedding& emb = res.emb;
  emb.kind = "k1r_unit";
  plan.fill(emb);
  for (const auto& [name, v] : emb.roles) {
    (void)name;
    emb.consumed.push_back(v);
  }
  emb.consumed = set_minus(sorted_copy(emb.consumed), sorted_copy(ps.back.verts));
  emb.attach = sorted_copy(ps.back.verts);
  Tag next = even ? Tag::needs_full_join : Tag::needs_join_minus_matching;
  emb.ends = {{plan.verts_of(back_slots), next, "back"}};
  ps.absorb(emb);
  ps.back = {plan.verts_of(back_slots), next, "back"};
  return res;
}

GadgetResult close_path(const Graph& g, PathStructure& ps, const std::vector<int>& pool, int j) {
  if (ps.front.verts.empty() || ps.back.verts.empty())
    throw domain_error("structure has no live ends to close");
  GadgetResult res = connect_ends_impl(g, ps.front, ps.back, pool, ps.r, j, ps.used);
  if (!res.ok) return res;
  ps.absorb(res.emb);
  ps.front.verts.clear();
  ps.back.verts.clear();
  return res;
}

}  // namespace spanreg
