#include "spanreg/blowup.hpp"

#include <algorithm>
#include <set>

#include "spanreg/errors.hpp"

namespace spanreg {

void validate(const BlowupSpec& spec) {
  if (spec.t < 1) throw domain_error("blow-up factor must be positive");
  if (spec.base == Base::cycle) {
    if (spec.k < 3) throw domain_error("cycle blow-up needs k >= 3");
    if (spec.half && spec.k % 2 != 0) throw domain_error("half cycle blow-up needs even k");
  } else {
    if (spec.k < 1) throw domain_error("path blow-up needs k >= 1");
  }
}

namespace {

// Base edges in order; edge i joins blocks (i, i+1 mod k). Edge i is the
// reduced one (when half) iff i is even.
int base_edge_count(const BlowupSpec& s) {
  return s.base == Base::cycle ? s.k : s.k - 1;
}

void append_join(std::vector<Edge>& es, int block_a, int block_b, int t, bool reduced) {
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) {
      if (reduced && i == j) continue;
      es.push_back({block_a * t + i, block_b * t + j});
    }
}

}  // namespace

Graph build_blowup(const BlowupSpec& spec) {
  validate(spec);
  std::vector<Edge> es;
  for (int e = 0; e < base_edge_count(spec); ++e) {
    bool reduced = spec.half && e % 2 == 0;
    append_join(es, e, (e + 1) % spec.k, spec.t, reduced);
  }
  return Graph(spec.k * spec.t, std::move(es));
}

std::vector<int> blowup_degree_profile(const BlowupSpec& spec) {
  validate(spec);
  std::vector<int> per_block(static_cast<std::size_t>(spec.k), 0);
  for (int e = 0; e < base_edge_count(spec); ++e) {
    int gain = spec.half && e % 2 == 0 ? spec.t - 1 : spec.t;
    per_block[e] += gain;
    per_block[(e + 1) % spec.k] += gain;
  }
  std::vector<int> out(static_cast<std::size_t>(spec.k * spec.t));
  for (int b = 0; b < spec.k; ++b)
    for (int i = 0; i < spec.t; ++i) out[b * spec.t + i] = per_block[b];
  return out;
}

bool is_path_blowup_on_tuples(const std::vector<std::vector<int>>& tuples,
                              const std::vector<Edge>& edges, bool half) {
  if (tuples.empty()) return edges.empty();
  std::size_t s = tuples[0].size();
  if (s == 0) return false;
  std::set<int> seen;
  for (const auto& tup : tuples) {
    if (tup.size() != s) return false;
    for (int v : tup)
      if (!seen.insert(v).second) return false;
  }
  std::set<Edge> want;
  for (std::size_t b = 0; b + 1 < tuples.size(); ++b) {
    bool reduced = half && b % 2 == 0;
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        if (reduced && i == j) continue;
        int u = tuples[b][i], v = tuples[b + 1][j];
        want.insert({std::min(u, v), std::max(u, v)});
      }
  }
  std::set<Edge> got;
  for (auto [u, v] : edges) {
    if (u > v) std::swap(u, v);
    if (!got.insert({u, v}).second) return false;
  }
  return got == want;
}

}  // namespace spanreg
