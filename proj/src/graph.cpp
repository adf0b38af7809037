#include "spanreg/graph.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "spanreg/errors.hpp"

namespace spanreg {

Rat::Rat(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

bool Rat::operator<(const Rat& o) const {
  return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

bool Rat::operator<=(const Rat& o) const {
  return static_cast<__int128>(num) * o.den <= static_cast<__int128>(o.num) * den;
}

Graph::Graph(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw domain_error("graph with negative vertex count");
  words_ = static_cast<std::size_t>((n + 63) / 64);
  rows_.assign(static_cast<std::size_t>(n) * words_, 0);
  deg_.assign(static_cast<std::size_t>(n), 0);
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= n) throw domain_error("edge endpoint out of range");
    if (u == v) throw domain_error("loop edge");
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw domain_error("duplicate edge");
  edges_ = std::move(edges);
  for (const auto& [u, v] : edges_) {
    rows_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v >> 6)] |= 1ull << (v & 63);
    rows_[static_cast<std::size_t>(v) * words_ + static_cast<std::size_t>(u >> 6)] |= 1ull << (u & 63);
    ++deg_[u];
    ++deg_[v];
  }
}

int Graph::min_degree() const {
  if (n_ == 0) throw domain_error("min_degree of empty graph");
  return *std::min_element(deg_.begin(), deg_.end());
}

int Graph::max_degree() const {
  if (n_ == 0) throw domain_error("max_degree of empty graph");
  return *std::max_element(deg_.begin(), deg_.end());
}

std::vector<int> Graph::neighbors(int v) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(deg_[v]));
  const std::uint64_t* r = row(v);
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t bits = r[w];
    while (bits) {
      int b = std::countr_zero(bits);
      out.push_back(static_cast<int>(w * 64) + b);
      bits &= bits - 1;
    }
  }
  return out;
}

int Graph::degree_into(int v, const std::vector<int>& s) const {
  int c = 0;
  for (int u : s) c += has_edge(v, u) ? 1 : 0;
  return c;
}

bool Graph::is_connected() const {
  if (n_ <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == n_;
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> set_intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> set_minus(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool set_contains(const std::vector<int>& a, int v) {
  return std::binary_search(a.begin(), a.end(), v);
}

std::vector<int> common_neighbors(const Graph& g, const std::vector<int>& s) {
  std::vector<int> out;
  if (s.empty()) {
    out.resize(static_cast<std::size_t>(g.n()));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  std::vector<std::uint64_t> acc(g.row(s[0]), g.row(s[0]) + g.words());
  for (std::size_t i = 1; i < s.size(); ++i) {
    const std::uint64_t* r = g.row(s[i]);
    for (std::size_t w = 0; w < g.words(); ++w) acc[w] &= r[w];
  }
  for (std::size_t w = 0; w < acc.size(); ++w) {
    std::uint64_t bits = acc[w];
    while (bits) {
      int b = std::countr_zero(bits);
      out.push_back(static_cast<int>(w * 64) + b);
      bits &= bits - 1;
    }
  }
  return out;
}

long long edges_between(const Graph& g, const std::vector<int>& a, const std::vector<int>& b) {
  long long sum = 0;
  for (int v : b) sum += g.degree_into(v, a);
  // edges inside the intersection were counted from both sides
  std::vector<int> both = set_intersect(a, b);
  long long inner = 0;
  for (std::size_t i = 0; i < both.size(); ++i)
    for (std::size_t j = i + 1; j < both.size(); ++j)
      inner += g.has_edge(both[i], both[j]) ? 1 : 0;
  return sum - inner;
}

Rat pair_density(const Graph& g, const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw domain_error("density of empty part");
  if (!set_intersect(a, b).empty()) throw domain_error("density parts must be disjoint");
  return Rat(edges_between(g, a, b),
             static_cast<long long>(a.size()) * static_cast<long long>(b.size()));
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& s) {
  std::vector<Edge> es;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (g.has_edge(s[i], s[j])) es.push_back({static_cast<int>(i), static_cast<int>(j)});
  return Graph(static_cast<int>(s.size()), std::move(es));
}

Graph relabel(const Graph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.n()) throw domain_error("relabel permutation size mismatch");
  std::vector<Edge> es;
  es.reserve(static_cast<std::size_t>(g.m()));
  for (const auto& [u, v] : g.edges()) es.push_back({perm[u], perm[v]});
  return Graph(g.n(), std::move(es));
}

}  // namespace spanreg
