#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spanreg {

using Edge = std::pair<int, int>;  // stored with first < second

// Exact rational, used wherever a density or threshold comparison must not
// suffer floating point noise. Always kept normalized, den > 0.
struct Rat {
  long long num = 0;
  long long den = 1;

  Rat() = default;
  Rat(long long n, long long d);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rat& o) const;
  bool operator<=(const Rat& o) const;
  bool operator>=(const Rat& o) const { return o <= *this; }
  bool operator>(const Rat& o) const { return o < *this; }
};

// Simple undirected graph on vertices 0..n-1. Adjacency is a packed bit
// matrix; the edge list is kept sorted. Instances are immutable after
// construction, so views and sub-solvers can share them freely.
class Graph {
 public:
  Graph() = default;
  Graph(int n, std::vector<Edge> edges);  // validates, sorts, rejects dups/loops

  int n() const { return n_; }
  long long m() const { return static_cast<long long>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(int u, int v) const {
    return (rows_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v >> 6)] >>
            (v & 63)) & 1u;
  }
  int degree(int v) const { return deg_[v]; }
  int min_degree() const;
  int max_degree() const;

  std::vector<int> neighbors(int v) const;

  // Number of neighbors of v inside the sorted set s.
  int degree_into(int v, const std::vector<int>& s) const;

  // Raw adjacency row of v (words_ 64-bit words).
  const std::uint64_t* row(int v) const { return rows_.data() + static_cast<std::size_t>(v) * words_; }
  std::size_t words() const { return words_; }

  bool is_connected() const;

 private:
  int n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> rows_;
  std::vector<int> deg_;
  std::vector<Edge> edges_;
};

// --- set and counting helpers (sets are sorted vectors of vertex ids) ---

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b);
std::vector<int> set_intersect(const std::vector<int>& a, const std::vector<int>& b);
std::vector<int> set_minus(const std::vector<int>& a, const std::vector<int>& b);
bool set_contains(const std::vector<int>& a, int v);

// All vertices adjacent to every vertex of s.
std::vector<int> common_neighbors(const Graph& g, const std::vector<int>& s);

// Edges with one endpoint in a and the other in b; an edge inside a∩b
// counts once. Sets need not be disjoint.
long long edges_between(const Graph& g, const std::vector<int>& a, const std::vector<int>& b);

// e(a,b) / (|a|·|b|), exact. Requires disjoint nonempty sets.
Rat pair_density(const Graph& g, const std::vector<int>& a, const std::vector<int>& b);

// Subgraph induced on s; vertex i of the result is s[i]. Returns the map too.
Graph induced_subgraph(const Graph& g, const std::vector<int>& s);

// Relabels vertices by perm (perm[old] = new). Used by generators to hide
// planted structure.
Graph relabel(const Graph& g, const std::vector<int>& perm);

}  // namespace spanreg
