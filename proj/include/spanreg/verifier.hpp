#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spanreg/graph.hpp"

namespace spanreg {

bool is_r_regular(const Graph& g, int r);

// True iff every edge of sub is an edge of host and both graphs share n.
bool is_spanning_subgraph(const Graph& host, const Graph& sub);

// Exact vertex connectivity. Complete graphs give n-1, disconnected 0.
// Unit-capacity max-flow on the vertex-split digraph; the flow targets are
// chosen around one minimum-degree vertex, which is enough to see a
// minimum separator whether or not it contains that vertex.
int vertex_connectivity(const Graph& g);

// Smallest vertex cut by direct enumeration. Exponential; cross-check
// oracle for tiny graphs only.
int vertex_connectivity_brute(const Graph& g);

// Maximum number of internally disjoint u-v paths (u != v, non-adjacent or
// adjacent both fine; adjacency contributes one direct path).
int local_connectivity(const Graph& g, int u, int v);

// Proof object produced by every solver: the claimed subgraph plus the
// degree it should attain everywhere.
struct Certificate {
  int r = 0;
  std::vector<Edge> edges;  // on the host's vertex ids
};

struct VerifyReport {
  bool ok = false;
  bool spanning = false;
  bool regular = false;
  int kappa = -1;               // connectivity of the certificate subgraph
  bool kappa_ok = false;        // kappa >= r
  bool host_checked = false;    // host connectivity recomputed (small n only)
  std::string detail;           // first failure, empty when ok
};

// Full check: edges lie in host, subgraph spans, is r-regular, and has
// connectivity >= r. Host connectivity is recomputed only when
// host.n() <= host_kappa_limit (the comparison kappa(H) <= kappa(G) is a
// theorem; recomputing it on big hosts buys nothing).
VerifyReport verify_certificate(const Graph& host, const Certificate& cert,
                                int host_kappa_limit = 100);

std::string certificate_to_json(const Certificate& c, int n);
Certificate certificate_from_json(const std::string& text, int* n_out = nullptr);

}  // namespace spanreg
