#pragma once

#include <iosfwd>
#include <string>

#include "spanreg/graph.hpp"

namespace spanreg {

// Wire format: {"n": <int>, "edges": [[u,v], ...]} with u < v, list sorted.
std::string to_json(const Graph& g);
Graph from_json(const std::string& text);

Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

// Graphviz "graph { ... }" with one vertex per line, then edges.
std::string to_dot(const Graph& g);

}  // namespace spanreg
