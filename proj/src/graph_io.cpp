#include "spanreg/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spanreg/errors.hpp"

namespace spanreg {

std::string to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.n();
  auto& arr = j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : g.edges()) arr.push_back({u, v});
  return j.dump();
}

Graph from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw domain_error(std::string("bad graph json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
    throw domain_error("graph json needs fields n and edges");
  int n = j["n"].get<int>();
  std::vector<Edge> es;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) throw domain_error("edge entries must be pairs");
    es.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return Graph(n, std::move(es));
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot write " + path);
  out << to_json(g) << '\n';
}

std::string to_dot(const Graph& g) {
  std::ostringstream os;
  os << "graph {\n";
  for (int v = 0; v < g.n(); ++v) os << "  " << v << ";\n";
  for (const auto& [u, v] : g.edges()) os << "  " << u << " -- " << v << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace spanreg
