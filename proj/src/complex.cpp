#include "diracflow/complex.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace diracflow {

namespace {

bool parse_int(const std::string& tok, int& out) {
  if (tok.empty()) return false;
  for (char ch : tok)
    if (ch < '0' || ch > '9') return false;
  try {
    out = std::stoi(tok);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace

Graph parse_graph(const std::string& text) {
  Graph g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;  // blank line
    if (kind == "v") {
      std::string a, extra;
      int va;
      if (!(ls >> a) || !parse_int(a, va) || (ls >> extra))
        throw UsageError("parse error at line " + std::to_string(lineno) +
                         ": expected \"v <id>\"");
      g.vertices.insert(va);
    } else if (kind == "e") {
      std::string a, b, extra;
      int va, vb;
      if (!(ls >> a >> b) || !parse_int(a, va) || !parse_int(b, vb) || (ls >> extra))
        throw UsageError("parse error at line " + std::to_string(lineno) +
                         ": expected \"e <id> <id>\"");
      if (va == vb)
        throw UsageError("validation error at line " + std::to_string(lineno) +
                         ": self-loop on vertex " + std::to_string(va));
      if (va > vb) std::swap(va, vb);
      g.vertices.insert(va);
      g.vertices.insert(vb);
      g.edges.insert({va, vb});
    } else {
      throw UsageError("parse error at line " + std::to_string(lineno) +
                       ": unknown record \"" + kind + "\"");
    }
  }
  return g;
}

Graph parse_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

int OrientedComplex::offset(int k) const {
  int off = 0;
  for (int p = 0; p < k; ++p) off += f_vector[p];
  return off;
}

OrientedComplex build_complex(const Graph& g, std::size_t max_simplices) {
  OrientedComplex c;
  std::map<int, std::set<int>> adj;
  for (int v : g.vertices) adj[v];
  for (auto& [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }

  std::vector<std::vector<int>> layer;
  for (int v : g.vertices) layer.push_back({v});  // set order = ascending
  std::size_t total = 0;
  while (!layer.empty()) {
    total += layer.size();
    if (total > max_simplices)
      throw NumericError("clique cap exceeded (" + std::to_string(max_simplices) +
                         " simplices); graph too dense");
    c.simplices.push_back(layer);
    c.f_vector.push_back(static_cast<int>(layer.size()));
    std::vector<std::vector<int>> next;
    for (const auto& s : layer) {
      // extend by a vertex above the max label, adjacent to all members
      for (int w : adj[s.back()]) {
        if (w <= s.back()) continue;
        bool complete = true;
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
          if (!adj[s[i]].count(w)) {
            complete = false;
            break;
          }
        if (complete) {
          auto e = s;
          e.push_back(w);
          next.push_back(std::move(e));
        }
      }
    }
    layer = std::move(next);
  }
  c.total_dim = static_cast<int>(total);
  return c;
}

int euler_characteristic(const OrientedComplex& c) {
  int chi = 0;
  for (int k = 0; k < c.dims(); ++k) chi += (k % 2 == 0 ? 1 : -1) * c.f_vector[k];
  return chi;
}

OrientedComplex reorient(const OrientedComplex& c, std::uint64_t seed) {
  OrientedComplex out = c;
  std::mt19937_64 rng(seed);
  for (auto& group : out.simplices)
    for (auto& s : group)
      for (std::size_t i = s.size(); i > 1; --i) {
        // hand-rolled Fisher-Yates: pinned draw sequence for reproducibility
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(s[i - 1], s[j]);
      }
  return out;
}

}  // namespace diracflow
