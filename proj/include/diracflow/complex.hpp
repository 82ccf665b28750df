#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "diracflow/errors.hpp"

namespace diracflow {

// Finite simple graph with nonnegative integer vertex labels.
struct Graph {
  std::set<int> vertices;
  std::set<std::pair<int, int>> edges;  // normalized: first < second

  bool has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return edges.count({a, b}) != 0;
  }
};

// Parses an edge-list document. Lines are "v <id>" or "e <id> <id>";
// '#' starts a comment. Vertices referenced only in edges are auto-declared.
// Throws UsageError with a line number on malformed input or self-loops.
Graph parse_graph(const std::string& text);
Graph parse_graph_file(const std::string& path);

// The clique complex of a graph with a chosen vertex order per simplex.
// Simplices are grouped by dimension k (a k-simplex lists k+1 vertices);
// the stored order IS the orientation. Flat matrix indices run over all
// dimensions in ascending order, insertion order within a dimension.
struct OrientedComplex {
  std::vector<std::vector<std::vector<int>>> simplices;
  std::vector<int> f_vector;
  int total_dim = 0;

  int dims() const { return static_cast<int>(simplices.size()); }
  // First flat index of the dimension-k group.
  int offset(int k) const;
  int flat_index(int k, int i) const { return offset(k) + i; }
};

// Enumerates all cliques of g, grouped by dimension, default orientation
// ascending by vertex label. Throws NumericError past max_simplices.
OrientedComplex build_complex(const Graph& g, std::size_t max_simplices = 20000);

int euler_characteristic(const OrientedComplex& c);

// Deterministically permutes each simplex's vertex order using the seed.
OrientedComplex reorient(const OrientedComplex& c, std::uint64_t seed);

}  // namespace diracflow
