#pragma once

#include <string>

#include "diracflow/complex.hpp"

namespace testsupport {

using namespace diracflow;

inline OrientedComplex k2() { return build_complex(parse_graph("e 0 1\n")); }

inline OrientedComplex k3() {
  return build_complex(parse_graph("e 0 1\ne 0 2\ne 1 2\n"));
}

inline OrientedComplex c4() {
  return build_complex(parse_graph("e 0 1\ne 1 2\ne 2 3\ne 0 3\n"));
}

// Star with four rays, center 0.
inline OrientedComplex star4() {
  return build_complex(parse_graph("e 0 1\ne 0 2\ne 0 3\ne 0 4\n"));
}

inline OrientedComplex two_isolated_vertices() {
  return build_complex(parse_graph("v 0\nv 1\n"));
}

// Fixed Erdos-Renyi draw on 8 vertices, edge probability 1/2: the row-major
// pair scan accepting when mt19937(8) draws below 2^31. f = (8, 12, 3),
// chi = -1, connected.
inline std::string g8_text() {
  return "v 0\nv 1\nv 2\nv 3\nv 4\nv 5\nv 6\nv 7\n"
         "e 0 2\ne 0 4\ne 0 6\ne 1 3\ne 1 4\ne 1 5\ne 1 7\n"
         "e 2 4\ne 2 5\ne 3 4\ne 3 7\ne 5 6\n";
}

inline OrientedComplex g8() { return build_complex(parse_graph(g8_text())); }

}  // namespace testsupport
