#pragma once

#include <string>
#include <vector>

#include "ccwl/acc.hpp"

namespace ccwl::fixtures {

inline Graph plain_graph(int n, std::vector<std::pair<int, int>> edges) {
  Graph g;
  g.vertex_count = n;
  g.ell = 0;
  g.edges = std::move(edges);
  g.colors.assign(std::size_t(n), "");
  return g;
}

inline Graph cycle6() { return plain_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}}); }

inline Graph two_triangles() { return plain_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}); }

// Two 4-cycles joined by the bridge e5 (edges e1..e9 in order). Lifted cells 0-7 are v1..v8, 8-16 are e1..e9.
inline Graph figure_a() {
  return plain_graph(8, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}, {4, 6}, {7, 5}, {7, 6}});
}

// Two 5-cycles sharing e5.
inline Graph figure_b() {
  return plain_graph(8, {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 6}, {7, 5}, {7, 6}});
}

namespace detail {

inline ACC flat_complex(std::vector<std::vector<int>> edges, std::vector<int> face) {
  std::vector<Cell> cells;
  for (int v = 0; v < 6; ++v) cells.push_back({{v}, 0, "0"});
  for (auto& e : edges) cells.push_back({e, 1, "0"});
  cells.push_back({face, 2, "0"});
  return ACC(6, 1, std::move(cells));
}

}  // namespace detail

// Non-uniform pair: a triangle of edges (or a path) next to an isolated 2-cell.
inline ACC nonuniform_a() { return detail::flat_complex({{0, 1}, {1, 2}, {0, 2}}, {3, 4, 5}); }
inline ACC nonuniform_b() { return detail::flat_complex({{0, 1}, {1, 2}}, {3, 4, 5}); }

// Three pairwise lower-adjacent edges; the second version counts the pairs.
inline const char* triangle_formula() {
  return "(exists 1 (x1 x2) (and (rank 1 x1) (and (rank 1 x2) (and (adj down x1 x2) "
         "(exists 1 (x3 x4) (and (rank 1 x3) (and (rank 1 x4) (and (adj down x3 x4) "
         "(and (adj down x1 x3) (eq x2 x4))))))))))";
}

inline const char* triangle_formula_12() {
  return "(exists 12 (x1 x2) (and (rank 1 x1) (and (rank 1 x2) (and (adj down x1 x2) "
         "(exists 1 (x3 x4) (and (rank 1 x3) (and (rank 1 x4) (and (adj down x3 x4) "
         "(and (adj down x1 x3) (eq x2 x4))))))))))";
}

// The inner part of the triangle formula with x1, x2 free.
inline const char* triangle_body() {
  return "(and (rank 1 x1) (and (rank 1 x2) (and (adj down x1 x2) "
         "(exists 1 (x3 x4) (and (rank 1 x3) (and (rank 1 x4) (and (adj down x3 x4) "
         "(and (adj down x1 x3) (eq x2 x4)))))))))";
}

// Sixteen adjacent edge pairs that each close an induced 4-cycle.
inline const char* four_cycle_body() {
  return "(and (adj down x1 x2) (exists 1 (x3 x4) (and (adj down x2 x3) (and (adj down x3 x4) "
         "(and (adj down x4 x1) (and (not (eq x1 x3)) (and (not (eq x2 x4)) "
         "(and (not (adj down x1 x3)) (not (adj down x2 x4))))))))))";
}

inline std::string four_cycle_formula() { return std::string("(exists 16 (x1 x2) ") + four_cycle_body() + ")"; }

}  // namespace ccwl::fixtures
