#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "ccwl/acc.hpp"

namespace ccwl {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20240531;

// Random uniform ACC: vertices carry 0-cells, larger cells have rank |cell| - 1.
inline ACC random_uniform_acc(Rng& rng, int max_cells = 8, int ell = 1) {
  std::uniform_int_distribution<int> nv(1, std::min(4, max_cells));
  for (;;) {
    const int n = nv(rng);
    std::vector<Cell> cells;
    std::set<std::vector<int>> seen;
    auto attr = [&]() {
      std::string s;
      for (int i = 0; i < ell; ++i) s += (rng() & 3) == 0 ? '1' : '0';
      return s;
    };
    for (int v = 0; v < n; ++v) {
      cells.push_back({{v}, 0, attr()});
      seen.insert({v});
    }
    const int extra = std::uniform_int_distribution<int>(0, max_cells - n)(rng);
    for (int e = 0; e < extra && n >= 2; ++e) {
      std::vector<int> vs;
      for (int v = 0; v < n; ++v)
        if (rng() & 1) vs.push_back(v);
      if (vs.size() < 2 || vs.size() > 3 || !seen.insert(vs).second) continue;
      cells.push_back({vs, int(vs.size()) - 1, attr()});
    }
    ACC acc(n, ell, std::move(cells));
    if (is_uniform(acc).uniform) return acc;
  }
}

// Same complex with vertices and cells permuted.
inline ACC permuted_copy(const ACC& acc, Rng& rng) {
  std::vector<int> pi(std::size_t(acc.vertex_count()));
  std::iota(pi.begin(), pi.end(), 0);
  std::shuffle(pi.begin(), pi.end(), rng);
  std::vector<Cell> cells;
  for (const Cell& c : acc.cells()) {
    Cell d = c;
    for (int& v : d.vertices) v = pi[std::size_t(v)];
    std::sort(d.vertices.begin(), d.vertices.end());
    cells.push_back(std::move(d));
  }
  std::shuffle(cells.begin(), cells.end(), rng);
  return ACC(acc.vertex_count(), acc.ell(), std::move(cells));
}

// A pair that is isomorphic, a small perturbation, or independent, in equal shares.
inline std::pair<ACC, ACC> random_acc_pair(Rng& rng, int max_cells = 8) {
  ACC a = random_uniform_acc(rng, max_cells);
  switch (rng() % 3) {
    case 0: return {a, permuted_copy(a, rng)};
    case 1: {
      for (int attempt = 0; attempt < 20; ++attempt) {
        std::vector<Cell> cells = a.cells();
        std::size_t i = std::size_t(rng() % cells.size());
        if (!cells[i].attr.empty()) cells[i].attr[0] = cells[i].attr[0] == '0' ? '1' : '0';
        ACC b(a.vertex_count(), a.ell(), std::move(cells));
        return {a, permuted_copy(b, rng)};
      }
      [[fallthrough]];
    }
    default: return {a, random_uniform_acc(rng, max_cells)};
  }
}

inline Graph random_graph(Rng& rng, int n, double p) {
  Graph g;
  g.vertex_count = n;
  g.ell = 0;
  g.colors.assign(std::size_t(n), "");
  std::bernoulli_distribution edge(p);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (edge(rng)) g.edges.push_back({u, v});
  return g;
}

// Disjoint union of cycles with the given lengths (each at least 3).
inline Graph cycles_graph(const std::vector<int>& lengths) {
  Graph g;
  int base = 0;
  for (int len : lengths) {
    for (int i = 0; i < len; ++i) g.edges.push_back({base + i, base + (i + 1) % len});
    for (auto& [u, v] : g.edges)
      if (u > v) std::swap(u, v);
    base += len;
  }
  g.vertex_count = base;
  g.colors.assign(std::size_t(base), "");
  return g;
}

// Random graph pair on at most max_n vertices; some pairs are 2-regular with equal size.
inline std::pair<Graph, Graph> random_graph_pair(Rng& rng, int max_n = 7) {
  const int n = std::uniform_int_distribution<int>(2, max_n)(rng);
  if (n >= 6 && rng() % 4 == 0) {
    std::vector<int> split = n == 6 ? std::vector<int>{3, 3} : std::vector<int>{3, n - 3};
    return {cycles_graph({n}), cycles_graph(split)};
  }
  const double p = std::uniform_real_distribution<double>(0.2, 0.7)(rng);
  return {random_graph(rng, n, p), random_graph(rng, n, p)};
}

}  // namespace ccwl
