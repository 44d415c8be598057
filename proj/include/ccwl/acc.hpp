#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ccwl/errors.hpp"

namespace ccwl {

enum class Nbr : std::uint8_t { B = 0, C = 1, Down = 2, Up = 3 };

inline constexpr Nbr kAllNbr[4] = {Nbr::B, Nbr::C, Nbr::Down, Nbr::Up};

inline const char* nbr_name(Nbr k) {
  switch (k) {
    case Nbr::B: return "B";
    case Nbr::C: return "C";
    case Nbr::Down: return "down";
    case Nbr::Up: return "up";
  }
  return "?";
}

// Bits of a pairwise relation code rel(x, y): equality, then y in N_kind(x).
inline constexpr std::uint8_t kRelEq = 1;
inline constexpr std::uint8_t nbr_bit(Nbr k) { return std::uint8_t(2u << unsigned(k)); }

struct Cell {
  std::vector<int> vertices;  // ascending
  int rank = 0;
  std::string attr;  // bitstring of length ell
};

struct Graph {
  int vertex_count = 0;
  int ell = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, input order preserved
  std::vector<std::string> colors;
};

class ACC {
 public:
  ACC() = default;

  // Validates and builds the neighborhood indices.
  ACC(int vertex_count, int ell, std::vector<Cell> cells, std::optional<int> anchor_vertex = {})
      : vertex_count_(vertex_count), ell_(ell), cells_(std::move(cells)), anchor_(anchor_vertex) {
    validate();
    build();
  }

  int vertex_count() const { return vertex_count_; }
  int ell() const { return ell_; }
  int rho() const { return rho_; }
  int size() const { return int(cells_.size()); }
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int i) const { return cells_.at(std::size_t(i)); }
  std::optional<int> anchor_vertex() const { return anchor_; }

  const std::vector<int>& neighbors(int x, Nbr k) const {
    if (x < 0 || x >= size()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
    return nbr_[std::size_t(k)][std::size_t(x)];
  }

  std::uint8_t rel(int x, int y) const { return rel_[std::size_t(x) * cells_.size() + std::size_t(y)]; }
  bool in(int y, Nbr k, int x) const { return rel(x, y) & nbr_bit(k); }

  std::optional<int> find_cell(const std::vector<int>& verts) const {
    auto it = index_.find(verts);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // The singleton cell of the anchor vertex, if any.
  bool is_fresh_zero_cell(int x) const {
    const Cell& c = cells_[std::size_t(x)];
    return anchor_ && c.rank == 0 && c.vertices.size() == 1 && c.vertices[0] == *anchor_;
  }

 private:
  void validate() const {
    if (vertex_count_ < 0 || ell_ < 0) throw Error(ErrorCode::Validation, "negative size");
    std::set<std::vector<int>> seen;
    std::vector<bool> has_singleton(std::size_t(vertex_count_), false);
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const Cell& c = cells_[i];
      if (c.vertices.empty()) throw Error(ErrorCode::Validation, "cell " + std::to_string(i) + " is empty");
      for (std::size_t j = 0; j < c.vertices.size(); ++j) {
        int v = c.vertices[j];
        if (v < 0 || v >= vertex_count_)
          throw Error(ErrorCode::Validation, "cell " + std::to_string(i) + " has vertex out of range");
        if (j > 0 && c.vertices[j - 1] >= v)
          throw Error(ErrorCode::Validation, "cell " + std::to_string(i) + " vertices not strictly ascending");
      }
      if (c.rank < 0) throw Error(ErrorCode::Validation, "cell " + std::to_string(i) + " has negative rank");
      if (int(c.attr.size()) != ell_)
        throw Error(ErrorCode::Validation, "cell " + std::to_string(i) + " attribute width differs from ell");
      for (char ch : c.attr)
        if (ch != '0' && ch != '1') throw Error(ErrorCode::Validation, "attribute is not a bitstring");
      if (!seen.insert(c.vertices).second)
        throw Error(ErrorCode::Validation, "duplicate vertex set in cell " + std::to_string(i));
      if (c.vertices.size() == 1) has_singleton[std::size_t(c.vertices[0])] = true;
    }
    for (int v = 0; v < vertex_count_; ++v)
      if (!has_singleton[std::size_t(v)])
        throw Error(ErrorCode::Validation, "missing singleton cell for vertex " + std::to_string(v));
    for (std::size_t i = 0; i < cells_.size(); ++i)
      for (std::size_t j = 0; j < cells_.size(); ++j) {
        if (i == j) continue;
        const Cell& x = cells_[i];
        const Cell& y = cells_[j];
        if (std::includes(y.vertices.begin(), y.vertices.end(), x.vertices.begin(), x.vertices.end()) &&
            x.rank > y.rank)
          throw Error(ErrorCode::Validation, "rank monotonicity violated between cells " + std::to_string(i) +
                                                 " and " + std::to_string(j));
      }
    if (anchor_ && (*anchor_ < 0 || *anchor_ >= vertex_count_))
      throw Error(ErrorCode::Validation, "anchor vertex out of range");
  }

  void build() {
    const std::size_t n = cells_.size();
    rho_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
      rho_ = std::max(rho_, cells_[i].rank);
      index_[cells_[i].vertices] = int(i);
    }
    for (auto& v : nbr_) v.assign(n, {});
    rel_.assign(n * n, 0);
    // sub[i][j]: cell j is a strict subset of cell i
    std::vector<std::vector<char>> sub(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && std::includes(cells_[i].vertices.begin(), cells_[i].vertices.end(),
                                    cells_[j].vertices.begin(), cells_[j].vertices.end()))
          sub[i][j] = 1;
    auto rk = [&](std::size_t i) { return cells_[i].rank; };
    for (std::size_t x = 0; x < n; ++x) {
      rel_[x * n + x] |= kRelEq;
      for (std::size_t y = 0; y < n; ++y) {
        if (x == y) continue;
        if (sub[x][y] && rk(y) == rk(x) - 1) rel_[x * n + y] |= nbr_bit(Nbr::B);
        if (sub[y][x] && rk(y) == rk(x) + 1) rel_[x * n + y] |= nbr_bit(Nbr::C);
        if (rk(y) != rk(x)) continue;
        for (std::size_t d = 0; d < n; ++d) {
          if (rk(d) + 1 == rk(x) && sub[x][d] && sub[y][d]) rel_[x * n + y] |= nbr_bit(Nbr::Down);
          if (rk(d) - 1 == rk(x) && sub[d][x] && sub[d][y]) rel_[x * n + y] |= nbr_bit(Nbr::Up);
        }
      }
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (Nbr k : kAllNbr)
          if (rel_[x * n + y] & nbr_bit(k)) nbr_[std::size_t(k)][x].push_back(int(y));
  }

  int vertex_count_ = 0;
  int ell_ = 0;
  int rho_ = 0;
  std::vector<Cell> cells_;
  std::optional<int> anchor_;
  std::vector<std::vector<int>> nbr_[4];
  std::vector<std::uint8_t> rel_;
  std::map<std::vector<int>, int> index_;
};

struct UniformityResult {
  bool uniform = true;
  std::optional<int> witness;
};

namespace detail {

// Multi-source BFS over the union of the four relations (the union is symmetric).
inline std::vector<int> bfs_from(const ACC& acc, const std::vector<int>& sources) {
  std::vector<int> dist(std::size_t(acc.size()), -1);
  std::deque<int> q;
  for (int s : sources) {
    dist[std::size_t(s)] = 0;
    q.push_back(s);
  }
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    for (Nbr k : kAllNbr)
      for (int y : acc.neighbors(x, k))
        if (dist[std::size_t(y)] < 0) {
          dist[std::size_t(y)] = dist[std::size_t(x)] + 1;
          q.push_back(y);
        }
  }
  return dist;
}

}  // namespace detail

inline UniformityResult is_uniform(const ACC& acc) {
  std::vector<int> zero;
  for (int i = 0; i < acc.size(); ++i)
    if (acc.cell(i).rank == 0) zero.push_back(i);
  auto dist = detail::bfs_from(acc, zero);
  for (int i = 0; i < acc.size(); ++i)
    if (dist[std::size_t(i)] < 0) return {false, i};
  return {};
}

// Number of neighborhood steps to the nearest non-fresh 0-cell; nullopt if unreachable.
inline std::optional<int> base_distance(const ACC& acc, int x) {
  if (x < 0 || x >= acc.size()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
  std::vector<int> zero;
  for (int i = 0; i < acc.size(); ++i)
    if (acc.cell(i).rank == 0 && !acc.is_fresh_zero_cell(i)) zero.push_back(i);
  auto dist = detail::bfs_from(acc, zero);
  if (dist[std::size_t(x)] < 0) return std::nullopt;
  return dist[std::size_t(x)];
}

inline ACC lift_graph(const Graph& g) {
  if (int(g.colors.size()) != g.vertex_count) throw Error(ErrorCode::Validation, "graph needs one color per vertex");
  std::set<std::pair<int, int>> seen;
  std::vector<Cell> cells;
  for (int v = 0; v < g.vertex_count; ++v) {
    if (int(g.colors[std::size_t(v)].size()) != g.ell)
      throw Error(ErrorCode::Validation, "vertex color width differs from ell");
    cells.push_back({{v}, 0, g.colors[std::size_t(v)] + "0"});
  }
  for (auto [u, v] : g.edges) {
    if (u == v) throw Error(ErrorCode::Validation, "graph has a loop");
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= g.vertex_count) throw Error(ErrorCode::Validation, "edge endpoint out of range");
    if (!seen.insert({u, v}).second) throw Error(ErrorCode::Validation, "graph has a multi-edge");
    cells.push_back({{u, v}, 1, std::string(std::size_t(g.ell), '0') + "1"});
  }
  return ACC(g.vertex_count, g.ell + 1, std::move(cells));
}

// Adds a* and the cells {a*} and x ∪ {a*} for every 0-cell x. Widens attributes by two tag bits.
inline ACC add_anchor(const ACC& acc) {
  if (acc.anchor_vertex()) throw Error(ErrorCode::InvalidState, "complex is already anchored");
  const int a = acc.vertex_count();
  const std::string zeros(std::size_t(acc.ell()), '0');
  std::vector<Cell> cells;
  for (const Cell& c : acc.cells()) cells.push_back({c.vertices, c.rank, c.attr + "00"});
  cells.push_back({{a}, 0, zeros + "10"});
  for (const Cell& c : acc.cells()) {
    if (c.rank != 0) continue;
    Cell e{c.vertices, 1, zeros + "01"};
    e.vertices.push_back(a);
    cells.push_back(std::move(e));
  }
  return ACC(a + 1, acc.ell() + 2, std::move(cells), a);
}

}  // namespace ccwl
