#pragma once

#include <string>
#include <vector>

#include "ccwl/acc.hpp"

namespace ccwl {

// Relation bits over ordered index pairs (i,j), i != j, in lexicographic order;
// eq over i < j only. Bit (i,j) of b records x_j in N_B(x_i).
struct AtomicType {
  int k = 0;
  std::vector<int> ranks;
  std::vector<std::string> colors;
  std::vector<bool> eq, b, c, down, up;

  bool operator==(const AtomicType&) const = default;
  auto operator<=>(const AtomicType&) const = default;

  static int pair_slot(int k, int i, int j) { return i * (k - 1) + (j < i ? j : j - 1); }
  static int eq_slot(int k, int i, int j) {  // i < j
    return i * k - i * (i + 1) / 2 + (j - i - 1);
  }

  bool rel(Nbr kind, int i, int j) const {
    const auto& v = kind == Nbr::B ? b : kind == Nbr::C ? c : kind == Nbr::Down ? down : up;
    return v[std::size_t(pair_slot(k, i, j))];
  }
  bool equal(int i, int j) const {
    if (i == j) return true;
    if (i > j) std::swap(i, j);
    return eq[std::size_t(eq_slot(k, i, j))];
  }

  // rank_seq | colors | eq | b | c | down | up
  std::string serialize() const {
    std::string s;
    for (int r : ranks) s += std::to_string(r) + ",";
    s += "|";
    for (const auto& col : colors) s += col + ",";
    auto bits = [&](const std::vector<bool>& v) {
      s += "|";
      for (bool x : v) s += x ? '1' : '0';
    };
    bits(eq);
    bits(b);
    bits(c);
    bits(down);
    bits(up);
    return s;
  }

  // Equal entries must agree on rank, color and relation rows; b/c must be dual.
  bool consistent() const {
    if (int(ranks.size()) != k || int(colors.size()) != k) return false;
    const std::size_t pairs = std::size_t(k * (k - 1));
    if (b.size() != pairs || c.size() != pairs || down.size() != pairs || up.size() != pairs) return false;
    if (eq.size() != std::size_t(k * (k - 1) / 2)) return false;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        if (rel(Nbr::B, i, j) != rel(Nbr::C, j, i)) return false;
        if (rel(Nbr::Down, i, j) != rel(Nbr::Down, j, i)) return false;
        if (rel(Nbr::Up, i, j) != rel(Nbr::Up, j, i)) return false;
        if (equal(i, j)) {
          if (ranks[std::size_t(i)] != ranks[std::size_t(j)] || colors[std::size_t(i)] != colors[std::size_t(j)])
            return false;
          for (Nbr kind : kAllNbr)
            if (rel(kind, i, j)) return false;
          for (int l = 0; l < k; ++l) {
            if (l == i || l == j) continue;
            if (equal(i, l) != equal(j, l)) return false;
            for (Nbr kind : kAllNbr)
              if (rel(kind, i, l) != rel(kind, j, l) || rel(kind, l, i) != rel(kind, l, j)) return false;
          }
        }
      }
    return true;
  }
};

inline AtomicType atomic_type(const ACC& acc, const std::vector<int>& tuple) {
  AtomicType a;
  a.k = int(tuple.size());
  const int k = a.k;
  for (int x : tuple) {
    if (x < 0 || x >= acc.size()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
    a.ranks.push_back(acc.cell(x).rank);
    a.colors.push_back(acc.cell(x).attr);
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) a.eq.push_back(tuple[std::size_t(i)] == tuple[std::size_t(j)]);
  for (Nbr kind : kAllNbr) {
    auto& v = kind == Nbr::B ? a.b : kind == Nbr::C ? a.c : kind == Nbr::Down ? a.down : a.up;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j) v.push_back(acc.in(tuple[std::size_t(j)], kind, tuple[std::size_t(i)]));
  }
  return a;
}

}  // namespace ccwl
