#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ccwl/acc.hpp"
#include "ccwl/refinement.hpp"

// Brute-force references built straight from vertex sets, independent of the library's tables.
namespace ref {

using ccwl::ACC;

inline bool subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool in_b(const ACC& g, int x, int y) {
  return g.cell(y).rank + 1 == g.cell(x).rank && subset(g.cell(y).vertices, g.cell(x).vertices);
}
inline bool in_c(const ACC& g, int x, int y) { return in_b(g, y, x); }

inline bool in_down(const ACC& g, int x, int y) {
  if (x == y || g.cell(x).rank != g.cell(y).rank) return false;
  for (int d = 0; d < g.size(); ++d)
    if (in_b(g, x, d) && in_b(g, y, d)) return true;
  return false;
}

inline bool in_up(const ACC& g, int x, int y) {
  if (x == y || g.cell(x).rank != g.cell(y).rank) return false;
  for (int d = 0; d < g.size(); ++d)
    if (in_c(g, x, d) && in_c(g, y, d)) return true;
  return false;
}

// y in N_kind(x), kinds 0 = B, 1 = C, 2 = down, 3 = up
inline bool in_nbr(const ACC& g, int kind, int x, int y) {
  switch (kind) {
    case 0: return in_b(g, x, y);
    case 1: return in_c(g, x, y);
    case 2: return in_down(g, x, y);
    default: return in_up(g, x, y);
  }
}

inline std::string unary(const ACC& g, int x) { return std::to_string(g.cell(x).rank) + "/" + g.cell(x).attr; }

inline std::string atp(const ACC& g, const std::vector<int>& t) {
  std::string s;
  for (int x : t) s += unary(g, x) + ";";
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (i == j) continue;
      s += t[i] == t[j] ? '=' : '.';
      for (int kind = 0; kind < 4; ++kind) s += in_nbr(g, kind, t[i], t[j]) ? '1' : '0';
    }
  return s;
}

// Joint colorings per round; each round is a list (per complex) of small integer ids.
using Rounds = std::vector<std::vector<std::vector<int>>>;

inline std::vector<std::vector<int>> relabel(const std::vector<std::vector<std::string>>& keys) {
  std::map<std::string, int> ids;
  for (const auto& side : keys)
    for (const auto& k : side) ids.emplace(k, 0);
  int next = 0;
  for (auto& [k, v] : ids) v = next++;
  std::vector<std::vector<int>> out;
  for (const auto& side : keys) {
    std::vector<int> c;
    for (const auto& k : side) c.push_back(ids[k]);
    out.push_back(c);
  }
  return out;
}

inline int classes(const std::vector<std::vector<int>>& c) {
  int m = 0;
  for (const auto& s : c)
    for (int x : s) m = std::max(m, x + 1);
  return m;
}

// Literal 1-CCWL following the boundary/coboundary/lower/upper multisets.
inline Rounds ccwl1(const std::vector<const ACC*>& gs, int max_rounds = 64) {
  std::vector<std::vector<std::string>> keys;
  for (const ACC* g : gs) {
    std::vector<std::string> k;
    for (int x = 0; x < g->size(); ++x) k.push_back(unary(*g, x));
    keys.push_back(k);
  }
  Rounds rounds{relabel(keys)};
  for (int t = 0; t < max_rounds; ++t) {
    const auto& chi = rounds.back();
    keys.clear();
    for (std::size_t s = 0; s < gs.size(); ++s) {
      const ACC& g = *gs[s];
      auto col = [&](int x) { return std::to_string(chi[s][std::size_t(x)]); };
      std::vector<std::string> side;
      for (int x = 0; x < g.size(); ++x) {
        std::vector<std::string> part[4];
        for (int y = 0; y < g.size(); ++y) {
          if (in_b(g, x, y)) part[0].push_back(col(y));
          if (in_c(g, x, y)) part[1].push_back(col(y));
          for (int z = 0; z < g.size(); ++z) {
            if (in_down(g, x, y) && in_b(g, x, z) && in_b(g, y, z)) part[2].push_back(col(y) + ":" + col(z));
            if (in_up(g, x, y) && in_c(g, x, z) && in_c(g, y, z)) part[3].push_back(col(y) + ":" + col(z));
          }
        }
        std::string k = col(x) + "|";
        for (auto& p : part) {
          std::sort(p.begin(), p.end());
          for (auto& e : p) k += e + ",";
          k += "|";
        }
        side.push_back(k);
      }
      keys.push_back(side);
    }
    auto next = relabel(keys);
    if (classes(next) == classes(rounds.back())) break;
    rounds.push_back(next);
  }
  return rounds;
}

inline std::vector<int> decode(std::size_t idx, int n, int k) {
  std::vector<int> t(static_cast<std::size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    t[std::size_t(i)] = int(idx % std::size_t(n));
    idx /= std::size_t(n);
  }
  return t;
}

inline std::size_t encode(const std::vector<int>& t, int n) {
  std::size_t idx = 0;
  for (int x : t) idx = idx * std::size_t(n) + std::size_t(x);
  return idx;
}

// Literal k-CCWL: atomic types, then contexts over all (alpha, beta) with the double shift.
inline Rounds box(const std::vector<const ACC*>& gs, int k, int max_rounds = 64) {
  std::vector<std::vector<std::string>> keys;
  std::vector<std::size_t> sizes;
  for (const ACC* g : gs) {
    std::vector<std::string> side;
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) total *= std::size_t(g->size());
    sizes.push_back(total);
    for (std::size_t idx = 0; idx < total; ++idx) side.push_back(atp(*g, decode(idx, g->size(), k)));
    keys.push_back(side);
  }
  Rounds rounds{relabel(keys)};
  for (int t = 0; t < max_rounds; ++t) {
    const auto& chi = rounds.back();
    keys.clear();
    for (std::size_t s = 0; s < gs.size(); ++s) {
      const ACC& g = *gs[s];
      const int n = g.size();
      std::vector<std::string> side;
      for (std::size_t idx = 0; idx < sizes[s]; ++idx) {
        const auto x = decode(idx, n, k);
        std::vector<std::string> ctx;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            auto xab = x;
            xab.push_back(a);
            xab.push_back(b);
            std::string c = atp(g, xab) + "#";
            for (int i = 0; i < k; ++i) {
              auto xa = x, xb = x;
              xa[std::size_t(i)] = a;
              xb[std::size_t(i)] = b;
              c += std::to_string(chi[s][encode(xa, n)]) + "/" + std::to_string(chi[s][encode(xb, n)]) + ",";
            }
            ctx.push_back(c);
          }
        std::sort(ctx.begin(), ctx.end());
        std::string key = std::to_string(chi[s][idx]) + "|";
        for (auto& c : ctx) key += c + ";";
        side.push_back(key);
      }
      keys.push_back(side);
    }
    auto next = relabel(keys);
    if (classes(next) == classes(rounds.back())) break;
    rounds.push_back(next);
  }
  return rounds;
}

// The two joint colorings induce the same partition.
inline bool same_partition(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].size() != b[s].size()) return false;
    for (std::size_t i = 0; i < a[s].size(); ++i) {
      auto [it1, n1] = ab.emplace(a[s][i], b[s][i]);
      auto [it2, n2] = ba.emplace(b[s][i], a[s][i]);
      if (it1->second != b[s][i] || it2->second != a[s][i]) return false;
    }
  }
  return true;
}

// Library trace agrees with a reference run round by round.
inline bool trace_matches(const ccwl::RefinementTrace& tr, const Rounds& rounds) {
  if (tr.last_round() != int(rounds.size()) - 1) return false;
  for (std::size_t t = 0; t < rounds.size(); ++t)
    if (!same_partition(tr.rounds[t].colors, rounds[t])) return false;
  return true;
}

inline std::multiset<int> histogram(const std::vector<int>& c) { return {c.begin(), c.end()}; }

}  // namespace ref
