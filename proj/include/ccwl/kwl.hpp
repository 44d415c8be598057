#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ccwl/refinement.hpp"

namespace ccwl {

namespace detail {

struct GraphView {
  int n = 0;
  std::vector<std::vector<char>> adj;
  std::vector<int> color;  // joint color id
};

inline std::vector<GraphView> graph_views(const std::vector<const Graph*>& gs) {
  std::map<std::string, int> ids;
  for (const Graph* g : gs) {
    if (int(g->colors.size()) != g->vertex_count) throw Error(ErrorCode::Validation, "graph needs one color per vertex");
    for (const auto& c : g->colors) ids[c] = 0;
  }
  int next = 0;
  for (auto& [c, id] : ids) id = next++;
  std::vector<GraphView> out;
  for (const Graph* g : gs) {
    GraphView v;
    v.n = g->vertex_count;
    v.adj.assign(std::size_t(v.n), std::vector<char>(std::size_t(v.n), 0));
    for (auto [a, b] : g->edges) {
      if (a < 0 || b < 0 || a >= v.n || b >= v.n || a == b) throw Error(ErrorCode::Validation, "bad edge");
      v.adj[std::size_t(a)][std::size_t(b)] = v.adj[std::size_t(b)][std::size_t(a)] = 1;
    }
    for (const auto& c : g->colors) v.color.push_back(ids[c]);
    out.push_back(std::move(v));
  }
  return out;
}

// Equality and adjacency code between two vertices.
inline u64 graph_rel(const GraphView& g, int a, int b) {
  return (a == b ? 1u : 0u) | (g.adj[std::size_t(a)][std::size_t(b)] ? 2u : 0u);
}

}  // namespace detail

// Joint k-WL refinement of one or two graphs (k = 1 is color refinement).
inline RefinementTrace kwl_refine(const Graph& g, const Graph* h, int k, const RefineOptions& opt = {}) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  std::vector<const Graph*> gs{&g};
  if (h) gs.push_back(h);
  auto views = detail::graph_views(gs);
  const std::size_t sides = views.size();
  auto tuples = [&](std::size_t s) { return detail::ipow(std::size_t(views[s].n), k); };

  auto finalize = [&](std::vector<std::vector<Key>>& keys, int round) {
    std::vector<std::vector<Key>*> ptrs;
    for (auto& kk : keys) ptrs.push_back(&kk);
    Coloring c;
    c.k = k;
    c.round = round;
    c.classes = detail::assign_ids(ptrs, c.colors);
    return c;
  };

  RefinementTrace tr;
  tr.k = k;
  tr.method = k == 1 ? Method::Ccwl1 : Method::Box;
  for (std::size_t s = 0; s < sides; ++s) tr.joint_tuples += tuples(s);

  std::vector<int> t;
  {
    std::vector<std::vector<Key>> keys(sides);
    for (std::size_t s = 0; s < sides; ++s)
      for (std::size_t idx = 0; idx < tuples(s); ++idx) {
        detail::decode_tuple(idx, std::size_t(views[s].n), k, t);
        Key key;
        for (int v : t) key.push_back(u64(views[s].color[std::size_t(v)]));
        for (std::size_t i = 0; i < t.size(); ++i)
          for (std::size_t j = i + 1; j < t.size(); ++j) key.push_back(detail::graph_rel(views[s], t[i], t[j]));
        keys[s].push_back(std::move(key));
      }
    tr.rounds.push_back(finalize(keys, 0));
  }

  for (;;) {
    if (opt.max_rounds && tr.last_round() >= *opt.max_rounds) break;
    const Coloring& prev = tr.rounds.back();
    std::vector<std::vector<Key>> keys(sides);
    for (std::size_t s = 0; s < sides; ++s) {
      const auto& G = views[s];
      const std::size_t n = std::size_t(G.n);
      const auto& chi = prev.colors[s];
      for (std::size_t idx = 0; idx < tuples(s); ++idx) {
        detail::decode_tuple(idx, n, k, t);
        Key key{u64(chi[idx])};
        if (k == 1) {
          std::vector<u64> nb;
          for (std::size_t u = 0; u < n; ++u)
            if (G.adj[std::size_t(t[0])][u]) nb.push_back(u64(chi[u]));
          std::sort(nb.begin(), nb.end());
          key.insert(key.end(), nb.begin(), nb.end());
        } else {
          const std::size_t w = 1 + std::size_t(k);
          std::vector<u64> rows;
          for (std::size_t u = 0; u < n; ++u) {
            u64 code = u64(G.color[u]);
            for (int v : t) code = (code << 2) | detail::graph_rel(G, v, int(u));
            rows.push_back(code);
            for (int i = 0; i < k; ++i) {
              std::size_t place = detail::ipow(n, k - 1 - i);
              std::size_t sub = idx - std::size_t(t[std::size_t(i)]) * place + u * place;
              rows.push_back(u64(chi[sub]));
            }
          }
          detail::sort_rows(rows, w);
          key.insert(key.end(), rows.begin(), rows.end());
        }
        keys[s].push_back(std::move(key));
      }
    }
    Coloring next = finalize(keys, prev.round + 1);
    if (next.classes == prev.classes) {
      tr.stable = true;
      break;
    }
    tr.rounds.push_back(std::move(next));
  }
  tr.stable_round = tr.last_round();
  if (sides == 2)
    for (int r = 0; r <= tr.last_round(); ++r)
      if (tr.signature(0, r) != tr.signature(1, r)) {
        tr.first_divergence = r;
        break;
      }
  return tr;
}

}  // namespace ccwl
