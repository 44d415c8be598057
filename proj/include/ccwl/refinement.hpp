#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ccwl/acc.hpp"

namespace ccwl {

using u64 = std::uint64_t;
using Key = std::vector<u64>;

// Dense ids for (rank, attr) shared by the complexes of one comparison.
class UnaryTable {
 public:
  UnaryTable() = default;
  explicit UnaryTable(const std::vector<const ACC*>& accs) {
    std::map<std::pair<int, std::string>, int> m;
    for (const ACC* a : accs)
      for (const Cell& c : a->cells()) m[{c.rank, c.attr}] = 0;
    int id = 0;
    for (auto& [k, v] : m) v = id++;
    for (const ACC* a : accs) {
      std::vector<int> ids;
      for (const Cell& c : a->cells()) ids.push_back(m[{c.rank, c.attr}]);
      ids_.push_back(std::move(ids));
    }
  }
  int of(std::size_t side, int cell) const { return ids_[side][std::size_t(cell)]; }

 private:
  std::vector<std::vector<int>> ids_;
};

namespace detail {

inline std::size_t ipow(std::size_t n, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= n;
  return r;
}

// Assigns dense ids in the order of the sorted distinct keys.
inline int assign_ids(const std::vector<std::vector<Key>*>& keys, std::vector<std::vector<int>>& out) {
  std::vector<std::pair<std::size_t, std::size_t>> refs;
  for (std::size_t s = 0; s < keys.size(); ++s)
    for (std::size_t i = 0; i < keys[s]->size(); ++i) refs.push_back({s, i});
  auto key = [&](const std::pair<std::size_t, std::size_t>& r) -> const Key& { return (*keys[r.first])[r.second]; };
  std::sort(refs.begin(), refs.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  out.assign(keys.size(), {});
  for (std::size_t s = 0; s < keys.size(); ++s) out[s].assign(keys[s]->size(), 0);
  int next = -1;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i == 0 || key(refs[i]) != key(refs[i - 1])) ++next;
    out[refs[i].first][refs[i].second] = next;
  }
  return next + 1;
}

inline void decode_tuple(std::size_t idx, std::size_t n, int k, std::vector<int>& t) {
  t.resize(std::size_t(k));
  for (int i = k - 1; i >= 0; --i) {
    t[std::size_t(i)] = int(idx % n);
    idx /= n;
  }
}

// Sorts the fixed-width rows of a flat buffer lexicographically.
inline void sort_rows(std::vector<u64>& flat, std::size_t w) {
  const std::size_t rows = w ? flat.size() / w : 0;
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::lexicographical_compare(flat.begin() + long(x * w), flat.begin() + long(x * w + w),
                                        flat.begin() + long(y * w), flat.begin() + long(y * w + w));
  });
  std::vector<u64> out;
  out.reserve(flat.size());
  for (std::size_t r : order) out.insert(out.end(), flat.begin() + long(r * w), flat.begin() + long(r * w + w));
  flat.swap(out);
}

}  // namespace detail

enum class Method { Ccwl1, Box };

// The joint universe: one or two complexes refined with a shared dictionary.
struct Universe {
  std::vector<const ACC*> accs;
  UnaryTable unary;
  int k = 1;

  Universe(std::vector<const ACC*> a, int arity) : accs(std::move(a)), unary(accs), k(arity) {
    for (const ACC* x : accs)
      if (x->ell() != accs[0]->ell())
        throw Error(ErrorCode::InvalidArgument, "complexes have different attribute widths");
  }
  std::size_t sides() const { return accs.size(); }
  std::size_t n(std::size_t s) const { return std::size_t(accs[s]->size()); }
  std::size_t tuples(std::size_t s) const { return detail::ipow(n(s), k); }
};

// Colors of every tuple of every side at one round; ids are shared across sides.
struct Coloring {
  int k = 1;
  int round = 0;
  std::vector<std::vector<int>> colors;
  int classes = 0;
};

// Code of the part of atp_{k+2}(x alpha beta) that involves alpha and beta.
inline unsigned __int128 context_code(const Universe& U, std::size_t s, const std::vector<int>& x, int alpha,
                                      int beta) {
  const ACC& acc = *U.accs[s];
  unsigned __int128 c = 0;
  c = (c << 16) | unsigned(U.unary.of(s, alpha));
  c = (c << 16) | unsigned(U.unary.of(s, beta));
  for (int xi : x) c = (c << 5) | acc.rel(xi, alpha);
  for (int xi : x) c = (c << 5) | acc.rel(xi, beta);
  c = (c << 5) | acc.rel(alpha, beta);
  return c;
}

inline Key atomic_key(const Universe& U, std::size_t s, const std::vector<int>& x) {
  const ACC& acc = *U.accs[s];
  Key key;
  for (int xi : x) key.push_back(u64(U.unary.of(s, xi)));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) key.push_back(acc.rel(x[i], x[j]));
  return key;
}

inline Coloring initial_coloring(const Universe& U, Method m) {
  std::vector<std::vector<Key>> keys(U.sides());
  std::vector<int> t;
  for (std::size_t s = 0; s < U.sides(); ++s) {
    if (m == Method::Ccwl1) {
      for (std::size_t x = 0; x < U.n(s); ++x) keys[s].push_back({u64(U.unary.of(s, int(x)))});
    } else {
      for (std::size_t idx = 0; idx < U.tuples(s); ++idx) {
        detail::decode_tuple(idx, U.n(s), U.k, t);
        keys[s].push_back(atomic_key(U, s, t));
      }
    }
  }
  std::vector<std::vector<Key>*> ptrs;
  for (auto& k : keys) ptrs.push_back(&k);
  Coloring c;
  c.k = U.k;
  c.classes = detail::assign_ids(ptrs, c.colors);
  return c;
}

inline Key ccwl1_key(const Universe& U, std::size_t s, const std::vector<int>& chi, int x) {
  const ACC& acc = *U.accs[s];
  Key key{u64(chi[std::size_t(x)])};
  for (Nbr kind : {Nbr::B, Nbr::C}) {
    std::vector<u64> cs;
    for (int y : acc.neighbors(x, kind)) cs.push_back(u64(chi[std::size_t(y)]));
    std::sort(cs.begin(), cs.end());
    key.push_back(cs.size());
    key.insert(key.end(), cs.begin(), cs.end());
  }
  for (auto [adj, via] : {std::pair{Nbr::Down, Nbr::B}, std::pair{Nbr::Up, Nbr::C}}) {
    std::vector<u64> ps;
    for (int y : acc.neighbors(x, adj))
      for (int z : acc.neighbors(x, via))
        if (acc.in(z, via, y)) ps.push_back((u64(chi[std::size_t(y)]) << 32) | u64(chi[std::size_t(z)]));
    std::sort(ps.begin(), ps.end());
    key.push_back(ps.size());
    key.insert(key.end(), ps.begin(), ps.end());
  }
  return key;
}

// Refinement contexts of tuple x as sorted rows (code_hi, code_lo, delta...).
inline std::vector<u64> box_contexts(const Universe& U, std::size_t s, const std::vector<int>& chi,
                                     const std::vector<int>& x) {
  const std::size_t n = U.n(s);
  const int k = int(x.size());
  const std::size_t w = 2 + 2 * std::size_t(k);
  std::vector<std::size_t> place(static_cast<std::size_t>(k));
  std::size_t idx = 0;
  for (int i = 0; i < k; ++i) idx = idx * n + std::size_t(x[std::size_t(i)]);
  for (int i = 0; i < k; ++i) place[std::size_t(i)] = detail::ipow(n, k - 1 - i);
  std::vector<u64> flat;
  flat.reserve(n * n * w);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      unsigned __int128 code = context_code(U, s, x, int(a), int(b));
      flat.push_back(u64(code >> 64));
      flat.push_back(u64(code));
      for (int i = 0; i < k; ++i) {
        std::size_t base = idx - std::size_t(x[std::size_t(i)]) * place[std::size_t(i)];
        flat.push_back(u64(chi[base + a * place[std::size_t(i)]]));
        flat.push_back(u64(chi[base + b * place[std::size_t(i)]]));
      }
    }
  detail::sort_rows(flat, w);
  return flat;
}

inline Coloring refine_step(const Universe& U, Method m, const Coloring& prev) {
  std::vector<std::vector<Key>> keys(U.sides());
  std::vector<int> t;
  for (std::size_t s = 0; s < U.sides(); ++s) {
    const auto& chi = prev.colors[s];
    if (m == Method::Ccwl1) {
      for (std::size_t x = 0; x < U.n(s); ++x) keys[s].push_back(ccwl1_key(U, s, chi, int(x)));
    } else {
      for (std::size_t idx = 0; idx < U.tuples(s); ++idx) {
        detail::decode_tuple(idx, U.n(s), U.k, t);
        Key key{u64(chi[idx])};
        auto rows = box_contexts(U, s, chi, t);
        key.insert(key.end(), rows.begin(), rows.end());
        keys[s].push_back(std::move(key));
      }
    }
  }
  std::vector<std::vector<Key>*> ptrs;
  for (auto& k : keys) ptrs.push_back(&k);
  Coloring c;
  c.k = U.k;
  c.round = prev.round + 1;
  c.classes = detail::assign_ids(ptrs, c.colors);
  return c;
}

namespace detail {
inline Universe make_universe(const ACC& a, const ACC* b, int k) {
  std::vector<const ACC*> v{&a};
  if (b) v.push_back(b);
  return Universe(v, k);
}
inline void check_cover(const Universe& U, const Coloring& c) {
  if (c.colors.size() != U.sides()) throw Error(ErrorCode::InvalidArgument, "coloring does not cover the complexes");
  for (std::size_t s = 0; s < U.sides(); ++s)
    if (c.colors[s].size() != U.tuples(s)) throw Error(ErrorCode::InvalidArgument, "coloring size mismatch");
}
}  // namespace detail

// One 1-CCWL round over one or two complexes.
inline Coloring ccwl_step(const ACC& a, const ACC* b, const Coloring& coloring) {
  if (coloring.k != 1) throw Error(ErrorCode::InvalidArgument, "ccwl_step needs k = 1");
  Universe U = detail::make_universe(a, b, 1);
  detail::check_cover(U, coloring);
  return refine_step(U, Method::Ccwl1, coloring);
}

// One k-CCWL round (k >= 2).
inline Coloring kccwl_step(const ACC& a, const ACC* b, const Coloring& coloring) {
  if (coloring.k < 2) throw Error(ErrorCode::InvalidArgument, "kccwl_step needs k >= 2; use ccwl_step for k = 1");
  Universe U = detail::make_universe(a, b, coloring.k);
  detail::check_cover(U, coloring);
  return refine_step(U, Method::Box, coloring);
}

using Signature = std::vector<std::pair<int, long long>>;  // (color, multiplicity) sorted by color

inline Signature signature_of(const std::vector<int>& colors) {
  std::map<int, long long> h;
  for (int c : colors) ++h[c];
  return Signature(h.begin(), h.end());
}

enum class Relation { Equal, Disjoint, PartialOverlap };

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Equal: return "Equal";
    case Relation::Disjoint: return "Disjoint";
    case Relation::PartialOverlap: return "PartialOverlap";
  }
  return "?";
}

inline Relation compare_signatures(const Signature& a, const Signature& b) {
  if (a == b) return Relation::Equal;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) return Relation::PartialOverlap;
    if (a[i].first < b[j].first)
      ++i;
    else
      ++j;
  }
  return Relation::Disjoint;
}

struct RefinementTrace {
  int k = 1;
  Method method = Method::Ccwl1;
  std::vector<Coloring> rounds;  // rounds[t] for t = 0..stable_round
  int stable_round = 0;
  bool stable = false;
  std::optional<int> first_divergence;
  std::size_t joint_tuples = 0;
  double seconds = 0;

  bool two_sided() const { return !rounds.empty() && rounds[0].colors.size() == 2; }
  // Colors at round t; rounds past stabilization reuse the stable partition.
  const Coloring& at(int t) const { return rounds[std::size_t(std::min(t, int(rounds.size()) - 1))]; }
  int color(std::size_t side, int t, std::size_t tuple) const { return at(t).colors[side][tuple]; }
  Signature signature(std::size_t side, int t) const { return signature_of(at(t).colors[side]); }
  int last_round() const { return int(rounds.size()) - 1; }
};

struct RefineOptions {
  std::optional<int> max_rounds;
};

// Refines until the joint partition stops changing.
inline RefinementTrace refine_universe(const Universe& U, Method m, const RefineOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  RefinementTrace tr;
  tr.k = U.k;
  tr.method = m;
  for (std::size_t s = 0; s < U.sides(); ++s) tr.joint_tuples += (m == Method::Ccwl1 ? U.n(s) : U.tuples(s));
  tr.rounds.push_back(initial_coloring(U, m));
  for (;;) {
    int t = tr.last_round();
    if (opt.max_rounds && t >= *opt.max_rounds) break;
    Coloring next = refine_step(U, m, tr.rounds.back());
    if (next.classes == tr.rounds.back().classes) {
      tr.stable = true;
      break;
    }
    tr.rounds.push_back(std::move(next));
  }
  tr.stable_round = tr.last_round();
  if (tr.stable && std::size_t(tr.stable_round) + 1 > tr.joint_tuples)
    throw Error(ErrorCode::InvalidState, "stabilization round exceeds the joint tuple bound");
  if (U.sides() == 2)
    for (int t = 0; t <= tr.last_round(); ++t)
      if (tr.signature(0, t) != tr.signature(1, t)) {
        tr.first_divergence = t;
        break;
      }
  tr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return tr;
}

struct PairTrace {
  ACC a, b;  // the complexes actually refined (anchored if requested)
  RefinementTrace trace;
  std::vector<std::string> warnings;
};

inline RefinementTrace refine(const ACC& a, const ACC* b, int k, const RefineOptions& opt = {}) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  Universe U = detail::make_universe(a, b, k);
  return refine_universe(U, k == 1 ? Method::Ccwl1 : Method::Box, opt);
}

// Joint refinement of a pair, optionally after anchoring both complexes.
inline PairTrace refine_to_stable(const ACC& a, const ACC& b, int k, bool use_anchor, const RefineOptions& opt = {}) {
  PairTrace p{a, b, {}, {}};
  if (use_anchor) {
    for (ACC* x : {&p.a, &p.b}) {
      const char* name = x == &p.a ? "A" : "B";
      if (auto u = is_uniform(*x); !u.uniform)
        p.warnings.push_back(std::string("complex ") + name + " is not uniform (cell " + std::to_string(*u.witness) +
                             " has no base path)");
      if (x->anchor_vertex())
        p.warnings.push_back(std::string("complex ") + name + " is already anchored");
      else
        *x = add_anchor(*x);
    }
  }
  p.trace = refine(p.a, &p.b, k, opt);
  return p;
}

// Relation of the stable signatures; nullopt if the run did not stabilize.
inline std::optional<Relation> signature_relation(const RefinementTrace& tr) {
  if (!tr.stable || !tr.two_sided()) return std::nullopt;
  return compare_signatures(tr.signature(0, tr.stable_round), tr.signature(1, tr.stable_round));
}

enum class Verdict { Equal, Disjoint, PartialOverlap, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Equal: return "Equal";
    case Verdict::Disjoint: return "Disjoint";
    case Verdict::PartialOverlap: return "PartialOverlap";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

inline Verdict verdict_of(const RefinementTrace& tr) {
  auto r = signature_relation(tr);
  if (!r) return Verdict::Inconclusive;
  switch (*r) {
    case Relation::Equal: return Verdict::Equal;
    case Relation::Disjoint: return Verdict::Disjoint;
    case Relation::PartialOverlap: return Verdict::PartialOverlap;
  }
  return Verdict::Inconclusive;
}

// Stable signatures differ (the pair is distinguished).
inline bool distinguished(const RefinementTrace& tr) {
  return tr.two_sided() && tr.signature(0, tr.stable_round) != tr.signature(1, tr.stable_round);
}

// Termination bound: T <= joint tuple count - 1.
inline bool within_termination_bound(const RefinementTrace& tr) {
  return std::size_t(tr.stable_round) + 1 <= tr.joint_tuples;
}

}  // namespace ccwl
