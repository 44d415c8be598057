#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "ccwl/formula.hpp"
#include "ccwl/refinement.hpp"

namespace ccwl {

struct SynthesisOptions {
  bool verify_characterizers = false;  // exhaustively check every characterizer on both complexes
};

// Builds separating formulas from a joint refinement trace.
// Characterizers psi(t, C) hold exactly at the tuples of color C at round t (both complexes).
class Synthesizer {
 public:
  Synthesizer(std::vector<const ACC*> accs, const RefinementTrace& tr, SynthesisOptions opt = {},
              std::shared_ptr<FormulaStore> store = nullptr)
      : U_(std::move(accs), tr.k), tr_(tr), opt_(opt), st_(store ? store : std::make_shared<FormulaStore>()) {
    if (tr.rounds.empty() || tr.rounds[0].colors.size() != U_.sides())
      throw Error(ErrorCode::InvalidArgument, "trace does not match the complexes");
    for (std::size_t s = 0; s < U_.sides(); ++s) {
      rho_ = std::max(rho_, U_.accs[s]->rho());
      evals_.emplace_back(*U_.accs[s], st_);
    }
    nvars_ = tr.k + 2;
  }

  const std::shared_ptr<FormulaStore>& store() const { return st_; }
  int vars() const { return nvars_; }

  int characterizer(int t, int color) {
    t = std::min(t, tr_.last_round());
    auto key = std::make_pair(t, color);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    int id = build_characterizer(t, color);
    memo_[key] = id;
    if (opt_.verify_characterizers) verify_characterizer(t, color, id);
    return id;
  }

  // Formula true at (side sa, tuple ua) and false at (side sb, tuple ub); depth <= first differing round.
  Formula separate_tuples(std::size_t sa, const std::vector<int>& ua, std::size_t sb, const std::vector<int>& ub) {
    const std::size_t ia = tuple_index(sa, ua), ib = tuple_index(sb, ub);
    std::optional<int> first;
    for (int t = 0; t <= tr_.last_round(); ++t)
      if (tr_.color(sa, t, ia) != tr_.color(sb, t, ib)) {
        first = t;
        break;
      }
    if (!first) throw Error(ErrorCode::NoSeparator, "the tuples have equal stable colors");
    int root;
    if (*first == 0) {
      root = initial_formula(sa, ia);
    } else {
      root = delta(*first, tr_.color(sa, *first, ia), tr_.color(sb, *first, ib));
    }
    Formula f{st_, root, nvars_};
    std::vector<int> ma = valuation(sa, ia), mb = valuation(sb, ib);
    if (!evals_[sa].eval(root, ma) || evals_[sb].eval(root, mb))
      throw Error(ErrorCode::InvalidState, "synthesized separator failed verification");
    return f;
  }

  // Sentence true on complex 0 and false on complex 1 (k <= 2).
  Formula separate_complexes() {
    if (U_.sides() != 2) throw Error(ErrorCode::InvalidArgument, "need two complexes");
    if (U_.k > 2) throw Error(ErrorCode::InvalidArgument, "sentence synthesis supports k <= 2");
    if (!tr_.first_divergence) throw Error(ErrorCode::NoSeparator, "stable signatures are equal");
    const int t = *tr_.first_divergence;
    auto sa = tr_.signature(0, t), sb = tr_.signature(1, t);
    std::map<int, long long> ca(sa.begin(), sa.end()), cb(sb.begin(), sb.end());
    std::set<int> all;
    for (auto& [c, m] : ca) all.insert(c);
    for (auto& [c, m] : cb) all.insert(c);
    int color = -1;
    for (int c : all)
      if (ca[c] != cb[c]) {
        color = c;
        break;
      }
    int psi = characterizer(t, color);
    int body = U_.k == 1 ? st_->conj(st_->eq(0, 1), psi) : psi;
    int root = ca[color] > cb[color] ? st_->exists(ca[color], 0, 1, body) : st_->neg(st_->exists(cb[color], 0, 1, body));
    std::vector<int> mu(std::size_t(nvars_), -1);
    if (!evals_[0].eval(root, mu) || evals_[1].eval(root, mu))
      throw Error(ErrorCode::InvalidState, "synthesized sentence failed verification");
    return {st_, root, nvars_};
  }

  bool holds(std::size_t side, int root, std::vector<int> mu) {
    mu.resize(std::size_t(nvars_), -1);
    return evals_[side].eval(root, mu);
  }

  std::size_t tuple_index(std::size_t s, const std::vector<int>& u) const {
    if (int(u.size()) != U_.k) throw Error(ErrorCode::InvalidArgument, "tuple arity differs from k");
    std::size_t idx = 0;
    for (int x : u) {
      if (x < 0 || std::size_t(x) >= U_.n(s)) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
      idx = idx * U_.n(s) + std::size_t(x);
    }
    return idx;
  }

 private:
  std::vector<int> valuation(std::size_t s, std::size_t idx) const {
    std::vector<int> t;
    detail::decode_tuple(idx, U_.n(s), U_.k, t);
    t.resize(std::size_t(nvars_), -1);
    return t;
  }

  std::pair<std::size_t, std::size_t> representative(int t, int color) {
    auto& reps = reps_[t];
    if (reps.empty()) {
      const Coloring& c = tr_.at(t);
      reps.assign(std::size_t(c.classes), {std::size_t(-1), 0});
      for (std::size_t s = 0; s < U_.sides(); ++s)
        for (std::size_t i = 0; i < c.colors[s].size(); ++i) {
          auto& r = reps[std::size_t(c.colors[s][i])];
          if (r.first == std::size_t(-1)) r = {s, i};
        }
    }
    return reps.at(std::size_t(color));
  }

  int initial_formula(std::size_t s, std::size_t idx) {
    std::vector<int> t;
    detail::decode_tuple(idx, U_.n(s), U_.k, t);
    return atomic_type_node(*st_, atomic_type(*U_.accs[s], t), rho_);
  }

  int build_characterizer(int t, int color) {
    auto [s, idx] = representative(t, color);
    if (t == 0) return initial_formula(s, idx);
    const int prev = tr_.color(s, t - 1, idx);
    std::vector<int> parts{characterizer(t - 1, prev)};
    const Coloring& cur = tr_.at(t);
    std::set<int> siblings;
    for (std::size_t side = 0; side < U_.sides(); ++side)
      for (std::size_t i = 0; i < cur.colors[side].size(); ++i)
        if (cur.colors[side][i] != color && tr_.color(side, t - 1, i) == prev) siblings.insert(cur.colors[side][i]);
    for (int other : siblings) parts.push_back(delta(t, color, other));
    return st_->conj_all(parts);
  }

  // Formula with free variables in x1..xk, true on color c and false on color d (same color at t-1).
  int delta(int t, int c, int d) {
    auto [sc, ic] = representative(t, c);
    auto [sd, id] = representative(t, d);
    return U_.k == 1 || tr_.method == Method::Ccwl1 ? delta_ccwl1(t, sc, ic, sd, id) : delta_box(t, sc, ic, sd, id);
  }

  using RowKey = std::vector<u64>;

  std::map<RowKey, long long> box_rows(int t, std::size_t s, std::size_t idx) const {
    std::vector<int> x;
    detail::decode_tuple(idx, U_.n(s), U_.k, x);
    auto flat = box_contexts(U_, s, tr_.at(t - 1).colors[s], x);
    const std::size_t w = 2 + 2 * std::size_t(U_.k);
    std::map<RowKey, long long> m;
    for (std::size_t r = 0; r + w <= flat.size(); r += w) ++m[RowKey(flat.begin() + long(r), flat.begin() + long(r + w))];
    return m;
  }

  int delta_box(int t, std::size_t sc, std::size_t ic, std::size_t sd, std::size_t id) {
    const int k = U_.k;
    auto rc = box_rows(t, sc, ic), rd = box_rows(t, sd, id);
    std::set<RowKey> keys;
    for (auto& [r, m] : rc) keys.insert(r);
    for (auto& [r, m] : rd) keys.insert(r);
    for (const RowKey& K : keys) {
      const long long mc = rc.count(K) ? rc[K] : 0, md = rd.count(K) ? rd[K] : 0;
      if (mc == md) continue;
      // A witness (alpha, beta) of row K gives the atomic type of the extended tuple.
      const std::size_t ws = mc > 0 ? sc : sd, wi = mc > 0 ? ic : id;
      std::vector<int> x;
      detail::decode_tuple(wi, U_.n(ws), k, x);
      std::vector<int> ext = find_extension(ws, x, K);
      std::vector<int> parts{atomic_type_node(*st_, atomic_type(*U_.accs[ws], ext), rho_)};
      for (int i = 0; i < k; ++i) {
        int ca = int(K[2 + 2 * std::size_t(i)]), cb = int(K[3 + 2 * std::size_t(i)]);
        parts.push_back(st_->swap_vars(characterizer(t - 1, ca), i, k, nvars_));
        parts.push_back(st_->swap_vars(characterizer(t - 1, cb), i, k + 1, nvars_));
      }
      int theta = st_->conj_all(parts);
      if (mc > md) return st_->exists(mc, k, k + 1, theta);
      return st_->neg(st_->exists(md, k, k + 1, theta));
    }
    throw Error(ErrorCode::InvalidState, "colors differ but contexts agree");
  }

  std::vector<int> find_extension(std::size_t s, const std::vector<int>& x, const RowKey& K) const {
    const std::size_t n = U_.n(s);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        unsigned __int128 code = context_code(U_, s, x, int(a), int(b));
        if (u64(code >> 64) == K[0] && u64(code) == K[1]) {
          std::vector<int> ext = x;
          ext.push_back(int(a));
          ext.push_back(int(b));
          return ext;
        }
      }
    throw Error(ErrorCode::InvalidState, "no extension realizes the context");
  }

  std::map<RowKey, long long> ccwl1_rows(int t, std::size_t s, int x) const {
    const ACC& acc = *U_.accs[s];
    const auto& chi = tr_.at(t - 1).colors[s];
    std::map<RowKey, long long> m;
    for (int y : acc.neighbors(x, Nbr::B)) ++m[{0, u64(chi[std::size_t(y)])}];
    for (int y : acc.neighbors(x, Nbr::C)) ++m[{1, u64(chi[std::size_t(y)])}];
    for (int y : acc.neighbors(x, Nbr::Down))
      for (int z : acc.neighbors(x, Nbr::B))
        if (acc.in(z, Nbr::B, y)) ++m[{2, u64(chi[std::size_t(y)]), u64(chi[std::size_t(z)])}];
    for (int y : acc.neighbors(x, Nbr::Up))
      for (int z : acc.neighbors(x, Nbr::C))
        if (acc.in(z, Nbr::C, y)) ++m[{3, u64(chi[std::size_t(y)]), u64(chi[std::size_t(z)])}];
    return m;
  }

  // Guarded shapes only, so the result stays in the guarded fragment.
  int delta_ccwl1(int t, std::size_t sc, std::size_t ic, std::size_t sd, std::size_t id) {
    auto rc = ccwl1_rows(t, sc, int(ic)), rd = ccwl1_rows(t, sd, int(id));
    std::set<RowKey> keys;
    for (auto& [r, m] : rc) keys.insert(r);
    for (auto& [r, m] : rd) keys.insert(r);
    for (const RowKey& K : keys) {
      const long long mc = rc.count(K) ? rc[K] : 0, md = rd.count(K) ? rd[K] : 0;
      if (mc == md) continue;
      int theta;
      auto psi_at = [&](u64 color, int var) { return st_->swap_vars(characterizer(t - 1, int(color)), 0, var, nvars_); };
      if (K[0] <= 1) {
        Nbr rel = K[0] == 0 ? Nbr::B : Nbr::C;
        theta = st_->conj_all({st_->eq(1, 2), st_->adj(rel, 0, 1), psi_at(K[1], 1)});
      } else {
        Nbr adj = K[0] == 2 ? Nbr::Down : Nbr::Up;
        Nbr via = K[0] == 2 ? Nbr::B : Nbr::C;
        theta = st_->conj_all(
            {st_->adj(adj, 0, 1), st_->adj(via, 0, 2), st_->adj(via, 1, 2), psi_at(K[1], 1), psi_at(K[2], 2)});
      }
      if (mc > md) return st_->exists(mc, 1, 2, theta);
      return st_->neg(st_->exists(md, 1, 2, theta));
    }
    throw Error(ErrorCode::InvalidState, "colors differ but neighborhoods agree");
  }

  void verify_characterizer(int t, int color, int id) {
    const Coloring& c = tr_.at(t);
    for (std::size_t s = 0; s < U_.sides(); ++s)
      for (std::size_t i = 0; i < c.colors[s].size(); ++i) {
        std::vector<int> mu = valuation(s, i);
        if (evals_[s].eval(id, mu) != (c.colors[s][i] == color))
          throw Error(ErrorCode::InvalidState, "characterizer of color " + std::to_string(color) + " at round " +
                                                   std::to_string(t) + " is wrong");
      }
  }

  Universe U_;
  const RefinementTrace& tr_;
  SynthesisOptions opt_;
  std::shared_ptr<FormulaStore> st_;
  std::vector<Evaluator> evals_;
  int rho_ = 0;
  int nvars_ = 3;
  std::map<std::pair<int, int>, int> memo_;
  std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> reps_;
};

// Tuple separator in a two-complex trace: true at (A, ua), false at (B, ub).
inline Formula synthesize_separating_formula(const ACC& a, const ACC& b, const RefinementTrace& tr,
                                             const std::vector<int>& ua, const std::vector<int>& ub,
                                             SynthesisOptions opt = {}) {
  Synthesizer syn({&a, &b}, tr, opt);
  return syn.separate_tuples(0, ua, 1, ub);
}

}  // namespace ccwl
