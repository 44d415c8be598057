#pragma once

#include <algorithm>
#include <bit>
#include <functional>
#include <set>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ccwl/atomic_type.hpp"
#include "ccwl/formula.hpp"
#include "ccwl/game.hpp"

namespace ccwl {

// ---- isomorphism ----

struct IsoOptions {
  bool strict = false;     // require equal rank and attribute instead of color-class preservation
  std::size_t cap = 10;    // max cells per side
};

// Backtracking search for a bijection preserving all four neighborhoods in both directions.
// Default mode: equal colors map to equal colors. Strict mode: rank and attribute are kept.
inline std::optional<std::vector<int>> cc_isomorphism(const ACC& a, const ACC& b, IsoOptions opt = {}) {
  if (std::size_t(a.size()) > opt.cap || std::size_t(b.size()) > opt.cap)
    throw Error(ErrorCode::SizeLimit, "isomorphism oracle is capped at " + std::to_string(opt.cap) + " cells");
  const int n = a.size();
  if (n != b.size()) return std::nullopt;
  std::vector<int> f(std::size_t(n), -1);
  std::vector<char> used(std::size_t(n), 0);
  std::map<std::string, std::string> color_map;
  std::map<std::string, int> color_uses;

  std::function<bool(int)> go = [&](int x) -> bool {
    if (x == n) return true;
    const Cell& cx = a.cell(x);
    for (int y = 0; y < n; ++y) {
      if (used[std::size_t(y)]) continue;
      const Cell& cy = b.cell(y);
      if (opt.strict && (cx.rank != cy.rank || cx.attr != cy.attr)) continue;
      auto it = color_map.find(cx.attr);
      if (!opt.strict && it != color_map.end() && it->second != cy.attr) continue;
      bool ok = true;
      for (int p = 0; p < x && ok; ++p) {
        const int q = f[std::size_t(p)];
        ok = (a.rel(x, p) & ~kRelEq) == (b.rel(y, q) & ~kRelEq) && (a.rel(p, x) & ~kRelEq) == (b.rel(q, y) & ~kRelEq);
      }
      if (!ok) continue;
      f[std::size_t(x)] = y;
      used[std::size_t(y)] = 1;
      color_map[cx.attr] = cy.attr;
      ++color_uses[cx.attr];
      if (go(x + 1)) return true;
      if (--color_uses[cx.attr] == 0) color_map.erase(cx.attr);
      used[std::size_t(y)] = 0;
    }
    f[std::size_t(x)] = -1;
    return false;
  };
  if (go(0)) return f;
  return std::nullopt;
}

inline bool cc_isomorphic_bruteforce(const ACC& a, const ACC& b, IsoOptions opt = {}) {
  return cc_isomorphism(a, b, opt).has_value();
}

// ---- bounded-depth logic ----

struct LogicOptions {
  int k = 2;                 // logic has k + 2 variables
  int depth = 2;
  std::size_t cap = 5;       // max cells per side
  int max_depth = 2;
  bool guarded = false;      // k = 1 only: quantify over guarded pairs, as in the guarded fragment
};

struct LogicResult {
  bool equivalent = true;
  std::optional<Formula> distinguisher;  // true on (A, uA), false on (B, uB)
};

namespace detail {

// Types of partial valuations by exact pair counts, depth by depth. Equal types at depth d
// mean agreement on every formula of quantifier depth <= d whose free variables are in the domain.
class LogicTypes {
 public:
  LogicTypes(const ACC& a, const ACC& b, int m, bool guarded = false) : m_(m), guarded_(guarded), unary_({&a, &b}) {
    acc_[0] = &a;
    acc_[1] = &b;
    rho_ = 0;
    for (const ACC* x : acc_)
      for (const Cell& c : x->cells()) rho_ = std::max(rho_, c.rank);
  }

  using State = std::vector<int>;  // -1 = unset

  int type(int d, int s, const State& mu) {
    auto& memo = memo_[std::size_t(d)][std::size_t(s)];
    const std::uint64_t code = encode(s, mu);
    if (auto it = memo.find(code); it != memo.end()) return it->second;
    Key key = d == 0 ? atomic(s, mu) : refined(d, s, mu);
    auto& dict = dict_[std::size_t(d)];
    auto [it, fresh] = dict.emplace(key, int(dict.size()));
    if (fresh) rep_[std::size_t(d)].push_back({s, mu});
    memo.emplace(code, it->second);
    return it->second;
  }

  void ensure_depth(int d) {
    if (int(memo_.size()) <= d) {
      memo_.resize(std::size_t(d) + 1, std::vector<std::unordered_map<std::uint64_t, int>>(2));
      dict_.resize(std::size_t(d) + 1);
      rep_.resize(std::size_t(d) + 1);
    }
  }

  // Quantifiable pairs: all of them, or in guarded mode those guarded by the third variable
  // (diagonal pairs for sentences).
  bool pair_allowed(const State& mu, int i, int j) const {
    if (!guarded_) return true;
    const int l = 3 - i - j;
    return mu[std::size_t(l)] >= 0 || domain(mu) == 0;
  }

  // Counts of depth-(d-1) types over all placements of (i, j).
  std::map<int, long long> counts(int d, int s, const State& mu, int i, int j) {
    std::map<int, long long> c;
    State nu = mu;
    const int l = 3 - i - j;
    for (int x = 0; x < acc_[s]->size(); ++x)
      for (int y = 0; y < acc_[s]->size(); ++y) {
        if (guarded_) {
          if (mu[std::size_t(l)] >= 0 ? guard_shape(*acc_[s], mu[std::size_t(l)], x, y) < 0 : x != y) continue;
        }
        nu[std::size_t(i)] = x;
        nu[std::size_t(j)] = y;
        ++c[type(d - 1, s, nu)];
      }
    return c;
  }

  // Formula true exactly on valuations of the given depth-d type (same domain, either side).
  int characterizer(FormulaStore& st, int d, int t) {
    auto key = std::make_pair(d, t);
    if (auto it = chars_.find(key); it != chars_.end()) return it->second;
    auto [s, mu] = rep_[std::size_t(d)][std::size_t(t)];
    int out;
    if (d == 0) {
      out = atomic_formula(st, s, mu);
    } else {
      enumerate_domain(d, domain(mu));
      const int prev = type(d - 1, s, mu);
      std::vector<int> parts{characterizer(st, d - 1, prev)};
      // every other depth-d type sharing the domain and the depth-(d-1) type
      for (std::size_t u = 0; u < rep_[std::size_t(d)].size(); ++u) {
        if (int(u) == t) continue;
        auto [s2, mu2] = rep_[std::size_t(d)][u];
        if (domain(mu2) != domain(mu) || type(d - 1, s2, mu2) != prev) continue;
        parts.push_back(separator(st, d, s, mu, s2, mu2));
      }
      out = st.conj_all(parts);
    }
    chars_[key] = out;
    return out;
  }

  // Depth-d formula true at (sa, ma) and false at (sb, mb); their depth-d types must differ.
  int separator(FormulaStore& st, int d, int sa, const State& ma, int sb, const State& mb) {
    const int pa = type(d - 1, sa, ma), pb = type(d - 1, sb, mb);
    if (pa != pb) return characterizer(st, d - 1, pa);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        if (i == j || !pair_allowed(ma, i, j)) continue;
        auto ca = counts(d, sa, ma, i, j), cb = counts(d, sb, mb, i, j);
        if (ca == cb) continue;
        std::map<int, std::pair<long long, long long>> both;
        for (auto [t, c] : ca) both[t].first = c;
        for (auto [t, c] : cb) both[t].second = c;
        for (auto [t, c] : both) {
          if (c.first == c.second) continue;
          int body = characterizer(st, d - 1, t);
          if (c.first > c.second) return st.exists(c.first, i, j, body);
          return st.neg(st.exists(c.second, i, j, body));
        }
      }
    throw Error(ErrorCode::InvalidState, "types differ but no separating count found");
  }

  static std::uint32_t domain(const State& mu) {
    std::uint32_t d = 0;
    for (std::size_t v = 0; v < mu.size(); ++v)
      if (mu[v] >= 0) d |= std::uint32_t(1) << v;
    return d;
  }

 private:
  // Types every valuation with this domain on both sides, so characterizers see all competitors.
  void enumerate_domain(int d, std::uint32_t dom) {
    if (!enumerated_.insert({d, dom}).second) return;
    std::vector<int> vars;
    for (int v = 0; v < m_; ++v)
      if (dom >> v & 1) vars.push_back(v);
    for (int s = 0; s < 2; ++s) {
      const int n = acc_[s]->size();
      State mu(std::size_t(m_), -1);
      std::function<void(std::size_t)> go = [&](std::size_t q) {
        if (q == vars.size()) {
          type(d, s, mu);
          return;
        }
        for (int x = 0; x < n; ++x) {
          mu[std::size_t(vars[q])] = x;
          go(q + 1);
        }
      };
      go(0);
    }
  }

  std::uint64_t encode(int s, const State& mu) const {
    std::uint64_t code = 0;
    const std::uint64_t base = std::uint64_t(acc_[s]->size()) + 1;
    for (int x : mu) code = code * base + std::uint64_t(x + 1);
    return code;
  }

  Key atomic(int s, const State& mu) const {
    Key key{domain(mu)};
    for (int i = 0; i < m_; ++i) {
      if (mu[std::size_t(i)] < 0) continue;
      key.push_back(u64(unary_.of(std::size_t(s), mu[std::size_t(i)])));
      for (int j = 0; j < m_; ++j)
        if (j != i && mu[std::size_t(j)] >= 0) key.push_back(acc_[s]->rel(mu[std::size_t(i)], mu[std::size_t(j)]));
    }
    return key;
  }

  Key refined(int d, int s, const State& mu) {
    Key key{domain(mu), u64(type(d - 1, s, mu))};
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        if (i == j || !pair_allowed(mu, i, j)) continue;
        auto c = counts(d, s, mu, i, j);
        key.push_back(u64(c.size()));
        for (auto [t, n] : c) {
          key.push_back(u64(t));
          key.push_back(u64(n));
        }
      }
    return key;
  }

  int atomic_formula(FormulaStore& st, int s, const State& mu) {
    std::vector<int> vars, cells;
    for (int v = 0; v < m_; ++v)
      if (mu[std::size_t(v)] >= 0) {
        vars.push_back(v);
        cells.push_back(mu[std::size_t(v)]);
      }
    if (vars.empty()) {
      // always true sentence
      return st.exists(0, 0, 1, st.eq(0, 1));
    }
    AtomicType at = atomic_type(*acc_[s], cells);
    return st.rename(atomic_type_node(st, at, rho_), vars);
  }

  int m_;
  bool guarded_ = false;
  int rho_ = 0;
  const ACC* acc_[2];
  UnaryTable unary_;
  std::vector<std::vector<std::unordered_map<std::uint64_t, int>>> memo_;
  std::vector<std::map<Key, int>> dict_;
  std::vector<std::vector<std::pair<int, State>>> rep_;
  std::map<std::pair<int, int>, int> chars_;
  std::set<std::pair<int, std::uint32_t>> enumerated_;
};

}  // namespace detail

// Decides agreement of (A, uA) and (B, uB) on all formulas with k + 2 variables and quantifier
// depth <= depth (thresholds are exact, so larger ones add nothing). uA, uB bind x1..x|u|.
inline LogicResult bounded_logic_equivalent(const ACC& a, const std::vector<int>& ua, const ACC& b,
                                            const std::vector<int>& ub, const LogicOptions& opt) {
  if (std::size_t(a.size()) > opt.cap || std::size_t(b.size()) > opt.cap)
    throw Error(ErrorCode::SizeLimit, "logic oracle is capped at " + std::to_string(opt.cap) + " cells");
  if (opt.depth < 0 || opt.depth > opt.max_depth)
    throw Error(ErrorCode::SizeLimit, "logic oracle depth must be in 0.." + std::to_string(opt.max_depth));
  if (opt.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (opt.guarded && opt.k != 1) throw Error(ErrorCode::InvalidArgument, "the guarded fragment has k = 1");
  const int m = opt.k + 2;
  if (ua.size() != ub.size() || int(ua.size()) > m) throw Error(ErrorCode::InvalidArgument, "bad initial tuples");
  detail::LogicTypes types(a, b, m, opt.guarded);
  types.ensure_depth(opt.depth);
  std::vector<int> ma(std::size_t(m), -1), mb(std::size_t(m), -1);
  for (std::size_t v = 0; v < ua.size(); ++v) {
    if (ua[v] < 0 || ua[v] >= a.size() || ub[v] < 0 || ub[v] >= b.size())
      throw Error(ErrorCode::InvalidArgument, "cell index out of range");
    ma[v] = ua[v];
    mb[v] = ub[v];
  }
  LogicResult res;
  int d = -1;
  for (int t = 0; t <= opt.depth; ++t)
    if (types.type(t, 0, ma) != types.type(t, 1, mb)) {
      d = t;
      break;
    }
  if (d < 0) return res;
  res.equivalent = false;
  auto st = std::make_shared<FormulaStore>();
  int root = d == 0 ? types.characterizer(*st, 0, types.type(0, 0, ma)) : types.separator(*st, d, 0, ma, 1, mb);
  res.distinguisher = Formula{st, root, m};
  return res;
}

// ---- exhaustive game ----

struct ExhaustiveGameOptions {
  int pebbles = 4;
  int rounds = 2;
  bool free_indices = true;  // Spoiler may pin any two variables; otherwise the committed-base discipline
  StepRules rules = StepRules::AsWritten;
  std::size_t cap = 12;      // max |X|^2 per side
  std::optional<std::pair<std::vector<int>, std::vector<int>>> initial;
};

namespace detail {

// Literal game over full valuations; similarity is checked on every pebble after each round.
class ExhaustiveGame {
 public:
  ExhaustiveGame(const ACC& a, const ACC& b, const ExhaustiveGameOptions& opt) : opt_(opt) {
    acc_[0] = &a;
    acc_[1] = &b;
    for (const ACC* x : acc_) {
      if (std::size_t(x->size()) * std::size_t(x->size()) > opt.cap)
        throw Error(ErrorCode::SizeLimit, "exhaustive game needs |X|^2 <= " + std::to_string(opt.cap));
    }
    if (opt.pebbles < 2) throw Error(ErrorCode::InvalidArgument, "at least two pebbles are needed");
    if (!opt.free_indices && opt.pebbles < 3)
      throw Error(ErrorCode::InvalidArgument, "the committed-base game needs at least three pebbles");
    for (int s = 0; s < 2; ++s)
      for (int x = 0; x < acc_[s]->size(); ++x)
        for (int y = 0; y < acc_[s]->size(); ++y) pairs_[s].push_back({x, y});
  }

  Player value(const std::vector<int>& muA, const std::vector<int>& muB, int rounds) {
    if (!similar_k(*acc_[0], muA, *acc_[1], muB).similar) return Player::I;
    std::vector<int> base;
    if (!opt_.free_indices)
      for (int v = 0; v < opt_.pebbles; ++v)
        if (muA[std::size_t(v)] >= 0) base.push_back(v);
    for (int r = 1; r <= rounds; ++r)
      if (win(muA, muB, base, r)) return Player::I;
    return Player::II;
  }

 private:
  std::uint64_t encode(const std::vector<int>& a, const std::vector<int>& b, const std::vector<int>& base, int r) const {
    std::uint64_t c = std::uint64_t(r);
    for (int x : a) c = c * 8 + std::uint64_t(x + 1);
    for (int x : b) c = c * 8 + std::uint64_t(x + 1);
    std::uint64_t bm = 0;
    for (int v : base) bm |= std::uint64_t(1) << v;
    return c * 64 + bm;
  }

  // Index choices with their base afterwards.
  std::vector<std::pair<std::pair<int, int>, std::vector<std::vector<int>>>> index_moves(const std::vector<int>& base) const {
    std::vector<std::pair<std::pair<int, int>, std::vector<std::vector<int>>>> out;
    const int p = opt_.pebbles;
    if (opt_.free_indices) {
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          if (i != j) out.push_back({{i, j}, {{}}});
      return out;
    }
    const int k = p - 2;
    std::vector<int> fv;
    for (int v = 0; v < p; ++v)
      if (std::find(base.begin(), base.end(), v) == base.end()) fv.push_back(v);
    const int i = fv[0], j = fv[1];
    std::vector<std::vector<int>> nexts;
    if (base.empty()) {
      if (k == 2) nexts.push_back({i, j});
      if (k == 1) {
        nexts.push_back({i});
        nexts.push_back({j});
      }
      if (k > 2) throw Error(ErrorCode::InvalidArgument, "committed-base games without a start need k <= 2");
    } else {
      nexts.push_back(base);
      for (std::size_t s = 0; s < base.size(); ++s)
        for (int w : {i, j}) {
          auto nb = base;
          nb[s] = w;
          std::sort(nb.begin(), nb.end());
          nexts.push_back(nb);
        }
    }
    out.push_back({{i, j}, nexts});
    return out;
  }

  bool win(const std::vector<int>& muA, const std::vector<int>& muB, const std::vector<int>& base, int r) {
    if (r <= 0) return false;
    const std::uint64_t code = encode(muA, muB, base, r);
    if (auto it = memo_.find(code); it != memo_.end()) return it->second;
    bool result = win(muA, muB, base, r - 1);
    const std::vector<int>* mu[2] = {&muA, &muB};
    const auto moves = index_moves(base);
    for (int S = 0; S < 2 && !result; ++S) {
      const int T = 1 - S;
      const auto& PS = pairs_[S];
      const auto& PT = pairs_[T];
      // ok[(move, t)] = mask of S pairs that Duplicator may answer with and survive
      std::vector<std::vector<std::uint32_t>> ok(moves.size(), std::vector<std::uint32_t>(PT.size(), 0));
      for (std::size_t mi = 0; mi < moves.size(); ++mi) {
        auto [i, j] = moves[mi].first;
        for (std::size_t t = 0; t < PT.size(); ++t)
          for (std::size_t p = 0; p < PS.size(); ++p) {
            std::vector<int> nS = *mu[S], nT = *mu[T];
            nS[std::size_t(i)] = PS[p].first;
            nS[std::size_t(j)] = PS[p].second;
            nT[std::size_t(i)] = PT[t].first;
            nT[std::size_t(j)] = PT[t].second;
            const auto& nA = S == 0 ? nS : nT;
            const auto& nB = S == 0 ? nT : nS;
            if (!similar_k(*acc_[0], nA, *acc_[1], nB).similar) continue;
            bool survives = true;
            for (const auto& nb : moves[mi].second)
              if (win(nA, nB, nb, r - 1)) {
                survives = false;
                break;
              }
            if (survives) ok[mi][t] |= std::uint32_t(1) << p;
          }
      }
      const std::uint32_t all = PS.size() >= 32 ? ~std::uint32_t(0) : (std::uint32_t(1) << PS.size()) - 1;
      auto count_safe = [&](std::uint32_t allowed) {
        std::size_t n = 0;
        for (std::size_t t = 0; t < PT.size(); ++t) {
          bool safe = true;
          for (std::size_t mi = 0; mi < moves.size() && safe; ++mi) safe = (ok[mi][t] & allowed) != 0;
          if (safe) ++n;
        }
        return n;
      };
      if (opt_.rules == StepRules::AsWritten) {
        // Duplicator may answer anywhere in the square, so only |P_S| matters
        result = count_safe(all) < PS.size();
      } else {
        for (std::uint32_t set = 1; set <= all && !result; ++set)
          if (count_safe(set) < std::size_t(std::popcount(set))) result = true;
      }
    }
    memo_[code] = result;
    return result;
  }

  ExhaustiveGameOptions opt_;
  const ACC* acc_[2];
  std::vector<CellPair> pairs_[2];
  std::unordered_map<std::uint64_t, bool> memo_;
};

}  // namespace detail

// Reference game value by enumerating every pair set.
inline Player exhaustive_game_value(const ACC& a, const ACC& b, const ExhaustiveGameOptions& opt) {
  detail::ExhaustiveGame g(a, b, opt);
  std::vector<int> muA(std::size_t(opt.pebbles), -1), muB(std::size_t(opt.pebbles), -1);
  if (opt.initial) {
    const auto& [ua, ub] = *opt.initial;
    if (ua.size() != ub.size() || int(ua.size()) > opt.pebbles - 2)
      throw Error(ErrorCode::InvalidArgument, "bad initial tuples");
    for (std::size_t v = 0; v < ua.size(); ++v) {
      muA[v] = ua[v];
      muB[v] = ub[v];
    }
  }
  return g.value(muA, muB, opt.rounds);
}

}  // namespace ccwl
