#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccwl/io.hpp"
#include "ccwl/refinement.hpp"

namespace ccwl {

using CellPair = std::pair<int, int>;

// ---- structural similarity ----

struct SimilarityResult {
  bool similar = true;
  int condition = 0;  // 1 equality, 2 rank, 3 color, 4 neighborhood
  std::string detail;
};

// Checks the four similarity conditions on the common domain; mu[v] = -1 means unset.
inline SimilarityResult similar_k(const ACC& a, const std::vector<int>& muA, const ACC& b, const std::vector<int>& muB) {
  if (muA.size() != muB.size()) throw Error(ErrorCode::InvalidArgument, "valuations have different lengths");
  std::vector<int> dom;
  for (std::size_t v = 0; v < muA.size(); ++v) {
    if ((muA[v] < 0) != (muB[v] < 0)) throw Error(ErrorCode::InvalidArgument, "valuation domains differ");
    if (muA[v] >= a.size() || muB[v] >= b.size()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
    if (muA[v] >= 0) dom.push_back(int(v));
  }
  auto var = [](int v) { return "x" + std::to_string(v + 1); };
  for (int v : dom) {
    const Cell& ca = a.cell(muA[std::size_t(v)]);
    const Cell& cb = b.cell(muB[std::size_t(v)]);
    if (ca.rank != cb.rank) return {false, 2, "rank of " + var(v)};
    if (ca.attr != cb.attr) return {false, 3, "color of " + var(v)};
  }
  for (int i : dom)
    for (int j : dom) {
      if (i == j) continue;
      const int ai = muA[std::size_t(i)], aj = muA[std::size_t(j)];
      const int bi = muB[std::size_t(i)], bj = muB[std::size_t(j)];
      if ((ai == aj) != (bi == bj)) return {false, 1, "equality of " + var(i) + " and " + var(j)};
      for (Nbr kind : kAllNbr)
        if (a.in(ai, kind, aj) != b.in(bi, kind, bj))
          return {false, 4, std::string(nbr_name(kind)) + " relation of " + var(i) + " and " + var(j)};
    }
  return {};
}

// ---- guards ----

// Shape of a guarded pair (y, z) relative to the anchor x; -1 if not guarded.
// 0: y = z in N_B(x); 1: y = z in N_C(x); 2: y in N_down(x), z in N_B(x) and N_B(y); 3: the upper analog.
inline int guard_shape(const ACC& acc, int x, int y, int z) {
  if (y == z) {
    if (acc.in(y, Nbr::B, x)) return 0;
    if (acc.in(y, Nbr::C, x)) return 1;
    return -1;
  }
  if (acc.in(y, Nbr::Down, x) && acc.in(z, Nbr::B, x) && acc.in(z, Nbr::B, y)) return 2;
  if (acc.in(y, Nbr::Up, x) && acc.in(z, Nbr::C, x) && acc.in(z, Nbr::C, y)) return 3;
  return -1;
}

inline std::vector<CellPair> guarded_pairs(const ACC& acc, int x) {
  std::vector<CellPair> out;
  for (int y = 0; y < acc.size(); ++y)
    for (int z = 0; z < acc.size(); ++z)
      if (guard_shape(acc, x, y, z) >= 0) out.push_back({y, z});
  return out;
}

// ---- traces ----

enum class Player { I, II };
enum class SolverMode { Canonical, Exhaustive };
enum class StepRules { Restricted, AsWritten };

inline const char* player_name(Player p) { return p == Player::I ? "PlayerI" : "PlayerII"; }
inline const char* mode_name(SolverMode m) { return m == SolverMode::Canonical ? "canonical" : "exhaustive"; }
inline const char* rules_name(StepRules r) { return r == StepRules::Restricted ? "restricted" : "as-written"; }

struct MoveRecord {
  int side = 0;  // complex of the chooser's set: 0 = A, 1 = B
  std::vector<CellPair> pair_set;
  std::vector<CellPair> responder_set;
  CellPair spoiler_pick{-1, -1};
  CellPair duplicator_pick{-1, -1};
  int i = 1, j = 2;            // pebbled variables, 1-based
  std::vector<int> base;       // variables kept as the base before the move
  std::vector<int> base_after; // base chosen after the move
  bool stuck = false;          // the responder had no legal reply
};

struct GameSetup {
  int k = 2;  // base arity; pebbles = k + 2
  bool guarded = false;
  StepRules rules = StepRules::Restricted;
  std::optional<std::pair<std::vector<int>, std::vector<int>>> initial;
};

struct StrategyResult {
  Player winner = Player::II;
  int rounds_checked = 0;
  std::optional<int> win_round;
  std::vector<MoveRecord> trace;
  SolverMode mode = SolverMode::Canonical;
  GameSetup setup;
};

inline json pairs_to_json(const std::vector<CellPair>& ps) {
  json a = json::array();
  for (auto [x, y] : ps) a.push_back({x, y});
  return a;
}

inline std::vector<CellPair> pairs_from_json(const json& j) {
  std::vector<CellPair> out;
  for (const auto& p : j) out.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  return out;
}

inline json trace_to_json(const StrategyResult& r, const std::string& hash_a, const std::string& hash_b) {
  json j;
  j["version"] = 1;
  j["kind"] = "ccwl-game-trace";
  j["inputs"] = {{"a", hash_a}, {"b", hash_b}};
  j["pebbles"] = r.setup.k + 2;
  j["k"] = r.setup.k;
  j["guarded"] = r.setup.guarded;
  j["rules"] = rules_name(r.setup.rules);
  j["mode"] = mode_name(r.mode);
  if (r.setup.initial) j["initial"] = {{"a", r.setup.initial->first}, {"b", r.setup.initial->second}};
  j["winner"] = player_name(r.winner);
  j["rounds_checked"] = r.rounds_checked;
  if (r.win_round) j["win_round"] = *r.win_round;
  json moves = json::array();
  for (const MoveRecord& m : r.trace) {
    json mj;
    mj["side"] = m.side == 0 ? "A" : "B";
    mj["pair_set"] = pairs_to_json(m.pair_set);
    mj["responder_set"] = pairs_to_json(m.responder_set);
    if (m.stuck) {
      mj["stuck"] = true;
    } else {
      mj["spoiler_pick"] = {m.spoiler_pick.first, m.spoiler_pick.second};
      mj["duplicator_pick"] = {m.duplicator_pick.first, m.duplicator_pick.second};
      mj["indices"] = {m.i, m.j};
      mj["base"] = m.base;
      mj["base_after"] = m.base_after;
    }
    moves.push_back(mj);
  }
  j["moves"] = moves;
  return j;
}

struct TraceDocument {
  StrategyResult result;
  std::string hash_a, hash_b;
};

inline TraceDocument trace_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("version", 0) != 1 || j.value("kind", "") != "ccwl-game-trace")
      throw Error(ErrorCode::Validation, "not a version 1 game trace");
    TraceDocument d;
    d.hash_a = j.at("inputs").at("a").get<std::string>();
    d.hash_b = j.at("inputs").at("b").get<std::string>();
    StrategyResult& r = d.result;
    r.setup.k = j.at("k").get<int>();
    r.setup.guarded = j.at("guarded").get<bool>();
    r.setup.rules = j.at("rules").get<std::string>() == "as-written" ? StepRules::AsWritten : StepRules::Restricted;
    r.mode = j.at("mode").get<std::string>() == "exhaustive" ? SolverMode::Exhaustive : SolverMode::Canonical;
    if (j.contains("initial"))
      r.setup.initial = std::make_pair(j["initial"].at("a").get<std::vector<int>>(), j["initial"].at("b").get<std::vector<int>>());
    r.winner = j.at("winner").get<std::string>() == "PlayerI" ? Player::I : Player::II;
    r.rounds_checked = j.value("rounds_checked", 0);
    if (j.contains("win_round")) r.win_round = j["win_round"].get<int>();
    for (const auto& mj : j.at("moves")) {
      MoveRecord m;
      m.side = mj.at("side").get<std::string>() == "B" ? 1 : 0;
      m.pair_set = pairs_from_json(mj.at("pair_set"));
      m.responder_set = pairs_from_json(mj.at("responder_set"));
      m.stuck = mj.value("stuck", false);
      if (!m.stuck) {
        m.spoiler_pick = {mj.at("spoiler_pick").at(0).get<int>(), mj.at("spoiler_pick").at(1).get<int>()};
        m.duplicator_pick = {mj.at("duplicator_pick").at(0).get<int>(), mj.at("duplicator_pick").at(1).get<int>()};
        m.i = mj.at("indices").at(0).get<int>();
        m.j = mj.at("indices").at(1).get<int>();
        m.base = mj.at("base").get<std::vector<int>>();
        m.base_after = mj.at("base_after").get<std::vector<int>>();
      }
      r.trace.push_back(std::move(m));
    }
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("malformed trace: ") + e.what());
  }
}

// ---- replay ----

namespace detail {

inline bool visible_guarded_similar(const ACC& a, const ACC& b, int anchorA, int anchorB, CellPair pa, CellPair pb) {
  auto unary = [](const Cell& x, const Cell& y) { return x.rank == y.rank && x.attr == y.attr; };
  if (!unary(a.cell(pa.first), b.cell(pb.first)) || !unary(a.cell(pa.second), b.cell(pb.second))) return false;
  if ((pa.first == pa.second) != (pb.first == pb.second)) return false;
  if (anchorA >= 0 && guard_shape(a, anchorA, pa.first, pa.second) != guard_shape(b, anchorB, pb.first, pb.second))
    return false;
  return true;
}

[[noreturn]] inline void bad_step(std::size_t move, const std::string& step, const std::string& msg) {
  throw Error(ErrorCode::CertificateInvalid, "move " + std::to_string(move + 1) + " " + step + ": " + msg);
}

}  // namespace detail

struct ReplayOutcome {
  bool valid = false;
  bool violated = false;
  int rounds = 0;
  std::string message;
};

// Replays a trace under the stated setup. Throws certificate-invalid on a malformed move.
inline ReplayOutcome replay_trace(const ACC& a, const ACC& b, const GameSetup& setup, const std::vector<MoveRecord>& moves,
                                  Player claimed) {
  const ACC* acc[2] = {&a, &b};
  const int nv = setup.k + 2;
  std::vector<int> mu[2] = {std::vector<int>(std::size_t(nv), -1), std::vector<int>(std::size_t(nv), -1)};
  std::vector<int> base;
  if (setup.guarded && setup.k != 1) throw Error(ErrorCode::InvalidArgument, "the guarded game has k = 1");
  if (setup.initial) {
    for (int s = 0; s < 2; ++s) {
      const auto& t = s == 0 ? setup.initial->first : setup.initial->second;
      if (int(t.size()) != setup.k) throw Error(ErrorCode::CertificateInvalid, "initial tuple arity differs from k");
      for (int v = 0; v < setup.k; ++v) {
        if (t[std::size_t(v)] < 0 || t[std::size_t(v)] >= acc[s]->size())
          throw Error(ErrorCode::CertificateInvalid, "initial cell out of range");
        mu[s][std::size_t(v)] = t[std::size_t(v)];
      }
    }
    for (int v = 1; v <= setup.k; ++v) base.push_back(v);
  }
  ReplayOutcome out;
  auto state_similar = [&]() { return similar_k(a, mu[0], b, mu[1]).similar; };
  if (!setup.guarded && !state_similar()) {
    out.violated = true;
    out.valid = claimed == Player::I && moves.empty();
    out.message = "initial configuration is not similar";
    return out;
  }
  if (setup.guarded && setup.initial) {
    const Cell& x = a.cell(mu[0][0]);
    const Cell& y = b.cell(mu[1][0]);
    if (x.rank != y.rank || x.attr != y.attr) {
      out.violated = true;
      out.valid = claimed == Player::I && moves.empty();
      out.message = "initial configuration is not similar";
      return out;
    }
  }
  for (std::size_t m = 0; m < moves.size(); ++m) {
    const MoveRecord& mv = moves[m];
    if (out.violated) detail::bad_step(m, "", "moves continue after a violation");
    const int S = mv.side, T = 1 - mv.side;
    if (S != 0 && S != 1) detail::bad_step(m, "step 1", "bad side");
    auto in_range = [&](const std::vector<CellPair>& ps, int side) {
      for (auto [x, y] : ps)
        if (x < 0 || y < 0 || x >= acc[side]->size() || y >= acc[side]->size()) return false;
      return true;
    };
    auto distinct = [](std::vector<CellPair> ps) {
      std::sort(ps.begin(), ps.end());
      return std::adjacent_find(ps.begin(), ps.end()) == ps.end();
    };
    if (!in_range(mv.pair_set, S) || !distinct(mv.pair_set)) detail::bad_step(m, "step 1", "invalid pair set");
    if (!in_range(mv.responder_set, T) || !distinct(mv.responder_set)) detail::bad_step(m, "step 2", "invalid responder set");
    const int anchor_var = base.empty() ? -1 : base[0] - 1;
    std::size_t available_T = std::size_t(acc[T]->size()) * std::size_t(acc[T]->size());
    if (setup.guarded && anchor_var >= 0) {
      const int xs = mu[S][std::size_t(anchor_var)], xt = mu[T][std::size_t(anchor_var)];
      for (auto [y, z] : mv.pair_set)
        if (guard_shape(*acc[S], xs, y, z) < 0) detail::bad_step(m, "step 1", "pair violates the guard");
      for (auto [y, z] : mv.responder_set)
        if (guard_shape(*acc[T], xt, y, z) < 0) detail::bad_step(m, "step 2", "pair violates the guard");
      available_T = guarded_pairs(*acc[T], xt).size();
    }
    if (mv.stuck) {
      if (!mv.responder_set.empty() || mv.pair_set.size() <= available_T)
        detail::bad_step(m, "step 2", "responder is not stuck");
      if (m + 1 != moves.size()) detail::bad_step(m, "", "moves continue after a stuck responder");
      out.violated = true;
      out.rounds = int(m) + 1;
      out.message = "responder cannot answer a set of size " + std::to_string(mv.pair_set.size());
      break;
    }
    if (mv.responder_set.size() != mv.pair_set.size())
      detail::bad_step(m, "step 2", "|responder set| " + std::to_string(mv.responder_set.size()) +
                                        " != |pair set| " + std::to_string(mv.pair_set.size()));
    if (std::find(mv.responder_set.begin(), mv.responder_set.end(), mv.spoiler_pick) == mv.responder_set.end())
      detail::bad_step(m, "step 3", "pick outside the responder set");
    if (setup.rules == StepRules::Restricted) {
      if (std::find(mv.pair_set.begin(), mv.pair_set.end(), mv.duplicator_pick) == mv.pair_set.end())
        detail::bad_step(m, "step 4", "pick outside the chooser's set");
    } else if (!in_range({mv.duplicator_pick}, S)) {
      detail::bad_step(m, "step 4", "pick out of range");
    }
    if (mv.i == mv.j || mv.i < 1 || mv.j < 1 || mv.i > nv || mv.j > nv) detail::bad_step(m, "step 3", "bad indices");
    if (mv.base != base) detail::bad_step(m, "step 3", "base differs from the current base");
    for (int v : base)
      if (v == mv.i || v == mv.j) detail::bad_step(m, "step 3", "indices overwrite the base");
    const CellPair ps = mv.duplicator_pick, pt = mv.spoiler_pick;
    mu[S][std::size_t(mv.i - 1)] = ps.first;
    mu[S][std::size_t(mv.j - 1)] = ps.second;
    mu[T][std::size_t(mv.i - 1)] = pt.first;
    mu[T][std::size_t(mv.j - 1)] = pt.second;
    bool ok;
    if (setup.guarded) {
      const CellPair pa = S == 0 ? ps : pt, pb = S == 0 ? pt : ps;
      const int xa = anchor_var >= 0 ? mu[0][std::size_t(anchor_var)] : -1;
      const int xb = anchor_var >= 0 ? mu[1][std::size_t(anchor_var)] : -1;
      ok = detail::visible_guarded_similar(a, b, xa, xb, pa, pb);
    } else {
      ok = state_similar();
    }
    out.rounds = int(m) + 1;
    if (!ok) {
      out.violated = true;
      out.message = "similarity violated after move " + std::to_string(m + 1);
      if (m + 1 != moves.size()) detail::bad_step(m, "", "moves continue after a violation");
      break;
    }
    // base update: keep, or replace one slot by i or j
    const std::size_t want = setup.k;
    if (mv.base_after.size() != want) detail::bad_step(m, "base", "base has the wrong size");
    if (base.empty()) {
      for (int v : mv.base_after)
        if (v != mv.i && v != mv.j) detail::bad_step(m, "base", "new base must come from the placed pair");
      if (want == 2 && mv.base_after != std::vector<int>{mv.i, mv.j}) detail::bad_step(m, "base", "base must be the pair");
    } else {
      int changed = 0;
      for (std::size_t s = 0; s < want; ++s)
        if (mv.base_after[s] != base[s]) {
          ++changed;
          if (mv.base_after[s] != mv.i && mv.base_after[s] != mv.j) detail::bad_step(m, "base", "illegal base choice");
        }
      if (changed > 1) detail::bad_step(m, "base", "more than one base slot replaced");
    }
    base = mv.base_after;
  }
  out.valid = claimed == Player::I ? out.violated : !out.violated;
  if (out.message.empty()) out.message = out.violated ? "violation reached" : "similarity maintained";
  return out;
}

// ---- solver ----

struct GameOptions {
  GameSetup setup;
  SolverMode mode = SolverMode::Canonical;
  std::optional<int> rounds;          // budget; default is the stabilization round plus one
  std::size_t exhaustive_cap = 12;    // max |X|^2 per side in exhaustive mode
};

namespace detail {

struct Block {
  Key key;      // equivalence key (canonical) or pair id (exhaustive)
  Key visible;  // what the loss check compares
  int weight = 0;  // priority for Spoiler's set choice
  std::vector<CellPair> pairs;
};

}  // namespace detail

class GameSolver {
 public:
  GameSolver(const ACC& a, const ACC& b, GameOptions opt) : opt_(std::move(opt)) {
    acc_[0] = &a;
    acc_[1] = &b;
    const GameSetup& g = opt_.setup;
    if (g.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (g.guarded && g.k != 1) throw Error(ErrorCode::InvalidArgument, "the guarded game uses k = 1");
    if (!g.initial && g.k > 2) throw Error(ErrorCode::InvalidArgument, "games without an initial tuple support k <= 2");
    if (opt_.mode == SolverMode::Exhaustive)
      for (const ACC* x : acc_)
        if (std::size_t(x->size()) * std::size_t(x->size()) > opt_.exhaustive_cap)
          throw Error(ErrorCode::SizeLimit, "exhaustive mode needs |X|^2 <= " + std::to_string(opt_.exhaustive_cap));
    if (g.initial) {
      for (int s = 0; s < 2; ++s) {
        const auto& t = s == 0 ? g.initial->first : g.initial->second;
        if (int(t.size()) != g.k) throw Error(ErrorCode::InvalidArgument, "initial tuple arity differs from k");
        for (int x : t)
          if (x < 0 || x >= acc_[s]->size()) throw Error(ErrorCode::InvalidArgument, "initial cell out of range");
      }
    }
    Universe U({acc_[0], acc_[1]}, g.k);
    unary_ = U.unary;
    trace_ = refine_universe(U, g.guarded ? Method::Ccwl1 : Method::Box);
  }

  const RefinementTrace& trace() const { return trace_; }

  // Rounds after which the outcome no longer changes.
  int default_budget() const { return trace_.stable_round + 1; }

  // Spoiler wins within r rounds from the configured start.
  bool spoiler_wins(int r) {
    if (!opt_.setup.initial) return win_empty(r);
    auto [ia, ib] = initial_indices();
    if (!base_similar(ia, ib)) return true;
    return win(ia, ib, r);
  }

  bool spoiler_wins_from(const std::vector<int>& ua, const std::vector<int>& ub, int r) {
    const std::size_t ia = index(0, ua), ib = index(1, ub);
    if (!base_similar(ia, ib)) return true;
    return win(ia, ib, r);
  }

  StrategyResult solve() {
    StrategyResult res;
    res.mode = opt_.mode;
    res.setup = opt_.setup;
    const int budget = opt_.rounds ? std::min(*opt_.rounds, default_budget()) : default_budget();
    res.rounds_checked = opt_.rounds ? *opt_.rounds : budget;
    for (int r = 0; r <= budget; ++r)
      if (spoiler_wins(r)) {
        res.winner = Player::I;
        res.win_round = r;
        res.trace = witness(r);
        return res;
      }
    res.winner = Player::II;
    return res;
  }

 private:
  using Blocks = std::vector<detail::Block>;
  static constexpr std::size_t kNone = std::size_t(-1);

  const ACC& A(int s) const { return *acc_[s]; }
  int k() const { return opt_.setup.k; }
  bool canonical() const { return opt_.mode == SolverMode::Canonical; }
  std::size_t n(int s) const { return std::size_t(acc_[s]->size()); }

  std::size_t index(int s, const std::vector<int>& t) const {
    if (int(t.size()) != k()) throw Error(ErrorCode::InvalidArgument, "tuple arity differs from k");
    std::size_t idx = 0;
    for (int x : t) {
      if (x < 0 || std::size_t(x) >= n(s)) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
      idx = idx * n(s) + std::size_t(x);
    }
    return idx;
  }
  std::vector<int> tuple(int s, std::size_t idx) const {
    std::vector<int> t;
    detail::decode_tuple(idx, n(s), k(), t);
    return t;
  }
  std::pair<std::size_t, std::size_t> initial_indices() const {
    return {index(0, opt_.setup.initial->first), index(1, opt_.setup.initial->second)};
  }

  bool base_similar(std::size_t ia, std::size_t ib) const {
    auto ta = tuple(0, ia), tb = tuple(1, ib);
    if (opt_.setup.guarded) {
      const Cell& x = A(0).cell(ta[0]);
      const Cell& y = A(1).cell(tb[0]);
      return x.rank == y.rank && x.attr == y.attr;
    }
    return atomic_key(universe(), 0, ta) == atomic_key(universe(), 1, tb);
  }

  const Universe& universe() const {
    if (!U_) U_.emplace(std::vector<const ACC*>{acc_[0], acc_[1]}, k());
    return *U_;
  }

  int color(int s, int r, std::size_t idx) const { return trace_.color(std::size_t(s), std::max(r, 0), idx); }
  int cell_color(int s, int r, int cell) const {
    // colors of single cells: tuples of arity 1 only
    return color(s, r, std::size_t(cell));
  }

  // Blocks of the legal pairs on side s for base tuple idx (kNone: empty start) with r rounds left.
  Blocks blocks(int s, std::size_t idx, int r) const {
    const ACC& acc = A(s);
    const int N = acc.size();
    const Universe& U = universe();
    std::map<Key, detail::Block> m;
    std::vector<int> x = idx == kNone ? std::vector<int>{} : tuple(s, idx);
    const int kk = k();
    auto add = [&](Key key, Key visible, int weight, CellPair p) {
      if (!canonical()) key = {u64(p.first), u64(p.second)};
      auto& b = m[key];
      if (b.pairs.empty()) {
        b.key = key;
        b.visible = std::move(visible);
        b.weight = weight;
      }
      b.pairs.push_back(p);
    };
    auto weight_of = [&](int y, int z) {
      std::uint8_t rl = acc.rel(y, z);
      return (acc.cell(y).rank + acc.cell(z).rank) * 16 + std::popcount(unsigned(rl & ~kRelEq));
    };
    if (opt_.setup.guarded) {
      for (int y = 0; y < N; ++y)
        for (int z = 0; z < N; ++z) {
          int shape = idx == kNone ? (y == z ? 5 : 4) : guard_shape(acc, x[0], y, z);
          if (shape < 0) continue;
          Key vis{u64(shape), u64(unary_.of(std::size_t(s), y)), u64(unary_.of(std::size_t(s), z))};
          Key key{u64(shape), u64(cell_color(s, r - 1, y)), u64(cell_color(s, r - 1, z))};
          add(std::move(key), std::move(vis), weight_of(y, z), {y, z});
        }
    } else if (idx == kNone) {
      for (int y = 0; y < N; ++y)
        for (int z = 0; z < N; ++z) {
          Key vis = atomic_key(U, std::size_t(s), {y, z});
          Key key;
          if (kk == 2) {
            key = {u64(color(s, r - 1, std::size_t(y) * n(s) + std::size_t(z)))};
          } else {
            key = vis;
            key.push_back(u64(cell_color(s, r - 1, y)));
            key.push_back(u64(cell_color(s, r - 1, z)));
          }
          add(std::move(key), std::move(vis), weight_of(y, z), {y, z});
        }
    } else {
      std::vector<std::size_t> place(static_cast<std::size_t>(kk));
      for (int i = 0; i < kk; ++i) place[std::size_t(i)] = detail::ipow(n(s), kk - 1 - i);
      for (int y = 0; y < N; ++y)
        for (int z = 0; z < N; ++z) {
          unsigned __int128 code = context_code(U, std::size_t(s), x, y, z);
          Key vis{u64(code >> 64), u64(code)};
          Key key = vis;
          for (int i = 0; i < kk; ++i) {
            std::size_t base = idx - std::size_t(x[std::size_t(i)]) * place[std::size_t(i)];
            key.push_back(u64(color(s, r - 1, base + std::size_t(y) * place[std::size_t(i)])));
            key.push_back(u64(color(s, r - 1, base + std::size_t(z) * place[std::size_t(i)])));
          }
          add(std::move(key), std::move(vis), weight_of(y, z), {y, z});
        }
    }
    Blocks out;
    for (auto& [key, b] : m) out.push_back(std::move(b));
    return out;
  }

  // Next bases after placing ps on side S and pt on side T (keep is handled separately).
  std::vector<std::pair<std::size_t, std::size_t>> continuations(int S, std::size_t xS, std::size_t xT, CellPair ps,
                                                                 CellPair pt) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const int T = 1 - S;
    auto emit = [&](std::size_t a, std::size_t b) { out.push_back(S == 0 ? std::make_pair(a, b) : std::make_pair(b, a)); };
    if (xS == kNone) {
      if (k() == 2) {
        emit(std::size_t(ps.first) * n(S) + std::size_t(ps.second), std::size_t(pt.first) * n(T) + std::size_t(pt.second));
      } else {
        emit(std::size_t(ps.first), std::size_t(pt.first));
        emit(std::size_t(ps.second), std::size_t(pt.second));
      }
      return out;
    }
    auto ts = tuple(S, xS), tt = tuple(T, xT);
    for (int i = 0; i < k(); ++i)
      for (int which = 0; which < 2; ++which) {
        auto a = ts, b = tt;
        a[std::size_t(i)] = which == 0 ? ps.first : ps.second;
        b[std::size_t(i)] = which == 0 ? pt.first : pt.second;
        emit(index(S, a), index(T, b));
      }
    return out;
  }

  struct MoveAnalysis {
    bool win = false;
    int side = 0;
    std::vector<std::size_t> chosen;  // S-block indices
    Blocks bs, bt;
    std::vector<char> good;           // per T-block
  };

  // Spoiler-win relation for one placed pair of blocks; reps are each block's first pair.
  bool lose(int S, std::size_t xS, std::size_t xT, const detail::Block& b_s, const detail::Block& b_t, int r,
            int* option = nullptr) {
    if (b_s.visible != b_t.visible) {
      if (option) *option = -1;
      return true;
    }
    auto conts = continuations(S, xS, xT, b_s.pairs[0], b_t.pairs[0]);
    for (std::size_t o = 0; o < conts.size(); ++o)
      if (win(conts[o].first, conts[o].second, r - 1)) {
        if (option) *option = int(o);
        return true;
      }
    return false;
  }

  MoveAnalysis analyze(std::size_t ia, std::size_t ib, int r) {
    MoveAnalysis res;
    for (int S = 0; S < 2; ++S) {
      const int T = 1 - S;
      const std::size_t xS = S == 0 ? ia : ib, xT = S == 0 ? ib : ia;
      Blocks bs = blocks(S, xS, r), bt = blocks(T, xT, r);
      std::map<std::pair<std::size_t, std::size_t>, char> memo;
      auto L = [&](std::size_t i, std::size_t j) {
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second != 0;
        bool v = lose(S, xS, xT, bs[i], bt[j], r);
        memo[key] = v ? 1 : 0;
        return v;
      };
      long long totalT = 0;
      for (const auto& b : bt) totalT += long(b.pairs.size());
      auto try_set = [&](const std::vector<std::size_t>& chosen, const std::vector<std::size_t>& against) {
        long long size = 0;
        for (std::size_t i : chosen) size += long(bs[i].pairs.size());
        if (size == 0) return false;
        std::vector<char> good(bt.size(), 1);
        long long nongood = 0;
        for (std::size_t j = 0; j < bt.size(); ++j) {
          for (std::size_t i : against)
            if (!L(i, j)) {
              good[j] = 0;
              break;
            }
          if (!good[j]) {
            nongood += long(bt[j].pairs.size());
            if (nongood >= size) return false;
          }
        }
        res.win = true;
        res.side = S;
        res.chosen = chosen;
        res.good = std::move(good);
        return true;
      };
      std::vector<std::size_t> all(bs.size());
      for (std::size_t i = 0; i < bs.size(); ++i) all[i] = i;
      if (opt_.setup.rules == StepRules::AsWritten) {
        bool found = false;
        if (canonical())
          for (const auto& cand : candidates(bs, bt))
            if (try_set(cand, all)) {
              found = true;
              break;
            }
        if (found || try_set(all, all)) {
          res.bs = std::move(bs);
          res.bt = std::move(bt);
          return res;
        }
        continue;
      }
      if (!canonical()) {
        if (exhaustive_sets(bs, bt, L, res, S)) {
          res.bs = std::move(bs);
          res.bt = std::move(bt);
          return res;
        }
        continue;
      }
      for (const auto& cand : candidates(bs, bt))
        if (try_set(cand, cand)) {
          res.bs = std::move(bs);
          res.bt = std::move(bt);
          return res;
        }
    }
    return res;
  }

  template <class LF>
  bool exhaustive_sets(const Blocks& bs, const Blocks& bt, LF& L, MoveAnalysis& res, int S) {
    const std::size_t m = bs.size(), q = bt.size();
    if (m > 20 || q > 63) throw Error(ErrorCode::SizeLimit, "exhaustive game instance too large");
    std::vector<std::uint64_t> good_of(m, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < q; ++j)
        if (L(i, j)) good_of[i] |= std::uint64_t(1) << j;
    const std::uint64_t allT = q == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << q) - 1;
    std::vector<std::uint64_t> good(std::size_t(1) << m, allT);
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << m); ++mask) {
      const int low = std::countr_zero(mask);
      good[mask] = good[mask & (mask - 1)] & good_of[std::size_t(low)];
      const int nongood = std::popcount(allT & ~good[mask]);
      if (nongood < std::popcount(mask)) {
        res.win = true;
        res.side = S;
        res.chosen.clear();
        for (std::size_t i = 0; i < m; ++i)
          if (mask >> i & 1) res.chosen.push_back(i);
        res.good.assign(q, 0);
        for (std::size_t j = 0; j < q; ++j) res.good[j] = (good[mask] >> j & 1) ? 1 : 0;
        return true;
      }
    }
    return false;
  }

  // Spoiler's candidate sets: per visible group, the blocks missing on the other side, then the
  // blocks with excess multiplicity, then single excess blocks.
  std::vector<std::vector<std::size_t>> candidates(const Blocks& bs, const Blocks& bt) const {
    std::map<Key, long long> mt;
    for (const auto& b : bt) mt[b.key] = long(b.pairs.size());
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < bs.size(); ++i) groups[bs[i].visible].push_back(i);
    std::vector<std::pair<Key, std::vector<std::size_t>>> order(groups.begin(), groups.end());
    auto group_size = [&](const std::vector<std::size_t>& idxs) {
      std::size_t n = 0;
      for (std::size_t i : idxs) n += bs[i].pairs.size();
      return n;
    };
    // heavier cells and more adjacency first, then smaller groups
    std::stable_sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
      const int wx = bs[x.second[0]].weight, wy = bs[y.second[0]].weight;
      if (wx != wy) return wx > wy;
      return group_size(x.second) < group_size(y.second);
    });
    std::vector<std::vector<std::size_t>> out;
    auto push = [&](std::vector<std::size_t> c) {
      if (!c.empty() && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    };
    for (const auto& [vis, idxs] : order) {
      std::vector<std::size_t> missing, excess;
      for (std::size_t i : idxs) {
        auto it = mt.find(bs[i].key);
        const long long other = it == mt.end() ? 0 : it->second;
        if (other == 0) missing.push_back(i);
        if (long(bs[i].pairs.size()) > other) excess.push_back(i);
      }
      push(missing);
      push(excess);
    }
    for (const auto& [vis, idxs] : order)
      for (std::size_t i : idxs) {
        auto it = mt.find(bs[i].key);
        if (long(bs[i].pairs.size()) > (it == mt.end() ? 0 : it->second)) push({i});
      }
    return out;
  }

  static std::uint64_t memo_key(std::size_t ia, std::size_t ib, int r) {
    return (std::uint64_t(ia) << 38) ^ (std::uint64_t(ib) << 12) ^ std::uint64_t(r);
  }

  bool win(std::size_t ia, std::size_t ib, int r) {
    if (r <= 0) return false;
    const auto key = std::make_tuple(ia, ib, r);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool v = win(ia, ib, r - 1) || analyze(ia, ib, r).win;
    memo_[key] = v;
    return v;
  }

  bool win_empty(int r) {
    if (r <= 0) return false;
    if (auto it = memo_empty_.find(r); it != memo_empty_.end()) return it->second;
    bool v = win_empty(r - 1) || analyze(kNone, kNone, r).win;
    memo_empty_[r] = v;
    return v;
  }

  std::vector<int> free_vars(const std::vector<int>& base) const {
    std::vector<int> out;
    for (int v = 1; v <= k() + 2; ++v)
      if (std::find(base.begin(), base.end(), v) == base.end()) out.push_back(v);
    return out;
  }

  std::vector<MoveRecord> witness(int r) {
    std::vector<MoveRecord> moves;
    std::size_t ia = kNone, ib = kNone;
    std::vector<int> base;
    if (opt_.setup.initial) {
      std::tie(ia, ib) = initial_indices();
      if (!base_similar(ia, ib)) return moves;
      for (int v = 1; v <= k(); ++v) base.push_back(v);
    }
    while (r > 0) {
      const bool empty = ia == kNone;
      // Use the fewest rounds that still win from here.
      int need = r;
      for (int q = 0; q <= r; ++q)
        if (empty ? win_empty(q) : win(ia, ib, q)) {
          need = q;
          break;
        }
      r = need;
      MoveAnalysis an = analyze(ia, ib, r);
      if (!an.win) throw Error(ErrorCode::InvalidState, "witness reconstruction failed");
      const int S = an.side;
      const std::size_t xS = S == 0 ? ia : ib, xT = S == 0 ? ib : ia;
      MoveRecord mv;
      mv.side = S;
      mv.base = base;
      std::size_t need_size = 0;
      for (std::size_t i : an.chosen) {
        for (const auto& p : an.bs[i].pairs) mv.pair_set.push_back(p);
        need_size += an.bs[i].pairs.size();
      }
      std::sort(mv.pair_set.begin(), mv.pair_set.end());
      std::size_t availT = 0;
      for (const auto& b : an.bt) availT += b.pairs.size();
      if (availT < need_size) {
        mv.stuck = true;
        moves.push_back(std::move(mv));
        return moves;
      }
      // Responder: every safe pair first, then pairs from good blocks that still look like the
      // chosen set, then the rest.
      std::size_t pick_block = kNone;
      for (std::size_t j = 0; j < an.bt.size(); ++j)
        if (!an.good[j])
          for (const auto& p : an.bt[j].pairs) mv.responder_set.push_back(p);
      std::vector<std::size_t> fill;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = 0; j < an.bt.size(); ++j) {
          if (!an.good[j]) continue;
          bool looks = false;
          for (std::size_t i : an.chosen) looks = looks || an.bs[i].visible == an.bt[j].visible;
          if (looks == (pass == 0)) fill.push_back(j);
        }
      for (std::size_t j : fill) {
        if (mv.responder_set.size() >= need_size) break;
        if (pick_block == kNone) pick_block = j;
        for (const auto& p : an.bt[j].pairs) {
          if (mv.responder_set.size() >= need_size) break;
          mv.responder_set.push_back(p);
        }
      }
      if (pick_block == kNone) throw Error(ErrorCode::InvalidState, "witness reconstruction found no good pair");
      const auto& btb = an.bt[pick_block];
      mv.spoiler_pick = btb.pairs[0];
      // Duplicator mirrors the same block key when possible.
      std::vector<std::size_t> pool = an.chosen;
      if (opt_.setup.rules == StepRules::AsWritten) {
        pool.clear();
        for (std::size_t i = 0; i < an.bs.size(); ++i) pool.push_back(i);
      }
      std::size_t dup = pool[0];
      for (std::size_t i : pool)
        if (an.bs[i].key == btb.key) {
          dup = i;
          break;
        }
      mv.duplicator_pick = an.bs[dup].pairs[0];
      auto fv = free_vars(base);
      mv.i = fv[0];
      mv.j = fv[1];
      int option = -1;
      if (!lose(S, xS, xT, an.bs[dup], btb, r, &option))
        throw Error(ErrorCode::InvalidState, "witness reconstruction lost the winning line");
      if (option < 0) {
        mv.base_after = base.empty() ? (k() == 2 ? std::vector<int>{mv.i, mv.j} : std::vector<int>{mv.i}) : base;
        moves.push_back(std::move(mv));
        return moves;
      }
      auto conts = continuations(S, xS, xT, an.bs[dup].pairs[0], btb.pairs[0]);
      std::tie(ia, ib) = conts[std::size_t(option)];
      if (base.empty()) {
        if (k() == 2)
          base = {mv.i, mv.j};
        else
          base = {option == 0 ? mv.i : mv.j};
      } else {
        const int slot = option / 2;
        base[std::size_t(slot)] = option % 2 == 0 ? mv.i : mv.j;
      }
      mv.base_after = base;
      moves.push_back(std::move(mv));
      --r;
    }
    return moves;
  }

  struct TupleHash {
    std::size_t operator()(const std::tuple<std::size_t, std::size_t, int>& t) const {
      return std::hash<std::uint64_t>()(memo_key(std::get<0>(t), std::get<1>(t), std::get<2>(t)));
    }
  };

  const ACC* acc_[2];
  GameOptions opt_;
  UnaryTable unary_;
  RefinementTrace trace_;
  mutable std::optional<Universe> U_;
  std::unordered_map<std::tuple<std::size_t, std::size_t, int>, bool, TupleHash> memo_;
  std::map<int, bool> memo_empty_;
};

inline StrategyResult solve_game(const ACC& a, const ACC& b, GameOptions opt) {
  if (opt.setup.guarded) throw Error(ErrorCode::InvalidArgument, "use solve_guarded_game for the guarded variant");
  return GameSolver(a, b, std::move(opt)).solve();
}

inline StrategyResult solve_guarded_game(const ACC& a, const ACC& b, GameOptions opt) {
  opt.setup.guarded = true;
  opt.setup.k = 1;
  return GameSolver(a, b, std::move(opt)).solve();
}

}  // namespace ccwl
