#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ccwl/acc.hpp"
#include "ccwl/atomic_type.hpp"

namespace ccwl {

enum class Op : std::uint8_t { Eq, Rank, Attr, Adj, And, Not, Exists };

// Variables are 0-based internally (x1 is 0). For Attr, `a` is the 0-based bit index.
struct Node {
  Op op = Op::Eq;
  int a = 0, b = 0;   // variables (Eq, Adj, Exists pair), rank (Rank: a = rank, b = var), bit (Attr: a = bit, b = var)
  long long n = 0;    // Exists threshold
  Nbr rel = Nbr::B;
  int l = -1, r = -1; // children
  std::uint32_t free = 0;
  int depth = 0;

  bool operator==(const Node& o) const {
    return op == o.op && a == o.a && b == o.b && n == o.n && rel == o.rel && l == o.l && r == o.r;
  }
};

struct NodeHash {
  std::size_t operator()(const Node& x) const {
    std::size_t h = std::size_t(x.op);
    auto mix = [&](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(std::size_t(x.a));
    mix(std::size_t(x.b));
    mix(std::size_t(x.n));
    mix(std::size_t(x.rel));
    mix(std::size_t(x.l + 1));
    mix(std::size_t(x.r + 1));
    return h;
  }
};

// Hash-consed formula DAG. Node ids are stable; equal subformulas share one id.
class FormulaStore {
 public:
  const Node& node(int id) const { return nodes_[std::size_t(id)]; }
  int size() const { return int(nodes_.size()); }

  int eq(int i, int j) { return add({Op::Eq, i, j, 0, Nbr::B, -1, -1, bit(i) | bit(j), 0}); }
  int rank(int r, int i) { return add({Op::Rank, r, i, 0, Nbr::B, -1, -1, bit(i), 0}); }
  int attr(int s, int i) { return add({Op::Attr, s, i, 0, Nbr::B, -1, -1, bit(i), 0}); }
  int adj(Nbr rel, int i, int j) { return add({Op::Adj, i, j, 0, rel, -1, -1, bit(i) | bit(j), 0}); }
  int conj(int f, int g) {
    return add({Op::And, 0, 0, 0, Nbr::B, f, g, node(f).free | node(g).free, std::max(node(f).depth, node(g).depth)});
  }
  int neg(int f) { return add({Op::Not, 0, 0, 0, Nbr::B, f, -1, node(f).free, node(f).depth}); }
  int exists(long long n, int i, int j, int f) {
    if (i == j) throw Error(ErrorCode::InvalidArgument, "quantified pair must use distinct variables");
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative threshold");
    return add({Op::Exists, i, j, n, Nbr::B, f, -1, node(f).free & ~(bit(i) | bit(j)), node(f).depth + 1});
  }
  // Right-nested conjunction; a list must be nonempty.
  int conj_all(const std::vector<int>& fs) {
    if (fs.empty()) throw Error(ErrorCode::InvalidArgument, "empty conjunction");
    int acc = fs.back();
    for (std::size_t i = fs.size() - 1; i-- > 0;) acc = conj(fs[i], acc);
    return acc;
  }

  // Renames variables everywhere (free and bound) by perm.
  int rename(int id, const std::vector<int>& perm) {
    std::unordered_map<int, int> memo;
    return rename_rec(id, perm, memo);
  }
  int swap_vars(int id, int i, int j, int nvars) {
    if (i == j) return id;
    std::vector<int> p(static_cast<std::size_t>(nvars));
    for (int v = 0; v < nvars; ++v) p[std::size_t(v)] = v;
    std::swap(p[std::size_t(i)], p[std::size_t(j)]);
    return rename(id, p);
  }

  static std::uint32_t bit(int v) { return std::uint32_t(1) << unsigned(v); }

 private:
  int add(const Node& x) {
    auto it = index_.find(x);
    if (it != index_.end()) return it->second;
    nodes_.push_back(x);
    int id = int(nodes_.size()) - 1;
    index_.emplace(x, id);
    return id;
  }

  int rename_rec(int id, const std::vector<int>& p, std::unordered_map<int, int>& memo) {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    Node x = node(id);
    auto v = [&](int i) { return p[std::size_t(i)]; };
    int out = -1;
    switch (x.op) {
      case Op::Eq: out = eq(v(x.a), v(x.b)); break;
      case Op::Rank: out = rank(x.a, v(x.b)); break;
      case Op::Attr: out = attr(x.a, v(x.b)); break;
      case Op::Adj: out = adj(x.rel, v(x.a), v(x.b)); break;
      case Op::And: {
        int l = rename_rec(x.l, p, memo);
        int r = rename_rec(x.r, p, memo);
        out = conj(l, r);
        break;
      }
      case Op::Not: out = neg(rename_rec(x.l, p, memo)); break;
      case Op::Exists: out = exists(x.n, v(x.a), v(x.b), rename_rec(x.l, p, memo)); break;
    }
    memo[id] = out;
    return out;
  }

  std::vector<Node> nodes_;
  std::unordered_map<Node, int, NodeHash> index_;
};

struct Formula {
  std::shared_ptr<FormulaStore> store;
  int root = -1;
  int k = 0;  // number of variables available

  const Node& node() const { return store->node(root); }
  std::uint32_t free_mask() const { return node().free; }
  int depth() const { return node().depth; }
};

// 1-based indices of the free variables.
inline std::vector<int> free_vars(const Formula& f) {
  std::vector<int> out;
  for (int v = 0; v < 32; ++v)
    if (f.free_mask() & FormulaStore::bit(v)) out.push_back(v + 1);
  return out;
}

inline int quantifier_depth(const Formula& f) { return f.depth(); }

// Number of tree nodes when shared subformulas are expanded.
inline double tree_size(const FormulaStore& st, int id) {
  std::unordered_map<int, double> memo;
  std::function<double(int)> go = [&](int x) -> double {
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    const Node& n = st.node(x);
    double s = 1;
    if (n.l >= 0) s += go(n.l);
    if (n.r >= 0) s += go(n.r);
    return memo[x] = s;
  };
  return go(id);
}

// ---- printing ----

inline void print_node(const FormulaStore& st, int id, std::string& out) {
  const Node& x = st.node(id);
  auto var = [](int v) { return "x" + std::to_string(v + 1); };
  switch (x.op) {
    case Op::Eq: out += "(eq " + var(x.a) + " " + var(x.b) + ")"; return;
    case Op::Rank: out += "(rank " + std::to_string(x.a) + " " + var(x.b) + ")"; return;
    case Op::Attr: out += "(attr " + std::to_string(x.a + 1) + " " + var(x.b) + ")"; return;
    case Op::Adj: out += std::string("(adj ") + nbr_name(x.rel) + " " + var(x.a) + " " + var(x.b) + ")"; return;
    case Op::And:
      out += "(and ";
      print_node(st, x.l, out);
      out += " ";
      print_node(st, x.r, out);
      out += ")";
      return;
    case Op::Not:
      out += "(not ";
      print_node(st, x.l, out);
      out += ")";
      return;
    case Op::Exists:
      out += "(exists " + std::to_string(x.n) + " (" + var(x.a) + " " + var(x.b) + ") ";
      print_node(st, x.l, out);
      out += ")";
      return;
  }
}

inline std::string to_string(const Formula& f) {
  std::string s;
  print_node(*f.store, f.root, s);
  return s;
}

// ---- parsing ----

class FormulaParser {
 public:
  FormulaParser(const std::string& text, int k, std::shared_ptr<FormulaStore> store)
      : s_(text), k_(k), st_(std::move(store)) {}

  Formula parse() {
    skip();
    int root = formula();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return {st_, root, k_};
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::Parse, "offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string word() {
    skip();
    std::size_t b = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')' && s_[pos_] != '#')
      ++pos_;
    if (b == pos_) fail("expected a token");
    return s_.substr(b, pos_ - b);
  }

  long long number(long long lo) {
    std::size_t at = pos_;
    std::string w = word();
    for (char c : w)
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        pos_ = at;
        fail("expected a number, got '" + w + "'");
      }
    long long v = 0;
    try {
      v = std::stoll(w);
    } catch (const std::exception&) {
      pos_ = at;
      fail("number out of range");
    }
    if (v < lo) {
      pos_ = at;
      fail("number below " + std::to_string(lo));
    }
    return v;
  }

  int variable() {
    skip();
    std::size_t at = pos_;
    std::string w = word();
    if (w.size() < 2 || w[0] != 'x') {
      pos_ = at;
      fail("expected a variable, got '" + w + "'");
    }
    for (std::size_t i = 1; i < w.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(w[i]))) {
        pos_ = at;
        fail("bad variable '" + w + "'");
      }
    int v = std::stoi(w.substr(1));
    if (v < 1 || v > k_) {
      pos_ = at;
      fail("variable " + w + " outside x1..x" + std::to_string(k_));
    }
    return v - 1;
  }

  int formula() {
    expect('(');
    std::size_t at = pos_;
    std::string head = word();
    int id = -1;
    if (head == "eq") {
      int i = variable();
      id = st_->eq(i, variable());
    } else if (head == "rank") {
      int r = int(number(0));
      id = st_->rank(r, variable());
    } else if (head == "attr") {
      int sbit = int(number(1));
      id = st_->attr(sbit - 1, variable());
    } else if (head == "adj") {
      std::size_t rat = pos_;
      std::string r = word();
      Nbr rel;
      if (r == "B")
        rel = Nbr::B;
      else if (r == "C")
        rel = Nbr::C;
      else if (r == "up")
        rel = Nbr::Up;
      else if (r == "down")
        rel = Nbr::Down;
      else {
        pos_ = rat;
        fail("unknown relation '" + r + "'");
      }
      int i = variable();
      id = st_->adj(rel, i, variable());
    } else if (head == "and") {
      int f = formula();
      id = st_->conj(f, formula());
    } else if (head == "not") {
      id = st_->neg(formula());
    } else if (head == "exists") {
      long long n = number(0);
      expect('(');
      int i = variable();
      std::size_t jat = pos_;
      int j = variable();
      if (i == j) {
        pos_ = jat;
        fail("quantified pair must use distinct variables");
      }
      expect(')');
      id = st_->exists(n, i, j, formula());
    } else {
      pos_ = at;
      fail("unknown connective '" + head + "'");
    }
    expect(')');
    return id;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int k_;
  std::shared_ptr<FormulaStore> st_;
};

inline Formula parse_formula(const std::string& text, int k, std::shared_ptr<FormulaStore> store = nullptr) {
  if (k < 1 || k > 30) throw Error(ErrorCode::InvalidArgument, "arity must be in 1..30");
  if (!store) store = std::make_shared<FormulaStore>();
  return FormulaParser(text, k, store).parse();
}

// ---- evaluation ----

// Memoizing model checker for one complex. Memo entries are keyed per node on its free variables.
class Evaluator {
 public:
  Evaluator(const ACC& acc, std::shared_ptr<FormulaStore> store) : acc_(acc), st_(std::move(store)) {}

  const ACC& acc() const { return acc_; }

  // mu[v] is the cell of variable v, or -1 if unset.
  bool eval(int id, std::vector<int>& mu) {
    const Node& x = st_->node(id);
    check_bound(x, mu);
    return eval_rec(id, mu);
  }

  // Exact number of pairs satisfying the body of an Exists node.
  long long count_pairs(int id, std::vector<int>& mu) {
    const Node& x = st_->node(id);
    if (x.op != Op::Exists) throw Error(ErrorCode::InvalidArgument, "count_pairs needs an exists node");
    check_bound(x, mu);
    const int n = acc_.size();
    const int oi = mu[std::size_t(x.a)], oj = mu[std::size_t(x.b)];
    long long c = 0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        mu[std::size_t(x.a)] = p;
        mu[std::size_t(x.b)] = q;
        if (eval_rec(x.l, mu)) ++c;
      }
    mu[std::size_t(x.a)] = oi;
    mu[std::size_t(x.b)] = oj;
    return c;
  }

 private:
  struct Memo {
    bool dense = true;
    std::vector<std::int8_t> d;
    std::unordered_map<std::uint64_t, bool> m;
    bool init = false;
  };

  void check_bound(const Node& x, const std::vector<int>& mu) const {
    for (int v = 0; v < 32; ++v)
      if ((x.free & FormulaStore::bit(v)) && (std::size_t(v) >= mu.size() || mu[std::size_t(v)] < 0))
        throw Error(ErrorCode::InvalidArgument, "free variable x" + std::to_string(v + 1) + " is unbound");
  }

  std::uint64_t key_of(const Node& x, const std::vector<int>& mu) const {
    std::uint64_t key = 0;
    const std::uint64_t n = std::uint64_t(acc_.size());
    for (std::uint32_t f = x.free; f; f &= f - 1) {
      int v = std::countr_zero(f);
      key = key * n + std::uint64_t(mu[std::size_t(v)]);
    }
    return key;
  }

  bool eval_rec(int id, std::vector<int>& mu) {
    const Node& x = st_->node(id);
    auto cell = [&](int v) { return mu[std::size_t(v)]; };
    switch (x.op) {
      case Op::Eq: return cell(x.a) == cell(x.b);
      case Op::Rank: return acc_.cell(cell(x.b)).rank == x.a;
      case Op::Attr: {
        const std::string& s = acc_.cell(cell(x.b)).attr;
        return std::size_t(x.a) < s.size() && s[std::size_t(x.a)] == '1';
      }
      case Op::Adj: return acc_.in(cell(x.b), x.rel, cell(x.a));
      case Op::And: return eval_rec(x.l, mu) && eval_rec(x.r, mu);
      case Op::Not: return !eval_rec(x.l, mu);
      case Op::Exists: break;
    }
    if (x.n == 0) return true;
    if (memo_.size() <= std::size_t(id)) memo_.resize(std::size_t(st_->size()));
    Memo& m = memo_[std::size_t(id)];
    if (!m.init) {
      m.init = true;
      double cells = 1;
      for (int i = 0; i < std::popcount(x.free); ++i) cells *= acc_.size();
      m.dense = cells <= double(1 << 22);
      if (m.dense) m.d.assign(std::size_t(cells), -1);
    }
    const std::uint64_t key = key_of(x, mu);
    if (m.dense) {
      if (m.d[key] >= 0) return m.d[key] != 0;
    } else if (auto it = m.m.find(key); it != m.m.end()) {
      return it->second;
    }
    const int n = acc_.size();
    const int oi = mu[std::size_t(x.a)], oj = mu[std::size_t(x.b)];
    long long c = 0;
    bool res = false;
    for (int p = 0; p < n && !res; ++p)
      for (int q = 0; q < n; ++q) {
        mu[std::size_t(x.a)] = p;
        mu[std::size_t(x.b)] = q;
        if (eval_rec(x.l, mu) && ++c >= x.n) {
          res = true;
          break;
        }
      }
    mu[std::size_t(x.a)] = oi;
    mu[std::size_t(x.b)] = oj;
    if (m.dense)
      m.d[key] = res ? 1 : 0;
    else
      m.m[key] = res;
    return res;
  }

  const ACC& acc_;
  std::shared_ptr<FormulaStore> st_;
  std::vector<Memo> memo_;
};

// One-shot evaluation; mu is 0-based per variable, -1 for unset.
inline bool evaluate(const ACC& acc, std::vector<int> mu, const Formula& f) {
  if (int(mu.size()) < f.k) mu.resize(std::size_t(f.k), -1);
  Evaluator ev(acc, f.store);
  return ev.eval(f.root, mu);
}

inline long long count_pairs(const ACC& acc, std::vector<int> mu, const Formula& f) {
  if (int(mu.size()) < f.k) mu.resize(std::size_t(f.k), -1);
  Evaluator ev(acc, f.store);
  return ev.count_pairs(f.root, mu);
}

// ---- atomic type formulas ----

// Quantifier-free conjunction that holds exactly at tuples of atomic type a.
// Literals: equalities, the four adjacencies in both directions, attribute bits, rank predicates 0..rho.
inline int atomic_type_node(FormulaStore& st, const AtomicType& a, int rho) {
  if (!a.consistent()) throw Error(ErrorCode::InvalidArgument, "inconsistent atomic type");
  const int k = a.k;
  for (int r : a.ranks)
    if (r > rho) throw Error(ErrorCode::InvalidArgument, "rank exceeds rho");
  std::vector<int> lits;
  auto lit = [&](int f, bool pos) { lits.push_back(pos ? f : st.neg(f)); };
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) lit(st.eq(i, j), a.equal(i, j));
  for (Nbr kind : kAllNbr)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j) lit(st.adj(kind, i, j), a.rel(kind, i, j));
  for (int i = 0; i < k; ++i) {
    const std::string& c = a.colors[std::size_t(i)];
    for (std::size_t s = 0; s < c.size(); ++s) lit(st.attr(int(s), i), c[s] == '1');
    for (int r = 0; r <= rho; ++r) lit(st.rank(r, i), a.ranks[std::size_t(i)] == r);
  }
  return st.conj_all(lits);
}

inline Formula atomic_type_formula(const AtomicType& a, int k, int rho, std::shared_ptr<FormulaStore> store = nullptr) {
  if (a.k != k) throw Error(ErrorCode::InvalidArgument, "atomic type arity differs from k");
  if (!store) store = std::make_shared<FormulaStore>();
  int root = atomic_type_node(*store, a, rho);
  return {store, root, k};
}

// ---- guarded fragment ----

namespace detail {

inline void flatten_and(const FormulaStore& st, int id, std::vector<int>& out) {
  const Node& x = st.node(id);
  if (x.op == Op::And) {
    flatten_and(st, x.l, out);
    flatten_and(st, x.r, out);
  } else {
    out.push_back(id);
  }
}

class Gtc3Checker {
 public:
  explicit Gtc3Checker(const FormulaStore& st) : st_(st) {}

  bool check(int id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    bool r = compute(id);
    memo_[id] = r;
    return r;
  }

 private:
  bool compute(int id) {
    const Node& x = st_.node(id);
    switch (x.op) {
      case Op::Eq: return x.a < 3 && x.b < 3;
      case Op::Rank:
      case Op::Attr: return x.b < 3;
      case Op::Adj: return false;
      case Op::Not: return check(x.l);
      case Op::And: return std::popcount(x.free) <= 1 && check(x.l) && check(x.r);
      case Op::Exists: return x.a < 3 && x.b < 3 && exists_ok(x);
    }
    return false;
  }

  bool is_adj(int id, Nbr rel, int u, int v) const {
    const Node& n = st_.node(id);
    return n.op == Op::Adj && n.rel == rel && n.a == u && n.b == v;
  }
  // Guard atom between u and v: the literal orientation (adj rel u v) or the semantic one (adj rel v u).
  bool guard(int id, Nbr rel, int u, int v) const { return is_adj(id, rel, u, v) || is_adj(id, rel, v, u); }
  bool is_eq(int id, int u, int v) const {
    const Node& n = st_.node(id);
    return n.op == Op::Eq && ((n.a == u && n.b == v) || (n.a == v && n.b == u));
  }

  bool rest_ok(const std::vector<int>& parts, const std::vector<char>& used, int y, int z) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (used[i]) continue;
      const std::uint32_t f = st_.node(parts[i]).free;
      if ((f & ~FormulaStore::bit(y)) != 0 && (f & ~FormulaStore::bit(z)) != 0) return false;
      if (!check(parts[i])) return false;
    }
    return true;
  }

  bool exists_ok(const Node& q) {
    const int y0 = q.a, z0 = q.b;
    const std::uint32_t xm = 0b111u & ~(FormulaStore::bit(y0) | FormulaStore::bit(z0));
    if (std::popcount(xm) != 1) return false;
    const int x = std::countr_zero(xm);
    std::vector<int> parts;
    flatten_and(st_, q.l, parts);

    // y = z with a boundary or coboundary guard
    for (std::size_t e = 0; e < parts.size(); ++e) {
      if (!is_eq(parts[e], y0, z0)) continue;
      for (int y : {y0, z0})
        for (Nbr rel : {Nbr::B, Nbr::C})
          for (std::size_t g = 0; g < parts.size(); ++g) {
            if (g == e || !guard(parts[g], rel, y, x)) continue;
            std::vector<char> used(parts.size(), 0);
            used[e] = used[g] = 1;
            if (rest_ok(parts, used, y0, z0)) return true;
          }
      // Unguarded diagonal in a sentence: the opening move with no pebble placed.
      if (q.free == 0) {
        std::vector<char> used(parts.size(), 0);
        used[e] = 1;
        if (rest_ok(parts, used, y0, z0)) return true;
      }
    }
    // E^{N1}(y,x), E^{N2}(z,x), E^{N2}(z,y) with (N1,N2) in {(down,B),(up,C)}
    for (auto [n1, n2] : {std::pair{Nbr::Down, Nbr::B}, std::pair{Nbr::Up, Nbr::C}})
      for (auto [y, z] : {std::pair{y0, z0}, std::pair{z0, y0}}) {
        int g1 = -1, g2 = -1, g3 = -1;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          if (g1 < 0 && guard(parts[i], n1, y, x))
            g1 = int(i);
          else if (g2 < 0 && guard(parts[i], n2, z, x))
            g2 = int(i);
          else if (g3 < 0 && guard(parts[i], n2, z, y))
            g3 = int(i);
        }
        if (g1 < 0 || g2 < 0 || g3 < 0) continue;
        std::vector<char> used(parts.size(), 0);
        used[std::size_t(g1)] = used[std::size_t(g2)] = used[std::size_t(g3)] = 1;
        if (rest_ok(parts, used, y, z)) return true;
      }
    return false;
  }

  const FormulaStore& st_;
  std::unordered_map<int, bool> memo_;
};

}  // namespace detail

// True iff f is generated by the guarded three-variable production rules.
inline bool is_guarded_gtc3(const Formula& f) {
  if (f.k != 3) return false;
  return detail::Gtc3Checker(*f.store).check(f.root);
}

}  // namespace ccwl
