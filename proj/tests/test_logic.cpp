#include <doctest.h>

#include "ccwl/atomic_type.hpp"
#include "ccwl/fixtures.hpp"
#include "ccwl/oracles.hpp"
#include "ccwl/random.hpp"
#include "ccwl/synthesis.hpp"
#include "helpers.hpp"

using namespace ccwl;

namespace {

ErrorCode parse_error(const std::string& text, int k) {
  try {
    parse_formula(text, k);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::vector<std::vector<int>> all_tuples(int n, int k) {
  std::vector<std::vector<int>> out;
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= std::size_t(n);
  for (std::size_t idx = 0; idx < total; ++idx) out.push_back(ref::decode(idx, n, k));
  return out;
}

}  // namespace

TEST_CASE("parser and printer") {
  Formula f = parse_formula("(eq x1 x2)", 2);
  CHECK(to_string(f) == "(eq x1 x2)");
  CHECK(free_vars(f) == std::vector<int>{1, 2});
  CHECK(quantifier_depth(f) == 0);
  Formula g = parse_formula("(exists 3 (x1 x2) (eq x1 x2))", 2);
  CHECK(free_vars(g).empty());
  CHECK(quantifier_depth(g) == 1);
  Formula phi = parse_formula(fixtures::four_cycle_formula(), 4);
  CHECK(free_vars(phi).empty());
  CHECK(quantifier_depth(phi) == 2);
  CHECK(to_string(parse_formula(to_string(phi), 4)) == to_string(phi));
  Formula spaced = parse_formula("# comment\n(and   (rank 1 x1)\n (not (attr 1 x2)))", 2);
  CHECK(to_string(spaced) == "(and (rank 1 x1) (not (attr 1 x2)))");
  CHECK(to_string(parse_formula("(adj B x1 x2)", 2)) == "(adj B x1 x2)");
}

TEST_CASE("parser rejects malformed input") {
  CHECK(parse_error("(exists 1 (x1 x1) (eq x1 x2))", 2) == ErrorCode::Parse);
  CHECK(parse_error("(eq x1 x3)", 2) == ErrorCode::Parse);
  CHECK(parse_error("(eq x1 x2", 2) == ErrorCode::Parse);
  CHECK(parse_error("(adj left x1 x2)", 2) == ErrorCode::Parse);
  CHECK(parse_error("(exists -1 (x1 x2) (eq x1 x2))", 2) == ErrorCode::Parse);
  CHECK(parse_error("(eq x0 x1)", 2) == ErrorCode::Parse);
  CHECK(parse_error("(eq x1 x2) (eq x1 x2)", 2) == ErrorCode::Parse);
  try {
    parse_formula("(and (eq x1 x2) (bogus))", 2);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
}

TEST_CASE("triangle formula on the lifted cycles") {
  ACC c6 = lift_graph(fixtures::cycle6());
  ACC tt = lift_graph(fixtures::two_triangles());
  Formula phi = parse_formula(fixtures::triangle_formula(), 4);
  Formula phi12 = parse_formula(fixtures::triangle_formula_12(), 4);
  CHECK_FALSE(evaluate(c6, {}, phi));
  CHECK(evaluate(tt, {}, phi));
  CHECK_FALSE(evaluate(c6, {}, phi12));
  CHECK(evaluate(tt, {}, phi12));
  CHECK(count_pairs(tt, {}, phi12) == 12);
  CHECK(count_pairs(c6, {}, phi12) == 0);
  CHECK_FALSE(evaluate(tt, {}, parse_formula(std::string("(exists 13 (x1 x2) ") + fixtures::triangle_body() + ")", 4)));
}

TEST_CASE("four-cycle formula on the bridged pair") {
  ACC a = lift_graph(fixtures::figure_a());
  ACC b = lift_graph(fixtures::figure_b());
  Formula phi = parse_formula(fixtures::four_cycle_formula(), 4);
  CHECK(evaluate(a, {}, phi));
  CHECK_FALSE(evaluate(b, {}, phi));
  CHECK(count_pairs(a, {}, phi) == 16);
  CHECK(count_pairs(b, {}, phi) == 0);
}

TEST_CASE("counting semantics") {
  ACC c6 = lift_graph(fixtures::cycle6());
  // ordered pairs over X^2 including the diagonal
  CHECK(count_pairs(c6, {}, parse_formula("(exists 1 (x1 x2) (eq x1 x2))", 2)) == 12);
  CHECK(count_pairs(c6, {}, parse_formula("(exists 1 (x1 x2) (not (eq x1 x2)))", 2)) == 132);
  CHECK(evaluate(c6, {}, parse_formula("(exists 0 (x1 x2) (not (eq x1 x1)))", 2)));
  CHECK(count_pairs(c6, {}, parse_formula("(exists 1 (x1 x2) (adj B x1 x2))", 2)) == 12);
  CHECK(count_pairs(c6, {}, parse_formula("(exists 1 (x1 x2) (adj down x1 x2))", 2)) == 12);
  CHECK(count_pairs(c6, {}, parse_formula("(exists 1 (x1 x2) (adj up x1 x2))", 2)) == 12);
  // (adj B x1 x2) binds x2 into the boundary of x1
  Formula bnd = parse_formula("(adj B x1 x2)", 2);
  CHECK(evaluate(c6, {6, 0}, bnd));
  CHECK_FALSE(evaluate(c6, {0, 6}, bnd));
  CHECK(evaluate(c6, {0, 6}, parse_formula("(adj C x1 x2)", 2)));
  CHECK(evaluate(c6, {0, 0}, parse_formula("(rank 0 x1)", 2)));
  CHECK(evaluate(c6, {6, 0}, parse_formula("(attr 1 x1)", 2)));
  bool threw = false;
  try {
    evaluate(c6, {0}, parse_formula("(eq x1 x2)", 2));
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::InvalidArgument;
  }
  CHECK(threw);
}

TEST_CASE("counting thresholds are monotone") {
  ACC a = lift_graph(fixtures::figure_a());
  const std::string body = "(and (rank 1 x1) (adj up x1 x2))";
  long long c = count_pairs(a, {}, parse_formula("(exists 1 (x1 x2) " + body + ")", 2));
  for (long long n = 0; n <= c + 2; ++n) {
    const bool holds = evaluate(a, {}, parse_formula("(exists " + std::to_string(n) + " (x1 x2) " + body + ")", 2));
    CHECK(holds == (n <= c));
  }
}

TEST_CASE("atomic type formulas characterize their type") {
  for (const ACC& g : {lift_graph(fixtures::figure_a()), fixtures::nonuniform_a(), add_anchor(fixtures::nonuniform_b())}) {
    const int k = 2;
    auto tuples = all_tuples(g.size(), k);
    std::vector<AtomicType> types;
    for (const auto& t : tuples) types.push_back(atomic_type(g, t));
    for (std::size_t i = 0; i < tuples.size(); i += 3) {
      Formula f = atomic_type_formula(types[i], k, g.rho());
      CHECK(quantifier_depth(f) == 0);
      for (std::size_t j = 0; j < tuples.size(); ++j) CHECK(evaluate(g, tuples[j], f) == (types[j] == types[i]));
    }
  }
  ACC a = lift_graph(fixtures::figure_a());
  Formula ce = atomic_type_formula(atomic_type(a, {0, 8}), 2, a.rho());
  const std::string text = to_string(ce);
  CHECK(text.find("(rank 0 x1)") != std::string::npos);
  CHECK(text.find("(rank 1 x2)") != std::string::npos);
  CHECK(text.find("(not (eq x1 x2))") != std::string::npos);
  Formula diag = atomic_type_formula(atomic_type(a, {3, 3}), 2, a.rho());
  CHECK(to_string(diag).find("(eq x1 x2)") != std::string::npos);
}

TEST_CASE("guarded fragment recognizer") {
  CHECK(is_guarded_gtc3(parse_formula("(eq x1 x2)", 3)));
  CHECK_FALSE(is_guarded_gtc3(parse_formula("(exists 1 (x1 x2) (adj up x1 x2))", 3)));
  // lower adjacency case: y lower adjacent to x, z in the boundary of both
  const char* lower =
      "(exists 2 (x2 x3) (and (rank 1 x2) (and (rank 0 x3) (and (adj down x1 x2) (and (adj B x1 x3) (adj B x2 x3))))))";
  CHECK(is_guarded_gtc3(parse_formula(lower, 3)));
  const char* upper = "(exists 1 (x2 x3) (and (adj up x1 x2) (and (adj C x1 x3) (adj C x2 x3))))";
  CHECK(is_guarded_gtc3(parse_formula(upper, 3)));
  CHECK(is_guarded_gtc3(parse_formula("(exists 1 (x2 x3) (and (eq x2 x3) (and (adj B x1 x2) (rank 0 x2))))", 3)));
  CHECK(is_guarded_gtc3(parse_formula("(exists 1 (x2 x3) (and (eq x2 x3) (adj C x1 x3)))", 3)));
  CHECK_FALSE(is_guarded_gtc3(parse_formula("(exists 1 (x2 x3) (and (eq x2 x3) (adj up x1 x3)))", 3)));
  CHECK_FALSE(is_guarded_gtc3(parse_formula("(adj B x1 x2)", 3)));
  CHECK_FALSE(is_guarded_gtc3(parse_formula("(eq x1 x2)", 4)));
  CHECK_FALSE(is_guarded_gtc3(parse_formula("(exists 1 (x2 x3) (and (adj down x1 x2) (adj B x1 x3)))", 3)));
}

TEST_CASE("separators from refinement divergence") {
  ACC a = lift_graph(fixtures::figure_a()), b = lift_graph(fixtures::figure_b());
  RefinementTrace tr = refine(a, &b, 2);
  Synthesizer syn({&a, &b}, tr);
  Formula s = syn.separate_complexes();
  CHECK(evaluate(a, {}, s));
  CHECK_FALSE(evaluate(b, {}, s));
  CHECK(quantifier_depth(s) <= *tr.first_divergence + 1);

  ACC c6 = lift_graph(fixtures::cycle6()), tt = lift_graph(fixtures::two_triangles());
  RefinementTrace t2 = refine(c6, &tt, 2);
  Formula s2 = Synthesizer({&c6, &tt}, t2).separate_complexes();
  CHECK(evaluate(c6, {}, s2) != evaluate(tt, {}, s2));

  RefinementTrace same = refine(c6, &c6, 2);
  bool threw = false;
  try {
    Synthesizer({&c6, &c6}, same).separate_complexes();
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::NoSeparator;
  }
  CHECK(threw);
}

TEST_CASE("tuple separators have depth at most the divergence round") {
  Rng rng(21);
  int checked = 0;
  for (int i = 0; i < 30; ++i) {
    auto [a, b] = random_acc_pair(rng, 6);
    for (int k = 1; k <= 2; ++k) {
      RefinementTrace tr = refine(a, &b, k);
      Synthesizer syn({&a, &b}, tr, {true});
      auto ta = all_tuples(a.size(), k), tb = all_tuples(b.size(), k);
      for (std::size_t x = 0; x < ta.size(); x += 2)
        for (std::size_t y = 0; y < tb.size(); y += 3) {
          const std::size_t ix = ref::encode(ta[x], a.size()), iy = ref::encode(tb[y], b.size());
          int first = -1;
          for (int t = 0; t <= tr.last_round() && first < 0; ++t)
            if (tr.color(0, t, ix) != tr.color(1, t, iy)) first = t;
          if (first < 0) continue;
          Formula f = syn.separate_tuples(0, ta[x], 1, tb[y]);
          CHECK(quantifier_depth(f) <= first);
          CHECK(evaluate(a, ta[x], f));
          CHECK_FALSE(evaluate(b, tb[y], f));
          if (k == 1) CHECK(is_guarded_gtc3(f));
          ++checked;
        }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("whole-complex sentences at k = 1 are guarded") {
  Rng rng(22);
  int seen = 0;
  for (int i = 0; i < 40; ++i) {
    auto [a, b] = random_acc_pair(rng, 7);
    RefinementTrace tr = refine(a, &b, 1);
    if (!tr.first_divergence) continue;
    Formula s = Synthesizer({&a, &b}, tr).separate_complexes();
    CHECK(is_guarded_gtc3(s));
    CHECK(evaluate(a, {}, s));
    CHECK_FALSE(evaluate(b, {}, s));
    ++seen;
  }
  CHECK(seen > 5);
}

TEST_CASE("evaluation is invariant under isomorphism") {
  Rng rng(23);
  Formula phi = parse_formula(fixtures::four_cycle_body(), 4);
  Formula psi = parse_formula("(exists 2 (x3 x4) (and (adj up x1 x3) (adj B x4 x2)))", 4);
  for (int i = 0; i < 15; ++i) {
    ACC a = random_uniform_acc(rng, 7);
    ACC b = permuted_copy(a, rng);
    IsoOptions strict;
    strict.strict = true;
    auto f = cc_isomorphism(a, b, strict);
    REQUIRE(f.has_value());
    for (int x = 0; x < a.size(); ++x)
      for (int y = 0; y < a.size(); ++y) {
        std::vector<int> mu{x, y}, nu{(*f)[std::size_t(x)], (*f)[std::size_t(y)]};
        CHECK(evaluate(a, mu, phi) == evaluate(b, nu, phi));
        CHECK(evaluate(a, mu, psi) == evaluate(b, nu, psi));
      }
  }
}
