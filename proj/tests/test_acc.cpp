#include <doctest.h>

#include "ccwl/fixtures.hpp"
#include "ccwl/io.hpp"
#include "ccwl/random.hpp"
#include "helpers.hpp"

using namespace ccwl;

namespace {

ACC small_complex() {
  // a filled triangle with one dangling edge
  return ACC(4, 1,
             {{{0}, 0, "0"},
              {{1}, 0, "0"},
              {{2}, 0, "1"},
              {{3}, 0, "0"},
              {{0, 1}, 1, "0"},
              {{1, 2}, 1, "0"},
              {{0, 2}, 1, "0"},
              {{2, 3}, 1, "1"},
              {{0, 1, 2}, 2, "0"}});
}

template <class F>
ErrorCode code_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("neighborhoods agree with the set definitions") {
  Rng rng(7);
  std::vector<ACC> samples{small_complex(), lift_graph(fixtures::figure_a()), add_anchor(small_complex())};
  for (int i = 0; i < 40; ++i) samples.push_back(random_uniform_acc(rng, 8));
  for (const ACC& g : samples)
    for (int x = 0; x < g.size(); ++x)
      for (int y = 0; y < g.size(); ++y)
        for (int kind = 0; kind < 4; ++kind)
          CHECK(g.in(y, Nbr(kind), x) == ref::in_nbr(g, kind, x, y));
}

TEST_CASE("neighborhoods of the filled triangle") {
  ACC g = small_complex();
  CHECK(g.neighbors(8, Nbr::B) == std::vector<int>{4, 5, 6});
  CHECK(g.neighbors(4, Nbr::C) == std::vector<int>{8});
  CHECK(g.neighbors(4, Nbr::Down) == std::vector<int>{5, 6});
  CHECK(g.neighbors(4, Nbr::Up) == std::vector<int>{5, 6});
  CHECK(g.neighbors(7, Nbr::Up).empty());
  CHECK(g.neighbors(0, Nbr::Up) == std::vector<int>{1, 2});
  CHECK(g.neighbors(3, Nbr::Up) == std::vector<int>{2});
  CHECK(g.rho() == 2);
}

TEST_CASE("validation names the violated invariant") {
  CHECK(code_of([] { ACC(2, 0, {{{0}, 0, ""}}); }) == ErrorCode::Validation);
  CHECK(code_of([] { ACC(2, 0, {{{0}, 0, ""}, {{1}, 0, ""}, {{1, 0}, 1, ""}}); }) == ErrorCode::Validation);
  CHECK(code_of([] { ACC(2, 0, {{{0}, 0, ""}, {{1}, 0, ""}, {{0, 1}, 1, ""}, {{0, 1}, 2, ""}}); }) ==
        ErrorCode::Validation);
  CHECK(code_of([] { ACC(2, 1, {{{0}, 0, "0"}, {{1}, 0, "2"}}); }) == ErrorCode::Validation);
  CHECK(code_of([] { ACC(2, 1, {{{0}, 0, "0"}, {{1}, 0, "00"}}); }) == ErrorCode::Validation);
  // rank must not drop along inclusion
  CHECK(code_of([] { ACC(2, 0, {{{0}, 2, ""}, {{1}, 0, ""}, {{0, 1}, 1, ""}}); }) == ErrorCode::Validation);
  try {
    ACC(3, 0, {{{0}, 0, ""}, {{1}, 0, ""}});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing singleton cell for vertex 2") != std::string::npos);
  }
}

TEST_CASE("graph lifting") {
  ACC c6 = lift_graph(fixtures::plain_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}}));
  CHECK(c6.size() == 12);
  CHECK(c6.ell() == 1);
  CHECK(c6.cell(6).vertices == std::vector<int>{0, 1});
  CHECK(c6.cell(6).attr == "1");
  CHECK(c6.cell(0).attr == "0");
  CHECK(c6.neighbors(6, Nbr::Down).size() == 2);
  CHECK(c6.neighbors(0, Nbr::Up).size() == 2);
  CHECK(code_of([] { lift_graph(fixtures::plain_graph(2, {{0, 0}})); }) == ErrorCode::Validation);
  CHECK(code_of([] { lift_graph(fixtures::plain_graph(2, {{0, 1}, {1, 0}})); }) == ErrorCode::Validation);
}

TEST_CASE("anchor construction") {
  ACC g = small_complex();
  ACC a = add_anchor(g);
  REQUIRE(a.anchor_vertex());
  CHECK(*a.anchor_vertex() == 4);
  CHECK(a.size() == g.size() + 1 + 4);
  CHECK(a.ell() == 3);
  auto star = a.find_cell({4});
  REQUIRE(star);
  CHECK(a.cell(*star).attr == "010");
  auto spoke = a.find_cell({2, 4});
  REQUIRE(spoke);
  CHECK(a.cell(*spoke).rank == 1);
  CHECK(a.cell(*spoke).attr == "001");
  CHECK(a.cell(2).attr == "100");
  // a* is upper adjacent to every original 0-cell
  for (int v = 0; v < 4; ++v) CHECK(a.in(*star, Nbr::Up, v));
  CHECK(code_of([&] { add_anchor(a); }) == ErrorCode::InvalidState);
}

TEST_CASE("uniformity and base distance") {
  ACC g = small_complex();
  CHECK(is_uniform(g).uniform);
  CHECK(base_distance(g, 0) == 0);
  CHECK(base_distance(g, 4) == 1);
  CHECK(base_distance(g, 8) == 2);
  ACC na = fixtures::nonuniform_a();
  auto u = is_uniform(na);
  CHECK_FALSE(u.uniform);
  CHECK(u.witness == 9);
  CHECK_FALSE(base_distance(na, 9).has_value());
  ACC anchored = add_anchor(g);
  CHECK(base_distance(anchored, *anchored.find_cell({4})) == 1);
}

TEST_CASE("document round trips and hashes") {
  ACC g = add_anchor(small_complex());
  ACC back = acc_from_json(json::parse(acc_to_json(g).dump()));
  CHECK(acc_to_json(back) == acc_to_json(g));
  CHECK(back.anchor_vertex() == g.anchor_vertex());
  Graph h = graph_from_json(graph_to_json(fixtures::figure_b()));
  CHECK(h.edges == fixtures::figure_b().edges);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(code_of([] { acc_from_json(json{{"version", 2}}); }) == ErrorCode::Validation);
  CHECK(code_of([] { acc_from_json(json{{"version", 1}, {"cells", 3}}); }) == ErrorCode::Validation);
}

TEST_CASE("bundled fixtures match the in-code versions") {
  const std::string dir = CCWL_DATA_DIR;
  CHECK(acc_to_json(load_acc_file(dir + "/figure2_A.json").acc) == acc_to_json(lift_graph(fixtures::figure_a())));
  CHECK(acc_to_json(load_acc_file(dir + "/figure2_B.json").acc) == acc_to_json(lift_graph(fixtures::figure_b())));
  CHECK(acc_to_json(load_acc_file(dir + "/nonuniform_A.json").acc) == acc_to_json(fixtures::nonuniform_a()));
  CHECK(load_acc_file(dir + "/c6.json").lifted);
}
