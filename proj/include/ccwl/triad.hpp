#pragma once

#include <string>
#include <vector>

#include "ccwl/game.hpp"
#include "ccwl/oracles.hpp"
#include "ccwl/synthesis.hpp"

namespace ccwl {

struct Caps {
  std::size_t cells = 10;       // isomorphism oracle
  std::size_t exhaustive = 12;  // |X|^2 for exhaustive games
  std::size_t logic = 5;        // cells for the bounded logic oracle
  int depth = 2;                // bounded logic depth
  double max_formula_nodes = 2e5;  // printing limit for formulas (expanded tree size)
};

// Parses "cells=10,exhaustive=12,logic=5,depth=2" on top of the given caps.
inline Caps parse_caps(const std::string& text, Caps caps = {}) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "bad caps entry '" + item + "'");
    std::string key = item.substr(0, eq);
    long long v;
    try {
      v = std::stoll(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad caps value in '" + item + "'");
    }
    if (v < 1) throw Error(ErrorCode::InvalidArgument, "caps must be at least 1");
    if (key == "cells")
      caps.cells = std::size_t(v);
    else if (key == "exhaustive")
      caps.exhaustive = std::size_t(v);
    else if (key == "logic")
      caps.logic = std::size_t(v);
    else if (key == "depth")
      caps.depth = int(v);
    else
      throw Error(ErrorCode::InvalidArgument, "unknown caps key '" + key + "'");
  }
  return caps;
}

inline std::string formula_text(const Formula& f, const Caps& caps) {
  const double size = tree_size(*f.store, f.root);
  if (size > caps.max_formula_nodes)
    return "(omitted: " + std::to_string(static_cast<long long>(size)) + " nodes)";
  return to_string(f);
}

struct LegResult {
  std::string status = "Skipped";  // Equivalent, Distinguished, Inconclusive or Skipped
  std::string detail;
  json artifact;
};

struct TriadReport {
  int k = 1;
  LegResult refinement, game, logic;
  bool per_round_ok = true;
  std::vector<std::string> problems;
  bool consistent() const { return problems.empty(); }
};

inline json leg_json(const LegResult& l) {
  json j{{"status", l.status}};
  if (!l.detail.empty()) j["detail"] = l.detail;
  if (!l.artifact.is_null()) j["artifact"] = l.artifact;
  return j;
}

inline json triad_json(const TriadReport& r) {
  json j;
  j["k"] = r.k;
  j["result"] = r.consistent() ? "CONSISTENT" : "INCONSISTENT";
  j["refinement"] = leg_json(r.refinement);
  j["game"] = leg_json(r.game);
  j["logic"] = leg_json(r.logic);
  j["per_round"] = r.per_round_ok;
  if (!r.problems.empty()) j["problems"] = r.problems;
  return j;
}

// Whole-complex triad on the complexes as given: refinement, the (k+2)-pebble game and logic.
inline TriadReport run_triad(const ACC& a, const ACC& b, int k, const Caps& caps = {},
                             StepRules rules = StepRules::Restricted) {
  TriadReport rep;
  rep.k = k;
  RefinementTrace tr = refine(a, &b, k);
  auto rel = signature_relation(tr);
  if (!rel) {
    rep.refinement.status = "Inconclusive";
  } else {
    rep.refinement.status = *rel == Relation::Equal ? "Equivalent" : "Distinguished";
    rep.refinement.detail = relation_name(*rel);
  }
  rep.refinement.artifact = {{"stable_round", tr.stable_round}};
  if (tr.first_divergence) rep.refinement.artifact["first_divergence"] = *tr.first_divergence;

  // game leg
  if (k <= 2) {
    GameOptions go;
    go.setup.k = k;
    go.setup.guarded = k == 1;
    go.setup.rules = rules;
    GameSolver solver(a, b, go);
    StrategyResult res = solver.solve();
    rep.game.status = res.winner == Player::I ? "Distinguished" : "Equivalent";
    rep.game.detail = std::string(player_name(res.winner)) + " within " + std::to_string(res.rounds_checked) + " rounds";
    rep.game.artifact = trace_to_json(res, "", "");
    if (res.winner == Player::I) {
      try {
        ReplayOutcome out = replay_trace(a, b, res.setup, res.trace, Player::I);
        if (!out.valid) rep.problems.push_back("game certificate does not replay: " + out.message);
      } catch (const Error& e) {
        rep.problems.push_back(std::string("game certificate rejected: ") + e.what());
      }
    }
    // survival for r rounds <=> signatures equal at round r - 1
    for (int r = 1; r <= solver.default_budget(); ++r) {
      const bool survives = !solver.spoiler_wins(r);
      const bool equal = tr.signature(0, r - 1) == tr.signature(1, r - 1);
      if (survives != equal) {
        rep.per_round_ok = false;
        rep.problems.push_back("round " + std::to_string(r) + ": game and colors disagree");
      }
    }
  } else {
    rep.game.detail = "whole-complex games need k <= 2";
  }

  // logic leg
  if (rep.refinement.status == "Distinguished" && k <= 2) {
    try {
      Synthesizer syn({&a, &b}, tr);
      Formula f = syn.separate_complexes();
      rep.logic.status = "Distinguished";
      rep.logic.detail = "verified sentence of depth " + std::to_string(quantifier_depth(f));
      rep.logic.artifact = {{"formula", formula_text(f, caps)}, {"depth", quantifier_depth(f)}};
      if (quantifier_depth(f) > *tr.first_divergence + 1)
        rep.problems.push_back("separating sentence deeper than the divergence round allows");
    } catch (const Error& e) {
      rep.logic.status = "Inconclusive";
      rep.logic.detail = e.what();
    }
  } else if (rep.refinement.status == "Equivalent") {
    if (std::size_t(a.size()) <= caps.logic && std::size_t(b.size()) <= caps.logic) {
      LogicOptions lo;
      lo.k = k;
      lo.depth = std::min(caps.depth, 2);
      lo.cap = caps.logic;
      lo.guarded = k == 1;
      LogicResult lr = bounded_logic_equivalent(a, {}, b, {}, lo);
      rep.logic.status = lr.equivalent ? "Equivalent" : "Distinguished";
      rep.logic.detail = "bounded depth " + std::to_string(lo.depth);
      if (lr.distinguisher) rep.logic.artifact = {{"formula", formula_text(*lr.distinguisher, caps)}};
    } else {
      rep.logic.detail = "complexes exceed the logic cap";
    }
  } else {
    rep.logic.detail = "no separating sentence for k > 2";
  }

  auto decided = [](const LegResult& l) { return l.status == "Equivalent" || l.status == "Distinguished"; };
  const LegResult* legs[3] = {&rep.refinement, &rep.game, &rep.logic};
  const char* names[3] = {"refinement", "game", "logic"};
  for (int i = 0; i < 3; ++i) {
    if (legs[i]->status == "Inconclusive") rep.problems.push_back(std::string(names[i]) + " leg is inconclusive");
    for (int j = i + 1; j < 3; ++j)
      if (decided(*legs[i]) && decided(*legs[j]) && legs[i]->status != legs[j]->status)
        rep.problems.push_back(std::string(names[i]) + " and " + names[j] + " legs disagree");
  }
  return rep;
}

}  // namespace ccwl
