#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ccwl/io.hpp"
#include "ccwl/kwl.hpp"
#include "ccwl/random.hpp"
#include "ccwl/triad.hpp"

using namespace ccwl;

namespace {

constexpr int kExitEqual = 0;
constexpr int kExitDistinguished = 1;
constexpr int kExitError = 2;

struct RunConfig {
  int k = 1;
  std::optional<int> max_rounds;
  bool no_anchor = false;
  std::string mode = "canonical";
  std::string rules = "restricted";
  std::string caps_text;
  std::string out;
  bool timing = false;
  std::uint64_t seed = kDefaultSeed;
};

// Bare fixture names such as figure2_A resolve to the bundled data directory.
std::string resolve(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::exists(path)) return path;
  for (const std::string& cand : {path + ".json", std::string(CCWL_DATA_DIR) + "/" + path,
                                  std::string(CCWL_DATA_DIR) + "/" + path + ".json"})
    if (fs::exists(cand)) return cand;
  return path;
}

LoadedACC load(const std::string& path) { return load_acc_file(resolve(path)); }

Caps load_caps(const RunConfig& cfg) {
  Caps caps;
  if (const char* env = std::getenv("CCWL_CAPS")) caps = parse_caps(env, caps);
  return parse_caps(cfg.caps_text, caps);
}

void emit(const RunConfig& cfg, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (cfg.out.empty())
    std::cout << text;
  else
    write_file(cfg.out, text);
}

std::vector<int> parse_tuple(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad tuple '" + s + "'");
    }
  }
  return out;
}

StepRules parse_rules(const std::string& s) {
  if (s == "restricted") return StepRules::Restricted;
  if (s == "as-written") return StepRules::AsWritten;
  throw Error(ErrorCode::InvalidArgument, "rules must be restricted or as-written");
}

SolverMode parse_mode(const std::string& s) {
  if (s == "canonical") return SolverMode::Canonical;
  if (s == "exhaustive") return SolverMode::Exhaustive;
  throw Error(ErrorCode::InvalidArgument, "mode must be canonical or exhaustive");
}

json rounds_json(const RefinementTrace& tr) {
  json rounds = json::array();
  for (int t = 0; t <= tr.last_round(); ++t) {
    json r{{"round", t}, {"classes", tr.at(t).classes}};
    json hist = json::array();
    for (std::size_t s = 0; s < tr.rounds[0].colors.size(); ++s) {
      json h = json::array();
      for (auto [c, m] : tr.signature(s, t)) h.push_back({c, m});
      hist.push_back(h);
    }
    r["signatures"] = hist;
    rounds.push_back(r);
  }
  return rounds;
}

json trace_doc(const RefinementTrace& tr, const RunConfig& cfg) {
  json j;
  j["k"] = tr.k;
  j["method"] = tr.method == Method::Ccwl1 ? "ccwl" : "k-ccwl";
  j["stable"] = tr.stable;
  j["stable_round"] = tr.stable_round;
  j["joint_tuples"] = tr.joint_tuples;
  j["within_bound"] = within_termination_bound(tr);
  if (tr.first_divergence) j["first_divergence"] = *tr.first_divergence;
  j["rounds"] = rounds_json(tr);
  if (cfg.timing) j["seconds"] = tr.seconds;
  return j;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Equal: return kExitEqual;
    case Verdict::Disjoint:
    case Verdict::PartialOverlap: return kExitDistinguished;
    case Verdict::Inconclusive: return kExitError;
  }
  return kExitError;
}

int cmd_lift(const std::string& in, const RunConfig& cfg) {
  emit(cfg, acc_to_json(lift_graph(load_graph_file(resolve(in)))));
  return 0;
}

int cmd_anchor(const std::string& in, const RunConfig& cfg) {
  emit(cfg, acc_to_json(add_anchor(load(in).acc)));
  return 0;
}

int cmd_refine(const std::string& fa, const std::string& fb, const RunConfig& cfg) {
  RefineOptions opt;
  opt.max_rounds = cfg.max_rounds;
  json doc{{"version", 1}, {"kind", "ccwl-refinement"}};
  if (fb.empty()) {
    LoadedACC a = load(fa);
    ACC x = cfg.no_anchor || a.acc.anchor_vertex() ? a.acc : add_anchor(a.acc);
    doc["inputs"] = {{"a", a.hash}};
    doc["anchored"] = !cfg.no_anchor;
    doc["trace"] = trace_doc(refine(x, nullptr, cfg.k, opt), cfg);
    emit(cfg, doc);
    return 0;
  }
  LoadedACC a = load(fa), b = load(fb);
  PairTrace pt = refine_to_stable(a.acc, b.acc, cfg.k, !cfg.no_anchor, opt);
  doc["inputs"] = {{"a", a.hash}, {"b", b.hash}};
  doc["anchored"] = !cfg.no_anchor;
  doc["warnings"] = pt.warnings;
  doc["verdict"] = verdict_name(verdict_of(pt.trace));
  doc["trace"] = trace_doc(pt.trace, cfg);
  emit(cfg, doc);
  return 0;
}

int cmd_compare(const std::string& fa, const std::string& fb, const RunConfig& cfg) {
  RefineOptions opt;
  opt.max_rounds = cfg.max_rounds;
  LoadedACC a = load(fa), b = load(fb);
  PairTrace pt = refine_to_stable(a.acc, b.acc, cfg.k, !cfg.no_anchor, opt);
  const Verdict v = verdict_of(pt.trace);
  json doc{{"version", 1}, {"kind", "ccwl-verdict"}};
  doc["inputs"] = {{"a", a.hash}, {"b", b.hash}};
  doc["k"] = cfg.k;
  doc["anchored"] = !cfg.no_anchor;
  doc["verdict"] = verdict_name(v);
  doc["first_divergence"] = pt.trace.first_divergence ? json(*pt.trace.first_divergence) : json(nullptr);
  doc["stable_round"] = pt.trace.stable_round;
  doc["joint_tuples"] = pt.trace.joint_tuples;
  if (!pt.warnings.empty()) doc["warnings"] = pt.warnings;
  if (cfg.timing) doc["seconds"] = pt.trace.seconds;
  emit(cfg, doc);
  return exit_for(v);
}

std::string formula_source(const std::string& arg) {
  if (!arg.empty() && arg.front() == '(') return arg;
  return read_file(arg);
}

int cmd_check(const std::string& ftext, const std::string& fa, const std::string& tuple, int vars,
              const RunConfig& cfg) {
  Formula f = parse_formula(formula_source(ftext), vars);
  LoadedACC a = load(fa);
  std::vector<int> mu = tuple.empty() ? std::vector<int>{} : parse_tuple(tuple);
  const bool value = evaluate(a.acc, mu, f);
  json doc{{"version", 1}, {"kind", "ccwl-check"}};
  doc["inputs"] = {{"a", a.hash}};
  doc["formula"] = to_string(f);
  doc["free_vars"] = free_vars(f);
  doc["depth"] = quantifier_depth(f);
  if (vars == 3) doc["guarded"] = is_guarded_gtc3(f);
  doc["value"] = value;
  emit(cfg, doc);
  return value ? 0 : 1;
}

int cmd_separate(const std::string& fa, const std::string& fb, const std::string& ta, const std::string& tb,
                 const RunConfig& cfg) {
  LoadedACC a = load(fa), b = load(fb);
  RefinementTrace tr = refine(a.acc, &b.acc, cfg.k);
  Synthesizer syn({&a.acc, &b.acc}, tr);
  json doc{{"version", 1}, {"kind", "ccwl-separator"}};
  doc["inputs"] = {{"a", a.hash}, {"b", b.hash}};
  doc["k"] = cfg.k;
  Formula f;
  if (ta.empty() != tb.empty()) throw Error(ErrorCode::InvalidArgument, "give both tuples or neither");
  if (ta.empty()) {
    f = syn.separate_complexes();
  } else {
    f = syn.separate_tuples(0, parse_tuple(ta), 1, parse_tuple(tb));
    doc["tuple_a"] = parse_tuple(ta);
    doc["tuple_b"] = parse_tuple(tb);
  }
  doc["formula"] = formula_text(f, load_caps(cfg));
  doc["depth"] = quantifier_depth(f);
  doc["free_vars"] = free_vars(f);
  doc["verified"] = true;
  emit(cfg, doc);
  return kExitDistinguished;
}

int cmd_game(const std::string& fa, const std::string& fb, int pebbles, std::optional<int> rounds, bool guarded,
             const std::string& ta, const std::string& tb, const RunConfig& cfg) {
  LoadedACC a = load(fa), b = load(fb);
  GameOptions opt;
  opt.setup.k = guarded ? 1 : pebbles - 2;
  opt.setup.guarded = guarded;
  opt.setup.rules = parse_rules(cfg.rules);
  opt.mode = parse_mode(cfg.mode);
  opt.rounds = rounds;
  opt.exhaustive_cap = load_caps(cfg).exhaustive;
  if (ta.empty() != tb.empty()) throw Error(ErrorCode::InvalidArgument, "give both tuples or neither");
  if (!ta.empty()) opt.setup.initial = std::make_pair(parse_tuple(ta), parse_tuple(tb));
  StrategyResult res = GameSolver(a.acc, b.acc, opt).solve();
  json doc = trace_to_json(res, a.hash, b.hash);
  if (res.winner == Player::I) {
    ReplayOutcome out = replay_trace(a.acc, b.acc, res.setup, res.trace, Player::I);
    doc["certificate_valid"] = out.valid;
  }
  emit(cfg, doc);
  return res.winner == Player::I ? kExitDistinguished : kExitEqual;
}

int cmd_replay(const std::string& fa, const std::string& fb, const std::string& ftrace, const RunConfig& cfg) {
  LoadedACC a = load(fa), b = load(fb);
  TraceDocument d = trace_from_json(json::parse(read_file(ftrace)));
  if (!d.hash_a.empty() && (d.hash_a != a.hash || d.hash_b != b.hash))
    throw Error(ErrorCode::CertificateInvalid, "trace was made for different inputs");
  ReplayOutcome out = replay_trace(a.acc, b.acc, d.result.setup, d.result.trace, d.result.winner);
  json doc{{"version", 1}, {"kind", "ccwl-replay"}};
  doc["inputs"] = {{"a", a.hash}, {"b", b.hash}};
  doc["claimed"] = player_name(d.result.winner);
  doc["valid"] = out.valid;
  doc["rounds"] = out.rounds;
  doc["message"] = out.message;
  emit(cfg, doc);
  return out.valid ? 0 : 1;
}

int cmd_triad(const std::string& fa, const std::string& fb, int random_n, const RunConfig& cfg) {
  const Caps caps = load_caps(cfg);
  const StepRules rules = parse_rules(cfg.rules);
  if (random_n > 0) {
    Rng rng(cfg.seed);
    int inconsistent = 0;
    json cases = json::array();
    for (int i = 0; i < random_n; ++i) {
      auto [a, b] = random_acc_pair(rng, 6);
      for (int k = 1; k <= 2; ++k) {
        TriadReport r = run_triad(a, b, k, caps, rules);
        if (!r.consistent()) {
          ++inconsistent;
          json c = triad_json(r);
          c["case"] = i;
          c["a"] = acc_to_json(a);
          c["b"] = acc_to_json(b);
          cases.push_back(c);
        }
      }
    }
    json doc{{"version", 1}, {"kind", "ccwl-triad-sweep"}, {"seed", cfg.seed}, {"pairs", random_n}};
    doc["rules"] = rules_name(rules);
    doc["inconsistent"] = inconsistent;
    doc["result"] = inconsistent == 0 ? "CONSISTENT" : "INCONSISTENT";
    doc["failures"] = cases;
    emit(cfg, doc);
    return inconsistent == 0 ? 0 : 1;
  }
  if (fb.empty()) throw Error(ErrorCode::InvalidArgument, "triad needs two inputs or --random");
  LoadedACC a = load(fa), b = load(fb);
  ACC x = a.acc, y = b.acc;
  if (!cfg.no_anchor) {
    if (!x.anchor_vertex()) x = add_anchor(x);
    if (!y.anchor_vertex()) y = add_anchor(y);
  }
  TriadReport r = run_triad(x, y, cfg.k, caps, rules);
  json doc{{"version", 1}, {"kind", "ccwl-triad"}};
  doc["inputs"] = {{"a", a.hash}, {"b", b.hash}};
  doc["anchored"] = !cfg.no_anchor;
  doc["rules"] = rules_name(rules);
  doc.update(triad_json(r));
  emit(cfg, doc);
  return r.consistent() ? 0 : 1;
}

int cmd_oracle(const std::string& which, const std::string& fa, const std::string& fb, bool strict, int pebbles,
               int rounds, bool committed, const std::string& ta, const std::string& tb, int depth,
               const RunConfig& cfg) {
  const Caps caps = load_caps(cfg);
  LoadedACC a = load(fa), b = load(fb);
  json doc{{"version", 1}, {"kind", "ccwl-oracle"}, {"oracle", which}};
  doc["inputs"] = {{"a", a.hash}, {"b", b.hash}};
  if (which == "iso") {
    IsoOptions opt;
    opt.strict = strict;
    opt.cap = caps.cells;
    auto f = cc_isomorphism(a.acc, b.acc, opt);
    doc["strict"] = strict;
    doc["isomorphic"] = f.has_value();
    if (f) doc["bijection"] = *f;
    emit(cfg, doc);
    return f ? kExitEqual : kExitDistinguished;
  }
  if (which == "logic") {
    LogicOptions opt;
    opt.k = cfg.k;
    opt.depth = depth;
    opt.cap = caps.logic;
    opt.max_depth = caps.depth;
    std::vector<int> ua = ta.empty() ? std::vector<int>{} : parse_tuple(ta);
    std::vector<int> ub = tb.empty() ? std::vector<int>{} : parse_tuple(tb);
    LogicResult r = bounded_logic_equivalent(a.acc, ua, b.acc, ub, opt);
    doc["k"] = cfg.k;
    doc["depth"] = depth;
    doc["equivalent"] = r.equivalent;
    if (r.distinguisher) doc["distinguisher"] = formula_text(*r.distinguisher, caps);
    emit(cfg, doc);
    return r.equivalent ? kExitEqual : kExitDistinguished;
  }
  if (which == "game") {
    ExhaustiveGameOptions opt;
    opt.pebbles = pebbles;
    opt.rounds = rounds;
    opt.free_indices = !committed;
    opt.rules = parse_rules(cfg.rules);
    opt.cap = caps.exhaustive;
    if (!ta.empty()) opt.initial = std::make_pair(parse_tuple(ta), parse_tuple(tb));
    Player p = exhaustive_game_value(a.acc, b.acc, opt);
    doc["pebbles"] = pebbles;
    doc["rounds"] = rounds;
    doc["winner"] = player_name(p);
    emit(cfg, doc);
    return p == Player::II ? kExitEqual : kExitDistinguished;
  }
  throw Error(ErrorCode::InvalidArgument, "oracle must be iso, logic or game");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial complex Weisfeiler-Leman toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string fa, fb, ftrace, ftext, tuple, ta, tb, which;
  int pebbles = 4, vars = 4, random_n = 0, depth = 2, game_rounds = 2;
  std::optional<int> rounds;
  bool guarded = false, strict = false, committed = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-o,--out", cfg.out, "Write the document to this file");
    sub->add_option("--caps", cfg.caps_text, "Size caps, e.g. cells=10,exhaustive=12,logic=5,depth=2");
  };
  auto add_k = [&](CLI::App* sub) {
    sub->add_option("-k", cfg.k, "Tuple arity")->check(CLI::PositiveNumber);
  };

  auto* lift = app.add_subcommand("lift", "Lift a graph to a 1-dimensional complex");
  lift->add_option("graph", fa)->required();
  add_common(lift);

  auto* anchor = app.add_subcommand("anchor", "Add the broadcast anchor");
  anchor->add_option("acc", fa)->required();
  add_common(anchor);

  auto* refine_cmd = app.add_subcommand("refine", "Run joint refinement and export the trace");
  refine_cmd->add_option("a", fa)->required();
  refine_cmd->add_option("b", fb);
  add_k(refine_cmd);
  refine_cmd->add_option("--max-rounds", cfg.max_rounds);
  refine_cmd->add_flag("--no-anchor", cfg.no_anchor);
  refine_cmd->add_flag("--timing", cfg.timing);
  add_common(refine_cmd);

  auto* compare = app.add_subcommand("compare", "Compare stable signatures");
  compare->add_option("a", fa)->required();
  compare->add_option("b", fb)->required();
  add_k(compare);
  compare->add_option("--max-rounds", cfg.max_rounds);
  compare->add_flag("--no-anchor", cfg.no_anchor);
  compare->add_flag("--timing", cfg.timing);
  add_common(compare);

  auto* check = app.add_subcommand("check", "Evaluate a formula on a complex");
  check->add_option("formula", ftext, "Formula text or file")->required();
  check->add_option("acc", fa)->required();
  check->add_option("--tuple", tuple, "Cells bound to x1, x2, ...");
  check->add_option("--vars", vars, "Number of variables")->check(CLI::PositiveNumber);
  add_common(check);

  auto* separate = app.add_subcommand("separate", "Synthesize a separating formula");
  separate->add_option("a", fa)->required();
  separate->add_option("b", fb)->required();
  add_k(separate);
  separate->add_option("--tuple-a", ta);
  separate->add_option("--tuple-b", tb);
  add_common(separate);

  auto* game = app.add_subcommand("game", "Solve the pebble game");
  game->add_option("a", fa)->required();
  game->add_option("b", fb)->required();
  game->add_option("--pebbles", pebbles)->check(CLI::Range(3, 8));
  game->add_option("--rounds", rounds);
  game->add_option("--mode", cfg.mode, "canonical or exhaustive");
  game->add_option("--rules", cfg.rules, "restricted or as-written");
  game->add_flag("--guarded", guarded, "Guarded three-pebble game");
  game->add_option("--tuple-a", ta);
  game->add_option("--tuple-b", tb);
  add_common(game);

  auto* replay = app.add_subcommand("replay", "Check a game trace");
  replay->add_option("a", fa)->required();
  replay->add_option("b", fb)->required();
  replay->add_option("trace", ftrace)->required();
  add_common(replay);

  auto* triad = app.add_subcommand("triad", "Run refinement, game and logic together");
  triad->add_option("a", fa);
  triad->add_option("b", fb);
  add_k(triad);
  triad->add_flag("--no-anchor", cfg.no_anchor);
  triad->add_option("--rules", cfg.rules, "restricted or as-written");
  triad->add_option("--random", random_n, "Sweep this many random pairs instead");
  triad->add_option("--seed", cfg.seed);
  add_common(triad);

  auto* oracle = app.add_subcommand("oracle", "Brute-force references");
  oracle->add_option("which", which, "iso, logic or game")->required();
  oracle->add_option("a", fa)->required();
  oracle->add_option("b", fb)->required();
  add_k(oracle);
  oracle->add_flag("--strict", strict, "Isomorphism keeps ranks and attributes");
  oracle->add_option("--depth", depth);
  oracle->add_option("--pebbles", pebbles);
  oracle->add_option("--rounds", game_rounds);
  oracle->add_flag("--committed", committed, "Keep a committed base of k pebbles");
  oracle->add_option("--rules", cfg.rules, "restricted or as-written");
  oracle->add_option("--tuple-a", ta);
  oracle->add_option("--tuple-b", tb);
  add_common(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*lift) return cmd_lift(fa, cfg);
    if (*anchor) return cmd_anchor(fa, cfg);
    if (*refine_cmd) return cmd_refine(fa, fb, cfg);
    if (*compare) return cmd_compare(fa, fb, cfg);
    if (*check) return cmd_check(ftext, fa, tuple, vars, cfg);
    if (*separate) return cmd_separate(fa, fb, ta, tb, cfg);
    if (*game) return cmd_game(fa, fb, pebbles, rounds, guarded, ta, tb, cfg);
    if (*replay) return cmd_replay(fa, fb, ftrace, cfg);
    if (*triad) return cmd_triad(fa, fb, random_n, cfg);
    if (*oracle) return cmd_oracle(which, fa, fb, strict, pebbles, game_rounds, committed, ta, tb, depth, cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
