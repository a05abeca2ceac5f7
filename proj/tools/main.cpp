// epistemia: S5/CK Kripke structures, bisimilar Cayley coverings, coset
// acyclicity, dual hypergraphs, freeness witnesses and the EF upgrading
// experiment, behind one subcommand-style binary.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "epistemia/acyclicity.hpp"
#include "epistemia/bisim.hpp"
#include "epistemia/cayley.hpp"
#include "epistemia/corpus.hpp"
#include "epistemia/efgame.hpp"
#include "epistemia/formula.hpp"
#include "epistemia/freeness.hpp"
#include "epistemia/hypergraph.hpp"
#include "epistemia/json_io.hpp"
#include "suite.hpp"

using namespace epistemia;

namespace {

S5Structure load(const std::string& path) {
  return load_structure_file(path).structure;
}

Coalition parse_coalition(const std::string& text,
                          const std::vector<std::string>& agents) {
  if (text.empty()) return 0;
  Coalition mask = 0;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    auto it = std::find(agents.begin(), agents.end(), name);
    if (it == agents.end()) throw Error("unknown agent '" + name + "'");
    mask = with_agent(mask, (AgentId)(it - agents.begin()));
  }
  return mask;
}

std::vector<WorldId> parse_world_list(const std::string& text) {
  std::vector<WorldId> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty())
    std::cout << contents;
  else
    write_file(path, contents);
}

int cmd_validate(const std::string& in, bool strict) {
  RawStructure raw = raw_from_json(read_file(in));
  ValidateResult res = validate_s5(raw, strict);
  if (res.ok()) {
    const S5Structure& s = *res.structure;
    std::cout << "VALID: " << s.n << " worlds, " << s.num_agents()
              << " agents, " << s.num_props() << " propositions\n";
    for (int a = 0; a < s.num_agents(); ++a)
      std::cout << "  " << s.agent_names[a] << ": " << s.agents[a].size()
                << " classes\n";
    return 0;
  }
  std::cout << "INVALID:\n";
  for (const auto& issue : res.report.issues)
    std::cout << "  " << issue.to_string(raw.agent_names) << "\n";
  return 1;
}

int cmd_expand(const std::string& in, const std::string& out) {
  S5Structure s = load(in);
  CKStructure ck = ck_expand(s);
  std::ostringstream os;
  os << "{\n";
  for (Coalition a = 0; a < (Coalition)ck.num_masks(); ++a) {
    os << "  \"" << coalition_name(a, s.agent_names) << "\": [";
    for (int b = 0; b < ck.coalition[a].size(); ++b) {
      if (b) os << ", ";
      os << "[";
      const auto& blk = ck.coalition[a].blocks[b];
      for (size_t i = 0; i < blk.size(); ++i)
        os << (i ? "," : "") << blk[i];
      os << "]";
    }
    os << "]" << (a + 1 < (Coalition)ck.num_masks() ? "," : "") << "\n";
  }
  os << "}\n";
  emit(out, os.str());
  return 0;
}

int cmd_mc(const std::string& in, WorldId world, std::string formula_text,
           const std::string& formula_file) {
  S5Structure s = load(in);
  CKStructure ck = ck_expand(s);
  if (!formula_file.empty()) formula_text = read_file(formula_file);
  FormulaPool pool;
  FormulaId f = parse(pool, formula_text, {s.agent_names, s.prop_names});
  bool verdict = model_check(pool, ck, world, f);
  std::cout << (verdict ? "true" : "false") << "\n";
  return verdict ? 0 : 1;
}

int cmd_bisim(const std::string& left, const std::string& right, int ell,
              const std::string& mode_name, const std::string& worlds) {
  CKStructure m = ck_expand(load(left));
  CKStructure n = ck_expand(load(right));
  BisimMode mode = mode_name == "s5" ? BisimMode::S5 : BisimMode::CK;
  BisimPartition bp;
  if (ell >= 0) {
    auto levels = bisim_levels(m, n, mode, ell);
    bp = levels[std::min<size_t>(ell, levels.size() - 1)];
  } else {
    bp = coarsest_bisimulation(m, n, mode);
  }
  if (!worlds.empty()) {
    auto wv = parse_world_list(worlds);
    if (wv.size() != 2) throw Error("--worlds wants two ids");
    bool same = bp.same(wv[0], wv[1]);
    std::cout << "VERDICT: " << (same ? "bisimilar" : "distinguished") << "\n";
  } else {
    std::cout << "VERDICT: " << bp.num_blocks << " blocks\n";
  }
  std::cout << "left:";
  for (WorldId w = 0; w < m.n(); ++w) std::cout << " " << bp.block[w];
  std::cout << "\nright:";
  for (WorldId v = 0; v < n.n(); ++v) std::cout << " " << bp.block[m.n() + v];
  std::cout << "\n";
  return 0;
}

int cmd_cover(const std::string& in, WorldId base, const std::string& edges,
              int copies, size_t cap, const std::string& out) {
  S5Structure s = load(in);
  EdgeSet mode = edges == "full" ? EdgeSet::Full : EdgeSet::Spanning;
  CayleyStructure c = build_covering(s, base, mode, copies, cap);
  CoveringCheck chk = check_covering(c.ck, ck_expand(s), c.covering);
  if (!chk) throw Error("covering self-check failed: " + chk.describe());
  std::cerr << "group order " << c.elements.size() << ", covering verified\n";
  emit(out, cayley_to_json(c));
  return 0;
}

int cmd_unfold(const std::string& in, WorldId base, int depth, int copies,
               const std::string& out) {
  S5Structure s = load(in);
  CayleyStructure c = tree_unfold(s, base, depth, copies);
  std::cerr << c.ck.n() << " reduced words at depth " << depth << "\n";
  emit(out, cayley_to_json(c));
  return 0;
}

int cmd_analyze_acyclicity(const std::string& in, int n) {
  CKStructure ck = ck_expand(load(in));
  auto cyc = find_coset_cycle(ck, n);
  if (!cyc) {
    std::cout << "VERDICT: " << n << "-acyclic (no coset cycle of length <= "
              << n << ")\n";
    return 0;
  }
  std::cout << "VERDICT: coset cycle of length " << cyc->size() << " found\n";
  for (const auto& step : *cyc)
    std::cout << "  (" << step.world << ", "
              << coalition_name(step.alpha, ck.base.agent_names) << ")\n";
  return 1;
}

int cmd_analyze_richness(const std::string& in, int k) {
  CKStructure ck = ck_expand(load(in));
  RichnessResult r = check_richness(ck, k);
  if (r.ok) {
    std::cout << "VERDICT: " << k << "-rich (measured "
              << measured_richness(ck) << ")\n";
    return 0;
  }
  std::cout << "VERDICT: not " << k << "-rich; coalition "
            << coalition_name(r.witness->alpha, ck.base.agent_names)
            << " class " << r.witness->class_id << " realizes a type "
            << r.witness->multiplicity << " time(s)\n";
  return 1;
}

int cmd_analyze_freeness(const std::string& in, int m, int k, int samples,
                         uint64_t seed) {
  CKStructure ck = ck_expand(load(in));
  FreenessContext ctx = make_freeness_context(ck, 2 * (m + 1) > 6 ? 6 : 2 * (m + 1));
  MkFreeOptions opts;
  opts.procedure_samples = samples;
  opts.seed = seed;
  MkFreeResult r = check_mk_free(ctx, m, k, opts);
  std::cout << "verified acyclicity: n=" << ctx.verified_n
            << ", measured richness: " << measured_richness(ck) << "\n";
  if (r.ok) {
    std::cout << "VERDICT: (" << m << "," << k << ")-free over " << r.cells
              << " pointed cells";
    if (r.procedure_runs)
      std::cout << "; witness construction: " << r.procedure_hits << "/"
                << r.procedure_runs << " direct hits";
    std::cout << "\n";
    return 0;
  }
  const auto& cex = *r.counterexample;
  std::cout << "VERDICT: not (" << m << "," << k << ")-free; cell v=" << cex.v
            << " z0=" << cex.z0 << " gamma="
            << coalition_name(cex.gamma, ck.base.agent_names) << " zs=";
  for (WorldId z : cex.zs) std::cout << z << " ";
  std::cout << "\n";
  return 1;
}

int cmd_dual(const std::string& in, const std::string& out) {
  CKStructure ck = ck_expand(load(in));
  DualHypergraph h = dual(ck);
  std::cerr << h.num_vertices() << " vertices, " << h.edges.size()
            << " hyperedges\n";
  emit(out, hypergraph_to_json(h, ck.base.agent_names));
  return 0;
}

int cmd_witness(const std::string& in, WorldId v, const std::string& zs_text,
                WorldId z0, const std::string& gamma_text, int m) {
  CKStructure ck = ck_expand(load(in));
  FreenessContext ctx = make_freeness_context(ck, 6);
  std::vector<WorldId> zs = parse_world_list(zs_text);
  Coalition gamma = parse_coalition(gamma_text, ck.base.agent_names);
  WorldId out = find_free_witness(ctx, v, zs, z0, gamma, m);
  std::cout << "witness: " << out << "\n";
  std::cout << "  bisimilar to v: "
            << (ctx.bisimilar(out, v) ? "yes" : "no") << "\n";
  std::cout << "  agt(witness, z0) = "
            << coalition_name(ctx.agt_of(out, z0), ck.base.agent_names)
            << "\n";
  std::cout << "  m-free from zs (dual distance > " << m
            << "): " << (is_m_free(ctx, out, zs, z0, m) ? "yes" : "no")
            << "\n";
  return 0;
}

int cmd_upgrade(const std::string& left, const std::string& right, int q,
                WorldId w, WorldId v, const std::string& report) {
  CKStructure m = ck_expand(load(left));
  CKStructure n = ck_expand(load(right));
  FreenessContext L = make_freeness_context(m, 6);
  FreenessContext R = make_freeness_context(n, 6);
  UpgradeReport rep = upgrade_experiment(L, w, R, v, q);
  std::cout << "ell(q) = " << rep.sched.ell0() << ", l-bisimilar: "
            << (rep.l_bisimilar ? "yes" : "no") << "\n";
  if (rep.l_bisimilar) {
    std::cout << "EF oracle =_q: " << (rep.oracle_equivalent ? "yes" : "no")
              << "\n";
    std::cout << "duplicator replay: "
              << (rep.replay_survived ? "survived " : "failed ")
              << rep.replay_lines << " lines\n";
    if (!rep.failure.empty()) std::cout << "  " << rep.failure << "\n";
  }
  if (rep.out_of_warranty)
    std::cout << "note: verified acyclicity below 2*m_1+1 (out of warranty)\n";
  if (!report.empty()) write_file(report, upgrade_report_json(rep));
  return rep.conclusion_holds() ? 0 : 1;
}

int cmd_ef_oracle(const std::string& left, const std::string& right, int q,
                  WorldId w, WorldId v) {
  CKStructure m = ck_expand(load(left));
  CKStructure n = ck_expand(load(right));
  bool eq = fo_ef_oracle(m, w, n, v, q);
  std::cout << (eq ? "equivalent" : "distinguished") << " at rank " << q
            << "\n";
  return eq ? 0 : 1;
}

int cmd_gen(uint64_t seed, int count, int n_min, int n_max, int agents,
            int props, double density, bool connected, const std::string& dir,
            const std::string& cover_mode, int copies, int unfold_depth) {
  CorpusSpec spec;
  spec.seed = seed;
  spec.count = count;
  spec.n_min = n_min;
  spec.n_max = n_max;
  spec.agents = agents;
  spec.props = props;
  spec.density = density;
  spec.connected = connected || !cover_mode.empty() || unfold_depth > 0;
  std::vector<S5Structure> corpus = gen_corpus(spec);
  for (size_t i = 0; i < corpus.size(); ++i) {
    std::string stem = dir + "/s" + std::to_string(i);
    write_file(stem + ".json", structure_to_json(corpus[i]));
    if (!cover_mode.empty()) {
      EdgeSet mode = cover_mode == "full" ? EdgeSet::Full : EdgeSet::Spanning;
      CayleyStructure c = build_covering(corpus[i], 0, mode, copies);
      CoveringCheck chk = check_covering(c.ck, ck_expand(corpus[i]), c.covering);
      if (!chk) throw Error("generated covering failed verification");
      write_file(stem + ".cover.json", cayley_to_json(c));
    }
    if (unfold_depth > 0) {
      CayleyStructure c = tree_unfold(corpus[i], 0, unfold_depth, copies);
      write_file(stem + ".unfold.json", cayley_to_json(c));
    }
  }
  std::cout << corpus.size() << " structures written to " << dir << "\n";
  return 0;
}

int cmd_suite(const std::string& spec_path, uint64_t seed,
              const std::string& report_json, const std::string& report_junit,
              bool empty_corpus) {
  suite::SuiteSpec spec;
  if (!spec_path.empty())
    spec = suite::parse_suite_spec(read_file(spec_path));
  if (seed != 0) spec.seed = seed;
  if (!report_json.empty()) spec.report_json = report_json;
  if (!report_junit.empty()) spec.report_junit = report_junit;
  if (empty_corpus) spec.empty_corpus = true;
  suite::SuiteResult result = suite::run_suite(spec, std::cout, std::cerr);
  if (!spec.report_json.empty())
    write_file(spec.report_json, suite::suite_report_json(result, spec.seed));
  if (!spec.report_junit.empty())
    write_file(spec.report_junit, suite::suite_report_junit(result));
  return result.all_pass() ? 0 : 1;
}

// Plain-text bisimulation game: the human spoils, the engine duplicates via
// the coarsest-bisimulation blocks.
int cmd_repl(const std::string& left, const std::string& right, int rounds,
             WorldId w, WorldId v, const std::string& transcript_path) {
  CKStructure m = ck_expand(load(left));
  CKStructure n = ck_expand(load(right));
  std::ostringstream transcript;
  auto say = [&](const std::string& line) {
    std::cout << line << "\n";
    transcript << line << "\n";
  };
  BisimPartition bp = coarsest_bisimulation(m, n, BisimMode::CK);
  WorldId pw = w, pv = v;
  say("position (" + std::to_string(pw) + ", " + std::to_string(pv) + ")");
  if (m.base.atomic_type(pw) != n.base.atomic_type(pv)) {
    say("engine: the start position violates propositional equivalence; "
        "Duplicator resigns");
  } else {
    say("you are Spoiler; moves: 'move l|r <agent> <world>' or 'quit'");
    for (int round = 1; round <= rounds; ++round) {
      std::cout << "round " << round << "> " << std::flush;
      std::string line;
      if (!std::getline(std::cin, line) || line == "quit" || line.empty())
        break;
      transcript << "round " << round << "> " << line << "\n";
      std::istringstream is(line);
      std::string cmd, side, agent_name;
      WorldId target;
      is >> cmd >> side >> agent_name >> target;
      if (cmd != "move" || (side != "l" && side != "r") || is.fail()) {
        say("engine: could not parse that move");
        --round;
        continue;
      }
      const CKStructure& own = side == "l" ? m : n;
      const CKStructure& other = side == "l" ? n : m;
      WorldId& own_pebble = side == "l" ? pw : pv;
      WorldId& other_pebble = side == "l" ? pv : pw;
      Coalition a;
      try {
        a = parse_coalition(agent_name, own.base.agent_names);
      } catch (const Error& e) {
        say(std::string("engine: ") + e.what());
        --round;
        continue;
      }
      if (target < 0 || target >= own.n() ||
          !own.same_class(a, own_pebble, target)) {
        say("engine: that is not a legal move along " + agent_name);
        --round;
        continue;
      }
      own_pebble = target;
      // respond inside the same class, staying in the same bisimulation block
      WorldId reply = -1;
      for (WorldId cand : other.coset_of(other_pebble, a)) {
        bool same = side == "l" ? bp.same(target, cand) : bp.same(cand, target);
        if (same) {
          reply = cand;
          break;
        }
      }
      if (reply < 0) {
        say("engine: no bisimilar reply exists; Duplicator resigns");
        break;
      }
      other_pebble = reply;
      say("engine: responds " + std::to_string(reply) + "; position (" +
          std::to_string(pw) + ", " + std::to_string(pv) + ")");
    }
    say("game over");
  }
  if (!transcript_path.empty()) write_file(transcript_path, transcript.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epistemic structures, Cayley coverings and the EF upgrade"};
  app.require_subcommand(1);

  std::string in, out, left, right, formula_text, formula_file, worlds;
  std::string edges = "spanning", mode = "ck", zs_text, gamma_text;
  std::string spec_path, report_json, report_junit, transcript, cover_mode, dir = ".";
  int ell = -1, world = 0, base = 0, copies = 0, depth = 2, n_param = 4;
  int k_param = 2, m_param = 2, q = 1, v_world = 0, samples = 0, rounds = 8;
  int count = 10, n_min = 2, n_max = 6, agents = 2, props = 1, unfold_depth = 0;
  int z0 = 0;
  double density = 0.4;
  uint64_t seed = 1;
  size_t cap = kDefaultElementCap;
  bool strict = false, connected = false, empty_corpus = false;

  auto* c_validate = app.add_subcommand("validate", "check a structure file");
  c_validate->add_option("--in", in)->required();
  c_validate->add_flag("--strict", strict, "require explicit reflexive loops");

  auto* c_expand = app.add_subcommand("expand", "print coalition partitions");
  c_expand->add_option("--in", in)->required();
  c_expand->add_option("--out", out);

  auto* c_mc = app.add_subcommand("mc", "model-check a formula at a world");
  c_mc->add_option("--in", in)->required();
  c_mc->add_option("--world", world)->required();
  c_mc->add_option("--formula", formula_text);
  c_mc->add_option("--formula-file", formula_file);

  auto* c_bisim = app.add_subcommand("bisim", "bisimulation verdict + blocks");
  c_bisim->add_option("--left", left)->required();
  c_bisim->add_option("--right", right)->required();
  c_bisim->add_option("--l", ell, "bounded rounds (default: unbounded)");
  c_bisim->add_option("--mode", mode)->check(CLI::IsMember({"s5", "ck"}));
  c_bisim->add_option("--worlds", worlds, "pair w,v to compare");

  auto* c_cover = app.add_subcommand("cover", "build a Cayley covering");
  c_cover->add_option("--in", in)->required();
  c_cover->add_option("--base", base);
  c_cover->add_option("--edges", edges)->check(CLI::IsMember({"full", "spanning"}));
  c_cover->add_option("--copies", copies);
  c_cover->add_option("--cap", cap);
  c_cover->add_option("--out", out);

  auto* c_unfold = app.add_subcommand("unfold", "truncated free-group unfolding");
  c_unfold->add_option("--in", in)->required();
  c_unfold->add_option("--base", base);
  c_unfold->add_option("--depth", depth)->required();
  c_unfold->add_option("--copies", copies);
  c_unfold->add_option("--out", out);

  auto* c_analyze = app.add_subcommand("analyze", "acyclicity / richness / freeness");
  auto* c_acyc = c_analyze->add_subcommand("acyclicity");
  c_acyc->add_option("--in", in)->required();
  c_acyc->add_option("--n", n_param);
  auto* c_rich = c_analyze->add_subcommand("richness");
  c_rich->add_option("--in", in)->required();
  c_rich->add_option("--k", k_param);
  auto* c_free = c_analyze->add_subcommand("freeness");
  c_free->add_option("--in", in)->required();
  c_free->add_option("--m", m_param);
  c_free->add_option("--k", k_param);
  c_free->add_option("--samples", samples);
  c_free->add_option("--seed", seed);

  auto* c_dual = app.add_subcommand("dual", "emit the dual hypergraph");
  c_dual->add_option("--in", in)->required();
  c_dual->add_option("--out", out);

  auto* c_witness = app.add_subcommand("witness", "free witness search");
  c_witness->add_option("--in", in)->required();
  c_witness->add_option("--v", v_world)->required();
  c_witness->add_option("--zs", zs_text)->required();
  c_witness->add_option("--z0", z0)->required();
  c_witness->add_option("--gamma", gamma_text)->required();
  c_witness->add_option("--m", m_param);

  auto* c_upgrade = app.add_subcommand("upgrade", "the upgrading experiment");
  c_upgrade->add_option("--left", left)->required();
  c_upgrade->add_option("--right", right)->required();
  c_upgrade->add_option("--q", q);
  c_upgrade->add_option("--w", world);
  c_upgrade->add_option("--v", v_world);
  c_upgrade->add_option("--report", report_json);

  auto* c_ef = app.add_subcommand("ef-oracle", "brute-force q-round EF game");
  c_ef->add_option("--left", left)->required();
  c_ef->add_option("--right", right)->required();
  c_ef->add_option("--q", q);
  c_ef->add_option("--w", world);
  c_ef->add_option("--v", v_world);

  auto* c_gen = app.add_subcommand("gen", "generate a seeded corpus");
  c_gen->add_option("--seed", seed);
  c_gen->add_option("--count", count);
  c_gen->add_option("--n-min", n_min);
  c_gen->add_option("--n-max", n_max);
  c_gen->add_option("--agents", agents);
  c_gen->add_option("--props", props);
  c_gen->add_option("--density", density);
  c_gen->add_flag("--connected", connected);
  c_gen->add_option("--out", dir);
  c_gen->add_option("--cover", cover_mode)->check(CLI::IsMember({"full", "spanning"}));
  c_gen->add_option("--copies", copies);
  c_gen->add_option("--unfold-depth", unfold_depth);

  auto* c_suite = app.add_subcommand("suite", "run the acceptance suite");
  c_suite->add_option("--spec", spec_path);
  c_suite->add_option("--seed", seed);
  c_suite->add_option("--report-json", report_json);
  c_suite->add_option("--report-junit", report_junit);
  c_suite->add_flag("--empty-corpus", empty_corpus);

  auto* c_repl = app.add_subcommand("repl", "human Spoiler vs engine Duplicator");
  c_repl->add_option("--left", left)->required();
  c_repl->add_option("--right", right)->required();
  c_repl->add_option("--rounds", rounds);
  c_repl->add_option("--w", world);
  c_repl->add_option("--v", v_world);
  c_repl->add_option("--transcript", transcript);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_validate) return cmd_validate(in, strict);
    if (*c_expand) return cmd_expand(in, out);
    if (*c_mc) return cmd_mc(in, world, formula_text, formula_file);
    if (*c_bisim) return cmd_bisim(left, right, ell, mode, worlds);
    if (*c_cover) return cmd_cover(in, base, edges, copies, cap, out);
    if (*c_unfold) return cmd_unfold(in, base, depth, copies, out);
    if (*c_acyc) return cmd_analyze_acyclicity(in, n_param);
    if (*c_rich) return cmd_analyze_richness(in, k_param);
    if (*c_free)
      return cmd_analyze_freeness(in, m_param, k_param, samples, seed);
    if (*c_dual) return cmd_dual(in, out);
    if (*c_witness)
      return cmd_witness(in, v_world, zs_text, z0, gamma_text, m_param);
    if (*c_upgrade)
      return cmd_upgrade(left, right, q, world, v_world, report_json);
    if (*c_ef) return cmd_ef_oracle(left, right, q, world, v_world);
    if (*c_gen)
      return cmd_gen(seed, count, n_min, n_max, agents, props, density,
                     connected, dir, cover_mode, copies, unfold_depth);
    if (*c_suite)
      return cmd_suite(spec_path, seed, report_json, report_junit,
                       empty_corpus);
    if (*c_repl) return cmd_repl(left, right, rounds, world, v_world, transcript);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
