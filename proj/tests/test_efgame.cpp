#include <doctest.h>

#include "epistemia/corpus.hpp"
#include "epistemia/efgame.hpp"
#include "oracles.hpp"

using namespace epistemia;

namespace {

CayleyStructure path_unfold(int depth, bool uniform) {
  S5Structure base = two_world_clique();
  if (uniform) base.val[0] = {0, 0};
  return tree_unfold(base, 0, depth, 0);
}

CayleyStructure boosted_unfold(int depth, bool uniform) {
  S5Structure base = two_world_clique();
  if (uniform) base.val[0] = {0, 0};
  return tree_unfold(base, 0, depth, 1);
}

FOId random_sentence(FOPool& fo, Rng& rng, int rank, int masks, int props,
                     int depth, int bound) {
  // closed under one outer quantifier per rank step; bound = variables so far
  if (rank == 0 || depth == 0) {
    // quantifier-free over bound variables
    if (bound == 0) return fo.equal(0, 0);  // degenerate
    int kind = rng.below(4);
    int v1 = rng.below(bound), v2 = rng.below(bound);
    switch (kind) {
      case 0: return fo.equal(v1, v2);
      case 1: return fo.rel((Coalition)rng.below(masks), v1, v2);
      case 2: return fo.prop(rng.below(props), v1);
      default:
        return fo.negation(fo.prop(rng.below(props), v1));
    }
  }
  int kind = rng.below(6);
  switch (kind) {
    case 0:
      return fo.negation(
          random_sentence(fo, rng, rank, masks, props, depth - 1, bound));
    case 1:
    case 2: {
      std::vector<FOId> cs;
      for (int i = 0; i < 2; ++i)
        cs.push_back(
            random_sentence(fo, rng, rank, masks, props, depth - 1, bound));
      return kind == 1 ? fo.conj(std::move(cs)) : fo.disj(std::move(cs));
    }
    default: {
      FOId body = random_sentence(fo, rng, rank - 1, masks, props, depth - 1,
                                  bound + 1);
      return rng.below(2) ? fo.exists(body) : fo.forall(body);
    }
  }
}

}  // namespace

TEST_SUITE_BEGIN("efgame");

TEST_CASE("schedules follow the recursions and the closed form") {
  auto fh3 = [](int, int) { return 3; };
  Schedules s1 = make_schedules(1, fh3, 4);
  CHECK(s1.m == std::vector<int>{5, 2});
  CHECK(s1.ell == std::vector<int>{4, 1});
  Schedules s2 = make_schedules(2, fh3, 4);
  CHECK(s2.m == std::vector<int>{11, 5, 2});
  Schedules s3 = make_schedules(3, fh3, 4);
  CHECK(s3.m[0] == 23);
  for (int q = 1; q <= 3; ++q) {
    Schedules s = make_schedules(q, fh3, 4);
    for (int i = 0; i <= q; ++i)
      CHECK(s.m[i] == 3 * (1 << (q - i)) - 1);  // m_i = 3*2^(q-i) - 1
    for (int i = 0; i < q; ++i) CHECK(s.ell[i] > s.ell[i + 1]);
  }
}

TEST_CASE("phi_T base cases and self-satisfaction") {
  CayleyStructure c = boosted_unfold(3, false);
  FreenessContext ctx = make_freeness_context(c.ck, 4);
  FormulaPool pool;
  // single node
  WorldTree one{{-1}, {0}};
  FormulaId chi = build_phi_T(pool, ctx, one, 2);
  CHECK(chi == characteristic_formula(pool, c.ck, 0, 2));
  CHECK(model_check(pool, c.ck, 0, chi));
  // a two-node tree along an actual edge
  WorldId child = c.ck.coset_of(0, 1)[1];
  WorldTree two{{-1, 0}, {0, child}};
  FormulaId phi = build_phi_T(pool, ctx, two, 1);
  CHECK(model_check(pool, c.ck, 0, phi));
  CHECK(modal_depth(pool, phi) == 2);  // chi depth 1 + one diamond
  // trees extracted from the structure are self-satisfied
  WorldId grand = c.ck.coset_of(child, 2)[0] == child
                      ? c.ck.coset_of(child, 2).back()
                      : c.ck.coset_of(child, 2)[0];
  WorldTree three{{-1, 0, 1}, {0, child, grand}};
  CHECK(model_check(pool, c.ck, 0, build_phi_T(pool, ctx, three, 1)));
  // malformed skeletons are rejected
  CHECK_THROWS_AS(build_phi_T(pool, ctx, WorldTree{{-1, -1}, {0, 1}}, 1),
                  NotConnectedTreeError);
  CHECK_THROWS_AS(build_phi_T(pool, ctx, WorldTree{{1, 0}, {0, 1}}, 1),
                  NotConnectedTreeError);
}

TEST_CASE("duplicator: re-pebbling keeps the invariant and answers by sigma") {
  CayleyStructure c = path_unfold(6, false);
  FreenessContext ctx = make_freeness_context(c.ck, 6);
  auto fh = [&](int m, int k) {
    return 2 * std::max(1, measure_f(ctx.dual_h, m, k, 200, 7));
  };
  GameInvariant inv = init_game(ctx, ctx, 0, 0, make_schedules(1, fh, 4));
  duplicator_round(inv, {0, 0});  // re-pebble the initial world
  CHECK(inv.response() == 0);
  CHECK(verify_invariant(inv).empty());
}

TEST_CASE("duplicator survives a full q=1 exhaustive replay on a path") {
  CayleyStructure c = path_unfold(6, false);
  FreenessContext ctx = make_freeness_context(c.ck, 6);
  auto fh = [&](int m, int k) {
    return 2 * std::max(1, measure_f(ctx.dual_h, m, k, 200, 7));
  };
  Schedules sched = make_schedules(1, fh, 4);
  GameInvariant base = init_game(ctx, ctx, 0, 0, sched);
  for (int side = 0; side < 2; ++side) {
    for (WorldId w = 0; w < c.ck.n(); ++w) {
      GameInvariant inv = base;
      duplicator_round(inv, {side, w});
      CHECK(verify_invariant(inv).empty());
      // the final sigma restricted to pebbles is a partial isomorphism
      for (auto [pw, pv] : inv.pebbles) {
        for (auto [qw, qv] : inv.pebbles) {
          for (Coalition a = 0; a < (Coalition)c.ck.num_masks(); ++a)
            CHECK(c.ck.same_class(a, pw, qw) == c.ck.same_class(a, pv, qv));
        }
      }
    }
  }
}

TEST_CASE("duplicator reports freeness shortfalls on poor structures") {
  // the contentful depth-4 boosted truncation is not free enough for some
  // spoiler moves; the engine must fail loudly rather than improvise
  CayleyStructure c = boosted_unfold(4, false);
  FreenessContext ctx = make_freeness_context(c.ck, 6);
  auto fh = [&](int m, int k) {
    return 2 * std::max(1, measure_f(ctx.dual_h, m, k, 200, 7));
  };
  Schedules sched = make_schedules(1, fh, 4);
  GameInvariant inv = init_game(ctx, ctx, 0, 0, sched);
  CHECK_THROWS_AS(duplicator_round(inv, {0, 6}), FreenessUnavailableError);
}

TEST_CASE("fo_ef_oracle: identity, counting, and sentence-pool soundness") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    S5Structure s = random_s5(rng, 3 + rng.below(3), 2, 1, 0.5, false);
    CKStructure ck = ck_expand(s);
    for (WorldId w = 0; w < std::min(2, ck.n()); ++w)
      CHECK(fo_ef_oracle(ck, w, ck, w, 2));
  }
  // different numbers of P0 worlds, one quantifier step apart: two versus
  // three worlds in one clique, all satisfying p0
  auto clique = [](int n) {
    S5Structure s;
    s.n = n;
    s.agent_names = {"a", "b"};
    s.prop_names = {"p0"};
    UnionFind ua(n), ub(n);
    for (int w = 1; w < n; ++w) {
      ua.unite(0, w);
      ub.unite(0, w);
    }
    s.agents = {partition_from_unionfind(ua), partition_from_unionfind(ub)};
    s.val = {std::vector<uint8_t>(n, 1)};
    s.raw_edges.resize(2);
    return s;
  };
  CKStructure ck2 = ck_expand(clique(2)), ck3 = ck_expand(clique(3));
  CHECK(fo_ef_oracle(ck2, 0, ck3, 0, 1));   // rank 1 cannot count to three
  CHECK(!fo_ef_oracle(ck2, 0, ck3, 0, 2));  // rank 2 can
  // soundness against a pool of rank-q sentences
  for (int trial = 0; trial < 25; ++trial) {
    S5Structure sa = random_s5(rng, 1 + rng.below(4), 2, 1, 0.5, false);
    S5Structure sb = random_s5(rng, 1 + rng.below(4), 2, 1, 0.5, false);
    CKStructure m = ck_expand(sa), n = ck_expand(sb);
    const int q = 2;
    bool equivalent = fo_ef_oracle(m, 0, n, 0, q);
    if (!equivalent) continue;
    FOPool fo;
    for (int k = 0; k < 40; ++k) {
      FOId phi = random_sentence(fo, rng, q, m.num_masks(), 1, 4, 1);
      if (quantifier_rank(fo, phi) > q) continue;
      CHECK(fo_eval(fo, m, {0}, phi) == fo_eval(fo, n, {0}, phi));
    }
  }
}

TEST_CASE("upgrade experiment: identical pointed structures") {
  CayleyStructure c = path_unfold(6, false);
  FreenessContext ctx = make_freeness_context(c.ck, 6);
  UpgradeReport rep = upgrade_experiment(ctx, 0, ctx, 0, 1);
  CHECK(rep.l_bisimilar);
  CHECK(rep.oracle_equivalent);
  CHECK(rep.replay_survived);
  CHECK(rep.replay_lines == (uint64_t)(2 * c.ck.n()));
  CHECK(!rep.out_of_warranty);  // q=1 warranty is 2*m_1+1 = 5 <= verified 6
}

TEST_CASE("upgrade experiment: cross-boost uniform pair at q=1") {
  S5Structure base = two_world_clique();
  base.val[0] = {0, 0};
  CayleyStructure a = tree_unfold(base, 0, 4, 0);
  CayleyStructure b = tree_unfold(base, 0, 4, 1);
  FreenessContext L = make_freeness_context(a.ck, 6);
  FreenessContext R = make_freeness_context(b.ck, 6);
  UpgradeReport rep = upgrade_experiment(L, 0, R, 0, 1);
  CHECK(rep.l_bisimilar);
  CHECK(rep.oracle_equivalent);
  CHECK(rep.replay_survived);
}

TEST_CASE("upgrade experiment: poor pair fails loudly, gates throw") {
  CayleyStructure c = boosted_unfold(4, false);
  FreenessContext ctx = make_freeness_context(c.ck, 6);
  UpgradeReport rep = upgrade_experiment(ctx, 0, ctx, 0, 1);
  CHECK(rep.l_bisimilar);
  CHECK(rep.oracle_equivalent);       // identical structures stay equivalent
  CHECK(!rep.replay_survived);        // but the engine cannot certify it
  CHECK(!rep.failure.empty());
  UpgradeOptions strict;
  strict.acyclicity_gate = 7;  // beyond what the context verified
  CHECK_THROWS_AS(upgrade_experiment(ctx, 0, ctx, 0, 1, strict),
                  GatesFailedError);
}

TEST_CASE("main-theorem surrogate: invariant rank-q sentences have") {
  // depth-ell characteristic disjunctions agreeing on the corpus
  Rng rng(17);
  std::vector<CKStructure> corpus;
  for (int i = 0; i < 8; ++i)
    corpus.push_back(ck_expand(random_s5(rng, 1 + rng.below(3), 2, 1, 0.6,
                                         false)));
  const int q = 2, ell = 3;
  // full-bisimulation classes across the corpus via pairwise checks
  FOPool fo;
  int invariant_found = 0;
  for (int k = 0; k < 60 && invariant_found < 12; ++k) {
    FOId phi = random_sentence(fo, rng, q, 4, 1, 4, 1);
    // is phi empirically bisimulation-invariant across the corpus?
    bool invariant = true;
    for (size_t i = 0; i < corpus.size() && invariant; ++i)
      for (size_t j = 0; j < corpus.size() && invariant; ++j) {
        BisimPartition bp =
            coarsest_bisimulation(corpus[i], corpus[j], BisimMode::CK);
        for (WorldId w = 0; w < corpus[i].n() && invariant; ++w)
          for (WorldId v = 0; v < corpus[j].n() && invariant; ++v)
            if (bp.same(w, v) &&
                fo_eval(fo, corpus[i], {w}, phi) !=
                    fo_eval(fo, corpus[j], {v}, phi))
              invariant = false;
      }
    if (!invariant) continue;
    ++invariant_found;
    // build the depth-ell disjunction of characteristic formulae of the
    // satisfying pointed corpus structures
    FormulaPool pool;
    std::vector<FormulaId> parts;
    for (const CKStructure& m : corpus)
      for (WorldId w = 0; w < m.n(); ++w)
        if (fo_eval(fo, m, {w}, phi))
          parts.push_back(characteristic_formula(pool, m, w, ell));
    for (const CKStructure& m : corpus)
      for (WorldId w = 0; w < m.n(); ++w) {
        bool by_phi = fo_eval(fo, m, {w}, phi);
        bool by_disj = false;
        for (FormulaId chi : parts)
          if (model_check(pool, m, w, chi)) {
            by_disj = true;
            break;
          }
        CHECK(by_phi == by_disj);
      }
  }
  CHECK(invariant_found > 0);
}

TEST_SUITE_END();
