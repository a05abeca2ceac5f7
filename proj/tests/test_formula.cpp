#include <doctest.h>

#include "epistemia/bisim.hpp"
#include "epistemia/corpus.hpp"
#include "epistemia/formula.hpp"
#include "oracles.hpp"

using namespace epistemia;

namespace {

Signature sig_of(const S5Structure& s) { return {s.agent_names, s.prop_names}; }

// random formula generator for round-trip / duality properties
FormulaId random_formula(FormulaPool& pool, Rng& rng, int depth, int agents,
                         int props) {
  int pick = rng.below(depth > 0 ? 8 : 4);
  switch (pick) {
    case 0: return pool.top();
    case 1: return pool.bot();
    case 2:
    case 3: return pool.prop(rng.below(props));
    case 4:
      return pool.negation(random_formula(pool, rng, depth - 1, agents, props));
    case 5: {
      std::vector<FormulaId> cs;
      int k = 2 + rng.below(2);
      for (int i = 0; i < k; ++i)
        cs.push_back(random_formula(pool, rng, depth - 1, agents, props));
      return rng.below(2) ? pool.conj(std::move(cs)) : pool.disj(std::move(cs));
    }
    default: {
      Coalition mask = (Coalition)rng.below(1 << agents);
      FormulaId body = random_formula(pool, rng, depth - 1, agents, props);
      return rng.below(2) ? pool.box(mask, body) : pool.diamond(mask, body);
    }
  }
}

}  // namespace

TEST_SUITE_BEGIN("formula");

TEST_CASE("parser handles the grammar examples") {
  FormulaPool pool;
  Signature sig{{"a", "b"}, {"p0", "p1"}};
  CHECK(pool[parse(pool, "T", sig)].kind == FormulaKind::Top);
  FormulaId f = parse(pool, "[a,b] p0", sig);
  CHECK(pool[f].kind == FormulaKind::Box);
  CHECK(pool[f].mask == 3);
  CHECK(pool[pool[f].children[0]].kind == FormulaKind::Prop);
  FormulaId g = parse(pool, "<a>(p0 & ~[b]p1)", sig);
  CHECK(pool[g].kind == FormulaKind::Diamond);
  CHECK(pool[g].mask == 1);
  const FormulaNode& body = pool[pool[g].children[0]];
  CHECK(body.kind == FormulaKind::And);
  CHECK(pool[body.children[1]].kind == FormulaKind::Not);
  // empty coalition brackets
  CHECK(pool[parse(pool, "[]p0", sig)].mask == 0);
  CHECK(pool[parse(pool, "<>p0", sig)].mask == 0);
}

TEST_CASE("parser errors carry positions and names") {
  FormulaPool pool;
  Signature sig{{"a"}, {"p0"}};
  CHECK_THROWS_AS(parse(pool, "[x]p0", sig), UnknownAgentError);
  CHECK_THROWS_AS(parse(pool, "p7", sig), UnknownPropError);
  CHECK_THROWS_AS(parse(pool, "p0 &", sig), SyntaxError);
  CHECK_THROWS_AS(parse(pool, "(p0", sig), SyntaxError);
}

TEST_CASE("implication desugars to negation and disjunction") {
  FormulaPool pool;
  Signature sig{{"a"}, {"p0", "p1"}};
  FormulaId f = parse(pool, "p0 -> p1", sig);
  CHECK(pool[f].kind == FormulaKind::Or);
  CHECK(pool[pool[f].children[0]].kind == FormulaKind::Not);
}

TEST_CASE("modal depth") {
  FormulaPool pool;
  Signature sig{{"a", "b"}, {"p0"}};
  CHECK(modal_depth(pool, parse(pool, "T", sig)) == 0);
  CHECK(modal_depth(pool, parse(pool, "[a]p0", sig)) == 1);
  CHECK(modal_depth(pool, parse(pool, "<a>[b]p0", sig)) == 2);
}

TEST_CASE("parse(print(f)) is the identity on generated formulas") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    FormulaPool pool;
    Signature sig{{"a", "b"}, {"p0", "p1"}};
    FormulaId f = random_formula(pool, rng, 4, 2, 2);
    std::string text = print(pool, f, sig);
    CHECK(parse(pool, text, sig) == f);
  }
}

TEST_CASE("model checker basics on the chain structure") {
  S5Structure s = chain_structure();  // p0 = {0}
  CKStructure ck = ck_expand(s);
  FormulaPool pool;
  Signature sig = sig_of(s);
  CHECK(model_check(pool, ck, 0, parse(pool, "T", sig)));
  CHECK(!model_check(pool, ck, 0, parse(pool, "F", sig)));
  // diamond over the joint coalition reaches p0 from world 2
  CHECK(model_check(pool, ck, 2, parse(pool, "<a,b>p0", sig)));
  CHECK(!model_check(pool, ck, 2, parse(pool, "<b>p0", sig)));
}

TEST_CASE("empty-coalition modalities are eliminable") {
  Rng rng(3);
  S5Structure s = random_s5(rng, 5, 2, 2, 0.5, false);
  CKStructure ck = ck_expand(s);
  FormulaPool pool;
  FormulaId p = pool.prop(0);
  for (WorldId w = 0; w < s.n; ++w) {
    CHECK(model_check(pool, ck, w, pool.box(0, p)) ==
          model_check(pool, ck, w, p));
    CHECK(model_check(pool, ck, w, pool.diamond(0, p)) ==
          model_check(pool, ck, w, p));
  }
}

TEST_CASE("box/diamond duality pointwise") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    S5Structure s = random_s5(rng, 5, 2, 2, 0.4, false);
    CKStructure ck = ck_expand(s);
    FormulaPool pool;
    FormulaId f = random_formula(pool, rng, 3, 2, 2);
    for (Coalition a = 0; a < 4; ++a)
      for (WorldId w = 0; w < s.n; ++w) {
        bool dia = model_check(pool, ck, w, pool.diamond(a, f));
        bool via_box = !model_check(pool, ck, w,
                                    pool.box(a, pool.negation(f)));
        CHECK(dia == via_box);
      }
  }
}

TEST_CASE("truth is invariant under bisimulation") {
  Rng rng(41);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 60; ++trial) {
    S5Structure s1 = random_s5(rng, 4, 2, 1, 0.5, false);
    S5Structure s2 = random_s5(rng, 4, 2, 1, 0.5, false);
    CKStructure m = ck_expand(s1), n = ck_expand(s2);
    BisimPartition bp = coarsest_bisimulation(m, n, BisimMode::CK);
    FormulaPool pool;
    FormulaId f = random_formula(pool, rng, 3, 2, 1);
    for (WorldId w = 0; w < m.n(); ++w)
      for (WorldId v = 0; v < n.n(); ++v) {
        if (!bp.same(w, v)) continue;
        ++checked;
        CHECK(model_check(pool, m, w, f) == model_check(pool, n, v, f));
      }
  }
  CHECK(checked > 0);
}

TEST_CASE("characteristic formula: depth zero is the atomic type") {
  S5Structure s = chain_structure();
  CKStructure ck = ck_expand(s);
  FormulaPool pool;
  FormulaId chi = characteristic_formula(pool, ck, 0, 0);
  CHECK(modal_depth(pool, chi) == 0);
  CHECK(model_check(pool, ck, 0, chi));
  CHECK(!model_check(pool, ck, 1, chi));  // world 1 lacks p0
}

TEST_CASE("characteristic formulae capture l-bisimilarity across structures") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    S5Structure s1 = random_s5(rng, 1 + rng.below(6), 2, 1, 0.5, false);
    S5Structure s2 = random_s5(rng, 1 + rng.below(6), 2, 1, 0.5, false);
    CKStructure m = ck_expand(s1), n = ck_expand(s2);
    for (int ell = 0; ell <= 2; ++ell) {
      FormulaPool pool;
      for (WorldId w = 0; w < m.n(); ++w) {
        FormulaId chi = characteristic_formula(pool, m, w, ell);
        CHECK(modal_depth(pool, chi) == ell);
        for (WorldId v = 0; v < n.n(); ++v) {
          CHECK(model_check(pool, n, v, chi) ==
                l_bisimilar(m, w, n, v, ell, BisimMode::CK));
        }
      }
    }
  }
}

TEST_CASE("standard translation preserves truth and quantifier rank") {
  Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    S5Structure s = random_s5(rng, 4, 2, 2, 0.5, false);
    CKStructure ck = ck_expand(s);
    FormulaPool pool;
    FormulaId f = random_formula(pool, rng, 3, 2, 2);
    FOPool fo;
    FOId tf = standard_translation(pool, f, fo);
    CHECK(quantifier_rank(fo, tf) == modal_depth(pool, f));
    for (WorldId w = 0; w < s.n; ++w)
      CHECK(model_check(pool, ck, w, f) == fo_eval(fo, ck, {w}, tf));
  }
}

TEST_CASE("fo_eval basics") {
  S5Structure s = chain_structure();
  CKStructure ck = ck_expand(s);
  FOPool fo;
  // forall x R_empty(x,x)
  CHECK(fo_eval(fo, ck, {}, fo.forall(fo.rel(0, 0, 0))));
  // exists x P0(x)
  CHECK(fo_eval(fo, ck, {}, fo.exists(fo.prop(0, 0))));
  // exists x exists y (~R_a(x,y) & R_ab(x,y))
  FOId phi = fo.exists(fo.exists(
      fo.conj({fo.negation(fo.rel(1, 0, 1)), fo.rel(3, 0, 1)})));
  CHECK(fo_eval(fo, ck, {}, phi));
  CHECK_THROWS_AS(fo_eval(fo, ck, {}, fo.prop(0, 2)), UnboundVariableError);
}

TEST_SUITE_END();
