#include <doctest.h>

#include <set>

#include "epistemia/acyclicity.hpp"
#include "epistemia/cayley.hpp"
#include "epistemia/corpus.hpp"
#include "oracles.hpp"

using namespace epistemia;

namespace {

CKStructure two_agent_mirror() {
  // two worlds, R_a = R_b = {{0,1}}: the canonical 2-cycle witness
  return ck_expand(two_world_clique());
}

}  // namespace

TEST_SUITE_BEGIN("acyclicity");

TEST_CASE("the mirrored two-world structure has a 2-cycle") {
  CKStructure ck = two_agent_mirror();
  auto cyc = find_coset_cycle(ck, 2);
  REQUIRE(cyc.has_value());
  CHECK(cyc->size() == 2);
  CHECK(is_coset_cycle(ck, *cyc));
  CHECK(!check_2acyclic_char(ck));
}

TEST_CASE("hand check of the definition on the 2-cycle") {
  CKStructure ck = two_agent_mirror();
  CosetCycle cyc{{0, 1}, {1, 2}};  // (0,{a}), (1,{b})
  CHECK(is_coset_cycle(ck, cyc));
  // breaking the hinge: alpha = beta makes the hinge classes intersect
  CosetCycle bad{{0, 1}, {1, 1}};
  CHECK(!is_coset_cycle(ck, bad));
}

TEST_CASE("tree unfoldings contain no coset cycles") {
  S5Structure base = two_world_clique();
  for (int depth : {2, 3}) {
    CKStructure ck = tree_unfold(base, 0, depth).ck;
    for (int n = 2; n <= depth + 1; ++n)
      CHECK(!find_coset_cycle(ck, n).has_value());
    CHECK(check_2acyclic_char(ck));
  }
}

TEST_CASE("cycle search agrees with exhaustive tuple enumeration") {
  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    S5Structure s = random_s5(rng, 1 + rng.below(4), 2, 1, 0.6, false);
    CKStructure ck = ck_expand(s);
    for (int n = 2; n <= 4; ++n) {
      auto mine = find_coset_cycle(ck, n);
      auto brute = oracle::exhaustive_coset_cycle(ck, n);
      CHECK(mine.has_value() == brute.has_value());
      if (mine) {
        CHECK((int)mine->size() <= n);
        CHECK(is_coset_cycle(ck, *mine));
      }
    }
  }
}

TEST_CASE("2-acyclicity characterization equals absence of 2-cycles") {
  Rng rng(73);
  int cyclic = 0, acyclic = 0;
  for (int trial = 0; trial < 60; ++trial) {
    S5Structure s = random_s5(rng, 1 + rng.below(6), 1 + rng.below(3), 1,
                              0.5, false);
    CKStructure ck = ck_expand(s);
    bool by_char = check_2acyclic_char(ck);
    bool by_search = !find_coset_cycle(ck, 2).has_value();
    CHECK(by_char == by_search);
    (by_char ? acyclic : cyclic)++;
  }
  CHECK(cyclic > 0);   // deliberately cyclic negatives occurred
  CHECK(acyclic > 0);
}

TEST_CASE("acyclicity is antitone in n") {
  Rng rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    S5Structure s = random_s5(rng, 2 + rng.below(4), 2, 1, 0.5, true);
    CKStructure ck = ck_expand(s);
    bool prev = true;
    for (int n = 2; n <= 5; ++n) {
      bool acyc = !find_coset_cycle(ck, n).has_value();
      CHECK((!acyc || prev || n == 2));
      if (n > 2) CHECK((prev || !acyc));
      prev = acyc;
    }
  }
}

TEST_CASE("agt on the chain") {
  CKStructure ck = ck_expand(chain_structure());
  REQUIRE(check_2acyclic_char(ck));
  CHECK(agt(ck, 0, 0) == 0);
  CHECK(agt(ck, 0, 1) == 1);   // {a}
  CHECK(agt(ck, 1, 2) == 2);   // {b}
  CHECK(agt(ck, 0, 2) == 3);   // {a,b}
  WorldId all[3] = {0, 1, 2};
  CHECK(agt(ck, std::span<const WorldId>(all, 3)) == 3);
}

TEST_CASE("agt verifies least (not just minimal) and preconditions") {
  CKStructure cyc = two_agent_mirror();
  CHECK_THROWS_AS(agt(cyc, 0, 1), Not2AcyclicError);
  // disconnected tuple
  S5Structure s;
  s.n = 2;
  s.agent_names = {"a"};
  s.prop_names = {"p0"};
  s.agents = {singleton_partition(2)};
  s.val = {{0, 0}};
  s.raw_edges = {{}};
  CKStructure ck = ck_expand(s);
  CHECK_THROWS_AS(agt(ck, 0, 1), NotConnectedTupleError);
}

TEST_CASE("agt on tree unfoldings matches enumeration over coalitions") {
  S5Structure base = chain_structure();
  CKStructure ck = tree_unfold(base, 0, 3).ck;
  REQUIRE(check_2acyclic_char(ck));
  auto table = agt_table(ck);
  for (WorldId u = 0; u < ck.n(); ++u)
    for (WorldId v = 0; v < ck.n(); ++v) {
      Coalition least = ck.full();
      bool any = false;
      for (Coalition a = 0; a < (Coalition)ck.num_masks(); ++a)
        if (ck.same_class(a, u, v)) {
          least &= a;
          any = true;
        }
      REQUIRE(any);
      CHECK(table[(size_t)u * ck.n() + v] == least);
      CHECK(ck.same_class(least, u, v));  // least element exists
    }
}

TEST_CASE("agt step laws hold on the unfolding corpus") {
  for (int depth : {2, 3}) {
    CKStructure ck = tree_unfold(chain_structure(), 0, depth).ck;
    AgtStepsReport rep = verify_agt_steps(ck);
    CHECK(rep.clean());
    CHECK(rep.checked > 0);
  }
  CKStructure single = ck_expand(singleton_structure());
  CHECK(verify_agt_steps(single).clean());
  CHECK_THROWS_AS(verify_agt_steps(two_agent_mirror()), Not2AcyclicError);
}

TEST_CASE("triangle law and the intersection lemma on 2-acyclic corpus") {
  std::vector<CKStructure> corpus;
  corpus.push_back(tree_unfold(chain_structure(), 0, 3).ck);
  corpus.push_back(tree_unfold(two_world_clique(), 0, 3).ck);
  for (const CKStructure& ck : corpus) {
    REQUIRE(check_2acyclic_char(ck));
    auto table = agt_table(ck);
    auto agt_of = [&](WorldId u, WorldId v) {
      return table[(size_t)u * ck.n() + v];
    };
    const int n = ck.n();
    for (WorldId v = 0; v < n; ++v)
      for (WorldId z0 = 0; z0 < n; ++z0)
        for (WorldId z = 0; z < n; ++z)
          CHECK(subset_of(agt_of(v, z), agt_of(v, z0) | agt_of(z0, z)));
    // intersection lemma on sampled triples: w in the intersection of
    // classes iff the intersection is the beta-class of w
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
      WorldId w1 = rng.below(n), w2 = rng.below(n), w3 = rng.below(n);
      Coalition a1 = (Coalition)rng.below(ck.num_masks());
      Coalition a2 = (Coalition)rng.below(ck.num_masks());
      Coalition a3 = (Coalition)rng.below(ck.num_masks());
      const Coalition beta = a1 & a2 & a3;
      std::set<WorldId> inter;
      for (WorldId x : ck.coset_of(w1, a1))
        if (ck.same_class(a2, x, w2) && ck.same_class(a3, x, w3))
          inter.insert(x);
      for (WorldId w = 0; w < n; ++w) {
        bool member = inter.count(w) > 0;
        const auto& bc = ck.coset_of(w, beta);
        bool equals = inter == std::set<WorldId>(bc.begin(), bc.end());
        CHECK(member == equals);
      }
    }
  }
}

TEST_SUITE_END();
