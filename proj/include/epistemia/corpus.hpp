#pragma once
// Deterministic corpus generation: random S5 structures and the derived
// covering/unfolding pipelines used by the test corpus and the CLI.
// Identical specs yield byte-identical structures.

#include "epistemia/cayley.hpp"
#include "epistemia/kripke.hpp"

namespace epistemia {

struct CorpusSpec {
  uint64_t seed = 0;
  int count = 10;
  int n_min = 2, n_max = 6;
  int agents = 2;
  int props = 1;
  double density = 0.3;     // chance of merging two blocks per agent
  bool connected = false;   // force joint connectivity
};

S5Structure random_s5(Rng& rng, int n, int agents, int props, double density,
                      bool connected);

std::vector<S5Structure> gen_corpus(const CorpusSpec& spec);

// Small named structures used across the test suites.
S5Structure chain_structure();     // 3 worlds, a:{0,1},{2}  b:{0},{1,2}
S5Structure two_world_clique();    // 2 worlds, both agents see {0,1}
S5Structure singleton_structure(int props = 1);

// Isomorphic copy with world w renamed to perm[w].
S5Structure relabel(const S5Structure& s, const std::vector<WorldId>& perm);

}  // namespace epistemia
