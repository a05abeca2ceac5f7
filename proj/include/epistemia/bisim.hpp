#pragma once
// Bisimulation equivalence: coarsest stable partition (full game), bounded
// l-round refinement, and bisimilar-covering verification.

#include "epistemia/kripke.hpp"

namespace epistemia {

enum class BisimMode { S5, CK };

// Partition of the disjoint union of two structures (left worlds first).
struct BisimPartition {
  int n_left = 0;
  int rounds_to_stabilize = 0;
  std::vector<int> block;  // size n_left + n_right
  int num_blocks = 0;

  bool same(WorldId left_w, WorldId right_v) const {
    return block[left_w] == block[n_left + right_v];
  }
  bool same_joint(int u, int v) const { return block[u] == block[v]; }
};

// Two worlds end in one block iff Duplicator wins the unbounded game from
// them w.r.t. the chosen relation family (per-agent for S5, per-coalition
// for CK).
BisimPartition coarsest_bisimulation(const CKStructure& m,
                                     const CKStructure& n, BisimMode mode);

// Partition of a single structure by full bisimilarity with itself.
BisimPartition self_bisimulation(const CKStructure& m, BisimMode mode);

// Refinement levels 0..ell (level 0 = atomic types).  Levels past the
// stabilization point repeat the stable partition.
std::vector<BisimPartition> bisim_levels(const CKStructure& m,
                                         const CKStructure& n, BisimMode mode,
                                         int ell);

bool l_bisimilar(const CKStructure& m, WorldId w, const CKStructure& n,
                 WorldId v, int ell, BisimMode mode = BisimMode::CK);

// --- coverings --------------------------------------------------------------

struct CoveringMap {
  std::vector<WorldId> map;  // source world -> target world
};

struct CoveringCheck {
  enum Code { Ok, NotTotal, NotSurjective, NotHomomorphism, NotBisimilar };
  Code code = Ok;
  // witness data for failures
  WorldId u = -1, v = -1;
  AgentId agent = -1;
  int prop = -1;
  explicit operator bool() const { return code == Ok; }
  std::string describe() const;
};

// pi must be a surjective homomorphism (edges and valuation preserved) with
// every fiber point bisimilar to its image.
CoveringCheck check_covering(const CKStructure& source,
                             const CKStructure& target, const CoveringMap& pi);

}  // namespace epistemia
