#pragma once
// Coset cycles, n-acyclicity, the 2-acyclicity characterization, and the
// minimal connecting coalition agt with its step laws.
//
// A coset cycle of length m >= 2 is a cyclic tuple (w_i, alpha_i) with
// (w_i, w_{i+1}) in R_{alpha_i} and empty hinge intersections
// [w_i]_{alpha_{i-1} & alpha_i} cap [w_{i+1}]_{alpha_i & alpha_{i+1}}.
// The search runs on a quotient graph whose nodes are hinge classes keyed by
// ((alpha_prev, alpha_cur), class id): cycle validity only depends on worlds
// through these classes, which prunes rotations of the same witness.

#include <optional>
#include <span>

#include "epistemia/kripke.hpp"

namespace epistemia {

struct CosetCycleStep {
  WorldId world;
  Coalition alpha;
};
using CosetCycle = std::vector<CosetCycleStep>;

// Witness cycle of length <= n, or nullopt.  n >= 2.
std::optional<CosetCycle> find_coset_cycle(const CKStructure& ck, int n);

// Checks that the found tuple really satisfies the definition (used by
// tests, the CLI, and the search itself before returning).
bool is_coset_cycle(const CKStructure& ck, const CosetCycle& cycle);

// Intersection characterization: 2-acyclic iff
// [w]_alpha cap [w]_beta = [w]_{alpha cap beta} for all w, alpha, beta.
bool check_2acyclic_char(const CKStructure& ck);

// Largest n in [2, n_max] with no coset cycle of length <= n; 1 when even a
// 2-cycle exists.
int verified_acyclicity(const CKStructure& ck, int n_max = 6);

// Least coalition placing all of ws in one class.  Requires 2-acyclicity
// (checked unless check_pre is false); NoLeastElement signals a violation.
Coalition agt(const CKStructure& ck, std::span<const WorldId> ws,
              bool check_pre = true);
inline Coalition agt(const CKStructure& ck, WorldId u, WorldId v,
                     bool check_pre = true) {
  WorldId ws[2] = {u, v};
  return agt(ck, ws, check_pre);
}

// Pairwise agt for every world pair, computed without the per-call
// 2-acyclicity sweep (the caller certifies it once).
std::vector<Coalition> agt_table(const CKStructure& ck);

struct AgtStepsViolation {
  int clause;  // 1 or 2
  WorldId w, v;
  AgentId a;
  std::string detail;
};

struct AgtStepsReport {
  std::vector<AgtStepsViolation> violations;
  uint64_t checked = 0;
  bool clean() const { return violations.empty(); }
};

// Exhaustive check of the two agt step laws over all (w, v, a):
//  (1) a not in agt(w,v), v' in [v]_a \ {v}  =>  agt(w,v') = agt(w,v) + {a}
//  (2) a in agt(w,v)  =>  at most one v' in [v]_a with
//      agt(w,v') = agt(w,v) - {a}
AgtStepsReport verify_agt_steps(const CKStructure& ck);

}  // namespace epistemia
