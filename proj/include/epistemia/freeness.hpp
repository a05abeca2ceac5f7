#pragma once
// Coset paths, t-distance, short_t, the triangle and push-away procedures,
// and (m,k)-freeness.
//
// All searches work on a fixed FreenessContext that certifies 2-acyclicity
// once and precomputes the dual hypergraph, the pairwise agt table and the
// full bisimulation blocks.  An avoid set t is stored as its defining pair
// (anchor, gamma); a step class [x]_alpha violates t exactly when it
// contains the anchor's gamma-class.

#include "epistemia/acyclicity.hpp"
#include "epistemia/bisim.hpp"
#include "epistemia/hypergraph.hpp"
#include "epistemia/kripke.hpp"

namespace epistemia {

struct FreenessContext {
  const CKStructure* ck = nullptr;
  DualHypergraph dual_h;
  std::vector<Coalition> agt_tab;  // n*n pairwise agt
  BisimPartition self_bisim;       // full CK bisimulation with itself
  std::vector<std::vector<WorldId>> block_members;
  int verified_n = 2;  // acyclicity verified up to this cycle length

  Coalition agt_of(WorldId u, WorldId v) const {
    return agt_tab[(size_t)u * ck->n() + v];
  }
  int block_of(WorldId u) const { return self_bisim.block[u]; }
  bool bisimilar(WorldId u, WorldId v) const {
    return self_bisim.block[u] == self_bisim.block[v];
  }
};

// Verifies 2-acyclicity (throws Not2AcyclicError) and records the acyclicity
// level verified by exhaustive cycle search up to verify_to.
FreenessContext make_freeness_context(const CKStructure& ck, int verify_to = 2);

// --- avoid sets ---------------------------------------------------------------

struct AvoidSet {
  WorldId anchor;
  Coalition gamma;
};

AvoidSet rho(const FreenessContext& ctx, WorldId v, Coalition gamma);

// true when [x]_alpha contains [anchor]_gamma, i.e. the class is one of the
// trivial connections the search must avoid
bool class_violates_t(const FreenessContext& ctx, const AvoidSet& t,
                      Coalition alpha, int class_id);

// the extent of t as dual-hypergraph vertices { [anchor]_beta : beta >= gamma }
std::vector<int> rho_dual_vertices(const FreenessContext& ctx,
                                   const AvoidSet& t);

// the widened extent { [anchor]_beta : [anchor]_gamma <= [anchor]_beta }; on
// genuine Cayley groups this equals the rho extent, and a truncated class
// can swallow the gamma-class without its coalition lying above gamma
std::vector<int> swallowed_dual_vertices(const FreenessContext& ctx,
                                         const AvoidSet& t);

// t as a set of classes contains the class [w]_alpha (set-wise comparison)
bool avoid_set_contains_class(const FreenessContext& ctx, const AvoidSet& t,
                              WorldId w, Coalition alpha);

// --- coset paths --------------------------------------------------------------

struct CosetPath {
  std::vector<WorldId> worlds;    // length len+1
  std::vector<Coalition> labels;  // length len
  int length() const { return (int)labels.size(); }
};

struct PathFlags {
  bool valid = false;       // separation conditions hold
  bool nontrivial = false;  // no step class contains [w1]_agt(endpoints)
  bool inner = false;       // every step class strictly below [w1]_agt
  bool non_t = false;       // no step class contains [anchor]_gamma
};

PathFlags classify_path(const FreenessContext& ctx, const CosetPath& path,
                        const std::optional<AvoidSet>& t);

// Minimal length of a non-t coset path from w to v (lengths <= cap), or
// kInfiniteDistance.  The optional witness receives a realizing path.
int t_distance(const FreenessContext& ctx, WorldId w, WorldId v,
               const AvoidSet& t, int cap, CosetPath* witness = nullptr);

int t_distance_set(const FreenessContext& ctx, const std::vector<WorldId>& zs,
                   WorldId v, const AvoidSet& t, int cap);

// Exhaustive enumeration of inner non-t coset paths from w to v of length
// <= len_max (test oracle for the distance lemmas); stops at max_count.
std::vector<CosetPath> enumerate_inner_non_t_paths(const FreenessContext& ctx,
                                                   WorldId w, WorldId v,
                                                   const AvoidSet& t,
                                                   int len_max,
                                                   size_t max_count = 100000);

struct ShortTResult {
  bool exists = false;
  Coalition direction = 0;   // intersection of first labels of short paths
  bool least_realized = false;  // the intersection is itself a first label
};

// First-step direction of short non-t coset paths from v to z.
ShortTResult short_t(const FreenessContext& ctx, WorldId v, WorldId z,
                     const AvoidSet& t, int cap);

// --- the step lemmas ------------------------------------------------------------

struct StepAwayViolation {
  AgentId agent;
  WorldId v_prime;
  Coalition short_at_vprime;
};

struct StepAwayReport {
  std::vector<StepAwayViolation> violations;
  uint64_t checked = 0;
  bool clean() const { return violations.empty(); }
};

// For every a outside short_t(v,z) and every v' in [v]_a \ {v} with
// d_t(v',z) <= m, asserts a in short_t(v',z).
StepAwayReport step_away_check(const FreenessContext& ctx, WorldId v, WorldId z,
                               Coalition gamma, int m);

// Moves v to a bisimilar copy v* with agt(v*,u) = agt(v*,z0) | agt(z0,u)
// while preserving agt(v*,z) for all z in zs.
WorldId triangle_step(const FreenessContext& ctx, WorldId v, WorldId u,
                      const std::vector<WorldId>& zs, WorldId z0);

struct PushAwayTranscript {
  std::vector<AgentId> a_seq;
  std::vector<Coalition> beta_seq;   // beta_0, beta_1, ...
  std::vector<Coalition> gamma_seq;  // gamma_0, gamma_1, ...
  std::vector<WorldId> v_seq;        // v_0 = v, v_1, ...
  bool property1 = true;  // beta_n = {a_j..a_n} or >= beta_0 + {a_1..a_n}
  bool property3 = true;  // gamma strictly decreasing
};

// Pushes v beyond t-distance m from w while keeping distance > m to zs and
// preserving all agt values; the appendix construction.
WorldId push_away(const FreenessContext& ctx, WorldId w, WorldId v,
                  const std::vector<WorldId>& zs, WorldId z0, int m,
                  PushAwayTranscript* transcript = nullptr);

// --- freeness -------------------------------------------------------------------

bool is_m_free(const FreenessContext& ctx, WorldId v,
               const std::vector<WorldId>& zs, WorldId z0, int m);

// Finds v* ~ v with agt(v*, z0) = gamma and (zs, z0) m-free from v*.
WorldId find_free_witness(const FreenessContext& ctx, WorldId v,
                          const std::vector<WorldId>& zs, WorldId z0,
                          Coalition gamma, int m);

struct MkFreeCounterexample {
  WorldId v;
  std::vector<WorldId> zs;
  WorldId z0;
  Coalition gamma;
};

struct MkFreeOptions {
  // additionally run find_free_witness on this many witnessed cells and
  // cross-check the construction against the exhaustive verdict
  int procedure_samples = 0;
  uint64_t seed = 1;
};

struct MkFreeResult {
  bool ok = true;
  std::optional<MkFreeCounterexample> counterexample;
  uint64_t cells = 0;
  uint64_t procedure_runs = 0;
  uint64_t procedure_hits = 0;    // construction found a valid witness
  uint64_t procedure_misses = 0;  // construction failed though one exists
};

// Exhaustive freeness check over all v, pointed sets |zs| <= k and
// gamma >= agt(v, z0); decided by dual-hypergraph scans, with the witness
// construction exercised on sampled cells.
MkFreeResult check_mk_free(const FreenessContext& ctx, int m, int k,
                           const MkFreeOptions& opts = {});

}  // namespace epistemia
