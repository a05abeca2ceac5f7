#pragma once
// The q-round first-order Ehrenfeucht-Fraisse machinery: distance/bisimation
// schedules, the Duplicator invariant engine over dual-hypergraph tree
// decompositions, the description formula phi_T, the brute-force EF oracle,
// and the upgrading experiment.

#include <map>

#include "epistemia/formula.hpp"
#include "epistemia/cayley.hpp"
#include "epistemia/freeness.hpp"
#include "epistemia/hypergraph.hpp"

namespace epistemia {

struct Schedules {
  int q = 0;
  // m[i] and ell[i] are the round-i values, i = 0..q; m[q] = 2, ell[q] = 1,
  // m[i-1] = 2 m[i] + 1 and ell[i-1] = ell[i] + f_hat(m[i], |tau|+1)
  std::vector<int> m;
  std::vector<int> ell;
  std::vector<std::pair<int, int>> fhat_calls;  // (m_i, value) per round

  int ell0() const { return ell[0]; }
};

Schedules make_schedules(int q, const std::function<int(int, int)>& f_hat,
                         int tau_size);

// --- phi_T -------------------------------------------------------------------

// Tree skeleton with world labels; node 0 need not be the root, the root is
// the unique node with parent -1.
struct WorldTree {
  std::vector<int> parent;
  std::vector<WorldId> world;
};

struct NotConnectedTreeError : Error {
  explicit NotConnectedTreeError(const std::string& w) : Error(w) {}
};

// chi_{w_root} wedged with one diamond per child subtree, coalitions from
// agt of the endpoints.
FormulaId build_phi_T(FormulaPool& pool, const FreenessContext& ctx,
                      const WorldTree& tree, int ell);

// --- the Duplicator engine -----------------------------------------------------

struct GameNode {
  int parent = -1;
  std::vector<int> bag_left, bag_right;  // dual vertices per side
  WorldId w_left = -1, w_right = -1;     // delta-hat images
};

struct SpoilerMove {
  int side;       // 0 = left structure, 1 = right
  WorldId world;
};

struct GameInvariant {
  const FreenessContext* left = nullptr;
  const FreenessContext* right = nullptr;
  Schedules sched;
  int round = 0;
  std::vector<GameNode> tree;
  std::vector<int> q_left, q_right;  // sorted dual-vertex sets
  std::vector<std::pair<WorldId, WorldId>> pebbles;
  std::map<WorldId, WorldId> sigma, sigma_inv;
  std::vector<BisimPartition> levels;  // joint CK bisim levels 0..ell0

  bool lbisim(WorldId wl, WorldId vr, int l) const {
    const auto& part = levels[std::min<size_t>(l, levels.size() - 1)];
    return part.same(wl, vr);
  }
  WorldId response() const { return pebbles.back().second; }
};

// Requires l_bisimilar(w0, v0) at level sched.ell0().
GameInvariant init_game(const FreenessContext& left,
                        const FreenessContext& right, WorldId w0, WorldId v0,
                        Schedules sched);

// One round: updates closures, trees and sigma, chooses the response via
// freeness witnesses, and re-verifies every invariant bullet.  Throws
// InvariantBrokenError / FreenessUnavailableError with the failing detail.
void duplicator_round(GameInvariant& inv, SpoilerMove move);

// All invariant bullets, checked from scratch (used after every round and by
// tests); returns a description of the first failure or empty string.
std::string verify_invariant(const GameInvariant& inv);

// --- brute-force oracle ----------------------------------------------------------

// Exhaustive minimax for the q-round EF game on the FO signature
// {R_alpha, P_i, =} starting from position (w, v).
bool fo_ef_oracle(const CKStructure& m, WorldId w, const CKStructure& n,
                  WorldId v, int q);

// --- the experiment ---------------------------------------------------------------

struct UpgradeReport {
  int q = 0;
  Schedules sched;
  int f_hat_budget = 0;
  int verified_n_left = 0, verified_n_right = 0;
  int richness_left = 0, richness_right = 0;
  bool out_of_warranty = false;  // verified acyclicity below 2*m_1+1
  bool l_bisimilar = false;
  bool oracle_equivalent = false;
  bool replay_survived = false;
  uint64_t replay_lines = 0;
  std::string failure;
  bool conclusion_holds() const {
    return !l_bisimilar || (oracle_equivalent && replay_survived);
  }
};

struct UpgradeOptions {
  int acyclicity_gate = 5;   // minimum verified n (2*m_q + 1)
  int richness_gate = 1;   // truncations never exceed 1 at the boundary
  uint64_t seed = 7;
  int f_budget = 400;        // closure-measurement samples per f_hat call
  int q3_samples = 64;       // sampled spoiler lines at q = 3
};

// Gates both structures, builds schedules from measured closures, checks
// l-bisimilarity at ell(q) and, when it holds, demands oracle equivalence
// plus an exhaustive Duplicator replay.
UpgradeReport upgrade_experiment(const FreenessContext& left, WorldId w,
                                 const FreenessContext& right, WorldId v,
                                 int q, const UpgradeOptions& opts = {});

}  // namespace epistemia
