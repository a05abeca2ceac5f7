#pragma once
// Test-only oracles: deliberately naive, independent implementations that
// the fast library code is checked against.  Nothing here shares algorithms
// with the implementation paths under test.

#include <optional>
#include <vector>

#include "epistemia/acyclicity.hpp"
#include "epistemia/bisim.hpp"
#include "epistemia/hypergraph.hpp"
#include "epistemia/kripke.hpp"

namespace epistemia::oracle {

// Boolean-matrix reachability (Floyd-Warshall style) over the union of the
// member relations; returns block ids per world.
std::vector<int> reachability_partition(const S5Structure& s, Coalition mask);

// Greatest-fixpoint bisimulation: start from atomic-type pairs and delete
// pairs violating back&forth until stable.  Entry [u][v] over the disjoint
// union (left first).
std::vector<std::vector<bool>> naive_bisim_fixpoint(const CKStructure& m,
                                                    const CKStructure& n,
                                                    BisimMode mode);

// Minimax l-round bisimulation game search.
bool game_tree_l_bisim(const CKStructure& m, WorldId w, const CKStructure& n,
                       WorldId v, int l, BisimMode mode);

// Exhaustive enumeration of coset cycles up to length n (tiny inputs only).
std::optional<CosetCycle> exhaustive_coset_cycle(const CKStructure& ck, int n);

// Adjacency-matrix powering distance in the Gaifman graph of h restricted
// away from t.
int matrix_power_distance(const DualHypergraph& h, const std::vector<int>& X,
                          const std::vector<int>& Y, const std::vector<int>& t);

// Checks m-closedness by brute-force path enumeration (no chord pruning
// shortcuts; every simple path is inspected and chords checked afterwards).
bool brute_m_closed(const DualHypergraph& h, const std::vector<int>& Q, int m);

}  // namespace epistemia::oracle
