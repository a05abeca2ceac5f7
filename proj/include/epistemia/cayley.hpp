#pragma once
// Cayley structures: finite bisimilar coverings built from permutation
// actions on W together with a hypercube parity component, truncated
// free-group unfoldings, and richness checking.
//
// A group element is represented as the pair (wperm, parity): its action on
// the covered world set W and its coordinate vector in the hypercube 2^E.
// The hypercube coordinates commute and never interact with W, so the word
// action factors exactly this way; equality of elements is equality of the
// two components.

#include "epistemia/bisim.hpp"
#include "epistemia/kripke.hpp"

namespace epistemia {

struct GeneratorId {
  WorldId u, v;   // unordered source edge, u <= v; u == v for loops
  AgentId agent;
  int copy = 0;   // richness index
};

struct GroupElement {
  std::vector<uint8_t> wperm;    // wperm[w] = w acted on by the element
  std::vector<uint64_t> parity;  // one bit per generator

  bool operator==(const GroupElement& o) const {
    return wperm == o.wperm && parity == o.parity;
  }
};

GroupElement ge_identity(int n_worlds, int n_generators);
GroupElement ge_mul(const GroupElement& a, const GroupElement& b);
GroupElement ge_inverse(const GroupElement& a);

struct GroupElementHash {
  size_t operator()(const GroupElement& g) const;
};

enum class EdgeSet { Full, Spanning };

constexpr size_t kDefaultElementCap = 200000;

struct CayleyStructure {
  CKStructure ck;      // the covering structure itself
  S5Structure source;  // the covered structure
  WorldId base_world = 0;
  CoveringMap covering;                 // element -> source world
  std::vector<GeneratorId> generators;  // index = parity coordinate
  // permutation representation (build_covering outputs)
  std::vector<GroupElement> elements;
  // reduced-word representation (tree_unfold outputs); entries index generators
  std::vector<std::vector<int32_t>> words;
  int truncation_depth = -1;

  bool truncated() const { return truncation_depth >= 0; }
};

// Hypercube covering: the group generated by one involution per tagged
// edge of m, acting on W and on the hypercube over the edge set.  edge_set
// Full takes every in-class pair plus every reflexive loop (the construction
// as written); Spanning takes one spanning chain per class, which covers the
// same structure at much smaller group order.  k_copies > 0 duplicates every
// generator with fresh parity coordinates, boosting local multiplicities.
CayleyStructure build_covering(const S5Structure& m, WorldId w0,
                               EdgeSet edge_set, int k_copies = 0,
                               size_t element_cap = kDefaultElementCap);

// Truncated unfolding over the free group with involutive generators: worlds
// are the reduced generator words of length <= depth.  Coalition classes are
// computed inside the truncation, so the covering/bisimilarity contract only
// holds for game depths that stay clear of the boundary.
CayleyStructure tree_unfold(const S5Structure& m, WorldId w0, int depth,
                            int k_copies = 0,
                            size_t element_cap = kDefaultElementCap);

struct RichnessViolation {
  Coalition alpha;
  int class_id;
  int bisim_block;
  int multiplicity;
};

struct RichnessResult {
  bool ok = true;
  std::optional<RichnessViolation> witness;
};

// k-richness: every bisimulation type realized in an alpha-class is realized
// there at least k times, for every non-empty coalition alpha (the empty
// coalition's classes are singletons by construction and are not counted).
RichnessResult check_richness(const CKStructure& c, int k);
inline RichnessResult check_richness(const CayleyStructure& c, int k) {
  return check_richness(c.ck, k);
}

// Largest k such that c is k-rich (0 on an empty structure).
int measured_richness(const CKStructure& c);

}  // namespace epistemia
