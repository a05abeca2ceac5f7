#pragma once
// Dual hypergraphs of CK frames and the closure/decomposition machinery:
// Gaifman distances, n-acyclicity (conformality + chordality), convex
// m-closures, attach regions, GYO join trees, and the measured closure
// bound f_hat.
//
// Vertices are keyed by (coalition, class id), never by extent: a coset that
// happens to be extent-equal under two coalitions gives two distinct
// vertices, matching the disjoint-union reading of the dual.

#include <optional>

#include "epistemia/kripke.hpp"

namespace epistemia {

constexpr int kInfiniteDistance = 1 << 30;

struct DualHypergraph {
  struct Vertex {
    Coalition color;
    int class_id;
  };
  std::vector<Vertex> verts;
  std::vector<std::vector<int>> vertex_of;   // [mask][class_id] -> vertex id
  std::vector<std::vector<int>> edges;       // hyperedges, sorted vertex ids
  std::vector<WorldId> witness;              // hyperedge -> inducing world
  std::vector<int> edge_of_world;            // world -> hyperedge index
  std::vector<std::vector<int>> adj;         // Gaifman adjacency, sorted
  std::vector<std::vector<int>> vert_edges;  // vertex -> incident hyperedges

  int num_vertices() const { return (int)verts.size(); }
  bool adjacent(int u, int v) const;
};

DualHypergraph dual(const CKStructure& ck);

// Dual hyperedge of a world: every coset [w]_alpha as a vertex id.
std::vector<int> dual_hyperedge(const DualHypergraph& h, const CKStructure& ck,
                                WorldId w);

// BFS distance between X\t and Y\t in the sub-hypergraph induced on V\t;
// 0 when they intersect, kInfiniteDistance when disconnected or empty.
int gaifman_distance(const DualHypergraph& h, const std::vector<int>& X,
                     const std::vector<int>& Y, const std::vector<int>& t);

struct HgAcyclicityResult {
  bool conformal = true;
  bool chordal = true;
  std::vector<int> clique_witness;  // uncovered clique, when !conformal
  std::vector<int> cycle_witness;   // chordless cycle, when !chordal
  bool ok() const { return conformal && chordal; }
};

// n-conformality: every Gaifman clique of size <= n lies in a hyperedge.
// n-chordality: every Gaifman cycle of length 4..n has a chord.
HgAcyclicityResult is_n_acyclic_hg(const DualHypergraph& h, int n);

// Convex m-closure: least superset of P containing every chordless path of
// length <= m between its members.  Returns a sorted vertex set.
std::vector<int> cl_m(const DualHypergraph& h, const std::vector<int>& P,
                      int m);

bool is_m_closed(const DualHypergraph& h, const std::vector<int>& Q, int m);

struct AttachReport {
  std::vector<int> Q_hat;  // cl_m(Q + {a})
  std::vector<int> D;      // Q cap N^1(Q_hat \ Q)
  bool new_part_connected = false;
  // removing D leaves no path of length <= m from Q_hat\Q into Q\D; the
  // full-coalition vertex touches every hyperedge, so separation is only
  // meaningful at the scale of the round
  bool separates = false;
  bool decomposition = false;  // Q_hat = Q cup cl_m(D + {a})
  bool d_is_clique = false;
  bool all_ok() const {
    return new_part_connected && separates && decomposition && d_is_clique;
  }
};

struct PreconditionDistanceError : Error {
  explicit PreconditionDistanceError(const std::string& w) : Error(w) {}
};

// Requires 1 <= d(Q, a) <= m; evaluates the four attach assertions.
AttachReport attach_region(const DualHypergraph& h, const std::vector<int>& Q,
                           int a, int m);

struct JoinTree {
  std::vector<int> parent;            // -1 at the root
  std::vector<std::vector<int>> bag;  // restricted hyperedges, sorted
  std::vector<WorldId> bag_witness;   // world whose hyperedge covers the bag
};

struct NotAcyclicError : Error {
  std::vector<std::vector<int>> remainder;  // stuck hyperedges
  explicit NotAcyclicError(std::vector<std::vector<int>> rem)
      : Error("restriction is not an acyclic hypergraph"),
        remainder(std::move(rem)) {}
};

// GYO-style ear removal on the sub-hypergraph induced on Q.
JoinTree join_tree_of(const DualHypergraph& h, const std::vector<int>& Q);

// image(bags) covers every hyperedge of the restriction and each vertex's
// occurrence set is connected in the tree.
bool verify_join_tree(const DualHypergraph& h, const std::vector<int>& Q,
                      const JoinTree& jt);

// Empirical stand-in for the closure-size bound: max |cl_m(P)| over P with
// |P| <= k, exhaustive when C(|V|, k) <= budget, else seeded sampling.
int measure_f(const DualHypergraph& h, int m, int k, int budget = 2000,
              uint64_t seed = 0);

}  // namespace epistemia
