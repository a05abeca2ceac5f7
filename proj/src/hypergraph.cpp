#include "epistemia/hypergraph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace epistemia {

bool DualHypergraph::adjacent(int u, int v) const {
  const auto& a = adj[u];
  return std::binary_search(a.begin(), a.end(), v);
}

DualHypergraph dual(const CKStructure& ck) {
  DualHypergraph h;
  const int masks = ck.num_masks();
  h.vertex_of.resize(masks);
  for (Coalition a = 0; a < (Coalition)masks; ++a) {
    h.vertex_of[a].resize(ck.coalition[a].size());
    for (int cls = 0; cls < ck.coalition[a].size(); ++cls) {
      h.vertex_of[a][cls] = (int)h.verts.size();
      h.verts.push_back({a, cls});
    }
  }
  std::map<std::vector<int>, int> dedup;
  h.edge_of_world.resize(ck.n());
  for (WorldId w = 0; w < ck.n(); ++w) {
    std::vector<int> e;
    e.reserve(masks);
    for (Coalition a = 0; a < (Coalition)masks; ++a)
      e.push_back(h.vertex_of[a][ck.class_id(w, a)]);
    std::sort(e.begin(), e.end());
    auto it = dedup.find(e);
    if (it == dedup.end()) {
      it = dedup.emplace(e, (int)h.edges.size()).first;
      h.edges.push_back(e);
      h.witness.push_back(w);
    }
    h.edge_of_world[w] = it->second;
  }
  h.vert_edges.resize(h.verts.size());
  for (int e = 0; e < (int)h.edges.size(); ++e)
    for (int v : h.edges[e]) h.vert_edges[v].push_back(e);
  std::vector<std::vector<int>> adj(h.verts.size());
  for (const auto& e : h.edges)
    for (size_t i = 0; i < e.size(); ++i)
      for (size_t j = i + 1; j < e.size(); ++j) {
        adj[e[i]].push_back(e[j]);
        adj[e[j]].push_back(e[i]);
      }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  h.adj = std::move(adj);
  return h;
}

std::vector<int> dual_hyperedge(const DualHypergraph& h, const CKStructure& ck,
                                WorldId w) {
  (void)ck;
  return h.edges[h.edge_of_world[w]];
}

int gaifman_distance(const DualHypergraph& h, const std::vector<int>& X,
                     const std::vector<int>& Y, const std::vector<int>& t) {
  const int V = h.num_vertices();
  std::vector<uint8_t> blocked(V, 0), target(V, 0);
  for (int v : t) blocked[v] = 1;
  bool any_target = false;
  for (int v : Y)
    if (!blocked[v]) {
      target[v] = 1;
      any_target = true;
    }
  std::vector<int> dist(V, -1);
  std::deque<int> queue;
  for (int v : X)
    if (!blocked[v] && dist[v] < 0) {
      dist[v] = 0;
      queue.push_back(v);
    }
  if (queue.empty() || !any_target) return kInfiniteDistance;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (target[v]) return dist[v];
    for (int u : h.adj[v]) {
      if (blocked[u] || dist[u] >= 0) continue;
      dist[u] = dist[v] + 1;
      queue.push_back(u);
    }
  }
  return kInfiniteDistance;
}

// --- n-acyclicity ------------------------------------------------------------

namespace {

// DFS over cliques carrying the running intersection of incident hyperedge
// lists; a clique is uncovered exactly when that intersection runs empty.
struct CliqueSearch {
  const DualHypergraph& h;
  int n;
  std::vector<int> clique;
  std::vector<int> witness;

  bool grow(const std::vector<int>& edgeset, const std::vector<int>& cand) {
    if ((int)clique.size() >= n) return true;
    for (int v : cand) {
      clique.push_back(v);
      std::vector<int> next_edges;
      std::set_intersection(edgeset.begin(), edgeset.end(),
                            h.vert_edges[v].begin(), h.vert_edges[v].end(),
                            std::back_inserter(next_edges));
      if (next_edges.empty()) {
        witness = clique;
        return false;
      }
      std::vector<int> next_cand;
      for (int u : cand)
        if (u > v && h.adjacent(u, v)) next_cand.push_back(u);
      if (!grow(next_edges, next_cand)) return false;
      clique.pop_back();
    }
    return true;
  }

  bool run() {
    for (int v = 0; v < h.num_vertices(); ++v) {
      clique = {v};
      std::vector<int> cand;
      for (int u : h.adj[v])
        if (u > v) cand.push_back(u);
      if (!grow(h.vert_edges[v], cand)) return false;
    }
    return true;
  }
};

// DFS for a chordless cycle of length 4..n.
struct ChordlessCycleSearch {
  const DualHypergraph& h;
  int n;
  std::vector<int> path;
  std::vector<uint8_t> on_path;
  std::vector<int> witness;

  bool extend() {
    if ((int)path.size() >= n) return true;
    int tail = path.back();
    int start = path[0];
    for (int u : h.adj[tail]) {
      if (u <= start || on_path[u]) continue;
      bool chord = false;
      for (size_t i = 1; i + 1 < path.size() && !chord; ++i)
        if (h.adjacent(u, path[i])) chord = true;
      if (chord) continue;
      if (h.adjacent(u, start)) {
        if ((int)path.size() + 1 >= 4) {
          witness = path;
          witness.push_back(u);
          return false;
        }
        continue;  // closing a triangle; a chord blocks any longer use of u
      }
      path.push_back(u);
      on_path[u] = 1;
      if (!extend()) return false;
      on_path[u] = 0;
      path.pop_back();
    }
    return true;
  }

  bool run() {
    on_path.assign(h.num_vertices(), 0);
    for (int v = 0; v < h.num_vertices(); ++v) {
      path = {v};
      on_path[v] = 1;
      for (int w : h.adj[v]) {
        if (w <= v) continue;
        path.push_back(w);
        on_path[w] = 1;
        if (!extend()) return false;
        on_path[w] = 0;
        path.pop_back();
      }
      on_path[v] = 0;
    }
    return true;
  }
};

}  // namespace

HgAcyclicityResult is_n_acyclic_hg(const DualHypergraph& h, int n) {
  if (n < 3) throw Error("hypergraph n-acyclicity needs n >= 3");
  HgAcyclicityResult res;
  CliqueSearch cs{h, n, {}, {}};
  if (!cs.run()) {
    res.conformal = false;
    res.clique_witness = cs.witness;
  }
  ChordlessCycleSearch ccs{h, n, {}, {}, {}};
  if (!ccs.run()) {
    res.chordal = false;
    res.cycle_witness = ccs.witness;
  }
  return res;
}

// --- convex closures -----------------------------------------------------------

namespace {

std::vector<int> multi_source_distance(const DualHypergraph& h,
                                       const std::vector<uint8_t>& src) {
  std::vector<int> dist(h.num_vertices(), kInfiniteDistance);
  std::deque<int> queue;
  for (int v = 0; v < h.num_vertices(); ++v)
    if (src[v]) {
      dist[v] = 0;
      queue.push_back(v);
    }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : h.adj[v])
      if (dist[u] > dist[v] + 1) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
  }
  return dist;
}

// Enumerates chordless paths of length <= m from q; whenever a path ends in
// the set with an interior vertex outside it, those interiors are reported.
// dist_to_set is a lower bound on steps needed to re-enter the set, used to
// prune the DFS.
struct ClosurePathSearch {
  const DualHypergraph& h;
  int m;
  const std::vector<uint8_t>& in_set;
  const std::vector<int>& dist_to_set;
  std::vector<int> path;
  std::vector<uint8_t> on_path;
  std::vector<int> to_add;
  bool stop_on_first;
  bool found_violation = false;

  void extend() {
    if (found_violation && stop_on_first) return;
    int tail = path.back();
    for (int u : h.adj[tail]) {
      if (on_path[u]) continue;
      bool chord = false;
      for (size_t i = 0; i + 1 < path.size() && !chord; ++i)
        if (h.adjacent(u, path[i])) chord = true;
      if (chord) continue;
      if (in_set[u]) {
        for (size_t i = 1; i < path.size(); ++i) {
          if (!in_set[path[i]]) {
            found_violation = true;
            to_add.push_back(path[i]);
          }
        }
        if (found_violation && stop_on_first) return;
      }
      // path currently has path.size()-1 edges; adding u makes it
      // path.size(); only extend while that stays below m and a return to
      // the set is still possible
      if ((int)path.size() < m && (int)path.size() + dist_to_set[u] <= m) {
        path.push_back(u);
        on_path[u] = 1;
        extend();
        on_path[u] = 0;
        path.pop_back();
        if (found_violation && stop_on_first) return;
      }
    }
  }
};

// one sweep over all start vertices; returns interiors that must be added
std::vector<int> closure_sweep(const DualHypergraph& h,
                               const std::vector<uint8_t>& in_set, int m,
                               bool stop_on_first) {
  std::vector<int> dist = multi_source_distance(h, in_set);
  std::vector<int> additions;
  for (int q = 0; q < h.num_vertices(); ++q) {
    if (!in_set[q]) continue;
    ClosurePathSearch ps{h, m, in_set, dist, {}, {}, {}, stop_on_first};
    ps.on_path.assign(h.num_vertices(), 0);
    ps.path = {q};
    ps.on_path[q] = 1;
    ps.extend();
    additions.insert(additions.end(), ps.to_add.begin(), ps.to_add.end());
    if (stop_on_first && ps.found_violation) return additions;
  }
  std::sort(additions.begin(), additions.end());
  additions.erase(std::unique(additions.begin(), additions.end()),
                  additions.end());
  return additions;
}

}  // namespace

std::vector<int> cl_m(const DualHypergraph& h, const std::vector<int>& P,
                      int m) {
  if (m < 1) throw Error("cl_m needs m >= 1");
  std::vector<uint8_t> in_set(h.num_vertices(), 0);
  for (int v : P) in_set[v] = 1;
  while (true) {
    std::vector<int> add = closure_sweep(h, in_set, m, false);
    bool fresh = false;
    for (int v : add)
      if (!in_set[v]) {
        in_set[v] = 1;
        fresh = true;
      }
    if (!fresh) break;
  }
  std::vector<int> out;
  for (int v = 0; v < h.num_vertices(); ++v)
    if (in_set[v]) out.push_back(v);
  return out;
}

bool is_m_closed(const DualHypergraph& h, const std::vector<int>& Q, int m) {
  std::vector<uint8_t> in_set(h.num_vertices(), 0);
  for (int v : Q) in_set[v] = 1;
  return closure_sweep(h, in_set, m, true).empty();
}

AttachReport attach_region(const DualHypergraph& h, const std::vector<int>& Q,
                           int a, int m) {
  std::vector<uint8_t> in_q(h.num_vertices(), 0);
  for (int v : Q) in_q[v] = 1;
  {
    std::vector<int> dist = multi_source_distance(h, in_q);
    if (dist[a] < 1 || dist[a] > m)
      throw PreconditionDistanceError(
          "attach_region needs 1 <= d(Q, a) <= m, got " +
          std::to_string(dist[a] == kInfiniteDistance ? -1 : dist[a]));
  }
  AttachReport rep;
  std::vector<int> qa = Q;
  qa.push_back(a);
  std::sort(qa.begin(), qa.end());
  qa.erase(std::unique(qa.begin(), qa.end()), qa.end());
  rep.Q_hat = cl_m(h, qa, m);

  std::vector<int> new_part;
  std::vector<uint8_t> in_new(h.num_vertices(), 0);
  for (int v : rep.Q_hat)
    if (!in_q[v]) {
      new_part.push_back(v);
      in_new[v] = 1;
    }
  for (int v : Q) {
    for (int u : h.adj[v])
      if (in_new[u]) {
        rep.D.push_back(v);
        break;
      }
  }

  if (new_part.empty()) {
    rep.new_part_connected = true;
  } else {
    std::deque<int> queue{new_part[0]};
    std::vector<uint8_t> seen(h.num_vertices(), 0);
    seen[new_part[0]] = 1;
    int reached = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int u : h.adj[v])
        if (in_new[u] && !seen[u]) {
          seen[u] = 1;
          ++reached;
          queue.push_back(u);
        }
    }
    rep.new_part_connected = reached == (int)new_part.size();
  }

  {
    // separation at the scale of the round: no path of length <= m from
    // Q_hat \ Q into Q \ D once D is removed.  (A global reading is false
    // even on fully acyclic duals: the full-coalition vertex sits in every
    // hyperedge and connects everything at some length.)
    std::vector<uint8_t> in_d(h.num_vertices(), 0);
    for (int v : rep.D) in_d[v] = 1;
    std::deque<std::pair<int, int>> queue;
    std::vector<uint8_t> seen(h.num_vertices(), 0);
    for (int v : new_part)
      if (!in_d[v]) {
        queue.push_back({v, 0});
        seen[v] = 1;
      }
    rep.separates = true;
    while (!queue.empty()) {
      auto [v, d] = queue.front();
      queue.pop_front();
      if (in_q[v] && !in_d[v]) {
        rep.separates = false;
        break;
      }
      if (d >= m) continue;
      for (int u : h.adj[v]) {
        if (in_d[u] || seen[u]) continue;
        seen[u] = 1;
        queue.push_back({u, d + 1});
      }
    }
  }

  {
    std::vector<int> da = rep.D;
    da.push_back(a);
    std::sort(da.begin(), da.end());
    da.erase(std::unique(da.begin(), da.end()), da.end());
    std::vector<int> cl = cl_m(h, da, m);
    std::vector<uint8_t> member(h.num_vertices(), 0);
    for (int v : Q) member[v] = 1;
    for (int v : cl) member[v] = 1;
    std::vector<int> unions;
    for (int v = 0; v < h.num_vertices(); ++v)
      if (member[v]) unions.push_back(v);
    rep.decomposition = unions == rep.Q_hat;
  }

  rep.d_is_clique = true;
  for (size_t i = 0; i < rep.D.size() && rep.d_is_clique; ++i)
    for (size_t j = i + 1; j < rep.D.size(); ++j)
      if (!h.adjacent(rep.D[i], rep.D[j])) {
        rep.d_is_clique = false;
        break;
      }
  return rep;
}

// --- join trees ------------------------------------------------------------------

JoinTree join_tree_of(const DualHypergraph& h, const std::vector<int>& Q) {
  std::vector<uint8_t> in_q(h.num_vertices(), 0);
  for (int v : Q) in_q[v] = 1;
  std::map<std::vector<int>, int> dedup;
  std::vector<std::vector<int>> bags;
  std::vector<WorldId> bag_witness;
  for (size_t e = 0; e < h.edges.size(); ++e) {
    std::vector<int> r;
    for (int v : h.edges[e])
      if (in_q[v]) r.push_back(v);
    if (r.empty()) continue;
    if (dedup.emplace(r, (int)bags.size()).second) {
      bags.push_back(std::move(r));
      bag_witness.push_back(h.witness[e]);
    }
  }
  const int B = (int)bags.size();
  JoinTree jt;
  jt.parent.assign(B, -1);
  jt.bag = bags;
  jt.bag_witness = bag_witness;
  if (B == 0) return jt;

  std::vector<std::vector<int>> work = bags;
  std::vector<uint8_t> alive(B, 1);
  std::vector<int> occ(h.num_vertices(), 0);
  for (const auto& b : work)
    for (int v : b) ++occ[v];
  int alive_count = B;
  bool progress = true;
  while (alive_count > 1 && progress) {
    progress = false;
    for (int b = 0; b < B; ++b) {
      if (!alive[b]) continue;
      auto& vec = work[b];
      size_t before = vec.size();
      for (int v : vec)
        if (occ[v] == 1) --occ[v];  // vertex leaves the hypergraph
      vec.erase(std::remove_if(vec.begin(), vec.end(),
                               [&](int v) { return occ[v] == 0; }),
                vec.end());
      if (vec.size() != before) progress = true;
    }
    for (int b = 0; b < B && alive_count > 1; ++b) {
      if (!alive[b]) continue;
      for (int c = 0; c < B; ++c) {
        if (b == c || !alive[c]) continue;
        if (std::includes(work[c].begin(), work[c].end(), work[b].begin(),
                          work[b].end())) {
          jt.parent[b] = c;
          alive[b] = 0;
          --alive_count;
          for (int v : work[b]) --occ[v];
          progress = true;
          break;
        }
      }
    }
  }
  if (alive_count > 1) {
    std::vector<std::vector<int>> remainder;
    for (int b = 0; b < B; ++b)
      if (alive[b]) remainder.push_back(work[b]);
    throw NotAcyclicError(std::move(remainder));
  }
  // paths of absorbed bags may point at absorbed parents; that is fine, the
  // parent chain always ends at the single survivor
  return jt;
}

bool verify_join_tree(const DualHypergraph& h, const std::vector<int>& Q,
                      const JoinTree& jt) {
  std::vector<uint8_t> in_q(h.num_vertices(), 0);
  for (int v : Q) in_q[v] = 1;
  std::map<std::vector<int>, bool> needed;
  for (const auto& e : h.edges) {
    std::vector<int> r;
    for (int v : e)
      if (in_q[v]) r.push_back(v);
    if (!r.empty()) needed[r] = false;
  }
  int roots = 0;
  for (int b = 0; b < (int)jt.bag.size(); ++b)
    if (jt.parent[b] < 0) ++roots;
  if (!jt.bag.empty() && roots != 1) return false;
  for (const auto& b : jt.bag) {
    auto it = needed.find(b);
    if (it == needed.end()) return false;
    it->second = true;
  }
  for (const auto& [edge, hit] : needed) {
    (void)edge;
    if (!hit) return false;
  }
  const int B = (int)jt.bag.size();
  std::vector<std::vector<int>> children(B);
  for (int b = 0; b < B; ++b)
    if (jt.parent[b] >= 0) children[jt.parent[b]].push_back(b);
  for (int v : Q) {
    std::vector<int> holders;
    for (int b = 0; b < B; ++b)
      if (std::binary_search(jt.bag[b].begin(), jt.bag[b].end(), v))
        holders.push_back(b);
    if (holders.empty()) continue;
    std::vector<uint8_t> is_holder(B, 0), seen(B, 0);
    for (int b : holders) is_holder[b] = 1;
    std::deque<int> queue{holders[0]};
    seen[holders[0]] = 1;
    int reached = 1;
    while (!queue.empty()) {
      int b = queue.front();
      queue.pop_front();
      std::vector<int> nbrs = children[b];
      if (jt.parent[b] >= 0) nbrs.push_back(jt.parent[b]);
      for (int u : nbrs)
        if (is_holder[u] && !seen[u]) {
          seen[u] = 1;
          ++reached;
          queue.push_back(u);
        }
    }
    if (reached != (int)holders.size()) return false;
  }
  return true;
}

int measure_f(const DualHypergraph& h, int m, int k, int budget,
              uint64_t seed) {
  const int V = h.num_vertices();
  if (V == 0 || k <= 0) return 0;
  k = std::min(k, V);
  double combos = 1;
  for (int i = 0; i < k; ++i) combos = combos * (V - i) / (i + 1);
  int best = 0;
  auto consider = [&](const std::vector<int>& P) {
    best = std::max(best, (int)cl_m(h, P, m).size());
  };
  if (combos <= (double)budget) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      consider(idx);
      int i = k - 1;
      while (i >= 0 && idx[i] == V - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  } else {
    Rng rng(seed);
    for (int s = 0; s < budget; ++s) {
      std::vector<int> pick;
      while ((int)pick.size() < k) {
        int v = rng.below(V);
        if (std::find(pick.begin(), pick.end(), v) == pick.end())
          pick.push_back(v);
      }
      std::sort(pick.begin(), pick.end());
      consider(pick);
    }
  }
  return best;
}

}  // namespace epistemia
