#include "epistemia/efgame.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace epistemia {

Schedules make_schedules(int q, const std::function<int(int, int)>& f_hat,
                         int tau_size) {
  if (q < 1) throw Error("schedules need q >= 1");
  Schedules s;
  s.q = q;
  s.m.assign(q + 1, 0);
  s.ell.assign(q + 1, 0);
  s.m[q] = 2;
  for (int i = q; i > 0; --i) s.m[i - 1] = 2 * s.m[i] + 1;
  s.ell[q] = 1;
  for (int i = q; i > 0; --i) {
    const int f = f_hat(s.m[i], tau_size + 1);
    s.fhat_calls.push_back({s.m[i], f});
    s.ell[i - 1] = s.ell[i] + f;
  }
  return s;
}

// --- phi_T ---------------------------------------------------------------------

FormulaId build_phi_T(FormulaPool& pool, const FreenessContext& ctx,
                      const WorldTree& tree, int ell) {
  const int N = (int)tree.parent.size();
  if (N == 0 || (int)tree.world.size() != N)
    throw NotConnectedTreeError("tree skeleton is empty or inconsistent");
  int root = -1;
  std::vector<std::vector<int>> children(N);
  for (int u = 0; u < N; ++u) {
    if (tree.parent[u] < 0) {
      if (root >= 0) throw NotConnectedTreeError("tree has two roots");
      root = u;
    } else if (tree.parent[u] >= N) {
      throw NotConnectedTreeError("parent index out of range");
    } else {
      children[tree.parent[u]].push_back(u);
    }
  }
  if (root < 0) throw NotConnectedTreeError("tree has no root");
  {
    std::vector<uint8_t> seen(N, 0);
    std::vector<int> stack{root};
    seen[root] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int c : children[u])
        if (!seen[c]) {
          seen[c] = 1;
          ++count;
          stack.push_back(c);
        }
    }
    if (count != N) throw NotConnectedTreeError("tree is not connected");
  }
  std::function<FormulaId(int)> rec = [&](int u) -> FormulaId {
    std::vector<FormulaId> parts{
        characteristic_formula(pool, *ctx.ck, tree.world[u], ell)};
    for (int c : children[u]) {
      const Coalition a = ctx.agt_of(tree.world[u], tree.world[c]);
      parts.push_back(pool.diamond(a, rec(c)));
    }
    return pool.conj(std::move(parts));
  };
  return rec(root);
}

// --- invariant engine ------------------------------------------------------------

namespace {

struct SideRef {
  const FreenessContext* ctx;
  std::vector<int>* Q;
  bool is_left;

  const std::vector<int>& bag(const GameNode& n) const {
    return is_left ? n.bag_left : n.bag_right;
  }
  WorldId world(const GameNode& n) const {
    return is_left ? n.w_left : n.w_right;
  }
};

int empty_vertex_of(const FreenessContext& ctx, WorldId w) {
  return ctx.dual_h.vertex_of[0][ctx.ck->class_id(w, 0)];
}

bool contains_sorted(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}

std::vector<int> sorted_union(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// worlds whose hyperedge covers the bag, ascending
std::vector<WorldId> bag_candidates(const FreenessContext& ctx,
                                    const std::vector<int>& bag) {
  const CKStructure& ck = *ctx.ck;
  const std::vector<WorldId>* smallest = nullptr;
  for (int vid : bag) {
    const auto& vert = ctx.dual_h.verts[vid];
    const auto& cls = ck.coalition[vert.color].blocks[vert.class_id];
    if (!smallest || cls.size() < smallest->size()) smallest = &cls;
  }
  std::vector<WorldId> out;
  if (!smallest) return out;
  for (WorldId x : *smallest) {
    bool all = true;
    for (int vid : bag) {
      const auto& vert = ctx.dual_h.verts[vid];
      if (ck.class_id(x, vert.color) != vert.class_id) {
        all = false;
        break;
      }
    }
    if (all) out.push_back(x);
  }
  return out;
}

std::vector<int> mirror_bag(const FreenessContext& from,
                            const FreenessContext& to,
                            const std::vector<int>& bag, WorldId to_world) {
  std::vector<int> out;
  out.reserve(bag.size());
  for (int vid : bag) {
    const Coalition color = from.dual_h.verts[vid].color;
    out.push_back(
        to.dual_h.vertex_of[color][to.ck->class_id(to_world, color)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

GameInvariant init_game(const FreenessContext& left,
                        const FreenessContext& right, WorldId w0, WorldId v0,
                        Schedules sched) {
  GameInvariant inv;
  inv.left = &left;
  inv.right = &right;
  inv.sched = std::move(sched);
  inv.levels =
      bisim_levels(*left.ck, *right.ck, BisimMode::CK, inv.sched.ell0());
  if (!inv.lbisim(w0, v0, inv.sched.ell0()))
    throw InvariantBrokenError("initial worlds are not ell(q)-bisimilar");
  GameNode root;
  root.parent = -1;
  root.bag_left = {empty_vertex_of(left, w0)};
  root.bag_right = {empty_vertex_of(right, v0)};
  root.w_left = w0;
  root.w_right = v0;
  inv.tree.push_back(root);
  inv.q_left = root.bag_left;
  inv.q_right = root.bag_right;
  inv.pebbles.push_back({w0, v0});
  inv.sigma[w0] = v0;
  inv.sigma_inv[v0] = w0;
  return inv;
}

std::string verify_invariant(const GameInvariant& inv) {
  const FreenessContext& L = *inv.left;
  const FreenessContext& R = *inv.right;
  const int round = inv.round;
  const int m_i = inv.sched.m[round];
  const int ell_i = inv.sched.ell[round];

  for (auto [w, v] : inv.pebbles) {
    auto it = inv.sigma.find(w);
    if (it == inv.sigma.end() || it->second != v)
      return "pebble pair not matched by sigma";
  }
  for (auto [w, v] : inv.sigma) {
    auto it = inv.sigma_inv.find(v);
    if (it == inv.sigma_inv.end() || it->second != w)
      return "sigma is not a bijection";
  }
  for (auto [w, v] : inv.sigma) {
    if (L.ck->base.atomic_type(w) != R.ck->base.atomic_type(v))
      return "matched worlds differ atomically";
    if (!inv.lbisim(w, v, ell_i)) return "matched worlds below ell_i";
    for (auto [w2, v2] : inv.sigma) {
      for (Coalition a = 0; a < (Coalition)L.ck->num_masks(); ++a) {
        if (L.ck->same_class(a, w, w2) != R.ck->same_class(a, v, v2))
          return "sigma is not a partial isomorphism";
      }
    }
  }
  if (!is_m_closed(L.dual_h, inv.q_left, m_i)) return "Q_left not m_i-closed";
  if (!is_m_closed(R.dual_h, inv.q_right, m_i))
    return "Q_right not m_i-closed";
  for (const GameNode& node : inv.tree) {
    if (node.bag_left.size() != node.bag_right.size())
      return "bag sizes differ";
    for (int vid : node.bag_left) {
      const auto& vl = L.dual_h.verts[vid];
      if (L.ck->class_id(node.w_left, vl.color) != vl.class_id)
        return "left bag outside its world's hyperedge";
      if (!contains_sorted(inv.q_left, vid)) return "left bag outside Q";
    }
    std::vector<int> mirrored = mirror_bag(L, R, node.bag_left, node.w_right);
    if (mirrored != node.bag_right) return "bags are not sigma-compatible";
    for (int vid : node.bag_right)
      if (!contains_sorted(inv.q_right, vid)) return "right bag outside Q";
    auto its = inv.sigma.find(node.w_left);
    if (its == inv.sigma.end() || its->second != node.w_right)
      return "tree node worlds not matched by sigma";
  }
  for (int side = 0; side < 2; ++side) {
    const FreenessContext& C = side == 0 ? L : R;
    const std::vector<int>& Q = side == 0 ? inv.q_left : inv.q_right;
    std::set<std::vector<int>> restricted;
    for (const auto& e : C.dual_h.edges) {
      std::vector<int> r;
      for (int v : e)
        if (contains_sorted(Q, v)) r.push_back(v);
      if (!r.empty()) restricted.insert(std::move(r));
    }
    for (const auto& r : restricted) {
      bool covered = false;
      for (const GameNode& node : inv.tree) {
        const auto& bag = side == 0 ? node.bag_left : node.bag_right;
        if (std::includes(bag.begin(), bag.end(), r.begin(), r.end())) {
          covered = true;
          break;
        }
      }
      if (!covered) return "restricted hyperedge not covered by any bag";
    }
    const int N = (int)inv.tree.size();
    std::vector<std::vector<int>> children(N);
    for (int u = 0; u < N; ++u)
      if (inv.tree[u].parent >= 0) children[inv.tree[u].parent].push_back(u);
    for (int vid : Q) {
      std::vector<int> holders;
      for (int u = 0; u < N; ++u) {
        const auto& bag =
            side == 0 ? inv.tree[u].bag_left : inv.tree[u].bag_right;
        if (contains_sorted(bag, vid)) holders.push_back(u);
      }
      if (holders.empty()) return "Q vertex not represented in any bag";
      std::vector<uint8_t> is_holder(N, 0), seen(N, 0);
      for (int u : holders) is_holder[u] = 1;
      std::vector<int> stack{holders[0]};
      seen[holders[0]] = 1;
      int reached = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        std::vector<int> nbrs = children[u];
        if (inv.tree[u].parent >= 0) nbrs.push_back(inv.tree[u].parent);
        for (int x : nbrs)
          if (is_holder[x] && !seen[x]) {
            seen[x] = 1;
            ++reached;
            stack.push_back(x);
          }
      }
      if (reached != (int)holders.size())
        return "vertex occurrences disconnected in the tree";
    }
  }
  return "";
}

void duplicator_round(GameInvariant& inv, SpoilerMove move) {
  if (inv.round >= inv.sched.q)
    throw Error("duplicator_round called after the final round");
  const int i = inv.round + 1;
  const int m_i = inv.sched.m[i];
  const int ell_i = inv.sched.ell[i];
  const int ell_prev = inv.sched.ell[i - 1];

  const bool spoiler_left = move.side == 0;
  SideRef A{spoiler_left ? inv.left : inv.right,
            spoiler_left ? &inv.q_left : &inv.q_right, spoiler_left};
  SideRef B{spoiler_left ? inv.right : inv.left,
            spoiler_left ? &inv.q_right : &inv.q_left, !spoiler_left};
  std::map<WorldId, WorldId>& a2b = spoiler_left ? inv.sigma : inv.sigma_inv;
  std::map<WorldId, WorldId>& b2a = spoiler_left ? inv.sigma_inv : inv.sigma;

  const WorldId w_new = move.world;
  if (w_new < 0 || w_new >= A.ctx->ck->n())
    throw Error("spoiler world out of range");
  const int va = empty_vertex_of(*A.ctx, w_new);

  auto finish = [&](WorldId response) {
    inv.round = i;
    if (spoiler_left)
      inv.pebbles.push_back({w_new, response});
    else
      inv.pebbles.push_back({response, w_new});
    std::string bad = verify_invariant(inv);
    if (!bad.empty()) throw InvariantBrokenError(bad);
  };

  if (contains_sorted(*A.Q, va)) {
    auto it = a2b.find(w_new);
    if (it == a2b.end())
      throw InvariantBrokenError("world inside Q but not matched by sigma");
    finish(it->second);
    return;
  }

  // closure growth on the spoiler side: attach the new region through a
  // clique separator
  AttachReport attach = attach_region(A.ctx->dual_h, *A.Q, va, m_i);
  if (!attach.new_part_connected)
    throw InvariantBrokenError("attach: new closure part is disconnected");
  if (!attach.d_is_clique)
    throw InvariantBrokenError("attach: region D is not a clique");
  if (!attach.decomposition)
    throw InvariantBrokenError("attach: closure decomposition identity fails");
  if (!attach.separates)
    throw InvariantBrokenError("attach: D does not separate the new part");

  std::vector<int> new_part;
  for (int v : attach.Q_hat)
    if (!contains_sorted(*A.Q, v)) new_part.push_back(v);
  std::vector<int> region = sorted_union(new_part, attach.D);

  int attach_node = -1;
  for (int u = 0; u < (int)inv.tree.size() && attach_node < 0; ++u) {
    const auto& bag = A.bag(inv.tree[u]);
    if (std::includes(bag.begin(), bag.end(), attach.D.begin(),
                      attach.D.end()))
      attach_node = u;
  }
  if (attach_node < 0)
    throw InvariantBrokenError("attach region D not inside any old bag");
  const WorldId w_anchor = A.world(inv.tree[attach_node]);
  const WorldId v_anchor = a2b.at(w_anchor);

  JoinTree jt = join_tree_of(A.ctx->dual_h, region);
  std::vector<int> anchor_bag;
  {
    const auto& edge =
        A.ctx->dual_h.edges[A.ctx->dual_h.edge_of_world[w_anchor]];
    for (int v : edge)
      if (contains_sorted(region, v)) anchor_bag.push_back(v);
  }
  int jt_root = -1;
  for (int b = 0; b < (int)jt.bag.size(); ++b)
    if (jt.bag[b] == anchor_bag) jt_root = b;
  for (int b = 0; b < (int)jt.bag.size() && jt_root < 0; ++b)
    if (std::includes(jt.bag[b].begin(), jt.bag[b].end(), attach.D.begin(),
                      attach.D.end()))
      jt_root = b;
  if (jt_root < 0)
    throw InvariantBrokenError("no region bag can host the attach clique");
  {
    std::vector<int> path;
    for (int u = jt_root; u >= 0; u = jt.parent[u]) path.push_back(u);
    for (size_t k = path.size(); k-- > 1;) jt.parent[path[k]] = path[k - 1];
    jt.parent[jt_root] = -1;
  }

  const int BN = (int)jt.bag.size();
  std::vector<std::vector<int>> jt_children(BN);
  for (int b = 0; b < BN; ++b)
    if (jt.parent[b] >= 0) jt_children[jt.parent[b]].push_back(b);
  std::vector<int> order;
  {
    std::deque<int> q{jt_root};
    while (!q.empty()) {
      int b = q.front();
      q.pop_front();
      order.push_back(b);
      for (int c : jt_children[b]) q.push_back(c);
    }
  }

  std::vector<int> node_of_bag(BN, -1);
  std::vector<int> q_b_new = *B.Q;
  std::vector<WorldId> zbar;
  for (const GameNode& n : inv.tree) zbar.push_back(B.world(n));
  std::sort(zbar.begin(), zbar.end());
  zbar.erase(std::unique(zbar.begin(), zbar.end()), zbar.end());

  std::vector<int> phi_parent(BN, -1);
  std::vector<WorldId> phi_world(BN, -1);

  for (int bi = 0; bi < (int)order.size(); ++bi) {
    const int b = order[bi];
    // the bag's world: an empty-coalition vertex forces it; otherwise prefer
    // choices that create no fresh response obligation (the parent's world,
    // then any sigma-mapped world), falling back to the inducing witness,
    // which sits on the region's geodesics
    WorldId w_u = -1;
    auto covers = [&](WorldId x) {
      for (int vid : jt.bag[b]) {
        const auto& vert = A.ctx->dual_h.verts[vid];
        if (A.ctx->ck->class_id(x, vert.color) != vert.class_id) return false;
      }
      return true;
    };
    for (int vid : jt.bag[b]) {
      const auto& vert = A.ctx->dual_h.verts[vid];
      if (vert.color == 0) {
        w_u = A.ctx->ck->coalition[0].blocks[vert.class_id][0];
        break;
      }
    }
    if (w_u < 0 && b != jt_root) {
      const WorldId wp = A.world(inv.tree[node_of_bag[jt.parent[b]]]);
      if (covers(wp)) w_u = wp;
    }
    if (w_u < 0) {
      for (WorldId c : bag_candidates(*A.ctx, jt.bag[b]))
        if (a2b.count(c)) {
          w_u = c;
          break;
        }
    }
    if (w_u < 0) w_u = jt.bag_witness[b];
    WorldId v_u = -1;
    if (b == jt_root) {
      if (!a2b.count(w_u)) w_u = w_anchor;  // anchor in the mapped part
      v_u = a2b.at(w_u);
    } else {
      const GameNode& pnode = inv.tree[node_of_bag[jt.parent[b]]];
      const WorldId w_p = A.world(pnode);
      const WorldId v_p = B.world(pnode);
      if (a2b.count(w_u)) {
        v_u = a2b.at(w_u);
      } else {
        const Coalition alpha = A.ctx->agt_of(w_p, w_u);
        auto lbis_ok = [&](WorldId vv) {
          return spoiler_left ? inv.lbisim(w_u, vv, ell_i)
                              : inv.lbisim(vv, w_u, ell_i);
        };
        auto agt_matches = [&](WorldId vv) {
          for (const GameNode& n : inv.tree)
            if (A.ctx->agt_of(w_u, A.world(n)) !=
                B.ctx->agt_of(vv, B.world(n)))
              return false;
          return true;
        };
        // local multiplicity profile: |[x]_alpha| per coalition.  Preferring
        // candidates whose profile matches the spoiler world keeps the two
        // sides symmetric where the truncation is not uniformly rich (a
        // boundary world with clipped classes must be answered by one).
        auto profile_gap = [&](WorldId cand) {
          long gap = 0;
          for (Coalition a = 1; a < (Coalition)B.ctx->ck->num_masks(); ++a) {
            long sa = (long)A.ctx->ck->coset_of(w_u, a).size();
            long sb = (long)B.ctx->ck->coset_of(cand, a).size();
            gap += sa > sb ? sa - sb : sb - sa;
          }
          return gap;
        };
        // alpha-neighbours that are already in freeness position need no
        // construction; rank them by profile similarity
        {
          std::vector<std::pair<long, WorldId>> ranked;
          for (WorldId cand : B.ctx->ck->coset_of(v_p, alpha)) {
            if (!lbis_ok(cand) || !agt_matches(cand)) continue;
            if (b2a.count(cand) && b2a.at(cand) != w_u) continue;
            ranked.push_back({profile_gap(cand), cand});
          }
          std::sort(ranked.begin(), ranked.end());
          for (auto [gap, cand] : ranked) {
            if (!is_m_free(*B.ctx, cand, zbar, v_p, m_i)) continue;
            v_u = cand;
            break;
          }
        }
        if (v_u < 0) {
          for (WorldId cand : B.ctx->ck->coset_of(v_p, alpha)) {
            if (!lbis_ok(cand)) continue;
            try {
              WorldId wit =
                  find_free_witness(*B.ctx, cand, zbar, v_p, alpha, m_i);
              if (!lbis_ok(wit) || !agt_matches(wit)) continue;
              if (b2a.count(wit) && b2a.at(wit) != w_u) continue;
              v_u = wit;
              break;
            } catch (const Error&) {
              continue;
            }
          }
        }
        if (v_u < 0) {
          // exhaustive fallback over the responder structure
          std::vector<std::pair<long, WorldId>> ranked;
          for (WorldId cand = 0; cand < B.ctx->ck->n(); ++cand) {
            if (!lbis_ok(cand) || !agt_matches(cand)) continue;
            if (b2a.count(cand) && b2a.at(cand) != w_u) continue;
            ranked.push_back({profile_gap(cand), cand});
          }
          std::sort(ranked.begin(), ranked.end());
          for (auto [gap, cand] : ranked) {
            if (!is_m_free(*B.ctx, cand, zbar, v_p, m_i)) continue;
            v_u = cand;
            break;
          }
        }
        if (v_u < 0) {
          std::ostringstream why;
          why << "no free ell_i-bisimilar response world for a region node"
              << " [w_u=" << w_u << " w_p=" << w_p << " v_p=" << v_p
              << " alpha=" << alpha << " m_i=" << m_i << " ell_i=" << ell_i
              << " zbar=";
          for (WorldId z : zbar) why << z << ",";
          why << "]";
          throw FreenessUnavailableError(why.str());
        }
        a2b[w_u] = v_u;
        b2a[v_u] = w_u;
      }
    }
    phi_world[b] = w_u;
    if (b != jt_root) phi_parent[b] = jt.parent[b];

    GameNode node;
    node.parent = b == jt_root ? attach_node : node_of_bag[jt.parent[b]];
    if (spoiler_left) {
      node.bag_left = jt.bag[b];
      node.w_left = w_u;
      node.bag_right = mirror_bag(*A.ctx, *B.ctx, jt.bag[b], v_u);
      node.w_right = v_u;
      q_b_new = sorted_union(q_b_new, node.bag_right);
    } else {
      node.bag_right = jt.bag[b];
      node.w_right = w_u;
      node.bag_left = mirror_bag(*A.ctx, *B.ctx, jt.bag[b], v_u);
      node.w_left = v_u;
      q_b_new = sorted_union(q_b_new, node.bag_left);
    }
    node_of_bag[b] = (int)inv.tree.size();
    inv.tree.push_back(node);
    zbar = sorted_union(zbar, {v_u});
  }

  // phi_T transfer: the spoiler-side region description holds at the
  // responder-side anchor within the ell_{i-1} budget
  {
    WorldTree wt;
    wt.parent.assign(phi_parent.begin(), phi_parent.end());
    wt.world.assign(phi_world.begin(), phi_world.end());
    // re-index so the root comes from jt_root's position
    FormulaPool pool;
    FormulaId phi = build_phi_T(pool, *A.ctx, wt, ell_i);
    if (modal_depth(pool, phi) > ell_prev)
      throw InvariantBrokenError("phi_T exceeds the ell_{i-1} budget");
    if (!model_check(pool, *B.ctx->ck, v_anchor, phi))
      throw InvariantBrokenError("phi_T does not transfer to the responder");
  }

  *A.Q = attach.Q_hat;
  *B.Q = q_b_new;

  auto it = a2b.find(w_new);
  if (it == a2b.end())
    throw InvariantBrokenError("spoiler world missed by the region mapping");
  finish(it->second);
}

// --- brute-force EF oracle ---------------------------------------------------------

namespace {

struct EfOracle {
  const CKStructure& m;
  const CKStructure& n;
  std::vector<std::map<std::vector<int>, bool>> memo;

  bool pair_ok(const std::vector<std::pair<WorldId, WorldId>>& pos, WorldId c,
               WorldId d) const {
    if (m.base.atomic_type(c) != n.base.atomic_type(d)) return false;
    for (auto [a, b] : pos) {
      if ((a == c) != (b == d)) return false;
      for (Coalition al = 0; al < (Coalition)m.num_masks(); ++al)
        if (m.same_class(al, a, c) != n.same_class(al, b, d)) return false;
    }
    return true;
  }

  bool wins(std::vector<std::pair<WorldId, WorldId>>& pos, int r) {
    if (r == 0) return true;
    std::vector<int> key;
    key.reserve(pos.size() * 2);
    {
      auto sorted = pos;
      std::sort(sorted.begin(), sorted.end());
      for (auto [a, b] : sorted) {
        key.push_back(a);
        key.push_back(b);
      }
    }
    auto it = memo[r].find(key);
    if (it != memo[r].end()) return it->second;
    bool ok = true;
    for (WorldId c = 0; c < m.n() && ok; ++c) {
      bool answered = false;
      for (WorldId d = 0; d < n.n() && !answered; ++d) {
        if (!pair_ok(pos, c, d)) continue;
        pos.push_back({c, d});
        answered = wins(pos, r - 1);
        pos.pop_back();
      }
      if (!answered) ok = false;
    }
    for (WorldId d = 0; d < n.n() && ok; ++d) {
      bool answered = false;
      for (WorldId c = 0; c < m.n() && !answered; ++c) {
        if (!pair_ok(pos, c, d)) continue;
        pos.push_back({c, d});
        answered = wins(pos, r - 1);
        pos.pop_back();
      }
      if (!answered) ok = false;
    }
    memo[r][key] = ok;
    return ok;
  }
};

}  // namespace

bool fo_ef_oracle(const CKStructure& m, WorldId w, const CKStructure& n,
                  WorldId v, int q) {
  if (!m.base.same_signature(n.base))
    throw SignatureMismatchError("EF oracle needs a common signature");
  EfOracle oracle{m, n, {}};
  oracle.memo.resize(q + 1);
  std::vector<std::pair<WorldId, WorldId>> pos;
  if (!oracle.pair_ok(pos, w, v)) return false;
  pos.push_back({w, v});
  return oracle.wins(pos, q);
}

// --- the upgrading experiment ---------------------------------------------------------

namespace {

bool replay_all(const GameInvariant& inv, int round, int q, Rng* sampler,
                int samples, uint64_t* lines, std::string* failure,
                const std::string& trail) {
  if (round > q) {
    ++*lines;
    return true;
  }
  const int nl = inv.left->ck->n();
  const int nr = inv.right->ck->n();
  std::vector<SpoilerMove> moves;
  if (sampler) {
    for (int s = 0; s < samples; ++s) {
      int side = sampler->below(2);
      moves.push_back({side, sampler->below(side == 0 ? nl : nr)});
    }
  } else {
    for (WorldId w = 0; w < nl; ++w) moves.push_back({0, w});
    for (WorldId v = 0; v < nr; ++v) moves.push_back({1, v});
  }
  for (const SpoilerMove& mv : moves) {
    const std::string here = trail + " (side " + std::to_string(mv.side) +
                             " world " + std::to_string(mv.world) + ")";
    GameInvariant copy = inv;
    try {
      duplicator_round(copy, mv);
    } catch (const Error& e) {
      *failure = "moves" + here + ": " + e.what();
      return false;
    }
    if (!replay_all(copy, round + 1, q, sampler, samples, lines, failure,
                    here))
      return false;
  }
  return true;
}

}  // namespace

UpgradeReport upgrade_experiment(const FreenessContext& left, WorldId w,
                                 const FreenessContext& right, WorldId v,
                                 int q, const UpgradeOptions& opts) {
  UpgradeReport rep;
  rep.q = q;
  rep.verified_n_left = left.verified_n;
  rep.verified_n_right = right.verified_n;
  rep.richness_left = measured_richness(*left.ck);
  rep.richness_right = measured_richness(*right.ck);
  if (rep.verified_n_left < opts.acyclicity_gate ||
      rep.verified_n_right < opts.acyclicity_gate)
    throw GatesFailedError("verified acyclicity below the configured gate");
  if (rep.richness_left < opts.richness_gate ||
      rep.richness_right < opts.richness_gate)
    throw GatesFailedError("measured richness below the configured gate");

  const int tau = left.ck->num_masks();
  std::map<std::pair<int, int>, int> fhat_memo;
  auto f_hat = [&](int fm, int fk) {
    auto key = std::make_pair(fm, fk);
    auto it = fhat_memo.find(key);
    if (it != fhat_memo.end()) return it->second;
    int fl = measure_f(left.dual_h, fm, fk, opts.f_budget, opts.seed);
    int fr = measure_f(right.dual_h, fm, fk, opts.f_budget, opts.seed);
    int val = 2 * std::max(1, std::max(fl, fr));  // safety factor of two
    fhat_memo[key] = val;
    return val;
  };
  rep.sched = make_schedules(q, f_hat, tau);
  rep.f_hat_budget = opts.f_budget;
  rep.out_of_warranty = rep.verified_n_left < 2 * rep.sched.m[1] + 1 ||
                        rep.verified_n_right < 2 * rep.sched.m[1] + 1;

  rep.l_bisimilar = l_bisimilar(*left.ck, w, *right.ck, v, rep.sched.ell0());
  if (!rep.l_bisimilar) return rep;

  rep.oracle_equivalent = fo_ef_oracle(*left.ck, w, *right.ck, v, q);

  GameInvariant inv = init_game(left, right, w, v, rep.sched);
  Rng sampler(opts.seed);
  rep.replay_survived =
      replay_all(inv, 1, q, q >= 3 ? &sampler : nullptr, opts.q3_samples,
                 &rep.replay_lines, &rep.failure, "");
  return rep;
}

}  // namespace epistemia
