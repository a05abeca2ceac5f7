#include "epistemia/acyclicity.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace epistemia {

bool is_coset_cycle(const CKStructure& ck, const CosetCycle& cycle) {
  const int m = (int)cycle.size();
  if (m < 2) return false;
  auto at = [&](int i) -> const CosetCycleStep& {
    return cycle[((i % m) + m) % m];
  };
  for (int i = 0; i < m; ++i) {
    if (!ck.same_class(at(i).alpha, at(i).world, at(i + 1).world)) return false;
    Coalition mu = at(i - 1).alpha & at(i).alpha;
    Coalition mu_next = at(i).alpha & at(i + 1).alpha;
    // hinge classes must be disjoint
    const auto& right = ck.coset_of(at(i + 1).world, mu_next);
    bool disjoint = true;
    for (WorldId x : right) {
      if (ck.same_class(mu, x, at(i).world)) {
        disjoint = false;
        break;
      }
    }
    if (!disjoint) return false;
  }
  return true;
}

bool check_2acyclic_char(const CKStructure& ck) {
  const int masks = ck.num_masks();
  for (Coalition a = 0; a < (Coalition)masks; ++a) {
    for (Coalition b = a + 1; b < (Coalition)masks; ++b) {
      if (subset_of(a, b) || subset_of(b, a)) continue;  // trivially equal
      const Coalition ab = a & b;
      // group worlds by (class under a, class under b); all members of a
      // group must share their (a&b)-class
      std::unordered_map<int64_t, int> rep;
      for (WorldId u = 0; u < ck.n(); ++u) {
        int64_t key =
            ((int64_t)ck.class_id(u, a) << 24) | (int64_t)ck.class_id(u, b);
        auto [it, fresh] = rep.emplace(key, ck.class_id(u, ab));
        if (!fresh && it->second != ck.class_id(u, ab)) return false;
      }
    }
  }
  return true;
}

namespace {

// Search graph for coset cycles: a node is ((alpha_prev, alpha_cur), hinge)
// with hinge = a class of alpha_prev & alpha_cur.  An edge to
// ((alpha_cur, alpha_next), hinge') exists when both hinges lie in the same
// alpha_cur-class and are disjoint.  Directed cycles of length m in this
// graph are exactly the coset cycles of length m.
struct CycleSearch {
  const CKStructure& ck;
  int masks;
  // node ids: offset[pair_index] + class_id, pair_index = ap * masks + ac
  std::vector<int> offset;
  int total_nodes = 0;

  explicit CycleSearch(const CKStructure& c) : ck(c), masks(c.num_masks()) {
    offset.assign(masks * masks + 1, 0);
    for (int ap = 0; ap < masks; ++ap) {
      for (int ac = 0; ac < masks; ++ac) {
        int idx = ap * masks + ac;
        offset[idx + 1] =
            offset[idx] + (ac == 0 ? 0 : ck.coalition[ap & ac].size());
      }
    }
    total_nodes = offset[masks * masks];
  }

  int node_id(Coalition ap, Coalition ac, int hinge_class) const {
    return offset[(int)ap * masks + (int)ac] + hinge_class;
  }
  struct NodeInfo {
    Coalition ap, ac;
    int hinge;
  };
  NodeInfo decode(int id) const {
    int lo = 0, hi = masks * masks;
    while (lo + 1 < hi) {
      int mid = (lo + hi) / 2;
      if (offset[mid] <= id)
        lo = mid;
      else
        hi = mid;
    }
    return {(Coalition)(lo / masks), (Coalition)(lo % masks), id - offset[lo]};
  }

  bool hinges_disjoint(Coalition mu1, int h1, Coalition mu2, int h2) const {
    const auto& c1 = ck.coalition[mu1].blocks[h1];
    const auto& c2 = ck.coalition[mu2].blocks[h2];
    const auto& small = c1.size() <= c2.size() ? c1 : c2;
    const Coalition other_mu = c1.size() <= c2.size() ? mu2 : mu1;
    const int other_h = c1.size() <= c2.size() ? h2 : h1;
    for (WorldId x : small)
      if (ck.class_id(x, other_mu) == other_h) return false;
    return true;
  }

};

}  // namespace

std::optional<CosetCycle> find_coset_cycle(const CKStructure& ck, int n) {
  if (n < 2) throw Error("coset cycles have length >= 2");
  if (ck.n() == 0) return std::nullopt;
  const int masks = ck.num_masks();

  // fast path for 2-cycles via the characterization witness
  for (Coalition a = 0; a < (Coalition)masks; ++a) {
    for (Coalition b = a + 1; b < (Coalition)masks; ++b) {
      if (subset_of(a, b) || subset_of(b, a)) continue;
      const Coalition ab = a & b;
      std::unordered_map<int64_t, WorldId> rep;
      for (WorldId u = 0; u < ck.n(); ++u) {
        int64_t key =
            ((int64_t)ck.class_id(u, a) << 24) | (int64_t)ck.class_id(u, b);
        auto [it, fresh] = rep.emplace(key, u);
        if (!fresh && ck.class_id(it->second, ab) != ck.class_id(u, ab)) {
          CosetCycle cyc{{it->second, a}, {u, b}};
          if (is_coset_cycle(ck, cyc)) return cyc;
        }
      }
    }
  }
  if (n == 2) return std::nullopt;

  CycleSearch cs(ck);
  // BFS from each start node over nodes >= start (a shortest cycle is found
  // when started at its minimal node)
  std::vector<int> dist(cs.total_nodes), parent(cs.total_nodes);
  for (int start = 0; start < cs.total_nodes; ++start) {
    auto sinfo = cs.decode(start);
    if (sinfo.ac == 0) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[start] = 0;
    std::deque<int> queue{start};
    std::optional<CosetCycle> found;
    while (!queue.empty() && !found) {
      int cur = queue.front();
      queue.pop_front();
      // a closure from depth d yields a cycle of length d+1 <= n
      if (dist[cur] > n - 1) continue;
      auto info = cs.decode(cur);
      const Coalition mu = info.ap & info.ac;
      WorldId rep = ck.coalition[mu].blocks[info.hinge][0];
      const auto& cls = ck.coset_of(rep, info.ac);
      for (Coalition an = 1; an < (Coalition)cs.masks && !found; ++an) {
        const Coalition mu2 = info.ac & an;
        std::vector<int> seen;
        for (WorldId x : cls) {
          int h2 = ck.class_id(x, mu2);
          if (std::find(seen.begin(), seen.end(), h2) != seen.end()) continue;
          seen.push_back(h2);
          if (!cs.hinges_disjoint(mu, info.hinge, mu2, h2)) continue;
          int nxt = cs.node_id(info.ac, an, h2);
          if (nxt == start && dist[cur] + 1 >= 2) {
            // close the cycle; reconstruct worlds along parent chain
            CosetCycle cyc;
            std::vector<int> chain{cur};
            while (chain.back() != start) chain.push_back(parent[chain.back()]);
            std::reverse(chain.begin(), chain.end());
            for (int id : chain) {
              auto ni = cs.decode(id);
              cyc.push_back(
                  {ck.coalition[ni.ap & ni.ac].blocks[ni.hinge][0], ni.ac});
            }
            if (is_coset_cycle(ck, cyc)) {
              found = cyc;
              break;
            }
            continue;
          }
          if (nxt <= start) continue;  // minimality pruning
          if (dist[nxt] >= 0 || dist[cur] + 1 >= n) continue;
          dist[nxt] = dist[cur] + 1;
          parent[nxt] = cur;
          queue.push_back(nxt);
        }
      }
    }
    if (found) return found;
  }
  return std::nullopt;
}

int verified_acyclicity(const CKStructure& ck, int n_max) {
  auto cyc = find_coset_cycle(ck, n_max);
  if (!cyc) return n_max;
  return (int)cyc->size() - 1;  // acyclic strictly below the witness length
}

Coalition agt(const CKStructure& ck, std::span<const WorldId> ws,
              bool check_pre) {
  if (check_pre && !check_2acyclic_char(ck))
    throw Not2AcyclicError("agt is only defined on 2-acyclic structures");
  if (ws.empty()) return 0;
  const Coalition full = ck.full();
  Coalition least = full;
  bool any = false;
  for (Coalition a = 0; a <= full; ++a) {
    bool connects = true;
    for (size_t i = 1; i < ws.size() && connects; ++i)
      connects = ck.same_class(a, ws[0], ws[i]);
    if (connects) {
      least &= a;
      any = true;
    }
  }
  if (!any)
    throw NotConnectedTupleError("worlds are not jointly connected");
  // the intersection of all connecting coalitions must itself connect
  for (size_t i = 1; i < ws.size(); ++i) {
    if (!ck.same_class(least, ws[0], ws[i]))
      throw NoLeastElementError(
          "connecting coalitions have no least element (2-acyclicity violated)");
  }
  return least;
}

std::vector<Coalition> agt_table(const CKStructure& ck) {
  const int n = ck.n();
  const int masks = ck.num_masks();
  std::vector<Coalition> table((size_t)n * n, 0);
  for (WorldId u = 0; u < n; ++u) {
    for (WorldId v = 0; v < n; ++v) {
      Coalition least = full_coalition(ck.num_agents());
      for (Coalition a = 0; a < (Coalition)masks; ++a)
        if (ck.same_class(a, u, v)) least &= a;
      table[(size_t)u * n + v] = least;
    }
  }
  return table;
}

AgtStepsReport verify_agt_steps(const CKStructure& ck) {
  if (!check_2acyclic_char(ck))
    throw Not2AcyclicError("agt step laws need a 2-acyclic structure");
  AgtStepsReport rep;
  const int n = ck.n();
  auto table = agt_table(ck);
  auto agt_of = [&](WorldId u, WorldId v) { return table[(size_t)u * n + v]; };
  for (WorldId w = 0; w < n; ++w) {
    for (WorldId v = 0; v < n; ++v) {
      if (!ck.same_class(ck.full(), w, v)) continue;
      const Coalition alpha = agt_of(w, v);
      for (AgentId a = 0; a < ck.num_agents(); ++a) {
        ++rep.checked;
        if (!has_agent(alpha, a)) {
          const Coalition expect = with_agent(alpha, a);
          for (WorldId vp : ck.coset_of(v, 1u << a)) {
            if (vp == v) continue;
            if (agt_of(w, vp) != expect)
              rep.violations.push_back(
                  {1, w, v, a,
                   "agt(w,v')=" + std::to_string(agt_of(w, vp)) +
                       " expected " + std::to_string(expect)});
          }
        } else {
          const Coalition expect = without_agent(alpha, a);
          int count = 0;
          for (WorldId vp : ck.coset_of(v, 1u << a))
            if (agt_of(w, vp) == expect) ++count;
          if (count > 1)
            rep.violations.push_back(
                {2, w, v, a,
                 std::to_string(count) + " drop candidates in [v]_a"});
        }
      }
    }
  }
  return rep;
}

}  // namespace epistemia
