#include "epistemia/bisim.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace epistemia {

namespace {

// The joint refinement works on the disjoint union; each relation is an
// equivalence relation given as one partition per side.
struct JointRelations {
  // relations[r] = pair of partition pointers (left, right)
  std::vector<std::pair<const Partition*, const Partition*>> relations;
  int n_left, n_right;

  int total() const { return n_left + n_right; }
  // class members of joint world u under relation r, as joint ids
  void class_of(int r, int u, std::vector<int>& out) const {
    out.clear();
    if (u < n_left) {
      for (WorldId w : relations[r].first->block(u)) out.push_back(w);
    } else {
      for (WorldId w : relations[r].second->block(u - n_left))
        out.push_back(w + n_left);
    }
  }
};

JointRelations make_relations(const CKStructure& m, const CKStructure& n,
                              BisimMode mode) {
  if (!m.base.same_signature(n.base))
    throw SignatureMismatchError("structures disagree on agents or propositions");
  JointRelations jr;
  jr.n_left = m.n();
  jr.n_right = n.n();
  if (mode == BisimMode::S5) {
    for (int a = 0; a < m.num_agents(); ++a)
      jr.relations.push_back({&m.base.agents[a], &n.base.agents[a]});
  } else {
    for (int c = 0; c < m.num_masks(); ++c)
      jr.relations.push_back({&m.coalition[c], &n.coalition[c]});
  }
  return jr;
}

std::vector<int> atomic_blocks(const CKStructure& m, const CKStructure& n,
                               int* num_blocks) {
  const int total = m.n() + n.n();
  std::vector<int> block(total);
  std::map<uint32_t, int> seen;
  for (int u = 0; u < total; ++u) {
    uint32_t t = u < m.n() ? m.base.atomic_type(u)
                           : n.base.atomic_type(u - m.n());
    auto it = seen.find(t);
    if (it == seen.end()) it = seen.insert({t, (int)seen.size()}).first;
    block[u] = it->second;
  }
  *num_blocks = (int)seen.size();
  return block;
}

// One simultaneous refinement round over every relation: worlds stay
// together iff they agree on the set of current blocks seen in their class,
// for each relation.  Returns true if the partition changed.
bool refine_round(const JointRelations& jr, std::vector<int>& block,
                  int* num_blocks) {
  const int total = jr.total();
  const int R = (int)jr.relations.size();
  // signature of a class: sorted set of blocks present
  // cache per (relation, class-representative) via per-side class ids
  std::vector<std::vector<int>> sig(total);
  std::vector<int> members;
  for (int r = 0; r < R; ++r) {
    // walk classes once per side
    for (int side = 0; side < 2; ++side) {
      const Partition* part =
          side == 0 ? jr.relations[r].first : jr.relations[r].second;
      const int off = side == 0 ? 0 : jr.n_left;
      for (const auto& blk : part->blocks) {
        std::vector<int> seen;
        for (WorldId w : blk) seen.push_back(block[w + off]);
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        // attach the class signature to each member
        for (WorldId w : blk) {
          auto& s = sig[w + off];
          s.push_back(-1);  // relation separator
          s.insert(s.end(), seen.begin(), seen.end());
        }
      }
    }
  }
  std::map<std::pair<int, std::vector<int>>, int> next;
  std::vector<int> out(total);
  for (int u = 0; u < total; ++u) {
    auto key = std::make_pair(block[u], std::move(sig[u]));
    auto it = next.find(key);
    if (it == next.end()) it = next.insert({std::move(key), (int)next.size()}).first;
    out[u] = it->second;
  }
  bool changed = (int)next.size() != *num_blocks;
  *num_blocks = (int)next.size();
  block = std::move(out);
  return changed;
}

}  // namespace

BisimPartition coarsest_bisimulation(const CKStructure& m,
                                     const CKStructure& n, BisimMode mode) {
  JointRelations jr = make_relations(m, n, mode);
  BisimPartition bp;
  bp.n_left = m.n();
  bp.block = atomic_blocks(m, n, &bp.num_blocks);
  while (refine_round(jr, bp.block, &bp.num_blocks)) ++bp.rounds_to_stabilize;
  return bp;
}

BisimPartition self_bisimulation(const CKStructure& m, BisimMode mode) {
  CKStructure empty;
  empty.base.agent_names = m.base.agent_names;
  empty.base.prop_names = m.base.prop_names;
  empty.base.val.assign(m.base.num_props(), {});
  empty.base.agents.assign(m.num_agents(), Partition{});
  empty.coalition.assign(m.num_masks(), Partition{});
  return coarsest_bisimulation(m, empty, mode);
}

std::vector<BisimPartition> bisim_levels(const CKStructure& m,
                                         const CKStructure& n, BisimMode mode,
                                         int ell) {
  JointRelations jr = make_relations(m, n, mode);
  std::vector<BisimPartition> levels;
  BisimPartition bp;
  bp.n_left = m.n();
  bp.block = atomic_blocks(m, n, &bp.num_blocks);
  levels.push_back(bp);
  for (int l = 1; l <= ell; ++l) {
    bool changed = refine_round(jr, bp.block, &bp.num_blocks);
    bp.rounds_to_stabilize = l;
    levels.push_back(bp);
    if (!changed) {
      while ((int)levels.size() <= ell) levels.push_back(bp);
      break;
    }
  }
  return levels;
}

bool l_bisimilar(const CKStructure& m, WorldId w, const CKStructure& n,
                 WorldId v, int ell, BisimMode mode) {
  auto levels = bisim_levels(m, n, mode, ell);
  return levels[std::min<size_t>(ell, levels.size() - 1)].same(w, v);
}

std::string CoveringCheck::describe() const {
  std::ostringstream os;
  switch (code) {
    case Ok: os << "covering ok"; break;
    case NotTotal: os << "map not total at world " << u; break;
    case NotSurjective: os << "target world " << v << " has empty fiber"; break;
    case NotHomomorphism:
      if (prop >= 0)
        os << "valuation of prop " << prop << " not preserved at " << u;
      else
        os << "edge (" << u << "," << v << ") of agent " << agent
           << " not preserved";
      break;
    case NotBisimilar: os << "fiber world " << u << " not bisimilar to its image"; break;
  }
  return os.str();
}

CoveringCheck check_covering(const CKStructure& source,
                             const CKStructure& target, const CoveringMap& pi) {
  CoveringCheck c;
  if ((int)pi.map.size() != source.n()) {
    c.code = CoveringCheck::NotTotal;
    c.u = (int)pi.map.size();
    return c;
  }
  std::vector<uint8_t> hit(target.n(), 0);
  for (WorldId u = 0; u < source.n(); ++u) {
    if (pi.map[u] < 0 || pi.map[u] >= target.n()) {
      c.code = CoveringCheck::NotTotal;
      c.u = u;
      return c;
    }
    hit[pi.map[u]] = 1;
  }
  for (WorldId v = 0; v < target.n(); ++v)
    if (!hit[v]) {
      c.code = CoveringCheck::NotSurjective;
      c.v = v;
      return c;
    }
  if (!source.base.same_signature(target.base))
    throw SignatureMismatchError("covering endpoints disagree on signature");
  // homomorphism: valuation agrees (fibers are bisimilar anyway, so demand
  // equivalence) and every per-agent edge maps to an edge
  for (int p = 0; p < source.base.num_props(); ++p) {
    for (WorldId u = 0; u < source.n(); ++u) {
      if (source.base.prop_holds(p, u) != target.base.prop_holds(p, pi.map[u])) {
        c.code = CoveringCheck::NotHomomorphism;
        c.u = u;
        c.prop = p;
        return c;
      }
    }
  }
  for (int a = 0; a < source.num_agents(); ++a) {
    for (const auto& blk : source.base.agents[a].blocks) {
      for (size_t i = 1; i < blk.size(); ++i) {
        if (!target.base.agents[a].same_block(pi.map[blk[0]], pi.map[blk[i]])) {
          c.code = CoveringCheck::NotHomomorphism;
          c.u = blk[0];
          c.v = blk[i];
          c.agent = a;
          return c;
        }
      }
    }
  }
  // fiberwise bisimilarity (S5 mode suffices: CK passage is bisimulation-safe,
  // and the CK-safety property is itself tested elsewhere)
  BisimPartition bp = coarsest_bisimulation(source, target, BisimMode::S5);
  for (WorldId u = 0; u < source.n(); ++u) {
    if (!bp.same(u, pi.map[u])) {
      c.code = CoveringCheck::NotBisimilar;
      c.u = u;
      return c;
    }
  }
  return c;
}

}  // namespace epistemia
