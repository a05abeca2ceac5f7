#include "epistemia/cayley.hpp"

#include <map>
#include <algorithm>
#include <unordered_map>

namespace epistemia {

GroupElement ge_identity(int n_worlds, int n_generators) {
  GroupElement g;
  g.wperm.resize(n_worlds);
  for (int w = 0; w < n_worlds; ++w) g.wperm[w] = (uint8_t)w;
  g.parity.assign((n_generators + 63) / 64, 0);
  return g;
}

GroupElement ge_mul(const GroupElement& a, const GroupElement& b) {
  GroupElement g;
  g.wperm.resize(a.wperm.size());
  for (size_t w = 0; w < a.wperm.size(); ++w) g.wperm[w] = b.wperm[a.wperm[w]];
  g.parity.resize(a.parity.size());
  for (size_t i = 0; i < a.parity.size(); ++i)
    g.parity[i] = a.parity[i] ^ b.parity[i];
  return g;
}

GroupElement ge_inverse(const GroupElement& a) {
  GroupElement g;
  g.wperm.resize(a.wperm.size());
  for (size_t w = 0; w < a.wperm.size(); ++w) g.wperm[a.wperm[w]] = (uint8_t)w;
  g.parity = a.parity;  // generators are involutions
  return g;
}

size_t GroupElementHash::operator()(const GroupElement& g) const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](uint64_t x) {
    h ^= x;
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  };
  for (uint8_t b : g.wperm) mix(b + 1);
  for (uint64_t wrd : g.parity) mix(wrd);
  return (size_t)h;
}

namespace {

std::vector<GeneratorId> collect_generators(const S5Structure& m,
                                            EdgeSet edge_set, int k_copies) {
  std::vector<GeneratorId> gens;
  for (AgentId a = 0; a < m.num_agents(); ++a) {
    for (const auto& blk : m.agents[a].blocks) {
      if (edge_set == EdgeSet::Full) {
        // every unordered pair inside the class, loops included
        for (size_t i = 0; i < blk.size(); ++i) {
          gens.push_back({blk[i], blk[i], a, 0});
          for (size_t j = i + 1; j < blk.size(); ++j)
            gens.push_back({blk[i], blk[j], a, 0});
        }
      } else {
        for (size_t i = 0; i + 1 < blk.size(); ++i)
          gens.push_back({blk[i], blk[i + 1], a, 0});
      }
    }
  }
  if (k_copies > 0) {
    std::vector<GeneratorId> boosted;
    for (const GeneratorId& g : gens)
      for (int c = 0; c <= k_copies; ++c)
        boosted.push_back({g.u, g.v, g.agent, c});
    gens = std::move(boosted);
  }
  return gens;
}

GroupElement generator_element(const S5Structure& m,
                               const std::vector<GeneratorId>& gens, int gi) {
  GroupElement g = ge_identity(m.n, (int)gens.size());
  const GeneratorId& e = gens[gi];
  if (e.u != e.v) std::swap(g.wperm[e.u], g.wperm[e.v]);
  g.parity[gi / 64] ^= (1ull << (gi % 64));
  return g;
}

// Union-find cosets of the subgroup generated by the alpha-generators: link
// every enumerated element g with g * gen for each generator of the agents
// in alpha.  Returned as a canonical Partition.
Partition coset_partition(const std::vector<GroupElement>& elements,
                          const std::unordered_map<GroupElement, int,
                                                   GroupElementHash>& index,
                          const std::vector<GeneratorId>& gens,
                          const std::vector<GroupElement>& gen_elems,
                          Coalition alpha) {
  UnionFind uf((int)elements.size());
  for (size_t gi = 0; gi < gens.size(); ++gi) {
    if (!has_agent(alpha, gens[gi].agent)) continue;
    for (size_t e = 0; e < elements.size(); ++e) {
      GroupElement h = ge_mul(elements[e], gen_elems[gi]);
      uf.unite((int)e, index.at(h));
    }
  }
  return partition_from_unionfind(uf);
}

CKStructure assemble_ck(const S5Structure& m,
                        const std::vector<std::string>& agent_names,
                        int n_elements,
                        const std::function<Partition(Coalition)>& cosets,
                        const std::vector<WorldId>& pi) {
  CKStructure ck;
  ck.base.n = n_elements;
  ck.base.agent_names = agent_names;
  ck.base.prop_names = m.prop_names;
  ck.base.val.assign(m.num_props(), std::vector<uint8_t>(n_elements, 0));
  for (int p = 0; p < m.num_props(); ++p)
    for (int e = 0; e < n_elements; ++e)
      ck.base.val[p][e] = m.val[p][pi[e]];
  const int masks = 1 << (int)agent_names.size();
  ck.coalition.resize(masks);
  for (Coalition c = 0; c < (Coalition)masks; ++c) ck.coalition[c] = cosets(c);
  for (int a = 0; a < (int)agent_names.size(); ++a)
    ck.base.agents.push_back(ck.coalition[1u << a]);
  // raw edges of the covering structure: in-class pairs per agent (closed
  // form so the emitted JSON re-validates)
  ck.base.raw_edges.resize(agent_names.size());
  for (int a = 0; a < (int)agent_names.size(); ++a)
    for (const auto& blk : ck.base.agents[a].blocks)
      for (size_t i = 0; i < blk.size(); ++i)
        for (size_t j = i; j < blk.size(); ++j)
          ck.base.raw_edges[a].push_back({blk[i], blk[j]});
  return ck;
}

}  // namespace

CayleyStructure build_covering(const S5Structure& m, WorldId w0,
                               EdgeSet edge_set, int k_copies,
                               size_t element_cap) {
  if (m.n == 0) throw EmptyStructureError();
  {
    CKStructure mck = ck_expand(m);
    if (!is_connected(mck))
      throw NotConnectedError("covering construction needs a connected base");
  }
  CayleyStructure cs;
  cs.source = m;
  cs.base_world = w0;
  cs.generators = collect_generators(m, edge_set, k_copies);

  std::vector<GroupElement> gen_elems;
  gen_elems.reserve(cs.generators.size());
  for (size_t gi = 0; gi < cs.generators.size(); ++gi)
    gen_elems.push_back(generator_element(m, cs.generators, (int)gi));

  // BFS word enumeration from the identity
  std::unordered_map<GroupElement, int, GroupElementHash> index;
  std::vector<GroupElement>& elements = cs.elements;
  elements.push_back(ge_identity(m.n, (int)cs.generators.size()));
  index.emplace(elements[0], 0);
  for (size_t head = 0; head < elements.size(); ++head) {
    for (size_t gi = 0; gi < gen_elems.size(); ++gi) {
      GroupElement h = ge_mul(elements[head], gen_elems[gi]);
      if (index.count(h)) continue;
      if (elements.size() >= element_cap) throw GroupTooLargeError(element_cap);
      index.emplace(h, (int)elements.size());
      elements.push_back(std::move(h));
    }
  }

  cs.covering.map.resize(elements.size());
  for (size_t e = 0; e < elements.size(); ++e)
    cs.covering.map[e] = elements[e].wperm[w0];

  cs.ck = assemble_ck(
      m, m.agent_names, (int)elements.size(),
      [&](Coalition c) {
        if (c == 0) return singleton_partition((int)elements.size());
        return coset_partition(elements, index, cs.generators, gen_elems, c);
      },
      cs.covering.map);
  return cs;
}

CayleyStructure tree_unfold(const S5Structure& m, WorldId w0, int depth,
                            int k_copies, size_t element_cap) {
  if (m.n == 0) throw EmptyStructureError();
  if (depth < 1) throw Error("tree_unfold needs depth >= 1");
  {
    CKStructure mck = ck_expand(m);
    if (!is_connected(mck))
      throw NotConnectedError("tree unfolding needs a connected base");
  }
  CayleyStructure cs;
  cs.source = m;
  cs.base_world = w0;
  cs.truncation_depth = depth;
  // free groups stay desk-sized only with one spanning chain per class
  cs.generators = collect_generators(m, EdgeSet::Spanning, k_copies);
  const int G = (int)cs.generators.size();

  // enumerate reduced words of length <= depth, BFS order
  std::vector<std::vector<int32_t>>& words = cs.words;
  words.push_back({});
  for (size_t head = 0; head < words.size(); ++head) {
    if ((int)words[head].size() >= depth) continue;
    for (int32_t gi = 0; gi < G; ++gi) {
      if (!words[head].empty() && words[head].back() == gi) continue;  // ee cancels
      if (words.size() >= element_cap) throw GroupTooLargeError(element_cap);
      std::vector<int32_t> w = words[head];
      w.push_back(gi);
      words.push_back(std::move(w));
    }
  }
  // index words for the letter-step relation
  std::map<std::vector<int32_t>, int> index;
  for (size_t i = 0; i < words.size(); ++i) index.emplace(words[i], (int)i);
  auto step = [&](int wi, int32_t gi) -> int {
    // append or cancel a letter; -1 when the extension leaves the truncation
    const auto& w = words[wi];
    if (!w.empty() && w.back() == gi) {
      std::vector<int32_t> shorter(w.begin(), w.end() - 1);
      return index.at(shorter);
    }
    if ((int)w.size() >= depth) return -1;
    std::vector<int32_t> longer = w;
    longer.push_back(gi);
    return index.at(longer);
  };

  cs.covering.map.resize(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    WorldId w = w0;
    for (int32_t gi : words[i]) {
      const GeneratorId& e = cs.generators[gi];
      if (w == e.u)
        w = e.v;
      else if (w == e.v)
        w = e.u;
    }
    cs.covering.map[i] = w;
  }

  cs.ck = assemble_ck(
      m, m.agent_names, (int)words.size(),
      [&](Coalition c) {
        if (c == 0) return singleton_partition((int)words.size());
        UnionFind uf((int)words.size());
        for (int32_t gi = 0; gi < G; ++gi) {
          if (!has_agent(c, cs.generators[gi].agent)) continue;
          for (size_t wi = 0; wi < words.size(); ++wi) {
            int to = step((int)wi, gi);
            if (to >= 0) uf.unite((int)wi, to);
          }
        }
        return partition_from_unionfind(uf);
      },
      cs.covering.map);
  return cs;
}

RichnessResult check_richness(const CKStructure& c, int k) {
  RichnessResult res;
  if (k <= 1) return res;  // realized means multiplicity >= 1
  BisimPartition bis = self_bisimulation(c, BisimMode::CK);
  // the empty coalition is excluded: its classes are singletons by
  // construction, so counting it would make k-richness unsatisfiable for
  // k >= 2 while the boosted coverings plainly multiply every proper class
  for (Coalition a = 1; a < (Coalition)c.num_masks(); ++a) {
    for (int cls = 0; cls < c.coalition[a].size(); ++cls) {
      std::unordered_map<int, int> mult;
      for (WorldId w : c.coalition[a].blocks[cls]) ++mult[bis.block[w]];
      for (auto [blk, count] : mult) {
        if (count < k) {
          res.ok = false;
          res.witness = RichnessViolation{a, cls, blk, count};
          return res;
        }
      }
    }
  }
  return res;
}

int measured_richness(const CKStructure& c) {
  if (c.n() == 0) return 0;
  BisimPartition bis = self_bisimulation(c, BisimMode::CK);
  int best = c.n();
  for (Coalition a = 1; a < (Coalition)c.num_masks(); ++a) {
    for (const auto& blk : c.coalition[a].blocks) {
      std::unordered_map<int, int> mult;
      for (WorldId w : blk) ++mult[bis.block[w]];
      for (auto [b, count] : mult) best = std::min(best, count);
    }
  }
  return best;
}

}  // namespace epistemia
