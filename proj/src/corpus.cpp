#include "epistemia/corpus.hpp"

#include <algorithm>

namespace epistemia {

namespace {

std::vector<std::string> default_agent_names(int agents) {
  static const char* names[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  std::vector<std::string> out;
  for (int i = 0; i < agents; ++i) out.push_back(names[i]);
  return out;
}

EdgeList closed_pairs(const Partition& p) {
  EdgeList out;
  for (const auto& blk : p.blocks)
    for (size_t i = 0; i < blk.size(); ++i)
      for (size_t j = i; j < blk.size(); ++j)
        out.push_back({blk[i], blk[j]});
  return out;
}

}  // namespace

S5Structure random_s5(Rng& rng, int n, int agents, int props, double density,
                      bool connected) {
  S5Structure s;
  s.n = n;
  s.agent_names = default_agent_names(agents);
  for (int p = 0; p < props; ++p) s.prop_names.push_back("p" + std::to_string(p));
  for (int a = 0; a < agents; ++a) {
    UnionFind uf(n);
    // random merges; expected block count shrinks with density
    for (int w = 1; w < n; ++w)
      if (rng.chance(density)) uf.unite(rng.below(w), w);
    s.agents.push_back(partition_from_unionfind(uf));
  }
  if (connected && n > 1) {
    // stitch components of the union along a random agent each
    while (true) {
      UnionFind uf(n);
      for (int a = 0; a < agents; ++a)
        for (const auto& blk : s.agents[a].blocks)
          for (size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0], blk[i]);
      Partition joint = partition_from_unionfind(uf);
      if (joint.size() == 1) break;
      const auto& b0 = joint.blocks[0];
      const auto& b1 = joint.blocks[1];
      int a = rng.below(agents);
      UnionFind merge(n);
      for (const auto& blk : s.agents[a].blocks)
        for (size_t i = 1; i < blk.size(); ++i) merge.unite(blk[0], blk[i]);
      merge.unite(b0[rng.below((int)b0.size())], b1[rng.below((int)b1.size())]);
      s.agents[a] = partition_from_unionfind(merge);
    }
  }
  s.val.assign(props, std::vector<uint8_t>(n, 0));
  for (int p = 0; p < props; ++p)
    for (int w = 0; w < n; ++w) s.val[p][w] = rng.chance(0.5) ? 1 : 0;
  s.raw_edges.clear();
  for (int a = 0; a < agents; ++a) s.raw_edges.push_back(closed_pairs(s.agents[a]));
  return s;
}

std::vector<S5Structure> gen_corpus(const CorpusSpec& spec) {
  std::vector<S5Structure> out;
  Rng rng(spec.seed);
  for (int i = 0; i < spec.count; ++i) {
    const int n = spec.n_min + rng.below(spec.n_max - spec.n_min + 1);
    out.push_back(random_s5(rng, n, spec.agents, spec.props, spec.density,
                            spec.connected));
  }
  return out;
}

namespace {

S5Structure from_blocks(int n,
                        const std::vector<std::vector<std::vector<int>>>& parts,
                        const std::vector<std::vector<int>>& props) {
  S5Structure s;
  s.n = n;
  s.agent_names = default_agent_names((int)parts.size());
  for (size_t a = 0; a < parts.size(); ++a) {
    UnionFind uf(n);
    for (const auto& blk : parts[a])
      for (size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0], blk[i]);
    s.agents.push_back(partition_from_unionfind(uf));
    s.raw_edges.push_back(closed_pairs(s.agents.back()));
  }
  for (size_t p = 0; p < props.size(); ++p) {
    s.prop_names.push_back("p" + std::to_string(p));
    s.val.emplace_back(n, 0);
    for (int w : props[p]) s.val.back()[w] = 1;
  }
  return s;
}

}  // namespace

S5Structure chain_structure() {
  return from_blocks(3, {{{0, 1}, {2}}, {{0}, {1, 2}}}, {{0}});
}

S5Structure two_world_clique() {
  return from_blocks(2, {{{0, 1}}, {{0, 1}}}, {{0}});
}

S5Structure singleton_structure(int props) {
  std::vector<std::vector<int>> pv(props);
  return from_blocks(1, {{{0}}, {{0}}}, pv);
}

S5Structure relabel(const S5Structure& s, const std::vector<WorldId>& perm) {
  S5Structure out;
  out.n = s.n;
  out.agent_names = s.agent_names;
  out.prop_names = s.prop_names;
  for (int a = 0; a < s.num_agents(); ++a) {
    UnionFind uf(s.n);
    for (const auto& blk : s.agents[a].blocks)
      for (size_t i = 1; i < blk.size(); ++i)
        uf.unite(perm[blk[0]], perm[blk[i]]);
    out.agents.push_back(partition_from_unionfind(uf));
    out.raw_edges.push_back(closed_pairs(out.agents.back()));
  }
  out.val.assign(s.num_props(), std::vector<uint8_t>(s.n, 0));
  for (int p = 0; p < s.num_props(); ++p)
    for (WorldId w = 0; w < s.n; ++w)
      out.val[p][perm[w]] = s.val[p][w];
  return out;
}

}  // namespace epistemia
