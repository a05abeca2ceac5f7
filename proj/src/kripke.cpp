#include "epistemia/kripke.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

namespace epistemia {

std::string coalition_name(Coalition c, const std::vector<std::string>& agents) {
  if (c == 0) return "{}";
  std::string out = "{";
  bool first = true;
  for (size_t a = 0; a < agents.size(); ++a) {
    if (!has_agent(c, (int)a)) continue;
    if (!first) out += ",";
    out += agents[a];
    first = false;
  }
  return out + "}";
}

int worker_count() {
  if (const char* env = std::getenv("EPISTEMIA_THREADS")) {
    int k = std::atoi(env);
    if (k >= 1) return k;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : (int)hw;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

Partition partition_from_unionfind(UnionFind& uf) {
  const int n = uf.size();
  Partition p;
  p.block_of.assign(n, -1);
  std::vector<int> root_block(n, -1);
  for (int w = 0; w < n; ++w) {
    int r = uf.find(w);
    if (root_block[r] < 0) {
      root_block[r] = (int)p.blocks.size();
      p.blocks.emplace_back();
    }
    p.block_of[w] = root_block[r];
    p.blocks[root_block[r]].push_back(w);
  }
  return p;
}

Partition singleton_partition(int n) {
  Partition p;
  p.block_of.resize(n);
  p.blocks.resize(n);
  for (int w = 0; w < n; ++w) {
    p.block_of[w] = w;
    p.blocks[w] = {w};
  }
  return p;
}

std::string ValidationIssue::to_string(
    const std::vector<std::string>& agent_names) const {
  std::ostringstream os;
  const std::string a =
      agent >= 0 && agent < (int)agent_names.size() ? agent_names[agent] : "?";
  switch (kind) {
    case DanglingWorldId:
      os << "agent " << a << ": edge (" << u << "," << v
         << ") mentions an out-of-range world";
      break;
    case MissingPair:
      os << "agent " << a << ": relation is not transitively closed, missing ("
         << u << "," << v << ")";
      break;
    case StrictnessViolation:
      os << "agent " << a << ": missing reflexive loop (" << u << "," << u
         << ")";
      break;
  }
  return os.str();
}

ValidateResult validate_s5(const RawStructure& raw, bool strict) {
  ValidateResult res;
  ValidationReport& rep = res.report;
  const int n = raw.n;
  const int na = (int)raw.agent_names.size();

  for (int a = 0; a < na; ++a) {
    for (auto [u, v] : raw.edges[a]) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        rep.issues.push_back({ValidationIssue::DanglingWorldId, a, u, v});
    }
  }
  for (int p = 0; p < (int)raw.prop_names.size(); ++p) {
    for (WorldId w : raw.prop_worlds[p]) {
      if (w < 0 || w >= n)
        rep.issues.push_back({ValidationIssue::DanglingWorldId, -1, w, w});
    }
  }
  if (!rep.issues.empty()) return res;

  S5Structure s;
  s.n = n;
  s.agent_names = raw.agent_names;
  s.prop_names = raw.prop_names;
  s.raw_edges = raw.edges;
  s.val.assign(raw.prop_names.size(), std::vector<uint8_t>(n, 0));
  for (int p = 0; p < (int)raw.prop_names.size(); ++p)
    for (WorldId w : raw.prop_worlds[p]) s.val[p][w] = 1;

  for (int a = 0; a < na; ++a) {
    UnionFind uf(n);
    std::set<std::pair<WorldId, WorldId>> given;  // symmetric, loops included
    std::vector<uint8_t> loop(n, 0);
    for (auto [u, v] : raw.edges[a]) {
      uf.unite(u, v);
      given.insert({std::min(u, v), std::max(u, v)});
      if (u == v) loop[u] = 1;
    }
    Partition part = partition_from_unionfind(uf);
    // Transitivity check: every in-class pair must be listed (loops exempt
    // unless strict).
    for (const auto& blk : part.blocks) {
      for (size_t i = 0; i < blk.size(); ++i) {
        if (strict && !loop[blk[i]])
          rep.issues.push_back(
              {ValidationIssue::StrictnessViolation, a, blk[i], blk[i]});
        for (size_t j = i + 1; j < blk.size(); ++j) {
          if (!given.count({blk[i], blk[j]}))
            rep.issues.push_back(
                {ValidationIssue::MissingPair, a, blk[i], blk[j]});
        }
      }
    }
    s.agents.push_back(std::move(part));
  }
  if (!rep.issues.empty()) return res;
  res.structure = std::move(s);
  return res;
}

CKStructure ck_expand(const S5Structure& m) {
  CKStructure ck;
  ck.base = m;
  const int masks = 1 << m.num_agents();
  ck.coalition.resize(masks);
  ck.coalition[0] = singleton_partition(m.n);
  for (Coalition c = 1; c < (Coalition)masks; ++c) {
    if (coalition_size(c) == 1) {
      int a = __builtin_ctz(c);
      ck.coalition[c] = m.agents[a];
      continue;
    }
    UnionFind uf(m.n);
    for (int a = 0; a < m.num_agents(); ++a) {
      if (!has_agent(c, a)) continue;
      for (const auto& blk : m.agents[a].blocks)
        for (size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0], blk[i]);
    }
    ck.coalition[c] = partition_from_unionfind(uf);
  }
  return ck;
}

const std::vector<WorldId>& coset(const CKStructure& ck, WorldId w,
                                  Coalition alpha) {
  return ck.coalition[alpha].block(w);
}

bool is_connected(const CKStructure& ck) {
  if (ck.n() == 0) throw EmptyStructureError();
  return ck.coalition[ck.full()].size() == 1;
}

}  // namespace epistemia
