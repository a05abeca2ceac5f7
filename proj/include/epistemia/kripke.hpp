#pragma once
// S5 Kripke structures and their common-knowledge (CK) expansions.
//
// Accessibility relations are equivalence relations and are stored as
// partitions: block ids are dense and ordered by smallest member, so two
// structurally equal relations always produce identical representations.

#include <optional>
#include <span>
#include <utility>

#include "epistemia/common.hpp"

namespace epistemia {

struct Partition {
  std::vector<int> block_of;                 // world -> block id
  std::vector<std::vector<WorldId>> blocks;  // block id -> sorted members

  int size() const { return (int)blocks.size(); }
  bool same_block(WorldId u, WorldId v) const {
    return block_of[u] == block_of[v];
  }
  const std::vector<WorldId>& block(WorldId w) const {
    return blocks[block_of[w]];
  }
  bool operator==(const Partition& o) const { return block_of == o.block_of; }
};

Partition partition_from_unionfind(UnionFind& uf);
Partition singleton_partition(int n);

using EdgeList = std::vector<std::pair<WorldId, WorldId>>;  // unordered pairs

struct S5Structure {
  int n = 0;
  std::vector<std::string> agent_names;
  std::vector<std::string> prop_names;
  std::vector<Partition> agents;              // per-agent partition
  std::vector<std::vector<uint8_t>> val;      // [prop][world] in {0,1}
  std::vector<EdgeList> raw_edges;            // as given; loops kept if present

  int num_agents() const { return (int)agent_names.size(); }
  int num_props() const { return (int)prop_names.size(); }
  bool prop_holds(int p, WorldId w) const { return val[p][w] != 0; }
  // atomic (propositional) type as a bitmask over prop indices
  uint32_t atomic_type(WorldId w) const {
    uint32_t t = 0;
    for (int p = 0; p < num_props(); ++p)
      if (val[p][w]) t |= (1u << p);
    return t;
  }
  bool same_signature(const S5Structure& o) const {
    return agent_names == o.agent_names && prop_names == o.prop_names;
  }
};

struct CKStructure {
  S5Structure base;
  std::vector<Partition> coalition;  // indexed by Coalition mask, size 2^|Gamma|

  int n() const { return base.n; }
  int num_agents() const { return base.num_agents(); }
  int num_masks() const { return 1 << base.num_agents(); }
  Coalition full() const { return full_coalition(base.num_agents()); }
  bool same_class(Coalition a, WorldId u, WorldId v) const {
    return coalition[a].same_block(u, v);
  }
  const std::vector<WorldId>& coset_of(WorldId w, Coalition a) const {
    return coalition[a].block(w);
  }
  int class_id(WorldId w, Coalition a) const {
    return coalition[a].block_of[w];
  }
};

// --- validation -----------------------------------------------------------

struct ValidationIssue {
  enum Kind {
    DanglingWorldId,
    MissingPair,          // closure contains a pair the input lacks
    StrictnessViolation,  // missing reflexive loop in strict mode
  } kind;
  AgentId agent;
  WorldId u, v;
  std::string to_string(const std::vector<std::string>& agent_names) const;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

struct RawStructure {
  int n = 0;
  std::vector<std::string> agent_names;
  std::vector<std::string> prop_names;
  std::vector<EdgeList> edges;                // per agent
  std::vector<std::vector<WorldId>> prop_worlds;  // per prop
};

struct ValidateResult {
  std::optional<S5Structure> structure;
  ValidationReport report;
  bool ok() const { return structure.has_value(); }
};

// Accepts the input iff, per agent, the reflexive-symmetric closure of the
// edge list is already transitive (the list may omit loops unless `strict`).
ValidateResult validate_s5(const RawStructure& raw, bool strict = false);

// --- CK expansion ---------------------------------------------------------

// Eagerly computes one partition per coalition mask.  R_alpha is the
// transitive closure of the union of the member relations, so the blocks of
// coalition[alpha] are the connected components of that union.
CKStructure ck_expand(const S5Structure& m);

const std::vector<WorldId>& coset(const CKStructure& ck, WorldId w,
                                  Coalition alpha);

bool is_connected(const CKStructure& ck);  // throws EmptyStructureError

}  // namespace epistemia
