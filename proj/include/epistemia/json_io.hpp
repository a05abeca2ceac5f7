#pragma once
// Structure file format:
//   {"agents": ["a","b"], "worlds": 3,
//    "edges": {"a": [[0,1]], "b": [[1,2]]},
//    "props": {"p0": [0,2]}}
// Loops are written as [w,w].  Key order is fixed and pairs are sorted so
// that outputs are byte-stable.  Covering outputs carry an extra
// "covering": {"map": [...], "base": 0, "generators": [...]} block.

#include <iosfwd>

#include "epistemia/cayley.hpp"
#include "epistemia/efgame.hpp"
#include "epistemia/hypergraph.hpp"
#include "epistemia/kripke.hpp"

namespace epistemia {

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(w) {}
};

std::string structure_to_json(const S5Structure& s);
std::string cayley_to_json(const CayleyStructure& c);

RawStructure raw_from_json(const std::string& text);

// Parses and validates (non-strict); throws IoError with the first
// validation issue on bad input.
S5Structure structure_from_json(const std::string& text);

// Reads a structure plus its covering block if present.
struct LoadedStructure {
  S5Structure structure;
  std::optional<CoveringMap> covering;
  std::optional<WorldId> covering_base;
  int truncation_depth = -1;
};
LoadedStructure load_structure_file(const std::string& path);

std::string upgrade_report_json(const UpgradeReport& rep);

// {"vertices": [{"coalition": "a,b", "class": k}, ...],
//  "hyperedges": [[vertex ids], ...]}
std::string hypergraph_to_json(const DualHypergraph& h,
                               const std::vector<std::string>& agent_names);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace epistemia
