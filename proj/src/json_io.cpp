#include "epistemia/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace epistemia {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json edges_to_json(const S5Structure& s) {
  ordered_json edges = ordered_json::object();
  for (int a = 0; a < s.num_agents(); ++a) {
    EdgeList pairs = s.raw_edges[a];
    for (auto& [u, v] : pairs)
      if (u > v) std::swap(u, v);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    ordered_json arr = ordered_json::array();
    for (auto [u, v] : pairs) arr.push_back({u, v});
    edges[s.agent_names[a]] = std::move(arr);
  }
  return edges;
}

ordered_json structure_json(const S5Structure& s) {
  ordered_json j;
  j["agents"] = s.agent_names;
  j["worlds"] = s.n;
  j["edges"] = edges_to_json(s);
  ordered_json props = ordered_json::object();
  for (int p = 0; p < s.num_props(); ++p) {
    ordered_json arr = ordered_json::array();
    for (WorldId w = 0; w < s.n; ++w)
      if (s.val[p][w]) arr.push_back(w);
    props[s.prop_names[p]] = std::move(arr);
  }
  j["props"] = std::move(props);
  return j;
}

}  // namespace

std::string structure_to_json(const S5Structure& s) {
  return structure_json(s).dump(2) + "\n";
}

std::string cayley_to_json(const CayleyStructure& c) {
  ordered_json j = structure_json(c.ck.base);
  ordered_json cov;
  cov["map"] = c.covering.map;
  cov["base"] = c.base_world;
  ordered_json gens = ordered_json::array();
  for (const GeneratorId& g : c.generators) {
    ordered_json gj;
    gj["edge"] = {g.u, g.v};
    gj["agent"] = c.source.agent_names[g.agent];
    gj["copy"] = g.copy;
    gens.push_back(std::move(gj));
  }
  cov["generators"] = std::move(gens);
  if (c.truncated()) cov["truncated"] = c.truncation_depth;
  j["covering"] = std::move(cov);
  return j.dump(2) + "\n";
}

RawStructure raw_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("bad JSON: ") + e.what());
  }
  RawStructure raw;
  try {
    raw.agent_names = j.at("agents").get<std::vector<std::string>>();
    raw.n = j.at("worlds").get<int>();
    raw.edges.resize(raw.agent_names.size());
    const auto& edges = j.at("edges");
    for (size_t a = 0; a < raw.agent_names.size(); ++a) {
      if (!edges.contains(raw.agent_names[a])) continue;
      for (const auto& pair : edges.at(raw.agent_names[a])) {
        if (!pair.is_array() || pair.size() != 2)
          throw IoError("edge entries must be pairs");
        raw.edges[a].push_back({pair[0].get<int>(), pair[1].get<int>()});
      }
    }
    if (j.contains("props")) {
      for (auto it = j.at("props").begin(); it != j.at("props").end(); ++it) {
        raw.prop_names.push_back(it.key());
        raw.prop_worlds.push_back(it.value().get<std::vector<int>>());
      }
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(std::string("bad structure JSON: ") + e.what());
  }
  return raw;
}

S5Structure structure_from_json(const std::string& text) {
  RawStructure raw = raw_from_json(text);
  ValidateResult res = validate_s5(raw, false);
  if (!res.ok())
    throw IoError("invalid structure: " +
                  res.report.issues[0].to_string(raw.agent_names));
  return std::move(*res.structure);
}

LoadedStructure load_structure_file(const std::string& path) {
  std::string text = read_file(path);
  LoadedStructure out;
  out.structure = structure_from_json(text);
  ordered_json j = ordered_json::parse(text);
  if (j.contains("covering")) {
    const auto& cov = j.at("covering");
    CoveringMap cm;
    cm.map = cov.at("map").get<std::vector<int>>();
    out.covering = std::move(cm);
    out.covering_base = cov.at("base").get<int>();
    if (cov.contains("truncated"))
      out.truncation_depth = cov.at("truncated").get<int>();
  }
  return out;
}

std::string hypergraph_to_json(const DualHypergraph& h,
                               const std::vector<std::string>& agent_names) {
  ordered_json j;
  ordered_json verts = ordered_json::array();
  for (const auto& v : h.verts) {
    ordered_json e;
    std::string name;
    for (size_t a = 0; a < agent_names.size(); ++a) {
      if (!has_agent(v.color, (int)a)) continue;
      if (!name.empty()) name += ",";
      name += agent_names[a];
    }
    e["coalition"] = name;
    e["class"] = v.class_id;
    verts.push_back(std::move(e));
  }
  j["vertices"] = std::move(verts);
  ordered_json edges = ordered_json::array();
  for (const auto& e : h.edges) edges.push_back(e);
  j["hyperedges"] = std::move(edges);
  return j.dump(2) + "\n";
}

std::string upgrade_report_json(const UpgradeReport& rep) {
  ordered_json j;
  j["q"] = rep.q;
  j["m"] = rep.sched.m;
  j["ell"] = rep.sched.ell;
  ordered_json fhat = ordered_json::array();
  for (auto [m, f] : rep.sched.fhat_calls) fhat.push_back({m, f});
  j["f_hat"] = std::move(fhat);
  j["f_hat_budget"] = rep.f_hat_budget;
  ordered_json gates;
  gates["verified_n_left"] = rep.verified_n_left;
  gates["verified_n_right"] = rep.verified_n_right;
  gates["richness_left"] = rep.richness_left;
  gates["richness_right"] = rep.richness_right;
  gates["out_of_warranty"] = rep.out_of_warranty;
  j["gates"] = std::move(gates);
  j["l_bisimilar"] = rep.l_bisimilar;
  j["oracle_equivalent"] = rep.oracle_equivalent;
  j["replay_survived"] = rep.replay_survived;
  j["replay_lines"] = rep.replay_lines;
  j["failure"] = rep.failure;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << contents;
  if (!os) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace epistemia
