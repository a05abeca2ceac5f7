#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "epistemia/corpus.hpp"
#include "epistemia/json_io.hpp"
#include "suite.hpp"

using namespace epistemia;

namespace {

#ifdef EPISTEMIA_CLI
const char* cli_path() { return EPISTEMIA_CLI; }
#else
const char* cli_path() { return nullptr; }
#endif

std::string temp_dir() {
  static int counter = 0;
  std::string dir = "io_test_tmp_" + std::to_string(counter++);
  std::string cmd = "mkdir -p " + dir;
  REQUIRE(std::system(cmd.c_str()) == 0);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("structure JSON round trip is bit-stable") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    S5Structure s = random_s5(rng, 1 + rng.below(6), 2, 2, 0.5, false);
    std::string once = structure_to_json(s);
    S5Structure back = structure_from_json(once);
    CHECK(back.n == s.n);
    CHECK(back.agent_names == s.agent_names);
    CHECK(back.val == s.val);
    for (int a = 0; a < s.num_agents(); ++a)
      CHECK(back.agents[a].block_of == s.agents[a].block_of);
    CHECK(structure_to_json(back) == once);
  }
}

TEST_CASE("bad input reports through IoError") {
  CHECK_THROWS_AS(structure_from_json("{"), IoError);
  CHECK_THROWS_AS(structure_from_json("{\"worlds\": 2}"), IoError);
  // non-transitive edge list is invalid
  CHECK_THROWS_AS(
      structure_from_json(R"({"agents": ["a"], "worlds": 3,
        "edges": {"a": [[0,1],[1,2]]}, "props": {}})"),
      IoError);
}

TEST_CASE("covering JSON keeps the covering block") {
  CayleyStructure c = build_covering(chain_structure(), 0, EdgeSet::Spanning, 0);
  std::string dir = temp_dir();
  std::string path = dir + "/c.json";
  write_file(path, cayley_to_json(c));
  LoadedStructure loaded = load_structure_file(path);
  REQUIRE(loaded.covering.has_value());
  CHECK(loaded.covering->map == c.covering.map);
  CHECK(*loaded.covering_base == 0);
  CHECK(loaded.structure.n == c.ck.n());
  // truncation marker
  CayleyStructure t = tree_unfold(chain_structure(), 0, 2);
  write_file(path, cayley_to_json(t));
  CHECK(load_structure_file(path).truncation_depth == 2);
}

TEST_CASE("corpus generation is deterministic and honors ranges") {
  CorpusSpec spec;
  spec.seed = 0;
  spec.count = 8;
  spec.n_min = 1;
  spec.n_max = 1;
  auto a = gen_corpus(spec);
  auto b = gen_corpus(spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].n == 1);  // singletons only
    CHECK(structure_to_json(a[i]) == structure_to_json(b[i]));
  }
  spec.n_min = 2;
  spec.n_max = 5;
  spec.connected = true;
  for (const S5Structure& s : gen_corpus(spec)) {
    CHECK(s.n >= 2);
    CHECK(s.n <= 5);
    CHECK(is_connected(ck_expand(s)));
  }
}

TEST_CASE("suite spec parsing") {
  suite::SuiteSpec spec = suite::parse_suite_spec(
      R"({"seed": 42, "empty_corpus": true, "report_json": "r.json"})");
  CHECK(spec.seed == 42);
  CHECK(spec.empty_corpus);
  CHECK(spec.report_json == "r.json");
  CHECK_THROWS_AS(suite::parse_suite_spec("nonsense"), suite::SpecParseError);
  CHECK_THROWS_AS(suite::parse_suite_spec(R"({"seed": "soup"})"),
                  suite::SpecParseError);
}

TEST_CASE("empty corpus runs vacuously with warnings") {
  suite::SuiteSpec spec;
  spec.empty_corpus = true;
  std::ostringstream log, timing;
  suite::SuiteResult result = suite::run_suite(spec, log, timing);
  int vacuous = 0;
  for (const auto& c : result.criteria) {
    CHECK(c.pass);
    if (c.vacuous) ++vacuous;
  }
  CHECK(vacuous == 11);  // everything except the determinism criterion
  CHECK(log.str().find("vacuous") != std::string::npos);
}

TEST_CASE("cli: validate, cover and a scripted repl game") {
  const char* cli = cli_path();
  REQUIRE(cli != nullptr);
  std::string dir = temp_dir();
  write_file(dir + "/m.json", structure_to_json(chain_structure()));
  std::string base = std::string(cli);
  CHECK(std::system((base + " validate --in " + dir + "/m.json > " + dir +
                     "/v.txt").c_str()) == 0);
  CHECK(read_file(dir + "/v.txt").find("VALID") != std::string::npos);
  CHECK(std::system((base + " cover --in " + dir + "/m.json --edges full --out " +
                     dir + "/c.json 2>/dev/null").c_str()) == 0);
  CHECK(load_structure_file(dir + "/c.json").covering.has_value());
  // repl: an immediate quit leaves just the banner in the transcript
  {
    std::string cmd = "printf 'quit\\n' | " + base + " repl --left " + dir +
                      "/m.json --right " + dir + "/m.json --transcript " +
                      dir + "/t1.txt > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    std::string t = read_file(dir + "/t1.txt");
    CHECK(t.find("engine: responds") == std::string::npos);
  }
  // one legal round: the engine survives on a bisimilar (identical) pair
  {
    std::string cmd = "printf 'move l a 1\\nquit\\n' | " + base +
                      " repl --left " + dir + "/m.json --right " + dir +
                      "/m.json --transcript " + dir + "/t2.txt > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    std::string t = read_file(dir + "/t2.txt");
    CHECK(t.find("engine: responds") != std::string::npos);
    CHECK(t.find("resigns") == std::string::npos);
  }
  // atomic mismatch at the start: engine announces the loss
  {
    S5Structure other = chain_structure();
    other.val[0] = {0, 1, 0};
    write_file(dir + "/o.json", structure_to_json(other));
    std::string cmd = "printf 'quit\\n' | " + base + " repl --left " + dir +
                      "/m.json --right " + dir + "/o.json --transcript " +
                      dir + "/t3.txt > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(read_file(dir + "/t3.txt").find("resigns") != std::string::npos);
  }
}

TEST_SUITE_END();
