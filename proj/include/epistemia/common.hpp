#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epistemia {

constexpr int kMaxAgents = 8;

using WorldId = int;
using AgentId = int;

// A coalition is a bitmask over agent indices 0..|Gamma|-1.  With
// kMaxAgents = 8 every coalition fits a byte and the powerset tau is a
// dense table of at most 256 entries.
using Coalition = unsigned;

constexpr Coalition kNoAgents = 0u;

constexpr Coalition full_coalition(int num_agents) {
  return (1u << num_agents) - 1u;
}
constexpr bool has_agent(Coalition c, AgentId a) { return (c >> a) & 1u; }
constexpr bool subset_of(Coalition a, Coalition b) { return (a & ~b) == 0u; }
constexpr Coalition with_agent(Coalition c, AgentId a) { return c | (1u << a); }
constexpr Coalition without_agent(Coalition c, AgentId a) {
  return c & ~(1u << a);
}
inline int coalition_size(Coalition c) { return __builtin_popcount(c); }

std::string coalition_name(Coalition c, const std::vector<std::string>& agents);

// Deterministic splitmix64 generator.  All randomness in the artifact goes
// through this so that identical seeds give byte-identical outputs on every
// platform; std::random distributions are not portable.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed = 0) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in [0, n)
  int below(int n) { return n <= 1 ? 0 : (int)(next() % (uint64_t)n); }
  bool chance(double p) { return (next() >> 11) * 0x1.0p-53 < p; }
  Rng fork() { return Rng(next()); }
};

// Plain union-find with path halving; block extraction is canonical
// (blocks numbered by smallest member, members sorted).
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent_[b] = a;  // keep the smaller id as root for canonical output
    return true;
  }
  int size() const { return (int)parent_.size(); }

 private:
  std::vector<int> parent_;
};

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyStructureError : Error {
  EmptyStructureError() : Error("structure has no worlds") {}
};
struct SignatureMismatchError : Error {
  explicit SignatureMismatchError(const std::string& w) : Error(w) {}
};
struct NotConnectedError : Error {
  explicit NotConnectedError(const std::string& w) : Error(w) {}
};
struct GroupTooLargeError : Error {
  size_t cap;
  explicit GroupTooLargeError(size_t c)
      : Error("group enumeration exceeded element cap"), cap(c) {}
};
struct Not2AcyclicError : Error {
  explicit Not2AcyclicError(const std::string& w) : Error(w) {}
};
struct NotConnectedTupleError : Error {
  explicit NotConnectedTupleError(const std::string& w) : Error(w) {}
};
struct NoLeastElementError : Error {
  explicit NoLeastElementError(const std::string& w) : Error(w) {}
};
struct NoCandidateError : Error {
  AgentId agent;
  int class_id;
  NoCandidateError(const std::string& w, AgentId a, int cls)
      : Error(w), agent(a), class_id(cls) {}
};
struct HypothesisViolatedError : Error {
  explicit HypothesisViolatedError(const std::string& w) : Error(w) {}
};
struct PostconditionFailedError : Error {
  explicit PostconditionFailedError(const std::string& w) : Error(w) {}
};
struct MalformedPathError : Error {
  explicit MalformedPathError(const std::string& w) : Error(w) {}
};
struct SameWorldError : Error {
  SameWorldError() : Error("t-distance is undefined for identical worlds") {}
};
struct InvariantBrokenError : Error {
  explicit InvariantBrokenError(const std::string& w) : Error(w) {}
};
struct FreenessUnavailableError : Error {
  explicit FreenessUnavailableError(const std::string& w) : Error(w) {}
};
struct GatesFailedError : Error {
  explicit GatesFailedError(const std::string& w) : Error(w) {}
};

// Static-partition parallel for; thread count respects EPISTEMIA_THREADS.
// Work items must be independent; results keyed by index stay deterministic.
int worker_count();
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace epistemia
