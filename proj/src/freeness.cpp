#include "epistemia/freeness.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace epistemia {

FreenessContext make_freeness_context(const CKStructure& ck, int verify_to) {
  if (!check_2acyclic_char(ck))
    throw Not2AcyclicError("structure is not 2-acyclic");
  FreenessContext ctx;
  ctx.ck = &ck;
  ctx.dual_h = dual(ck);
  ctx.agt_tab = agt_table(ck);
  ctx.self_bisim = self_bisimulation(ck, BisimMode::CK);
  ctx.block_members.resize(ctx.self_bisim.num_blocks);
  for (WorldId u = 0; u < ck.n(); ++u)
    ctx.block_members[ctx.self_bisim.block[u]].push_back(u);
  ctx.verified_n = verify_to <= 2 ? 2 : verified_acyclicity(ck, verify_to);
  if (ctx.verified_n < 2)
    throw Not2AcyclicError("coset 2-cycle found despite characterization");
  return ctx;
}

AvoidSet rho(const FreenessContext& ctx, WorldId v, Coalition gamma) {
  (void)ctx;
  return AvoidSet{v, gamma};
}

namespace {

// per-search cache of the classes forbidden by t: [x]_alpha violates t iff
// x sits in the anchor's alpha-class and [anchor]_gamma <= [anchor]_alpha
struct TCache {
  std::vector<int> forbidden_class;  // per mask; -1 = none

  TCache(const FreenessContext& ctx, const AvoidSet& t) {
    const CKStructure& ck = *ctx.ck;
    const int masks = ck.num_masks();
    forbidden_class.assign(masks, -1);
    const size_t gamma_size = ck.coset_of(t.anchor, t.gamma).size();
    for (Coalition a = 0; a < (Coalition)masks; ++a) {
      // 2-acyclicity: [v]_gamma <= [v]_alpha iff the (gamma&alpha)-class
      // already has full gamma-class size
      if (ck.coset_of(t.anchor, t.gamma & a).size() == gamma_size)
        forbidden_class[a] = ck.class_id(t.anchor, a);
    }
  }
  bool violates(Coalition alpha, int cls) const {
    return forbidden_class[alpha] == cls;
  }
};

bool classes_disjoint(const CKStructure& ck, Coalition mu1, int h1,
                      Coalition mu2, int h2) {
  const auto& c1 = ck.coalition[mu1].blocks[h1];
  const auto& c2 = ck.coalition[mu2].blocks[h2];
  if (c1.size() <= c2.size()) {
    for (WorldId x : c1)
      if (ck.class_id(x, mu2) == h2) return false;
  } else {
    for (WorldId x : c2)
      if (ck.class_id(x, mu1) == h1) return false;
  }
  return true;
}

// [w]_sub-class is contained in [w]_super-class (2-acyclic size argument)
bool class_below(const CKStructure& ck, WorldId w, Coalition sub,
                 Coalition super) {
  return ck.coset_of(w, sub & super).size() == ck.coset_of(w, sub).size();
}

// packed search state: (cur world, last label, hinge mask, hinge class)
uint64_t pack_state(WorldId cur, Coalition last, Coalition mu, int hc) {
  return (uint64_t)cur | ((uint64_t)last << 20) | ((uint64_t)mu << 28) |
         ((uint64_t)hc << 36);
}

struct SearchState {
  WorldId cur;
  Coalition last;
  Coalition mu;
  int hc;
};

SearchState unpack_state(uint64_t k) {
  return {(WorldId)(k & 0xfffff), (Coalition)((k >> 20) & 0xff),
          (Coalition)((k >> 28) & 0xff), (int)(k >> 36)};
}

// BFS over coset-path states; returns the minimal number of steps of a
// non-t coset path from w to v (cap-limited).
int path_bfs(const FreenessContext& ctx, WorldId w, WorldId v, const TCache& tc,
             int cap, std::optional<Coalition> first_label,
             CosetPath* witness) {
  const CKStructure& ck = *ctx.ck;
  const int masks = ck.num_masks();
  std::unordered_map<uint64_t, uint64_t> parent;  // state -> predecessor
  std::deque<std::pair<uint64_t, int>> queue;

  auto accept = [&](const SearchState& s) {
    return s.cur == v && ck.class_id(v, s.mu) != s.hc;
  };
  auto emit_witness = [&](uint64_t key) {
    if (!witness) return;
    std::vector<uint64_t> chain{key};
    while (true) {
      auto it = parent.find(chain.back());
      if (it == parent.end() || it->second == (uint64_t)-1) break;
      chain.push_back(it->second);
    }
    std::reverse(chain.begin(), chain.end());
    witness->worlds = {w};
    witness->labels.clear();
    for (uint64_t k : chain) {
      SearchState s = unpack_state(k);
      witness->worlds.push_back(s.cur);
      witness->labels.push_back(s.last);
    }
  };

  // initial states: one step along alpha1
  for (Coalition a1 = 1; a1 < (Coalition)masks; ++a1) {
    if (first_label && a1 != *first_label) continue;
    if (tc.violates(a1, ck.class_id(w, a1))) continue;
    for (WorldId w2 : ck.coset_of(w, a1)) {
      uint64_t key = pack_state(w2, a1, 0, ck.class_id(w, 0));
      if (parent.count(key)) continue;
      parent.emplace(key, (uint64_t)-1);
      SearchState s{w2, a1, 0, ck.class_id(w, 0)};
      if (accept(s)) {
        emit_witness(key);
        return 1;
      }
      if (cap > 1) queue.push_back({key, 1});
    }
  }
  while (!queue.empty()) {
    auto [key, depth] = queue.front();
    queue.pop_front();
    SearchState s = unpack_state(key);
    for (Coalition an = 1; an < (Coalition)masks; ++an) {
      // separation at the previous position
      const Coalition mu2 = s.last & an;
      const int h2 = ck.class_id(s.cur, mu2);
      if (!classes_disjoint(ck, s.mu, s.hc, mu2, h2)) continue;
      // non-t on the new step class
      if (tc.violates(an, ck.class_id(s.cur, an))) continue;
      for (WorldId wn : ck.coset_of(s.cur, an)) {
        uint64_t nkey = pack_state(wn, an, mu2, h2);
        if (parent.count(nkey)) continue;
        parent.emplace(nkey, key);
        SearchState ns{wn, an, mu2, h2};
        if (accept(ns)) {
          emit_witness(nkey);
          return depth + 1;
        }
        if (depth + 1 < cap) queue.push_back({nkey, depth + 1});
      }
    }
  }
  return kInfiniteDistance;
}

}  // namespace

bool class_violates_t(const FreenessContext& ctx, const AvoidSet& t,
                      Coalition alpha, int class_id) {
  return TCache(ctx, t).violates(alpha, class_id);
}

std::vector<int> rho_dual_vertices(const FreenessContext& ctx,
                                   const AvoidSet& t) {
  const CKStructure& ck = *ctx.ck;
  std::vector<int> out;
  for (Coalition b = 0; b < (Coalition)ck.num_masks(); ++b)
    if (subset_of(t.gamma, b))
      out.push_back(ctx.dual_h.vertex_of[b][ck.class_id(t.anchor, b)]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> swallowed_dual_vertices(const FreenessContext& ctx,
                                         const AvoidSet& t) {
  const CKStructure& ck = *ctx.ck;
  const size_t gamma_size = ck.coset_of(t.anchor, t.gamma).size();
  std::vector<int> out;
  for (Coalition b = 0; b < (Coalition)ck.num_masks(); ++b)
    if (ck.coset_of(t.anchor, t.gamma & b).size() == gamma_size)
      out.push_back(ctx.dual_h.vertex_of[b][ck.class_id(t.anchor, b)]);
  std::sort(out.begin(), out.end());
  return out;
}

bool avoid_set_contains_class(const FreenessContext& ctx, const AvoidSet& t,
                              WorldId w, Coalition alpha) {
  const CKStructure& ck = *ctx.ck;
  const auto& cls = ck.coset_of(w, alpha);
  for (Coalition b = 0; b < (Coalition)ck.num_masks(); ++b) {
    if (!subset_of(t.gamma, b)) continue;
    const auto& tb = ck.coset_of(t.anchor, b);
    if (tb.size() == cls.size() && tb == cls) return true;
  }
  return false;
}

PathFlags classify_path(const FreenessContext& ctx, const CosetPath& path,
                        const std::optional<AvoidSet>& t) {
  const CKStructure& ck = *ctx.ck;
  if (path.labels.empty() || path.worlds.size() != path.labels.size() + 1)
    throw MalformedPathError("alternating list has mismatched lengths");
  for (WorldId w : path.worlds)
    if (w < 0 || w >= ck.n()) throw MalformedPathError("world out of range");
  for (Coalition a : path.labels)
    if (a >= (Coalition)ck.num_masks())
      throw MalformedPathError("coalition out of range");

  PathFlags flags;
  const int len = path.length();
  // step membership
  for (int i = 0; i < len; ++i)
    if (!ck.same_class(path.labels[i], path.worlds[i], path.worlds[i + 1]))
      return flags;
  // separation with alpha_0 = alpha_{len+1} = empty
  auto label_at = [&](int i) -> Coalition {
    if (i < 0 || i >= len) return 0;
    return path.labels[i];
  };
  for (int pos = 0; pos < len; ++pos) {
    const Coalition mu1 = label_at(pos - 1) & label_at(pos);
    const Coalition mu2 = label_at(pos) & label_at(pos + 1);
    if (!classes_disjoint(ck, mu1, ck.class_id(path.worlds[pos], mu1), mu2,
                          ck.class_id(path.worlds[pos + 1], mu2)))
      return flags;
  }
  flags.valid = true;

  const WorldId w1 = path.worlds.front();
  const WorldId we = path.worlds.back();
  if (len >= 2 && ck.same_class(ck.full(), w1, we)) {
    const Coalition ae = ctx.agt_of(w1, we);
    const size_t endpoint_size = ck.coset_of(w1, ae).size();
    flags.nontrivial = true;
    flags.inner = true;
    for (int i = 0; i < len; ++i) {
      const WorldId wi = path.worlds[i];
      const Coalition ai = path.labels[i];
      // [w_i]_{a_i} contains [w1]_ae ?
      if (ck.same_class(ai, wi, w1) && class_below(ck, w1, ae, ai))
        flags.nontrivial = false;
      // [w_i]_{a_i} strictly below [w1]_ae ?
      const bool below = ck.same_class(ae, wi, w1) &&
                         class_below(ck, wi, ai, ae) &&
                         ck.coset_of(wi, ai).size() < endpoint_size;
      if (!below) flags.inner = false;
    }
  }
  if (t) {
    TCache tc(ctx, *t);
    flags.non_t = true;
    for (int i = 0; i < len; ++i)
      if (tc.violates(path.labels[i],
                      ck.class_id(path.worlds[i], path.labels[i])))
        flags.non_t = false;
  }
  return flags;
}

int t_distance(const FreenessContext& ctx, WorldId w, WorldId v,
               const AvoidSet& t, int cap, CosetPath* witness) {
  if (w == v) throw SameWorldError();
  TCache tc(ctx, t);
  return path_bfs(ctx, w, v, tc, cap, std::nullopt, witness);
}

int t_distance_set(const FreenessContext& ctx, const std::vector<WorldId>& zs,
                   WorldId v, const AvoidSet& t, int cap) {
  int best = kInfiniteDistance;
  for (WorldId z : zs) {
    if (z == v) return 0;
    best = std::min(best, t_distance(ctx, z, v, t, cap));
  }
  return best;
}

std::vector<CosetPath> enumerate_inner_non_t_paths(const FreenessContext& ctx,
                                                   WorldId w, WorldId v,
                                                   const AvoidSet& t,
                                                   int len_max,
                                                   size_t max_count) {
  const CKStructure& ck = *ctx.ck;
  std::vector<CosetPath> out;
  if (w == v || !ck.same_class(ck.full(), w, v)) return out;
  TCache tc(ctx, t);
  const Coalition ae = ctx.agt_of(w, v);
  const size_t endpoint_size = ck.coset_of(w, ae).size();
  const int masks = ck.num_masks();

  CosetPath path;
  path.worlds = {w};

  auto step_ok = [&](WorldId at, Coalition a) {
    // inner: [at]_a strictly below [w]_ae; plus non-t
    if (tc.violates(a, ck.class_id(at, a))) return false;
    if (!ck.same_class(ae, at, w)) return false;
    if (!class_below(ck, at, a, ae)) return false;
    return ck.coset_of(at, a).size() < endpoint_size;
  };

  std::function<void()> extend = [&]() {
    if (out.size() >= max_count) return;
    const int len = path.length();
    if (len >= len_max) return;
    const WorldId cur = path.worlds.back();
    const Coalition prev = len == 0 ? 0 : path.labels.back();
    const Coalition preprev = len <= 1 ? 0 : path.labels[len - 2];
    for (Coalition a = 1; a < (Coalition)masks; ++a) {
      if (!step_ok(cur, a)) continue;
      // separation at position len (needs the new label)
      if (len >= 1) {
        const Coalition mu1 = preprev & prev;
        const Coalition mu2 = prev & a;
        if (!classes_disjoint(ck, mu1,
                              ck.class_id(path.worlds[len - 1], mu1), mu2,
                              ck.class_id(cur, mu2)))
          continue;
      }
      for (WorldId x : ck.coset_of(cur, a)) {
        path.labels.push_back(a);
        path.worlds.push_back(x);
        // complete path: final separation [w_l]_{a_{l-1} & a_l} must miss v
        if (x == v && !ck.same_class(prev & a, cur, v)) out.push_back(path);
        extend();
        path.labels.pop_back();
        path.worlds.pop_back();
        if (out.size() >= max_count) return;
      }
    }
  };
  extend();
  return out;
}

ShortTResult short_t(const FreenessContext& ctx, WorldId v, WorldId z,
                     const AvoidSet& t, int cap) {
  ShortTResult res;
  if (v == z) return res;
  TCache tc(ctx, t);
  std::vector<Coalition> first_labels;
  for (Coalition a = 1; a < (Coalition)ctx.ck->num_masks(); ++a) {
    if (path_bfs(ctx, v, z, tc, cap, a, nullptr) <= cap)
      first_labels.push_back(a);
  }
  if (first_labels.empty()) return res;
  res.exists = true;
  Coalition inter = first_labels[0];
  for (Coalition a : first_labels) inter &= a;
  res.direction = inter;
  res.least_realized = std::find(first_labels.begin(), first_labels.end(),
                                 inter) != first_labels.end();
  return res;
}

StepAwayReport step_away_check(const FreenessContext& ctx, WorldId v, WorldId z,
                               Coalition gamma, int m) {
  const CKStructure& ck = *ctx.ck;
  if (ctx.verified_n < 2 * m + 1)
    throw HypothesisViolatedError(
        "step_away_check needs (2m+1)-acyclicity verified; context has n=" +
        std::to_string(ctx.verified_n));
  if (v == z) throw HypothesisViolatedError("step_away_check needs v != z");
  if (!subset_of(gamma, ctx.agt_of(v, z)))
    throw HypothesisViolatedError("gamma must be contained in agt(v,z)");
  AvoidSet t = rho(ctx, v, gamma);
  if (t_distance(ctx, z, v, t, m) > m)
    throw HypothesisViolatedError("d_t(z,v) <= m required");
  ShortTResult base = short_t(ctx, v, z, t, m);
  StepAwayReport rep;
  if (!base.exists) return rep;  // no short paths from v at all
  for (AgentId a = 0; a < ck.num_agents(); ++a) {
    if (has_agent(base.direction, a)) continue;
    for (WorldId vp : ck.coset_of(v, 1u << a)) {
      if (vp == v || vp == z) continue;
      ++rep.checked;
      if (t_distance(ctx, vp, z, t, m) > m) continue;
      ShortTResult st = short_t(ctx, vp, z, t, m);
      if (!st.exists || !has_agent(st.direction, a))
        rep.violations.push_back({a, vp, st.direction});
    }
  }
  return rep;
}

WorldId triangle_step(const FreenessContext& ctx, WorldId v, WorldId u,
                      const std::vector<WorldId>& zs, WorldId z0) {
  const CKStructure& ck = *ctx.ck;
  const Coalition alpha1 = ctx.agt_of(v, z0);
  const Coalition alpha2 = ctx.agt_of(z0, u);
  for (WorldId z : zs) {
    if (ctx.agt_of(v, z) != (alpha1 | ctx.agt_of(z0, z)))
      throw HypothesisViolatedError(
          "triangle_step premise agt(v,z) = agt(v,z0) | agt(z0,z) fails");
  }
  WorldId cur = v;
  for (int guard = 0; guard <= ck.num_agents(); ++guard) {
    const Coalition alpha3 = ctx.agt_of(u, cur);
    if (!subset_of(alpha3, alpha1 | alpha2))
      throw Error("2-acyclic triangle law violated in triangle_step");
    const Coalition missing = (alpha1 | alpha2) & ~alpha3;
    if (missing == 0) break;
    const AgentId a = __builtin_ctz(missing);
    // the proof's case analysis: such an agent always lies in alpha1
    bool moved = false;
    for (WorldId cand : ck.coset_of(cur, 1u << a)) {
      if (cand == cur || !ctx.bisimilar(cand, cur)) continue;
      if (ctx.agt_of(cand, z0) != alpha1) continue;
      if (ctx.agt_of(u, cand) != with_agent(alpha3, a)) continue;
      bool keeps = true;
      for (WorldId z : zs)
        if (ctx.agt_of(cand, z) != ctx.agt_of(cur, z)) {
          keeps = false;
          break;
        }
      if (!keeps) continue;
      cur = cand;
      moved = true;
      break;
    }
    if (!moved)
      throw NoCandidateError("triangle_step found no bisimilar a-neighbor", a,
                             ck.class_id(cur, 1u << a));
  }
  if (ctx.agt_of(u, cur) != (alpha1 | alpha2))
    throw PostconditionFailedError("triangle_step failed to reach the union");
  return cur;
}

WorldId push_away(const FreenessContext& ctx, WorldId w, WorldId v,
                  const std::vector<WorldId>& zs, WorldId z0, int m,
                  PushAwayTranscript* transcript) {
  const CKStructure& ck = *ctx.ck;
  const Coalition gamma = ctx.agt_of(z0, v);
  const AvoidSet t = rho(ctx, v, gamma);

  if (!subset_of(gamma, ctx.agt_of(w, v)))
    throw HypothesisViolatedError("push_away needs agt(z0,v) <= agt(w,v)");
  for (WorldId z : zs)
    if (!subset_of(gamma, ctx.agt_of(z, v)))
      throw HypothesisViolatedError("push_away needs agt(z0,v) <= agt(z,v)");
  if (t_distance_set(ctx, zs, v, t, m) <= m)
    throw HypothesisViolatedError("push_away needs d_t(zs, v) > m");

  PushAwayTranscript local;
  PushAwayTranscript& tr = transcript ? *transcript : local;

  WorldId cur = v;
  int outer_guard = 0;
  while (true) {
    if (++outer_guard > m + 2)
      throw PostconditionFailedError("push_away failed to make progress");
    const int ell = t_distance(ctx, w, cur, t, m);
    if (ell > m) break;

    // the appendix sequences for this distance level
    ShortTResult st0 = short_t(ctx, cur, w, t, m);
    if (!st0.exists)
      throw PostconditionFailedError(
          "d_t(w,v) <= m but no short non-t path was found");
    Coalition beta = st0.direction;
    Coalition gamma_n = gamma & ~beta;
    tr.v_seq.push_back(cur);
    tr.beta_seq.push_back(beta);
    tr.gamma_seq.push_back(gamma_n);
    if (gamma_n == 0)
      throw PostconditionFailedError(
          "gamma \\ short_t(v,w) is empty; acyclicity insufficient");
    std::vector<AgentId> a_hist;
    while (true) {
      const AgentId a = __builtin_ctz(gamma_n);
      // a bisimilar a-neighbor preserving every agt value and the distance
      // to zs; Claim 1 rules out at most |zs| neighbors plus cur itself
      WorldId next = -1;
      for (WorldId cand : ck.coset_of(cur, 1u << a)) {
        if (cand == cur || !ctx.bisimilar(cand, cur)) continue;
        if (ctx.agt_of(cand, w) != ctx.agt_of(cur, w)) continue;
        bool keeps = true;
        for (WorldId z : zs)
          if (ctx.agt_of(cand, z) != ctx.agt_of(cur, z)) {
            keeps = false;
            break;
          }
        if (!keeps) continue;
        if (t_distance_set(ctx, zs, cand, t, m) <= m) continue;
        next = cand;
        break;
      }
      if (next < 0)
        throw NoCandidateError("push_away found no bisimilar a-neighbor", a,
                               ck.class_id(cur, 1u << a));
      cur = next;
      a_hist.push_back(a);
      tr.a_seq.push_back(a);
      tr.v_seq.push_back(cur);
      const int d = t_distance(ctx, w, cur, t, m);
      if (d > ell) break;
      ShortTResult stn = short_t(ctx, cur, w, t, m);
      if (!stn.exists)
        throw PostconditionFailedError(
            "distance <= ell but no short path found");
      const Coalition beta_n = stn.direction;
      tr.beta_seq.push_back(beta_n);
      // appendix property (1)
      {
        bool run_form = false;
        for (size_t j = 0; j < a_hist.size(); ++j) {
          Coalition run = 0;
          for (size_t i = j; i < a_hist.size(); ++i)
            run = with_agent(run, a_hist[i]);
          if (beta_n == run) {
            run_form = true;
            break;
          }
        }
        Coalition all = tr.beta_seq.front();
        for (AgentId ai : a_hist) all = with_agent(all, ai);
        if (!run_form && !subset_of(all, beta_n)) tr.property1 = false;
      }
      // appendix property (3)
      const Coalition gamma_next = gamma_n & ~beta_n;
      tr.gamma_seq.push_back(gamma_next);
      if (gamma_next >= gamma_n) tr.property3 = false;
      gamma_n = gamma_next;
      if (gamma_n == 0) break;
    }
    const int d_after = t_distance(ctx, w, cur, t, m);
    if (d_after <= ell) {
      CosetPath offending;
      t_distance(ctx, w, cur, t, m, &offending);
      throw PostconditionFailedError(
          "push_away sequence terminated without increasing d_t; offending "
          "path length " +
          std::to_string(offending.length()) +
          " (insufficient acyclicity for this m)");
    }
  }
  // postconditions
  if (!ck.same_class(gamma, cur, v) || !ctx.bisimilar(cur, v))
    throw PostconditionFailedError("push_away left the gamma-class or type");
  if (t_distance_set(ctx, zs, cur, t, m) <= m ||
      t_distance(ctx, w, cur, t, m) <= m)
    throw PostconditionFailedError("push_away distance postcondition failed");
  return cur;
}

bool is_m_free(const FreenessContext& ctx, WorldId v,
               const std::vector<WorldId>& zs, WorldId z0, int m) {
  const DualHypergraph& h = ctx.dual_h;
  std::vector<int> X;
  for (WorldId z : zs) {
    const auto& e = h.edges[h.edge_of_world[z]];
    X.insert(X.end(), e.begin(), e.end());
  }
  std::sort(X.begin(), X.end());
  X.erase(std::unique(X.begin(), X.end()), X.end());
  const auto& Y = h.edges[h.edge_of_world[v]];
  std::vector<int> t = rho_dual_vertices(ctx, AvoidSet{v, ctx.agt_of(v, z0)});
  return gaifman_distance(h, X, Y, t) > m;
}

WorldId find_free_witness(const FreenessContext& ctx, WorldId v,
                          const std::vector<WorldId>& zs_in, WorldId z0,
                          Coalition gamma, int m) {
  const CKStructure& ck = *ctx.ck;
  if (!subset_of(ctx.agt_of(v, z0), gamma))
    throw HypothesisViolatedError("find_free_witness needs gamma >= agt(v,z0)");
  if (zs_in.empty()) return v;
  // z0 first, rest in given order
  std::vector<WorldId> zs{z0};
  for (WorldId z : zs_in)
    if (z != z0) zs.push_back(z);

  // step 0: adjust agt(v, z0) to gamma by adding one agent at a time
  WorldId cur = v;
  while (ctx.agt_of(cur, z0) != gamma) {
    const Coalition missing = gamma & ~ctx.agt_of(cur, z0);
    const AgentId a = __builtin_ctz(missing);
    WorldId next = -1;
    for (WorldId cand : ck.coset_of(cur, 1u << a)) {
      if (cand == cur || !ctx.bisimilar(cand, cur)) continue;
      if (ctx.agt_of(cand, z0) == with_agent(ctx.agt_of(cur, z0), a)) {
        next = cand;
        break;
      }
    }
    if (next < 0)
      throw NoCandidateError("no bisimilar copy realizes the requested gamma",
                             a, ck.class_id(cur, 1u << a));
    cur = next;
  }

  // step 1: triangle steps give d_t(zs, cur) > 1
  for (size_t j = 1; j < zs.size(); ++j) {
    std::vector<WorldId> prefix(zs.begin(), zs.begin() + j);
    cur = triangle_step(ctx, cur, zs[j], prefix, z0);
  }
  for (WorldId z : zs)
    if (!subset_of(ctx.agt_of(z0, cur), ctx.agt_of(z, cur)))
      throw PostconditionFailedError("step 1 failed to clear trivial paths");

  // step 2: push each z beyond distance m+1 (structure level), which gives
  // dual distance > m
  const int target = m + 1;
  const AvoidSet t = rho(ctx, cur, gamma);
  for (size_t i = 0; i < zs.size(); ++i) {
    if (zs[i] == cur)
      throw HypothesisViolatedError("witness world coincides with an anchor");
    if (t_distance(ctx, zs[i], cur, t, target) > target) continue;
    std::vector<WorldId> done(zs.begin(), zs.begin() + i);
    cur = push_away(ctx, zs[i], cur, done, z0, target);
  }

  if (ctx.agt_of(cur, z0) != gamma)
    throw PostconditionFailedError("witness lost the requested gamma");
  if (!is_m_free(ctx, cur, zs, z0, m))
    throw PostconditionFailedError(
        "witness fails the dual-hypergraph freeness check");
  return cur;
}

MkFreeResult check_mk_free(const FreenessContext& ctx, int m, int k,
                           const MkFreeOptions& opts) {
  MkFreeResult res;
  const CKStructure& ck = *ctx.ck;
  const DualHypergraph& h = ctx.dual_h;
  const int n = ck.n();
  const int masks = ck.num_masks();
  if (m == 0 || n == 0) return res;  // degenerate by convention

  // all pointed sets (zs, z0) with |zs| <= k
  struct Cell {
    std::vector<WorldId> zs;
    WorldId z0;
  };
  std::vector<Cell> cells;
  std::vector<WorldId> pick;
  std::function<void(WorldId)> build = [&](WorldId from) {
    if (!pick.empty()) {
      for (WorldId z0 : pick) cells.push_back({pick, z0});
    }
    if ((int)pick.size() >= k) return;
    for (WorldId next = from; next < n; ++next) {
      pick.push_back(next);
      build(next + 1);
      pick.pop_back();
    }
  };
  build(0);
  res.cells = cells.size();

  const int blocks = ctx.self_bisim.num_blocks;
  // failure marker per cell: (v, gamma) packed, or -1
  std::vector<int64_t> failure(cells.size(), -1);

  parallel_for((int)cells.size(), [&](int ci) {
    const Cell& cell = cells[ci];
    std::vector<int> X;
    for (WorldId z : cell.zs) {
      const auto& e = h.edges[h.edge_of_world[z]];
      X.insert(X.end(), e.begin(), e.end());
    }
    std::sort(X.begin(), X.end());
    X.erase(std::unique(X.begin(), X.end()), X.end());

    // distances from X under every realized t-variant t(gamma') where
    // gamma' = agt(u, z0); t(gamma') = { [z0]_beta : beta >= gamma' }
    std::vector<std::vector<int>> dist_by_gamma(masks);
    std::vector<uint8_t> have(masks, 0);
    auto distances_for = [&](Coalition gp) -> const std::vector<int>& {
      if (have[gp]) return dist_by_gamma[gp];
      have[gp] = 1;
      std::vector<uint8_t> blocked(h.num_vertices(), 0);
      for (Coalition b = 0; b < (Coalition)masks; ++b)
        if (subset_of(gp, b))
          blocked[h.vertex_of[b][ck.class_id(cell.z0, b)]] = 1;
      std::vector<int>& dist = dist_by_gamma[gp];
      dist.assign(h.num_vertices(), kInfiniteDistance);
      std::deque<int> queue;
      for (int x : X)
        if (!blocked[x]) {
          dist[x] = 0;
          queue.push_back(x);
        }
      while (!queue.empty()) {
        int x = queue.front();
        queue.pop_front();
        for (int y : h.adj[x]) {
          if (blocked[y] || dist[y] <= dist[x] + 1) continue;
          dist[y] = dist[x] + 1;
          queue.push_back(y);
        }
      }
      return dist;
    };

    // witnessed[block * masks + gamma]
    std::vector<uint8_t> witnessed((size_t)blocks * masks, 0);
    for (WorldId u = 0; u < n; ++u) {
      const Coalition gp = ctx.agt_of(u, cell.z0);
      const auto& dist = distances_for(gp);
      int du = kInfiniteDistance;
      for (Coalition b = 0; b < (Coalition)masks; ++b) {
        if (subset_of(gp, b) && ck.class_id(u, b) == ck.class_id(cell.z0, b))
          continue;  // vertex lies in t
        du = std::min(du, dist[h.vertex_of[b][ck.class_id(u, b)]]);
      }
      if (du > m) witnessed[(size_t)ctx.block_of(u) * masks + gp] = 1;
    }
    for (WorldId v = 0; v < n && failure[ci] < 0; ++v) {
      const Coalition base = ctx.agt_of(v, cell.z0);
      for (Coalition g = 0; g < (Coalition)masks; ++g) {
        if (!subset_of(base, g)) continue;
        // gamma must be realizable in v's bisimulation class at all;
        // unrealizable requests are vacuous (documented convention)
        bool realizable = false;
        for (WorldId u : ctx.block_members[ctx.block_of(v)])
          if (ctx.agt_of(u, cell.z0) == g) {
            realizable = true;
            break;
          }
        if (!realizable) continue;
        if (!witnessed[(size_t)ctx.block_of(v) * masks + g]) {
          failure[ci] = ((int64_t)v << 8) | g;
          break;
        }
      }
    }
  });

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    if (failure[ci] >= 0) {
      res.ok = false;
      res.counterexample = MkFreeCounterexample{
          (WorldId)(failure[ci] >> 8), cells[ci].zs, cells[ci].z0,
          (Coalition)(failure[ci] & 0xff)};
      break;
    }
  }

  // exercise the witness construction on sampled non-degenerate cells
  if (res.ok && opts.procedure_samples > 0 && !cells.empty()) {
    Rng rng(opts.seed);
    for (int s = 0; s < opts.procedure_samples; ++s) {
      const Cell* picked = nullptr;
      WorldId v = 0;
      Coalition g = 0;
      for (int attempt = 0; attempt < 64 && !picked; ++attempt) {
        const Cell& cell = cells[rng.below((int)cells.size())];
        v = rng.below(n);
        if (std::find(cell.zs.begin(), cell.zs.end(), v) != cell.zs.end())
          continue;  // anchored cells are vacuous for the construction
        const Coalition base = ctx.agt_of(v, cell.z0);
        std::vector<Coalition> gammas;
        for (Coalition gm = 0; gm < (Coalition)masks; ++gm) {
          if (!subset_of(base, gm)) continue;
          for (WorldId u : ctx.block_members[ctx.block_of(v)])
            if (ctx.agt_of(u, cell.z0) == gm) {
              gammas.push_back(gm);
              break;
            }
        }
        if (gammas.empty()) continue;
        g = gammas[rng.below((int)gammas.size())];
        picked = &cell;
      }
      if (!picked) break;
      const Cell& cell = *picked;
      ++res.procedure_runs;
      try {
        WorldId wit = find_free_witness(ctx, v, cell.zs, cell.z0, g, m);
        bool valid = ctx.bisimilar(wit, v) && ctx.agt_of(wit, cell.z0) == g &&
                     is_m_free(ctx, wit, cell.zs, cell.z0, m);
        if (valid)
          ++res.procedure_hits;
        else
          ++res.procedure_misses;
      } catch (const Error&) {
        ++res.procedure_misses;
      }
    }
  }
  return res;
}

}  // namespace epistemia
