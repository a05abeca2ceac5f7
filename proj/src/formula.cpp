#include "epistemia/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "epistemia/bisim.hpp"

namespace epistemia {

// --- pool -------------------------------------------------------------------

FormulaId FormulaPool::intern(FormulaNode node) {
  std::string key;
  key.reserve(8 + node.children.size() * 4);
  key += (char)node.kind;
  key += std::to_string(node.mask);
  key += ':';
  key += std::to_string(node.prop);
  for (FormulaId c : node.children) {
    key += ',';
    key += std::to_string(c);
  }
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  FormulaId id = (FormulaId)nodes_.size();
  nodes_.push_back(std::move(node));
  index_.emplace(std::move(key), id);
  return id;
}

FormulaId FormulaPool::top() {
  FormulaNode n{};
  n.kind = FormulaKind::Top;
  return intern(std::move(n));
}
FormulaId FormulaPool::bot() {
  FormulaNode n{};
  n.kind = FormulaKind::Bot;
  return intern(std::move(n));
}

FormulaId FormulaPool::prop(int index) {
  FormulaNode n{};
  n.kind = FormulaKind::Prop;
  n.prop = index;
  return intern(std::move(n));
}

FormulaId FormulaPool::negation(FormulaId f) {
  FormulaNode n{};
  n.kind = FormulaKind::Not;
  n.children = {f};
  n.depth = nodes_[f].depth;
  return intern(std::move(n));
}

FormulaId FormulaPool::conj(std::vector<FormulaId> children) {
  if (children.empty()) throw Error("empty conjunction");
  if (children.size() == 1) return children[0];
  FormulaNode n{};
  n.kind = FormulaKind::And;
  for (FormulaId c : children) n.depth = std::max(n.depth, nodes_[c].depth);
  n.children = std::move(children);
  return intern(std::move(n));
}

FormulaId FormulaPool::disj(std::vector<FormulaId> children) {
  if (children.empty()) throw Error("empty disjunction");
  if (children.size() == 1) return children[0];
  FormulaNode n{};
  n.kind = FormulaKind::Or;
  for (FormulaId c : children) n.depth = std::max(n.depth, nodes_[c].depth);
  n.children = std::move(children);
  return intern(std::move(n));
}

FormulaId FormulaPool::box(Coalition mask, FormulaId f) {
  FormulaNode n{};
  n.kind = FormulaKind::Box;
  n.mask = mask;
  n.children = {f};
  n.depth = nodes_[f].depth + 1;
  return intern(std::move(n));
}

FormulaId FormulaPool::diamond(Coalition mask, FormulaId f) {
  FormulaNode n{};
  n.kind = FormulaKind::Diamond;
  n.mask = mask;
  n.children = {f};
  n.depth = nodes_[f].depth + 1;
  return intern(std::move(n));
}

int modal_depth(const FormulaPool& pool, FormulaId f) { return pool[f].depth; }

// --- parser -----------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(FormulaPool& pool, const std::string& text, const Signature& sig)
      : pool_(pool), text_(text), sig_(sig) {}

  FormulaId run() {
    FormulaId f = implication();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("trailing input", pos_);
    return f;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_]))
      ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool eat2(const char* two) {
    skip_ws();
    if (pos_ + 1 < text_.size() && text_[pos_] == two[0] &&
        text_[pos_ + 1] == two[1]) {
      pos_ += 2;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  FormulaId implication() {
    FormulaId lhs = disjunction();
    if (eat2("->")) {
      FormulaId rhs = implication();  // right associative
      return pool_.disj({pool_.negation(lhs), rhs});
    }
    return lhs;
  }

  FormulaId disjunction() {
    std::vector<FormulaId> parts{conjunction()};
    while (true) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '|') {
        ++pos_;
        parts.push_back(conjunction());
      } else {
        break;
      }
    }
    return parts.size() == 1 ? parts[0] : pool_.disj(std::move(parts));
  }

  FormulaId conjunction() {
    std::vector<FormulaId> parts{unary()};
    while (eat('&')) parts.push_back(unary());
    return parts.size() == 1 ? parts[0] : pool_.conj(std::move(parts));
  }

  FormulaId unary() {
    skip_ws();
    if (eat('~')) return pool_.negation(unary());
    if (peek() == '[') {
      ++pos_;
      Coalition mask = agent_list(']');
      return pool_.box(mask, unary());
    }
    if (peek() == '<') {
      ++pos_;
      Coalition mask = agent_list('>');
      return pool_.diamond(mask, unary());
    }
    return atom();
  }

  Coalition agent_list(char close) {
    Coalition mask = 0;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == close) {
      ++pos_;
      return mask;  // empty coalition
    }
    while (true) {
      skip_ws();
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_'))
        ++pos_;
      if (pos_ == start) throw SyntaxError("expected agent name", pos_);
      std::string name = text_.substr(start, pos_ - start);
      auto it = std::find(sig_.agents.begin(), sig_.agents.end(), name);
      if (it == sig_.agents.end()) throw UnknownAgentError(name, start);
      mask = with_agent(mask, (AgentId)(it - sig_.agents.begin()));
      if (eat(',')) continue;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == close) {
        ++pos_;
        return mask;
      }
      throw SyntaxError(std::string("expected ',' or '") + close + "'", pos_);
    }
  }

  FormulaId atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      FormulaId f = implication();
      if (!eat(')')) throw SyntaxError("expected ')'", pos_);
      return f;
    }
    if (c == 'T' && !more_ident(pos_ + 1)) {
      ++pos_;
      return pool_.top();
    }
    if (c == 'F' && !more_ident(pos_ + 1)) {
      ++pos_;
      return pool_.bot();
    }
    if (std::isalpha((unsigned char)c)) {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_'))
        ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      auto it = std::find(sig_.props.begin(), sig_.props.end(), name);
      if (it == sig_.props.end()) throw UnknownPropError(name, start);
      return pool_.prop((int)(it - sig_.props.begin()));
    }
    throw SyntaxError("unexpected character", pos_);
  }

  bool more_ident(size_t p) {
    return p < text_.size() &&
           (std::isalnum((unsigned char)text_[p]) || text_[p] == '_');
  }

  FormulaPool& pool_;
  const std::string& text_;
  const Signature& sig_;
  size_t pos_ = 0;
};

int precedence(FormulaKind k) {
  switch (k) {
    case FormulaKind::Or: return 1;
    case FormulaKind::And: return 2;
    default: return 3;
  }
}

void print_rec(const FormulaPool& pool, FormulaId f, const Signature& sig,
               int min_prec, std::string& out) {
  const FormulaNode& n = pool[f];
  int prec = precedence(n.kind);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (n.kind) {
    case FormulaKind::Top: out += 'T'; break;
    case FormulaKind::Bot: out += 'F'; break;
    case FormulaKind::Prop: out += sig.props[n.prop]; break;
    case FormulaKind::Not:
      out += '~';
      print_rec(pool, n.children[0], sig, 3, out);
      break;
    case FormulaKind::And:
      for (size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += " & ";
        print_rec(pool, n.children[i], sig, 3, out);
      }
      break;
    case FormulaKind::Or:
      for (size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += " | ";
        print_rec(pool, n.children[i], sig, 2, out);
      }
      break;
    case FormulaKind::Box:
    case FormulaKind::Diamond: {
      char open = n.kind == FormulaKind::Box ? '[' : '<';
      char close = n.kind == FormulaKind::Box ? ']' : '>';
      out += open;
      bool first = true;
      for (int a = 0; a < (int)sig.agents.size(); ++a) {
        if (!has_agent(n.mask, a)) continue;
        if (!first) out += ',';
        out += sig.agents[a];
        first = false;
      }
      out += close;
      print_rec(pool, n.children[0], sig, 3, out);
      break;
    }
  }
  if (parens) out += ')';
}

}  // namespace

FormulaId parse(FormulaPool& pool, const std::string& text,
                const Signature& sig) {
  return Parser(pool, text, sig).run();
}

std::string print(const FormulaPool& pool, FormulaId f, const Signature& sig) {
  std::string out;
  print_rec(pool, f, sig, 0, out);
  return out;
}

// --- model checker ----------------------------------------------------------

namespace {

struct CheckCtx {
  const FormulaPool& pool;
  const CKStructure& ck;
  // memo per (formula, world); formulas are interned so ids are dense
  std::unordered_map<int64_t, bool> memo;

  bool eval(FormulaId f, WorldId w) {
    int64_t key = ((int64_t)f << 24) | (int64_t)w;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const FormulaNode& n = pool[f];
    bool r = false;
    switch (n.kind) {
      case FormulaKind::Top: r = true; break;
      case FormulaKind::Bot: r = false; break;
      case FormulaKind::Prop: r = ck.base.prop_holds(n.prop, w); break;
      case FormulaKind::Not: r = !eval(n.children[0], w); break;
      case FormulaKind::And:
        r = true;
        for (FormulaId c : n.children)
          if (!eval(c, w)) {
            r = false;
            break;
          }
        break;
      case FormulaKind::Or:
        r = false;
        for (FormulaId c : n.children)
          if (eval(c, w)) {
            r = true;
            break;
          }
        break;
      case FormulaKind::Box: {
        r = true;
        for (WorldId u : ck.coset_of(w, n.mask))
          if (!eval(n.children[0], u)) {
            r = false;
            break;
          }
        break;
      }
      case FormulaKind::Diamond: {
        r = false;
        for (WorldId u : ck.coset_of(w, n.mask))
          if (eval(n.children[0], u)) {
            r = true;
            break;
          }
        break;
      }
    }
    memo.emplace(key, r);
    return r;
  }
};

}  // namespace

bool model_check(const FormulaPool& pool, const CKStructure& ck, WorldId w,
                 FormulaId f) {
  CheckCtx ctx{pool, ck, {}};
  return ctx.eval(f, w);
}

// --- characteristic formulae --------------------------------------------------

namespace {

FormulaId atomic_type_formula(FormulaPool& pool, const CKStructure& ck,
                              WorldId w) {
  std::vector<FormulaId> lits;
  for (int p = 0; p < ck.base.num_props(); ++p) {
    FormulaId pf = pool.prop(p);
    lits.push_back(ck.base.prop_holds(p, w) ? pf : pool.negation(pf));
  }
  if (lits.empty()) return pool.top();
  return pool.conj(std::move(lits));
}

}  // namespace

FormulaId characteristic_formula(FormulaPool& pool, const CKStructure& ck,
                                 WorldId w, int ell) {
  if (ell < 0) throw Error("characteristic formula needs ell >= 0");
  // levelwise bisimulation partitions of ck with itself, CK signature
  auto levels = bisim_levels(ck, ck, BisimMode::CK, ell);
  const int masks = ck.num_masks();
  // chi[l][block] built bottom-up; blocks are level-l blocks restricted to
  // the left copy (ids from the joint partition)
  std::vector<std::unordered_map<int, FormulaId>> chi(ell + 1);

  // representatives per level-l block
  auto rep_of_level = [&](int l) {
    std::unordered_map<int, WorldId> reps;
    const auto& bl = levels[std::min<size_t>(l, levels.size() - 1)];
    for (WorldId u = 0; u < ck.n(); ++u)
      if (!reps.count(bl.block[u])) reps[bl.block[u]] = u;
    return reps;
  };

  for (int l = 0; l <= ell; ++l) {
    auto reps = rep_of_level(l);
    // deterministic order: ascending block id
    std::vector<std::pair<int, WorldId>> ordered(reps.begin(), reps.end());
    std::sort(ordered.begin(), ordered.end());
    for (auto [blk, u] : ordered) {
      if (l == 0) {
        chi[0][blk] = atomic_type_formula(pool, ck, u);
        continue;
      }
      const auto& prev = levels[std::min<size_t>(l - 1, levels.size() - 1)];
      std::vector<FormulaId> parts{atomic_type_formula(pool, ck, u)};
      for (Coalition a = 0; a < (Coalition)masks; ++a) {
        // level-(l-1) classes realized in [u]_a, ascending block id
        std::vector<int> realized;
        for (WorldId x : ck.coset_of(u, a)) realized.push_back(prev.block[x]);
        std::sort(realized.begin(), realized.end());
        realized.erase(std::unique(realized.begin(), realized.end()),
                       realized.end());
        std::vector<FormulaId> succ;
        for (int b : realized) {
          parts.push_back(pool.diamond(a, chi[l - 1][b]));
          succ.push_back(chi[l - 1][b]);
        }
        parts.push_back(pool.box(a, pool.disj(std::move(succ))));
      }
      chi[l][blk] = pool.conj(std::move(parts));
    }
  }
  const auto& bl = levels[std::min<size_t>(ell, levels.size() - 1)];
  FormulaId out = chi[ell][bl.block[w]];
  // pad to exact modal depth ell when refinement stabilized early
  while (pool[out].depth < ell)
    out = pool.conj({out, pool.box(0, out)});
  return out;
}

// --- first-order fragment -----------------------------------------------------

FOId FOPool::add(FONode n) {
  nodes_.push_back(std::move(n));
  return (FOId)nodes_.size() - 1;
}

FOId FOPool::equal(int v1, int v2) {
  FONode n{};
  n.kind = FOKind::Equal;
  n.v1 = v1;
  n.v2 = v2;
  return add(std::move(n));
}
FOId FOPool::rel(Coalition mask, int v1, int v2) {
  FONode n{};
  n.kind = FOKind::Rel;
  n.mask = mask;
  n.v1 = v1;
  n.v2 = v2;
  return add(std::move(n));
}
FOId FOPool::prop(int p, int v) {
  FONode n{};
  n.kind = FOKind::Prop;
  n.prop = p;
  n.v1 = v;
  return add(std::move(n));
}
FOId FOPool::negation(FOId f) {
  FONode n{};
  n.kind = FOKind::Not;
  n.qrank = nodes_[f].qrank;
  n.children = {f};
  return add(std::move(n));
}
FOId FOPool::conj(std::vector<FOId> children) {
  if (children.empty()) throw Error("empty FO conjunction");
  FONode n{};
  n.kind = FOKind::And;
  for (FOId c : children) n.qrank = std::max(n.qrank, nodes_[c].qrank);
  n.children = std::move(children);
  return add(std::move(n));
}
FOId FOPool::disj(std::vector<FOId> children) {
  if (children.empty()) throw Error("empty FO disjunction");
  FONode n{};
  n.kind = FOKind::Or;
  for (FOId c : children) n.qrank = std::max(n.qrank, nodes_[c].qrank);
  n.children = std::move(children);
  return add(std::move(n));
}
FOId FOPool::exists(FOId body) {
  FONode n{};
  n.kind = FOKind::Exists;
  n.qrank = nodes_[body].qrank + 1;
  n.children = {body};
  return add(std::move(n));
}
FOId FOPool::forall(FOId body) {
  FONode n{};
  n.kind = FOKind::Forall;
  n.qrank = nodes_[body].qrank + 1;
  n.children = {body};
  return add(std::move(n));
}

int quantifier_rank(const FOPool& pool, FOId f) { return pool[f].qrank; }

bool fo_eval(const FOPool& pool, const CKStructure& ck,
             std::vector<WorldId> assignment, FOId f) {
  const FONode& n = pool[f];
  auto var = [&](int level) -> WorldId {
    if (level < 0 || level >= (int)assignment.size())
      throw UnboundVariableError(level);
    return assignment[level];
  };
  switch (n.kind) {
    case FOKind::Equal: return var(n.v1) == var(n.v2);
    case FOKind::Rel: return ck.same_class(n.mask, var(n.v1), var(n.v2));
    case FOKind::Prop: return ck.base.prop_holds(n.prop, var(n.v1));
    case FOKind::Not: return !fo_eval(pool, ck, std::move(assignment), n.children[0]);
    case FOKind::And:
      for (FOId c : n.children)
        if (!fo_eval(pool, ck, assignment, c)) return false;
      return true;
    case FOKind::Or:
      for (FOId c : n.children)
        if (fo_eval(pool, ck, assignment, c)) return true;
      return false;
    case FOKind::Exists: {
      assignment.push_back(0);
      for (WorldId w = 0; w < ck.n(); ++w) {
        assignment.back() = w;
        if (fo_eval(pool, ck, assignment, n.children[0])) return true;
      }
      return false;
    }
    case FOKind::Forall: {
      assignment.push_back(0);
      for (WorldId w = 0; w < ck.n(); ++w) {
        assignment.back() = w;
        if (!fo_eval(pool, ck, assignment, n.children[0])) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

FOId translate(const FormulaPool& pool, FormulaId f, FOPool& out, int level) {
  const FormulaNode& n = pool[f];
  switch (n.kind) {
    case FormulaKind::Top: {
      FOId e = out.equal(level, level);
      return e;
    }
    case FormulaKind::Bot: return out.negation(out.equal(level, level));
    case FormulaKind::Prop: return out.prop(n.prop, level);
    case FormulaKind::Not:
      return out.negation(translate(pool, n.children[0], out, level));
    case FormulaKind::And: {
      std::vector<FOId> cs;
      for (FormulaId c : n.children) cs.push_back(translate(pool, c, out, level));
      return out.conj(std::move(cs));
    }
    case FormulaKind::Or: {
      std::vector<FOId> cs;
      for (FormulaId c : n.children) cs.push_back(translate(pool, c, out, level));
      return out.disj(std::move(cs));
    }
    case FormulaKind::Box: {
      // forall y (R_alpha(x,y) -> phi(y))
      FOId body = translate(pool, n.children[0], out, level + 1);
      FOId guard = out.rel(n.mask, level, level + 1);
      return out.forall(out.disj({out.negation(guard), body}));
    }
    case FormulaKind::Diamond: {
      FOId body = translate(pool, n.children[0], out, level + 1);
      FOId guard = out.rel(n.mask, level, level + 1);
      return out.exists(out.conj({guard, body}));
    }
  }
  throw Error("unreachable");
}

void fo_print_rec(const FOPool& pool, FOId f, const Signature& sig,
                  std::string& out) {
  const FONode& n = pool[f];
  auto v = [](int level) { return "x" + std::to_string(level); };
  switch (n.kind) {
    case FOKind::Equal:
      out += v(n.v1) + "=" + v(n.v2);
      break;
    case FOKind::Rel:
      out += "R" + coalition_name(n.mask, sig.agents) + "(" + v(n.v1) + "," +
             v(n.v2) + ")";
      break;
    case FOKind::Prop:
      out += sig.props[n.prop] + "(" + v(n.v1) + ")";
      break;
    case FOKind::Not:
      out += "~";
      fo_print_rec(pool, n.children[0], sig, out);
      break;
    case FOKind::And:
    case FOKind::Or: {
      out += "(";
      const char* op = n.kind == FOKind::And ? " & " : " | ";
      for (size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += op;
        fo_print_rec(pool, n.children[i], sig, out);
      }
      out += ")";
      break;
    }
    case FOKind::Exists:
    case FOKind::Forall: {
      out += n.kind == FOKind::Exists ? "E" : "A";
      // bound level = qrank bookkeeping is not enough to recover the level
      // here; print positionally
      out += ".";
      fo_print_rec(pool, n.children[0], sig, out);
      break;
    }
  }
}

}  // namespace

FOId standard_translation(const FormulaPool& pool, FormulaId f, FOPool& out) {
  return translate(pool, f, out, 0);
}

std::string fo_print(const FOPool& pool, FOId f, const Signature& sig) {
  std::string out;
  fo_print_rec(pool, f, sig, out);
  return out;
}

}  // namespace epistemia
