#pragma once
// ML[CK] formulas: interned AST, parser/printer, model checker,
// characteristic formulae, and the first-order fragment used by the
// brute-force oracles (standard translation + Tarskian evaluation).
//
// Formulas live in a FormulaPool as an interned DAG: structurally equal
// subformulas share one id, which keeps the characteristic-formula
// construction from exploding and makes equality O(1).

#include <unordered_map>

#include "epistemia/kripke.hpp"

namespace epistemia {

using FormulaId = int32_t;

enum class FormulaKind : uint8_t { Top, Bot, Prop, Not, And, Or, Box, Diamond };

struct FormulaNode {
  FormulaKind kind;
  Coalition mask = 0;  // Box/Diamond
  int prop = -1;       // Prop
  std::vector<FormulaId> children;
  int depth = 0;       // modal nesting depth
};

struct SyntaxError : Error {
  size_t position;
  SyntaxError(const std::string& msg, size_t pos)
      : Error(msg + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
};
struct UnknownAgentError : SyntaxError {
  UnknownAgentError(const std::string& name, size_t pos)
      : SyntaxError("unknown agent '" + name + "'", pos) {}
};
struct UnknownPropError : SyntaxError {
  UnknownPropError(const std::string& name, size_t pos)
      : SyntaxError("unknown proposition '" + name + "'", pos) {}
};

struct Signature {
  std::vector<std::string> agents;
  std::vector<std::string> props;
};

class FormulaPool {
 public:
  FormulaId top();
  FormulaId bot();
  FormulaId prop(int index);
  FormulaId negation(FormulaId f);
  FormulaId conj(std::vector<FormulaId> children);  // non-empty
  FormulaId disj(std::vector<FormulaId> children);  // non-empty
  FormulaId box(Coalition mask, FormulaId f);
  FormulaId diamond(Coalition mask, FormulaId f);

  const FormulaNode& operator[](FormulaId id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }

 private:
  FormulaId intern(FormulaNode node);
  std::vector<FormulaNode> nodes_;
  std::unordered_map<std::string, FormulaId> index_;
};

// Grammar: props p<k>; T, F, ~, &, |, ->; modalities [a,b] and <a,b> with
// comma-separated agent names, [] / <> for the empty coalition.
// Implication is desugared to ~/| at parse time.
FormulaId parse(FormulaPool& pool, const std::string& text,
                const Signature& sig);
std::string print(const FormulaPool& pool, FormulaId f, const Signature& sig);

int modal_depth(const FormulaPool& pool, FormulaId f);

bool model_check(const FormulaPool& pool, const CKStructure& ck, WorldId w,
                 FormulaId f);

// Characteristic formula chi^l of (ck, w): a depth-l formula satisfied by
// exactly the pointed structures that are l-bisimilar to (ck, w).
FormulaId characteristic_formula(FormulaPool& pool, const CKStructure& ck,
                                 WorldId w, int ell);

// --- first-order fragment ---------------------------------------------------

using FOId = int32_t;

enum class FOKind : uint8_t {
  Equal,   // x_i = x_j
  Rel,     // R_alpha(x_i, x_j)
  Prop,    // P_p(x_i)
  Not,
  And,
  Or,
  Exists,  // binds a fresh variable level
  Forall,
};

struct FONode {
  FOKind kind;
  Coalition mask = 0;
  int prop = -1;
  int v1 = -1, v2 = -1;  // variable levels (0 = outermost / free variable)
  std::vector<FOId> children;
  int qrank = 0;
};

struct UnboundVariableError : Error {
  explicit UnboundVariableError(int level)
      : Error("unbound variable level " + std::to_string(level)) {}
};

class FOPool {
 public:
  FOId equal(int v1, int v2);
  FOId rel(Coalition mask, int v1, int v2);
  FOId prop(int p, int v);
  FOId negation(FOId f);
  FOId conj(std::vector<FOId> children);
  FOId disj(std::vector<FOId> children);
  FOId exists(FOId body);
  FOId forall(FOId body);
  const FONode& operator[](FOId id) const { return nodes_[id]; }

 private:
  FOId add(FONode n);
  std::vector<FONode> nodes_;
};

int quantifier_rank(const FOPool& pool, FOId f);

// Variables are de-Bruijn levels into the assignment: level k is
// assignment[k]; quantifiers bind level assignment.size().
bool fo_eval(const FOPool& pool, const CKStructure& ck,
             std::vector<WorldId> assignment, FOId f);

// Standard translation; the result has one free variable at level 0 and
// quantifier rank equal to the modal depth.
FOId standard_translation(const FormulaPool& pool, FormulaId f, FOPool& out);

std::string fo_print(const FOPool& pool, FOId f, const Signature& sig);

}  // namespace epistemia
