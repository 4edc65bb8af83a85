#pragma once

#include <memory>
#include <string>
#include <vector>

#include "frontend/linker.hpp"
#include "lang/ast.hpp"

// Biprogram projections, the adequacy check, and the product construction.
// A product is a tree of nodes acting on a pair of states plus a reference
// permutation; one-sided nodes carry ordinary commands addressed to one side.

namespace rv {

enum class Pk {
  PSeq,
  PLeft,    // run a command on the left state only
  PRight,   // run a command on the right state only
  PAlloc2,  // paired allocation; extends the permutation with the new pair
  PCall2,   // call with a relational spec
  PVar2,    // paired local variable
  PIf2,     // aligned conditional (guard agreement is asserted just before)
  PWhile2,  // aligned loop, lockstep or with one-sided branches
  PAssert,  // relational assertion
};

struct ProdNode;
using ProdNodeP = std::shared_ptr<const ProdNode>;

struct ProdNode {
  Pk k;
  Span sp;
  std::vector<ProdNodeP> seq;       // PSeq
  CommandP cmd;                     // PLeft / PRight payload
  std::string x;                    // PAlloc2 target, PVar2 name, PCall2 lhs
  std::string cls;                  // PAlloc2
  Type tl, tr;                      // PVar2
  std::string meth;                 // PCall2
  std::vector<ExprP> actsL, actsR;  // PCall2
  ExprP gl, gr;                     // PIf2 / PWhile2
  ProdNodeP b1, b2, body;           // PIf2 branches / PVar2 / PWhile2 body
  // Loop alignment: null selectors mean lockstep. bodyL/bodyR are the body
  // projections run by one-sided iterations.
  RelFormulaP alignL, alignR;
  CommandP bodyL, bodyR;
  std::vector<RelFormulaP> rinvs;  // user-supplied relational invariants
  RelFormulaP rf;                  // PAssert
};

// Erases a biprogram to the underlying one-side command. Relational asserts
// project to skip; alignment annotations are dropped.
CommandP project(const BiprogP& b, bool left);

struct AdequacyReport {
  bool ok = true;
  std::string message;  // first mismatching node per failing side
};

// A biprogram is adequate for a pair of commands when its normalized
// projections match the normalized commands. Normalization flattens
// sequences, drops skips, and ignores loop invariant annotations.
AdequacyReport check_adequacy(const BiprogP& b, const CommandP& left_src,
                              const CommandP& right_src);

// Builds the product. `bp` supplies the relational specs for aligned calls
// and may be null only for call-free biprograms. Throws SrcError when an
// aligned call has no relational spec in scope.
ProdNodeP build_product(const BiprogP& b, const BiProgram* bp);

// The automatic invariant of an alignment-guarded loop: some branch of the
// loop body is enabled, or the loop is over. alignL/alignR are the embedded
// one-sided selector formulas; null yields the lockstep variant, which is
// plain guard agreement.
RelFormulaP adequacy_invariant(const ExprP& gl, const ExprP& gr, const RelFormulaP& alignL,
                               const RelFormulaP& alignR);

std::string print_product(const ProdNodeP& p, int indent = 0);

}  // namespace rv
