#pragma once

// Verification condition generation. Each method body is walked symbolically
// along every control-flow path; state components (allocation table, one
// array per field, globals) are SMT terms threaded through the walk, loops
// are cut at havocked heads, and calls are replaced by their contracts.
// Every check point yields one self-contained VC: a script of declarations
// and assumptions plus a goal. The goal is valid iff script + (not goal) is
// unsatisfiable.
//
// Quantified axioms never range over arrays: region images and predicate
// definitions are instantiated per ground state tuple at the point of use,
// which keeps every quantifier first-order over references (or math values)
// and well inside what E-matching handles.

#include <map>
#include <string>
#include <vector>

#include "align/align.hpp"
#include "encap/encap.hpp"
#include "frontend/linker.hpp"
#include "lang/ast.hpp"

namespace rv {

struct VC {
  std::string label;   // <unit>:<method>:<kind>:<n>, or the encap obligation label
  std::string kind;    // null | wf | effect | loop-init | loop-inv | call-pre |
                       // post | frame | align | encap | frames | mono
  std::string unit;
  std::string method;  // method / bimethod / invariant name
  Span site;
  std::vector<std::string> script;  // declarations, definitions, assumptions
  std::string goal;                 // term to prove under the script
};

struct VcOptions {
  bool trust_wf = false;  // assume state well-formedness instead of proving it
};

// Shared sort/function prelude for a unary program, or for the two sides of
// a biprogram. Blocks are included in an emitted file only when their
// trigger symbol occurs in the VC.
struct Theory {
  std::string preamble;                                   // always emitted
  std::vector<std::pair<std::string, std::string>> blocks;  // (trigger, text)
};

Theory build_theory(const Program& p);
Theory build_theory(const BiProgram& bp);

// VCs for one method body linked into the target module.
std::vector<VC> gen_unary_vcs(const Program& p, const std::string& method,
                              const VcOptions& opt = {});

// Frames lemma for one unary private invariant obligation.
VC gen_frames_vc(const Program& p, const Obligation& ob, const VcOptions& opt = {});

// Everything a unary target owes: every method body it implements plus the
// frames lemmas of its private invariants. Static violations are not VCs;
// callers surface them from analyze_encapsulation directly.
std::vector<VC> gen_unit_vcs(const Program& p, const VcOptions& opt = {});

// VCs for one bimethod of the target bimodule.
std::vector<VC> gen_relational_vcs(const BiProgram& bp, const std::string& bimethod,
                                   const VcOptions& opt = {});

// Frames lemma for one coupling obligation of the target bimodule.
VC gen_coupling_frames_vc(const BiProgram& bp, const Obligation& ob,
                          const VcOptions& opt = {});

// Every bimethod of the target plus coupling frames lemmas.
std::vector<VC> gen_biunit_vcs(const BiProgram& bp, const VcOptions& opt = {});

}  // namespace rv
