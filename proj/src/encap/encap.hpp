#pragma once

// Boundary encapsulation checks. Interfaces may declare a dynamic boundary:
// a set of variables and region-image locations that client code must not
// touch directly. We enforce that in two layers:
//
//   - purely syntactic: a client assignment or read of a boundary *variable*
//     is rejected outright (a static violation);
//   - semantic: a client heap access x.f where some boundary atom covers
//     field f turns into a proof obligation that x lies outside the boundary
//     region at that point.
//
// On top of that, module-side invariants and couplings get "frames" lemmas
// (the boundary determines the invariant's truth value) and module methods
// get boundary-growth postconditions for region-valued boundary atoms.

#include <string>
#include <utility>
#include <vector>

#include "frontend/linker.hpp"
#include "lang/ast.hpp"

namespace rv {

enum class ObKind {
  StaticViolation,   // client directly names a boundary variable
  Disjointness,      // assert: accessed cell lies outside the boundary region
  FramesLemma,       // invariant/coupling depends only on the boundary footprint
  MonotonicityPost,  // region-valued boundary atoms only grow across a call
};

const char* obkind_name(ObKind k);

struct Obligation {
  ObKind kind = ObKind::StaticViolation;
  Span site;
  std::string label;    // encap:<method>:<n> | encap:frames-<inv>:0 | encap:mono-<method>:<n>
  std::string method;   // method name (or invariant/coupling name for frames lemmas)
  std::string iface;    // interface owning the boundary involved
  std::string message;  // human-readable description of what must hold / what went wrong

  // Payloads, populated per kind:
  CommandP cmd;        // Disjointness in code: the command the assert guards
  FormulaP formula;    // Disjointness assert, monotonicity post, unary frames invariant
  RelFormulaP rel;     // coupling frames lemma body
  std::vector<BndAtom> bnd;        // frames lemma boundary (left side for couplings)
  std::vector<BndAtom> bnd_right;  // coupling frames lemma: right side boundary
};

// Every interface in the closure that declares a nonempty boundary, paired
// with the expanded atom list (datagroups flattened to one atom per field).
std::vector<std::pair<const Unit*, std::vector<BndAtom>>> boundaries_of(const Program& p);

// Walks one method's spec and body in source order and returns everything the
// boundary discipline has to say about it: static violations for direct
// boundary-variable accesses and disjointness assertions for heap accesses
// over boundary-covered fields. The module implementing an interface is
// exempt from that interface's own boundary. Labels encap:<method>:<n> are
// numbered over the combined list, so they are stable across runs.
std::vector<Obligation> check_client_accesses(const Program& p, const std::string& method);

// The two halves of check_client_accesses, kept as separate entry points.
// Labels are consistent with the combined walk (filtering does not renumber).
std::vector<Obligation> check_static_writes(const Program& p, const std::string& method);
std::vector<Obligation> gen_disjointness_obligations(const Program& p, const std::string& method);

// One lemma per private invariant of each module in the closure: two states
// that agree on the denotation of the module's boundary (under equal
// allocation tables) give the invariant the same truth value.
std::vector<Obligation> gen_frames_lemma(const Program& p);

// Same lemma for each coupling of the bimodule target, over both sides'
// boundaries and a single reference bijection.
std::vector<Obligation> gen_frames_lemma_couplings(const BiProgram& bp);

// For a method implemented by a boundary-owning module: one postcondition
// old(G) << G per region-valued boundary atom (a rgn-typed variable, or an
// image over a rgn-typed field), deduplicated by printed form. Scalar atoms
// contribute nothing.
std::vector<Obligation> gen_monotonicity_post(const Program& p, const std::string& method);

struct EncapReport {
  std::vector<Obligation> static_violations;
  std::vector<Obligation> disjointness;
  std::vector<Obligation> frames;
  std::vector<Obligation> monotonicity;

  bool ok() const { return static_violations.empty(); }
  size_t total() const {
    return static_violations.size() + disjointness.size() + frames.size() +
           monotonicity.size();
  }
};

// Runs every check over every method with a body, in method-name order.
EncapReport analyze_encapsulation(const Program& p);

}  // namespace rv
