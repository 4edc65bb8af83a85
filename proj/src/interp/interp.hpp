#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "align/align.hpp"
#include "frontend/linker.hpp"
#include "lang/ast.hpp"
#include "lang/value.hpp"

// Reference interpreter: commands, formulas, relational formulas under a
// reference permutation, and products. Serves as the differential-testing
// oracle and as the runtime effect checker.

namespace rv {

// Execution state: allocation table, one map per field, global store, and a
// counter handing out sequential fresh references.
struct ConcreteState {
  std::map<Ref, std::string> alloct;
  std::map<std::string, std::map<Ref, Value>> heap;  // field -> ref -> value
  std::map<std::string, Value> globals;
  Ref next = 1;

  // Null is never allocated, every stored reference is null or live, region
  // values contain only null or live references, and heap cells exist exactly
  // for the fields of each object's class.
  bool wf(const Program& p, std::string* why = nullptr) const;
  std::string str() const;
};

// Read and write footprints recorded during a run. Global variables are
// tracked by name, heap locations as (field, reference) pairs.
struct Trace {
  std::set<std::string> gwrites, greads;
  std::set<std::pair<std::string, Ref>> hwrites, hreads;
  std::vector<Ref> allocs;
};

struct Fault : std::runtime_error {
  std::string kind;  // null-deref | assert | alignment | disjoint | no-body
  Span sp;
  Fault(std::string k, Span s, const std::string& msg)
      : std::runtime_error((s.valid() ? s.str() + ": " : "") + "fault[" + k + "]: " + msg),
        kind(std::move(k)),
        sp(s) {}
};

struct OutOfFuel : std::runtime_error {
  OutOfFuel() : std::runtime_error("execution ran out of fuel") {}
};

using Env = std::map<std::string, Value>;

// Snapshot used to resolve old(e) in postconditions and invariants.
struct OldCtx {
  const ConcreteState* s = nullptr;
  const Env* env = nullptr;
};

inline constexpr long kDefaultFuel = 1000000;

Value default_value(const Type& t);

class Interp {
 public:
  explicit Interp(const Program& p) : p_(p) {}

  const Program& program() const { return p_; }

  // Heap writes whose target lies inside this boundary's current denotation
  // fault; used to replay the client write discipline at runtime.
  const std::vector<BndAtom>* guard_boundary = nullptr;
  // Check state well-formedness after every step; for the test suites.
  bool debug_wf = false;
  // Predicate unfoldings allowed per formula query before OutOfFuel.
  long pred_budget = 100000;

  Value eval(const ExprP& e, const ConcreteState& s, const Env& env,
             const OldCtx* old = nullptr, Trace* tr = nullptr) const;
  bool holds(const FormulaP& f, const ConcreteState& s, const Env& env,
             const OldCtx* old = nullptr) const;

  void exec(const CommandP& c, ConcreteState& s, Env& env, Trace& tr, long& fuel) const;

  // Runs a linked method body. Faults when only a spec is in scope.
  Value call_method(const std::string& m, const std::vector<Value>& args, ConcreteState& s,
                    Trace& tr, long& fuel) const;

  Ref allocate(ConcreteState& s, const std::string& cls, Span sp = {}) const;

  // Current denotation of a boundary/effect region expression; evaluated over
  // globals only (boundary atoms) or a given environment (effect atoms).
  Region denote_region(const ExprP& g, const ConcreteState& s, const Env& env) const;

 private:
  struct PredFuel {
    long left;
  };
  bool holds_rec(const FormulaP& f, const ConcreteState& s, const Env& env, const OldCtx* old,
                 PredFuel& pf) const;
  const Program& p_;
};

// Every recorded write must be covered by a write atom of the expanded
// effects, denoted in the pre-state: fresh-object writes and table growth
// need the alloc atom. Returns human-readable violations; empty means ok.
std::vector<std::string> check_effects(const Trace& t, const std::vector<EffAtom>& expanded,
                                       const ConcreteState& s_pre, const Env& env_pre,
                                       const Interp& in);

struct OldCtxPair {
  OldCtx l, r;
  const RefPerm* pi = nullptr;
};

class RelInterp {
 public:
  explicit RelInterp(const BiProgram& bp);

  const Interp& left() const { return il_; }
  const Interp& right() const { return ir_; }
  Interp& left() { return il_; }
  Interp& right() { return ir_; }

  // Agreement is plain equality for primitives and math values, permutation
  // correspondence for references, and elementwise permutation-image equality
  // for regions. Paired quantifiers range over permutation-related allocated
  // references of the bound class. Math-typed existentials use a bounded
  // witness search over values present in the two states.
  bool eval_relformula(const RelFormulaP& rf, const ConcreteState& sl, const ConcreteState& sr,
                       const RefPerm& pi, const Env& el = {}, const Env& er = {},
                       const OldCtxPair* old = nullptr) const;

  void eval_product(const ProdNodeP& n, ConcreteState& sl, ConcreteState& sr, RefPerm& pi,
                    Env& el, Env& er, Trace& tl, Trace& tr, long& fuel) const;

  std::pair<Value, Value> call_bimethod(const std::string& m, const std::vector<Value>& argsL,
                                        const std::vector<Value>& argsR, ConcreteState& sl,
                                        ConcreteState& sr, RefPerm& pi, Trace& tl, Trace& tr,
                                        long& fuel) const;

 private:
  const BiProgram& bp_;
  Interp il_, ir_;
  mutable std::map<std::string, ProdNodeP> product_cache_;
};

}  // namespace rv
