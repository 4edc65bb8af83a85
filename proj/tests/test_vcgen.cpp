#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "frontend/linker.hpp"
#include "frontend/parser.hpp"
#include "interp/interp.hpp"
#include "smt/driver.hpp"
#include "smt/smtlib.hpp"
#include "typecheck/typecheck.hpp"
#include "vcgen/vcgen.hpp"

using namespace rv;

namespace {

Program load(const char* src, const std::string& target) {
  UnitStore st;
  st.add(parse_units(src, "test.wrl"));
  Program p = link_program(st, target);
  typecheck_program(p);
  return p;
}

BiProgram load_bi(const char* src, const std::string& target) {
  UnitStore st;
  st.add(parse_units(src, "test.wrl"));
  BiProgram bp = link_biprogram(st, target);
  typecheck_biprogram(bp);
  return bp;
}

Verdict solve(const Theory& th, const VC& vc) {
  SolverConfig cfg;
  cfg.timeout_s = 60;
  cfg.want_model = false;
  return run_solver(cfg, vc_smt2(th, vc)).verdict;
}

// Every generated condition must come back valid; failures are reported with
// their label to make a broken rule easy to spot.
void expect_all_valid(const Theory& th, const std::vector<VC>& vcs) {
  for (const auto& vc : vcs) {
    Verdict v = solve(th, vc);
    INFO("condition ", vc.label);
    CHECK(v == Verdict::Valid);
  }
}

const VC* find_kind(const std::vector<VC>& vcs, const std::string& kind) {
  for (const auto& vc : vcs)
    if (vc.kind == kind) return &vc;
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Straight-line arithmetic: the simplest possible postcondition obligations.

static const char* kIncSrc = R"(
interface IncI =
  meth inc(x: int): int
    requires { true }
    ensures { result = x + 1 }
  meth bad(x: int): int
    requires { true }
    ensures { result = x + 1 }
end

module Inc : IncI =
  meth inc(x: int): int =
    result := x + 1
  end
  meth bad(x: int): int =
    result := x + 2
  end
end
)";

TEST_CASE("postcondition of a correct straight-line method is valid") {
  Program p = load(kIncSrc, "Inc");
  Theory th = build_theory(p);
  auto vcs = gen_unary_vcs(p, "inc");
  REQUIRE(vcs.size() == 1);
  CHECK(vcs[0].kind == "post");
  CHECK(solve(th, vcs[0]) == Verdict::Valid);
}

TEST_CASE("postcondition of a wrong method yields a countermodel") {
  Program p = load(kIncSrc, "Inc");
  Theory th = build_theory(p);
  auto vcs = gen_unary_vcs(p, "bad");
  REQUIRE(vcs.size() == 1);
  SolverConfig cfg;
  cfg.timeout_s = 60;
  SolverResult r = run_solver(cfg, vc_smt2(th, vcs[0]));
  CHECK(r.verdict == Verdict::Invalid);
  CHECK(r.model.find("define-fun") != std::string::npos);
}

TEST_CASE("smt rendering is deterministic") {
  Program p = load(kIncSrc, "Inc");
  Theory th = build_theory(p);
  auto a = gen_unary_vcs(p, "inc");
  auto b = gen_unary_vcs(p, "inc");
  REQUIRE(a.size() == b.size());
  CHECK(vc_smt2(th, a[0]) == vc_smt2(th, b[0]));
}

// ---------------------------------------------------------------------------
// Loops: invariant establishment, preservation, and use.

static const char* kMultSrc = R"(
interface MultI =
  meth mult(n: int, m: int): int
    requires { n >= 0 /\ m >= 0 }
    ensures { result = n * m }
end

module MultB : MultI =
  meth mult(n: int, m: int): int =
    var i: int;
    result := 0;
    i := 0;
    while i < n do
      invariant { 0 <= i /\ i <= n /\ result = i * m }
      result := result + m;
      i := i + 1
    done
  end
end
)";

TEST_CASE("loop with a correct invariant verifies end to end") {
  Program p = load(kMultSrc, "MultB");
  Theory th = build_theory(p);
  auto vcs = gen_unary_vcs(p, "mult");
  CHECK(find_kind(vcs, "loop-init") != nullptr);
  CHECK(find_kind(vcs, "loop-inv") != nullptr);
  CHECK(find_kind(vcs, "post") != nullptr);
  expect_all_valid(th, vcs);
}

TEST_CASE("a broken loop invariant is caught at initialization") {
  std::string src = kMultSrc;
  auto pos = src.find("result = i * m");
  REQUIRE(pos != std::string::npos);
  src.replace(pos, 14, "result = i + m");
  Program p = load(src.c_str(), "MultB");
  Theory th = build_theory(p);
  auto vcs = gen_unary_vcs(p, "mult");
  const VC* init = find_kind(vcs, "loop-init");
  REQUIRE(init != nullptr);
  CHECK(solve(th, *init) == Verdict::Invalid);
}

// ---------------------------------------------------------------------------
// Heap access: null checks, well-formedness preservation, frame conditions.

static const char* kHeapSrc = R"(
interface HeapI =
  class Node { val: int; nxt: Node }
  global g: int

  meth deref(c: Node): int
    requires { c <> null }
    ensures { true }
    effects { rd c, rd {c}`val }
  meth deref_bad(c: Node): int
    requires { true }
    ensures { true }
    effects { rd c, rd {c}`val }
  meth link(a: Node, b: Node): unit
    requires { a <> null }
    ensures { true }
    effects { rd a, rd b, wr {a}`nxt }
  meth wrong_footprint(a: Node, b: Node): unit
    requires { a <> null /\ b <> null }
    ensures { true }
    effects { rd a, rd b, wr {a}`val }
  meth wrong_global(): unit
    requires { true }
    ensures { true }
    effects { rd g }
  meth fresh_write(): Node
    requires { true }
    ensures { true }
    effects { rw alloc }
end

module Heap : HeapI =
  meth deref(c: Node): int =
    result := c.val
  end
  meth deref_bad(c: Node): int =
    result := c.val
  end
  meth link(a: Node, b: Node): unit =
    a.nxt := b
  end
  meth wrong_footprint(a: Node, b: Node): unit =
    b.val := 7
  end
  meth wrong_global(): unit =
    g := 1
  end
  meth fresh_write(): Node =
    result := new Node;
    result.val := 5
  end
end
)";

TEST_CASE("guarded dereference verifies, unguarded one does not") {
  Program p = load(kHeapSrc, "Heap");
  Theory th = build_theory(p);
  expect_all_valid(th, gen_unary_vcs(p, "deref"));
  auto bad = gen_unary_vcs(p, "deref_bad");
  const VC* nullvc = find_kind(bad, "null");
  REQUIRE(nullvc != nullptr);
  CHECK(solve(th, *nullvc) == Verdict::Invalid);
}

TEST_CASE("field write inside the declared footprint verifies") {
  Program p = load(kHeapSrc, "Heap");
  Theory th = build_theory(p);
  auto vcs = gen_unary_vcs(p, "link");
  CHECK(find_kind(vcs, "effect") != nullptr);
  CHECK(find_kind(vcs, "wf") != nullptr);
  expect_all_valid(th, vcs);
}

TEST_CASE("writes outside the declared footprint are rejected") {
  Program p = load(kHeapSrc, "Heap");
  Theory th = build_theory(p);
  auto w1 = gen_unary_vcs(p, "wrong_footprint");
  const VC* e1 = find_kind(w1, "effect");
  REQUIRE(e1 != nullptr);
  CHECK(solve(th, *e1) == Verdict::Invalid);

  auto w2 = gen_unary_vcs(p, "wrong_global");
  const VC* e2 = find_kind(w2, "effect");
  REQUIRE(e2 != nullptr);
  CHECK(e2->goal == "false");
}

TEST_CASE("writes to freshly allocated objects are covered by rw alloc") {
  Program p = load(kHeapSrc, "Heap");
  Theory th = build_theory(p);
  expect_all_valid(th, gen_unary_vcs(p, "fresh_write"));
}

// ---------------------------------------------------------------------------
// Method calls respect callee contracts and frame the rest of the state.

static const char* kCallSrc = R"(
interface CallI =
  class Cell { v: int }
  global acc: int

  meth bump(c: Cell): unit
    requires { c <> null }
    ensures { c.v = old(c.v) + 1 }
    effects { rd c, rw {c}`v }
  meth twice(c: Cell): unit
    requires { c <> null }
    ensures { c.v = old(c.v) + 2 }
    effects { rd c, rw {c}`v }
  meth keeps(c: Cell, d: Cell): int
    requires { c <> null /\ d <> null }
    ensures { result = old(d.v) }
    effects { rd c, rd d, rd {d}`v, rw {c}`v }
end

module Call : CallI =
  meth bump(c: Cell): unit =
    c.v := c.v + 1
  end
  meth twice(c: Cell): unit =
    bump(c);
    bump(c)
  end
  meth keeps(c: Cell, d: Cell): int =
    var saved: int;
    saved := d.v;
    bump(c);
    result := saved
  end
end
)";

TEST_CASE("sequenced calls compose callee postconditions") {
  Program p = load(kCallSrc, "Call");
  Theory th = build_theory(p);
  auto vcs = gen_unary_vcs(p, "twice");
  CHECK(find_kind(vcs, "call-pre") != nullptr);
  expect_all_valid(th, vcs);
}

TEST_CASE("callee frame keeps disjoint state, unless receivers may alias") {
  Program p = load(kCallSrc, "Call");
  Theory th = build_theory(p);
  // d.v survives bump(c) only when c and d are distinct; without that
  // hypothesis the postcondition must fail.
  auto vcs = gen_unary_vcs(p, "keeps");
  const VC* post = find_kind(vcs, "post");
  REQUIRE(post != nullptr);
  CHECK(solve(th, *post) == Verdict::Invalid);

  std::string src = kCallSrc;
  auto pos = src.find("requires { c <> null /\\ d <> null }");
  REQUIRE(pos != std::string::npos);
  src.insert(pos + 35, "\n    requires { c <> d }");
  Program p2 = load(src.c_str(), "Call");
  Theory th2 = build_theory(p2);
  expect_all_valid(th2, gen_unary_vcs(p2, "keeps"));
}

// ---------------------------------------------------------------------------
// Relational verification of an aligned biprogram.

static const char* kRelMultSrc = R"(
interface MultI =
  meth mult(n: int, m: int): int
    requires { n >= 0 /\ m >= 0 }
    ensures { result = n * m }
end

module MultA : MultI =
  meth mult(n: int, m: int): int =
    var i: int;
    result := 0;
    i := 0;
    while i < n do
      invariant { 0 <= i /\ i <= n /\ result = i * m }
      var j: int in
        j := 0;
        while j < m do
          invariant { 0 <= j /\ j <= m /\ result = i * m + j }
          result := result + 1;
          j := j + 1
        done
      end;
      i := i + 1
    done
  end
end

module MultB : MultI =
  meth mult(n: int, m: int): int =
    var i: int;
    result := 0;
    i := 0;
    while i < n do
      invariant { 0 <= i /\ i <= n /\ result = i * m }
      result := result + m;
      i := i + 1
    done
  end
end

bimodule RelMult (MultA | MultB) =
  meth mult(n: int, m: int): int
    requires { n =:= n /\ m =:= m /\ Both(n >= 0 /\ m >= 0) }
    ensures { result =:= result }
  = var i: int | i: int in
      |_ result := 0 _|;
      |_ i := 0 _|;
      while (i < n | i < n) do
        invariant { i =:= i /\ result =:= result /\ n =:= n /\ m =:= m
                    /\ Both(0 <= i /\ i <= n /\ result = i * m) }
        (
          var j: int in
            j := 0;
            while j < m do
              invariant { 0 <= j /\ j <= m /\ result = i * m + j }
              result := result + 1;
              j := j + 1
            done
          end
        |
          result := result + m
        );
        |_ i := i + 1 _|
      done
    end
  end
end
)";

TEST_CASE("aligned multiplication biprogram verifies relationally") {
  BiProgram bp = load_bi(kRelMultSrc, "RelMult");
  Theory th = build_theory(bp);
  auto vcs = gen_relational_vcs(bp, "mult");
  CHECK(find_kind(vcs, "post") != nullptr);
  CHECK(find_kind(vcs, "loop-init") != nullptr);
  expect_all_valid(th, vcs);
}

TEST_CASE("weakening the relational invariant breaks preservation or use") {
  std::string src = kRelMultSrc;
  auto pos = src.find("result =:= result /\\ n =:= n");
  REQUIRE(pos != std::string::npos);
  src.replace(pos, 28, "n =:= n /\\ n =:= n");
  BiProgram bp = load_bi(src.c_str(), "RelMult");
  Theory th = build_theory(bp);
  auto vcs = gen_relational_vcs(bp, "mult");
  bool some_failure = false;
  for (const auto& vc : vcs)
    if (solve(th, vc) != Verdict::Valid) some_failure = true;
  CHECK(some_failure);
}

// ---------------------------------------------------------------------------
// Differential check: methods whose conditions all verify must satisfy their
// contracts on concrete runs.

TEST_CASE("verified multiplication agrees with the interpreter") {
  Program p = load(kMultSrc, "MultB");
  Theory th = build_theory(p);
  expect_all_valid(th, gen_unary_vcs(p, "mult"));

  Interp in(p);
  std::mt19937 rng(7);
  for (int t = 0; t < 25; ++t) {
    ConcreteState s;
    Trace tr;
    long fuel = kDefaultFuel;
    long n = rng() % 6;
    long m = rng() % 6;
    Value r = in.call_method("mult", {Value::integer(n), Value::integer(m)}, s, tr, fuel);
    CHECK(r.as_int() == n * m);
  }
}
