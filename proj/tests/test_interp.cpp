#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "frontend/diag.hpp"
#include "frontend/linker.hpp"
#include "frontend/parser.hpp"
#include "interp/interp.hpp"
#include "support/rand_prog.hpp"

using namespace rv;

// Two implementations of multiplication: repeated increment in a nested loop
// versus a single accumulating loop. Their bimodule aligns the outer loops in
// lockstep and lets the bodies run one-sided.
static const char* kMultSrc = R"(
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
        invariant { i =:= i /\ result =:= result /\ n =:= n /\ m =:= m }
        (
          var j: int in
            j := 0;
            while j < m do
              invariant { result = i * m + j }
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

// Summing the public elements of a linked list. The aligned loop steps one
// side alone while its cursor sits on a private node, so runs agree on the
// public sum even when the private nodes differ.
static const char* kSumSrc = R"(
interface SumI =
  class Node { val: int; pub: bool; nxt: Node }
  global s: int
  ghost pool: rgn

  meth sumpub(p: Node): unit
    requires { true }
    ensures { true }
    effects { wr s, rd p, rd pool`any }
end

module SumPub : SumI =
  meth sumpub(p: Node): unit =
    var c: Node;
    s := 0;
    c := p;
    while c <> null do
      if c.pub then s := s + c.val else skip end;
      c := c.nxt
    done
  end
end

bimodule RelSum (SumPub | SumPub) =
  meth sumpub(p: Node): unit
    requires { Both(true) }
    ensures { s =:= s }
  = var c: Node | c: Node in
      |_ s := 0 _|;
      |_ c := p _|;
      while (c <> null | c <> null)
          . <| c <> null /\ not (c.pub) <] | [> c <> null /\ not (c.pub) |> do
        invariant { s =:= s }
        if (c.pub | c.pub) then
          |_ s := s + c.val _|
        else
          |_ skip _|
        end;
        |_ c := c.nxt _|
      done
    end
  end
end
)";

static UnitStore mult_store() {
  UnitStore st;
  st.add(parse_units(kMultSrc, "mult.wrl"));
  return st;
}

static UnitStore sum_store() {
  UnitStore st;
  st.add(parse_units(kSumSrc, "sum.wrl"));
  return st;
}

static Value run_mult(const Interp& in, long n, long m) {
  ConcreteState s;
  Trace tr;
  long fuel = kDefaultFuel;
  return in.call_method("mult", {Value::integer(n), Value::integer(m)}, s, tr, fuel);
}

// ---------------------------------------------------------------------------
// Unary execution

TEST_CASE("the two mult bodies agree with each other and with the oracle") {
  UnitStore st = mult_store();
  Program pa = link_program(st, "MultA");
  Program pb = link_program(st, "MultB");
  Interp ia(pa), ib(pb);
  ia.debug_wf = ib.debug_wf = true;
  for (long n = 0; n <= 5; ++n)
    for (long m = 0; m <= 5; ++m) {
      Value va = run_mult(ia, n, m);
      Value vb = run_mult(ib, n, m);
      CHECK(va == vb);
      CHECK(va.as_int() == n * m);
    }
}

TEST_CASE("faults and fuel exhaustion") {
  UnitStore st = sum_store();
  Program p = link_program(st, "SumPub");
  Interp in(p);
  ConcreteState s;
  s.globals["s"] = Value::integer(0);
  s.globals["pool"] = Value::region(Region{});
  Env env{{"p", Value::ref(NULL_REF)}};
  Trace tr;

  long fuel = 100;
  try {
    in.exec(mk_fieldwr("p", "val", mk_int("1")), s, env, tr, fuel);
    FAIL("expected a null dereference fault");
  } catch (const Fault& f) {
    CHECK(f.kind == "null-deref");
  }

  // Reads through null fault too.
  fuel = 100;
  CHECK_THROWS_AS(in.exec(mk_assign("x", mk_field(mk_var("p"), "nxt")), s, env, tr, fuel),
                  Fault);

  // A guard shields the dereference behind it.
  fuel = 100;
  Env env2{{"p", Value::ref(NULL_REF)}, {"ok", Value::boolean(false)}};
  ExprP shielded = mk_bin(BinOp::And, mk_bin(BinOp::Ne, mk_var("p"), mk_null()),
                          mk_field(mk_var("p"), "pub"));
  in.exec(mk_if(shielded, mk_assign("ok", mk_field(mk_var("p"), "pub")), mk_skip()), s, env2,
          tr, fuel);
  CHECK(env2.at("ok").as_bool() == false);

  fuel = 1000;
  CommandP spin = mk_while(mk_bin(BinOp::Lt, mk_int("0"), mk_int("1")), {}, mk_skip());
  CHECK_THROWS_AS(in.exec(spin, s, env, tr, fuel), OutOfFuel);

  fuel = 3;
  CHECK_THROWS_AS(in.call_method("sumpub", {Value::ref(NULL_REF)}, s, tr, fuel), OutOfFuel);
}

TEST_CASE("interface-only methods have no body to run") {
  UnitStore st;
  st.add(parse_units("interface OnlyI = meth f(): unit requires { true } end\n"
                     "module Only : OnlyI = end",
                     "only.wrl"));
  Program p = link_program(st, "Only");
  Interp in(p);
  ConcreteState s;
  Trace tr;
  long fuel = 100;
  try {
    in.call_method("f", {}, s, tr, fuel);
    FAIL("expected a missing-body fault");
  } catch (const Fault& f) {
    CHECK(f.kind == "no-body");
  }
}

// ---------------------------------------------------------------------------
// Effect checking

TEST_CASE("writes must be licensed by the effect atoms") {
  UnitStore st = sum_store();
  Program p = link_program(st, "SumPub");
  Interp in(p);

  ConcreteState pre;
  pre.globals["s"] = Value::integer(0);
  pre.globals["pool"] = Value::region(Region{});
  Ref r = in.allocate(pre, "Node");
  Env env{{"x", Value::ref(r)}};

  EffAtom wr_s{2, LocKind::Var, "s", nullptr, "", {}};
  EffAtom rd_s{1, LocKind::Var, "s", nullptr, "", {}};
  EffAtom wr_val_x{2, LocKind::Image, "", mk_rgnlit({mk_var("x")}), "val", {}};
  EffAtom wr_val_empty{2, LocKind::Image, "", mk_rgnlit({}), "val", {}};
  EffAtom rw_alloc{3, LocKind::Alloc, "", nullptr, "", {}};

  Trace t1;
  t1.gwrites.insert("s");
  CHECK(check_effects(t1, {wr_s}, pre, env, in).empty());
  auto viol = check_effects(t1, {rd_s}, pre, env, in);
  REQUIRE(viol.size() == 1);
  CHECK(viol[0].find("write to global s") != std::string::npos);

  Trace t2;
  t2.hwrites.insert({"val", r});
  CHECK(check_effects(t2, {wr_val_x}, pre, env, in).empty());
  CHECK(check_effects(t2, {wr_val_empty}, pre, env, in).size() == 1);
  // A read atom over the right region still does not license the write.
  EffAtom rd_val_x{1, LocKind::Image, "", mk_rgnlit({mk_var("x")}), "val", {}};
  CHECK(check_effects(t2, {rd_val_x}, pre, env, in).size() == 1);

  // Writes to objects allocated during the run ride on the alloc effect.
  ConcreteState post = pre;
  Ref fresh = in.allocate(post, "Node");
  Trace t3;
  t3.allocs.push_back(fresh);
  t3.hwrites.insert({"val", fresh});
  CHECK(check_effects(t3, {rw_alloc}, pre, env, in).empty());
  auto viol3 = check_effects(t3, {}, pre, env, in);
  REQUIRE(viol3.size() == 2);
  CHECK(viol3[0].find("(fresh)") != std::string::npos);
  CHECK(viol3[1].find("without an alloc effect") != std::string::npos);

  // The sumpub body stays inside its declared effects.
  ConcreteState s1 = pre;
  ConcreteState s1_pre = s1;
  Trace t4;
  long fuel = kDefaultFuel;
  in.call_method("sumpub", {Value::ref(NULL_REF)}, s1, t4, fuel);
  CHECK(check_effects(t4, {wr_s}, s1_pre, {}, in).empty());
}

// ---------------------------------------------------------------------------
// Relational formulas

TEST_CASE("agreement under a reference permutation") {
  UnitStore st = sum_store();
  BiProgram bp = link_biprogram(st, "RelSum");
  RelInterp ri(bp);

  ConcreteState sl, sr;
  sl.globals["s"] = Value::integer(0);
  sl.globals["pool"] = Value::region(Region{});
  sr = sl;
  Ref a1 = ri.left().allocate(sl, "Node");
  Ref a2 = ri.left().allocate(sl, "Node");
  Ref b1 = ri.right().allocate(sr, "Node");
  Ref b2 = ri.right().allocate(sr, "Node");
  sl.heap["val"][a1] = Value::integer(1);
  sl.heap["val"][a2] = Value::integer(2);
  sr.heap["val"][b1] = Value::integer(1);
  sr.heap["val"][b2] = Value::integer(2);
  Region gl, gr;
  gl.insert(a1);
  gl.insert(a2);
  gr.insert(b1);
  gr.insert(b2);
  sl.globals["pool"] = Value::region(gl);
  sr.globals["pool"] = Value::region(gr);

  RefPerm straight;
  straight.add(a1, b1);
  straight.add(a2, b2);
  RefPerm crossed;
  crossed.add(a1, b2);
  crossed.add(a2, b1);

  Env el{{"x", Value::integer(5)}, {"q", Value::ref(a1)}};
  Env er{{"x", Value::integer(5)}, {"q", Value::ref(b1)}};

  RelFormulaP ag_x = mk_ragree(mk_var("x"), mk_var("x"));
  CHECK(ri.eval_relformula(ag_x, sl, sr, straight, el, er));
  er["x"] = Value::integer(7);
  CHECK(!ri.eval_relformula(ag_x, sl, sr, straight, el, er));
  er["x"] = Value::integer(5);

  RelFormulaP ag_q = mk_ragree(mk_var("q"), mk_var("q"));
  CHECK(ri.eval_relformula(ag_q, sl, sr, straight, el, er));
  CHECK(!ri.eval_relformula(ag_q, sl, sr, crossed, el, er));
  CHECK(!ri.eval_relformula(ag_q, sl, sr, RefPerm{}, el, er));

  RelFormulaP ag_pool = mk_ragree(mk_var("pool"), mk_var("pool"));
  CHECK(ri.eval_relformula(ag_pool, sl, sr, straight, el, er));

  // One-sided and both-sided embeddings.
  FormulaP q_live = mk_fexpr(mk_bin(BinOp::Ne, mk_var("q"), mk_null()));
  CHECK(ri.eval_relformula(mk_rleft(q_live), sl, sr, straight, el, er));
  CHECK(ri.eval_relformula(mk_rboth(q_live), sl, sr, straight, el, er));
  CHECK(ri.eval_relformula(mk_rnot(mk_rleft(mk_fnot(q_live))), sl, sr, straight, el, er));

  // Paired quantification follows the permutation: node values agree when the
  // pairing is parallel and clash when it crosses.
  RelFormulaP allv = mk_rallpair(
      "o", "Node", mk_var("pool"), mk_var("pool"),
      mk_ragree(mk_field(mk_var("o"), "val"), mk_field(mk_var("o"), "val")));
  CHECK(ri.eval_relformula(allv, sl, sr, straight, el, er));
  CHECK(!ri.eval_relformula(allv, sl, sr, crossed, el, er));
  CHECK(ri.eval_relformula(allv, sl, sr, RefPerm{}, el, er));  // nothing related

  // Math existentials search values drawn from the two states.
  RelFormulaP ex_int = mk_rexmath(
      "k", Type::intt(),
      mk_rand(mk_ragree(mk_var("k"), mk_var("k")),
              mk_rand(mk_rleft(mk_fexpr(mk_bin(BinOp::Eq, mk_var("k"), mk_var("x")))),
                      mk_rright(mk_fexpr(mk_bin(BinOp::Eq, mk_var("k"), mk_var("x")))))));
  CHECK(ri.eval_relformula(ex_int, sl, sr, straight, el, er));
  er["x"] = Value::integer(7);
  CHECK(!ri.eval_relformula(ex_int, sl, sr, straight, el, er));
}

TEST_CASE("list existentials find witnesses among state values and suffixes") {
  UnitStore st = sum_store();
  BiProgram bp = link_biprogram(st, "RelSum");
  RelInterp ri(bp);
  ConcreteState sl, sr;
  sl.globals["s"] = Value::integer(0);
  sl.globals["pool"] = Value::region(Region{});
  sr = sl;

  IntList l123{{mpz_class(1), mpz_class(2), mpz_class(3)}};
  IntList l23{{mpz_class(2), mpz_class(3)}};
  Env el{{"g", Value::list(l123)}};
  Env er{{"h", Value::list(l23)}};

  // The witness is the right-hand list, which is also a suffix of the left one.
  RelFormulaP ex = mk_rexmath(
      "v", Type::list(),
      mk_rand(mk_ragree(mk_var("v"), mk_var("v")),
              mk_rand(mk_rleft(mk_fexpr(mk_bin(BinOp::Eq, mk_var("v"), mk_tl(mk_var("g"))))),
                      mk_rright(mk_fexpr(mk_bin(BinOp::Eq, mk_var("v"), mk_var("h")))))));
  CHECK(ri.eval_relformula(ex, sl, sr, RefPerm{}, el, er));

  er["h"] = Value::list(IntList{{mpz_class(9)}});
  RelFormulaP ex2 = mk_rexmath(
      "v", Type::list(),
      mk_rand(mk_ragree(mk_var("v"), mk_var("v")),
              mk_rand(mk_rleft(mk_fexpr(mk_bin(BinOp::Eq, mk_var("v"), mk_var("g")))),
                      mk_rright(mk_fexpr(mk_bin(BinOp::Eq, mk_var("v"), mk_var("h")))))));
  CHECK(!ri.eval_relformula(ex2, sl, sr, RefPerm{}, el, er));
}

// ---------------------------------------------------------------------------
// Product execution

TEST_CASE("the mult product runs both implementations in lockstep") {
  UnitStore st = mult_store();
  BiProgram bp = link_biprogram(st, "RelMult");
  RelInterp ri(bp);

  for (auto [n, m] : {std::pair<long, long>{2, 3}, {0, 5}, {4, 0}, {3, 3}}) {
    ConcreteState sl, sr;
    RefPerm pi;
    Trace tl, tr;
    long fuel = kDefaultFuel;
    auto [vl, vr] = ri.call_bimethod("mult", {Value::integer(n), Value::integer(m)},
                                     {Value::integer(n), Value::integer(m)}, sl, sr, pi, tl,
                                     tr, fuel);
    CHECK(vl.as_int() == n * m);
    CHECK(vr.as_int() == n * m);
  }

  // Different iteration counts break the lockstep loop.
  ConcreteState sl, sr;
  RefPerm pi;
  Trace tl, tr;
  long fuel = kDefaultFuel;
  try {
    ri.call_bimethod("mult", {Value::integer(2), Value::integer(3)},
                     {Value::integer(3), Value::integer(3)}, sl, sr, pi, tl, tr, fuel);
    FAIL("expected an alignment fault");
  } catch (const Fault& f) {
    CHECK(f.kind == "alignment");
  }
}

TEST_CASE("synced conditionals fault when the guards disagree") {
  UnitStore st = mult_store();
  BiProgram bp = link_biprogram(st, "RelMult");
  RelInterp ri(bp);
  ProdNodeP p = build_product(
      mk_bsync(mk_if(mk_bin(BinOp::Gt, mk_var("x"), mk_int("0")), mk_assign("y", mk_int("1")),
                     mk_assign("y", mk_int("2")))),
      nullptr);
  ConcreteState sl, sr;
  RefPerm pi;
  Env el{{"x", Value::integer(1)}, {"y", Value::integer(0)}};
  Env er{{"x", Value::integer(-1)}, {"y", Value::integer(0)}};
  Trace tl, tr;
  long fuel = 1000;
  try {
    ri.eval_product(p, sl, sr, pi, el, er, tl, tr, fuel);
    FAIL("expected the guard agreement assertion to fail");
  } catch (const Fault& f) {
    CHECK(f.kind == "assert");
  }

  // With agreeing guards the same product runs through.
  er["x"] = Value::integer(4);
  fuel = 1000;
  ri.eval_product(p, sl, sr, pi, el, er, tl, tr, fuel);
  CHECK(el.at("y").as_int() == 1);
  CHECK(er.at("y").as_int() == 1);
}

TEST_CASE("paired allocation keeps fresh references in correspondence") {
  UnitStore st = sum_store();
  BiProgram bp = link_biprogram(st, "RelSum");
  RelInterp ri(bp);
  ProdNodeP p = build_product(
      mk_bseq({mk_bsync(mk_alloc("a", "Node")),
               mk_bassert(mk_ragree(mk_var("a"), mk_var("a")))}),
      nullptr);
  ConcreteState sl, sr;
  sl.globals["s"] = Value::integer(0);
  sl.globals["pool"] = Value::region(Region{});
  sr = sl;
  // Skew the allocators so the fresh names differ; the permutation pairs them.
  ri.right().allocate(sr, "Node");
  RefPerm pi;
  Env el{{"a", Value::ref(NULL_REF)}}, er{{"a", Value::ref(NULL_REF)}};
  Trace tl, tr;
  long fuel = 1000;
  ri.eval_product(p, sl, sr, pi, el, er, tl, tr, fuel);
  CHECK(el.at("a").as_ref() != er.at("a").as_ref());
  CHECK(pi.agree_ref(el.at("a").as_ref(), er.at("a").as_ref()));
}

TEST_CASE("the sumpub product skips private nodes one side at a time") {
  UnitStore st = sum_store();
  BiProgram bp = link_biprogram(st, "RelSum");
  RelInterp ri(bp);

  auto mk_list = [&](const Interp& in, ConcreteState& s,
                     const std::vector<std::pair<long, bool>>& items) {
    Ref head = NULL_REF;
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      Ref r = in.allocate(s, "Node");
      s.heap["val"][r] = Value::integer(it->first);
      s.heap["pub"][r] = Value::boolean(it->second);
      s.heap["nxt"][r] = Value::ref(head);
      head = r;
    }
    return head;
  };

  ConcreteState sl, sr;
  sl.globals["s"] = Value::integer(0);
  sl.globals["pool"] = Value::region(Region{});
  sr = sl;
  // Same public content 1, 2; different private padding.
  Ref pl = mk_list(ri.left(), sl, {{1, true}, {9, false}, {2, true}});
  Ref pr = mk_list(ri.right(), sr, {{1, true}, {4, false}, {5, false}, {2, true}});
  REQUIRE(sl.wf(ri.left().program()));
  REQUIRE(sr.wf(ri.right().program()));

  RefPerm pi;
  Trace tl, tr;
  long fuel = kDefaultFuel;
  ri.call_bimethod("sumpub", {Value::ref(pl)}, {Value::ref(pr)}, sl, sr, pi, tl, tr, fuel);
  CHECK(sl.globals.at("s").as_int() == 3);
  CHECK(sr.globals.at("s").as_int() == 3);
  CHECK(ri.eval_relformula(mk_ragree(mk_var("s"), mk_var("s")), sl, sr, pi));

  // With different public content the sums differ, which the postcondition
  // notices even though the product still runs to completion.
  ConcreteState sl2, sr2;
  sl2.globals["s"] = Value::integer(0);
  sl2.globals["pool"] = Value::region(Region{});
  sr2 = sl2;
  Ref pl2 = mk_list(ri.left(), sl2, {{1, true}});
  Ref pr2 = mk_list(ri.right(), sr2, {{7, true}});
  RefPerm pi2;
  Trace tl2, tr2;
  fuel = kDefaultFuel;
  try {
    ri.call_bimethod("sumpub", {Value::ref(pl2)}, {Value::ref(pr2)}, sl2, sr2, pi2, tl2, tr2,
                     fuel);
    // The aligned conditional still agrees (both heads are public), so the run
    // completes; the final sums simply differ.
    CHECK(sl2.globals.at("s").as_int() == 1);
    CHECK(sr2.globals.at("s").as_int() == 7);
    CHECK(!ri.eval_relformula(mk_ragree(mk_var("s"), mk_var("s")), sl2, sr2, pi2));
  } catch (const Fault&) {
    FAIL("public-only difference should not break alignment");
  }

  // A list ending in extra public nodes on one side strands the loop.
  ConcreteState sl3, sr3;
  sl3.globals["s"] = Value::integer(0);
  sl3.globals["pool"] = Value::region(Region{});
  sr3 = sl3;
  Ref pl3 = mk_list(ri.left(), sl3, {{1, true}, {2, true}});
  Ref pr3 = mk_list(ri.right(), sr3, {{1, true}});
  RefPerm pi3;
  Trace tl3, tr3;
  fuel = kDefaultFuel;
  try {
    ri.call_bimethod("sumpub", {Value::ref(pl3)}, {Value::ref(pr3)}, sl3, sr3, pi3, tl3, tr3,
                     fuel);
    FAIL("expected an alignment fault");
  } catch (const Fault& f) {
    CHECK(f.kind == "alignment");
  }
}

// ---------------------------------------------------------------------------
// Product runs match their projections

TEST_CASE("random products agree with unary runs of the projections") {
  UnitStore st = mult_store();
  BiProgram bp = link_biprogram(st, "RelMult");
  RelInterp ri(bp);
  rvtest::ProgGen g(917);

  int completed = 0;
  for (int iter = 0; iter < 200; ++iter) {
    g.in_loop = false;
    g.safe = true;
    BiprogP bi = g.bi(2 + g.pick(3));
    ProdNodeP prod;
    try {
      prod = build_product(bi, &bp);
    } catch (const SrcError&) {
      continue;  // no relational spec for a generated call; not interesting here
    }

    Env init{{"x", Value::integer(g.pick(5))},
             {"y", Value::integer(g.pick(5))},
             {"z", Value::integer(0)}};
    ConcreteState sl, sr;
    RefPerm pi;
    Env el = init, er = init;
    Trace tl, tr;
    long fuel = 10000;
    try {
      ri.eval_product(prod, sl, sr, pi, el, er, tl, tr, fuel);
    } catch (const OutOfFuel&) {
      continue;
    } catch (const Fault& f) {
      FAIL((std::string("product faulted on a safe biprogram: ") + f.what()));
    }
    ++completed;

    ConcreteState ul, ur;
    Env uel = init, uer = init;
    Trace utl, utr;
    long fl = 10000, fr = 10000;
    ri.left().exec(project(bi, true), ul, uel, utl, fl);
    ri.right().exec(project(bi, false), ur, uer, utr, fr);
    CHECK(uel == el);
    CHECK(uer == er);
    CHECK(ul.globals == sl.globals);
    CHECK(ur.globals == sr.globals);
  }
  CHECK(completed >= 150);
}
