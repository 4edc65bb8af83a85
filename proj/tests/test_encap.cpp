#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "encap/encap.hpp"
#include "frontend/linker.hpp"
#include "frontend/parser.hpp"
#include "interp/interp.hpp"
#include "typecheck/typecheck.hpp"

using namespace rv;

// A pool of cells behind a dynamic boundary, plus a client module exercising
// every way of touching (or respecting) that boundary. The client methods are
// deliberately tiny so each one isolates a single access pattern.
static const char* kPoolSrc = R"(
interface PoolI =
  class Cell { val: int; owned: bool; ghost rep: rgn }
  ghost pool: rgn
  global capacity: int
  boundary { pool, capacity, pool`val, pool`rep }
  meth mk(): Cell
    requires { true }
    ensures { result iin pool }
    effects { rd pool, wr pool, rd capacity, wr capacity, rw alloc }
  meth get(c: Cell): int
    requires { c iin pool }
    ensures { true }
    effects { rd c, rd pool, rd pool`val }
end

module Pool : PoolI =
  private invariant poolOk = forall o: Cell iin pool, o.val >= 0
  meth mk(): Cell =
    result := new Cell;
    pool := pool ++ {result};
    capacity := capacity + 1
  end
  meth get(c: Cell): int =
    result := c.val
  end
end

interface ClientI =
  import PoolI
  global g: int
  ghost r: rgn
  meth work(c: Cell): int
    requires { true }
    ensures { true }
    effects { rd c, rw alloc, rd pool, wr g }
end
)";

static const char* kClientSrc = R"(
module BadClient : ClientI =
  import Pool
  meth work(c: Cell): int =
    var d: Cell in
      d := mk();
      result := get(d)
    end
  end
  meth smash(): unit
    effects { wr pool }
  = pool := {}
  end
  meth bump(): unit
    effects { rd capacity, wr capacity }
  = capacity := capacity + 1
  end
  meth snoop(): unit
    effects { rd capacity, wr g }
  = g := capacity
  end
  meth poke(c: Cell): unit
    effects { rd c, wr pool`val }
  = c.val := 5
  end
  meth mark(c: Cell): unit
    effects { rd c, wr pool`owned }
  = c.owned := true
  end
  meth peek(c: Cell): unit
    effects { rd c, rd pool`val, wr g }
  = g := c.val
  end
  meth grab(c: Cell): unit
    effects { rd c, rd pool`rep, wr r }
  = r := {c}`rep
  end
  meth combo(c: Cell): int
    requires { c.val >= 0 }
    ensures { c.rep << pool }
    effects { rd c, rd capacity, wr capacity, rd pool`val, rd pool`rep }
  = capacity := c.val;
    result := 0
  end
  meth quantspec(): int
    ensures { forall o: Cell iin pool, o.val >= 0 }
    effects { rd pool, rd pool`val }
  = result := 0
  end
end
)";

static UnitStore pool_store() {
  UnitStore st;
  st.add(parse_units(std::string(kPoolSrc) + kClientSrc, "pool.wrl"));
  return st;
}

static const Unit* unit_named(const Program& p, const std::string& n) {
  for (const Unit* u : p.units)
    if (u->name == n) return u;
  return nullptr;
}

TEST_CASE("boundary expansion and fencing") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");
  typecheck_program(p);

  auto bs = boundaries_of(p);
  REQUIRE(bs.size() == 1);
  CHECK(bs[0].first->name == "PoolI");
  CHECK(bs[0].second.size() == 4);  // pool, capacity, pool`val, pool`rep
}

TEST_CASE("direct writes and reads of boundary variables are static violations") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");

  auto smash = check_client_accesses(p, "smash");
  REQUIRE(smash.size() == 1);
  CHECK(smash[0].kind == ObKind::StaticViolation);
  CHECK(smash[0].label == "encap:smash:0");
  CHECK(smash[0].iface == "PoolI");
  CHECK(smash[0].message.find("writes boundary variable 'pool'") != std::string::npos);

  // capacity := capacity + 1 both writes and reads the boundary variable
  auto bump = check_client_accesses(p, "bump");
  REQUIRE(bump.size() == 2);
  CHECK(bump[0].label == "encap:bump:0");
  CHECK(bump[0].message.find("writes") != std::string::npos);
  CHECK(bump[1].label == "encap:bump:1");
  CHECK(bump[1].message.find("reads") != std::string::npos);

  auto snoop = check_client_accesses(p, "snoop");
  REQUIRE(snoop.size() == 1);
  CHECK(snoop[0].kind == ObKind::StaticViolation);
  CHECK(snoop[0].message.find("reads boundary variable 'capacity'") != std::string::npos);
}

TEST_CASE("heap accesses over boundary fields become disjointness assertions") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");

  auto poke = check_client_accesses(p, "poke");
  REQUIRE(poke.size() == 1);
  CHECK(poke[0].kind == ObKind::Disjointness);
  CHECK(poke[0].label == "encap:poke:0");
  CHECK(poke[0].cmd != nullptr);
  CHECK(poke[0].cmd->k == Ck::FieldWr);
  CHECK(print_formula(poke[0].formula) == "(not (c iin pool))");

  auto peek = check_client_accesses(p, "peek");
  REQUIRE(peek.size() == 1);
  CHECK(peek[0].kind == ObKind::Disjointness);
  CHECK(peek[0].message.find("read") != std::string::npos);
  CHECK(print_formula(peek[0].formula) == "(not (c iin pool))");

  // region-image reads assert region-level disjointness instead
  auto grab = check_client_accesses(p, "grab");
  REQUIRE(grab.size() == 1);
  CHECK(print_formula(grab[0].formula) == "(({c} ^^ pool) << {null})");

  // fields outside the boundary stay silent
  CHECK(check_client_accesses(p, "mark").empty());
  // touching the pool through its own methods is the sanctioned path
  CHECK(check_client_accesses(p, "work").empty());
}

TEST_CASE("module methods are exempt from their own boundary") {
  UnitStore st = pool_store();
  Program p = link_program(st, "Pool");
  typecheck_program(p);
  CHECK(check_client_accesses(p, "mk").empty());
  CHECK(check_client_accesses(p, "get").empty());
}

TEST_CASE("spec reads generate pre-state obligations, quantified receivers are skipped") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");

  // requires { c.val >= 0 }   -> obligation 0 (pre-state, no command)
  // capacity := c.val         -> static write 1, heap read 2
  // ensures { c.rep << pool } -> obligation 3 (c.rep is a covered point access)
  auto combo = check_client_accesses(p, "combo");
  REQUIRE(combo.size() == 4);
  CHECK(combo[0].kind == ObKind::Disjointness);
  CHECK(combo[0].cmd == nullptr);
  CHECK(print_formula(combo[0].formula) == "(not (c iin pool))");
  CHECK(combo[1].kind == ObKind::StaticViolation);
  CHECK(combo[2].kind == ObKind::Disjointness);
  CHECK(combo[2].cmd != nullptr);
  CHECK(combo[3].kind == ObKind::Disjointness);
  CHECK(combo[3].cmd == nullptr);

  // filtering keeps the combined numbering
  auto writes = check_static_writes(p, "combo");
  REQUIRE(writes.size() == 1);
  CHECK(writes[0].label == "encap:combo:1");
  auto disj = gen_disjointness_obligations(p, "combo");
  REQUIRE(disj.size() == 3);
  CHECK(disj[0].label == "encap:combo:0");
  CHECK(disj[1].label == "encap:combo:2");
  CHECK(disj[2].label == "encap:combo:3");

  // o.val under forall o ranges over bound references; mentioning pool as the
  // quantifier range is ordinary spec text
  CHECK(check_client_accesses(p, "quantspec").empty());
}

TEST_CASE("monotonicity posts cover exactly the region-valued boundary atoms") {
  UnitStore st = pool_store();
  Program p = link_program(st, "Pool");

  auto mono = gen_monotonicity_post(p, "mk");
  REQUIRE(mono.size() == 2);
  CHECK(mono[0].label == "encap:mono-mk:0");
  CHECK(print_formula(mono[0].formula) == "(old(pool) << pool)");
  CHECK(mono[1].label == "encap:mono-mk:1");
  CHECK(print_formula(mono[1].formula) == "(old(pool`rep) << pool`rep)");

  CHECK(gen_monotonicity_post(p, "get").size() == 2);

  // client methods implement ClientI, which has no boundary
  Program pc = link_program(st, "BadClient");
  CHECK(gen_monotonicity_post(pc, "work").empty());
  CHECK(gen_monotonicity_post(pc, "poke").empty());
}

TEST_CASE("frames lemmas for private invariants carry the expanded boundary") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");

  auto frames = gen_frames_lemma(p);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].kind == ObKind::FramesLemma);
  CHECK(frames[0].label == "encap:frames-poolOk:0");
  CHECK(frames[0].method == "poolOk");
  CHECK(frames[0].iface == "PoolI");
  CHECK(frames[0].bnd.size() == 4);
  CHECK(print_formula(frames[0].formula) ==
        "(forall o: Cell iin pool, (o.val >= 0))");
}

TEST_CASE("coupling frames lemmas carry both boundaries") {
  UnitStore st = pool_store();
  st.add(parse_units(R"(
bimodule PoolRel (Pool | Pool) =
  coupling poolCpl = Both(true)
end
)",
                     "poolrel.wrl"));
  BiProgram bp = link_biprogram(st, "PoolRel");
  auto frames = gen_frames_lemma_couplings(bp);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].label == "encap:frames-poolCpl:0");
  CHECK(frames[0].rel != nullptr);
  CHECK(frames[0].bnd.size() == 4);
  CHECK(frames[0].bnd_right.size() == 4);
  CHECK(frames[0].iface == "PoolI");
}

TEST_CASE("report aggregates every method of the closure") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");

  EncapReport rep = analyze_encapsulation(p);
  // smash 1, bump 2, snoop 1, combo 1
  CHECK(rep.static_violations.size() == 5);
  // poke 1, peek 1, grab 1, combo 3
  CHECK(rep.disjointness.size() == 6);
  CHECK(rep.frames.size() == 1);
  // mk and get each get pool and pool`rep posts
  CHECK(rep.monotonicity.size() == 4);
  CHECK(!rep.ok());
  CHECK(rep.total() == 16);

  Program pp = link_program(st, "Pool");
  EncapReport good = analyze_encapsulation(pp);
  CHECK(good.ok());
  CHECK(good.static_violations.empty());
  CHECK(good.disjointness.empty());
}

// ---------------------------------------------------------------------------
// Runtime cross-checks: the interpreter can police the same discipline by
// faulting on writes into the boundary. A statically clean client never
// trips the runtime guard, and each disjointness assertion evaluates to the
// exact runtime condition.

namespace {

struct RtSetup {
  ConcreteState s;
  Ref in_pool = 0, outside = 0;

  explicit RtSetup(const Interp& it) {
    in_pool = it.allocate(s, "Cell");
    outside = it.allocate(s, "Cell");
    s.globals["pool"] = Value::region(Region::singleton(in_pool));
    s.globals["capacity"] = Value::integer(0);
    s.globals["g"] = Value::integer(0);
    s.globals["r"] = Value::region(Region());
  }
};

}  // namespace

TEST_CASE("disjointness assertion matches the runtime guard exactly") {
  UnitStore st = pool_store();
  Program p = link_program(st, "BadClient");
  const Unit* pi = unit_named(p, "PoolI");
  REQUIRE(pi != nullptr);
  auto bnd = expand_boundary(p, pi->boundary);

  Interp it(p);
  it.guard_boundary = &bnd;

  auto poke = gen_disjointness_obligations(p, "poke");
  REQUIRE(poke.size() == 1);
  const CommandP& body = p.methods.at("poke").body->body;

  // receiver inside the pool: assertion is false and the guard faults
  {
    RtSetup rt(it);
    Env env{{"c", Value::ref(rt.in_pool)}};
    CHECK(!it.holds(poke[0].formula, rt.s, env));
    Trace tr;
    long fuel = 1000;
    CHECK_THROWS_AS(it.exec(body, rt.s, env, tr, fuel), Fault);
  }
  // receiver outside: assertion is true and the write goes through
  {
    RtSetup rt(it);
    Env env{{"c", Value::ref(rt.outside)}};
    CHECK(it.holds(poke[0].formula, rt.s, env));
    Trace tr;
    long fuel = 1000;
    it.exec(body, rt.s, env, tr, fuel);
    CHECK(it.eval(mk_field(mk_var("c"), "val"), rt.s, env).as_int() == 5);
  }
}

TEST_CASE("random clients: static findings predict runtime boundary faults") {
  std::mt19937 rng(424242);
  auto pick = [&](int n) { return (int)(rng() % (unsigned)n); };

  // statement pool; each entry records which finding it must provoke
  auto atom = [&]() -> std::string {
    switch (pick(8)) {
      case 0: return "g := g + 1";
      case 1: return "pool := pool ++ {c}";
      case 2: return "capacity := 3";
      case 3: return "c.val := g";
      case 4: return "c.owned := true";
      case 5: return "g := capacity";
      case 6: return "skip";
      default: return "c.rep := r";
    }
  };
  int nloc = 0;
  std::function<std::string(int)> stmt = [&](int depth) -> std::string {
    if (depth > 0 && pick(4) == 0)
      return "if g < 2 then " + stmt(depth - 1) + " else " + stmt(depth - 1) + " end";
    if (depth > 0 && pick(4) == 0) {
      std::string t = "t" + std::to_string(nloc++);
      return "var " + t + ": int in " + t + " := 1; " + stmt(depth - 1) + " end";
    }
    return atom();
  };

  int ran = 0, faulted = 0, clean = 0;
  for (int iter = 0; iter < 300; iter++) {
    nloc = 0;
    std::string body = stmt(2);
    int extra = pick(3);
    for (int i = 0; i < extra; i++) body += ";\n    " + stmt(2);
    std::string src = std::string(kPoolSrc) +
                      "module FuzzC : ClientI =\n"
                      "  meth work(c: Cell): int = result := 0 end\n"
                      "  meth fuzz(c: Cell): unit =\n    " +
                      body + "\n  end\nend\n";
    UnitStore st;
    st.add(parse_units(src, "fuzz.wrl"));
    Program p = link_program(st, "FuzzC");
    typecheck_program(p);

    auto obs = check_client_accesses(p, "fuzz");
    bool var_write_flagged = false, heap_write_flagged = false;
    for (const auto& ob : obs) {
      if (ob.kind == ObKind::StaticViolation &&
          ob.message.find("writes") != std::string::npos)
        var_write_flagged = true;
      if (ob.kind == ObKind::Disjointness && ob.cmd && ob.cmd->k == Ck::FieldWr)
        heap_write_flagged = true;
    }

    const Unit* pi = unit_named(p, "PoolI");
    auto bnd = expand_boundary(p, pi->boundary);
    Interp it(p);
    it.guard_boundary = &bnd;
    RtSetup rt(it);
    Env env{{"c", Value::ref(pick(2) ? rt.in_pool : rt.outside)}};
    Trace tr;
    long fuel = 100000;
    ran++;
    bool this_faulted = false;
    try {
      it.exec(p.methods.at("fuzz").body->body, rt.s, env, tr, fuel);
      clean++;
    } catch (const Fault& f) {
      REQUIRE(f.kind == "disjoint");  // nothing else can fault in this grammar
      faulted++;
      this_faulted = true;
      bool var_fault = std::string(f.what()).find("variable") != std::string::npos;
      if (var_fault)
        CHECK(var_write_flagged);
      else
        CHECK(heap_write_flagged);
    }
    // a client with no findings at all can never trip the guard
    if (obs.empty()) CHECK(!this_faulted);
  }
  // the grammar must actually exercise both outcomes
  CHECK(ran == 300);
  CHECK(faulted >= 50);
  CHECK(clean >= 50);
}
