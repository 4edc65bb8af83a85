#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontend/diag.hpp"
#include "frontend/linker.hpp"
#include "frontend/parser.hpp"
#include "typecheck/typecheck.hpp"

using namespace rv;

static Program link_one(UnitStore& store, const char* src, const std::string& target) {
  store.add(parse_units(src, "t.wrl"));
  return link_program(store, target);
}

static void expect_tc_error(const char* src, const std::string& target,
                            const std::string& needle) {
  UnitStore store;
  Program p = link_one(store, src, target);
  try {
    typecheck_program(p);
    FAIL_CHECK("expected a typecheck error containing '", needle, "'");
  } catch (const SrcError& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

static const char* kStackSrc = R"(
interface StackI =
  class Cell { val: int }
  ghost pool: rgn
  ghost gcount: int
  global capacity: int
  boundary { pool, pool`any, pool`rep`any }
  public invariant stkPub =
    forall s: Stack iin pool,
      0 <= s.size /\ s.size <= capacity /\
      (forall t: Stack iin pool, not (s = t) -> s.rep ^^ t.rep << {null})
  meth mkStack(): Stack
    requires { 0 < capacity }
    ensures { result iin pool }
    effects { rw pool`any, rw alloc, rd capacity }
  meth push(self: Stack, v: int): unit
    requires { self iin pool /\ self.size < capacity }
    ensures { self.size = old(self.size) + 1 }
    effects { rw {self}`any, wr self.rep`any, rw alloc }
end

module ArrayStack : StackI =
  class Stack { size: int; ghost rep: rgn }
  private invariant stkPriv = forall s: Stack iin pool, s.rep << pool`rep
  meth mkStack(): Stack =
    result := new Stack;
    result.size := 0;
    pool := pool ++ {result}
  end
  meth push(self: Stack, v: int): unit =
    self.size := self.size + 1
  end
end
)";

TEST_CASE("the stack program typechecks") {
  UnitStore store;
  Program p = link_one(store, kStackSrc, "ArrayStack");
  CHECK_NOTHROW(typecheck_program(p));
}

TEST_CASE("datagroup expansion follows declaration order") {
  UnitStore store;
  Program p = link_one(store, kStackSrc, "ArrayStack");
  auto fields = all_fields(p);
  std::vector<std::string> want = {"val", "size", "rep"};
  CHECK(fields == want);

  auto bnd = expand_boundary(p, p.boundary_of(p.target));
  std::vector<std::string> got;
  for (auto& a : bnd) got.push_back(print_batom(a));
  std::vector<std::string> wantb = {"pool",          "pool`val",      "pool`size",
                                    "pool`rep",      "pool`rep`val",  "pool`rep`size",
                                    "pool`rep`rep"};
  CHECK(got == wantb);

  Effects eff;
  eff.atoms.push_back({3, LocKind::Image, "", mk_var("pool"), "any", {}});
  eff.atoms.push_back({3, LocKind::Alloc, "", nullptr, "", {}});
  eff.atoms.push_back({2, LocKind::Image, "", mk_var("pool"), "size", {}});
  auto ex = expand_effects(p, eff);
  REQUIRE(ex.size() == 5);  // three fields + alloc + the distinct wr mode atom
  CHECK(ex[0].field == "val");
  CHECK(ex[1].field == "size");
  CHECK(ex[2].field == "rep");
  CHECK(ex[3].k == LocKind::Alloc);
  CHECK(ex[4].mode == 2);
}

TEST_CASE("type errors are caught") {
  expect_tc_error(R"(
module M : I = meth f(): unit = x := 1 end end
interface I = end
)", "M", "unknown variable 'x'");

  expect_tc_error(R"(
module M : I = meth f(v: bool): unit = var x: int in x := v end end end
interface I = end
)", "M", "cannot assign bool to int");

  expect_tc_error(R"(
module M : I = meth f(c: C): unit = c.g := 1 end end
interface I = class C { f2: int } end
)", "M", "unknown field 'g'");

  expect_tc_error(R"(
module M : I = meth f(c: C, d: D): unit = c.g := 1 end end
interface I = class C { f2: int } class D { g: int } end
)", "M", "belongs to class D");

  expect_tc_error(R"(
module M : I =
  meth f(): unit requires { old(capacity) = 1 } = skip end
end
interface I = global capacity: int end
)", "M", "old()");

  expect_tc_error(R"(
module M : I = meth f(capacity: int): unit = skip end end
interface I = global capacity: int end
)", "M", "shadows a global");

  expect_tc_error(R"(
module M : I = class C { r: rgn } end
interface I = end
)", "M", "must be ghost");

  expect_tc_error(R"(
module M : I =
  ghost g: rgn
  meth f(): unit = if g = g then skip end end
end
interface I = end
)", "M", "ghost value in an executable guard");

  expect_tc_error(R"(
module M : I =
  class C { ghost r: rgn }
  meth f(c: C): unit = var x: rgn in x := c.r`any end end
end
interface I = end
)", "M", "'any' images denote location sets");

  expect_tc_error(R"(
module M : I =
  public invariant bad = forall q: Q iin {}, true
end
interface I = end
)", "M", "unknown class 'Q'");

  expect_tc_error(R"(
module M : I = meth f(): unit = g(1) end end
interface I = meth g(x: int, y: int): unit end
)", "M", "expects 2 arguments");
}

TEST_CASE("ghost state stays out of executable guards") {
  expect_tc_error(R"(
module M : I =
  ghost flag: int
  meth f(): unit = if flag > 0 then skip end end
end
interface I = end
)", "M", "ghost global 'flag'");

  expect_tc_error(R"(
module M : I =
  class C { ghost mark: int }
  meth f(c: C): unit = while c.mark > 0 do skip done end
end
interface I = end
)", "M", "ghost field 'mark'");

  // Ghost state is still fair game in specs and ghost assignments.
  UnitStore store;
  Program p = link_one(store, R"(
module M : I =
  ghost flag: int
  meth f(): unit ensures { flag = old(flag) } = flag := flag + 1 end
end
interface I = end
)", "M");
  CHECK_NOTHROW(typecheck_program(p));
}

static const char* kRelSrc = R"(
bimodule RelStack (ArrayStack | ArrayStack) =
  coupling stkCoup = Both(true)
  meth push(self: Stack, v: int): unit
    requires { self =:= self /\ v =:= v }
    ensures { Both(true) }
  = |_ push(self, v) _|
  end
end
)";

TEST_CASE("relational layer typechecks") {
  UnitStore store;
  store.add(parse_units(kStackSrc, "s.wrl"));
  store.add(parse_units(kRelSrc, "r.wrl"));
  BiProgram bp = link_biprogram(store, "RelStack");
  CHECK_NOTHROW(typecheck_biprogram(bp));
}

TEST_CASE("relational errors are caught") {
  auto expect_rel_error = [](const std::string& extra, const std::string& needle) {
    UnitStore store;
    store.add(parse_units(kStackSrc, "s.wrl"));
    store.add(parse_units(extra, "r.wrl"));
    BiProgram bp = link_biprogram(store, "RelStack");
    try {
      typecheck_biprogram(bp);
      FAIL_CHECK("expected error containing '", needle, "'");
    } catch (const SrcError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_rel_error(R"(
bimodule RelStack (ArrayStack | ArrayStack) =
  meth push(self: Stack, v: int): unit
    requires { self =:= v }
  = |_ push(self, v) _|
  end
end
)", "agreement relates Stack with int");

  expect_rel_error(R"(
bimodule RelStack (ArrayStack | ArrayStack) =
  meth nosuch(x: int): unit
    requires { Both(true) }
  = |_ skip _|
  end
end
)", "no unary counterpart");

  expect_rel_error(R"(
bimodule RelStack (ArrayStack | ArrayStack) =
  meth push(self: Stack): unit
    requires { Both(true) }
  = |_ skip _|
  end
end
)", "does not match the unary declarations");

  expect_rel_error(R"(
bimodule RelStack (ArrayStack | ArrayStack) =
  meth push(self: Stack, v: int): unit
    requires { Both(true) }
  = ( pool := {} | skip );
    while (gcount > 0 | v > 0) do |_ skip _| done
  end
end
)", "ghost global 'gcount'");
}
