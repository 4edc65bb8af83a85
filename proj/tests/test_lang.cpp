#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "lang/ast.hpp"
#include "lang/value.hpp"

using namespace rv;

// The stack module's public invariant body, built by hand:
//   forall s: Stack iin pool.
//     0 <= s.size /\ s.size <= capacity /\
//     (forall t: Stack iin pool. not (s = t) -> s.rep ^^ t.rep << {null})
static FormulaP stack_pub_body() {
  auto pool = [] { return mk_var("pool"); };
  auto s = [] { return mk_var("s"); };
  auto t = [] { return mk_var("t"); };
  FormulaP lo = mk_fexpr(mk_bin(BinOp::Le, mk_int("0"), mk_field(s(), "size")));
  FormulaP hi = mk_fexpr(mk_bin(BinOp::Le, mk_field(s(), "size"), mk_var("capacity")));
  FormulaP neq = mk_fnot(mk_fexpr(mk_bin(BinOp::Eq, s(), t())));
  FormulaP disj = mk_fsubset(mk_bin(BinOp::Inter, mk_field(s(), "rep"), mk_field(t(), "rep")),
                             mk_rgnlit({mk_null()}));
  FormulaP inner = mk_fall("t", "Stack", pool(), mk_fimp(neq, disj));
  FormulaP body = mk_fand(lo, mk_fand(hi, inner));
  return mk_fall("s", "Stack", pool(), body);
}

TEST_CASE("free locations of the stack public invariant") {
  auto locs = free_location_strings(stack_pub_body());
  // Frozen: reads of the two globals plus the size and rep images over pool.
  std::vector<std::string> want = {"capacity", "pool", "pool`rep", "pool`size"};
  CHECK(locs == want);
}

TEST_CASE("free locations see through old and nested quantifier ranges") {
  // g is a region variable: forall n: Node iin g`rep. old(n.nxt) = n.nxt
  FormulaP f = mk_fall("n", "Node", mk_rgnimg(mk_var("g"), "rep"),
                       mk_fexpr(mk_bin(BinOp::Eq, mk_old(mk_field(mk_var("n"), "nxt")),
                                       mk_field(mk_var("n"), "nxt"))));
  auto locs = free_location_strings(f);
  std::vector<std::string> want = {"g", "g`rep", "g`rep`nxt"};
  CHECK(locs == want);

  // s is a reference variable: s.rep`nxt reads s, the rep field of s, and
  // the nxt fields of everything in the region s.rep denotes.
  FormulaP f2 = mk_fsubset(mk_rgnimg(mk_field(mk_var("s"), "rep"), "nxt"),
                           mk_rgnlit({mk_null()}));
  auto locs2 = free_location_strings(f2);
  std::vector<std::string> want2 = {"s", "s.rep`nxt", "{s}`rep"};
  CHECK(locs2 == want2);
}

TEST_CASE("free locations of a plain variable field read") {
  // x.val = 3 reads x and {x}`val
  FormulaP f = mk_fexpr(mk_bin(BinOp::Eq, mk_field(mk_var("x"), "val"), mk_int("3")));
  auto locs = free_location_strings(f);
  std::vector<std::string> want = {"x", "{x}`val"};
  CHECK(locs == want);
}

TEST_CASE("desugar_both splits Both into left and right conjuncts") {
  FormulaP p = mk_fpred("listpub", {mk_var("l"), mk_var("xs")});
  RelFormulaP rf = mk_rand(mk_rboth(p), mk_ragree(mk_var("xs"), mk_var("xs")));
  RelFormulaP d = desugar_both(rf);
  CHECK(print_relformula(d) ==
        "((<| listpub(l, xs) <] /\\ [> listpub(l, xs) |>) /\\ (xs =:= xs))");
  // Idempotent once Both is gone.
  CHECK(relformula_eq(desugar_both(d), d));
}

TEST_CASE("formula printing round trip spot checks") {
  CHECK(print_formula(stack_pub_body()) ==
        "(forall s: Stack iin pool, ((0 <= s.size) /\\ ((s.size <= capacity) /\\ "
        "(forall t: Stack iin pool, ((not (s = t)) -> ((s.rep ^^ t.rep) << {null}))))))");
  ExprP e = mk_bin(BinOp::Union, mk_var("pool"), mk_rgnimg(mk_var("pool"), "rep"));
  CHECK(print_expr(e) == "(pool ++ pool`rep)");
}

TEST_CASE("normalize flattens sequences and drops skips and annotations") {
  CommandP inner = mk_seq({mk_skip(), mk_assign("x", mk_int("1")), mk_skip()});
  CommandP w = mk_while(mk_bool(true), {mk_ftrue()}, inner);
  CommandP prog = mk_seq({mk_skip(), mk_seq({w, mk_skip()})});
  CommandP n = normalize_command(prog);
  REQUIRE(n->k == Ck::While);
  CHECK(n->invs.empty());
  REQUIRE(n->c1->k == Ck::Assign);
  CHECK(n->c1->x == "x");

  // Equality modulo annotations matches what normalize erases.
  CommandP w2 = mk_while(mk_bool(true), {}, mk_assign("x", mk_int("1")));
  CHECK(command_eq(n, w2, false));
  CHECK(command_eq(w, mk_while(mk_bool(true), {}, inner), true));
  CHECK(!command_eq(w, mk_while(mk_bool(true), {}, inner), false));
}

TEST_CASE("normalize canonicalizes empty else branches") {
  CommandP a = mk_if(mk_var("b"), mk_assign("x", mk_int("1")), mk_skip());
  CommandP b = mk_if(mk_var("b"), mk_assign("x", mk_int("1")), nullptr);
  CHECK(command_eq(normalize_command(a), normalize_command(b), false));
}

TEST_CASE("region algebra agrees with a reference set implementation") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int round = 0; round < 200; round++) {
    std::set<Ref> sa, sb;
    for (int i = 0; i < 6; i++) {
      sa.insert(static_cast<Ref>(pick(rng)));
      sb.insert(static_cast<Ref>(pick(rng)));
    }
    Region a{sa}, b{sb};

    std::set<Ref> u, n, d;
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(u, u.begin()));
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::inserter(n, n.begin()));
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::inserter(d, d.begin()));
    CHECK(a.unite(b).elems() == u);
    CHECK(a.intersect(b).elems() == n);
    CHECK(a.diff(b).elems() == d);
    CHECK(a.subset_of(b) == std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()));
    CHECK(a.disjoint_with(b) == n.empty());

    bool dmn = true;
    for (Ref r : n)
      if (r != NULL_REF) dmn = false;
    CHECK(a.disjoint_mod_null(b) == dmn);
  }
}

TEST_CASE("region algebra identities") {
  Region a{{1, 2, 3}}, b{{3, 4}};
  CHECK(a.unite(b) == b.unite(a));
  CHECK(a.intersect(a) == a);
  CHECK(a.diff(a).empty());
  CHECK(a.diff(b).unite(a.intersect(b)) == a);
  CHECK(Region{}.subset_of(a));
  CHECK(Region{{NULL_REF}}.disjoint_mod_null(Region{{NULL_REF, 7}}));
  CHECK(!Region{{7}}.disjoint_mod_null(Region{{NULL_REF, 7}}));
}

TEST_CASE("refperm is a bijection on non-null refs") {
  RefPerm pi;
  CHECK(pi.add(1, 10));
  CHECK(pi.add(2, 20));
  CHECK(pi.add(1, 10));      // re-adding the same pair is fine
  CHECK(!pi.add(1, 11));     // left already mapped elsewhere
  CHECK(!pi.add(3, 10));     // right already taken
  CHECK(!pi.add(0, 5));      // null never participates
  CHECK(!pi.add(5, 0));
  CHECK(pi.is_bijection());
  CHECK(pi.size() == 2);
  CHECK(*pi.fwd(1) == 10);
  CHECK(*pi.bwd(20) == 2);
  CHECK(!pi.fwd(3).has_value());
  CHECK_THROWS_AS(pi.extend(1, 99), std::logic_error);
}

TEST_CASE("refperm agreement on refs and regions") {
  RefPerm pi;
  pi.extend(1, 10);
  pi.extend(2, 20);
  CHECK(pi.agree_ref(NULL_REF, NULL_REF));
  CHECK(!pi.agree_ref(1, NULL_REF));
  CHECK(!pi.agree_ref(NULL_REF, 10));
  CHECK(pi.agree_ref(1, 10));
  CHECK(!pi.agree_ref(1, 20));
  CHECK(!pi.agree_ref(3, 30));  // unmapped refs never agree

  Region l{{1, 2}}, r{{10, 20}};
  CHECK(pi.agree_region(l, r));
  CHECK(pi.agree_region(Region{{NULL_REF, 1}}, Region{{NULL_REF, 10}}));
  CHECK(!pi.agree_region(Region{{NULL_REF, 1}}, Region{{10}}));     // null mismatch
  CHECK(!pi.agree_region(Region{{1, 2}}, Region{{10}}));            // 2's image 20 missing
  CHECK(!pi.agree_region(Region{{1}}, Region{{10, 20}}));           // 20's partner missing
  CHECK(!pi.agree_region(Region{{3}}, Region{{30}}));               // 30 not in the range
  // The image ignores left elements the permutation does not map.
  CHECK(pi.agree_region(Region{{1, 3}}, Region{{10}}));
  CHECK(pi.agree_region(Region{}, Region{}));
}

TEST_CASE("values compare by kind and payload") {
  CHECK(Value::integer(mpz_class("123456789012345678901234567890")) ==
        Value::integer(mpz_class("123456789012345678901234567890")));
  CHECK(Value::integer(1) != Value::boolean(true));
  CHECK(Value::ref(NULL_REF).str() == "null");
  IntList xs{{1, 2, 3}};
  CHECK(Value::list(xs) == Value::list(IntList{{1, 2, 3}}));
  CHECK(Value::list(xs).str() == "[1, 2, 3]");
  CHECK(Value::unit() == Value());
}

TEST_CASE("effects and boundary atoms print in source syntax") {
  Effects eff;
  eff.atoms.push_back({2, LocKind::Var, "result", nullptr, "", {}});
  eff.atoms.push_back({1, LocKind::Image, "", mk_var("pool"), "any", {}});
  eff.atoms.push_back({2, LocKind::Alloc, "", nullptr, "", {}});
  CHECK(print_effects(eff) == "wr result, rd pool`any, wr alloc");

  BndAtom b{LocKind::Image, "", mk_rgnimg(mk_var("pool"), "rep"), "any", {}};
  CHECK(print_batom(b) == "pool`rep`any");
}
