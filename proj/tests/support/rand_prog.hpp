#pragma once

// Random command and biprogram generators shared by the align/interp suites
// and the acceptance checks. Two flavors: a syntax-only generator exercising
// every biprogram shape, and an execution-safe generator whose programs
// terminate (loops count a dedicated variable upward) and fault at most on
// the null dereferences it deliberately risks.

#include <random>
#include <string>
#include <vector>

#include "lang/ast.hpp"

namespace rvtest {

using namespace rv;

struct ProgGen {
  std::mt19937 rng;
  // When true, loops and writes to the loop counter are suppressed.
  bool in_loop = false;
  // Execution-safe mode keeps guards terminating and dereferences guarded.
  bool safe = false;

  explicit ProgGen(unsigned seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }
  bool chance(int pct) { return pick(100) < pct; }

  ExprP int_expr(int depth) {
    if (depth <= 0 || chance(45)) {
      switch (pick(5)) {
        case 0: return mk_int(std::to_string(pick(4)));
        case 1: return mk_var("x");
        case 2: return mk_var("y");
        case 3: return mk_int(std::to_string(pick(3)));
        default: return mk_var("z");
      }
    }
    BinOp op = pick(2) == 0 ? BinOp::Add : (pick(2) == 0 ? BinOp::Sub : BinOp::Mul);
    return mk_bin(op, int_expr(depth - 1), int_expr(depth - 1));
  }

  ExprP guard() {
    BinOp op;
    switch (pick(4)) {
      case 0: op = BinOp::Lt; break;
      case 1: op = BinOp::Le; break;
      case 2: op = BinOp::Eq; break;
      default: op = BinOp::Gt; break;
    }
    return mk_bin(op, int_expr(1), int_expr(1));
  }

  std::string int_target() {
    switch (pick(in_loop ? 2 : 3)) {
      case 0: return "x";
      case 1: return "y";
      default: return "z";
    }
  }

  CommandP atom() {
    switch (pick(safe ? 4 : 6)) {
      case 0:
      case 1: return mk_assign(int_target(), int_expr(2));
      case 2: return mk_skip();
      case 3: return mk_assign(int_target(), int_expr(1));
      case 4: return mk_alloc("c", "K");
      default:
        // Field access through c; in safe mode the generator only emits this
        // after an allocation in the same sequence.
        return mk_fieldwr("c", "f", int_expr(1));
    }
  }

  CommandP cmd(int depth) {
    if (depth <= 0) return atom();
    switch (pick(6)) {
      case 0: {
        std::vector<CommandP> cs;
        int n = 2 + pick(2);
        bool alloc_seen = false;
        for (int i = 0; i < n; ++i) {
          CommandP c = cmd(depth - 1);
          if (safe && !alloc_seen && c->k == Ck::FieldWr) c = mk_alloc("c", "K");
          if (c->k == Ck::Alloc) alloc_seen = true;
          cs.push_back(c);
        }
        return mk_seq(std::move(cs));
      }
      case 1:
        return mk_if(guard(), cmd(depth - 1), chance(60) ? cmd(depth - 1) : nullptr);
      case 2: {
        if (in_loop || (safe && chance(50))) return atom();
        // Terminating shape: count z up to a small bound.
        bool was = in_loop;
        in_loop = true;
        CommandP body = cmd(depth - 1);
        in_loop = was;
        std::vector<CommandP> b{body, mk_assign("z", mk_bin(BinOp::Add, mk_var("z"), mk_int("1")))};
        return mk_while(mk_bin(BinOp::Lt, mk_var("z"), mk_int(std::to_string(3 + pick(3)))), {},
                        mk_seq(std::move(b)));
      }
      case 3: {
        std::string v = "v" + std::to_string(pick(3));
        return mk_varblock(v, Type::intt(), mk_assign(v, int_expr(1)));
      }
      default: return atom();
    }
  }

  // Sync-heavy biprogram whose sides stay in step when started from equal
  // states: splits carry commands that write the same variables with
  // possibly different values, but guards only read x/y/z after re-syncing.
  BiprogP bi(int depth) {
    if (depth <= 0) return mk_bsync(atom());
    switch (pick(7)) {
      case 0: {
        std::vector<BiprogP> bs;
        int n = 2 + pick(2);
        for (int i = 0; i < n; ++i) bs.push_back(bi(depth - 1));
        return mk_bseq(std::move(bs));
      }
      case 1: return mk_bsync(cmd(depth - 1));
      case 2: {
        // A split followed by a re-sync of the split variable keeps later
        // guards in agreement in safe mode; the re-sync expression must not
        // read the diverged variable itself.
        CommandP l = mk_assign("y", int_expr(2));
        CommandP r = safe ? mk_assign("y", int_expr(2)) : cmd(depth - 1);
        ExprP resync = mk_bin(BinOp::Add, mk_var("x"), mk_int(std::to_string(pick(4))));
        std::vector<BiprogP> bs{mk_bsplit(l, r), mk_bsync(mk_assign("y", resync))};
        return mk_bseq(std::move(bs));
      }
      case 3: {
        ExprP g = guard();
        return mk_bif(g, safe ? g : guard(), bi(depth - 1),
                      chance(50) ? bi(depth - 1) : nullptr);
      }
      case 4: {
        if (in_loop) return mk_bsync(atom());
        bool was = in_loop;
        in_loop = true;
        BiprogP body = bi(depth - 1);
        in_loop = was;
        ExprP g = mk_bin(BinOp::Lt, mk_var("z"), mk_int(std::to_string(3 + pick(3))));
        std::vector<BiprogP> bs{body,
                                mk_bsync(mk_assign("z", mk_bin(BinOp::Add, mk_var("z"),
                                                               mk_int("1"))))};
        return mk_bwhile(g, g, nullptr, nullptr, {}, mk_bseq(std::move(bs)));
      }
      case 5: {
        std::string v = "w" + std::to_string(pick(2));
        return mk_bvar(v, Type::intt(), Type::intt(),
                       mk_bsync(mk_assign(v, int_expr(1))));
      }
      default: return mk_bsync(cmd(depth - 1));
    }
  }

  // Structural mutations used as adequacy negatives. Returns a command that
  // usually differs semantically from the input.
  CommandP mutate(const CommandP& c) {
    switch (c->k) {
      case Ck::Assign:
        return mk_assign(c->x, mk_bin(BinOp::Add, c->e, mk_int("7")), c->sp);
      case Ck::Seq: {
        std::vector<CommandP> cs = c->seq;
        if (cs.size() >= 2) {
          std::swap(cs[0], cs[cs.size() - 1]);
          return mk_seq(std::move(cs), c->sp);
        }
        return mk_seq({c, mk_assign("x", mk_int("9"))}, c->sp);
      }
      case Ck::If:
        return mk_if(mk_note(c->e), c->c1, c->c2, c->sp);
      case Ck::While:
        return mk_while(c->e, c->invs, mutate(c->c1), c->sp);
      case Ck::VarBlock:
        return mk_varblock(c->x, c->vty, mutate(c->c1), c->sp);
      default:
        return mk_seq({c, mk_assign("y", mk_int("8"))}, c->sp);
    }
  }
};

}  // namespace rvtest
