#include "frontend/parser.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "frontend/diag.hpp"
#include "frontend/lexer.hpp"

namespace rv {

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Unit> units() {
    std::vector<Unit> out;
    while (!at(Tok::Eof)) out.push_back(unit());
    return out;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  UnitKind cur_kind_ = UnitKind::Interface;

  const Token& peek(size_t off = 0) const {
    size_t i = pos_ + off;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return peek().k == k; }
  Span sp() const { return peek().sp; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool opt(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  Token eat(Tok k, const char* ctx) {
    if (!at(k))
      throw SrcError(sp(), std::string("expected ") + tok_name(k) + " " + ctx + ", found " +
                               tok_name(peek().k) +
                               (peek().text.empty() ? "" : " '" + peek().text + "'"));
    return next();
  }
  std::string ident(const char* ctx) { return eat(Tok::Ident, ctx).text; }

  [[noreturn]] void fail(const std::string& msg) { throw SrcError(sp(), msg); }

  // ---- types ----

  Type type() {
    Span s = sp();
    switch (peek().k) {
      case Tok::KwInt: next(); return Type::intt();
      case Tok::KwBool: next(); return Type::boolt();
      case Tok::KwUnit: next(); return Type::unit();
      case Tok::KwRgn: next(); return Type::rgn();
      case Tok::KwIntlist: next(); return Type::list();
      case Tok::Ident: return Type::cl(next().text);
      default: throw SrcError(s, "expected a type");
    }
  }

  // ---- expressions ----

  ExprP expr() { return expr_or(); }

  ExprP expr_or() {
    ExprP e = expr_and();
    while (at(Tok::KwOr)) {
      Span s = sp();
      next();
      e = mk_bin(BinOp::Or, e, expr_and(), s);
    }
    return e;
  }
  ExprP expr_and() {
    ExprP e = expr_cmp();
    while (at(Tok::KwAnd)) {
      Span s = sp();
      next();
      e = mk_bin(BinOp::And, e, expr_cmp(), s);
    }
    return e;
  }
  ExprP expr_cmp() {
    ExprP e = expr_add();
    Span s = sp();
    switch (peek().k) {
      case Tok::Eq: next(); return mk_bin(BinOp::Eq, e, expr_add(), s);
      case Tok::Ne: next(); return mk_bin(BinOp::Ne, e, expr_add(), s);
      case Tok::Lt: next(); return mk_bin(BinOp::Lt, e, expr_add(), s);
      case Tok::Le: next(); return mk_bin(BinOp::Le, e, expr_add(), s);
      case Tok::Gt: next(); return mk_bin(BinOp::Gt, e, expr_add(), s);
      case Tok::Ge: next(); return mk_bin(BinOp::Ge, e, expr_add(), s);
      default: return e;
    }
  }
  ExprP expr_add() {
    ExprP e = expr_mul();
    for (;;) {
      Span s = sp();
      if (opt(Tok::Plus)) e = mk_bin(BinOp::Add, e, expr_mul(), s);
      else if (opt(Tok::Minus)) e = mk_bin(BinOp::Sub, e, expr_mul(), s);
      else if (opt(Tok::Union)) e = mk_bin(BinOp::Union, e, expr_mul(), s);
      else if (opt(Tok::Diff)) e = mk_bin(BinOp::Diff, e, expr_mul(), s);
      else return e;
    }
  }
  ExprP expr_mul() {
    ExprP e = expr_unary();
    for (;;) {
      Span s = sp();
      if (opt(Tok::Star)) e = mk_bin(BinOp::Mul, e, expr_unary(), s);
      else if (opt(Tok::Inter)) e = mk_bin(BinOp::Inter, e, expr_unary(), s);
      else return e;
    }
  }
  ExprP expr_unary() {
    Span s = sp();
    if (opt(Tok::Minus)) return mk_neg(expr_unary(), s);
    if (opt(Tok::KwNot)) return mk_note(expr_unary(), s);
    return expr_postfix();
  }
  ExprP expr_postfix() {
    ExprP e = expr_primary();
    for (;;) {
      Span s = sp();
      if (opt(Tok::Dot)) {
        e = mk_field(e, ident("after '.'"), s);
      } else if (opt(Tok::Tick)) {
        std::string f = at(Tok::KwAny) ? (next(), std::string("any")) : ident("after '`'");
        e = mk_rgnimg(e, f, s);
      } else {
        return e;
      }
    }
  }
  ExprP expr_primary() {
    Span s = sp();
    switch (peek().k) {
      case Tok::Int: return mk_int(next().text, s);
      case Tok::KwTrue: next(); return mk_bool(true, s);
      case Tok::KwFalse: next(); return mk_bool(false, s);
      case Tok::KwNull: next(); return mk_null(s);
      case Tok::KwNil: next(); return mk_nil(s);
      case Tok::Ident: return mk_var(next().text, s);
      case Tok::KwOld: {
        next();
        eat(Tok::LParen, "after 'old'");
        ExprP e = expr();
        eat(Tok::RParen, "closing 'old'");
        return mk_old(e, s);
      }
      case Tok::KwCons: {
        next();
        eat(Tok::LParen, "after 'cons'");
        ExprP h = expr();
        eat(Tok::Comma, "between 'cons' arguments");
        ExprP t = expr();
        eat(Tok::RParen, "closing 'cons'");
        return mk_cons(h, t, s);
      }
      case Tok::KwHd: return un_app(&mk_hd, "hd");
      case Tok::KwTl: return un_app(&mk_tl, "tl");
      case Tok::KwLength: return un_app(&mk_len, "length");
      case Tok::LParen: {
        next();
        ExprP e = expr();
        eat(Tok::RParen, "closing '('");
        return e;
      }
      case Tok::LBrace: {
        next();
        std::vector<ExprP> elems;
        if (!at(Tok::RBrace)) {
          elems.push_back(expr());
          while (opt(Tok::Comma)) elems.push_back(expr());
        }
        eat(Tok::RBrace, "closing region literal");
        return mk_rgnlit(std::move(elems), s);
      }
      default: fail("expected an expression");
    }
  }
  ExprP un_app(ExprP (*mk)(ExprP, Span), const char* name) {
    Span s = sp();
    next();
    eat(Tok::LParen, (std::string("after '") + name + "'").c_str());
    ExprP e = expr();
    eat(Tok::RParen, (std::string("closing '") + name + "'").c_str());
    return mk(e, s);
  }

  // ---- formulas ----

  FormulaP formula() { return formula_imp(); }

  FormulaP formula_imp() {
    FormulaP f = formula_or();
    if (at(Tok::Imp)) {
      Span s = sp();
      next();
      return mk_fimp(f, formula_imp(), s);
    }
    return f;
  }
  FormulaP formula_or() {
    FormulaP f = formula_and();
    while (at(Tok::OrF)) {
      Span s = sp();
      next();
      f = mk_for(f, formula_and(), s);
    }
    return f;
  }
  FormulaP formula_and() {
    FormulaP f = formula_unary();
    while (at(Tok::AndF)) {
      Span s = sp();
      next();
      f = mk_fand(f, formula_unary(), s);
    }
    return f;
  }
  FormulaP formula_unary() {
    Span s = sp();
    if (opt(Tok::KwNot)) return mk_fnot(formula_unary(), s);
    if (at(Tok::KwForall) || at(Tok::KwExists)) return formula_quant();
    return formula_atom();
  }
  FormulaP formula_quant() {
    Span s = sp();
    bool uni = at(Tok::KwForall);
    next();
    std::string v = ident("after quantifier");
    eat(Tok::Colon, "after quantified variable");
    Type t = type();
    if (t.k != Ty::Cls) throw SrcError(s, "quantification ranges over a class");
    eat(Tok::KwIin, "before quantifier range");
    ExprP rgn = expr();
    eat(Tok::Comma, "before quantifier body");
    FormulaP body = formula_imp();
    return uni ? mk_fall(v, t.cls, rgn, body, s) : mk_fexi(v, t.cls, rgn, body, s);
  }
  FormulaP formula_atom() {
    Span s = sp();
    // Predicate application: only place an identifier is followed by '('.
    if (at(Tok::Ident) && peek(1).k == Tok::LParen) {
      std::string name = next().text;
      next();
      std::vector<ExprP> args;
      if (!at(Tok::RParen)) {
        args.push_back(expr());
        while (opt(Tok::Comma)) args.push_back(expr());
      }
      eat(Tok::RParen, "closing predicate application");
      return mk_fpred(name, std::move(args), s);
    }
    // Expression-first with backtracking: a '(' may open either a
    // parenthesized expression or a parenthesized formula.
    size_t save = pos_;
    try {
      return relation();
    } catch (const SrcError&) {
      pos_ = save;
    }
    eat(Tok::LParen, "in formula");
    FormulaP f = formula_imp();
    eat(Tok::RParen, "closing formula");
    return f;
  }
  FormulaP relation() {
    Span s = sp();
    ExprP e = expr();
    if (opt(Tok::KwIin)) return mk_fin(e, expr(), s);
    if (opt(Tok::Subset)) return mk_fsubset(e, expr(), s);
    return mk_fexpr(e, s);
  }

  // ---- relational formulas ----

  RelFormulaP relformula() { return rel_imp(); }

  RelFormulaP rel_imp() {
    RelFormulaP f = rel_or();
    if (at(Tok::Imp)) {
      Span s = sp();
      next();
      return mk_rimp(f, rel_imp(), s);
    }
    return f;
  }
  RelFormulaP rel_or() {
    RelFormulaP f = rel_and();
    while (at(Tok::OrF)) {
      Span s = sp();
      next();
      f = mk_ror(f, rel_and(), s);
    }
    return f;
  }
  RelFormulaP rel_and() {
    RelFormulaP f = rel_unary();
    while (at(Tok::AndF)) {
      Span s = sp();
      next();
      f = mk_rand(f, rel_unary(), s);
    }
    return f;
  }
  RelFormulaP rel_unary() {
    Span s = sp();
    if (opt(Tok::KwNot)) return mk_rnot(rel_unary(), s);
    switch (peek().k) {
      case Tok::LeftOpen: {
        next();
        FormulaP f = formula();
        eat(Tok::LeftClose, "closing left embedding");
        return mk_rleft(f, s);
      }
      case Tok::RightOpen: {
        next();
        FormulaP f = formula();
        eat(Tok::RightClose, "closing right embedding");
        return mk_rright(f, s);
      }
      case Tok::KwBoth: {
        next();
        eat(Tok::LParen, "after 'Both'");
        FormulaP f = formula();
        eat(Tok::RParen, "closing 'Both'");
        return mk_rboth(f, s);
      }
      case Tok::KwForall: return rel_forall();
      case Tok::KwExists: return rel_exists();
      default: break;
    }
    // Agreement e =:= e', else a parenthesized relational formula.
    size_t save = pos_;
    try {
      ExprP l = expr();
      eat(Tok::AgreeEq, "in agreement formula");
      ExprP r = expr();
      return mk_ragree(l, r, s);
    } catch (const SrcError&) {
      pos_ = save;
    }
    eat(Tok::LParen, "in relational formula");
    RelFormulaP f = rel_imp();
    eat(Tok::RParen, "closing relational formula");
    return f;
  }
  RelFormulaP rel_forall() {
    Span s = sp();
    next();
    std::string v = ident("after 'forall'");
    eat(Tok::Colon, "after quantified variable");
    Type t = type();
    if (t.k != Ty::Cls) throw SrcError(s, "relational quantification ranges over a class");
    eat(Tok::KwIin, "before left range");
    ExprP gl = expr();
    eat(Tok::Bar, "between quantifier ranges");
    std::string v2 = ident("right-hand binder");
    if (v2 != v) throw SrcError(s, "both binders of a paired quantifier use the same name");
    eat(Tok::Colon, "after quantified variable");
    Type t2 = type();
    if (!(t2 == t)) throw SrcError(s, "paired quantifier binders have one class");
    eat(Tok::KwIin, "before right range");
    ExprP gr = expr();
    eat(Tok::Comma, "before quantifier body");
    return mk_rallpair(v, t.cls, gl, gr, rel_imp(), s);
  }
  RelFormulaP rel_exists() {
    Span s = sp();
    next();
    std::string v = ident("after 'exists'");
    eat(Tok::Colon, "after quantified variable");
    Type t = type();
    if (t.k == Ty::Cls || t.k == Ty::Unit)
      throw SrcError(s, "paired existentials bind mathematical values (int, bool, rgn, intlist)");
    eat(Tok::Bar, "between existential binders");
    std::string v2 = ident("right-hand binder");
    if (v2 != v) throw SrcError(s, "both binders of a paired existential use the same name");
    eat(Tok::Colon, "after quantified variable");
    Type t2 = type();
    if (!(t2 == t)) throw SrcError(s, "paired existential binders have one type");
    eat(Tok::Comma, "before existential body");
    return mk_rexmath(v, t, rel_imp(), s);
  }

  // ---- commands ----

  bool cmd_terminator() const {
    switch (peek().k) {
      case Tok::KwEnd:
      case Tok::KwDone:
      case Tok::KwElse:
      case Tok::Bar:
      case Tok::RParen:
      case Tok::SyncClose:
      case Tok::Eof: return true;
      default: return false;
    }
  }

  CommandP command_seq() {
    Span s = sp();
    std::vector<CommandP> cs;
    if (!cmd_terminator()) {
      cs.push_back(statement(&cs));
      while (opt(Tok::Semi)) {
        if (cmd_terminator()) break;  // tolerate a trailing separator
        cs.push_back(statement(&cs));
      }
    }
    if (cs.empty()) return mk_skip(s);
    if (cs.size() == 1) return cs[0];
    return mk_seq(std::move(cs), s);
  }

  // `seq_so_far` lets `var x: T;` scope over the remainder of the sequence.
  CommandP statement(std::vector<CommandP>* seq_so_far) {
    Span s = sp();
    switch (peek().k) {
      case Tok::KwSkip: next(); return mk_skip(s);
      case Tok::KwIf: {
        next();
        ExprP g = expr();
        eat(Tok::KwThen, "in conditional");
        CommandP t = command_seq();
        CommandP e = nullptr;
        if (opt(Tok::KwElse)) e = command_seq();
        eat(Tok::KwEnd, "closing conditional");
        return mk_if(g, t, e, s);
      }
      case Tok::KwWhile: {
        next();
        ExprP g = expr();
        eat(Tok::KwDo, "in loop");
        std::vector<FormulaP> invs;
        while (opt(Tok::KwInvariant)) {
          eat(Tok::LBrace, "after 'invariant'");
          invs.push_back(formula());
          eat(Tok::RBrace, "closing invariant");
        }
        CommandP body = command_seq();
        eat(Tok::KwDone, "closing loop");
        return mk_while(g, std::move(invs), body, s);
      }
      case Tok::KwVar: {
        next();
        std::string x = ident("after 'var'");
        eat(Tok::Colon, "after variable name");
        Type t = type();
        if (opt(Tok::KwIn)) {
          CommandP body = command_seq();
          eat(Tok::KwEnd, "closing var block");
          return mk_varblock(x, t, body, s);
        }
        eat(Tok::Semi, "after var declaration");
        (void)seq_so_far;
        CommandP rest = command_seq();
        return mk_varblock(x, t, rest, s);
      }
      case Tok::Ident: {
        std::string x = next().text;
        if (opt(Tok::Dot)) {
          std::string f = ident("field name");
          eat(Tok::Assign, "in field update");
          return mk_fieldwr(x, f, expr(), s);
        }
        if (opt(Tok::LParen)) return call_stmt("", x, s);
        eat(Tok::Assign, "in assignment");
        if (opt(Tok::KwNew)) {
          std::string cls = ident("class name after 'new'");
          return mk_alloc(x, cls, s);
        }
        if (at(Tok::Ident) && peek(1).k == Tok::LParen) {
          std::string m = next().text;
          next();
          return call_stmt(x, m, s);
        }
        return mk_assign(x, expr(), s);
      }
      default: fail("expected a statement");
    }
  }

  CommandP call_stmt(const std::string& lhs, const std::string& m, Span s) {
    std::vector<ExprP> args;
    if (!at(Tok::RParen)) {
      args.push_back(expr());
      while (opt(Tok::Comma)) args.push_back(expr());
    }
    eat(Tok::RParen, "closing call");
    return mk_call(lhs, m, std::move(args), s);
  }

  // ---- biprograms ----

  bool bi_terminator() const {
    switch (peek().k) {
      case Tok::KwEnd:
      case Tok::KwDone:
      case Tok::KwElse:
      case Tok::Eof: return true;
      default: return false;
    }
  }

  BiprogP biprog_seq() {
    Span s = sp();
    std::vector<BiprogP> bs;
    if (!bi_terminator()) {
      bs.push_back(bistmt());
      while (opt(Tok::Semi)) {
        if (bi_terminator()) break;
        bs.push_back(bistmt());
      }
    }
    if (bs.empty()) return mk_bsync(mk_skip(s), s);
    if (bs.size() == 1) return bs[0];
    return mk_bseq(std::move(bs), s);
  }

  BiprogP bistmt() {
    Span s = sp();
    switch (peek().k) {
      case Tok::SyncOpen: {
        next();
        // A call inside |_ _| may split its arguments; anything else is a
        // synchronized command.
        if (at(Tok::Ident) &&
            (peek(1).k == Tok::LParen ||
             (peek(1).k == Tok::Assign && peek(2).k == Tok::Ident &&
              peek(3).k == Tok::LParen))) {
          std::string lhs, m;
          if (peek(1).k == Tok::Assign) {
            lhs = next().text;
            next();
            m = next().text;
          } else {
            m = next().text;
          }
          next();  // '('
          std::vector<ExprP> actsL, actsR;
          if (!at(Tok::RParen)) {
            bi_actual(actsL, actsR);
            while (opt(Tok::Comma)) bi_actual(actsL, actsR);
          }
          eat(Tok::RParen, "closing call");
          eat(Tok::SyncClose, "closing synchronized call");
          return mk_bcall(lhs, m, std::move(actsL), std::move(actsR), s);
        }
        CommandP c = command_seq();
        eat(Tok::SyncClose, "closing synchronized block");
        return mk_bsync(c, s);
      }
      case Tok::LParen: {
        next();
        CommandP l = command_seq();
        eat(Tok::Bar, "between split halves");
        CommandP r = command_seq();
        eat(Tok::RParen, "closing split");
        return mk_bsplit(l, r, s);
      }
      case Tok::KwAssert: {
        next();
        eat(Tok::LBrace, "after 'assert'");
        RelFormulaP f = relformula();
        eat(Tok::RBrace, "closing assert");
        return mk_bassert(f, s);
      }
      case Tok::KwVar: {
        next();
        std::string x = ident("after 'var'");
        eat(Tok::Colon, "after variable name");
        Type tl = type();
        Type tr = tl;
        if (opt(Tok::Bar)) {
          std::string x2 = ident("right-hand binder");
          if (x2 != x) throw SrcError(s, "both sides of a paired var use the same name");
          eat(Tok::Colon, "after variable name");
          tr = type();
        }
        if (opt(Tok::KwIn)) {
          BiprogP body = biprog_seq();
          eat(Tok::KwEnd, "closing var block");
          return mk_bvar(x, tl, tr, body, s);
        }
        eat(Tok::Semi, "after var declaration");
        BiprogP rest = biprog_seq();
        return mk_bvar(x, tl, tr, rest, s);
      }
      case Tok::KwIf: {
        next();
        eat(Tok::LParen, "after 'if'");
        ExprP gl = expr();
        eat(Tok::Bar, "between guards");
        ExprP gr = expr();
        eat(Tok::RParen, "closing guard pair");
        eat(Tok::KwThen, "in conditional");
        BiprogP t = biprog_seq();
        BiprogP e = nullptr;
        if (opt(Tok::KwElse)) e = biprog_seq();
        eat(Tok::KwEnd, "closing conditional");
        return mk_bif(gl, gr, t, e, s);
      }
      case Tok::KwWhile: {
        next();
        eat(Tok::LParen, "after 'while'");
        ExprP gl = expr();
        eat(Tok::Bar, "between guards");
        ExprP gr = expr();
        eat(Tok::RParen, "closing guard pair");
        RelFormulaP alignL, alignR;
        if (opt(Tok::Dot)) {
          Span ls = sp();
          eat(Tok::LeftOpen, "left alignment guard");
          FormulaP lf = formula();
          eat(Tok::LeftClose, "closing left alignment guard");
          alignL = mk_rleft(lf, ls);
          eat(Tok::Bar, "between alignment guards");
          Span rs = sp();
          eat(Tok::RightOpen, "right alignment guard");
          FormulaP rf = formula();
          eat(Tok::RightClose, "closing right alignment guard");
          alignR = mk_rright(rf, rs);
        }
        eat(Tok::KwDo, "in loop");
        std::vector<RelFormulaP> invs;
        while (opt(Tok::KwInvariant)) {
          eat(Tok::LBrace, "after 'invariant'");
          invs.push_back(relformula());
          eat(Tok::RBrace, "closing invariant");
        }
        BiprogP body = biprog_seq();
        eat(Tok::KwDone, "closing loop");
        return mk_bwhile(gl, gr, alignL, alignR, std::move(invs), body, s);
      }
      default: fail("expected a biprogram statement");
    }
  }

  void bi_actual(std::vector<ExprP>& actsL, std::vector<ExprP>& actsR) {
    ExprP l = expr();
    if (opt(Tok::Bar)) {
      actsL.push_back(l);
      actsR.push_back(expr());
    } else {
      actsL.push_back(l);
      actsR.push_back(l);
    }
  }

  // ---- declarations ----

  std::vector<Param> params() {
    std::vector<Param> ps;
    eat(Tok::LParen, "opening parameter list");
    if (!at(Tok::RParen)) {
      do {
        std::string n = ident("parameter name");
        eat(Tok::Colon, "after parameter name");
        ps.push_back({n, type()});
      } while (opt(Tok::Comma));
    }
    eat(Tok::RParen, "closing parameter list");
    return ps;
  }

  EffAtom loc_atom(int mode) {
    Span s = sp();
    if (opt(Tok::KwAlloc)) return {mode, LocKind::Alloc, "", nullptr, "", s};
    ExprP e = expr();
    if (e->k == Ex::Var) return {mode, LocKind::Var, e->str, nullptr, "", s};
    if (e->k == Ex::RgnImg) return {mode, LocKind::Image, "", e->args[0], e->str, s};
    throw SrcError(s, "effect location must be a variable, region image, or 'alloc'");
  }

  Effects effects_clause() {
    Effects eff;
    eat(Tok::LBrace, "after 'effects'");
    if (!at(Tok::RBrace)) {
      do {
        int mode;
        if (opt(Tok::KwRd)) mode = 1;
        else if (opt(Tok::KwWr)) mode = 2;
        else if (opt(Tok::KwRw)) mode = 3;
        else fail("expected 'rd', 'wr', or 'rw'");
        eff.atoms.push_back(loc_atom(mode));
      } while (opt(Tok::Comma));
    }
    eat(Tok::RBrace, "closing effects");
    return eff;
  }

  void method_decl(Unit& u) {
    Span s = sp();
    eat(Tok::KwMeth, "method declaration");
    std::string name = ident("method name");
    if (cur_kind_ == UnitKind::Bimodule) {
      BiMethodDecl m;
      m.name = name;
      m.sp = s;
      m.paramsL = m.paramsR = params();
      eat(Tok::Colon, "before return type");
      m.retL = m.retR = type();
      for (;;) {
        if (opt(Tok::KwRequires)) {
          eat(Tok::LBrace, "after 'requires'");
          m.req.push_back(relformula());
          eat(Tok::RBrace, "closing requires");
        } else if (opt(Tok::KwEnsures)) {
          eat(Tok::LBrace, "after 'ensures'");
          m.ens.push_back(relformula());
          eat(Tok::RBrace, "closing ensures");
        } else {
          break;
        }
      }
      if (opt(Tok::Eq)) {
        m.body = biprog_seq();
        eat(Tok::KwEnd, "closing method body");
      }
      u.bimethods.push_back(std::move(m));
      return;
    }
    MethodDecl m;
    m.name = name;
    m.sp = s;
    m.params = params();
    eat(Tok::Colon, "before return type");
    m.ret = type();
    for (;;) {
      if (opt(Tok::KwRequires)) {
        eat(Tok::LBrace, "after 'requires'");
        m.req.push_back(formula());
        eat(Tok::RBrace, "closing requires");
      } else if (opt(Tok::KwEnsures)) {
        eat(Tok::LBrace, "after 'ensures'");
        m.ens.push_back(formula());
        eat(Tok::RBrace, "closing ensures");
      } else if (opt(Tok::KwEffects)) {
        Effects e = effects_clause();
        for (auto& a : e.atoms) m.eff.atoms.push_back(a);
        m.eff_given = true;
      } else {
        break;
      }
    }
    if (opt(Tok::Eq)) {
      m.body = command_seq();
      eat(Tok::KwEnd, "closing method body");
    }
    u.methods.push_back(std::move(m));
  }

  void class_decl(Unit& u) {
    Span s = sp();
    eat(Tok::KwClass, "class declaration");
    ClassDecl cd;
    cd.name = ident("class name");
    cd.sp = s;
    eat(Tok::LBrace, "opening class body");
    while (!at(Tok::RBrace)) {
      FieldDecl fd;
      fd.sp = sp();
      fd.ghost = opt(Tok::KwGhost);
      fd.name = ident("field name");
      eat(Tok::Colon, "after field name");
      fd.ty = type();
      cd.fields.push_back(std::move(fd));
      if (!opt(Tok::Semi)) break;
    }
    eat(Tok::RBrace, "closing class body");
    u.classes.push_back(std::move(cd));
  }

  Unit unit() {
    Unit u;
    u.sp = sp();
    switch (peek().k) {
      case Tok::KwInterface: {
        next();
        u.kind = UnitKind::Interface;
        u.name = ident("interface name");
        break;
      }
      case Tok::KwModule: {
        next();
        u.kind = UnitKind::Module;
        u.name = ident("module name");
        eat(Tok::Colon, "before implemented interface");
        u.iface = ident("interface name");
        break;
      }
      case Tok::KwBimodule: {
        next();
        u.kind = UnitKind::Bimodule;
        u.name = ident("bimodule name");
        eat(Tok::LParen, "after bimodule name");
        u.left = ident("left module");
        eat(Tok::Bar, "between bimodule operands");
        u.right = ident("right module");
        eat(Tok::RParen, "closing bimodule operands");
        break;
      }
      default: fail("expected 'interface', 'module', or 'bimodule'");
    }
    cur_kind_ = u.kind;
    eat(Tok::Eq, "before unit body");
    while (!at(Tok::KwEnd)) {
      switch (peek().k) {
        case Tok::KwImport: {
          next();
          u.imports.push_back(ident("import target"));
          break;
        }
        case Tok::KwClass: class_decl(u); break;
        case Tok::KwGhost: {
          next();
          GlobalDecl g;
          g.sp = sp();
          g.ghost = true;
          g.name = ident("global name");
          eat(Tok::Colon, "after global name");
          g.ty = type();
          u.globals.push_back(std::move(g));
          break;
        }
        case Tok::KwGlobal: {
          next();
          GlobalDecl g;
          g.sp = sp();
          g.name = ident("global name");
          eat(Tok::Colon, "after global name");
          g.ty = type();
          u.globals.push_back(std::move(g));
          break;
        }
        case Tok::KwBoundary: {
          next();
          u.has_boundary = true;
          eat(Tok::LBrace, "after 'boundary'");
          if (!at(Tok::RBrace)) {
            do {
              EffAtom a = loc_atom(1);
              u.boundary.push_back({a.k, a.var, a.region, a.field, a.sp});
            } while (opt(Tok::Comma));
          }
          eat(Tok::RBrace, "closing boundary");
          break;
        }
        case Tok::KwPublic:
        case Tok::KwPrivate: {
          bool priv = at(Tok::KwPrivate);
          next();
          eat(Tok::KwInvariant, "after visibility");
          NamedInv inv;
          inv.sp = sp();
          inv.is_private = priv;
          inv.name = ident("invariant name");
          eat(Tok::Eq, "after invariant name");
          inv.f = formula();
          u.invariants.push_back(std::move(inv));
          break;
        }
        case Tok::KwCoupling: {
          next();
          CouplingDecl c;
          c.sp = sp();
          c.name = ident("coupling name");
          eat(Tok::Eq, "after coupling name");
          c.f = relformula();
          u.couplings.push_back(std::move(c));
          break;
        }
        case Tok::KwPredicate: {
          next();
          PredicateDecl p;
          p.sp = sp();
          p.name = ident("predicate name");
          p.params = params();
          eat(Tok::Eq, "after predicate header");
          p.body = formula();
          u.preds.push_back(std::move(p));
          break;
        }
        case Tok::KwMeth: method_decl(u); break;
        default: fail("expected a declaration");
      }
    }
    eat(Tok::KwEnd, "closing unit");
    return u;
  }
};

}  // namespace

std::vector<Unit> parse_units(const std::string& src, const std::string& filename) {
  Parser p(lex(src, filename));
  auto us = p.units();
  for (auto& u : us) u.file = filename;
  return us;
}

std::vector<Unit> parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SrcError(Span{path, 0, 0}, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_units(ss.str(), path);
}

}  // namespace rv
