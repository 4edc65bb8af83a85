#include "lang/ast.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace rv {

std::string Span::str() const {
  std::ostringstream os;
  os << (file.empty() ? "<unknown>" : file) << ":" << line << ":" << col;
  return os.str();
}

std::string Type::str() const {
  switch (k) {
    case Ty::Int: return "int";
    case Ty::Bool: return "bool";
    case Ty::Unit: return "unit";
    case Ty::Rgn: return "rgn";
    case Ty::List: return "intlist";
    case Ty::Cls: return cls;
    case Ty::Null: return "null";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Constructors

static std::shared_ptr<Expr> new_expr(Ex k, Span sp) {
  auto e = std::make_shared<Expr>();
  e->k = k;
  e->sp = sp;
  return e;
}

ExprP mk_int(const std::string& digits, Span sp) {
  auto e = new_expr(Ex::IntLit, sp);
  e->str = digits;
  return e;
}
ExprP mk_bool(bool v, Span sp) {
  auto e = new_expr(Ex::BoolLit, sp);
  e->b = v;
  return e;
}
ExprP mk_null(Span sp) { return new_expr(Ex::NullLit, sp); }
ExprP mk_var(const std::string& name, Span sp) {
  auto e = new_expr(Ex::Var, sp);
  e->str = name;
  return e;
}
ExprP mk_field(ExprP obj, const std::string& f, Span sp) {
  auto e = new_expr(Ex::Field, sp);
  e->str = f;
  e->args = {std::move(obj)};
  return e;
}
ExprP mk_neg(ExprP x, Span sp) {
  auto e = new_expr(Ex::Neg, sp);
  e->args = {std::move(x)};
  return e;
}
ExprP mk_note(ExprP x, Span sp) {
  auto e = new_expr(Ex::NotE, sp);
  e->args = {std::move(x)};
  return e;
}
ExprP mk_bin(BinOp op, ExprP a, ExprP b, Span sp) {
  auto e = new_expr(Ex::Bin, sp);
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprP mk_old(ExprP x, Span sp) {
  auto e = new_expr(Ex::Old, sp);
  e->args = {std::move(x)};
  return e;
}
ExprP mk_rgnlit(std::vector<ExprP> elems, Span sp) {
  auto e = new_expr(Ex::RgnLit, sp);
  e->args = std::move(elems);
  return e;
}
ExprP mk_rgnimg(ExprP base, const std::string& f, Span sp) {
  auto e = new_expr(Ex::RgnImg, sp);
  e->str = f;
  e->args = {std::move(base)};
  return e;
}
ExprP mk_nil(Span sp) { return new_expr(Ex::Nil, sp); }
ExprP mk_cons(ExprP h, ExprP t, Span sp) {
  auto e = new_expr(Ex::Cons, sp);
  e->args = {std::move(h), std::move(t)};
  return e;
}
ExprP mk_hd(ExprP l, Span sp) {
  auto e = new_expr(Ex::Hd, sp);
  e->args = {std::move(l)};
  return e;
}
ExprP mk_tl(ExprP l, Span sp) {
  auto e = new_expr(Ex::Tl, sp);
  e->args = {std::move(l)};
  return e;
}
ExprP mk_len(ExprP l, Span sp) {
  auto e = new_expr(Ex::Len, sp);
  e->args = {std::move(l)};
  return e;
}

static std::shared_ptr<Formula> new_formula(Fk k, Span sp) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  f->sp = sp;
  return f;
}

FormulaP mk_fexpr(ExprP e, Span sp) {
  auto f = new_formula(Fk::FExpr, sp);
  f->e1 = std::move(e);
  return f;
}
FormulaP mk_ftrue(Span sp) { return mk_fexpr(mk_bool(true, sp), sp); }
FormulaP mk_fin(ExprP e, ExprP rgn, Span sp) {
  auto f = new_formula(Fk::FIn, sp);
  f->e1 = std::move(e);
  f->e2 = std::move(rgn);
  return f;
}
FormulaP mk_fsubset(ExprP a, ExprP b, Span sp) {
  auto f = new_formula(Fk::FSubset, sp);
  f->e1 = std::move(a);
  f->e2 = std::move(b);
  return f;
}
FormulaP mk_fnot(FormulaP x, Span sp) {
  auto f = new_formula(Fk::FNot, sp);
  f->f1 = std::move(x);
  return f;
}
FormulaP mk_fand(FormulaP a, FormulaP b, Span sp) {
  auto f = new_formula(Fk::FAnd, sp);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormulaP mk_for(FormulaP a, FormulaP b, Span sp) {
  auto f = new_formula(Fk::FOr, sp);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormulaP mk_fimp(FormulaP a, FormulaP b, Span sp) {
  auto f = new_formula(Fk::FImp, sp);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormulaP mk_fall(const std::string& v, const std::string& cls, ExprP rgn, FormulaP body,
                 Span sp) {
  auto f = new_formula(Fk::FAll, sp);
  f->var = v;
  f->cls = cls;
  f->e2 = std::move(rgn);
  f->f1 = std::move(body);
  return f;
}
FormulaP mk_fexi(const std::string& v, const std::string& cls, ExprP rgn, FormulaP body,
                 Span sp) {
  auto f = new_formula(Fk::FExi, sp);
  f->var = v;
  f->cls = cls;
  f->e2 = std::move(rgn);
  f->f1 = std::move(body);
  return f;
}
FormulaP mk_fpred(const std::string& name, std::vector<ExprP> args, Span sp) {
  auto f = new_formula(Fk::FPred, sp);
  f->pred = name;
  f->args = std::move(args);
  return f;
}
FormulaP conj_all(const std::vector<FormulaP>& fs, Span sp) {
  if (fs.empty()) return mk_ftrue(sp);
  FormulaP acc = fs[0];
  for (size_t i = 1; i < fs.size(); i++) acc = mk_fand(acc, fs[i], sp);
  return acc;
}

static std::shared_ptr<RelFormula> new_rel(Rk k, Span sp) {
  auto f = std::make_shared<RelFormula>();
  f->k = k;
  f->sp = sp;
  return f;
}

RelFormulaP mk_ragree(ExprP l, ExprP r, Span sp) {
  auto f = new_rel(Rk::RAgree, sp);
  f->e1 = std::move(l);
  f->e2 = std::move(r);
  return f;
}
RelFormulaP mk_rleft(FormulaP x, Span sp) {
  auto f = new_rel(Rk::RLeft, sp);
  f->uf = std::move(x);
  return f;
}
RelFormulaP mk_rright(FormulaP x, Span sp) {
  auto f = new_rel(Rk::RRight, sp);
  f->uf = std::move(x);
  return f;
}
RelFormulaP mk_rboth(FormulaP x, Span sp) {
  auto f = new_rel(Rk::RBoth, sp);
  f->uf = std::move(x);
  return f;
}
RelFormulaP mk_rnot(RelFormulaP x, Span sp) {
  auto f = new_rel(Rk::RNot, sp);
  f->r1 = std::move(x);
  return f;
}
RelFormulaP mk_rand(RelFormulaP a, RelFormulaP b, Span sp) {
  auto f = new_rel(Rk::RAnd, sp);
  f->r1 = std::move(a);
  f->r2 = std::move(b);
  return f;
}
RelFormulaP mk_ror(RelFormulaP a, RelFormulaP b, Span sp) {
  auto f = new_rel(Rk::ROr, sp);
  f->r1 = std::move(a);
  f->r2 = std::move(b);
  return f;
}
RelFormulaP mk_rimp(RelFormulaP a, RelFormulaP b, Span sp) {
  auto f = new_rel(Rk::RImp, sp);
  f->r1 = std::move(a);
  f->r2 = std::move(b);
  return f;
}
RelFormulaP mk_rallpair(const std::string& v, const std::string& cls, ExprP gl, ExprP gr,
                        RelFormulaP body, Span sp) {
  auto f = new_rel(Rk::RAllPair, sp);
  f->var = v;
  f->cls = cls;
  f->gl = std::move(gl);
  f->gr = std::move(gr);
  f->r1 = std::move(body);
  return f;
}
RelFormulaP mk_rexmath(const std::string& v, Type mty, RelFormulaP body, Span sp) {
  auto f = new_rel(Rk::RExPairMath, sp);
  f->var = v;
  f->mty = mty;
  f->r1 = std::move(body);
  return f;
}
RelFormulaP mk_rtrue(Span sp) { return mk_rboth(mk_ftrue(sp), sp); }
RelFormulaP rconj_all(const std::vector<RelFormulaP>& fs, Span sp) {
  if (fs.empty()) return mk_rtrue(sp);
  RelFormulaP acc = fs[0];
  for (size_t i = 1; i < fs.size(); i++) acc = mk_rand(acc, fs[i], sp);
  return acc;
}

RelFormulaP desugar_both(const RelFormulaP& rf) {
  if (!rf) return rf;
  switch (rf->k) {
    case Rk::RBoth:
      return mk_rand(mk_rleft(rf->uf, rf->sp), mk_rright(rf->uf, rf->sp), rf->sp);
    case Rk::RAgree:
    case Rk::RLeft:
    case Rk::RRight:
      return rf;
    case Rk::RNot: return mk_rnot(desugar_both(rf->r1), rf->sp);
    case Rk::RAnd: return mk_rand(desugar_both(rf->r1), desugar_both(rf->r2), rf->sp);
    case Rk::ROr: return mk_ror(desugar_both(rf->r1), desugar_both(rf->r2), rf->sp);
    case Rk::RImp: return mk_rimp(desugar_both(rf->r1), desugar_both(rf->r2), rf->sp);
    case Rk::RAllPair:
      return mk_rallpair(rf->var, rf->cls, rf->gl, rf->gr, desugar_both(rf->r1), rf->sp);
    case Rk::RExPairMath:
      return mk_rexmath(rf->var, rf->mty, desugar_both(rf->r1), rf->sp);
  }
  return rf;
}

// ---------------------------------------------------------------------------
// Command / biprogram constructors

static std::shared_ptr<Command> new_cmd(Ck k, Span sp) {
  auto c = std::make_shared<Command>();
  c->k = k;
  c->sp = sp;
  return c;
}

CommandP mk_skip(Span sp) { return new_cmd(Ck::Skip, sp); }
CommandP mk_assign(const std::string& x, ExprP e, Span sp) {
  auto c = new_cmd(Ck::Assign, sp);
  c->x = x;
  c->e = std::move(e);
  return c;
}
CommandP mk_fieldwr(const std::string& x, const std::string& f, ExprP e, Span sp) {
  auto c = new_cmd(Ck::FieldWr, sp);
  c->x = x;
  c->field = f;
  c->e = std::move(e);
  return c;
}
CommandP mk_alloc(const std::string& x, const std::string& cls, Span sp) {
  auto c = new_cmd(Ck::Alloc, sp);
  c->x = x;
  c->cls = cls;
  return c;
}
CommandP mk_seq(std::vector<CommandP> cs, Span sp) {
  auto c = new_cmd(Ck::Seq, sp);
  c->seq = std::move(cs);
  return c;
}
CommandP mk_if(ExprP g, CommandP t, CommandP e, Span sp) {
  auto c = new_cmd(Ck::If, sp);
  c->e = std::move(g);
  c->c1 = std::move(t);
  c->c2 = std::move(e);
  return c;
}
CommandP mk_while(ExprP g, std::vector<FormulaP> invs, CommandP body, Span sp) {
  auto c = new_cmd(Ck::While, sp);
  c->e = std::move(g);
  c->invs = std::move(invs);
  c->c1 = std::move(body);
  return c;
}
CommandP mk_call(const std::string& lhs, const std::string& m, std::vector<ExprP> actuals,
                 Span sp) {
  auto c = new_cmd(Ck::Call, sp);
  c->x = lhs;
  c->meth = m;
  c->actuals = std::move(actuals);
  return c;
}
CommandP mk_varblock(const std::string& x, Type t, CommandP body, Span sp) {
  auto c = new_cmd(Ck::VarBlock, sp);
  c->x = x;
  c->vty = t;
  c->c1 = std::move(body);
  return c;
}

static std::shared_ptr<Biprog> new_bi(Bk k, Span sp) {
  auto b = std::make_shared<Biprog>();
  b->k = k;
  b->sp = sp;
  return b;
}

BiprogP mk_bsync(CommandP c, Span sp) {
  auto b = new_bi(Bk::BSync, sp);
  b->cl = std::move(c);
  return b;
}
BiprogP mk_bsplit(CommandP l, CommandP r, Span sp) {
  auto b = new_bi(Bk::BSplit, sp);
  b->cl = std::move(l);
  b->cr = std::move(r);
  return b;
}
BiprogP mk_bseq(std::vector<BiprogP> bs, Span sp) {
  auto b = new_bi(Bk::BSeq, sp);
  b->seq = std::move(bs);
  return b;
}
BiprogP mk_bvar(const std::string& x, Type tl, Type tr, BiprogP body, Span sp) {
  auto b = new_bi(Bk::BVar, sp);
  b->x = x;
  b->tl = tl;
  b->tr = tr;
  b->body = std::move(body);
  return b;
}
BiprogP mk_bif(ExprP gl, ExprP gr, BiprogP t, BiprogP e, Span sp) {
  auto b = new_bi(Bk::BIf, sp);
  b->gl = std::move(gl);
  b->gr = std::move(gr);
  b->b1 = std::move(t);
  b->b2 = std::move(e);
  return b;
}
BiprogP mk_bwhile(ExprP gl, ExprP gr, RelFormulaP alignL, RelFormulaP alignR,
                  std::vector<RelFormulaP> rinvs, BiprogP body, Span sp) {
  auto b = new_bi(Bk::BWhile, sp);
  b->gl = std::move(gl);
  b->gr = std::move(gr);
  b->alignL = std::move(alignL);
  b->alignR = std::move(alignR);
  b->rinvs = std::move(rinvs);
  b->body = std::move(body);
  return b;
}
BiprogP mk_bassert(RelFormulaP rf, Span sp) {
  auto b = new_bi(Bk::BAssert, sp);
  b->rf = std::move(rf);
  return b;
}
BiprogP mk_bcall(const std::string& lhs, const std::string& m, std::vector<ExprP> actsL,
                 std::vector<ExprP> actsR, Span sp) {
  auto b = new_bi(Bk::BCall, sp);
  b->lhs = lhs;
  b->meth = m;
  b->actsL = std::move(actsL);
  b->actsR = std::move(actsR);
  return b;
}

// ---------------------------------------------------------------------------
// Printing

static const char* binop_str(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "<>";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Union: return "++";
    case BinOp::Inter: return "^^";
    case BinOp::Diff: return "--";
  }
  return "?";
}

std::string print_expr(const ExprP& e) {
  if (!e) return "<null>";
  std::ostringstream os;
  switch (e->k) {
    case Ex::IntLit: os << e->str; break;
    case Ex::BoolLit: os << (e->b ? "true" : "false"); break;
    case Ex::NullLit: os << "null"; break;
    case Ex::Var: os << e->str; break;
    case Ex::Field: os << print_expr(e->args[0]) << "." << e->str; break;
    case Ex::Neg: os << "(- " << print_expr(e->args[0]) << ")"; break;
    case Ex::NotE: os << "(not " << print_expr(e->args[0]) << ")"; break;
    case Ex::Bin:
      os << "(" << print_expr(e->args[0]) << " " << binop_str(e->op) << " "
         << print_expr(e->args[1]) << ")";
      break;
    case Ex::Old: os << "old(" << print_expr(e->args[0]) << ")"; break;
    case Ex::RgnLit: {
      os << "{";
      for (size_t i = 0; i < e->args.size(); i++) {
        if (i) os << ", ";
        os << print_expr(e->args[i]);
      }
      os << "}";
      break;
    }
    case Ex::RgnImg: os << print_expr(e->args[0]) << "`" << e->str; break;
    case Ex::Nil: os << "nil"; break;
    case Ex::Cons:
      os << "cons(" << print_expr(e->args[0]) << ", " << print_expr(e->args[1]) << ")";
      break;
    case Ex::Hd: os << "hd(" << print_expr(e->args[0]) << ")"; break;
    case Ex::Tl: os << "tl(" << print_expr(e->args[0]) << ")"; break;
    case Ex::Len: os << "length(" << print_expr(e->args[0]) << ")"; break;
  }
  return os.str();
}

std::string print_formula(const FormulaP& f) {
  if (!f) return "<null>";
  std::ostringstream os;
  switch (f->k) {
    case Fk::FExpr: os << print_expr(f->e1); break;
    case Fk::FIn: os << "(" << print_expr(f->e1) << " iin " << print_expr(f->e2) << ")"; break;
    case Fk::FSubset:
      os << "(" << print_expr(f->e1) << " << " << print_expr(f->e2) << ")";
      break;
    case Fk::FNot: os << "(not " << print_formula(f->f1) << ")"; break;
    case Fk::FAnd: os << "(" << print_formula(f->f1) << " /\\ " << print_formula(f->f2) << ")"; break;
    case Fk::FOr: os << "(" << print_formula(f->f1) << " \\/ " << print_formula(f->f2) << ")"; break;
    case Fk::FImp: os << "(" << print_formula(f->f1) << " -> " << print_formula(f->f2) << ")"; break;
    case Fk::FAll:
      os << "(forall " << f->var << ": " << f->cls << " iin " << print_expr(f->e2) << ", "
         << print_formula(f->f1) << ")";
      break;
    case Fk::FExi:
      os << "(exists " << f->var << ": " << f->cls << " iin " << print_expr(f->e2) << ", "
         << print_formula(f->f1) << ")";
      break;
    case Fk::FPred: {
      os << f->pred << "(";
      for (size_t i = 0; i < f->args.size(); i++) {
        if (i) os << ", ";
        os << print_expr(f->args[i]);
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

std::string print_relformula(const RelFormulaP& f) {
  if (!f) return "<null>";
  std::ostringstream os;
  switch (f->k) {
    case Rk::RAgree:
      os << "(" << print_expr(f->e1) << " =:= " << print_expr(f->e2) << ")";
      break;
    case Rk::RLeft: os << "<| " << print_formula(f->uf) << " <]"; break;
    case Rk::RRight: os << "[> " << print_formula(f->uf) << " |>"; break;
    case Rk::RBoth: os << "Both(" << print_formula(f->uf) << ")"; break;
    case Rk::RNot: os << "(not " << print_relformula(f->r1) << ")"; break;
    case Rk::RAnd:
      os << "(" << print_relformula(f->r1) << " /\\ " << print_relformula(f->r2) << ")";
      break;
    case Rk::ROr:
      os << "(" << print_relformula(f->r1) << " \\/ " << print_relformula(f->r2) << ")";
      break;
    case Rk::RImp:
      os << "(" << print_relformula(f->r1) << " -> " << print_relformula(f->r2) << ")";
      break;
    case Rk::RAllPair:
      os << "(forall " << f->var << ": " << f->cls << " iin " << print_expr(f->gl) << " | "
         << f->var << ": " << f->cls << " iin " << print_expr(f->gr) << ", "
         << print_relformula(f->r1) << ")";
      break;
    case Rk::RExPairMath:
      os << "(exists " << f->var << ": " << f->mty.str() << " | " << f->var << ": "
         << f->mty.str() << ", " << print_relformula(f->r1) << ")";
      break;
  }
  return os.str();
}

static std::string ind(int n) { return std::string(n * 2, ' '); }

std::string print_command(const CommandP& c, int indent) {
  if (!c) return ind(indent) + "<null>";
  std::ostringstream os;
  switch (c->k) {
    case Ck::Skip: os << ind(indent) << "skip"; break;
    case Ck::Assign: os << ind(indent) << c->x << " := " << print_expr(c->e); break;
    case Ck::FieldWr:
      os << ind(indent) << c->x << "." << c->field << " := " << print_expr(c->e);
      break;
    case Ck::Alloc: os << ind(indent) << c->x << " := new " << c->cls; break;
    case Ck::Seq: {
      for (size_t i = 0; i < c->seq.size(); i++) {
        if (i) os << ";\n";
        os << print_command(c->seq[i], indent);
      }
      if (c->seq.empty()) os << ind(indent) << "skip";
      break;
    }
    case Ck::If: {
      os << ind(indent) << "if " << print_expr(c->e) << " then\n"
         << print_command(c->c1, indent + 1);
      if (c->c2) os << "\n" << ind(indent) << "else\n" << print_command(c->c2, indent + 1);
      os << "\n" << ind(indent) << "end";
      break;
    }
    case Ck::While: {
      os << ind(indent) << "while " << print_expr(c->e) << " do\n";
      for (auto& iv : c->invs)
        os << ind(indent + 1) << "invariant { " << print_formula(iv) << " }\n";
      os << print_command(c->c1, indent + 1) << "\n" << ind(indent) << "done";
      break;
    }
    case Ck::Call: {
      os << ind(indent);
      if (!c->x.empty()) os << c->x << " := ";
      os << c->meth << "(";
      for (size_t i = 0; i < c->actuals.size(); i++) {
        if (i) os << ", ";
        os << print_expr(c->actuals[i]);
      }
      os << ")";
      break;
    }
    case Ck::VarBlock:
      os << ind(indent) << "var " << c->x << ": " << c->vty.str() << " in\n"
         << print_command(c->c1, indent + 1) << "\n"
         << ind(indent) << "end";
      break;
  }
  return os.str();
}

std::string print_biprog(const BiprogP& b, int indent) {
  if (!b) return ind(indent) + "<null>";
  std::ostringstream os;
  switch (b->k) {
    case Bk::BSync:
      os << ind(indent) << "|_ " << print_command(b->cl, 0) << " _|";
      break;
    case Bk::BSplit:
      os << ind(indent) << "(\n"
         << print_command(b->cl, indent + 1) << "\n"
         << ind(indent) << "|\n"
         << print_command(b->cr, indent + 1) << "\n"
         << ind(indent) << ")";
      break;
    case Bk::BSeq: {
      for (size_t i = 0; i < b->seq.size(); i++) {
        if (i) os << ";\n";
        os << print_biprog(b->seq[i], indent);
      }
      if (b->seq.empty()) os << ind(indent) << "|_ skip _|";
      break;
    }
    case Bk::BVar:
      os << ind(indent) << "var " << b->x << ": " << b->tl.str() << " | " << b->x << ": "
         << b->tr.str() << " in\n"
         << print_biprog(b->body, indent + 1) << "\n"
         << ind(indent) << "end";
      break;
    case Bk::BIf: {
      os << ind(indent) << "if (" << print_expr(b->gl) << " | " << print_expr(b->gr)
         << ") then\n"
         << print_biprog(b->b1, indent + 1);
      if (b->b2) os << "\n" << ind(indent) << "else\n" << print_biprog(b->b2, indent + 1);
      os << "\n" << ind(indent) << "end";
      break;
    }
    case Bk::BWhile: {
      os << ind(indent) << "while (" << print_expr(b->gl) << ") | (" << print_expr(b->gr)
         << ")";
      if (b->alignL || b->alignR)
        os << " . " << print_relformula(b->alignL) << " | " << print_relformula(b->alignR);
      os << " do\n";
      for (auto& iv : b->rinvs)
        os << ind(indent + 1) << "invariant { " << print_relformula(iv) << " }\n";
      os << print_biprog(b->body, indent + 1) << "\n" << ind(indent) << "done";
      break;
    }
    case Bk::BAssert:
      os << ind(indent) << "assert { " << print_relformula(b->rf) << " }";
      break;
    case Bk::BCall: {
      os << ind(indent) << "|_ ";
      if (!b->lhs.empty()) os << b->lhs << " := ";
      os << b->meth << "(";
      for (size_t i = 0; i < b->actsL.size(); i++) {
        if (i) os << ", ";
        if (expr_eq(b->actsL[i], b->actsR[i]))
          os << print_expr(b->actsL[i]);
        else
          os << print_expr(b->actsL[i]) << " | " << print_expr(b->actsR[i]);
      }
      os << ") _|";
      break;
    }
  }
  return os.str();
}

std::string print_effects(const Effects& eff) {
  std::ostringstream os;
  bool first = true;
  for (auto& a : eff.atoms) {
    if (!first) os << ", ";
    first = false;
    os << (a.mode == 3 ? "rw " : a.mode == 2 ? "wr " : "rd ");
    switch (a.k) {
      case LocKind::Alloc: os << "alloc"; break;
      case LocKind::Var: os << a.var; break;
      case LocKind::Image: os << print_expr(a.region) << "`" << a.field; break;
    }
  }
  return os.str();
}

std::string print_batom(const BndAtom& a) {
  switch (a.k) {
    case LocKind::Alloc: return "alloc";
    case LocKind::Var: return a.var;
    case LocKind::Image: return print_expr(a.region) + "`" + a.field;
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Structural equality (spans ignored)

bool expr_eq(const ExprP& a, const ExprP& b) {
  if (!a || !b) return !a && !b;
  if (a->k != b->k) return false;
  switch (a->k) {
    case Ex::IntLit: return a->str == b->str;
    case Ex::BoolLit: return a->b == b->b;
    case Ex::NullLit:
    case Ex::Nil: return true;
    case Ex::Var: return a->str == b->str;
    case Ex::Field:
    case Ex::RgnImg:
      return a->str == b->str && expr_eq(a->args[0], b->args[0]);
    case Ex::Bin:
      if (a->op != b->op) return false;
      break;
    default: break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); i++)
    if (!expr_eq(a->args[i], b->args[i])) return false;
  return true;
}

bool formula_eq(const FormulaP& a, const FormulaP& b) {
  if (!a || !b) return !a && !b;
  if (a->k != b->k) return false;
  if (a->var != b->var || a->cls != b->cls || a->pred != b->pred) return false;
  if (!expr_eq(a->e1, b->e1) || !expr_eq(a->e2, b->e2)) return false;
  if (!formula_eq(a->f1, b->f1) || !formula_eq(a->f2, b->f2)) return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); i++)
    if (!expr_eq(a->args[i], b->args[i])) return false;
  return true;
}

bool relformula_eq(const RelFormulaP& a, const RelFormulaP& b) {
  if (!a || !b) return !a && !b;
  if (a->k != b->k) return false;
  if (a->var != b->var || a->cls != b->cls) return false;
  if (!(a->mty == b->mty)) return false;
  return expr_eq(a->e1, b->e1) && expr_eq(a->e2, b->e2) && formula_eq(a->uf, b->uf) &&
         relformula_eq(a->r1, b->r1) && relformula_eq(a->r2, b->r2) &&
         expr_eq(a->gl, b->gl) && expr_eq(a->gr, b->gr);
}

bool command_eq(const CommandP& a, const CommandP& b, bool ignore_annotations) {
  if (!a || !b) return !a && !b;
  if (a->k != b->k) return false;
  switch (a->k) {
    case Ck::Skip: return true;
    case Ck::Assign: return a->x == b->x && expr_eq(a->e, b->e);
    case Ck::FieldWr:
      return a->x == b->x && a->field == b->field && expr_eq(a->e, b->e);
    case Ck::Alloc: return a->x == b->x && a->cls == b->cls;
    case Ck::Seq: {
      if (a->seq.size() != b->seq.size()) return false;
      for (size_t i = 0; i < a->seq.size(); i++)
        if (!command_eq(a->seq[i], b->seq[i], ignore_annotations)) return false;
      return true;
    }
    case Ck::If:
      return expr_eq(a->e, b->e) && command_eq(a->c1, b->c1, ignore_annotations) &&
             command_eq(a->c2, b->c2, ignore_annotations);
    case Ck::While: {
      if (!expr_eq(a->e, b->e)) return false;
      if (!ignore_annotations) {
        if (a->invs.size() != b->invs.size()) return false;
        for (size_t i = 0; i < a->invs.size(); i++)
          if (!formula_eq(a->invs[i], b->invs[i])) return false;
      }
      return command_eq(a->c1, b->c1, ignore_annotations);
    }
    case Ck::Call: {
      if (a->x != b->x || a->meth != b->meth) return false;
      if (a->actuals.size() != b->actuals.size()) return false;
      for (size_t i = 0; i < a->actuals.size(); i++)
        if (!expr_eq(a->actuals[i], b->actuals[i])) return false;
      return true;
    }
    case Ck::VarBlock:
      return a->x == b->x && a->vty == b->vty &&
             command_eq(a->c1, b->c1, ignore_annotations);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Normalization

static void flatten_into(const CommandP& c, std::vector<CommandP>& out) {
  CommandP n = normalize_command(c);
  if (!n || n->k == Ck::Skip) return;
  if (n->k == Ck::Seq) {
    for (auto& s : n->seq) out.push_back(s);
    return;
  }
  out.push_back(n);
}

CommandP normalize_command(const CommandP& c) {
  if (!c) return nullptr;
  switch (c->k) {
    case Ck::Skip:
    case Ck::Assign:
    case Ck::FieldWr:
    case Ck::Alloc:
    case Ck::Call: return c;
    case Ck::Seq: {
      std::vector<CommandP> out;
      for (auto& s : c->seq) flatten_into(s, out);
      if (out.empty()) return mk_skip();
      if (out.size() == 1) return out[0];
      return mk_seq(std::move(out));
    }
    case Ck::If: {
      CommandP t = normalize_command(c->c1);
      CommandP e = c->c2 ? normalize_command(c->c2) : nullptr;
      if (e && e->k == Ck::Skip) e = nullptr;
      if (!t) t = mk_skip();
      return mk_if(c->e, t, e);
    }
    case Ck::While: {
      CommandP body = normalize_command(c->c1);
      if (!body) body = mk_skip();
      return mk_while(c->e, {}, body);  // annotations erased
    }
    case Ck::VarBlock: {
      CommandP body = normalize_command(c->c1);
      if (!body) body = mk_skip();
      return mk_varblock(c->x, c->vty, body);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// free_locations

std::string LocAtom::str() const {
  if (is_var) return var;
  return print_expr(region) + "`" + field;
}

namespace {

struct LocCollector {
  // quantified variable -> its range region expression
  std::map<std::string, ExprP> qvars;
  std::vector<std::string> bound;  // predicate params etc.
  std::set<std::string> seen;
  std::vector<LocAtom> out;

  bool is_bound(const std::string& v) {
    if (qvars.count(v)) return true;
    return std::find(bound.begin(), bound.end(), v) != bound.end();
  }

  void add_var(const std::string& v) {
    if (seen.insert("v:" + v).second) out.push_back({true, v, nullptr, ""});
  }
  void add_img(const ExprP& base, const std::string& f) {
    std::string key = "i:" + print_expr(base) + "`" + f;
    if (seen.insert(key).second) out.push_back({false, "", base, f});
  }

  // Region over which a receiver expression ranges, for turning field reads
  // into image atoms. Quantified variables use their binder's range; plain
  // variables read the singleton around themselves.
  ExprP base_region(const ExprP& e) {
    if (e->k == Ex::Var) {
      auto it = qvars.find(e->str);
      if (it != qvars.end()) return it->second;
      if (is_bound(e->str)) return nullptr;
      return mk_rgnlit({mk_var(e->str)});
    }
    if (e->k == Ex::Old) return base_region(e->args[0]);
    if (e->k == Ex::Field) {
      ExprP inner = base_region(e->args[0]);
      if (!inner) return nullptr;
      return mk_rgnimg(inner, e->str);
    }
    return nullptr;
  }

  void expr(const ExprP& e) {
    if (!e) return;
    switch (e->k) {
      case Ex::Var:
        if (!is_bound(e->str)) add_var(e->str);
        return;
      case Ex::Field: {
        expr(e->args[0]);
        ExprP base = base_region(e->args[0]);
        if (base) add_img(base, e->str);
        return;
      }
      case Ex::RgnImg: {
        expr(e->args[0]);
        ExprP base = strip(e->args[0]);
        add_img(base, e->str);
        return;
      }
      case Ex::Old: expr(e->args[0]); return;
      default:
        for (auto& a : e->args) expr(a);
        return;
    }
  }

  // Region expression with old() stripped, used as a stable image base.
  ExprP strip(const ExprP& e) {
    if (e->k == Ex::Old) return strip(e->args[0]);
    return e;
  }

  void formula(const FormulaP& f) {
    if (!f) return;
    switch (f->k) {
      case Fk::FExpr: expr(f->e1); return;
      case Fk::FIn:
      case Fk::FSubset:
        expr(f->e1);
        expr(f->e2);
        return;
      case Fk::FNot: formula(f->f1); return;
      case Fk::FAnd:
      case Fk::FOr:
      case Fk::FImp:
        formula(f->f1);
        formula(f->f2);
        return;
      case Fk::FAll:
      case Fk::FExi: {
        expr(f->e2);
        auto saved = qvars;
        qvars[f->var] = strip(f->e2);
        formula(f->f1);
        qvars = saved;
        return;
      }
      case Fk::FPred:
        for (auto& a : f->args) expr(a);
        return;
    }
  }
};

}  // namespace

std::vector<LocAtom> free_locations(const FormulaP& f) {
  LocCollector lc;
  lc.formula(f);
  return lc.out;
}

std::vector<std::string> free_location_strings(const FormulaP& f) {
  std::vector<std::string> out;
  for (auto& a : free_locations(f)) out.push_back(a.str());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace rv
