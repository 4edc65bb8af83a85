#include "typecheck/typecheck.hpp"

#include <map>
#include <set>

#include "frontend/diag.hpp"

namespace rv {

namespace {

// Assignment/argument compatibility: exact type, or null into a class slot.
bool compat(const Type& target, const Type& src) {
  if (target == src) return true;
  if (target.k == Ty::Cls && src.k == Ty::Null) return true;
  return false;
}

bool is_spec_type(const Type& t) { return t.k == Ty::Rgn || t.k == Ty::List; }

struct Checker {
  const Program& p;
  // Innermost scope last. Each scope maps name -> (type, is_ghost).
  std::vector<std::map<std::string, std::pair<Type, bool>>> scopes;
  Type ret = Type::unit();
  bool in_spec = false;    // inside requires/ensures/invariant/predicate
  bool old_ok = false;     // old() permitted here
  bool result_ok = false;  // 'result' in scope

  explicit Checker(const Program& prog) : p(prog) {}

  [[noreturn]] void err(Span sp, const std::string& m) const { throw SrcError(sp, m); }

  const std::pair<Type, bool>* lookup_local(const std::string& n) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void bind(Span sp, const std::string& n, Type t, bool ghost) {
    if (n == "result") err(sp, "'result' cannot be redeclared");
    if (p.globals.count(n)) err(sp, "'" + n + "' shadows a global");
    if (lookup_local(n)) err(sp, "'" + n + "' is already in scope");
    scopes.back()[n] = {t, ghost};
  }

  void check_class_exists(Span sp, const std::string& c) const {
    if (!p.classes.count(c)) err(sp, "unknown class '" + c + "'");
  }

  // ---- expressions ----

  Type expr(const ExprP& e) {
    Type t = expr_raw(e);
    e->ty = t;
    return t;
  }

  Type expr_raw(const ExprP& e) {
    switch (e->k) {
      case Ex::IntLit: return Type::intt();
      case Ex::BoolLit: return Type::boolt();
      case Ex::NullLit: return Type::nullt();
      case Ex::Nil: return Type::list();
      case Ex::Var: {
        if (e->str == "result") {
          if (!result_ok) err(e->sp, "'result' is not available here");
          return ret;
        }
        if (auto* l = lookup_local(e->str)) return l->first;
        auto g = p.globals.find(e->str);
        if (g != p.globals.end()) return g->second->ty;
        err(e->sp, "unknown variable '" + e->str + "'");
      }
      case Ex::Field: {
        Type base = expr(e->args[0]);
        if (base.k != Ty::Cls)
          err(e->sp, "field access on non-reference (" + base.str() + ")");
        auto f = p.fields.find(e->str);
        if (f == p.fields.end()) err(e->sp, "unknown field '" + e->str + "'");
        if (f->second.first != base.cls)
          err(e->sp, "field '" + e->str + "' belongs to class " + f->second.first +
                         ", not " + base.cls);
        return f->second.second->ty;
      }
      case Ex::Neg: {
        if (expr(e->args[0]).k != Ty::Int) err(e->sp, "negation needs an int");
        return Type::intt();
      }
      case Ex::NotE: {
        if (expr(e->args[0]).k != Ty::Bool) err(e->sp, "'not' needs a bool");
        return Type::boolt();
      }
      case Ex::Old: {
        if (!old_ok) err(e->sp, "old() is only meaningful in postconditions and invariants");
        return expr(e->args[0]);
      }
      case Ex::Bin: {
        Type a = expr(e->args[0]), b = expr(e->args[1]);
        switch (e->op) {
          case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
            if (a.k != Ty::Int || b.k != Ty::Int) err(e->sp, "arithmetic needs ints");
            return Type::intt();
          case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
            if (a.k != Ty::Int || b.k != Ty::Int) err(e->sp, "comparison needs ints");
            return Type::boolt();
          case BinOp::Eq: case BinOp::Ne: {
            bool refs = (a.k == Ty::Cls || a.k == Ty::Null) &&
                        (b.k == Ty::Cls || b.k == Ty::Null);
            bool same = a == b && a.k != Ty::Unit;
            if (!refs && !same)
              err(e->sp, "cannot compare " + a.str() + " with " + b.str());
            return Type::boolt();
          }
          case BinOp::And: case BinOp::Or:
            if (a.k != Ty::Bool || b.k != Ty::Bool) err(e->sp, "'and'/'or' need bools");
            return Type::boolt();
          case BinOp::Union: case BinOp::Inter: case BinOp::Diff:
            if (a.k != Ty::Rgn || b.k != Ty::Rgn)
              err(e->sp, "region operators need regions");
            return Type::rgn();
        }
        err(e->sp, "bad operator");
      }
      case Ex::RgnLit: {
        for (auto& el : e->args) {
          Type t = expr(el);
          if (t.k != Ty::Cls && t.k != Ty::Null)
            err(el->sp, "region literals hold references");
        }
        return Type::rgn();
      }
      case Ex::RgnImg: {
        Type base = expr(e->args[0]);
        if (base.k != Ty::Rgn) err(e->sp, "image base must be a region");
        if (e->str == "any")
          err(e->sp, "'any' images denote location sets, not region values");
        auto f = p.fields.find(e->str);
        if (f == p.fields.end()) err(e->sp, "unknown field '" + e->str + "'");
        Type ft = f->second.second->ty;
        if (ft.k == Ty::Cls || ft.k == Ty::Rgn) return Type::rgn();
        err(e->sp, "image of a " + ft.str() + " field is not a region value");
      }
      case Ex::Cons: {
        if (expr(e->args[0]).k != Ty::Int) err(e->sp, "cons head must be an int");
        if (expr(e->args[1]).k != Ty::List) err(e->sp, "cons tail must be an intlist");
        return Type::list();
      }
      case Ex::Hd:
        if (expr(e->args[0]).k != Ty::List) err(e->sp, "hd needs an intlist");
        return Type::intt();
      case Ex::Tl:
        if (expr(e->args[0]).k != Ty::List) err(e->sp, "tl needs an intlist");
        return Type::list();
      case Ex::Len:
        if (expr(e->args[0]).k != Ty::List) err(e->sp, "length needs an intlist");
        return Type::intt();
    }
    err(e->sp, "bad expression");
  }

  // Executable positions (guards, assignment sources in non-ghost targets)
  // must not mention old(); guards additionally must not touch ghost state.
  void check_guard(const ExprP& e) {
    bool saved = old_ok;
    old_ok = false;
    if (expr(e).k != Ty::Bool) err(e->sp, "guard must be a bool");
    old_ok = saved;
    require_ghost_free(e);
  }

  void require_ghost_free(const ExprP& e) {
    if (is_spec_type(e->ty)) err(e->sp, "ghost value in an executable guard");
    if (e->k == Ex::Var) {
      auto g = p.globals.find(e->str);
      if (g != p.globals.end() && g->second->ghost)
        err(e->sp, "ghost global '" + e->str + "' in an executable guard");
      if (auto* l = lookup_local(e->str); l && l->second)
        err(e->sp, "ghost variable '" + e->str + "' in an executable guard");
    }
    if (e->k == Ex::Field) {
      auto f = p.fields.find(e->str);
      if (f != p.fields.end() && f->second.second->ghost)
        err(e->sp, "ghost field '" + e->str + "' in an executable guard");
    }
    for (auto& a : e->args) require_ghost_free(a);
  }

  // ---- formulas ----

  void formula(const FormulaP& f) {
    switch (f->k) {
      case Fk::FExpr:
        if (expr(f->e1).k != Ty::Bool) err(f->sp, "formula atom must be a bool");
        return;
      case Fk::FIn: {
        Type a = expr(f->e1);
        if (a.k != Ty::Cls && a.k != Ty::Null) err(f->sp, "'iin' tests a reference");
        if (expr(f->e2).k != Ty::Rgn) err(f->sp, "'iin' range must be a region");
        return;
      }
      case Fk::FSubset:
        if (expr(f->e1).k != Ty::Rgn || expr(f->e2).k != Ty::Rgn)
          err(f->sp, "'<<' relates regions");
        return;
      case Fk::FNot: formula(f->f1); return;
      case Fk::FAnd: case Fk::FOr: case Fk::FImp:
        formula(f->f1);
        formula(f->f2);
        return;
      case Fk::FAll: case Fk::FExi: {
        check_class_exists(f->sp, f->cls);
        if (expr(f->e2).k != Ty::Rgn) err(f->sp, "quantifier range must be a region");
        scopes.emplace_back();
        bind(f->sp, f->var, Type::cl(f->cls), true);
        formula(f->f1);
        scopes.pop_back();
        return;
      }
      case Fk::FPred: {
        auto it = p.preds.find(f->pred);
        if (it == p.preds.end()) err(f->sp, "unknown predicate '" + f->pred + "'");
        const PredicateDecl* d = it->second.first;
        if (d->params.size() != f->args.size())
          err(f->sp, "predicate '" + f->pred + "' expects " +
                         std::to_string(d->params.size()) + " arguments");
        for (size_t i = 0; i < f->args.size(); i++) {
          Type t = expr(f->args[i]);
          if (!compat(d->params[i].ty, t))
            err(f->args[i]->sp, "argument " + std::to_string(i + 1) + " of '" + f->pred +
                                    "' expects " + d->params[i].ty.str());
        }
        return;
      }
    }
  }

  // ---- effect atoms ----

  void effect_atom(const EffAtom& a) {
    if (a.k == LocKind::Alloc) return;
    if (a.k == LocKind::Var) {
      if (!p.globals.count(a.var) && !lookup_local(a.var) &&
          !(a.var == "result" && result_ok))
        err(a.sp, "unknown location '" + a.var + "'");
      return;
    }
    if (expr(a.region).k != Ty::Rgn) err(a.sp, "image base must be a region");
    if (a.field != "any" && !p.fields.count(a.field))
      err(a.sp, "unknown field '" + a.field + "'");
  }

  // ---- commands ----

  void command(const CommandP& c) {
    switch (c->k) {
      case Ck::Skip: return;
      case Ck::Assign: {
        Type target = lhs_type(c->sp, c->x);
        Type src = src_type(c->e, target);
        if (!compat(target, src))
          err(c->sp, "cannot assign " + src.str() + " to " + target.str());
        return;
      }
      case Ck::FieldWr: {
        Type base = lhs_type(c->sp, c->x);
        if (base.k != Ty::Cls) err(c->sp, "field update on non-reference");
        auto f = p.fields.find(c->field);
        if (f == p.fields.end()) err(c->sp, "unknown field '" + c->field + "'");
        if (f->second.first != base.cls)
          err(c->sp, "field '" + c->field + "' belongs to class " + f->second.first);
        Type src = src_type(c->e, f->second.second->ty);
        if (!compat(f->second.second->ty, src))
          err(c->sp, "cannot store " + src.str() + " in field '" + c->field + "'");
        return;
      }
      case Ck::Alloc: {
        check_class_exists(c->sp, c->cls);
        Type target = lhs_type(c->sp, c->x);
        if (!compat(target, Type::cl(c->cls)))
          err(c->sp, "cannot assign new " + c->cls + " to " + target.str());
        return;
      }
      case Ck::Seq:
        for (auto& s : c->seq) command(s);
        return;
      case Ck::If:
        check_guard(c->e);
        command(c->c1);
        if (c->c2) command(c->c2);
        return;
      case Ck::While: {
        check_guard(c->e);
        bool saved = old_ok;
        old_ok = true;  // loop invariants may reference entry snapshots
        in_spec = true;
        for (auto& iv : c->invs) formula(iv);
        in_spec = false;
        old_ok = saved;
        command(c->c1);
        return;
      }
      case Ck::Call: {
        auto it = p.methods.find(c->meth);
        if (it == p.methods.end()) err(c->sp, "unknown method '" + c->meth + "'");
        const MethodDecl* spec = it->second.spec;
        if (c->actuals.size() != spec->params.size())
          err(c->sp, "method '" + c->meth + "' expects " +
                         std::to_string(spec->params.size()) + " arguments");
        for (size_t i = 0; i < c->actuals.size(); i++) {
          Type t = expr(c->actuals[i]);
          if (!compat(spec->params[i].ty, t))
            err(c->actuals[i]->sp, "argument '" + spec->params[i].name + "' of '" +
                                       c->meth + "' expects " + spec->params[i].ty.str());
        }
        if (!c->x.empty()) {
          Type target = lhs_type(c->sp, c->x);
          if (spec->ret.k == Ty::Unit) err(c->sp, "'" + c->meth + "' returns no value");
          if (!compat(target, spec->ret))
            err(c->sp, "cannot assign " + spec->ret.str() + " result to " + target.str());
        }
        return;
      }
      case Ck::VarBlock: {
        if (c->vty.k == Ty::Cls) check_class_exists(c->sp, c->vty.cls);
        if (c->vty.k == Ty::Unit) err(c->sp, "variables cannot have type unit");
        scopes.emplace_back();
        bind(c->sp, c->x, c->vty, is_spec_type(c->vty));
        command(c->c1);
        scopes.pop_back();
        return;
      }
    }
  }

  Type lhs_type(Span sp, const std::string& x) {
    if (x == "result") {
      if (!result_ok) err(sp, "'result' is not assignable here");
      if (ret.k == Ty::Unit) err(sp, "method returns no value");
      return ret;
    }
    if (auto* l = lookup_local(x)) return l->first;
    auto g = p.globals.find(x);
    if (g != p.globals.end()) return g->second->ty;
    err(sp, "unknown variable '" + x + "'");
  }

  // Assignment sources never contain old(); ghost targets may read anything.
  Type src_type(const ExprP& e, const Type&) {
    bool saved = old_ok;
    old_ok = false;
    Type t = expr(e);
    old_ok = saved;
    return t;
  }
};

void check_method_spec(Checker& ck, const MethodDecl& m) {
  ck.scopes.emplace_back();
  for (auto& prm : m.params) {
    if (prm.ty.k == Ty::Cls) ck.check_class_exists(m.sp, prm.ty.cls);
    if (prm.ty.k == Ty::Unit) throw SrcError(m.sp, "parameters cannot have type unit");
    ck.bind(m.sp, prm.name, prm.ty, is_spec_type(prm.ty));
  }
  ck.ret = m.ret;
  ck.in_spec = true;
  ck.result_ok = false;
  ck.old_ok = false;
  for (auto& f : m.req) ck.formula(f);
  ck.result_ok = m.ret.k != Ty::Unit;
  ck.old_ok = true;
  for (auto& f : m.ens) ck.formula(f);
  ck.old_ok = false;
  ck.result_ok = false;
  ck.in_spec = false;
  for (auto& a : m.eff.atoms) ck.effect_atom(a);
}

void check_method_body(Checker& ck, const MethodDecl& spec, const MethodDecl& body) {
  ck.scopes.emplace_back();
  for (auto& prm : spec.params) ck.bind(body.sp, prm.name, prm.ty, is_spec_type(prm.ty));
  ck.ret = spec.ret;
  ck.result_ok = spec.ret.k != Ty::Unit;
  ck.old_ok = false;
  ck.in_spec = false;
  ck.command(body.body);
  ck.result_ok = false;
  ck.scopes.pop_back();
}

}  // namespace

void typecheck_program(const Program& p) {
  // Field and global types must make sense on their own.
  for (auto& [name, fc] : p.fields) {
    const FieldDecl* f = fc.second;
    if (f->ty.k == Ty::Cls && !p.classes.count(f->ty.cls))
      throw SrcError(f->sp, "unknown class '" + f->ty.cls + "' in field '" + name + "'");
    if (f->ty.k == Ty::Unit) throw SrcError(f->sp, "fields cannot have type unit");
    if (is_spec_type(f->ty) && !f->ghost)
      throw SrcError(f->sp, "field '" + name + "' must be ghost (" + f->ty.str() + ")");
  }
  for (auto& [name, g] : p.globals) {
    if (g->ty.k == Ty::Cls && !p.classes.count(g->ty.cls))
      throw SrcError(g->sp, "unknown class '" + g->ty.cls + "' in global '" + name + "'");
    if (g->ty.k == Ty::Unit) throw SrcError(g->sp, "globals cannot have type unit");
    if (is_spec_type(g->ty) && !g->ghost)
      throw SrcError(g->sp, "global '" + name + "' must be ghost (" + g->ty.str() + ")");
  }

  // Predicates: body over the declared parameters.
  for (auto& [name, pu] : p.preds) {
    const PredicateDecl* d = pu.first;
    Checker ck(p);
    ck.scopes.emplace_back();
    for (auto& prm : d->params) {
      if (prm.ty.k == Ty::Cls) ck.check_class_exists(d->sp, prm.ty.cls);
      ck.bind(d->sp, prm.name, prm.ty, true);
    }
    ck.in_spec = true;
    ck.formula(d->body);
  }

  // Named invariants and boundaries live at unit scope: globals only.
  for (const Unit* u : p.units) {
    for (auto& inv : u->invariants) {
      Checker ck(p);
      ck.in_spec = true;
      ck.scopes.emplace_back();
      ck.formula(inv.f);
    }
    for (auto& b : u->boundary) {
      Checker ck(p);
      ck.scopes.emplace_back();
      EffAtom a{1, b.k, b.var, b.region, b.field, b.sp};
      ck.effect_atom(a);
    }
  }

  for (auto& [name, info] : p.methods) {
    Checker ck(p);
    check_method_spec(ck, *info.spec);
    if (info.body && info.body->body) {
      Checker ck2(p);
      check_method_body(ck2, *info.spec, *info.body);
    }
  }
}

namespace {

// The relational layer: agreements type each side in its own program.
struct RelChecker {
  Checker left, right;

  RelChecker(const Program& l, const Program& r) : left(l), right(r) {}

  void relformula(const RelFormulaP& f) {
    switch (f->k) {
      case Rk::RAgree: {
        Type a = left.expr(f->e1);
        Type b = right.expr(f->e2);
        bool refs = (a.k == Ty::Cls || a.k == Ty::Null) &&
                    (b.k == Ty::Cls || b.k == Ty::Null);
        if (!(a == b || refs))
          throw SrcError(f->sp, "agreement relates " + a.str() + " with " + b.str());
        return;
      }
      case Rk::RLeft: left.formula(f->uf); return;
      case Rk::RRight: right.formula(f->uf); return;
      case Rk::RBoth:
        left.formula(f->uf);
        right.formula(f->uf);
        return;
      case Rk::RNot: relformula(f->r1); return;
      case Rk::RAnd: case Rk::ROr: case Rk::RImp:
        relformula(f->r1);
        relformula(f->r2);
        return;
      case Rk::RAllPair: {
        left.check_class_exists(f->sp, f->cls);
        right.check_class_exists(f->sp, f->cls);
        if (left.expr(f->gl).k != Ty::Rgn || right.expr(f->gr).k != Ty::Rgn)
          throw SrcError(f->sp, "paired quantifier ranges must be regions");
        left.scopes.emplace_back();
        right.scopes.emplace_back();
        left.bind(f->sp, f->var, Type::cl(f->cls), true);
        right.bind(f->sp, f->var, Type::cl(f->cls), true);
        relformula(f->r1);
        left.scopes.pop_back();
        right.scopes.pop_back();
        return;
      }
      case Rk::RExPairMath: {
        if (f->mty.k == Ty::Cls || f->mty.k == Ty::Unit)
          throw SrcError(f->sp, "paired existentials bind mathematical values");
        left.scopes.emplace_back();
        right.scopes.emplace_back();
        left.bind(f->sp, f->var, f->mty, true);
        right.bind(f->sp, f->var, f->mty, true);
        relformula(f->r1);
        left.scopes.pop_back();
        right.scopes.pop_back();
        return;
      }
    }
  }

  void biprog(const BiprogP& b) {
    switch (b->k) {
      case Bk::BSync:
        left.command(b->cl);
        right.command(b->cl);
        return;
      case Bk::BSplit:
        left.command(b->cl);
        right.command(b->cr);
        return;
      case Bk::BSeq:
        for (auto& s : b->seq) biprog(s);
        return;
      case Bk::BVar: {
        if (b->tl.k == Ty::Cls) left.check_class_exists(b->sp, b->tl.cls);
        if (b->tr.k == Ty::Cls) right.check_class_exists(b->sp, b->tr.cls);
        left.scopes.emplace_back();
        right.scopes.emplace_back();
        left.bind(b->sp, b->x, b->tl, is_spec_type(b->tl));
        right.bind(b->sp, b->x, b->tr, is_spec_type(b->tr));
        biprog(b->body);
        left.scopes.pop_back();
        right.scopes.pop_back();
        return;
      }
      case Bk::BIf:
        left.check_guard(b->gl);
        right.check_guard(b->gr);
        biprog(b->b1);
        if (b->b2) biprog(b->b2);
        return;
      case Bk::BWhile: {
        left.check_guard(b->gl);
        right.check_guard(b->gr);
        bool sl = left.old_ok, sr = right.old_ok;
        left.old_ok = right.old_ok = true;
        if (b->alignL) {
          if (b->alignL->k != Rk::RLeft)
            throw SrcError(b->sp, "left alignment guard must be a left embedding");
          left.formula(b->alignL->uf);
        }
        if (b->alignR) {
          if (b->alignR->k != Rk::RRight)
            throw SrcError(b->sp, "right alignment guard must be a right embedding");
          right.formula(b->alignR->uf);
        }
        for (auto& iv : b->rinvs) relformula(iv);
        left.old_ok = sl;
        right.old_ok = sr;
        biprog(b->body);
        return;
      }
      case Bk::BAssert: {
        bool sl = left.old_ok, sr = right.old_ok;
        left.old_ok = right.old_ok = true;
        relformula(b->rf);
        left.old_ok = sl;
        right.old_ok = sr;
        return;
      }
      case Bk::BCall: {
        auto okside = [&](Checker& ck, const std::vector<ExprP>& acts,
                          const std::string& lhs) {
          auto it = ck.p.methods.find(b->meth);
          if (it == ck.p.methods.end())
            throw SrcError(b->sp, "unknown method '" + b->meth + "'");
          const MethodDecl* spec = it->second.spec;
          if (acts.size() != spec->params.size())
            throw SrcError(b->sp, "method '" + b->meth + "' expects " +
                                      std::to_string(spec->params.size()) + " arguments");
          for (size_t i = 0; i < acts.size(); i++) {
            Type t = ck.expr(acts[i]);
            if (!compat(spec->params[i].ty, t))
              throw SrcError(acts[i]->sp, "argument '" + spec->params[i].name + "' of '" +
                                              b->meth + "' expects " +
                                              spec->params[i].ty.str());
          }
          if (!lhs.empty()) {
            Type target = ck.lhs_type(b->sp, lhs);
            if (spec->ret.k == Ty::Unit)
              throw SrcError(b->sp, "'" + b->meth + "' returns no value");
            if (!compat(target, spec->ret))
              throw SrcError(b->sp, "cannot assign " + spec->ret.str() + " result");
          }
        };
        okside(left, b->actsL, b->lhs);
        okside(right, b->actsR, b->lhs);
        return;
      }
    }
  }
};

}  // namespace

void typecheck_biprogram(const BiProgram& bp) {
  typecheck_program(bp.left);
  typecheck_program(bp.right);

  for (const Unit* b : bp.bimods)
    for (auto& c : b->couplings) {
      RelChecker rc(bp.left, bp.right);
      rc.left.in_spec = rc.right.in_spec = true;
      rc.left.scopes.emplace_back();
      rc.right.scopes.emplace_back();
      rc.relformula(c.f);
    }

  for (auto& [name, info] : bp.bimethods) {
    const BiMethodDecl& m = *info.decl;
    auto lit = bp.left.methods.find(name);
    auto rit = bp.right.methods.find(name);
    if (lit == bp.left.methods.end() || rit == bp.right.methods.end())
      throw SrcError(m.sp, "relational method '" + name +
                               "' has no unary counterpart on both sides");

    RelChecker rc(bp.left, bp.right);
    rc.left.scopes.emplace_back();
    rc.right.scopes.emplace_back();
    for (auto& prm : m.paramsL) {
      if (prm.ty.k == Ty::Cls) rc.left.check_class_exists(m.sp, prm.ty.cls);
      rc.left.bind(m.sp, prm.name, prm.ty, is_spec_type(prm.ty));
    }
    for (auto& prm : m.paramsR) {
      if (prm.ty.k == Ty::Cls) rc.right.check_class_exists(m.sp, prm.ty.cls);
      rc.right.bind(m.sp, prm.name, prm.ty, is_spec_type(prm.ty));
    }
    // The relational signature must match the unary ones.
    auto sig_match = [&](const std::vector<Param>& ps, const MethodDecl* u) {
      if (ps.size() != u->params.size()) return false;
      for (size_t i = 0; i < ps.size(); i++)
        if (ps[i].name != u->params[i].name || !(ps[i].ty == u->params[i].ty))
          return false;
      return true;
    };
    if (!sig_match(m.paramsL, lit->second.spec) || !(m.retL == lit->second.spec->ret) ||
        !sig_match(m.paramsR, rit->second.spec) || !(m.retR == rit->second.spec->ret))
      throw SrcError(m.sp, "relational signature of '" + name +
                               "' does not match the unary declarations");

    rc.left.ret = m.retL;
    rc.right.ret = m.retR;
    rc.left.in_spec = rc.right.in_spec = true;
    for (auto& f : m.req) rc.relformula(f);
    rc.left.result_ok = m.retL.k != Ty::Unit;
    rc.right.result_ok = m.retR.k != Ty::Unit;
    rc.left.old_ok = rc.right.old_ok = true;
    for (auto& f : m.ens) rc.relformula(f);
    rc.left.old_ok = rc.right.old_ok = false;
    rc.left.in_spec = rc.right.in_spec = false;
    if (m.body) {
      rc.left.result_ok = m.retL.k != Ty::Unit;
      rc.right.result_ok = m.retR.k != Ty::Unit;
      rc.biprog(m.body);
    }
  }
}

std::vector<std::string> all_fields(const Program& p) {
  std::vector<std::string> out;
  for (const Unit* u : p.units)
    for (auto& c : u->classes)
      for (auto& f : c.fields) out.push_back(f.name);
  return out;
}

std::vector<EffAtom> expand_effects(const Program& p, const Effects& eff) {
  std::vector<EffAtom> out;
  std::set<std::string> seen;
  auto push = [&](const EffAtom& a) {
    std::string key = std::to_string(a.mode) + "|" +
                      (a.k == LocKind::Alloc
                           ? "alloc"
                           : a.k == LocKind::Var ? a.var
                                                 : print_expr(a.region) + "`" + a.field);
    if (seen.insert(key).second) out.push_back(a);
  };
  for (auto& a : eff.atoms) {
    if (a.k == LocKind::Image && a.field == "any") {
      for (auto& f : all_fields(p)) push({a.mode, LocKind::Image, "", a.region, f, a.sp});
    } else {
      push(a);
    }
  }
  return out;
}

std::vector<BndAtom> expand_boundary(const Program& p, const std::vector<BndAtom>& bnd) {
  std::vector<BndAtom> out;
  std::set<std::string> seen;
  auto push = [&](const BndAtom& a) {
    std::string key = a.k == LocKind::Alloc
                          ? "alloc"
                          : a.k == LocKind::Var ? a.var
                                                : print_expr(a.region) + "`" + a.field;
    if (seen.insert(key).second) out.push_back(a);
  };
  for (auto& a : bnd) {
    if (a.k == LocKind::Image && a.field == "any") {
      for (auto& f : all_fields(p)) push({LocKind::Image, "", a.region, f, a.sp});
    } else {
      push(a);
    }
  }
  return out;
}

}  // namespace rv
