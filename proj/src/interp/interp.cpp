#include "interp/interp.hpp"

#include <algorithm>
#include <sstream>

#include "frontend/diag.hpp"

namespace rv {

Value default_value(const Type& t) {
  switch (t.k) {
    case Ty::Int: return Value::integer(0);
    case Ty::Bool: return Value::boolean(false);
    case Ty::Rgn: return Value::region(Region());
    case Ty::List: return Value::list(IntList());
    case Ty::Cls:
    case Ty::Null: return Value::ref(NULL_REF);
    case Ty::Unit: return Value::unit();
  }
  return Value::unit();
}

// ---------------------------------------------------------------------------
// State well-formedness

static bool value_matches(const Value& v, const Type& t, const ConcreteState& s,
                          std::string* why) {
  auto bad = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  switch (t.k) {
    case Ty::Int:
      if (v.kind() != Vk::Int) return bad("expected an int value");
      return true;
    case Ty::Bool:
      if (v.kind() != Vk::Bool) return bad("expected a bool value");
      return true;
    case Ty::Rgn: {
      if (v.kind() != Vk::Rgn) return bad("expected a region value");
      for (Ref r : v.as_region().elems())
        if (r != NULL_REF && !s.alloct.count(r))
          return bad("region contains dangling reference " + std::to_string(r));
      return true;
    }
    case Ty::List:
      if (v.kind() != Vk::List) return bad("expected an intlist value");
      return true;
    case Ty::Cls: {
      if (v.kind() != Vk::Ref) return bad("expected a reference value");
      Ref r = v.as_ref();
      if (r == NULL_REF) return true;
      auto it = s.alloct.find(r);
      if (it == s.alloct.end()) return bad("dangling reference " + std::to_string(r));
      if (it->second != t.cls)
        return bad("reference " + std::to_string(r) + " has class " + it->second +
                   ", expected " + t.cls);
      return true;
    }
    case Ty::Null:
    case Ty::Unit:
      return true;
  }
  return true;
}

bool ConcreteState::wf(const Program& p, std::string* why) const {
  auto bad = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (alloct.count(NULL_REF)) return bad("null is allocated");
  for (const auto& [r, cls] : alloct) {
    auto cit = p.classes.find(cls);
    if (cit == p.classes.end()) return bad("unknown class " + cls);
    if (r >= next) return bad("allocation counter behind reference " + std::to_string(r));
    for (const auto& fd : cit->second->fields) {
      auto hit = heap.find(fd.name);
      if (hit == heap.end() || !hit->second.count(r))
        return bad("missing field " + fd.name + " of reference " + std::to_string(r));
      std::string sub;
      if (!value_matches(hit->second.at(r), fd.ty, *this, &sub))
        return bad("field " + fd.name + " of " + std::to_string(r) + ": " + sub);
    }
  }
  for (const auto& [f, cells] : heap) {
    auto fit = p.fields.find(f);
    if (fit == p.fields.end()) return bad("heap has unknown field " + f);
    for (const auto& [r, v] : cells) {
      (void)v;
      auto ait = alloct.find(r);
      if (ait == alloct.end())
        return bad("heap cell " + f + "@" + std::to_string(r) + " at unallocated reference");
      if (ait->second != fit->second.first)
        return bad("heap cell " + f + "@" + std::to_string(r) + " at object of class " +
                   ait->second);
    }
  }
  for (const auto& [g, decl] : p.globals) {
    auto it = globals.find(g);
    if (it == globals.end()) return bad("missing global " + g);
    std::string sub;
    if (!value_matches(it->second, decl->ty, *this, &sub)) return bad("global " + g + ": " + sub);
  }
  for (const auto& [g, v] : globals) {
    (void)v;
    if (!p.globals.count(g)) return bad("undeclared global " + g);
  }
  return true;
}

std::string ConcreteState::str() const {
  std::ostringstream os;
  os << "alloc {";
  bool first = true;
  for (const auto& [r, c] : alloct) {
    os << (first ? "" : ", ") << r << ": " << c;
    first = false;
  }
  os << "} globals {";
  first = true;
  for (const auto& [g, v] : globals) {
    os << (first ? "" : ", ") << g << " = " << v.str();
    first = false;
  }
  os << "} heap {";
  first = true;
  for (const auto& [f, cells] : heap)
    for (const auto& [r, v] : cells) {
      os << (first ? "" : ", ") << f << "@" << r << " = " << v.str();
      first = false;
    }
  os << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// Expression evaluation

static mpz_class to_int(const ExprP& e) { return mpz_class(e->str, 10); }

Value Interp::eval(const ExprP& e, const ConcreteState& s, const Env& env, const OldCtx* old,
                   Trace* tr) const {
  switch (e->k) {
    case Ex::IntLit: return Value::integer(to_int(e));
    case Ex::BoolLit: return Value::boolean(e->b);
    case Ex::NullLit: return Value::ref(NULL_REF);
    case Ex::Var: {
      auto it = env.find(e->str);
      if (it != env.end()) return it->second;
      auto git = s.globals.find(e->str);
      if (git == s.globals.end())
        throw Fault("no-body", e->sp, "unbound variable " + e->str);
      if (tr) tr->greads.insert(e->str);
      return git->second;
    }
    case Ex::Field: {
      Value base = eval(e->args[0], s, env, old, tr);
      Ref r = base.as_ref();
      if (r == NULL_REF)
        throw Fault("null-deref", e->sp, "read of field " + e->str + " on null");
      auto hit = s.heap.find(e->str);
      if (hit == s.heap.end() || !hit->second.count(r))
        throw Fault("null-deref", e->sp,
                    "reference " + std::to_string(r) + " has no field " + e->str);
      if (tr) tr->hreads.insert({e->str, r});
      return hit->second.at(r);
    }
    case Ex::Neg: return Value::integer(-eval(e->args[0], s, env, old, tr).as_int());
    case Ex::NotE: return Value::boolean(!eval(e->args[0], s, env, old, tr).as_bool());
    case Ex::Bin: {
      // Connectives short-circuit so guards can shield dereferences.
      if (e->op == BinOp::And) {
        if (!eval(e->args[0], s, env, old, tr).as_bool()) return Value::boolean(false);
        return Value::boolean(eval(e->args[1], s, env, old, tr).as_bool());
      }
      if (e->op == BinOp::Or) {
        if (eval(e->args[0], s, env, old, tr).as_bool()) return Value::boolean(true);
        return Value::boolean(eval(e->args[1], s, env, old, tr).as_bool());
      }
      Value a = eval(e->args[0], s, env, old, tr);
      Value b = eval(e->args[1], s, env, old, tr);
      switch (e->op) {
        case BinOp::Add: return Value::integer(a.as_int() + b.as_int());
        case BinOp::Sub: return Value::integer(a.as_int() - b.as_int());
        case BinOp::Mul: return Value::integer(a.as_int() * b.as_int());
        case BinOp::Eq: return Value::boolean(a == b);
        case BinOp::Ne: return Value::boolean(a != b);
        case BinOp::Lt: return Value::boolean(a.as_int() < b.as_int());
        case BinOp::Le: return Value::boolean(a.as_int() <= b.as_int());
        case BinOp::Gt: return Value::boolean(a.as_int() > b.as_int());
        case BinOp::Ge: return Value::boolean(a.as_int() >= b.as_int());
        case BinOp::Union: return Value::region(a.as_region().unite(b.as_region()));
        case BinOp::Inter: return Value::region(a.as_region().intersect(b.as_region()));
        case BinOp::Diff: return Value::region(a.as_region().diff(b.as_region()));
        case BinOp::And:
        case BinOp::Or: break;
      }
      throw std::logic_error("unreachable binary operator");
    }
    case Ex::Old: {
      if (!old || !old->s)
        throw std::logic_error("old() evaluated without a pre-state snapshot");
      return eval(e->args[0], *old->s, old->env ? *old->env : env, nullptr, nullptr);
    }
    case Ex::RgnLit: {
      Region g;
      for (const auto& el : e->args) g.insert(eval(el, s, env, old, tr).as_ref());
      return Value::region(g);
    }
    case Ex::RgnImg: {
      Region base = eval(e->args[0], s, env, old, tr).as_region();
      auto fit = p_.fields.find(e->str);
      if (fit == p_.fields.end())
        throw std::logic_error("image over unknown field " + e->str);
      const FieldDecl* fd = fit->second.second;
      Region out;
      for (Ref r : base.elems()) {
        if (r == NULL_REF) continue;
        auto ait = s.alloct.find(r);
        if (ait == s.alloct.end() || ait->second != fit->second.first) continue;
        const Value& v = s.heap.at(e->str).at(r);
        if (tr) tr->hreads.insert({e->str, r});
        if (fd->ty.k == Ty::Rgn)
          out = out.unite(v.as_region());
        else if (fd->ty.is_ref())
          out.insert(v.as_ref());
        else
          throw std::logic_error("value-position image over primitive field " + e->str);
      }
      return Value::region(out);
    }
    case Ex::Nil: return Value::list(IntList());
    case Ex::Cons: {
      Value h = eval(e->args[0], s, env, old, tr);
      Value t = eval(e->args[1], s, env, old, tr);
      IntList out;
      out.items.push_back(h.as_int());
      const auto& rest = t.as_list().items;
      out.items.insert(out.items.end(), rest.begin(), rest.end());
      return Value::list(std::move(out));
    }
    case Ex::Hd: {
      Value v = eval(e->args[0], s, env, old, tr);
      const IntList& l = v.as_list();
      return Value::integer(l.items.empty() ? mpz_class(0) : l.items.front());
    }
    case Ex::Tl: {
      Value v = eval(e->args[0], s, env, old, tr);
      const IntList& l = v.as_list();
      IntList out;
      if (!l.items.empty()) out.items.assign(l.items.begin() + 1, l.items.end());
      return Value::list(std::move(out));
    }
    case Ex::Len: {
      Value v = eval(e->args[0], s, env, old, tr);
      const IntList& l = v.as_list();
      return Value::integer(mpz_class(static_cast<unsigned long>(l.items.size())));
    }
  }
  throw std::logic_error("unreachable expression kind");
}

Region Interp::denote_region(const ExprP& g, const ConcreteState& s, const Env& env) const {
  return eval(g, s, env).as_region();
}

// ---------------------------------------------------------------------------
// Formula evaluation

bool Interp::holds(const FormulaP& f, const ConcreteState& s, const Env& env,
                   const OldCtx* old) const {
  PredFuel pf{pred_budget};
  return holds_rec(f, s, env, old, pf);
}

bool Interp::holds_rec(const FormulaP& f, const ConcreteState& s, const Env& env,
                       const OldCtx* old, PredFuel& pf) const {
  switch (f->k) {
    case Fk::FExpr: return eval(f->e1, s, env, old).as_bool();
    case Fk::FIn: {
      Value v = eval(f->e1, s, env, old);
      return eval(f->e2, s, env, old).as_region().contains(v.as_ref());
    }
    case Fk::FSubset:
      return eval(f->e1, s, env, old).as_region().subset_of(
          eval(f->e2, s, env, old).as_region());
    case Fk::FNot: return !holds_rec(f->f1, s, env, old, pf);
    case Fk::FAnd:
      return holds_rec(f->f1, s, env, old, pf) && holds_rec(f->f2, s, env, old, pf);
    case Fk::FOr:
      return holds_rec(f->f1, s, env, old, pf) || holds_rec(f->f2, s, env, old, pf);
    case Fk::FImp:
      return !holds_rec(f->f1, s, env, old, pf) || holds_rec(f->f2, s, env, old, pf);
    case Fk::FAll:
    case Fk::FExi: {
      Region range = eval(f->e1, s, env, old).as_region();
      Env sub = env;
      for (Ref r : range.elems()) {
        if (r == NULL_REF) continue;
        auto ait = s.alloct.find(r);
        if (ait == s.alloct.end() || ait->second != f->cls) continue;
        sub[f->var] = Value::ref(r);
        bool b = holds_rec(f->f1, s, sub, old, pf);
        if (f->k == Fk::FAll && !b) return false;
        if (f->k == Fk::FExi && b) return true;
      }
      return f->k == Fk::FAll;
    }
    case Fk::FPred: {
      if (--pf.left < 0) throw OutOfFuel();
      auto it = p_.preds.find(f->pred);
      if (it == p_.preds.end())
        throw std::logic_error("unknown predicate " + f->pred);
      const PredicateDecl* pd = it->second.first;
      Env sub;
      for (std::size_t i = 0; i < pd->params.size(); ++i)
        sub[pd->params[i].name] = eval(f->args[i], s, env, old);
      return holds_rec(pd->body, s, sub, old, pf);
    }
  }
  throw std::logic_error("unreachable formula kind");
}

// ---------------------------------------------------------------------------
// Command execution

Ref Interp::allocate(ConcreteState& s, const std::string& cls, Span sp) const {
  auto cit = p_.classes.find(cls);
  if (cit == p_.classes.end()) throw Fault("no-body", sp, "allocation of unknown class " + cls);
  Ref r = s.next++;
  s.alloct[r] = cls;
  for (const auto& fd : cit->second->fields) s.heap[fd.name][r] = default_value(fd.ty);
  return r;
}

static void assign_var(const std::string& x, Value v, ConcreteState& s, Env& env, Trace& tr,
                       Span sp) {
  auto it = env.find(x);
  if (it != env.end()) {
    it->second = std::move(v);
    return;
  }
  auto git = s.globals.find(x);
  if (git == s.globals.end()) throw Fault("no-body", sp, "unbound assignment target " + x);
  git->second = std::move(v);
  tr.gwrites.insert(x);
}

void Interp::exec(const CommandP& c, ConcreteState& s, Env& env, Trace& tr, long& fuel) const {
  if (--fuel < 0) throw OutOfFuel();
  switch (c->k) {
    case Ck::Skip: break;
    case Ck::Assign: {
      Value v = eval(c->e, s, env, nullptr, &tr);
      if (guard_boundary && !env.count(c->x)) {
        for (const auto& atom : *guard_boundary)
          if (atom.k == LocKind::Var && atom.var == c->x)
            throw Fault("disjoint", c->sp, "write to encapsulated variable " + c->x);
      }
      assign_var(c->x, std::move(v), s, env, tr, c->sp);
      break;
    }
    case Ck::FieldWr: {
      Value recv = eval(mk_var(c->x, c->sp), s, env, nullptr, &tr);
      Ref r = recv.as_ref();
      if (r == NULL_REF)
        throw Fault("null-deref", c->sp, "write of field " + c->field + " on null");
      Value v = eval(c->e, s, env, nullptr, &tr);
      if (guard_boundary) {
        for (const auto& atom : *guard_boundary) {
          if (atom.k != LocKind::Image || atom.field != c->field) continue;
          Region g = denote_region(atom.region, s, {});
          if (g.contains(r))
            throw Fault("disjoint", c->sp,
                        "write to encapsulated location " + c->field + "@" + std::to_string(r));
        }
      }
      auto hit = s.heap.find(c->field);
      if (hit == s.heap.end() || !hit->second.count(r))
        throw Fault("null-deref", c->sp,
                    "reference " + std::to_string(r) + " has no field " + c->field);
      hit->second[r] = std::move(v);
      tr.hwrites.insert({c->field, r});
      break;
    }
    case Ck::Alloc: {
      Ref r = allocate(s, c->cls, c->sp);
      tr.allocs.push_back(r);
      assign_var(c->x, Value::ref(r), s, env, tr, c->sp);
      break;
    }
    case Ck::Seq:
      for (const auto& sub : c->seq) exec(sub, s, env, tr, fuel);
      break;
    case Ck::If:
      if (eval(c->e, s, env, nullptr, &tr).as_bool()) {
        exec(c->c1, s, env, tr, fuel);
      } else if (c->c2) {
        exec(c->c2, s, env, tr, fuel);
      }
      break;
    case Ck::While:
      while (true) {
        if (--fuel < 0) throw OutOfFuel();
        if (!eval(c->e, s, env, nullptr, &tr).as_bool()) break;
        exec(c->c1, s, env, tr, fuel);
      }
      break;
    case Ck::Call: {
      std::vector<Value> args;
      for (const auto& a : c->actuals) args.push_back(eval(a, s, env, nullptr, &tr));
      Value ret = call_method(c->meth, args, s, tr, fuel);
      if (!c->x.empty()) assign_var(c->x, std::move(ret), s, env, tr, c->sp);
      break;
    }
    case Ck::VarBlock: {
      env[c->x] = default_value(c->vty);
      exec(c->c1, s, env, tr, fuel);
      env.erase(c->x);
      break;
    }
  }
  if (debug_wf) {
    std::string why;
    if (!s.wf(p_, &why))
      throw std::logic_error("state well-formedness broken after step: " + why);
  }
}

Value Interp::call_method(const std::string& m, const std::vector<Value>& args, ConcreteState& s,
                          Trace& tr, long& fuel) const {
  auto it = p_.methods.find(m);
  if (it == p_.methods.end()) throw Fault("no-body", {}, "call to unknown method " + m);
  const MethodDecl* body = it->second.body;
  if (!body || !body->body)
    throw Fault("no-body", it->second.spec ? it->second.spec->sp : Span{},
                "method " + m + " has no implementation in scope");
  Env callee;
  for (std::size_t i = 0; i < body->params.size(); ++i) callee[body->params[i].name] = args[i];
  bool has_ret = body->ret.k != Ty::Unit;
  if (has_ret) callee["result"] = default_value(body->ret);
  exec(body->body, s, callee, tr, fuel);
  return has_ret ? callee.at("result") : Value::unit();
}

// ---------------------------------------------------------------------------
// Effect checking

std::vector<std::string> check_effects(const Trace& t, const std::vector<EffAtom>& expanded,
                                       const ConcreteState& s_pre, const Env& env_pre,
                                       const Interp& in) {
  std::vector<std::string> out;
  bool may_alloc = false;
  for (const auto& a : expanded)
    if (a.k == LocKind::Alloc && a.writes()) may_alloc = true;

  for (const auto& g : t.gwrites) {
    bool ok = false;
    for (const auto& a : expanded)
      if (a.k == LocKind::Var && a.writes() && a.var == g) ok = true;
    if (!ok) out.push_back("write to global " + g + " not covered by any effect");
  }
  for (const auto& [f, r] : t.hwrites) {
    bool fresh = !s_pre.alloct.count(r);
    bool ok = false;
    if (fresh && may_alloc) ok = true;
    for (const auto& a : expanded) {
      if (ok) break;
      if (a.k != LocKind::Image || !a.writes() || a.field != f) continue;
      if (in.denote_region(a.region, s_pre, env_pre).contains(r)) ok = true;
    }
    if (!ok)
      out.push_back("write to " + f + "@" + std::to_string(r) +
                    (fresh ? " (fresh)" : "") + " not covered by any effect");
  }
  if (!t.allocs.empty() && !may_alloc)
    out.push_back("allocation performed without an alloc effect");
  return out;
}

// ---------------------------------------------------------------------------
// Relational evaluation

RelInterp::RelInterp(const BiProgram& bp) : bp_(bp), il_(bp.left), ir_(bp.right) {}

static bool agree_values(const Value& l, const Value& r, const RefPerm& pi) {
  if (l.kind() != r.kind()) return false;
  switch (l.kind()) {
    case Vk::Ref: return pi.agree_ref(l.as_ref(), r.as_ref());
    case Vk::Rgn: return pi.agree_region(l.as_region(), r.as_region());
    default: return l == r;
  }
}

static void collect_ints(const ConcreteState& s, const Env& env, std::set<mpz_class>& out) {
  for (const auto& [g, v] : s.globals)
    if (v.kind() == Vk::Int) out.insert(v.as_int());
  for (const auto& [f, cells] : s.heap)
    for (const auto& [r, v] : cells)
      if (v.kind() == Vk::Int) out.insert(v.as_int());
  for (const auto& [x, v] : env)
    if (v.kind() == Vk::Int) out.insert(v.as_int());
}

static void add_list(std::vector<IntList>& out, const IntList& l) {
  for (const auto& have : out)
    if (have == l) return;
  out.push_back(l);
}

static void collect_lists(const ConcreteState& s, const Env& env, std::vector<IntList>& out) {
  auto with_suffixes = [&](const IntList& l) {
    add_list(out, l);
    IntList suf = l;
    while (!suf.items.empty()) {
      suf.items.erase(suf.items.begin());
      add_list(out, suf);
    }
  };
  for (const auto& [g, v] : s.globals)
    if (v.kind() == Vk::List) with_suffixes(v.as_list());
  for (const auto& [f, cells] : s.heap)
    for (const auto& [r, v] : cells)
      if (v.kind() == Vk::List) with_suffixes(v.as_list());
  for (const auto& [x, v] : env)
    if (v.kind() == Vk::List) with_suffixes(v.as_list());
}

bool RelInterp::eval_relformula(const RelFormulaP& rf, const ConcreteState& sl,
                                const ConcreteState& sr, const RefPerm& pi, const Env& el,
                                const Env& er, const OldCtxPair* old) const {
  switch (rf->k) {
    case Rk::RAgree: {
      Value vl = il_.eval(rf->e1, sl, el, old ? &old->l : nullptr);
      Value vr = ir_.eval(rf->e2, sr, er, old ? &old->r : nullptr);
      return agree_values(vl, vr, pi);
    }
    case Rk::RLeft: return il_.holds(rf->uf, sl, el, old ? &old->l : nullptr);
    case Rk::RRight: return ir_.holds(rf->uf, sr, er, old ? &old->r : nullptr);
    case Rk::RBoth:
      return il_.holds(rf->uf, sl, el, old ? &old->l : nullptr) &&
             ir_.holds(rf->uf, sr, er, old ? &old->r : nullptr);
    case Rk::RNot: return !eval_relformula(rf->r1, sl, sr, pi, el, er, old);
    case Rk::RAnd:
      return eval_relformula(rf->r1, sl, sr, pi, el, er, old) &&
             eval_relformula(rf->r2, sl, sr, pi, el, er, old);
    case Rk::ROr:
      return eval_relformula(rf->r1, sl, sr, pi, el, er, old) ||
             eval_relformula(rf->r2, sl, sr, pi, el, er, old);
    case Rk::RImp:
      return !eval_relformula(rf->r1, sl, sr, pi, el, er, old) ||
             eval_relformula(rf->r2, sl, sr, pi, el, er, old);
    case Rk::RAllPair: {
      Region gl = il_.eval(rf->gl, sl, el, old ? &old->l : nullptr).as_region();
      Region gr = ir_.eval(rf->gr, sr, er, old ? &old->r : nullptr).as_region();
      Env subl = el, subr = er;
      for (Ref l : gl.elems()) {
        if (l == NULL_REF) continue;
        auto ait = sl.alloct.find(l);
        if (ait == sl.alloct.end() || ait->second != rf->cls) continue;
        auto m = pi.fwd(l);
        if (!m || !gr.contains(*m)) continue;
        auto bit = sr.alloct.find(*m);
        if (bit == sr.alloct.end() || bit->second != rf->cls) continue;
        subl[rf->var] = Value::ref(l);
        subr[rf->var] = Value::ref(*m);
        if (!eval_relformula(rf->r1, sl, sr, pi, subl, subr, old)) return false;
      }
      return true;
    }
    case Rk::RExPairMath: {
      // Bounded witness search: try the math values present in the two
      // states (plus small constants); sound for the corpora we evaluate,
      // where witnesses are stored in ghost state.
      if (rf->mty.k == Ty::Int) {
        std::set<mpz_class> cands;
        collect_ints(sl, el, cands);
        collect_ints(sr, er, cands);
        for (int k = -2; k <= 2; ++k) cands.insert(k);
        Env subl = el, subr = er;
        for (const auto& c : cands) {
          subl[rf->var] = Value::integer(c);
          subr[rf->var] = Value::integer(c);
          if (eval_relformula(rf->r1, sl, sr, pi, subl, subr, old)) return true;
        }
        return false;
      }
      std::vector<IntList> cands;
      collect_lists(sl, el, cands);
      collect_lists(sr, er, cands);
      add_list(cands, IntList());
      Env subl = el, subr = er;
      for (const auto& c : cands) {
        subl[rf->var] = Value::list(c);
        subr[rf->var] = Value::list(c);
        if (eval_relformula(rf->r1, sl, sr, pi, subl, subr, old)) return true;
      }
      return false;
    }
  }
  throw std::logic_error("unreachable relational formula kind");
}

// ---------------------------------------------------------------------------
// Product execution

void RelInterp::eval_product(const ProdNodeP& n, ConcreteState& sl, ConcreteState& sr,
                             RefPerm& pi, Env& el, Env& er, Trace& tl, Trace& tr,
                             long& fuel) const {
  if (--fuel < 0) throw OutOfFuel();
  switch (n->k) {
    case Pk::PSeq:
      for (const auto& sub : n->seq) eval_product(sub, sl, sr, pi, el, er, tl, tr, fuel);
      break;
    case Pk::PLeft:
      il_.exec(n->cmd, sl, el, tl, fuel);
      break;
    case Pk::PRight:
      ir_.exec(n->cmd, sr, er, tr, fuel);
      break;
    case Pk::PAlloc2: {
      Ref rl = il_.allocate(sl, n->cls, n->sp);
      Ref rr = ir_.allocate(sr, n->cls, n->sp);
      tl.allocs.push_back(rl);
      tr.allocs.push_back(rr);
      pi.extend(rl, rr);
      assign_var(n->x, Value::ref(rl), sl, el, tl, n->sp);
      assign_var(n->x, Value::ref(rr), sr, er, tr, n->sp);
      break;
    }
    case Pk::PCall2: {
      std::vector<Value> argsL, argsR;
      for (const auto& a : n->actsL) argsL.push_back(il_.eval(a, sl, el, nullptr, &tl));
      for (const auto& a : n->actsR) argsR.push_back(ir_.eval(a, sr, er, nullptr, &tr));
      auto [vl, vr] = call_bimethod(n->meth, argsL, argsR, sl, sr, pi, tl, tr, fuel);
      if (!n->x.empty()) {
        assign_var(n->x, std::move(vl), sl, el, tl, n->sp);
        assign_var(n->x, std::move(vr), sr, er, tr, n->sp);
      }
      break;
    }
    case Pk::PVar2: {
      el[n->x] = default_value(n->tl);
      er[n->x] = default_value(n->tr);
      eval_product(n->body, sl, sr, pi, el, er, tl, tr, fuel);
      el.erase(n->x);
      er.erase(n->x);
      break;
    }
    case Pk::PIf2: {
      bool bl = il_.eval(n->gl, sl, el, nullptr, &tl).as_bool();
      bool br = ir_.eval(n->gr, sr, er, nullptr, &tr).as_bool();
      if (bl != br)
        throw Fault("alignment", n->sp, "aligned conditional guards disagree");
      if (bl)
        eval_product(n->b1, sl, sr, pi, el, er, tl, tr, fuel);
      else if (n->b2)
        eval_product(n->b2, sl, sr, pi, el, er, tl, tr, fuel);
      break;
    }
    case Pk::PWhile2: {
      while (true) {
        if (--fuel < 0) throw OutOfFuel();
        bool bl = il_.eval(n->gl, sl, el, nullptr, &tl).as_bool();
        bool br = ir_.eval(n->gr, sr, er, nullptr, &tr).as_bool();
        if (!bl && !br) break;
        bool lp = n->alignL && eval_relformula(n->alignL, sl, sr, pi, el, er);
        bool rp = n->alignR && eval_relformula(n->alignR, sl, sr, pi, el, er);
        if (bl && lp) {
          il_.exec(n->bodyL, sl, el, tl, fuel);
        } else if (br && rp) {
          ir_.exec(n->bodyR, sr, er, tr, fuel);
        } else if (bl && br) {
          eval_product(n->body, sl, sr, pi, el, er, tl, tr, fuel);
        } else {
          throw Fault("alignment", n->sp,
                      "aligned loop guards disagree and no one-sided branch applies");
        }
      }
      break;
    }
    case Pk::PAssert:
      if (!eval_relformula(n->rf, sl, sr, pi, el, er))
        throw Fault("assert", n->sp,
                    "relational assertion failed: " + print_relformula(n->rf));
      break;
  }
}

std::pair<Value, Value> RelInterp::call_bimethod(const std::string& m,
                                                 const std::vector<Value>& argsL,
                                                 const std::vector<Value>& argsR,
                                                 ConcreteState& sl, ConcreteState& sr,
                                                 RefPerm& pi, Trace& tl, Trace& tr,
                                                 long& fuel) const {
  auto it = bp_.bimethods.find(m);
  if (it == bp_.bimethods.end())
    throw Fault("no-body", {}, "call to unknown relational method " + m);
  const BiMethodDecl* d = it->second.decl;
  if (!d->body) throw Fault("no-body", d->sp, "relational method " + m + " has no body");
  auto cit = product_cache_.find(m);
  if (cit == product_cache_.end())
    cit = product_cache_.emplace(m, build_product(d->body, &bp_)).first;
  Env el, er;
  for (std::size_t i = 0; i < d->paramsL.size(); ++i) el[d->paramsL[i].name] = argsL[i];
  for (std::size_t i = 0; i < d->paramsR.size(); ++i) er[d->paramsR[i].name] = argsR[i];
  bool retL = d->retL.k != Ty::Unit, retR = d->retR.k != Ty::Unit;
  if (retL) el["result"] = default_value(d->retL);
  if (retR) er["result"] = default_value(d->retR);
  eval_product(cit->second, sl, sr, pi, el, er, tl, tr, fuel);
  return {retL ? el.at("result") : Value::unit(), retR ? er.at("result") : Value::unit()};
}

}  // namespace rv
