#include "encap/encap.hpp"

#include <algorithm>
#include <set>

#include "typecheck/typecheck.hpp"

namespace rv {

const char* obkind_name(ObKind k) {
  switch (k) {
    case ObKind::StaticViolation: return "static-violation";
    case ObKind::Disjointness: return "disjointness-assertion";
    case ObKind::FramesLemma: return "frames-lemma";
    case ObKind::MonotonicityPost: return "monotonicity-post";
  }
  return "?";
}

std::vector<std::pair<const Unit*, std::vector<BndAtom>>> boundaries_of(const Program& p) {
  std::vector<std::pair<const Unit*, std::vector<BndAtom>>> out;
  for (const Unit* u : p.units) {
    if (u->kind != UnitKind::Interface) continue;
    if (u->boundary.empty()) continue;
    out.emplace_back(u, expand_boundary(p, u->boundary));
  }
  return out;
}

namespace {

// One boundary the current method is *not* allowed to touch directly.
struct Fence {
  const Unit* iface;
  const std::vector<BndAtom>* atoms;
};

void collect_vars(const ExprP& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->k == Ex::Var) out.insert(e->str);
  for (const auto& a : e->args) collect_vars(a, out);
}

// Walks one method top to bottom, emitting obligations in source order.
// Every obligation shares a single counter, so the n in encap:<method>:<n>
// is the position of the finding within the method.
struct ClientWalk {
  const std::string& method;
  const std::vector<Fence>& fences;
  std::set<std::string> locals;  // params and var-block names shadow globals
  std::vector<Obligation>& out;
  int n = 0;

  Obligation& push(ObKind k, Span sp) {
    Obligation ob;
    ob.kind = k;
    ob.site = sp;
    ob.method = method;
    ob.label = "encap:" + method + ":" + std::to_string(n++);
    out.push_back(std::move(ob));
    return out.back();
  }

  void var_access(const std::string& x, Span sp, bool is_write) {
    if (locals.count(x)) return;
    for (const auto& fc : fences) {
      for (const auto& a : *fc.atoms) {
        if (a.k != LocKind::Var || a.var != x) continue;
        Obligation& ob = push(ObKind::StaticViolation, sp);
        ob.iface = fc.iface->name;
        ob.message = std::string("client ") + (is_write ? "writes" : "reads") +
                     " boundary variable '" + x + "' of interface " + fc.iface->name;
        break;  // one finding per fence is enough
      }
    }
  }

  // A heap access <recv>.f (or a region image over f). For every boundary
  // atom G`f we must show the access stays outside G. Point accesses get
  // not (recv iin G); region-image reads get (base ** G) << {null}.
  void field_access(const ExprP& recv, const std::string& f, Span sp, bool is_write,
                    const CommandP& at, bool region_image = false) {
    for (const auto& fc : fences) {
      for (const auto& a : *fc.atoms) {
        if (a.k != LocKind::Image || a.field != f) continue;
        Obligation& ob = push(ObKind::Disjointness, sp);
        ob.iface = fc.iface->name;
        ob.cmd = at;
        if (region_image) {
          ob.formula = mk_fsubset(mk_bin(BinOp::Inter, recv, a.region, sp),
                                  mk_rgnlit({mk_null(sp)}, sp), sp);
          ob.message = "region read of field '" + f + "' must not overlap the boundary of " +
                       fc.iface->name;
        } else {
          ob.formula = mk_fnot(mk_fin(recv, a.region, sp), sp);
          ob.message = std::string("heap ") + (is_write ? "write to" : "read of") +
                       " field '" + f + "' must stay outside the boundary of " +
                       fc.iface->name;
        }
      }
    }
  }

  // Reads performed when evaluating e in client code.
  void expr(const ExprP& e, const CommandP& at) {
    if (!e) return;
    switch (e->k) {
      case Ex::Var:
        var_access(e->str, e->sp, false);
        return;
      case Ex::Field:
        expr(e->args[0], at);
        field_access(e->args[0], e->str, e->sp, false, at);
        return;
      case Ex::RgnImg:
        expr(e->args[0], at);
        if (e->str != "any") field_access(e->args[0], e->str, e->sp, false, at, true);
        return;
      default:
        for (const auto& a : e->args) expr(a, at);
        return;
    }
  }

  void cmd(const CommandP& c) {
    if (!c) return;
    switch (c->k) {
      case Ck::Skip:
        return;
      case Ck::Assign:
        var_access(c->x, c->sp, true);
        expr(c->e, c);
        return;
      case Ck::FieldWr:
        var_access(c->x, c->sp, false);  // the receiver is read
        expr(c->e, c);
        field_access(mk_var(c->x, c->sp), c->field, c->sp, true, c);
        return;
      case Ck::Alloc:
        var_access(c->x, c->sp, true);
        return;
      case Ck::Call:
        if (!c->x.empty()) var_access(c->x, c->sp, true);
        for (const auto& a : c->actuals) expr(a, c);
        return;
      case Ck::Seq:
        for (const auto& s : c->seq) cmd(s);
        return;
      case Ck::If:
        expr(c->e, c);
        cmd(c->c1);
        cmd(c->c2);
        return;
      case Ck::While:
        // Invariants are specification text; mentioning the boundary there is
        // how clients reason about it, so only the guard and body are checked.
        expr(c->e, c);
        cmd(c->c1);
        return;
      case Ck::VarBlock: {
        bool fresh = locals.insert(c->x).second;
        cmd(c->c1);
        if (fresh) locals.erase(c->x);
        return;
      }
    }
  }

  // Heap reads inside requires/ensures become pre-state obligations: the
  // mentioned cell must lie outside the boundary when the method is entered.
  // Receivers that use a quantifier-bound variable are skipped; the atom
  // would escape its binder.
  void spec_expr(const ExprP& e, const std::set<std::string>& bound) {
    if (!e) return;
    switch (e->k) {
      case Ex::Field: {
        spec_expr(e->args[0], bound);
        std::set<std::string> fv;
        collect_vars(e->args[0], fv);
        bool captured = std::any_of(fv.begin(), fv.end(),
                                    [&](const std::string& v) { return bound.count(v) > 0; });
        if (!captured) field_access(e->args[0], e->str, e->sp, false, nullptr);
        return;
      }
      case Ex::RgnImg: {
        spec_expr(e->args[0], bound);
        std::set<std::string> fv;
        collect_vars(e->args[0], fv);
        bool captured = std::any_of(fv.begin(), fv.end(),
                                    [&](const std::string& v) { return bound.count(v) > 0; });
        if (!captured && e->str != "any")
          field_access(e->args[0], e->str, e->sp, false, nullptr, true);
        return;
      }
      default:
        for (const auto& a : e->args) spec_expr(a, bound);
        return;
    }
  }

  void spec_formula(const FormulaP& f, std::set<std::string>& bound) {
    if (!f) return;
    switch (f->k) {
      case Fk::FExpr:
        spec_expr(f->e1, bound);
        return;
      case Fk::FIn:
      case Fk::FSubset:
        spec_expr(f->e1, bound);
        spec_expr(f->e2, bound);
        return;
      case Fk::FNot:
        spec_formula(f->f1, bound);
        return;
      case Fk::FAnd:
      case Fk::FOr:
      case Fk::FImp:
        spec_formula(f->f1, bound);
        spec_formula(f->f2, bound);
        return;
      case Fk::FAll:
      case Fk::FExi: {
        spec_expr(f->e2, bound);  // the range region
        bool fresh = bound.insert(f->var).second;
        spec_formula(f->f1, bound);
        if (fresh) bound.erase(f->var);
        return;
      }
      case Fk::FPred:
        for (const auto& a : f->args) spec_expr(a, bound);
        return;
    }
  }
};

std::vector<Fence> fences_for(
    const std::vector<std::pair<const Unit*, std::vector<BndAtom>>>& bs,
    const MethodInfo& mi) {
  std::vector<Fence> fences;
  for (const auto& [iface, atoms] : bs) {
    if (mi.body_owner && mi.body_owner->iface == iface->name) continue;
    if (mi.body_owner == iface) continue;
    fences.push_back({iface, &atoms});
  }
  return fences;
}

}  // namespace

std::vector<Obligation> check_client_accesses(const Program& p, const std::string& method) {
  std::vector<Obligation> out;
  auto it = p.methods.find(method);
  if (it == p.methods.end()) return out;
  const MethodInfo& mi = it->second;
  if (!mi.body || !mi.body->body) return out;

  auto bs = boundaries_of(p);
  auto fences = fences_for(bs, mi);
  if (fences.empty()) return out;

  ClientWalk w{method, fences, {}, out};
  for (const auto& prm : mi.body->params) w.locals.insert(prm.name);
  w.locals.insert("result");

  const MethodDecl* spec = mi.spec ? mi.spec : mi.body;
  std::set<std::string> bound;
  for (const auto& f : spec->req) w.spec_formula(f, bound);
  w.cmd(mi.body->body);
  for (const auto& f : spec->ens) w.spec_formula(f, bound);
  return out;
}

std::vector<Obligation> check_static_writes(const Program& p, const std::string& method) {
  auto all = check_client_accesses(p, method);
  std::vector<Obligation> out;
  for (auto& ob : all)
    if (ob.kind == ObKind::StaticViolation) out.push_back(std::move(ob));
  return out;
}

std::vector<Obligation> gen_disjointness_obligations(const Program& p,
                                                     const std::string& method) {
  auto all = check_client_accesses(p, method);
  std::vector<Obligation> out;
  for (auto& ob : all)
    if (ob.kind == ObKind::Disjointness) out.push_back(std::move(ob));
  return out;
}

namespace {

const Unit* find_unit(const std::vector<const Unit*>& units, const std::string& name) {
  for (const Unit* u : units)
    if (u->name == name) return u;
  return nullptr;
}

Obligation frames_for_inv(const Program& p, const NamedInv* inv, const Unit* owner) {
  Obligation ob;
  ob.kind = ObKind::FramesLemma;
  ob.site = inv->sp;
  ob.method = inv->name;
  ob.label = "encap:frames-" + inv->name + ":0";
  ob.formula = inv->f;
  const Unit* iface = find_unit(p.units, owner->iface);
  if (iface) {
    ob.iface = iface->name;
    ob.bnd = expand_boundary(p, iface->boundary);
  }
  ob.message = "invariant '" + inv->name + "' must depend only on the boundary of " +
               (iface ? iface->name : std::string("<none>"));
  return ob;
}

}  // namespace

std::vector<Obligation> gen_frames_lemma(const Program& p) {
  std::vector<Obligation> out;
  for (const Unit* u : p.units) {
    if (u->kind != UnitKind::Module) continue;
    for (const auto& inv : u->invariants) {
      if (!inv.is_private) continue;
      out.push_back(frames_for_inv(p, &inv, u));
    }
  }
  return out;
}

std::vector<Obligation> gen_frames_lemma_couplings(const BiProgram& bp) {
  std::vector<Obligation> out;
  const Unit* lm = bp.left.target;
  const Unit* rm = bp.right.target;
  const Unit* li = lm ? find_unit(bp.left.units, lm->iface) : nullptr;
  const Unit* ri = rm ? find_unit(bp.right.units, rm->iface) : nullptr;
  for (const CouplingDecl* c : bp.own_couplings()) {
    Obligation ob;
    ob.kind = ObKind::FramesLemma;
    ob.site = c->sp;
    ob.method = c->name;
    ob.label = "encap:frames-" + c->name + ":0";
    ob.rel = c->f;
    if (li) {
      ob.iface = li->name;
      ob.bnd = expand_boundary(bp.left, li->boundary);
    }
    if (ri) ob.bnd_right = expand_boundary(bp.right, ri->boundary);
    ob.message = "coupling '" + c->name + "' must depend only on the two boundaries";
    out.push_back(std::move(ob));
  }
  return out;
}

std::vector<Obligation> gen_monotonicity_post(const Program& p, const std::string& method) {
  std::vector<Obligation> out;
  auto it = p.methods.find(method);
  if (it == p.methods.end()) return out;
  const MethodInfo& mi = it->second;
  if (!mi.body || !mi.body->body || !mi.body_owner) return out;
  if (mi.body_owner->kind != UnitKind::Module) return out;
  const Unit* iface = find_unit(p.units, mi.body_owner->iface);
  if (!iface || iface->boundary.empty()) return out;

  auto atoms = expand_boundary(p, iface->boundary);
  std::set<std::string> seen;
  int n = 0;
  for (const auto& a : atoms) {
    ExprP g;
    if (a.k == LocKind::Var) {
      auto git = p.globals.find(a.var);
      if (git == p.globals.end() || git->second->ty.k != Ty::Rgn) continue;
      g = mk_var(a.var, a.sp);
    } else if (a.k == LocKind::Image) {
      auto fit = p.fields.find(a.field);
      if (fit == p.fields.end() || fit->second.second->ty.k != Ty::Rgn) continue;
      g = mk_rgnimg(a.region, a.field, a.sp);
    } else {
      continue;
    }
    std::string key = print_expr(g);
    if (!seen.insert(key).second) continue;
    Obligation ob;
    ob.kind = ObKind::MonotonicityPost;
    ob.site = mi.body->sp;
    ob.method = method;
    ob.iface = iface->name;
    ob.label = "encap:mono-" + method + ":" + std::to_string(n++);
    ob.formula = mk_fsubset(mk_old(g, a.sp), g, a.sp);
    ob.message = "boundary region " + key + " may only grow";
    out.push_back(std::move(ob));
  }
  return out;
}

EncapReport analyze_encapsulation(const Program& p) {
  EncapReport r;
  for (const auto& [name, mi] : p.methods) {
    if (!mi.body || !mi.body->body) continue;
    for (auto& ob : check_client_accesses(p, name)) {
      if (ob.kind == ObKind::StaticViolation)
        r.static_violations.push_back(std::move(ob));
      else
        r.disjointness.push_back(std::move(ob));
    }
    for (auto& ob : gen_monotonicity_post(p, name)) r.monotonicity.push_back(std::move(ob));
  }
  for (auto& ob : gen_frames_lemma(p)) r.frames.push_back(std::move(ob));
  return r;
}

}  // namespace rv
