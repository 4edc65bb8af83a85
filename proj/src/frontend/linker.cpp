#include "frontend/linker.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "frontend/diag.hpp"

namespace rv {

void UnitStore::add(std::vector<Unit> us) {
  for (auto& u : us) {
    if (find(u.name))
      throw SrcError(u.sp, "duplicate unit name '" + u.name + "'");
    units.push_back(std::move(u));
  }
}

const Unit* UnitStore::find(const std::string& name) const {
  for (auto& u : units)
    if (u.name == name) return &u;
  return nullptr;
}

namespace {

const Unit* need(const UnitStore& store, const std::string& name, Span at) {
  const Unit* u = store.find(name);
  if (!u) throw SrcError(at, "unknown unit '" + name + "'");
  return u;
}

// Depth-first closure over imports (and a module's interface), dependencies
// first. Cycles are an error.
void closure(const UnitStore& store, const Unit* u, std::vector<const Unit*>& out,
             std::set<std::string>& done, std::set<std::string>& onpath) {
  if (done.count(u->name)) return;
  if (!onpath.insert(u->name).second)
    throw SrcError(u->sp, "import cycle through '" + u->name + "'");
  auto visit_dep = [&](const std::string& dep) {
    const Unit* d = need(store, dep, u->sp);
    if (d->kind == UnitKind::Bimodule)
      throw SrcError(u->sp, "'" + u->name + "' cannot import bimodule '" + dep + "'");
    closure(store, d, out, done, onpath);
  };
  if (u->kind == UnitKind::Module && !u->iface.empty()) visit_dep(u->iface);
  for (auto& imp : u->imports) visit_dep(imp);
  onpath.erase(u->name);
  done.insert(u->name);
  out.push_back(u);
}

void build_tables(Program& p) {
  for (const Unit* u : p.units) {
    for (auto& c : u->classes) {
      if (!p.classes.emplace(c.name, &c).second)
        throw SrcError(c.sp, "duplicate class '" + c.name + "'");
      for (auto& f : c.fields) {
        if (f.name == "any")
          throw SrcError(f.sp, "'any' is reserved for the all-fields datagroup");
        if (!p.fields.emplace(f.name, std::make_pair(c.name, &f)).second)
          throw SrcError(f.sp, "duplicate field name '" + f.name +
                                   "' (field names are global)");
      }
    }
    for (auto& g : u->globals) {
      if (!p.globals.emplace(g.name, &g).second)
        throw SrcError(g.sp, "duplicate global '" + g.name + "'");
    }
    for (auto& pr : u->preds) {
      if (!p.preds.emplace(pr.name, std::make_pair(&pr, u)).second)
        throw SrcError(pr.sp, "duplicate predicate '" + pr.name + "'");
    }
  }
  // Fields and globals share a namespace with nothing else, but globals and
  // classes must not collide with each other for readability of specs.
  for (auto& [g, gd] : p.globals)
    if (p.classes.count(g))
      throw SrcError(gd->sp, "global '" + g + "' collides with a class name");

  // Methods: interface declarations carry specs, module declarations carry
  // bodies. A module method matching an interface method must not restate
  // the spec; a module-private method carries its own.
  for (const Unit* u : p.units) {
    for (auto& m : u->methods) {
      MethodInfo& info = p.methods[m.name];
      if (u->kind == UnitKind::Interface) {
        if (m.body) throw SrcError(m.sp, "interface method '" + m.name + "' has a body");
        if (info.spec)
          throw SrcError(m.sp, "method '" + m.name + "' declared in two interfaces");
        info.spec = &m;
        info.spec_owner = u;
      } else {
        if (!m.body)
          throw SrcError(m.sp, "module method '" + m.name + "' is missing a body");
        if (info.body)
          throw SrcError(m.sp, "method '" + m.name + "' implemented twice");
        info.body = &m;
        info.body_owner = u;
        if (info.spec && (!m.req.empty() || !m.ens.empty() || m.eff_given))
          throw SrcError(m.sp, "method '" + m.name +
                                   "' restates a spec already given by its interface");
        if (!info.spec) {
          info.spec = &m;
          info.spec_owner = u;
        }
      }
    }
  }
  // Signature agreement between interface spec and module body.
  for (auto& [name, info] : p.methods) {
    if (!info.spec || !info.body || info.spec == info.body) continue;
    bool ok = info.spec->params.size() == info.body->params.size() &&
              info.spec->ret == info.body->ret;
    if (ok)
      for (size_t i = 0; i < info.spec->params.size(); i++)
        if (info.spec->params[i].name != info.body->params[i].name ||
            !(info.spec->params[i].ty == info.body->params[i].ty))
          ok = false;
    if (!ok)
      throw SrcError(info.body->sp,
                     "signature of '" + name + "' does not match its interface");
  }
}

}  // namespace

bool Program::has_unit(const std::string& name) const {
  for (auto* u : units)
    if (u->name == name) return true;
  return false;
}

std::vector<BndAtom> Program::boundary_of(const Unit* u) const {
  std::vector<BndAtom> out = u->boundary;
  if (u->kind == UnitKind::Module && !u->iface.empty()) {
    for (auto* v : units)
      if (v->name == u->iface)
        out.insert(out.end(), v->boundary.begin(), v->boundary.end());
  }
  return out;
}

std::vector<std::pair<const NamedInv*, const Unit*>> Program::public_invariants() const {
  std::vector<std::pair<const NamedInv*, const Unit*>> out;
  for (auto* u : units)
    for (auto& inv : u->invariants)
      if (!inv.is_private) out.push_back({&inv, u});
  return out;
}

std::vector<const NamedInv*> Program::private_invariants(const Unit* u) const {
  std::vector<const NamedInv*> out;
  auto grab = [&](const Unit* v) {
    for (auto& inv : v->invariants)
      if (inv.is_private) out.push_back(&inv);
  };
  grab(u);
  if (u->kind == UnitKind::Module && !u->iface.empty())
    for (auto* v : units)
      if (v->name == u->iface) grab(v);
  return out;
}

Program link_program(const UnitStore& store, const std::string& target) {
  const Unit* t = need(store, target, Span{});
  if (t->kind == UnitKind::Bimodule)
    throw SrcError(t->sp, "'" + target + "' is a bimodule; it links as a relational target");
  Program p;
  p.target = t;
  std::set<std::string> done, onpath;
  closure(store, t, p.units, done, onpath);
  build_tables(p);
  return p;
}

std::vector<const CouplingDecl*> BiProgram::own_couplings() const {
  std::vector<const CouplingDecl*> out;
  for (auto& c : target->couplings) out.push_back(&c);
  return out;
}

BiProgram link_biprogram(const UnitStore& store, const std::string& target) {
  const Unit* t = need(store, target, Span{});
  if (t->kind != UnitKind::Bimodule)
    throw SrcError(t->sp, "'" + target + "' is not a bimodule");
  BiProgram bp;
  bp.target = t;
  bp.left = link_program(store, t->left);
  bp.right = link_program(store, t->right);

  // Imported bimodules contribute relational method specs (not couplings).
  std::set<std::string> seen;
  std::vector<const Unit*> work;
  std::function<void(const Unit*)> visit = [&](const Unit* b) {
    if (!seen.insert(b->name).second) return;
    for (auto& imp : b->imports) {
      const Unit* d = need(store, imp, b->sp);
      if (d->kind != UnitKind::Bimodule)
        throw SrcError(b->sp, "bimodule '" + b->name + "' imports non-bimodule '" + imp + "'");
      visit(d);
    }
    bp.bimods.push_back(b);
  };
  visit(t);

  for (const Unit* b : bp.bimods)
    for (auto& m : b->bimethods) {
      if (bp.bimethods.count(m.name))
        throw SrcError(m.sp, "relational method '" + m.name + "' declared twice");
      bp.bimethods[m.name] = {&m, b};
    }
  return bp;
}

}  // namespace rv
