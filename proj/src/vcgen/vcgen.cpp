#include "vcgen/vcgen.hpp"

#include <algorithm>
#include <functional>
#include <initializer_list>
#include <optional>
#include <set>
#include <stdexcept>

#include "typecheck/typecheck.hpp"

namespace rv {
namespace {

// ---------------------------------------------------------------------------
// S-expression builders. Terms are plain strings; all structure lives in
// these helpers so the emitting code reads close to the logic.

std::string ap(const std::vector<std::string>& xs) {
  std::string out = "(";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += xs[i];
  }
  out += ')';
  return out;
}

std::string ap(std::initializer_list<std::string> xs) {
  return ap(std::vector<std::string>(xs));
}

std::string sel(const std::string& a, const std::string& i) { return ap({"select", a, i}); }
std::string sto(const std::string& a, const std::string& i, const std::string& v) {
  return ap({"store", a, i, v});
}
std::string eq(const std::string& a, const std::string& b) { return ap({"=", a, b}); }
std::string neq(const std::string& a, const std::string& b) { return ap({"distinct", a, b}); }

std::string fnot(const std::string& a) {
  if (a == "true") return "false";
  if (a == "false") return "true";
  return ap({"not", a});
}

std::string conj(std::vector<std::string> xs) {
  if (std::find(xs.begin(), xs.end(), std::string("false")) != xs.end()) return "false";
  xs.erase(std::remove(xs.begin(), xs.end(), std::string("true")), xs.end());
  if (xs.empty()) return "true";
  if (xs.size() == 1) return xs[0];
  xs.insert(xs.begin(), "and");
  return ap(xs);
}

std::string disj(std::vector<std::string> xs) {
  if (std::find(xs.begin(), xs.end(), std::string("true")) != xs.end()) return "true";
  xs.erase(std::remove(xs.begin(), xs.end(), std::string("false")), xs.end());
  if (xs.empty()) return "false";
  if (xs.size() == 1) return xs[0];
  xs.insert(xs.begin(), "or");
  return ap(xs);
}

std::string impl(const std::string& a, const std::string& b) {
  if (a == "true") return b;
  return ap({"=>", a, b});
}

using Binds = std::vector<std::pair<std::string, std::string>>;

std::string bind_list(const Binds& bs) {
  std::string out = "(";
  for (size_t i = 0; i < bs.size(); ++i) {
    if (i) out += ' ';
    out += "(" + bs[i].first + " " + bs[i].second + ")";
  }
  out += ')';
  return out;
}

std::string forall(const Binds& bs, const std::string& body,
                   const std::vector<std::string>& pats = {}) {
  std::string b = body;
  if (!pats.empty()) {
    std::string ps;
    for (size_t i = 0; i < pats.size(); ++i) {
      if (i) ps += ' ';
      ps += pats[i];
    }
    b = "(! " + body + " :pattern (" + ps + "))";
  }
  return ap({"forall", bind_list(bs), b});
}

std::string exi(const Binds& bs, const std::string& body) {
  return ap({"exists", bind_list(bs), body});
}

std::string runion(const std::string& a, const std::string& b) {
  if (a == "emptyrgn") return b;
  if (b == "emptyrgn") return a;
  return ap({"(_ map or)", a, b});
}

std::string rinter(const std::string& a, const std::string& b) {
  return ap({"(_ map and)", a, b});
}

std::string rdiff(const std::string& a, const std::string& b) {
  return ap({"(_ map and)", a, ap({"(_ map not)", b})});
}

std::string rsubset(const std::string& a, const std::string& b) {
  return ap({"rsubset", a, b});
}

// ---------------------------------------------------------------------------
// Sorts, names, defaults.

std::string cn(const std::string& cls) { return "cn_" + cls; }

std::string sort_of(const Type& t) {
  switch (t.k) {
    case Ty::Int: return "Int";
    case Ty::Bool: return "Bool";
    case Ty::Unit: return "Bool";
    case Ty::Rgn: return "Rgn";
    case Ty::List: return "IntList";
    case Ty::Cls:
    case Ty::Null: return "Ref";
  }
  throw std::logic_error("unreachable type kind");
}

std::string default_term(const Type& t) {
  switch (t.k) {
    case Ty::Int: return "0";
    case Ty::Bool: return "false";
    case Ty::Unit: return "false";
    case Ty::Rgn: return "emptyrgn";
    case Ty::List: return "inil";
    case Ty::Cls:
    case Ty::Null: return "nullref";
  }
  throw std::logic_error("unreachable type kind");
}

enum class Sd { U, L, R };

const char* pref(Sd sd) { return sd == Sd::L ? "L:" : sd == Sd::R ? "R:" : ""; }
const char* sym_tag(Sd sd) { return sd == Sd::L ? "l_" : sd == Sd::R ? "r_" : ""; }

std::string side_name(bool rel, Sd sd, const std::string& base, const std::string& suffix) {
  if (!rel) return base + (suffix.empty() ? "" : "_" + suffix);
  std::string t = sd == Sd::R ? "r" : "l";
  return base + "_" + t + (suffix.empty() ? "" : "_" + suffix);
}

std::string wf_name(bool rel, Sd sd) { return side_name(rel, sd, "wf", ""); }
std::string img_name(bool rel, Sd sd, const std::string& f) {
  return side_name(rel, sd, "img", f);
}
std::string wrf_name(bool rel, Sd sd, const std::string& f) {
  return side_name(rel, sd, "wrf", f);
}
std::string prd_name(bool rel, Sd sd, const std::string& p) {
  return side_name(rel, sd, "prd", p);
}

// ---------------------------------------------------------------------------
// Theory construction.

std::string array_sort(const std::string& v) { return "(Array Ref " + v + ")"; }

// Non-trivial field value sorts used by image functions.
bool has_image(const FieldDecl* fd) { return fd->ty.is_ref() || fd->ty.k == Ty::Rgn; }

void side_theory(Theory& th, const Program& p, bool rel, Sd sd) {
  std::vector<std::string> fields = all_fields(p);

  for (const auto& f : fields) {
    const auto& [cls, fd] = p.fields.at(f);
    std::string vs = sort_of(fd->ty);
    if (has_image(fd)) {
      std::string nm = img_name(rel, sd, f);
      th.blocks.push_back(
          {nm, "(declare-fun " + nm + " ((Array Ref CName) " + array_sort(vs) + " Rgn) Rgn)"});
    }
    {
      std::string nm = wrf_name(rel, sd, f);
      std::string fr = forall({{"p", "Ref"}},
                              impl(conj({eq(sel("at", "p"), cn(cls)), fnot(sel("r", "p"))}),
                                   eq(sel("f1", "p"), sel("f0", "p"))),
                              {sel("f1", "p")});
      th.blocks.push_back({nm, "(define-fun " + nm + " ((at (Array Ref CName)) (f0 " +
                                   array_sort(vs) + ") (f1 " + array_sort(vs) +
                                   ") (r Rgn)) Bool " + fr + ")"});
    }
  }

  // Well-formedness: null is unallocated, reference fields and globals are
  // null or point at a live object of the declared class, region fields and
  // globals contain only null or live references.
  {
    std::string params = "((at (Array Ref CName))";
    std::vector<std::string> clauses = {eq(sel("at", "nullref"), cn("NoClass"))};
    for (size_t i = 0; i < fields.size(); ++i) {
      const auto& [cls, fd] = p.fields.at(fields[i]);
      std::string pn = "f" + std::to_string(i);
      params += " (" + pn + " " + array_sort(sort_of(fd->ty)) + ")";
      if (fd->ty.is_ref()) {
        clauses.push_back(forall(
            {{"p", "Ref"}},
            impl(eq(sel("at", "p"), cn(cls)),
                 disj({eq(sel(pn, "p"), "nullref"),
                       eq(sel("at", sel(pn, "p")), cn(fd->ty.cls))})),
            {sel(pn, "p")}));
      } else if (fd->ty.k == Ty::Rgn) {
        clauses.push_back(forall({{"p", "Ref"}},
                                 impl(eq(sel("at", "p"), cn(cls)),
                                      ap({"rclosed", sel(pn, "p"), "at"})),
                                 {sel(pn, "p")}));
      }
    }
    size_t gi = 0;
    for (const auto& [g, gd] : p.globals) {
      std::string pn = "g" + std::to_string(gi++);
      params += " (" + pn + " " + sort_of(gd->ty) + ")";
      if (gd->ty.is_ref()) {
        clauses.push_back(
            disj({eq(pn, "nullref"), eq(sel("at", pn), cn(gd->ty.cls))}));
      } else if (gd->ty.k == Ty::Rgn) {
        clauses.push_back(ap({"rclosed", pn, "at"}));
      }
    }
    params += ")";
    th.blocks.push_back({wf_name(rel, sd),
                         "(define-fun " + wf_name(rel, sd) + " " + params + " Bool " +
                             conj(clauses) + ")"});
  }

  // Predicates: declarations only; defining axioms are instantiated per
  // ground state tuple at the point of use.
  for (const auto& [nm, pr] : p.preds) {
    const PredicateDecl* pd = pr.first;
    std::string sig = "((Array Ref CName)";
    for (const auto& f : fields) sig += " " + array_sort(sort_of(p.fields.at(f).second->ty));
    for (const auto& [g, gd] : p.globals) sig += " " + sort_of(gd->ty);
    for (const auto& prm : pd->params) sig += " " + sort_of(prm.ty);
    sig += ")";
    std::string fn = prd_name(rel, sd, nm);
    th.blocks.push_back({fn, "(declare-fun " + fn + " " + sig + " Bool)"});
  }
}

Theory theory_common(const std::set<std::string>& classes, bool rel) {
  Theory th;
  std::string cns = "(declare-datatype CName ((cn_NoClass)";
  for (const auto& c : classes) cns += " (" + cn(c) + ")";
  cns += "))";
  th.preamble =
      "(declare-sort Ref 0)\n"
      "(declare-const nullref Ref)\n" +
      cns +
      "\n"
      "(declare-datatype IntList ((inil) (icons (ihd Int) (itl IntList))))\n"
      "(define-sort Rgn () (Array Ref Bool))\n"
      "(define-fun emptyrgn () Rgn ((as const Rgn) false))";
  th.blocks.push_back(
      {"rsubset", "(define-fun rsubset ((a Rgn) (b Rgn)) Bool (= ((_ map or) a b) b))"});
  th.blocks.push_back(
      {"rclosed",
       "(define-fun rclosed ((r Rgn) (at (Array Ref CName))) Bool " +
           forall({{"q", "Ref"}},
                  impl(sel("r", "q"),
                       disj({eq("q", "nullref"), neq(sel("at", "q"), cn("NoClass"))})),
                  {sel("r", "q")}) +
           ")"});
  th.blocks.push_back(
      {"lhd", "(define-fun lhd ((l IntList)) Int (ite ((_ is icons) l) (ihd l) 0))"});
  th.blocks.push_back(
      {"ltl", "(define-fun ltl ((l IntList)) IntList (ite ((_ is icons) l) (itl l) inil))"});
  th.blocks.push_back(
      {"llen",
       "(declare-fun llen (IntList) Int)\n"
       "(assert (= (llen inil) 0))\n"
       "(assert (forall ((h Int) (t IntList)) (! (= (llen (icons h t)) (+ 1 (llen t))) "
       ":pattern ((llen (icons h t))))))\n"
       "(assert (forall ((l IntList)) (! (>= (llen l) 0) :pattern ((llen l)))))"});
  if (rel) {
    std::string fwd = forall(
        {{"p", "Ref"}},
        impl(sel("pd", "p"),
             conj({sel("pr", sel("pf", "p")), eq(sel("pb", sel("pf", "p")), "p"),
                   neq(sel("atl", "p"), cn("NoClass"))})),
        {sel("pd", "p")});
    std::string bwd = forall(
        {{"q", "Ref"}},
        impl(sel("pr", "q"),
             conj({sel("pd", sel("pb", "q")), eq(sel("pf", sel("pb", "q")), "q"),
                   neq(sel("atr", "q"), cn("NoClass"))})),
        {sel("pr", "q")});
    th.blocks.push_back(
        {"pi_ok",
         "(define-fun pi_ok ((pf (Array Ref Ref)) (pb (Array Ref Ref)) (pd Rgn) (pr Rgn) "
         "(atl (Array Ref CName)) (atr (Array Ref CName))) Bool " +
             conj({fnot(sel("pd", "nullref")), fnot(sel("pr", "nullref")), fwd, bwd}) + ")"});
  }
  return th;
}

}  // namespace

Theory build_theory(const Program& p) {
  std::set<std::string> cs;
  for (const auto& [c, cd] : p.classes) cs.insert(c);
  Theory th = theory_common(cs, false);
  side_theory(th, p, false, Sd::U);
  return th;
}

Theory build_theory(const BiProgram& bp) {
  std::set<std::string> cs;
  for (const auto& [c, cd] : bp.left.classes) cs.insert(c);
  for (const auto& [c, cd] : bp.right.classes) cs.insert(c);
  Theory th = theory_common(cs, true);
  side_theory(th, bp.left, true, Sd::L);
  side_theory(th, bp.right, true, Sd::R);
  return th;
}

namespace {

// ---------------------------------------------------------------------------
// Translation state. One St per control-flow path; forks copy it. The script
// accumulates declarations, instantiated axioms, and assumptions in order.

struct St {
  std::map<std::string, std::string> comp;  // at / f_<f> / g_<g>, side-prefixed
  std::map<std::string, std::string> env;   // locals and binders, side-prefixed
  std::map<std::string, Type> envty;
  std::map<std::string, std::string> oldc;  // old() snapshot
  std::map<std::string, std::string> olde;
  std::vector<std::string> script;
  std::set<std::string> inst;  // keys of already-instantiated axioms
};

struct Vx {
  const Program* pl = nullptr;
  const Program* pr = nullptr;
  const BiProgram* bp = nullptr;
  bool rel = false;
  std::string unit, method;
  VcOptions opt;
  std::vector<VC> out;
  std::map<std::string, int> nkind;
  long fresh = 0;

  // Unary verification extras.
  const Unit* owner = nullptr;  // body owner of the method under verification
  bool eff_given = false;
  std::vector<EffAtom> eff;  // expanded caller effects
  std::map<const Command*, std::vector<const Obligation*>> obl_at;
};

const Program& prog(const Vx& vx, Sd sd) { return sd == Sd::R ? *vx.pr : *vx.pl; }

std::string nsym(Vx& vx, St& st, const std::string& base, const std::string& sort) {
  std::string n = base + "!" + std::to_string(vx.fresh++);
  st.script.push_back("(declare-const " + n + " " + sort + ")");
  return n;
}

void assume(St& st, const std::string& t) {
  if (t != "true") st.script.push_back("(assert " + t + ")");
}

void emit_vc(Vx& vx, const St& st, const std::string& kind, const std::string& goal, Span sp,
             std::string label = "") {
  if (goal == "true") return;
  if (label.empty()) {
    int n = vx.nkind[kind]++;
    label = vx.unit + ":" + vx.method + ":" + kind + ":" + std::to_string(n);
  }
  VC vc;
  vc.label = std::move(label);
  vc.kind = kind;
  vc.unit = vx.unit;
  vc.method = vx.method;
  vc.site = sp;
  vc.script = st.script;
  vc.goal = goal;
  vx.out.push_back(std::move(vc));
}

// Assert a goal, then carry it forward as an assumption.
void check(Vx& vx, St& st, const std::string& kind, const std::string& goal, Span sp,
           const std::string& label = "") {
  emit_vc(vx, st, kind, goal, sp, label);
  assume(st, goal);
}

// ---------------------------------------------------------------------------
// Expression and formula translation.

struct Tx {
  Vx& vx;
  St& st;
  Sd sd = Sd::U;
  bool old = false;
  // When set, the base term of every field access is recorded so the caller
  // can emit null-dereference checks (command position only).
  std::vector<std::pair<std::string, Span>>* nulls = nullptr;
};

std::string cval(const Tx& t, const std::string& key) {
  const auto& m = t.old ? t.st.oldc : t.st.comp;
  auto it = m.find(std::string(pref(t.sd)) + key);
  if (it == m.end()) throw std::logic_error("missing state component " + key);
  return it->second;
}

std::string var_term(const Tx& t, const std::string& x) {
  std::string k = std::string(pref(t.sd)) + x;
  const auto& e = t.old ? t.st.olde : t.st.env;
  auto it = e.find(k);
  if (it != e.end()) return it->second;
  return cval(t, "g_" + x);
}

std::string tr_expr(Tx& t, const ExprP& e);

std::string state_tuple_app(const Tx& t, const std::string& fn,
                            const std::vector<std::string>& extra) {
  const Program& p = prog(t.vx, t.sd);
  std::vector<std::string> xs = {fn, cval(t, "at")};
  for (const auto& f : all_fields(p)) xs.push_back(cval(t, "f_" + f));
  for (const auto& [g, gd] : p.globals) xs.push_back(cval(t, "g_" + g));
  for (const auto& x : extra) xs.push_back(x);
  return ap(xs);
}

// Region image of one field, with its defining axiom instantiated for the
// ground (alloct, field map, region) triple on first use in this path.
std::string inst_img(Tx& t, const std::string& f, const std::string& rg) {
  const Program& p = prog(t.vx, t.sd);
  const auto& [cls, fd] = p.fields.at(f);
  std::string at = cval(t, "at");
  std::string fm = cval(t, "f_" + f);
  std::string term = ap({img_name(t.vx.rel, t.sd, f), at, fm, rg});
  std::string key = "I:" + term;
  if (t.st.inst.insert(key).second) {
    std::string qp = "qp!" + std::to_string(t.vx.fresh++);
    std::string qq = "qq!" + std::to_string(t.vx.fresh++);
    std::string hit = fd->ty.k == Ty::Rgn ? sel(sel(fm, qq), qp) : eq(sel(fm, qq), qp);
    std::string ex =
        exi({{qq, "Ref"}}, conj({eq(sel(at, qq), cn(cls)), sel(rg, qq), hit}));
    t.st.script.push_back(
        "(assert " + forall({{qp, "Ref"}}, eq(sel(term, qp), ex), {sel(term, qp)}) + ")");
  }
  return term;
}

std::string tr_formula(Tx& t, const FormulaP& f);

// Predicate application over the current state tuple. The one-step defining
// axiom (quantified over the predicate's parameters only) is instantiated per
// ground tuple; recursive occurrences reuse the same instantiation.
std::string inst_pred(Tx& t, const std::string& name) {
  const Program& p = prog(t.vx, t.sd);
  const PredicateDecl* pd = p.preds.at(name).first;
  std::string fn = prd_name(t.vx.rel, t.sd, name);
  std::string app0 = state_tuple_app(t, fn, {});
  std::string key = "P:" + app0;
  if (!t.st.inst.insert(key).second) return fn;

  Binds binds;
  std::vector<std::string> bnames;
  for (const auto& prm : pd->params) {
    std::string b = "qa!" + std::to_string(t.vx.fresh++);
    binds.push_back({b, sort_of(prm.ty)});
    bnames.push_back(b);
  }

  St tmp;
  tmp.comp = t.old ? t.st.oldc : t.st.comp;
  tmp.oldc = tmp.comp;
  tmp.inst = t.st.inst;
  for (size_t i = 0; i < pd->params.size(); ++i) {
    tmp.env[std::string(pref(t.sd)) + pd->params[i].name] = bnames[i];
    tmp.envty[std::string(pref(t.sd)) + pd->params[i].name] = pd->params[i].ty;
  }
  tmp.olde = tmp.env;
  Tx t2{t.vx, tmp, t.sd, false, nullptr};
  std::string body = tr_formula(t2, pd->body);
  for (auto& l : tmp.script) t.st.script.push_back(std::move(l));
  t.st.inst = tmp.inst;

  std::string appv = state_tuple_app(t, fn, bnames);
  std::string axiom = binds.empty() ? eq(appv, body)
                                    : forall(binds, eq(appv, body), {appv});
  t.st.script.push_back("(assert " + axiom + ")");
  return fn;
}

std::string tr_expr(Tx& t, const ExprP& e) {
  switch (e->k) {
    case Ex::IntLit: return e->str;
    case Ex::BoolLit: return e->b ? "true" : "false";
    case Ex::NullLit: return "nullref";
    case Ex::Var: return var_term(t, e->str);
    case Ex::Field: {
      std::string base = tr_expr(t, e->args[0]);
      if (t.nulls) t.nulls->push_back({base, e->sp});
      return sel(cval(t, "f_" + e->str), base);
    }
    case Ex::Neg: return ap({"-", tr_expr(t, e->args[0])});
    case Ex::NotE: return fnot(tr_expr(t, e->args[0]));
    case Ex::Bin: {
      std::string a = tr_expr(t, e->args[0]);
      std::string b = tr_expr(t, e->args[1]);
      switch (e->op) {
        case BinOp::Add: return ap({"+", a, b});
        case BinOp::Sub: return ap({"-", a, b});
        case BinOp::Mul: return ap({"*", a, b});
        case BinOp::Eq: return eq(a, b);
        case BinOp::Ne: return fnot(eq(a, b));
        case BinOp::Lt: return ap({"<", a, b});
        case BinOp::Le: return ap({"<=", a, b});
        case BinOp::Gt: return ap({">", a, b});
        case BinOp::Ge: return ap({">=", a, b});
        case BinOp::And: return conj({a, b});
        case BinOp::Or: return disj({a, b});
        case BinOp::Union: return runion(a, b);
        case BinOp::Inter: return rinter(a, b);
        case BinOp::Diff: return rdiff(a, b);
      }
      throw std::logic_error("unreachable binop");
    }
    case Ex::Old: {
      Tx t2 = t;
      t2.old = true;
      return tr_expr(t2, e->args[0]);
    }
    case Ex::RgnLit: {
      std::string r = "emptyrgn";
      for (const auto& el : e->args) r = sto(r, tr_expr(t, el), "true");
      return r;
    }
    case Ex::RgnImg: {
      std::string base = tr_expr(t, e->args[0]);
      if (e->str == "any") {
        const Program& p = prog(t.vx, t.sd);
        std::string r = "emptyrgn";
        for (const auto& f : all_fields(p))
          if (has_image(p.fields.at(f).second)) r = runion(r, inst_img(t, f, base));
        return r;
      }
      return inst_img(t, e->str, base);
    }
    case Ex::Nil: return "inil";
    case Ex::Cons:
      return ap({"icons", tr_expr(t, e->args[0]), tr_expr(t, e->args[1])});
    case Ex::Hd: return ap({"lhd", tr_expr(t, e->args[0])});
    case Ex::Tl: return ap({"ltl", tr_expr(t, e->args[0])});
    case Ex::Len: return ap({"llen", tr_expr(t, e->args[0])});
  }
  throw std::logic_error("unreachable expression kind");
}

std::string tr_formula(Tx& t, const FormulaP& f) {
  switch (f->k) {
    case Fk::FExpr: return tr_expr(t, f->e1);
    case Fk::FIn: return sel(tr_expr(t, f->e2), tr_expr(t, f->e1));
    case Fk::FSubset: return rsubset(tr_expr(t, f->e1), tr_expr(t, f->e2));
    case Fk::FNot: return fnot(tr_formula(t, f->f1));
    case Fk::FAnd: return conj({tr_formula(t, f->f1), tr_formula(t, f->f2)});
    case Fk::FOr: return disj({tr_formula(t, f->f1), tr_formula(t, f->f2)});
    case Fk::FImp: return impl(tr_formula(t, f->f1), tr_formula(t, f->f2));
    case Fk::FAll:
    case Fk::FExi: {
      std::string b = "qv!" + std::to_string(t.vx.fresh++);
      std::string range = tr_expr(t, f->e2);
      std::string guard =
          conj({sel(range, b), eq(sel(cval(t, "at"), b), cn(f->cls))});
      std::string key = std::string(pref(t.sd)) + f->var;
      auto saved = t.st.env.find(key) != t.st.env.end()
                       ? std::optional<std::string>(t.st.env[key])
                       : std::nullopt;
      auto savedo = t.st.olde.find(key) != t.st.olde.end()
                        ? std::optional<std::string>(t.st.olde[key])
                        : std::nullopt;
      t.st.env[key] = b;
      t.st.olde[key] = b;
      std::string body = tr_formula(t, f->f1);
      if (saved) t.st.env[key] = *saved; else t.st.env.erase(key);
      if (savedo) t.st.olde[key] = *savedo; else t.st.olde.erase(key);
      if (f->k == Fk::FAll) return forall({{b, "Ref"}}, impl(guard, body));
      return exi({{b, "Ref"}}, conj({guard, body}));
    }
    case Fk::FPred: {
      std::vector<std::string> args;
      for (const auto& a : f->args) args.push_back(tr_expr(t, a));
      std::string fn = inst_pred(t, f->pred);
      Tx t2 = t;  // tuple honors old-ness of the surrounding context
      return state_tuple_app(t2, fn, args);
    }
  }
  throw std::logic_error("unreachable formula kind");
}

// ---------------------------------------------------------------------------
// Relational formula translation.

std::string pi_f(const St& st) { return st.comp.at("pi_f"); }
std::string pi_b(const St& st) { return st.comp.at("pi_b"); }
std::string pi_d(const St& st) { return st.comp.at("pi_d"); }
std::string pi_r(const St& st) { return st.comp.at("pi_r"); }

std::string agree_ref(const St& st, const std::string& l, const std::string& r) {
  return disj({conj({eq(l, "nullref"), eq(r, "nullref")}),
               conj({neq(l, "nullref"), sel(pi_d(st), l), eq(sel(pi_f(st), l), r)})});
}

std::string agree_rgn(Vx& vx, const St& st, const std::string& gl, const std::string& gr) {
  std::string p = "qp!" + std::to_string(vx.fresh++);
  std::string q = "qq!" + std::to_string(vx.fresh++);
  std::string nulls = eq(sel(gl, "nullref"), sel(gr, "nullref"));
  std::string fwd = forall(
      {{p, "Ref"}},
      impl(conj({sel(gl, p), neq(p, "nullref"), sel(pi_d(st), p)}),
           sel(gr, sel(pi_f(st), p))));
  std::string bwd = forall(
      {{q, "Ref"}},
      impl(conj({sel(gr, q), neq(q, "nullref")}),
           conj({sel(pi_r(st), q), sel(gl, sel(pi_b(st), q))})));
  return conj({nulls, fwd, bwd});
}

std::string tr_rel(Vx& vx, St& st, const RelFormulaP& rf) {
  switch (rf->k) {
    case Rk::RAgree: {
      Tx tl{vx, st, Sd::L, false, nullptr};
      Tx tr{vx, st, Sd::R, false, nullptr};
      std::string a = tr_expr(tl, rf->e1);
      std::string b = tr_expr(tr, rf->e2);
      const Type& ty = rf->e1->ty;
      if (ty.is_ref()) return agree_ref(st, a, b);
      if (ty.k == Ty::Rgn) return agree_rgn(vx, st, a, b);
      return eq(a, b);
    }
    case Rk::RLeft: {
      Tx t{vx, st, Sd::L, false, nullptr};
      return tr_formula(t, rf->uf);
    }
    case Rk::RRight: {
      Tx t{vx, st, Sd::R, false, nullptr};
      return tr_formula(t, rf->uf);
    }
    case Rk::RBoth: {
      Tx t1{vx, st, Sd::L, false, nullptr};
      Tx t2{vx, st, Sd::R, false, nullptr};
      return conj({tr_formula(t1, rf->uf), tr_formula(t2, rf->uf)});
    }
    case Rk::RNot: return fnot(tr_rel(vx, st, rf->r1));
    case Rk::RAnd: return conj({tr_rel(vx, st, rf->r1), tr_rel(vx, st, rf->r2)});
    case Rk::ROr: return disj({tr_rel(vx, st, rf->r1), tr_rel(vx, st, rf->r2)});
    case Rk::RImp: return impl(tr_rel(vx, st, rf->r1), tr_rel(vx, st, rf->r2));
    case Rk::RAllPair: {
      Tx tl{vx, st, Sd::L, false, nullptr};
      Tx tr{vx, st, Sd::R, false, nullptr};
      std::string gl = tr_expr(tl, rf->gl);
      std::string gr = tr_expr(tr, rf->gr);
      std::string b = "qv!" + std::to_string(vx.fresh++);
      std::string m = sel(pi_f(st), b);
      std::string guard =
          conj({sel(gl, b), neq(b, "nullref"), eq(sel(cval(tl, "at"), b), cn(rf->cls)),
                sel(pi_d(st), b), sel(gr, m), eq(sel(cval(tr, "at"), m), cn(rf->cls))});
      std::string kl = std::string(pref(Sd::L)) + rf->var;
      std::string kr = std::string(pref(Sd::R)) + rf->var;
      auto sl = st.env.count(kl) ? std::optional<std::string>(st.env[kl]) : std::nullopt;
      auto sr = st.env.count(kr) ? std::optional<std::string>(st.env[kr]) : std::nullopt;
      st.env[kl] = b;
      st.env[kr] = m;
      std::string body = tr_rel(vx, st, rf->r1);
      if (sl) st.env[kl] = *sl; else st.env.erase(kl);
      if (sr) st.env[kr] = *sr; else st.env.erase(kr);
      return forall({{b, "Ref"}}, impl(guard, body));
    }
    case Rk::RExPairMath: {
      std::string b = "qm!" + std::to_string(vx.fresh++);
      std::string kl = std::string(pref(Sd::L)) + rf->var;
      std::string kr = std::string(pref(Sd::R)) + rf->var;
      auto sl = st.env.count(kl) ? std::optional<std::string>(st.env[kl]) : std::nullopt;
      auto sr = st.env.count(kr) ? std::optional<std::string>(st.env[kr]) : std::nullopt;
      st.env[kl] = b;
      st.env[kr] = b;
      std::string body = tr_rel(vx, st, rf->r1);
      if (sl) st.env[kl] = *sl; else st.env.erase(kl);
      if (sr) st.env[kr] = *sr; else st.env.erase(kr);
      return exi({{b, sort_of(rf->mty)}}, body);
    }
  }
  throw std::logic_error("unreachable relational formula kind");
}

// ---------------------------------------------------------------------------
// Syntactic write sets, for loop havoc.

struct Wr {
  std::set<std::string> comps;               // side-prefixed component keys
  std::set<std::pair<int, std::string>> names;  // assigned variable names per side
  std::set<int> all;                         // sides with an unbounded callee
  bool pi = false;
};

void writes_callee(const Program& p, const MethodDecl* spec, Sd sd, Wr& w) {
  std::string pre = pref(sd);
  if (!spec->eff_given) {
    w.all.insert(static_cast<int>(sd));
    return;
  }
  for (const auto& a : expand_effects(p, spec->eff)) {
    if (!a.writes()) continue;
    if (a.k == LocKind::Alloc) w.comps.insert(pre + "at");
    else if (a.k == LocKind::Image) w.comps.insert(pre + "f_" + a.field);
    else if (p.globals.count(a.var)) w.comps.insert(pre + "g_" + a.var);
  }
}

void writes_cmd(const Program& p, Sd sd, const Command* c, Wr& w) {
  if (!c) return;
  std::string pre = pref(sd);
  switch (c->k) {
    case Ck::Skip: return;
    case Ck::Assign: w.names.insert({static_cast<int>(sd), c->x}); return;
    case Ck::FieldWr: w.comps.insert(pre + "f_" + c->field); return;
    case Ck::Alloc: {
      w.comps.insert(pre + "at");
      auto it = p.classes.find(c->cls);
      if (it != p.classes.end())
        for (const auto& fd : it->second->fields) w.comps.insert(pre + "f_" + fd.name);
      w.names.insert({static_cast<int>(sd), c->x});
      return;
    }
    case Ck::Seq:
      for (const auto& s : c->seq) writes_cmd(p, sd, s.get(), w);
      return;
    case Ck::If:
      writes_cmd(p, sd, c->c1.get(), w);
      writes_cmd(p, sd, c->c2.get(), w);
      return;
    case Ck::While: writes_cmd(p, sd, c->c1.get(), w); return;
    case Ck::Call: {
      if (!c->x.empty()) w.names.insert({static_cast<int>(sd), c->x});
      auto it = p.methods.find(c->meth);
      if (it != p.methods.end() && it->second.spec) writes_callee(p, it->second.spec, sd, w);
      return;
    }
    case Ck::VarBlock: writes_cmd(p, sd, c->c1.get(), w); return;
  }
}

void writes_prod(const Vx& vx, const ProdNode* n, Wr& w) {
  if (!n) return;
  switch (n->k) {
    case Pk::PSeq:
      for (const auto& s : n->seq) writes_prod(vx, s.get(), w);
      return;
    case Pk::PLeft: writes_cmd(*vx.pl, Sd::L, n->cmd.get(), w); return;
    case Pk::PRight: writes_cmd(*vx.pr, Sd::R, n->cmd.get(), w); return;
    case Pk::PAlloc2: {
      Command fake;
      fake.k = Ck::Alloc;
      fake.x = n->x;
      fake.cls = n->cls;
      writes_cmd(*vx.pl, Sd::L, &fake, w);
      writes_cmd(*vx.pr, Sd::R, &fake, w);
      w.pi = true;
      return;
    }
    case Pk::PCall2: {
      if (!n->x.empty()) {
        w.names.insert({static_cast<int>(Sd::L), n->x});
        w.names.insert({static_cast<int>(Sd::R), n->x});
      }
      auto il = vx.pl->methods.find(n->meth);
      if (il != vx.pl->methods.end() && il->second.spec)
        writes_callee(*vx.pl, il->second.spec, Sd::L, w);
      auto ir = vx.pr->methods.find(n->meth);
      if (ir != vx.pr->methods.end() && ir->second.spec)
        writes_callee(*vx.pr, ir->second.spec, Sd::R, w);
      w.pi = true;
      return;
    }
    case Pk::PVar2: writes_prod(vx, n->body.get(), w); return;
    case Pk::PIf2:
      writes_prod(vx, n->b1.get(), w);
      writes_prod(vx, n->b2.get(), w);
      return;
    case Pk::PWhile2:
      writes_prod(vx, n->body.get(), w);
      writes_cmd(*vx.pl, Sd::L, n->bodyL.get(), w);
      writes_cmd(*vx.pr, Sd::R, n->bodyR.get(), w);
      return;
    case Pk::PAssert: return;
  }
}

// ---------------------------------------------------------------------------
// Havoc.

std::string comp_sort(const Vx& vx, const std::string& key) {
  Sd sd = Sd::U;
  std::string name = key;
  if (key.rfind("L:", 0) == 0) { sd = Sd::L; name = key.substr(2); }
  else if (key.rfind("R:", 0) == 0) { sd = Sd::R; name = key.substr(2); }
  const Program& p = prog(vx, sd);
  if (name == "at") return "(Array Ref CName)";
  if (name.rfind("f_", 0) == 0)
    return array_sort(sort_of(p.fields.at(name.substr(2)).second->ty));
  if (name.rfind("g_", 0) == 0) return sort_of(p.globals.at(name.substr(2))->ty);
  throw std::logic_error("unknown component " + key);
}

std::string hsym_base(const std::string& key) {
  std::string n = key;
  size_t c = n.find(':');
  if (c != std::string::npos) n = (n[0] == 'L' ? "l_" : "r_") + n.substr(c + 1);
  return n;
}

// Replace one component with a fresh symbol; allocation tables additionally
// keep their already-allocated entries.
void havoc_comp(Vx& vx, St& st, const std::string& key) {
  std::string prev = st.comp.at(key);
  std::string s = nsym(vx, st, hsym_base(key), comp_sort(vx, key));
  if (key == "at" || key.rfind(":at") != std::string::npos) {
    std::string p = "qp!" + std::to_string(vx.fresh++);
    assume(st, forall({{p, "Ref"}},
                      impl(neq(sel(prev, p), cn("NoClass")), eq(sel(s, p), sel(prev, p))),
                      {sel(s, p)}));
  }
  st.comp[key] = s;
}

void assume_local_typing(Vx& vx, St& st, Sd sd, const std::string& sym, const Type& ty) {
  Tx t{vx, st, sd, false, nullptr};
  if (ty.is_ref() && ty.k == Ty::Cls)
    assume(st, disj({eq(sym, "nullref"), eq(sel(cval(t, "at"), sym), cn(ty.cls))}));
  else if (ty.k == Ty::Rgn)
    assume(st, ap({"rclosed", sym, cval(t, "at")}));
}

// Fresh reference permutation extending the current one.
void havoc_pi(Vx& vx, St& st) {
  std::string of = pi_f(st), ob = pi_b(st), od = pi_d(st), orr = pi_r(st);
  std::string nf = nsym(vx, st, "pi_f", "(Array Ref Ref)");
  std::string nb = nsym(vx, st, "pi_b", "(Array Ref Ref)");
  std::string nd = nsym(vx, st, "pi_d", "Rgn");
  std::string nr = nsym(vx, st, "pi_r", "Rgn");
  std::string p = "qp!" + std::to_string(vx.fresh++);
  std::string q = "qq!" + std::to_string(vx.fresh++);
  assume(st, forall({{p, "Ref"}},
                    impl(sel(od, p), conj({sel(nd, p), eq(sel(nf, p), sel(of, p))})),
                    {sel(od, p)}));
  assume(st, forall({{q, "Ref"}}, impl(sel(orr, q), sel(nr, q)), {sel(orr, q)}));
  st.comp["pi_f"] = nf;
  st.comp["pi_b"] = nb;
  st.comp["pi_d"] = nd;
  st.comp["pi_r"] = nr;
  assume(st, ap({"pi_ok", nf, nb, nd, nr, st.comp.at("L:at"), st.comp.at("R:at")}));
}

void havoc_set(Vx& vx, St& st, const Wr& w) {
  std::set<std::string> comps = w.comps;
  for (int s : w.all) {
    Sd sd = static_cast<Sd>(s);
    const Program& p = prog(vx, sd);
    std::string pre = pref(sd);
    comps.insert(pre + "at");
    for (const auto& f : all_fields(p)) comps.insert(pre + "f_" + f);
    for (const auto& [g, gd] : p.globals) comps.insert(pre + "g_" + g);
  }
  for (const auto& [s, name] : w.names) {
    Sd sd = static_cast<Sd>(s);
    std::string key = std::string(pref(sd)) + name;
    if (!st.env.count(key) && prog(vx, sd).globals.count(name))
      comps.insert(std::string(pref(sd)) + "g_" + name);
  }
  for (const auto& key : comps) havoc_comp(vx, st, key);
  for (const auto& [s, name] : w.names) {
    Sd sd = static_cast<Sd>(s);
    std::string key = std::string(pref(sd)) + name;
    auto it = st.env.find(key);
    if (it == st.env.end()) continue;
    const Type& ty = st.envty.at(key);
    std::string sym = nsym(vx, st, "v_" + name, sort_of(ty));
    st.env[key] = sym;
    assume_local_typing(vx, st, sd, sym, ty);
  }
  if (w.pi) havoc_pi(vx, st);
}

// ---------------------------------------------------------------------------
// Effect atom queries.

bool eff_has_alloc(const std::vector<EffAtom>& eff) {
  for (const auto& a : eff)
    if (a.writes() && a.k == LocKind::Alloc) return true;
  return false;
}

bool eff_has_gvar(const std::vector<EffAtom>& eff, const std::string& g) {
  for (const auto& a : eff)
    if (a.writes() && a.k == LocKind::Var && a.var == g) return true;
  return false;
}

std::vector<const EffAtom*> eff_images(const std::vector<EffAtom>& eff, const std::string& f) {
  std::vector<const EffAtom*> out;
  for (const auto& a : eff)
    if (a.writes() && a.k == LocKind::Image && a.field == f) out.push_back(&a);
  return out;
}

std::string wf_term(Vx& vx, St& st, Sd sd) {
  Tx t{vx, st, sd};
  return state_tuple_app(t, wf_name(vx.rel, sd), {});
}

std::string pi_ok_term(const St& st) {
  return ap({"pi_ok", pi_f(st), pi_b(st), pi_d(st), pi_r(st), st.comp.at("L:at"),
             st.comp.at("R:at")});
}

// ---------------------------------------------------------------------------
// Command translation. One continuation per path; forks copy the state.

using Cont = std::function<void(St&)>;

void exec_cmd(Vx& vx, Sd sd, St st, const Command* c, const Cont& k);

void run_seq(Vx& vx, Sd sd, St& st, const std::vector<CommandP>& cs, size_t i, const Cont& k) {
  if (i == cs.size()) {
    k(st);
    return;
  }
  exec_cmd(vx, sd, st, cs[i].get(), [&, i](St& s2) { run_seq(vx, sd, s2, cs, i + 1, k); });
}

void null_checks(Vx& vx, St& st, const std::vector<std::pair<std::string, Span>>& ns) {
  for (const auto& [b, sp] : ns) check(vx, st, "null", neq(b, "nullref"), sp);
}

// Boundary disjointness obligations attached to this command.
void encap_checks(Vx& vx, St& st, Sd sd, const Command* c) {
  if (vx.rel) return;
  auto it = vx.obl_at.find(c);
  if (it == vx.obl_at.end()) return;
  for (const Obligation* ob : it->second) {
    Tx t{vx, st, sd};
    check(vx, st, "encap", tr_formula(t, ob->formula), ob->site, ob->label);
  }
}

void wf_check(Vx& vx, St& st, Sd sd, Span sp) {
  if (vx.rel || vx.opt.trust_wf) return;
  check(vx, st, "wf", wf_term(vx, st, sd), sp);
}

// A heap write is covered when the receiver was fresh (with an alloc atom in
// scope) or lies in some declared write region, denoted in the entry state.
void fieldwr_coverage(Vx& vx, St& st, Sd sd, const std::string& recv, const std::string& f,
                      Span sp) {
  if (vx.rel || !vx.eff_given) return;
  Tx told{vx, st, sd, true, nullptr};
  std::vector<std::string> opts;
  if (eff_has_alloc(vx.eff)) opts.push_back(eq(sel(cval(told, "at"), recv), cn("NoClass")));
  for (const EffAtom* a : eff_images(vx.eff, f)) opts.push_back(sel(tr_expr(told, a->region), recv));
  check(vx, st, "effect", disj(opts), sp);
}

std::string alloc_one(Vx& vx, St& st, Sd sd, const std::string& x, const std::string& cls) {
  const Program& p = prog(vx, sd);
  std::string pre = pref(sd);
  std::string r = nsym(vx, st, std::string(sym_tag(sd)) + "ref", "Ref");
  assume(st, neq(r, "nullref"));
  assume(st, eq(sel(st.comp.at(pre + "at"), r), cn("NoClass")));
  st.comp[pre + "at"] = sto(st.comp.at(pre + "at"), r, cn(cls));
  for (const auto& fd : p.classes.at(cls)->fields) {
    std::string fk = pre + "f_" + fd.name;
    st.comp[fk] = sto(st.comp.at(fk), r, default_term(fd.ty));
  }
  st.env[pre + x] = r;
  st.envty[pre + x] = Type::cl(cls);
  return r;
}

// Callee parameter binding for contract translation.
struct CalleeEnv {
  std::map<std::string, std::string> env;
  std::map<std::string, Type> ty;
};

CalleeEnv callee_env(Sd sd, const std::vector<Param>& ps, const std::vector<std::string>& acts) {
  CalleeEnv ce;
  for (size_t i = 0; i < ps.size(); ++i) {
    ce.env[std::string(pref(sd)) + ps[i].name] = acts[i];
    ce.ty[std::string(pref(sd)) + ps[i].name] = ps[i].ty;
  }
  return ce;
}

// Havoc the callee's declared write footprint on one side: written fields are
// fresh maps framed outside the write regions (denoted at the call site),
// written globals are unconstrained, the allocation table may only grow. A
// callee without an effects clause havocs the whole side.
void callee_havoc(Vx& vx, St& st, Sd sd, const MethodDecl* spec, const CalleeEnv& ce) {
  const Program& p = prog(vx, sd);
  std::string pre = pref(sd);
  if (!spec->eff_given) {
    Wr w;
    w.all.insert(static_cast<int>(sd));
    havoc_set(vx, st, w);
    return;
  }
  std::map<std::string, std::vector<std::string>> freg;
  bool allocs = false;
  std::set<std::string> gw;
  auto saveE = st.env;
  auto saveTy = st.envty;
  st.env = ce.env;
  st.envty = ce.ty;
  for (const auto& a : expand_effects(p, spec->eff)) {
    if (!a.writes()) continue;
    if (a.k == LocKind::Alloc) {
      allocs = true;
    } else if (a.k == LocKind::Var) {
      if (p.globals.count(a.var)) gw.insert(a.var);
    } else {
      Tx tc{vx, st, sd};
      freg[a.field].push_back(tr_expr(tc, a.region));
    }
  }
  st.env = saveE;
  st.envty = saveTy;
  std::string at_pre = st.comp.at(pre + "at");
  if (allocs) havoc_comp(vx, st, pre + "at");
  for (const auto& g : gw) havoc_comp(vx, st, pre + "g_" + g);
  for (const auto& [f, rs] : freg) {
    std::string f_pre = st.comp.at(pre + "f_" + f);
    std::string r = "emptyrgn";
    for (const auto& x : rs) r = runion(r, x);
    havoc_comp(vx, st, pre + "f_" + f);
    assume(st, ap({wrf_name(vx.rel, sd, f), at_pre, f_pre, st.comp.at(pre + "f_" + f), r}));
  }
}

// Assume one side's postcondition, with old() resolved to the call point.
void assume_callee_ens(Vx& vx, St& st, Sd sd, const MethodDecl* spec, const CalleeEnv& ce,
                       const std::map<std::string, std::string>& preC, const std::string& ret) {
  auto saveE = st.env;
  auto saveTy = st.envty;
  auto saveOc = st.oldc;
  auto saveOe = st.olde;
  st.env = ce.env;
  st.envty = ce.ty;
  if (!ret.empty()) {
    st.env[std::string(pref(sd)) + "result"] = ret;
    st.envty[std::string(pref(sd)) + "result"] = spec->ret;
  }
  st.oldc = preC;
  st.olde = st.env;
  for (const auto& e : spec->ens) {
    Tx te{vx, st, sd};
    assume(st, tr_formula(te, e));
  }
  st.env = saveE;
  st.envty = saveTy;
  st.oldc = saveOc;
  st.olde = saveOe;
}

void exec_call(Vx& vx, Sd sd, St& st, const Command* c) {
  const Program& p = prog(vx, sd);
  const MethodInfo& mi = p.methods.at(c->meth);
  const MethodDecl* spec = mi.spec;
  std::string pre = pref(sd);

  encap_checks(vx, st, sd, c);
  std::vector<std::pair<std::string, Span>> ns;
  Tx t{vx, st, sd, false, vx.rel ? nullptr : &ns};
  std::vector<std::string> acts;
  for (const auto& a : c->actuals) acts.push_back(tr_expr(t, a));
  null_checks(vx, st, ns);

  CalleeEnv ce = callee_env(sd, spec->params, acts);

  // Caller obligations: the callee's precondition and, at module boundaries,
  // the invariants that are supposed to hold whenever control transfers.
  {
    auto saveE = st.env;
    auto saveTy = st.envty;
    st.env = ce.env;
    st.envty = ce.ty;
    for (const auto& r : spec->req) {
      Tx tq{vx, st, sd};
      check(vx, st, "call-pre", tr_formula(tq, r), c->sp);
    }
    st.env = saveE;
    st.envty = saveTy;
  }
  if (!vx.rel) {
    for (const auto& [inv, u] : p.public_invariants()) {
      Tx ti{vx, st, sd};
      check(vx, st, "call-pre", tr_formula(ti, inv->f), c->sp);
    }
    for (const NamedInv* inv : p.private_invariants(vx.owner)) {
      Tx ti{vx, st, sd};
      check(vx, st, "call-pre", tr_formula(ti, inv->f), c->sp);
    }
  }

  // Caller effect coverage: everything the callee may write must fall inside
  // the caller's own declared writes, denoted at entry.
  if (!vx.rel && vx.eff_given) {
    if (!spec->eff_given) {
      check(vx, st, "effect", "false", c->sp);
    } else {
      for (const auto& a : expand_effects(p, spec->eff)) {
        if (!a.writes()) continue;
        if (a.k == LocKind::Alloc) {
          if (!eff_has_alloc(vx.eff)) check(vx, st, "effect", "false", c->sp);
        } else if (a.k == LocKind::Var) {
          if (p.globals.count(a.var) && !eff_has_gvar(vx.eff, a.var))
            check(vx, st, "effect", "false", c->sp);
        } else {
          auto saveE = st.env;
          auto saveTy = st.envty;
          st.env = ce.env;
          st.envty = ce.ty;
          Tx tc{vx, st, sd};
          std::string rc = tr_expr(tc, a.region);
          st.env = saveE;
          st.envty = saveTy;
          Tx told{vx, st, sd, true, nullptr};
          std::string qc = "qp!" + std::to_string(vx.fresh++);
          std::vector<std::string> opts;
          if (eff_has_alloc(vx.eff))
            opts.push_back(eq(sel(cval(told, "at"), qc), cn("NoClass")));
          for (const EffAtom* ca : eff_images(vx.eff, a.field))
            opts.push_back(sel(tr_expr(told, ca->region), qc));
          std::string goal = forall(
              {{qc, "Ref"}}, impl(conj({sel(rc, qc), neq(qc, "nullref")}), disj(opts)));
          check(vx, st, "effect", goal, c->sp);
        }
      }
    }
  }

  auto preC = st.comp;
  callee_havoc(vx, st, sd, spec, ce);

  std::string ret;
  if (spec->ret.k != Ty::Unit) {
    ret = nsym(vx, st, std::string(sym_tag(sd)) + "ret", sort_of(spec->ret));
    assume_local_typing(vx, st, sd, ret, spec->ret);
  }

  assume(st, wf_term(vx, st, sd));
  assume_callee_ens(vx, st, sd, spec, ce, preC, ret);
  for (const auto& [inv, u] : p.public_invariants()) {
    Tx ti{vx, st, sd};
    assume(st, tr_formula(ti, inv->f));
  }
  if (!vx.rel) {
    for (const NamedInv* inv : p.private_invariants(vx.owner)) {
      Tx ti{vx, st, sd};
      assume(st, tr_formula(ti, inv->f));
    }
  }
  if (!c->x.empty() && !ret.empty()) st.env[pre + c->x] = ret;
}

void exec_while(Vx& vx, Sd sd, St& st, const Command* c, const Cont& k) {
  const Program& p = prog(vx, sd);
  {
    std::vector<std::pair<std::string, Span>> ns;
    Tx t{vx, st, sd, false, vx.rel ? nullptr : &ns};
    tr_expr(t, c->e);
    null_checks(vx, st, ns);
  }
  std::vector<FormulaP> invs = c->invs;
  for (const auto& [inv, u] : p.public_invariants()) invs.push_back(inv->f);
  if (!vx.rel)
    for (const NamedInv* inv : p.private_invariants(vx.owner)) invs.push_back(inv->f);

  auto assert_invs = [&](St& s, const std::string& kind) {
    for (const auto& f : invs) {
      Tx ti{vx, s, sd};
      check(vx, s, kind, tr_formula(ti, f), c->sp);
    }
    if (!vx.rel && !vx.opt.trust_wf) check(vx, s, kind, wf_term(vx, s, sd), c->sp);
  };
  auto assume_invs = [&](St& s) {
    for (const auto& f : invs) {
      Tx ti{vx, s, sd};
      assume(s, tr_formula(ti, f));
    }
    assume(s, wf_term(vx, s, sd));
  };

  assert_invs(st, "loop-init");
  Wr w;
  writes_cmd(p, sd, c->c1.get(), w);
  havoc_set(vx, st, w);
  assume_invs(st);

  std::vector<std::pair<std::string, Span>> ns;
  Tx tg{vx, st, sd, false, vx.rel ? nullptr : &ns};
  std::string g = tr_expr(tg, c->e);
  null_checks(vx, st, ns);
  {
    St body = st;
    assume(body, g);
    exec_cmd(vx, sd, std::move(body), c->c1.get(),
             [&](St& s2) { assert_invs(s2, "loop-inv"); });
  }
  assume(st, fnot(g));
  k(st);
}

void exec_cmd(Vx& vx, Sd sd, St st, const Command* c, const Cont& k) {
  if (!c) {
    k(st);
    return;
  }
  const Program& p = prog(vx, sd);
  std::string pre = pref(sd);
  switch (c->k) {
    case Ck::Skip: k(st); return;
    case Ck::Assign: {
      encap_checks(vx, st, sd, c);
      std::vector<std::pair<std::string, Span>> ns;
      Tx t{vx, st, sd, false, vx.rel ? nullptr : &ns};
      std::string rhs = tr_expr(t, c->e);
      null_checks(vx, st, ns);
      std::string key = pre + c->x;
      if (st.env.count(key)) {
        st.env[key] = rhs;
      } else {
        if (!vx.rel && vx.eff_given && !eff_has_gvar(vx.eff, c->x))
          check(vx, st, "effect", "false", c->sp);
        st.comp[pre + "g_" + c->x] = rhs;
        const GlobalDecl* gd = p.globals.at(c->x);
        if (gd->ty.is_ref() || gd->ty.k == Ty::Rgn) wf_check(vx, st, sd, c->sp);
      }
      k(st);
      return;
    }
    case Ck::FieldWr: {
      encap_checks(vx, st, sd, c);
      Tx t0{vx, st, sd};
      std::string recv = var_term(t0, c->x);
      std::vector<std::pair<std::string, Span>> ns;
      Tx t{vx, st, sd, false, vx.rel ? nullptr : &ns};
      std::string rhs = tr_expr(t, c->e);
      null_checks(vx, st, ns);
      if (!vx.rel) check(vx, st, "null", neq(recv, "nullref"), c->sp);
      fieldwr_coverage(vx, st, sd, recv, c->field, c->sp);
      std::string fk = pre + "f_" + c->field;
      st.comp[fk] = sto(st.comp.at(fk), recv, rhs);
      const FieldDecl* fd = p.fields.at(c->field).second;
      if (fd->ty.is_ref() || fd->ty.k == Ty::Rgn) wf_check(vx, st, sd, c->sp);
      k(st);
      return;
    }
    case Ck::Alloc: {
      if (!vx.rel && vx.eff_given && !eff_has_alloc(vx.eff))
        check(vx, st, "effect", "false", c->sp);
      alloc_one(vx, st, sd, c->x, c->cls);
      k(st);
      return;
    }
    case Ck::Seq: run_seq(vx, sd, st, c->seq, 0, k); return;
    case Ck::If: {
      std::vector<std::pair<std::string, Span>> ns;
      Tx t{vx, st, sd, false, vx.rel ? nullptr : &ns};
      std::string g = tr_expr(t, c->e);
      null_checks(vx, st, ns);
      {
        St a = st;
        assume(a, g);
        exec_cmd(vx, sd, std::move(a), c->c1.get(), k);
      }
      assume(st, fnot(g));
      exec_cmd(vx, sd, std::move(st), c->c2.get(), k);
      return;
    }
    case Ck::While: exec_while(vx, sd, st, c, k); return;
    case Ck::Call:
      exec_call(vx, sd, st, c);
      k(st);
      return;
    case Ck::VarBlock: {
      std::string key = pre + c->x;
      st.env[key] = default_term(c->vty);
      st.envty[key] = c->vty;
      exec_cmd(vx, sd, std::move(st), c->c1.get(), k);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Method-level translation, unary.

void declare_state(Vx& vx, St& st, Sd sd) {
  const Program& p = prog(vx, sd);
  std::string pre = pref(sd);
  std::string tag = sym_tag(sd);
  st.comp[pre + "at"] = nsym(vx, st, tag + "at", "(Array Ref CName)");
  for (const auto& f : all_fields(p))
    st.comp[pre + "f_" + f] =
        nsym(vx, st, tag + "f_" + f, array_sort(sort_of(p.fields.at(f).second->ty)));
  for (const auto& [g, gd] : p.globals)
    st.comp[pre + "g_" + g] = nsym(vx, st, tag + "g_" + g, sort_of(gd->ty));
}

std::vector<std::string> bind_params(Vx& vx, St& st, Sd sd, const std::vector<Param>& ps) {
  std::vector<std::string> syms;
  for (const auto& prm : ps) {
    std::string s = nsym(vx, st, std::string(sym_tag(sd)) + "p_" + prm.name, sort_of(prm.ty));
    st.env[std::string(pref(sd)) + prm.name] = s;
    st.envty[std::string(pref(sd)) + prm.name] = prm.ty;
    assume_local_typing(vx, st, sd, s, prm.ty);
    syms.push_back(s);
  }
  return syms;
}

void frame_posts(Vx& vx, St& st, Span sp) {
  if (!vx.eff_given) return;
  const Program& p = *vx.pl;
  Tx told{vx, st, Sd::U, true, nullptr};
  for (const auto& f : all_fields(p)) {
    std::string cur = st.comp.at("f_" + f);
    std::string ent = st.oldc.at("f_" + f);
    if (cur == ent) continue;
    std::string r = "emptyrgn";
    for (const EffAtom* a : eff_images(vx.eff, f)) r = runion(r, tr_expr(told, a->region));
    check(vx, st, "frame", ap({wrf_name(false, Sd::U, f), st.oldc.at("at"), ent, cur, r}), sp);
  }
  for (const auto& [g, gd] : p.globals) {
    std::string cur = st.comp.at("g_" + g);
    std::string ent = st.oldc.at("g_" + g);
    if (cur == ent || eff_has_gvar(vx.eff, g)) continue;
    check(vx, st, "frame", eq(cur, ent), sp);
  }
  if (!eff_has_alloc(vx.eff)) {
    std::string cur = st.comp.at("at");
    std::string ent = st.oldc.at("at");
    if (cur != ent) check(vx, st, "frame", eq(cur, ent), sp);
  }
}

}  // namespace

std::vector<VC> gen_unary_vcs(const Program& p, const std::string& method,
                              const VcOptions& opt) {
  auto mit = p.methods.find(method);
  if (mit == p.methods.end() || !mit->second.body || !mit->second.body->body) return {};
  const MethodInfo& mi = mit->second;
  const MethodDecl* spec = mi.spec;

  Vx vx;
  vx.pl = &p;
  vx.unit = p.target->name;
  vx.method = method;
  vx.opt = opt;
  vx.owner = mi.body_owner;
  vx.eff_given = spec->eff_given;
  if (spec->eff_given) vx.eff = expand_effects(p, spec->eff);

  std::vector<Obligation> obs = check_client_accesses(p, method);
  std::vector<Obligation> mono = gen_monotonicity_post(p, method);
  std::vector<const Obligation*> entry_obs;
  for (const auto& ob : obs) {
    if (ob.kind != ObKind::Disjointness) continue;
    if (ob.cmd) vx.obl_at[ob.cmd.get()].push_back(&ob);
    else entry_obs.push_back(&ob);
  }

  St st;
  declare_state(vx, st, Sd::U);
  assume(st, wf_term(vx, st, Sd::U));
  bind_params(vx, st, Sd::U, spec->params);
  if (spec->ret.k != Ty::Unit) {
    st.env["result"] = default_term(spec->ret);
    st.envty["result"] = spec->ret;
  }
  for (const auto& r : spec->req) {
    Tx t{vx, st, Sd::U};
    assume(st, tr_formula(t, r));
  }
  for (const auto& [inv, u] : p.public_invariants()) {
    Tx t{vx, st, Sd::U};
    assume(st, tr_formula(t, inv->f));
  }
  for (const NamedInv* inv : p.private_invariants(vx.owner)) {
    Tx t{vx, st, Sd::U};
    assume(st, tr_formula(t, inv->f));
  }
  st.oldc = st.comp;
  st.olde = st.env;
  for (const Obligation* ob : entry_obs) {
    Tx t{vx, st, Sd::U};
    check(vx, st, "encap", tr_formula(t, ob->formula), ob->site, ob->label);
  }

  exec_cmd(vx, Sd::U, st, mi.body->body.get(), [&](St& s) {
    for (const auto& e : spec->ens) {
      Tx t{vx, s, Sd::U};
      check(vx, s, "post", tr_formula(t, e), spec->sp);
    }
    for (const auto& [inv, u] : p.public_invariants()) {
      Tx t{vx, s, Sd::U};
      check(vx, s, "post", tr_formula(t, inv->f), inv->sp);
    }
    for (const NamedInv* inv : p.private_invariants(vx.owner)) {
      Tx t{vx, s, Sd::U};
      check(vx, s, "post", tr_formula(t, inv->f), inv->sp);
    }
    frame_posts(vx, s, spec->sp);
    for (const auto& ob : mono) {
      Tx t{vx, s, Sd::U};
      check(vx, s, "mono", tr_formula(t, ob.formula), ob.site, ob.label);
    }
  });
  return std::move(vx.out);
}

namespace {

// ---------------------------------------------------------------------------
// Product translation, relational.

void exec_prod(Vx& vx, St st, const ProdNode* n, const Cont& k);

void run_pseq(Vx& vx, St& st, const std::vector<ProdNodeP>& s, size_t i, const Cont& k) {
  if (i == s.size()) {
    k(st);
    return;
  }
  exec_prod(vx, st, s[i].get(), [&, i](St& s2) { run_pseq(vx, s2, s, i + 1, k); });
}

// Run a fork only when its path condition is not syntactically absurd.
void fork(const St& st, const std::string& cond, const std::function<void(St&)>& go) {
  if (cond == "false") return;
  St a = st;
  assume(a, cond);
  go(a);
}

void exec_pwhile(Vx& vx, St& st, const ProdNode* n, const Cont& k) {
  RelFormulaP adq = adequacy_invariant(n->gl, n->gr, n->alignL, n->alignR);
  std::vector<RelFormulaP> rinvs = n->rinvs;
  rinvs.push_back(adq);

  auto assert_invs = [&](St& s, const std::string& kind) {
    for (const auto& rf : rinvs) check(vx, s, kind, tr_rel(vx, s, rf), n->sp);
    for (Sd sd : {Sd::L, Sd::R}) {
      for (const auto& [inv, u] : prog(vx, sd).public_invariants()) {
        Tx t{vx, s, sd};
        check(vx, s, kind, tr_formula(t, inv->f), n->sp);
      }
    }
  };
  auto assume_invs = [&](St& s) {
    for (const auto& rf : rinvs) assume(s, tr_rel(vx, s, rf));
    for (Sd sd : {Sd::L, Sd::R}) {
      for (const auto& [inv, u] : prog(vx, sd).public_invariants()) {
        Tx t{vx, s, sd};
        assume(s, tr_formula(t, inv->f));
      }
      assume(s, wf_term(vx, s, sd));
    }
    assume(s, pi_ok_term(s));
  };

  assert_invs(st, "loop-init");
  Wr w;
  writes_prod(vx, n, w);
  havoc_set(vx, st, w);
  assume_invs(st);

  Tx tl{vx, st, Sd::L};
  Tx tr{vx, st, Sd::R};
  std::string gl = tr_expr(tl, n->gl);
  std::string gr = tr_expr(tr, n->gr);
  std::string lsel = n->alignL ? tr_rel(vx, st, n->alignL) : std::string("false");
  std::string rsel = n->alignR ? tr_rel(vx, st, n->alignR) : std::string("false");
  std::string lgo = conj({gl, lsel});
  std::string rgo = conj({gr, rsel});

  // One-sided iterations take priority on the left, then the right; the
  // aligned body runs when neither selector fires and both guards hold.
  fork(st, lgo, [&](St& a) {
    exec_cmd(vx, Sd::L, std::move(a), n->bodyL.get(),
             [&](St& s2) { assert_invs(s2, "loop-inv"); });
  });
  fork(st, conj({fnot(lgo), rgo}), [&](St& a) {
    exec_cmd(vx, Sd::R, std::move(a), n->bodyR.get(),
             [&](St& s2) { assert_invs(s2, "loop-inv"); });
  });
  fork(st, conj({fnot(lgo), fnot(rgo), gl, gr}), [&](St& a) {
    exec_prod(vx, std::move(a), n->body.get(), [&](St& s2) { assert_invs(s2, "loop-inv"); });
  });
  assume(st, conj({fnot(gl), fnot(gr)}));
  k(st);
}

void exec_pcall2(Vx& vx, St& st, const ProdNode* n) {
  const BiMethodInfo& bmi = vx.bp->bimethods.at(n->meth);
  const BiMethodDecl* bd = bmi.decl;
  const MethodDecl* ls = vx.pl->methods.at(n->meth).spec;
  const MethodDecl* rs = vx.pr->methods.at(n->meth).spec;

  Tx tl{vx, st, Sd::L};
  Tx tr{vx, st, Sd::R};
  std::vector<std::string> al, ar;
  for (const auto& a : n->actsL) al.push_back(tr_expr(tl, a));
  for (const auto& a : n->actsR) ar.push_back(tr_expr(tr, a));

  CalleeEnv ceL = callee_env(Sd::L, ls->params, al);
  CalleeEnv ceR = callee_env(Sd::R, rs->params, ar);
  CalleeEnv ceRel = callee_env(Sd::L, bd->paramsL, al);
  {
    CalleeEnv r = callee_env(Sd::R, bd->paramsR, ar);
    ceRel.env.insert(r.env.begin(), r.env.end());
    ceRel.ty.insert(r.ty.begin(), r.ty.end());
  }

  // Both unary preconditions and the relational one.
  auto with_env = [&](const CalleeEnv& ce, const std::function<void()>& go) {
    auto saveE = st.env;
    auto saveTy = st.envty;
    st.env = ce.env;
    st.envty = ce.ty;
    go();
    st.env = saveE;
    st.envty = saveTy;
  };
  with_env(ceL, [&] {
    for (const auto& r : ls->req) {
      Tx t{vx, st, Sd::L};
      check(vx, st, "call-pre", tr_formula(t, r), n->sp);
    }
  });
  with_env(ceR, [&] {
    for (const auto& r : rs->req) {
      Tx t{vx, st, Sd::R};
      check(vx, st, "call-pre", tr_formula(t, r), n->sp);
    }
  });
  with_env(ceRel, [&] {
    for (const auto& r : bd->req) check(vx, st, "call-pre", tr_rel(vx, st, r), n->sp);
  });

  // Self-bimodule calls must re-establish the coupling at the boundary.
  bool selfcall = bmi.owner == vx.bp->target;
  if (selfcall) {
    for (const CouplingDecl* c : vx.bp->own_couplings())
      check(vx, st, "call-pre", tr_rel(vx, st, c->f), n->sp);
  }

  auto preC = st.comp;
  callee_havoc(vx, st, Sd::L, ls, ceL);
  callee_havoc(vx, st, Sd::R, rs, ceR);
  havoc_pi(vx, st);

  std::string retL, retR;
  if (ls->ret.k != Ty::Unit) {
    retL = nsym(vx, st, "l_ret", sort_of(ls->ret));
    assume_local_typing(vx, st, Sd::L, retL, ls->ret);
  }
  if (rs->ret.k != Ty::Unit) {
    retR = nsym(vx, st, "r_ret", sort_of(rs->ret));
    assume_local_typing(vx, st, Sd::R, retR, rs->ret);
  }

  assume(st, wf_term(vx, st, Sd::L));
  assume(st, wf_term(vx, st, Sd::R));
  assume_callee_ens(vx, st, Sd::L, ls, ceL, preC, retL);
  assume_callee_ens(vx, st, Sd::R, rs, ceR, preC, retR);
  {
    auto saveE = st.env;
    auto saveTy = st.envty;
    auto saveOc = st.oldc;
    auto saveOe = st.olde;
    st.env = ceRel.env;
    st.envty = ceRel.ty;
    if (!retL.empty()) st.env["L:result"] = retL;
    if (!retR.empty()) st.env["R:result"] = retR;
    st.oldc = preC;
    st.olde = st.env;
    for (const auto& e : bd->ens) assume(st, tr_rel(vx, st, e));
    st.env = saveE;
    st.envty = saveTy;
    st.oldc = saveOc;
    st.olde = saveOe;
  }
  for (Sd sd : {Sd::L, Sd::R}) {
    for (const auto& [inv, u] : prog(vx, sd).public_invariants()) {
      Tx t{vx, st, sd};
      assume(st, tr_formula(t, inv->f));
    }
  }
  if (selfcall) {
    for (const CouplingDecl* c : vx.bp->own_couplings()) assume(st, tr_rel(vx, st, c->f));
  }
  if (!n->x.empty()) {
    if (!retL.empty()) st.env["L:" + n->x] = retL;
    if (!retR.empty()) st.env["R:" + n->x] = retR;
  }
}

void exec_prod(Vx& vx, St st, const ProdNode* n, const Cont& k) {
  if (!n) {
    k(st);
    return;
  }
  switch (n->k) {
    case Pk::PSeq: run_pseq(vx, st, n->seq, 0, k); return;
    case Pk::PLeft: exec_cmd(vx, Sd::L, std::move(st), n->cmd.get(), k); return;
    case Pk::PRight: exec_cmd(vx, Sd::R, std::move(st), n->cmd.get(), k); return;
    case Pk::PAssert: {
      check(vx, st, "align", tr_rel(vx, st, n->rf), n->sp);
      k(st);
      return;
    }
    case Pk::PAlloc2: {
      std::string rl = alloc_one(vx, st, Sd::L, n->x, n->cls);
      std::string rr = alloc_one(vx, st, Sd::R, n->x, n->cls);
      st.comp["pi_f"] = sto(pi_f(st), rl, rr);
      st.comp["pi_b"] = sto(pi_b(st), rr, rl);
      st.comp["pi_d"] = sto(pi_d(st), rl, "true");
      st.comp["pi_r"] = sto(pi_r(st), rr, "true");
      assume(st, pi_ok_term(st));
      k(st);
      return;
    }
    case Pk::PCall2:
      exec_pcall2(vx, st, n);
      k(st);
      return;
    case Pk::PVar2: {
      st.env["L:" + n->x] = default_term(n->tl);
      st.envty["L:" + n->x] = n->tl;
      st.env["R:" + n->x] = default_term(n->tr);
      st.envty["R:" + n->x] = n->tr;
      exec_prod(vx, std::move(st), n->body.get(), k);
      return;
    }
    case Pk::PIf2: {
      Tx tl{vx, st, Sd::L};
      Tx tr{vx, st, Sd::R};
      std::string gl = tr_expr(tl, n->gl);
      std::string gr = tr_expr(tr, n->gr);
      fork(st, conj({gl, gr}),
           [&](St& a) { exec_prod(vx, std::move(a), n->b1.get(), k); });
      fork(st, conj({fnot(gl), fnot(gr)}),
           [&](St& a) { exec_prod(vx, std::move(a), n->b2.get(), k); });
      return;
    }
    case Pk::PWhile2: exec_pwhile(vx, st, n, k); return;
  }
}

}  // namespace

std::vector<VC> gen_relational_vcs(const BiProgram& bp, const std::string& bimethod,
                                   const VcOptions& opt) {
  auto bit = bp.bimethods.find(bimethod);
  if (bit == bp.bimethods.end() || bit->second.owner != bp.target) return {};
  const BiMethodInfo& bmi = bit->second;
  ProdNodeP prod = build_product(bmi.decl->body, &bp);

  Vx vx;
  vx.pl = &bp.left;
  vx.pr = &bp.right;
  vx.bp = &bp;
  vx.rel = true;
  vx.unit = bp.target->name;
  vx.method = bimethod;
  vx.opt = opt;

  St st;
  declare_state(vx, st, Sd::L);
  declare_state(vx, st, Sd::R);
  st.comp["pi_f"] = nsym(vx, st, "pi_f", "(Array Ref Ref)");
  st.comp["pi_b"] = nsym(vx, st, "pi_b", "(Array Ref Ref)");
  st.comp["pi_d"] = nsym(vx, st, "pi_d", "Rgn");
  st.comp["pi_r"] = nsym(vx, st, "pi_r", "Rgn");
  assume(st, wf_term(vx, st, Sd::L));
  assume(st, wf_term(vx, st, Sd::R));
  assume(st, pi_ok_term(st));

  std::vector<std::string> symsL = bind_params(vx, st, Sd::L, bmi.decl->paramsL);
  std::vector<std::string> symsR = bind_params(vx, st, Sd::R, bmi.decl->paramsR);
  if (bmi.decl->retL.k != Ty::Unit) {
    st.env["L:result"] = default_term(bmi.decl->retL);
    st.envty["L:result"] = bmi.decl->retL;
  }
  if (bmi.decl->retR.k != Ty::Unit) {
    st.env["R:result"] = default_term(bmi.decl->retR);
    st.envty["R:result"] = bmi.decl->retR;
  }

  // The relational contract governs runs that also satisfy the two unary
  // contracts, so their preconditions are ambient here.
  auto assume_unary_req = [&](Sd sd, const std::vector<std::string>& syms) {
    const Program& p = prog(vx, sd);
    auto mit = p.methods.find(bimethod);
    if (mit == p.methods.end() || !mit->second.spec) return;
    const MethodDecl* spec = mit->second.spec;
    for (size_t i = 0; i < spec->params.size() && i < syms.size(); ++i) {
      st.env[std::string(pref(sd)) + spec->params[i].name] = syms[i];
      st.envty[std::string(pref(sd)) + spec->params[i].name] = spec->params[i].ty;
    }
    for (const auto& r : spec->req) {
      Tx t{vx, st, sd};
      assume(st, tr_formula(t, r));
    }
  };
  assume_unary_req(Sd::L, symsL);
  assume_unary_req(Sd::R, symsR);

  for (const auto& r : bmi.decl->req) assume(st, tr_rel(vx, st, r));
  for (Sd sd : {Sd::L, Sd::R}) {
    for (const auto& [inv, u] : prog(vx, sd).public_invariants()) {
      Tx t{vx, st, sd};
      assume(st, tr_formula(t, inv->f));
    }
  }
  for (const NamedInv* inv : bp.left.private_invariants(bp.left.target)) {
    Tx t{vx, st, Sd::L};
    assume(st, tr_formula(t, inv->f));
  }
  for (const NamedInv* inv : bp.right.private_invariants(bp.right.target)) {
    Tx t{vx, st, Sd::R};
    assume(st, tr_formula(t, inv->f));
  }
  for (const CouplingDecl* c : bp.own_couplings()) assume(st, tr_rel(vx, st, c->f));

  st.oldc = st.comp;
  st.olde = st.env;

  exec_prod(vx, st, prod.get(), [&](St& s) {
    for (const auto& e : bmi.decl->ens) check(vx, s, "post", tr_rel(vx, s, e), bmi.decl->sp);
    for (const CouplingDecl* c : bp.own_couplings())
      check(vx, s, "post", tr_rel(vx, s, c->f), c->sp);
  });
  return std::move(vx.out);
}

namespace {

std::map<std::string, std::string> declare_copy(Vx& vx, St& st, Sd sd, const std::string& tag,
                                                const std::string& at) {
  const Program& p = prog(vx, sd);
  std::string pre = pref(sd);
  std::map<std::string, std::string> comp;
  comp[pre + "at"] = at;
  for (const auto& f : all_fields(p))
    comp[pre + "f_" + f] =
        nsym(vx, st, tag + "f_" + f, array_sort(sort_of(p.fields.at(f).second->ty)));
  for (const auto& [g, gd] : p.globals)
    comp[pre + "g_" + g] = nsym(vx, st, tag + "g_" + g, sort_of(gd->ty));
  return comp;
}

// Assume that two state copies agree on every boundary atom: equal boundary
// variables, equal denotations of image bases, and equal field values across
// the denoted regions.
void assume_bnd_agreement(Vx& vx, St& st, Sd sd, const std::vector<BndAtom>& bnd,
                          const std::map<std::string, std::string>& ca,
                          const std::map<std::string, std::string>& cb) {
  std::string pre = pref(sd);
  for (const auto& a : bnd) {
    if (a.k == LocKind::Var) {
      assume(st, eq(ca.at(pre + "g_" + a.var), cb.at(pre + "g_" + a.var)));
    } else if (a.k == LocKind::Image) {
      auto saved = st.comp;
      st.comp = ca;
      Tx ta{vx, st, sd};
      std::string ga = tr_expr(ta, a.region);
      st.comp = cb;
      Tx tb{vx, st, sd};
      std::string gb = tr_expr(tb, a.region);
      st.comp = saved;
      assume(st, eq(ga, gb));
      std::string q = "qp!" + std::to_string(vx.fresh++);
      assume(st, forall({{q, "Ref"}},
                        impl(conj({sel(ga, q), neq(q, "nullref")}),
                             eq(sel(ca.at(pre + "f_" + a.field), q),
                                sel(cb.at(pre + "f_" + a.field), q)))));
    }
  }
}

}  // namespace

VC gen_frames_vc(const Program& p, const Obligation& ob, const VcOptions& opt) {
  Vx vx;
  vx.pl = &p;
  vx.unit = p.target->name;
  vx.method = ob.method;
  vx.opt = opt;

  St st;
  std::string at = nsym(vx, st, "at", "(Array Ref CName)");
  auto ca = declare_copy(vx, st, Sd::U, "a_", at);
  auto cb = declare_copy(vx, st, Sd::U, "b_", at);
  st.comp = ca;
  assume(st, wf_term(vx, st, Sd::U));
  st.comp = cb;
  assume(st, wf_term(vx, st, Sd::U));
  assume_bnd_agreement(vx, st, Sd::U, ob.bnd, ca, cb);

  st.comp = ca;
  Tx ta{vx, st, Sd::U};
  std::string ia = tr_formula(ta, ob.formula);
  st.comp = cb;
  Tx tb{vx, st, Sd::U};
  std::string ib = tr_formula(tb, ob.formula);
  emit_vc(vx, st, "frames", eq(ia, ib), ob.site, ob.label);
  return std::move(vx.out.back());
}

VC gen_coupling_frames_vc(const BiProgram& bp, const Obligation& ob, const VcOptions& opt) {
  Vx vx;
  vx.pl = &bp.left;
  vx.pr = &bp.right;
  vx.bp = &bp;
  vx.rel = true;
  vx.unit = bp.target->name;
  vx.method = ob.method;
  vx.opt = opt;

  St st;
  std::string atl = nsym(vx, st, "l_at", "(Array Ref CName)");
  std::string atr = nsym(vx, st, "r_at", "(Array Ref CName)");
  st.comp["pi_f"] = nsym(vx, st, "pi_f", "(Array Ref Ref)");
  st.comp["pi_b"] = nsym(vx, st, "pi_b", "(Array Ref Ref)");
  st.comp["pi_d"] = nsym(vx, st, "pi_d", "Rgn");
  st.comp["pi_r"] = nsym(vx, st, "pi_r", "Rgn");
  assume(st, ap({"pi_ok", st.comp.at("pi_f"), st.comp.at("pi_b"), st.comp.at("pi_d"),
                 st.comp.at("pi_r"), atl, atr}));

  auto la = declare_copy(vx, st, Sd::L, "la_", atl);
  auto lb = declare_copy(vx, st, Sd::L, "lb_", atl);
  auto ra = declare_copy(vx, st, Sd::R, "ra_", atr);
  auto rb = declare_copy(vx, st, Sd::R, "rb_", atr);
  auto pi = st.comp;  // permutation entries only

  auto mkc = [&](const std::map<std::string, std::string>& l,
                 const std::map<std::string, std::string>& r) {
    std::map<std::string, std::string> m = pi;
    m.insert(l.begin(), l.end());
    m.insert(r.begin(), r.end());
    return m;
  };
  auto compA = mkc(la, ra);
  auto compB = mkc(lb, rb);

  st.comp = compA;
  assume(st, wf_term(vx, st, Sd::L));
  assume(st, wf_term(vx, st, Sd::R));
  st.comp = compB;
  assume(st, wf_term(vx, st, Sd::L));
  assume(st, wf_term(vx, st, Sd::R));

  st.comp = pi;
  assume_bnd_agreement(vx, st, Sd::L, ob.bnd, la, lb);
  assume_bnd_agreement(vx, st, Sd::R, ob.bnd_right, ra, rb);

  st.comp = compA;
  std::string fa = tr_rel(vx, st, ob.rel);
  st.comp = compB;
  std::string fb = tr_rel(vx, st, ob.rel);
  emit_vc(vx, st, "frames", eq(fa, fb), ob.site, ob.label);
  return std::move(vx.out.back());
}

std::vector<VC> gen_unit_vcs(const Program& p, const VcOptions& opt) {
  std::vector<VC> out;
  for (const auto& [name, mi] : p.methods) {
    if (!mi.body || mi.body_owner != p.target) continue;
    for (auto& vc : gen_unary_vcs(p, name, opt)) out.push_back(std::move(vc));
  }
  std::set<std::string> own;
  for (const auto& inv : p.target->invariants)
    if (inv.is_private) own.insert(inv.name);
  for (const auto& ob : gen_frames_lemma(p)) {
    if (!own.count(ob.method)) continue;
    out.push_back(gen_frames_vc(p, ob, opt));
  }
  return out;
}

std::vector<VC> gen_biunit_vcs(const BiProgram& bp, const VcOptions& opt) {
  std::vector<VC> out;
  for (const auto& [name, bmi] : bp.bimethods) {
    if (bmi.owner != bp.target) continue;
    for (auto& vc : gen_relational_vcs(bp, name, opt)) out.push_back(std::move(vc));
  }
  for (const auto& ob : gen_frames_lemma_couplings(bp))
    out.push_back(gen_coupling_frames_vc(bp, ob, opt));
  return out;
}

}  // namespace rv
