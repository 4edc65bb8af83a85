#include "align/align.hpp"

#include <sstream>

#include "frontend/diag.hpp"

namespace rv {

// ---------------------------------------------------------------------------
// Projection

CommandP project(const BiprogP& b, bool left) {
  switch (b->k) {
    case Bk::BSync:
      return b->cl;
    case Bk::BSplit:
      return left ? b->cl : b->cr;
    case Bk::BSeq: {
      std::vector<CommandP> cs;
      cs.reserve(b->seq.size());
      for (const auto& sub : b->seq) cs.push_back(project(sub, left));
      return mk_seq(std::move(cs), b->sp);
    }
    case Bk::BVar:
      return mk_varblock(b->x, left ? b->tl : b->tr, project(b->body, left), b->sp);
    case Bk::BIf:
      return mk_if(left ? b->gl : b->gr, project(b->b1, left),
                   b->b2 ? project(b->b2, left) : nullptr, b->sp);
    case Bk::BWhile:
      return mk_while(left ? b->gl : b->gr, {}, project(b->body, left), b->sp);
    case Bk::BAssert:
      return mk_skip(b->sp);
    case Bk::BCall:
      return mk_call(b->lhs, b->meth, left ? b->actsL : b->actsR, b->sp);
  }
  return mk_skip(b->sp);
}

// ---------------------------------------------------------------------------
// Adequacy

static const char* ck_name(Ck k) {
  switch (k) {
    case Ck::Skip: return "skip";
    case Ck::Assign: return "assignment";
    case Ck::FieldWr: return "field write";
    case Ck::Alloc: return "allocation";
    case Ck::Seq: return "sequence";
    case Ck::If: return "conditional";
    case Ck::While: return "loop";
    case Ck::Call: return "call";
    case Ck::VarBlock: return "local block";
  }
  return "?";
}

static std::string brief(const CommandP& c) {
  if (!c) return "(none)";
  std::string s = print_command(c, 0);
  for (auto& ch : s)
    if (ch == '\n') ch = ' ';
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

// Finds the first structural difference between two normalized commands and
// describes it; returns false when the trees match.
static bool diff_cmd(const CommandP& a, const CommandP& b, const std::string& path,
                     std::string& out) {
  auto here = [&](const std::string& what) {
    out = "at " + path + ": " + what + " (biprogram side has `" + brief(a) +
          "`, source has `" + brief(b) + "`)";
    return true;
  };
  if (!a && !b) return false;
  if (!a || !b) return here("one side is missing a statement");
  if (a->k != b->k) return here(std::string(ck_name(a->k)) + " vs " + ck_name(b->k));
  switch (a->k) {
    case Ck::Skip:
      return false;
    case Ck::Assign:
      if (a->x != b->x) return here("different assignment targets");
      if (!expr_eq(a->e, b->e)) return here("different assigned expressions");
      return false;
    case Ck::FieldWr:
      if (a->x != b->x || a->field != b->field) return here("different write targets");
      if (!expr_eq(a->e, b->e)) return here("different written expressions");
      return false;
    case Ck::Alloc:
      if (a->x != b->x || a->cls != b->cls) return here("different allocations");
      return false;
    case Ck::Seq: {
      if (a->seq.size() != b->seq.size())
        return here("sequences of length " + std::to_string(a->seq.size()) + " vs " +
                    std::to_string(b->seq.size()));
      for (std::size_t i = 0; i < a->seq.size(); ++i)
        if (diff_cmd(a->seq[i], b->seq[i], path + "[" + std::to_string(i) + "]", out))
          return true;
      return false;
    }
    case Ck::If:
      if (!expr_eq(a->e, b->e)) return here("different guards");
      if (diff_cmd(a->c1, b->c1, path + ".then", out)) return true;
      return diff_cmd(a->c2, b->c2, path + ".else", out);
    case Ck::While:
      if (!expr_eq(a->e, b->e)) return here("different guards");
      return diff_cmd(a->c1, b->c1, path + ".body", out);
    case Ck::Call: {
      if (a->x != b->x || a->meth != b->meth) return here("different calls");
      if (a->actuals.size() != b->actuals.size()) return here("different argument counts");
      for (std::size_t i = 0; i < a->actuals.size(); ++i)
        if (!expr_eq(a->actuals[i], b->actuals[i]))
          return here("different argument " + std::to_string(i));
      return false;
    }
    case Ck::VarBlock:
      if (a->x != b->x || a->vty != b->vty) return here("different local declarations");
      return diff_cmd(a->c1, b->c1, path + ".body", out);
  }
  return false;
}

AdequacyReport check_adequacy(const BiprogP& b, const CommandP& left_src,
                              const CommandP& right_src) {
  AdequacyReport rep;
  CommandP pl = normalize_command(project(b, true));
  CommandP pr = normalize_command(project(b, false));
  CommandP nl = normalize_command(left_src);
  CommandP nr = normalize_command(right_src);
  std::string msg;
  if (diff_cmd(pl, nl, "left", msg)) {
    rep.ok = false;
    rep.message = msg;
    return rep;
  }
  if (diff_cmd(pr, nr, "right", msg)) {
    rep.ok = false;
    rep.message = msg;
    return rep;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Product construction

RelFormulaP adequacy_invariant(const ExprP& gl, const ExprP& gr, const RelFormulaP& alignL,
                               const RelFormulaP& alignR) {
  if (!alignL && !alignR) return mk_ragree(gl, gr);
  RelFormulaP L = mk_rleft(mk_fexpr(gl));
  RelFormulaP R = mk_rright(mk_fexpr(gr));
  std::vector<RelFormulaP> disjuncts;
  if (alignL) disjuncts.push_back(mk_rand(L, alignL));
  if (alignR) disjuncts.push_back(mk_rand(R, alignR));
  disjuncts.push_back(mk_rand(mk_rnot(L), mk_rnot(R)));
  disjuncts.push_back(mk_rand(L, R));
  RelFormulaP a = disjuncts[0];
  for (std::size_t i = 1; i < disjuncts.size(); ++i) a = mk_ror(a, disjuncts[i]);
  return a;
}

namespace {

struct Builder {
  const BiProgram* bp;

  ProdNodeP pseq(std::vector<ProdNodeP> parts, Span sp) {
    if (parts.size() == 1) return parts[0];
    auto n = std::make_shared<ProdNode>();
    n->k = Pk::PSeq;
    n->sp = sp;
    n->seq = std::move(parts);
    return n;
  }

  ProdNodeP one_side(bool left, CommandP c, Span sp) {
    auto n = std::make_shared<ProdNode>();
    n->k = left ? Pk::PLeft : Pk::PRight;
    n->sp = sp;
    n->cmd = std::move(c);
    return n;
  }

  ProdNodeP passert(RelFormulaP rf, Span sp) {
    auto n = std::make_shared<ProdNode>();
    n->k = Pk::PAssert;
    n->sp = sp;
    n->rf = desugar_both(rf);
    return n;
  }

  ProdNodeP pcall(const std::string& lhs, const std::string& meth, std::vector<ExprP> actsL,
                  std::vector<ExprP> actsR, Span sp) {
    if (!bp || bp->bimethods.find(meth) == bp->bimethods.end())
      throw SrcError(sp, "aligned call to '" + meth + "' has no relational spec in scope");
    auto n = std::make_shared<ProdNode>();
    n->k = Pk::PCall2;
    n->sp = sp;
    n->x = lhs;
    n->meth = meth;
    n->actsL = std::move(actsL);
    n->actsR = std::move(actsR);
    return n;
  }

  ProdNodeP aligned_if(ExprP gl, ExprP gr, ProdNodeP t, ProdNodeP e, Span sp) {
    auto n = std::make_shared<ProdNode>();
    n->k = Pk::PIf2;
    n->sp = sp;
    n->gl = gl;
    n->gr = gr;
    n->b1 = std::move(t);
    n->b2 = std::move(e);
    // Side states differ, so agreement is asserted even for syntactically
    // identical guards.
    return pseq({passert(mk_ragree(gl, gr), sp), n}, sp);
  }

  ProdNodeP aligned_while(ExprP gl, ExprP gr, RelFormulaP alignL, RelFormulaP alignR,
                          std::vector<RelFormulaP> rinvs, ProdNodeP body, CommandP bodyL,
                          CommandP bodyR, Span sp) {
    if (alignL && alignL->k != Rk::RLeft)
      throw SrcError(alignL->sp, "left alignment guard must be a left-side formula");
    if (alignR && alignR->k != Rk::RRight)
      throw SrcError(alignR->sp, "right alignment guard must be a right-side formula");
    auto n = std::make_shared<ProdNode>();
    n->k = Pk::PWhile2;
    n->sp = sp;
    n->gl = std::move(gl);
    n->gr = std::move(gr);
    n->alignL = std::move(alignL);
    n->alignR = std::move(alignR);
    for (auto& rf : rinvs) n->rinvs.push_back(desugar_both(rf));
    n->body = std::move(body);
    n->bodyL = std::move(bodyL);
    n->bodyR = std::move(bodyR);
    return n;
  }

  // Tandem execution of one command on both sides, reduced to the other
  // product forms shape by shape.
  ProdNodeP sync(const CommandP& c, Span sp) {
    switch (c->k) {
      case Ck::Skip:
        return pseq({}, sp);
      case Ck::Assign:
      case Ck::FieldWr:
        return pseq({one_side(true, c, c->sp), one_side(false, c, c->sp)}, sp);
      case Ck::Alloc: {
        auto n = std::make_shared<ProdNode>();
        n->k = Pk::PAlloc2;
        n->sp = c->sp;
        n->x = c->x;
        n->cls = c->cls;
        return n;
      }
      case Ck::Call:
        return pcall(c->x, c->meth, c->actuals, c->actuals, c->sp);
      case Ck::Seq: {
        std::vector<ProdNodeP> parts;
        for (const auto& sub : c->seq) parts.push_back(sync(sub, sub->sp));
        return pseq(std::move(parts), sp);
      }
      case Ck::If:
        return aligned_if(c->e, c->e, sync(c->c1, c->c1 ? c->c1->sp : c->sp),
                          c->c2 ? sync(c->c2, c->c2->sp) : nullptr, c->sp);
      case Ck::While: {
        std::vector<RelFormulaP> rinvs;
        for (const auto& inv : c->invs) rinvs.push_back(mk_rboth(inv, inv->sp));
        return aligned_while(c->e, c->e, nullptr, nullptr, std::move(rinvs),
                             sync(c->c1, c->c1->sp), c->c1, c->c1, c->sp);
      }
      case Ck::VarBlock: {
        auto n = std::make_shared<ProdNode>();
        n->k = Pk::PVar2;
        n->sp = c->sp;
        n->x = c->x;
        n->tl = c->vty;
        n->tr = c->vty;
        n->body = sync(c->c1, c->c1->sp);
        return n;
      }
    }
    return pseq({}, sp);
  }

  ProdNodeP go(const BiprogP& b) {
    switch (b->k) {
      case Bk::BSync:
        return sync(b->cl, b->sp);
      case Bk::BSplit:
        // Left fragment runs to completion before the right one starts.
        return pseq({one_side(true, b->cl, b->sp), one_side(false, b->cr, b->sp)}, b->sp);
      case Bk::BSeq: {
        std::vector<ProdNodeP> parts;
        for (const auto& sub : b->seq) parts.push_back(go(sub));
        return pseq(std::move(parts), b->sp);
      }
      case Bk::BVar: {
        auto n = std::make_shared<ProdNode>();
        n->k = Pk::PVar2;
        n->sp = b->sp;
        n->x = b->x;
        n->tl = b->tl;
        n->tr = b->tr;
        n->body = go(b->body);
        return n;
      }
      case Bk::BIf:
        return aligned_if(b->gl, b->gr, go(b->b1), b->b2 ? go(b->b2) : nullptr, b->sp);
      case Bk::BWhile:
        return aligned_while(b->gl, b->gr, b->alignL, b->alignR, b->rinvs, go(b->body),
                             project(b->body, true), project(b->body, false), b->sp);
      case Bk::BAssert:
        return passert(b->rf, b->sp);
      case Bk::BCall:
        return pcall(b->lhs, b->meth, b->actsL, b->actsR, b->sp);
    }
    return pseq({}, b->sp);
  }
};

}  // namespace

ProdNodeP build_product(const BiprogP& b, const BiProgram* bp) {
  Builder builder{bp};
  return builder.go(b);
}

// ---------------------------------------------------------------------------
// Printing

static std::string pind(int n) { return std::string(2 * n, ' '); }

std::string print_product(const ProdNodeP& p, int indent) {
  std::ostringstream os;
  switch (p->k) {
    case Pk::PSeq:
      if (p->seq.empty()) {
        os << pind(indent) << "nop\n";
      } else {
        for (const auto& sub : p->seq) os << print_product(sub, indent);
      }
      break;
    case Pk::PLeft:
    case Pk::PRight: {
      const char* tag = p->k == Pk::PLeft ? "left" : "right";
      os << pind(indent) << tag << " {\n";
      std::istringstream body(print_command(p->cmd, indent + 1));
      std::string line;
      while (std::getline(body, line)) os << line << "\n";
      os << pind(indent) << "}\n";
      break;
    }
    case Pk::PAlloc2:
      os << pind(indent) << "both " << p->x << " := new " << p->cls << " pairing fresh refs\n";
      break;
    case Pk::PCall2: {
      os << pind(indent) << "relcall ";
      if (!p->x.empty()) os << p->x << " := ";
      os << p->meth << "(";
      for (std::size_t i = 0; i < p->actsL.size(); ++i) {
        if (i) os << ", ";
        if (expr_eq(p->actsL[i], p->actsR[i]))
          os << print_expr(p->actsL[i]);
        else
          os << print_expr(p->actsL[i]) << " | " << print_expr(p->actsR[i]);
      }
      os << ")\n";
      break;
    }
    case Pk::PVar2:
      os << pind(indent) << "var " << p->x << ": " << p->tl.str() << " | " << p->tr.str()
         << " in\n"
         << print_product(p->body, indent + 1) << pind(indent) << "end\n";
      break;
    case Pk::PIf2:
      os << pind(indent) << "if (" << print_expr(p->gl) << " | " << print_expr(p->gr)
         << ") then\n"
         << print_product(p->b1, indent + 1);
      if (p->b2) os << pind(indent) << "else\n" << print_product(p->b2, indent + 1);
      os << pind(indent) << "end\n";
      break;
    case Pk::PWhile2: {
      os << pind(indent) << "while (" << print_expr(p->gl) << " | " << print_expr(p->gr) << ")";
      if (p->alignL || p->alignR)
        os << " . " << (p->alignL ? print_relformula(p->alignL) : "") << " | "
           << (p->alignR ? print_relformula(p->alignR) : "");
      os << " do\n";
      for (const auto& inv : p->rinvs)
        os << pind(indent + 1) << "invariant { " << print_relformula(inv) << " }\n";
      os << print_product(p->body, indent + 1) << pind(indent) << "done\n";
      break;
    }
    case Pk::PAssert:
      os << pind(indent) << "assert { " << print_relformula(p->rf) << " }\n";
      break;
  }
  return os.str();
}

}  // namespace rv
