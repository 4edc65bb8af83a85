#ifndef RV_LANG_AST_HPP
#define RV_LANG_AST_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

// Core syntax for the object language, its relational assertion layer, and
// biprograms. Nodes are immutable and shared; transforms build new trees.

namespace rv {

struct Span {
  std::string file;
  int line = 0;
  int col = 0;
  bool valid() const { return line > 0; }
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Types

enum class Ty { Int, Bool, Unit, Rgn, List, Cls, Null };

struct Type {
  Ty k = Ty::Unit;
  std::string cls;  // class name when k == Cls

  static Type intt() { return {Ty::Int, ""}; }
  static Type boolt() { return {Ty::Bool, ""}; }
  static Type unit() { return {Ty::Unit, ""}; }
  static Type rgn() { return {Ty::Rgn, ""}; }
  static Type list() { return {Ty::List, ""}; }
  static Type cl(std::string c) { return {Ty::Cls, std::move(c)}; }
  static Type nullt() { return {Ty::Null, ""}; }

  bool operator==(const Type& o) const { return k == o.k && cls == o.cls; }
  bool operator!=(const Type& o) const { return !(*this == o); }
  bool is_ref() const { return k == Ty::Cls || k == Ty::Null; }
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Expressions (includes region expressions and intlist operations)

enum class Ex {
  IntLit,   // str = decimal digits
  BoolLit,  // b
  NullLit,
  Var,      // str = name
  Field,    // args[0].str(field name in str)
  Neg,      // args[0]
  NotE,     // args[0]
  Bin,      // op, args[0], args[1]
  Old,      // args[0]
  RgnLit,   // args = element expressions (possibly empty)
  RgnImg,   // args[0] ` str   (str may be a field name; "any" only in effect atoms)
  Nil,
  Cons,  // args[0] head, args[1] tail
  Hd,    // args[0]
  Tl,    // args[0]
  Len,   // args[0]
};

enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Union, Inter, Diff };

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  Ex k;
  Span sp;
  std::string str;  // literal digits / variable / field name
  bool b = false;
  BinOp op = BinOp::Add;
  std::vector<ExprP> args;
  mutable Type ty;  // filled by the typechecker
};

ExprP mk_int(const std::string& digits, Span sp = {});
ExprP mk_bool(bool v, Span sp = {});
ExprP mk_null(Span sp = {});
ExprP mk_var(const std::string& name, Span sp = {});
ExprP mk_field(ExprP obj, const std::string& f, Span sp = {});
ExprP mk_neg(ExprP e, Span sp = {});
ExprP mk_note(ExprP e, Span sp = {});
ExprP mk_bin(BinOp op, ExprP a, ExprP b, Span sp = {});
ExprP mk_old(ExprP e, Span sp = {});
ExprP mk_rgnlit(std::vector<ExprP> elems, Span sp = {});
ExprP mk_rgnimg(ExprP base, const std::string& f, Span sp = {});
ExprP mk_nil(Span sp = {});
ExprP mk_cons(ExprP h, ExprP t, Span sp = {});
ExprP mk_hd(ExprP l, Span sp = {});
ExprP mk_tl(ExprP l, Span sp = {});
ExprP mk_len(ExprP l, Span sp = {});

// ---------------------------------------------------------------------------
// Unary formulas

enum class Fk {
  FExpr,    // boolean expression atom
  FIn,      // e1 iin rgn
  FSubset,  // rgn1 << rgn2  (e1, e2 hold region expressions)
  FNot,
  FAnd,
  FOr,
  FImp,
  FAll,   // forall var: cls iin rgn . f1
  FExi,   // exists var: cls iin rgn . f1
  FPred,  // pred(args)
};

struct Formula;
using FormulaP = std::shared_ptr<const Formula>;

struct Formula {
  Fk k;
  Span sp;
  ExprP e1, e2;
  FormulaP f1, f2;
  std::string var, cls, pred;
  std::vector<ExprP> args;
};

FormulaP mk_fexpr(ExprP e, Span sp = {});
FormulaP mk_ftrue(Span sp = {});
FormulaP mk_fin(ExprP e, ExprP rgn, Span sp = {});
FormulaP mk_fsubset(ExprP a, ExprP b, Span sp = {});
FormulaP mk_fnot(FormulaP f, Span sp = {});
FormulaP mk_fand(FormulaP a, FormulaP b, Span sp = {});
FormulaP mk_for(FormulaP a, FormulaP b, Span sp = {});
FormulaP mk_fimp(FormulaP a, FormulaP b, Span sp = {});
FormulaP mk_fall(const std::string& v, const std::string& cls, ExprP rgn, FormulaP body,
                 Span sp = {});
FormulaP mk_fexi(const std::string& v, const std::string& cls, ExprP rgn, FormulaP body,
                 Span sp = {});
FormulaP mk_fpred(const std::string& name, std::vector<ExprP> args, Span sp = {});
FormulaP conj_all(const std::vector<FormulaP>& fs, Span sp = {});

// ---------------------------------------------------------------------------
// Relational formulas

enum class Rk {
  RAgree,  // e1 =:= e2
  RLeft,   // *<| uf *<]
  RRight,  // [> uf |>
  RBoth,   // Both(uf), sugar removed by desugar_both
  RNot,
  RAnd,
  ROr,
  RImp,
  RAllPair,     // forall v: cls iin gl | v: cls iin gr . r1
  RExPairMath,  // exists v: mty | v: mty . r1
};

struct RelFormula;
using RelFormulaP = std::shared_ptr<const RelFormula>;

struct RelFormula {
  Rk k;
  Span sp;
  ExprP e1, e2;
  FormulaP uf;
  RelFormulaP r1, r2;
  std::string var, cls;
  ExprP gl, gr;
  Type mty;
};

RelFormulaP mk_ragree(ExprP l, ExprP r, Span sp = {});
RelFormulaP mk_rleft(FormulaP f, Span sp = {});
RelFormulaP mk_rright(FormulaP f, Span sp = {});
RelFormulaP mk_rboth(FormulaP f, Span sp = {});
RelFormulaP mk_rnot(RelFormulaP f, Span sp = {});
RelFormulaP mk_rand(RelFormulaP a, RelFormulaP b, Span sp = {});
RelFormulaP mk_ror(RelFormulaP a, RelFormulaP b, Span sp = {});
RelFormulaP mk_rimp(RelFormulaP a, RelFormulaP b, Span sp = {});
RelFormulaP mk_rallpair(const std::string& v, const std::string& cls, ExprP gl, ExprP gr,
                        RelFormulaP body, Span sp = {});
RelFormulaP mk_rexmath(const std::string& v, Type mty, RelFormulaP body, Span sp = {});
RelFormulaP mk_rtrue(Span sp = {});
RelFormulaP rconj_all(const std::vector<RelFormulaP>& fs, Span sp = {});

// Rewrites Both(P) into RLeft(P) /\ RRight(P) throughout.
RelFormulaP desugar_both(const RelFormulaP& rf);

// ---------------------------------------------------------------------------
// Effects and boundaries

enum class LocKind { Var, Image, Alloc };

struct EffAtom {
  int mode = 0;  // bit 1 = rd, bit 2 = wr
  LocKind k = LocKind::Var;
  std::string var;
  ExprP region;       // Image base
  std::string field;  // Image field; "any" before datagroup expansion
  Span sp;
  bool reads() const { return mode & 1; }
  bool writes() const { return mode & 2; }
};

struct Effects {
  std::vector<EffAtom> atoms;
};

struct BndAtom {  // boundary atom: same shapes, no mode
  LocKind k = LocKind::Var;
  std::string var;
  ExprP region;
  std::string field;
  Span sp;
};

// Location read-set atoms, the result of free_locations.
struct LocAtom {
  bool is_var = true;
  std::string var;    // when is_var
  ExprP region;       // base region when image
  std::string field;  // image field
  std::string str() const;
};

// Variables and field-image atoms syntactically read by a formula. Quantified
// variables resolve field reads to images over their range region.
std::vector<LocAtom> free_locations(const FormulaP& f);
std::vector<std::string> free_location_strings(const FormulaP& f);  // sorted, deduped

// ---------------------------------------------------------------------------
// Commands

enum class Ck { Skip, Assign, FieldWr, Alloc, Seq, If, While, Call, VarBlock };

struct Command;
using CommandP = std::shared_ptr<const Command>;

struct Command {
  Ck k;
  Span sp;
  std::string x;      // lhs variable / var-block name / FieldWr receiver
  std::string field;  // FieldWr
  std::string cls;    // Alloc class
  std::string meth;   // Call
  ExprP e;            // rhs / guard
  std::vector<ExprP> actuals;
  std::vector<FormulaP> invs;  // While
  CommandP c1, c2;             // If branches / VarBlock body (c1) / While body (c1)
  std::vector<CommandP> seq;
  Type vty;  // VarBlock type
};

CommandP mk_skip(Span sp = {});
CommandP mk_assign(const std::string& x, ExprP e, Span sp = {});
CommandP mk_fieldwr(const std::string& x, const std::string& f, ExprP e, Span sp = {});
CommandP mk_alloc(const std::string& x, const std::string& cls, Span sp = {});
CommandP mk_seq(std::vector<CommandP> cs, Span sp = {});
CommandP mk_if(ExprP g, CommandP t, CommandP e, Span sp = {});
CommandP mk_while(ExprP g, std::vector<FormulaP> invs, CommandP body, Span sp = {});
CommandP mk_call(const std::string& lhs, const std::string& m, std::vector<ExprP> actuals,
                 Span sp = {});
CommandP mk_varblock(const std::string& x, Type t, CommandP body, Span sp = {});

// ---------------------------------------------------------------------------
// Biprograms

enum class Bk { BSync, BSplit, BSeq, BVar, BIf, BWhile, BAssert, BCall };

struct Biprog;
using BiprogP = std::shared_ptr<const Biprog>;

struct Biprog {
  Bk k;
  Span sp;
  CommandP cl, cr;  // BSplit; BSync uses cl
  std::vector<BiprogP> seq;
  std::string x;  // BVar name
  Type tl, tr;    // BVar types
  BiprogP b1, b2, body;
  ExprP gl, gr;                // BIf/BWhile guards
  RelFormulaP alignL, alignR;  // BWhile alignment guards (null for lockstep)
  std::vector<RelFormulaP> rinvs;
  RelFormulaP rf;    // BAssert
  std::string meth;  // BCall
  std::string lhs;   // BCall result target ("" if none)
  std::vector<ExprP> actsL, actsR;
};

BiprogP mk_bsync(CommandP c, Span sp = {});
BiprogP mk_bsplit(CommandP l, CommandP r, Span sp = {});
BiprogP mk_bseq(std::vector<BiprogP> bs, Span sp = {});
BiprogP mk_bvar(const std::string& x, Type tl, Type tr, BiprogP body, Span sp = {});
BiprogP mk_bif(ExprP gl, ExprP gr, BiprogP t, BiprogP e, Span sp = {});
BiprogP mk_bwhile(ExprP gl, ExprP gr, RelFormulaP alignL, RelFormulaP alignR,
                  std::vector<RelFormulaP> rinvs, BiprogP body, Span sp = {});
BiprogP mk_bassert(RelFormulaP rf, Span sp = {});
BiprogP mk_bcall(const std::string& lhs, const std::string& m, std::vector<ExprP> actsL,
                 std::vector<ExprP> actsR, Span sp = {});

// ---------------------------------------------------------------------------
// Declarations and compilation units

struct Param {
  std::string name;
  Type ty;
};

struct FieldDecl {
  std::string name;
  Type ty;
  bool ghost = false;
  Span sp;
};

struct ClassDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  Span sp;
};

struct GlobalDecl {
  std::string name;
  Type ty;
  bool ghost = false;
  Span sp;
};

struct NamedInv {
  std::string name;
  FormulaP f;
  bool is_private = false;
  Span sp;
};

struct CouplingDecl {
  std::string name;
  RelFormulaP f;
  Span sp;
};

struct PredicateDecl {
  std::string name;
  std::vector<Param> params;
  FormulaP body;
  Span sp;
};

struct MethodDecl {
  std::string name;
  std::vector<Param> params;
  Type ret = Type::unit();
  std::vector<FormulaP> req, ens;
  Effects eff;
  bool eff_given = false;
  CommandP body;  // null for interface declarations
  Span sp;
};

struct BiMethodDecl {
  std::string name;
  std::vector<Param> paramsL, paramsR;
  Type retL = Type::unit(), retR = Type::unit();
  std::vector<RelFormulaP> req, ens;
  BiprogP body;
  Span sp;
};

enum class UnitKind { Interface, Module, Bimodule };

struct Unit {
  UnitKind kind;
  std::string name;
  std::string iface;           // Module: implemented interface ("" if none)
  std::string left, right;     // Bimodule operands
  std::vector<std::string> imports;
  std::vector<ClassDecl> classes;
  std::vector<GlobalDecl> globals;
  std::vector<BndAtom> boundary;
  bool has_boundary = false;
  std::vector<NamedInv> invariants;
  std::vector<CouplingDecl> couplings;
  std::vector<PredicateDecl> preds;
  std::vector<MethodDecl> methods;
  std::vector<BiMethodDecl> bimethods;
  Span sp;
  std::string file;
};

// ---------------------------------------------------------------------------
// Printing, structural equality, normalization

std::string print_expr(const ExprP& e);
std::string print_formula(const FormulaP& f);
std::string print_relformula(const RelFormulaP& f);
std::string print_command(const CommandP& c, int indent = 0);
std::string print_biprog(const BiprogP& b, int indent = 0);
std::string print_effects(const Effects& eff);
std::string print_batom(const BndAtom& a);

bool expr_eq(const ExprP& a, const ExprP& b);
bool formula_eq(const FormulaP& a, const FormulaP& b);
bool relformula_eq(const RelFormulaP& a, const RelFormulaP& b);
// Structural equality on commands; spans always ignored, annotations (loop
// invariants) ignored when ignore_annotations is set.
bool command_eq(const CommandP& a, const CommandP& b, bool ignore_annotations);

// Flattens nested sequences, drops skips, canonicalizes empty else-branches,
// erases loop invariant annotations. Source locations are not compared.
CommandP normalize_command(const CommandP& c);

}  // namespace rv

#endif
