#pragma once

#include <string>
#include <vector>

#include "lang/ast.hpp"

namespace rv {

enum class Tok {
  Ident, Int, Eof,
  // keywords
  KwInterface, KwModule, KwBimodule, KwImport, KwClass, KwGhost, KwGlobal,
  KwBoundary, KwPublic, KwPrivate, KwInvariant, KwCoupling, KwPredicate,
  KwMeth, KwRequires, KwEnsures, KwEffects, KwRd, KwWr, KwRw, KwAlloc, KwAny,
  KwSkip, KwIf, KwThen, KwElse, KwEnd, KwWhile, KwDo, KwDone, KwVar, KwIn,
  KwNew, KwNull, KwTrue, KwFalse, KwNot, KwAnd, KwOr, KwForall, KwExists,
  KwIin, KwOld, KwInt, KwBool, KwUnit, KwRgn, KwIntlist, KwNil, KwCons,
  KwHd, KwTl, KwLength, KwAssert, KwBoth,
  // punctuation and operators
  Assign,      // :=
  AgreeEq,     // =:=
  Eq, Ne, Lt, Le, Gt, Ge,   // = <> < <= > >=
  Subset,      // <<
  Union, Diff, Inter,       // ++ -- ^^
  Plus, Minus, Star,
  AndF, OrF, Imp,           // /\ \/ ->
  LParen, RParen, LBrace, RBrace,
  Comma, Semi, Colon, Dot, Tick, Bar,
  SyncOpen, SyncClose,      // |_ _|
  LeftOpen, LeftClose,      // <| <]
  RightOpen, RightClose,    // [> |>
};

struct Token {
  Tok k;
  std::string text;
  Span sp;
};

const char* tok_name(Tok k);

// Lexes the whole source; throws SrcError on bad input.
std::vector<Token> lex(const std::string& src, const std::string& filename);

}  // namespace rv
