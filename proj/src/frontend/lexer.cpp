#include "frontend/lexer.hpp"

#include <cctype>
#include <map>

#include "frontend/diag.hpp"

namespace rv {

const char* tok_name(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer literal";
    case Tok::Eof: return "end of input";
    case Tok::KwInterface: return "'interface'";
    case Tok::KwModule: return "'module'";
    case Tok::KwBimodule: return "'bimodule'";
    case Tok::KwImport: return "'import'";
    case Tok::KwClass: return "'class'";
    case Tok::KwGhost: return "'ghost'";
    case Tok::KwGlobal: return "'global'";
    case Tok::KwBoundary: return "'boundary'";
    case Tok::KwPublic: return "'public'";
    case Tok::KwPrivate: return "'private'";
    case Tok::KwInvariant: return "'invariant'";
    case Tok::KwCoupling: return "'coupling'";
    case Tok::KwPredicate: return "'predicate'";
    case Tok::KwMeth: return "'meth'";
    case Tok::KwRequires: return "'requires'";
    case Tok::KwEnsures: return "'ensures'";
    case Tok::KwEffects: return "'effects'";
    case Tok::KwRd: return "'rd'";
    case Tok::KwWr: return "'wr'";
    case Tok::KwRw: return "'rw'";
    case Tok::KwAlloc: return "'alloc'";
    case Tok::KwAny: return "'any'";
    case Tok::KwSkip: return "'skip'";
    case Tok::KwIf: return "'if'";
    case Tok::KwThen: return "'then'";
    case Tok::KwElse: return "'else'";
    case Tok::KwEnd: return "'end'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwDo: return "'do'";
    case Tok::KwDone: return "'done'";
    case Tok::KwVar: return "'var'";
    case Tok::KwIn: return "'in'";
    case Tok::KwNew: return "'new'";
    case Tok::KwNull: return "'null'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwNot: return "'not'";
    case Tok::KwAnd: return "'and'";
    case Tok::KwOr: return "'or'";
    case Tok::KwForall: return "'forall'";
    case Tok::KwExists: return "'exists'";
    case Tok::KwIin: return "'iin'";
    case Tok::KwOld: return "'old'";
    case Tok::KwInt: return "'int'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwUnit: return "'unit'";
    case Tok::KwRgn: return "'rgn'";
    case Tok::KwIntlist: return "'intlist'";
    case Tok::KwNil: return "'nil'";
    case Tok::KwCons: return "'cons'";
    case Tok::KwHd: return "'hd'";
    case Tok::KwTl: return "'tl'";
    case Tok::KwLength: return "'length'";
    case Tok::KwAssert: return "'assert'";
    case Tok::KwBoth: return "'Both'";
    case Tok::Assign: return "':='";
    case Tok::AgreeEq: return "'=:='";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'<>'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Subset: return "'<<'";
    case Tok::Union: return "'++'";
    case Tok::Diff: return "'--'";
    case Tok::Inter: return "'^^'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::AndF: return "'/\\'";
    case Tok::OrF: return "'\\/'";
    case Tok::Imp: return "'->'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Tick: return "'`'";
    case Tok::Bar: return "'|'";
    case Tok::SyncOpen: return "'|_'";
    case Tok::SyncClose: return "'_|'";
    case Tok::LeftOpen: return "'<|'";
    case Tok::LeftClose: return "'<]'";
    case Tok::RightOpen: return "'[>'";
    case Tok::RightClose: return "'|>'";
  }
  return "?";
}

static const std::map<std::string, Tok>& keywords() {
  static const std::map<std::string, Tok> kw = {
      {"interface", Tok::KwInterface}, {"module", Tok::KwModule},
      {"bimodule", Tok::KwBimodule},   {"import", Tok::KwImport},
      {"class", Tok::KwClass},         {"ghost", Tok::KwGhost},
      {"global", Tok::KwGlobal},       {"boundary", Tok::KwBoundary},
      {"public", Tok::KwPublic},       {"private", Tok::KwPrivate},
      {"invariant", Tok::KwInvariant}, {"coupling", Tok::KwCoupling},
      {"predicate", Tok::KwPredicate}, {"meth", Tok::KwMeth},
      {"requires", Tok::KwRequires},   {"ensures", Tok::KwEnsures},
      {"effects", Tok::KwEffects},     {"rd", Tok::KwRd},
      {"wr", Tok::KwWr},               {"rw", Tok::KwRw},
      {"alloc", Tok::KwAlloc},         {"any", Tok::KwAny},
      {"skip", Tok::KwSkip},           {"if", Tok::KwIf},
      {"then", Tok::KwThen},           {"else", Tok::KwElse},
      {"end", Tok::KwEnd},             {"while", Tok::KwWhile},
      {"do", Tok::KwDo},               {"done", Tok::KwDone},
      {"var", Tok::KwVar},             {"in", Tok::KwIn},
      {"new", Tok::KwNew},             {"null", Tok::KwNull},
      {"true", Tok::KwTrue},           {"false", Tok::KwFalse},
      {"not", Tok::KwNot},             {"and", Tok::KwAnd},
      {"or", Tok::KwOr},               {"forall", Tok::KwForall},
      {"exists", Tok::KwExists},       {"iin", Tok::KwIin},
      {"old", Tok::KwOld},             {"int", Tok::KwInt},
      {"bool", Tok::KwBool},           {"unit", Tok::KwUnit},
      {"rgn", Tok::KwRgn},             {"intlist", Tok::KwIntlist},
      {"nil", Tok::KwNil},             {"cons", Tok::KwCons},
      {"hd", Tok::KwHd},               {"tl", Tok::KwTl},
      {"length", Tok::KwLength},       {"assert", Tok::KwAssert},
      {"Both", Tok::KwBoth},
  };
  return kw;
}

std::vector<Token> lex(const std::string& src, const std::string& filename) {
  std::vector<Token> out;
  size_t i = 0, n = src.size();
  int line = 1, col = 1;

  auto here = [&] { return Span{filename, line, col}; };
  auto bump = [&](size_t k) {
    for (size_t j = 0; j < k && i < n; j++, i++) {
      if (src[i] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
    }
  };
  auto peek = [&](size_t off) -> char { return i + off < n ? src[i + off] : '\0'; };
  auto emit = [&](Tok k, size_t len, Span sp) {
    out.push_back({k, src.substr(i, len), sp});
    bump(len);
  };

  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < n && src[i] != '\n') bump(1);
      continue;
    }
    if (c == '/' && peek(1) == '*') {
      Span sp = here();
      bump(2);
      while (i < n && !(src[i] == '*' && peek(1) == '/')) bump(1);
      if (i >= n) throw SrcError(sp, "unterminated block comment");
      bump(2);
      continue;
    }
    Span sp = here();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t len = 0;
      while (std::isdigit(static_cast<unsigned char>(peek(len)))) len++;
      emit(Tok::Int, len, sp);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t len = 0;
      while (std::isalnum(static_cast<unsigned char>(peek(len))) || peek(len) == '_') len++;
      std::string word = src.substr(i, len);
      auto it = keywords().find(word);
      emit(it == keywords().end() ? Tok::Ident : it->second, len, sp);
      continue;
    }
    switch (c) {
      case '=':
        if (peek(1) == ':' && peek(2) == '=') { emit(Tok::AgreeEq, 3, sp); continue; }
        emit(Tok::Eq, 1, sp); continue;
      case ':':
        if (peek(1) == '=') { emit(Tok::Assign, 2, sp); continue; }
        emit(Tok::Colon, 1, sp); continue;
      case '<':
        if (peek(1) == '|') { emit(Tok::LeftOpen, 2, sp); continue; }
        if (peek(1) == ']') { emit(Tok::LeftClose, 2, sp); continue; }
        if (peek(1) == '<') { emit(Tok::Subset, 2, sp); continue; }
        if (peek(1) == '=') { emit(Tok::Le, 2, sp); continue; }
        if (peek(1) == '>') { emit(Tok::Ne, 2, sp); continue; }
        emit(Tok::Lt, 1, sp); continue;
      case '>':
        if (peek(1) == '=') { emit(Tok::Ge, 2, sp); continue; }
        emit(Tok::Gt, 1, sp); continue;
      case '[':
        if (peek(1) == '>') { emit(Tok::RightOpen, 2, sp); continue; }
        throw SrcError(sp, "stray '['");
      case '|':
        if (peek(1) == '_') { emit(Tok::SyncOpen, 2, sp); continue; }
        if (peek(1) == '>') { emit(Tok::RightClose, 2, sp); continue; }
        emit(Tok::Bar, 1, sp); continue;
      case '_':
        if (peek(1) == '|') { emit(Tok::SyncClose, 2, sp); continue; }
        throw SrcError(sp, "identifiers may not start with '_'");
      case '+':
        if (peek(1) == '+') { emit(Tok::Union, 2, sp); continue; }
        emit(Tok::Plus, 1, sp); continue;
      case '-':
        if (peek(1) == '>') { emit(Tok::Imp, 2, sp); continue; }
        if (peek(1) == '-') { emit(Tok::Diff, 2, sp); continue; }
        emit(Tok::Minus, 1, sp); continue;
      case '^':
        if (peek(1) == '^') { emit(Tok::Inter, 2, sp); continue; }
        throw SrcError(sp, "stray '^' (region intersection is '^^')");
      case '/':
        if (peek(1) == '\\') { emit(Tok::AndF, 2, sp); continue; }
        throw SrcError(sp, "stray '/'");
      case '\\':
        if (peek(1) == '/') { emit(Tok::OrF, 2, sp); continue; }
        throw SrcError(sp, "stray '\\'");
      case '*': emit(Tok::Star, 1, sp); continue;
      case '(': emit(Tok::LParen, 1, sp); continue;
      case ')': emit(Tok::RParen, 1, sp); continue;
      case '{': emit(Tok::LBrace, 1, sp); continue;
      case '}': emit(Tok::RBrace, 1, sp); continue;
      case ',': emit(Tok::Comma, 1, sp); continue;
      case ';': emit(Tok::Semi, 1, sp); continue;
      case '.': emit(Tok::Dot, 1, sp); continue;
      case '`': emit(Tok::Tick, 1, sp); continue;
      default:
        throw SrcError(sp, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::Eof, "", here()});
  return out;
}

}  // namespace rv
