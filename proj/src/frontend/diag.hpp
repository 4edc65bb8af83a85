#pragma once

#include <stdexcept>
#include <string>

#include "lang/ast.hpp"

namespace rv {

// All front-half failures (lexing, parsing, linking, typechecking) surface
// as this exception; the driver formats it as path:line:col: error: msg.
struct SrcError : std::runtime_error {
  Span sp;
  SrcError(Span s, const std::string& msg)
      : std::runtime_error(s.str() + ": error: " + msg), sp(s) {}
};

}  // namespace rv
