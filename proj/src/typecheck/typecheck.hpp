#pragma once

#include "frontend/linker.hpp"

namespace rv {

// Typechecks every declaration in the program: method specs and bodies,
// invariants, predicates, boundaries. Annotates expression nodes with their
// types (Expr::ty) as it goes. Throws SrcError on the first violation.
void typecheck_program(const Program& p);

// Typechecks both sides plus the relational layer of a bimodule target.
void typecheck_biprogram(const BiProgram& bp);

// All declared field names of a program, in declaration order (unit order,
// then class order, then field order). This is the expansion of `any`.
std::vector<std::string> all_fields(const Program& p);

// Expands every G`any into one atom per declared field, preserving order
// and dropping duplicates. Non-image atoms pass through.
std::vector<EffAtom> expand_effects(const Program& p, const Effects& eff);
std::vector<BndAtom> expand_boundary(const Program& p, const std::vector<BndAtom>& bnd);

}  // namespace rv
