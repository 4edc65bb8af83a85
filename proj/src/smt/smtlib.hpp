// Rendering of verification conditions as self-contained SMT-LIB 2 scripts.
// Theory blocks are included on demand: a block is pulled in when its trigger
// symbol occurs in the script, the goal, or an already-included block, so each
// dumped file stays small and readable.
#pragma once

#include <string>

#include "vcgen/vcgen.hpp"

namespace rv {

std::string vc_smt2(const Theory& th, const VC& vc);

}  // namespace rv
