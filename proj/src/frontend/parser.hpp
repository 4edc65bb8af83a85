#pragma once

#include <string>
#include <vector>

#include "lang/ast.hpp"

namespace rv {

// Parses one source file (which may contain several units).
// Throws SrcError on malformed input.
std::vector<Unit> parse_units(const std::string& src, const std::string& filename);

// Reads and parses a file from disk.
std::vector<Unit> parse_file(const std::string& path);

}  // namespace rv
