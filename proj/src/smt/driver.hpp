// Subprocess driver for an external SMT solver. A condition is valid when the
// script plus the negated goal comes back unsat; sat means a countermodel and
// unknown (including a solver timeout) stays unknown.
#pragma once

#include <string>

namespace rv {

enum class Verdict { Valid, Invalid, Unknown };

const char* verdict_name(Verdict v);

struct SolverConfig {
  std::string solver;   // executable; empty means resolve automatically
  int timeout_s = 30;   // per query
  bool want_model = true;
};

struct SolverResult {
  Verdict verdict = Verdict::Unknown;
  std::string status;  // raw solver status token
  std::string model;   // countermodel text when sat and requested
  long time_ms = 0;
};

// Pick the solver binary: explicit choice, then $RELVERIFY_SOLVER, then z3 on
// PATH, then the build-tree fallback.
std::string resolve_solver(const std::string& explicit_solver);

SolverResult run_solver(const SolverConfig& cfg, const std::string& smt2);

}  // namespace rv
