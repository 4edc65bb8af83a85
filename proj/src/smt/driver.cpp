#include "smt/driver.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef RELVERIFY_FALLBACK_SOLVER
#define RELVERIFY_FALLBACK_SOLVER "z3"
#endif

namespace rv {
namespace {

std::atomic<long> g_tmp_counter{0};

std::string run_capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  pclose(p);
  return out;
}

bool executable(const std::string& path) { return access(path.c_str(), X_OK) == 0; }

std::string path_lookup(const std::string& name) {
  const char* pv = std::getenv("PATH");
  if (!pv) return "";
  std::stringstream ss(pv);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    std::string cand = dir + "/" + name;
    if (executable(cand)) return cand;
  }
  return "";
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// First status token in the solver output, skipping any noise around it.
std::string first_status(const std::string& out, size_t* line_end) {
  size_t pos = 0;
  while (pos < out.size()) {
    size_t nl = out.find('\n', pos);
    if (nl == std::string::npos) nl = out.size();
    std::string line = trim(out.substr(pos, nl - pos));
    if (line == "sat" || line == "unsat" || line == "unknown" || line == "timeout") {
      if (line_end) *line_end = nl;
      return line;
    }
    pos = nl + 1;
  }
  if (line_end) *line_end = out.size();
  return "";
}

std::string write_tmp(const std::string& content) {
  std::string path = "/tmp/relverify_" + std::to_string(getpid()) + "_" +
                     std::to_string(g_tmp_counter.fetch_add(1)) + ".smt2";
  std::ofstream f(path);
  f << content;
  return path;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

std::string resolve_solver(const std::string& explicit_solver) {
  if (!explicit_solver.empty()) return explicit_solver;
  if (const char* env = std::getenv("RELVERIFY_SOLVER"); env && *env) return env;
  std::string z3 = path_lookup("z3");
  if (!z3.empty()) return z3;
  return RELVERIFY_FALLBACK_SOLVER;
}

SolverResult run_solver(const SolverConfig& cfg, const std::string& smt2) {
  SolverResult r;
  std::string solver = resolve_solver(cfg.solver);
  auto start = std::chrono::steady_clock::now();

  auto invoke = [&](const std::string& content) {
    std::string path = write_tmp(content);
    // Belt and braces: the solver gets a soft limit, the subprocess a hard one.
    std::string cmd = "timeout " + std::to_string(cfg.timeout_s + 10) + " '" + solver +
                      "' -T:" + std::to_string(cfg.timeout_s) + " " + path + " 2>&1";
    std::string out = run_capture(cmd);
    unlink(path.c_str());
    return out;
  };

  std::string out = invoke(smt2);
  r.status = first_status(out, nullptr);
  if (r.status == "unsat") {
    r.verdict = Verdict::Valid;
  } else if (r.status == "sat") {
    r.verdict = Verdict::Invalid;
    if (cfg.want_model) {
      std::string again = smt2 + "(get-model)\n";
      std::string mout = invoke(again);
      size_t end = 0;
      if (first_status(mout, &end) == "sat" && end < mout.size())
        r.model = trim(mout.substr(end + 1));
    }
  } else {
    r.verdict = Verdict::Unknown;
    if (r.status.empty()) r.status = "no-output";
  }
  r.time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
  return r;
}

}  // namespace rv
