#include "smt/smtlib.hpp"

#include <cctype>
#include <vector>

namespace rv {
namespace {

bool sym_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '!';
}

// Whole-token occurrence of sym in text.
bool has_token(const std::string& text, const std::string& sym) {
  size_t pos = 0;
  while ((pos = text.find(sym, pos)) != std::string::npos) {
    bool lb = pos == 0 || !sym_char(text[pos - 1]);
    size_t end = pos + sym.size();
    bool rb = end >= text.size() || !sym_char(text[end]);
    if (lb && rb) return true;
    ++pos;
  }
  return false;
}

}  // namespace

std::string vc_smt2(const Theory& th, const VC& vc) {
  std::string doc;
  for (const auto& l : vc.script) {
    doc += l;
    doc += '\n';
  }
  doc += vc.goal;

  // Fixpoint: included blocks may mention further theory symbols.
  std::vector<bool> inc(th.blocks.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < th.blocks.size(); ++i) {
      if (inc[i]) continue;
      if (!has_token(doc, th.blocks[i].first)) continue;
      inc[i] = true;
      doc += '\n';
      doc += th.blocks[i].second;
      changed = true;
    }
  }

  std::string out = "; " + vc.label + "\n" + th.preamble + "\n";
  for (size_t i = 0; i < th.blocks.size(); ++i)
    if (inc[i]) {
      out += th.blocks[i].second;
      out += '\n';
    }
  for (const auto& l : vc.script) {
    out += l;
    out += '\n';
  }
  out += "(assert (not " + vc.goal + "))\n(check-sat)\n";
  return out;
}

}  // namespace rv
