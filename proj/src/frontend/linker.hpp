#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lang/ast.hpp"

namespace rv {

// Owns parsed units and resolves them by name.
struct UnitStore {
  std::vector<Unit> units;
  void add(std::vector<Unit> us);
  const Unit* find(const std::string& name) const;
};

// Where a method's spec and body live after linking. The spec preferably
// comes from the interface declaration; the body from the module.
struct MethodInfo {
  const MethodDecl* spec = nullptr;
  const MethodDecl* body = nullptr;   // null if no implementation is linked
  const Unit* spec_owner = nullptr;
  const Unit* body_owner = nullptr;
};

// A closed collection of units for one execution side: the target unit plus
// its transitively imported interfaces (and, for modules, the implemented
// interface). Class, field, global, method, and predicate names are global
// within a program.
struct Program {
  const Unit* target = nullptr;
  std::vector<const Unit*> units;  // dependency order, target last

  std::map<std::string, const ClassDecl*> classes;
  std::map<std::string, std::pair<std::string, const FieldDecl*>> fields;  // field -> (class, decl)
  std::map<std::string, const GlobalDecl*> globals;
  std::map<std::string, MethodInfo> methods;
  std::map<std::string, std::pair<const PredicateDecl*, const Unit*>> preds;

  bool has_unit(const std::string& name) const;
  // Boundary of a unit, including the one inherited from its interface.
  std::vector<BndAtom> boundary_of(const Unit* u) const;
  // All public invariants in the closure, with their owners.
  std::vector<std::pair<const NamedInv*, const Unit*>> public_invariants() const;
  // Private invariants of one unit (plus its interface, for modules).
  std::vector<const NamedInv*> private_invariants(const Unit* u) const;
};

struct BiMethodInfo {
  const BiMethodDecl* decl = nullptr;
  const Unit* owner = nullptr;
};

// A bimodule target: left and right unary programs plus the relational
// declarations in scope (the bimodule itself and its imported bimodules).
struct BiProgram {
  const Unit* target = nullptr;
  Program left, right;
  std::vector<const Unit*> bimods;  // imported bimodules then target
  std::map<std::string, BiMethodInfo> bimethods;

  // Couplings of the target bimodule only; imported ones stay hidden.
  std::vector<const CouplingDecl*> own_couplings() const;
};

// Links the program for a module or interface target.
Program link_program(const UnitStore& store, const std::string& target);

// Links a bimodule target.
BiProgram link_biprogram(const UnitStore& store, const std::string& target);

}  // namespace rv
