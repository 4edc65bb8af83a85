#pragma once

// Runtime values shared by the evaluator and the test oracles: unbounded
// integers, references, regions (finite reference sets), and math-level
// integer lists. Reference 0 is the null reference everywhere.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace rv {

using Ref = std::uint64_t;
inline constexpr Ref NULL_REF = 0;

class Region {
 public:
  Region() = default;
  explicit Region(std::set<Ref> elems) : elems_(std::move(elems)) {}
  static Region singleton(Ref r) { return Region(std::set<Ref>{r}); }

  bool contains(Ref r) const { return elems_.count(r) > 0; }
  void insert(Ref r) { elems_.insert(r); }
  bool empty() const { return elems_.empty(); }
  std::size_t size() const { return elems_.size(); }
  const std::set<Ref>& elems() const { return elems_; }

  Region unite(const Region& o) const;
  Region intersect(const Region& o) const;
  Region diff(const Region& o) const;
  bool subset_of(const Region& o) const;
  bool disjoint_with(const Region& o) const;
  // Disjointness in the style needed for boundary checks: null is allowed
  // to be on both sides, only proper references matter.
  bool disjoint_mod_null(const Region& o) const;

  bool operator==(const Region& o) const { return elems_ == o.elems_; }
  std::string str() const;

 private:
  std::set<Ref> elems_;
};

// Math-level integer list (nil / cons).
struct IntList {
  std::vector<mpz_class> items;  // items[0] is the head
  bool operator==(const IntList& o) const { return items == o.items; }
  std::string str() const;
};

enum class Vk { Unit, Int, Bool, Ref, Rgn, List };

class Value {
 public:
  Value() : k_(Vk::Unit) {}
  static Value unit() { return Value(); }
  static Value integer(mpz_class v) {
    Value x;
    x.k_ = Vk::Int;
    x.i_ = std::move(v);
    return x;
  }
  static Value boolean(bool v) {
    Value x;
    x.k_ = Vk::Bool;
    x.b_ = v;
    return x;
  }
  static Value ref(Ref r) {
    Value x;
    x.k_ = Vk::Ref;
    x.r_ = r;
    return x;
  }
  static Value region(Region g) {
    Value x;
    x.k_ = Vk::Rgn;
    x.g_ = std::move(g);
    return x;
  }
  static Value list(IntList l) {
    Value x;
    x.k_ = Vk::List;
    x.l_ = std::move(l);
    return x;
  }

  Vk kind() const { return k_; }
  bool is_unit() const { return k_ == Vk::Unit; }
  const mpz_class& as_int() const { return i_; }
  bool as_bool() const { return b_; }
  Ref as_ref() const { return r_; }
  const Region& as_region() const { return g_; }
  const IntList& as_list() const { return l_; }

  bool operator==(const Value& o) const;
  bool operator!=(const Value& o) const { return !(*this == o); }
  std::string str() const;

 private:
  Vk k_;
  mpz_class i_ = 0;
  bool b_ = false;
  Ref r_ = NULL_REF;
  Region g_;
  IntList l_;
};

// Partial bijection on non-null references, used to relate allocations of
// two executions. Never maps or contains the null reference.
class RefPerm {
 public:
  bool add(Ref l, Ref r);          // false if it would break bijectivity
  void extend(Ref l, Ref r);       // add; throws std::logic_error on clash
  std::optional<Ref> fwd(Ref l) const;
  std::optional<Ref> bwd(Ref r) const;
  bool in_ldom(Ref l) const { return fwd_.count(l) > 0; }
  bool in_rdom(Ref r) const { return bwd_.count(r) > 0; }
  std::size_t size() const { return fwd_.size(); }

  // Do two references agree under this permutation? Null pairs with null
  // and with nothing else.
  bool agree_ref(Ref l, Ref r) const;
  // Region agreement: the permutation restricts to a bijection between the
  // non-null parts, and null membership matches.
  bool agree_region(const Region& l, const Region& r) const;

  bool is_bijection() const;  // invariant check, used by tests
  const std::map<Ref, Ref>& forward_map() const { return fwd_; }
  std::string str() const;

 private:
  std::map<Ref, Ref> fwd_;
  std::map<Ref, Ref> bwd_;
};

}  // namespace rv
