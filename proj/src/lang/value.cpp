#include "lang/value.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rv {

Region Region::unite(const Region& o) const {
  std::set<Ref> out;
  std::set_union(elems_.begin(), elems_.end(), o.elems_.begin(), o.elems_.end(),
                 std::inserter(out, out.begin()));
  return Region(std::move(out));
}

Region Region::intersect(const Region& o) const {
  std::set<Ref> out;
  std::set_intersection(elems_.begin(), elems_.end(), o.elems_.begin(), o.elems_.end(),
                        std::inserter(out, out.begin()));
  return Region(std::move(out));
}

Region Region::diff(const Region& o) const {
  std::set<Ref> out;
  std::set_difference(elems_.begin(), elems_.end(), o.elems_.begin(), o.elems_.end(),
                      std::inserter(out, out.begin()));
  return Region(std::move(out));
}

bool Region::subset_of(const Region& o) const {
  return std::includes(o.elems_.begin(), o.elems_.end(), elems_.begin(), elems_.end());
}

bool Region::disjoint_with(const Region& o) const {
  return intersect(o).empty();
}

bool Region::disjoint_mod_null(const Region& o) const {
  Region both = intersect(o);
  for (Ref r : both.elems())
    if (r != NULL_REF) return false;
  return true;
}

std::string Region::str() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (Ref r : elems_) {
    if (!first) os << ", ";
    first = false;
    if (r == NULL_REF)
      os << "null";
    else
      os << "#" << r;
  }
  os << "}";
  return os.str();
}

std::string IntList::str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < items.size(); i++) {
    if (i) os << ", ";
    os << items[i].get_str();
  }
  os << "]";
  return os.str();
}

bool Value::operator==(const Value& o) const {
  if (k_ != o.k_) return false;
  switch (k_) {
    case Vk::Unit: return true;
    case Vk::Int: return i_ == o.i_;
    case Vk::Bool: return b_ == o.b_;
    case Vk::Ref: return r_ == o.r_;
    case Vk::Rgn: return g_ == o.g_;
    case Vk::List: return l_ == o.l_;
  }
  return false;
}

std::string Value::str() const {
  switch (k_) {
    case Vk::Unit: return "()";
    case Vk::Int: return i_.get_str();
    case Vk::Bool: return b_ ? "true" : "false";
    case Vk::Ref: return r_ == NULL_REF ? "null" : "#" + std::to_string(r_);
    case Vk::Rgn: return g_.str();
    case Vk::List: return l_.str();
  }
  return "?";
}

bool RefPerm::add(Ref l, Ref r) {
  if (l == NULL_REF || r == NULL_REF) return false;
  auto fi = fwd_.find(l);
  auto bi = bwd_.find(r);
  if (fi != fwd_.end()) return bi != bwd_.end() && fi->second == r && bi->second == l;
  if (bi != bwd_.end()) return false;
  fwd_[l] = r;
  bwd_[r] = l;
  return true;
}

void RefPerm::extend(Ref l, Ref r) {
  if (!add(l, r))
    throw std::logic_error("RefPerm::extend: pairing " + std::to_string(l) + "~" +
                           std::to_string(r) + " breaks bijectivity");
}

std::optional<Ref> RefPerm::fwd(Ref l) const {
  auto it = fwd_.find(l);
  if (it == fwd_.end()) return std::nullopt;
  return it->second;
}

std::optional<Ref> RefPerm::bwd(Ref r) const {
  auto it = bwd_.find(r);
  if (it == bwd_.end()) return std::nullopt;
  return it->second;
}

bool RefPerm::agree_ref(Ref l, Ref r) const {
  if (l == NULL_REF || r == NULL_REF) return l == NULL_REF && r == NULL_REF;
  auto m = fwd(l);
  return m && *m == r;
}

// Elementwise image equality: applying the permutation to the mapped part of
// the left region (with null carried across) yields exactly the right region.
// Left elements outside the permutation's domain contribute nothing.
bool RefPerm::agree_region(const Region& l, const Region& r) const {
  if (l.contains(NULL_REF) != r.contains(NULL_REF)) return false;
  for (Ref p : l.elems()) {
    if (p == NULL_REF) continue;
    auto m = fwd(p);
    if (m && !r.contains(*m)) return false;
  }
  for (Ref q : r.elems()) {
    if (q == NULL_REF) continue;
    auto m = bwd(q);
    if (!m || !l.contains(*m)) return false;
  }
  return true;
}

bool RefPerm::is_bijection() const {
  if (fwd_.size() != bwd_.size()) return false;
  for (auto& [l, r] : fwd_) {
    if (l == NULL_REF || r == NULL_REF) return false;
    auto it = bwd_.find(r);
    if (it == bwd_.end() || it->second != l) return false;
  }
  return true;
}

std::string RefPerm::str() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (auto& [l, r] : fwd_) {
    if (!first) os << ", ";
    first = false;
    os << "#" << l << "~#" << r;
  }
  os << "}";
  return os.str();
}

}  // namespace rv
