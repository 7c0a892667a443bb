#pragma once

// Canonical tables of C-irreducible factors (linear forms and quadrics of rank
// >= 3) and square classes in K*/(K*)^2 for K = C(P^n).
//
// Model: coefficients are rational, every nonzero constant counts as a square.
// A square class is the set of factors occurring to odd power. Classes of
// degree-0 rational functions always have even total factor degree.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qb/errors.hpp"
#include "qb/forms.hpp"

namespace qb {

enum class FactorKind { Linear, Quadric };

inline const char* to_string(FactorKind k) { return k == FactorKind::Linear ? "linear" : "quadric"; }

struct FactorId {
  std::uint32_t value = 0;
  auto operator<=>(const FactorId&) const = default;
};

struct FactorEntry {
  HomogeneousForm form;  // leading coefficient (lex order) is 1
  FactorKind kind;
};

/// Append-only table of pairwise non-proportional irreducible forms on P^n.
/// Ids are indices, stable for the lifetime of the table.
class FactorTable {
 public:
  explicit FactorTable(int n = 0) : n_(n) {}

  int ambient_dim() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<FactorEntry>& entries() const { return entries_; }

  const FactorEntry& operator[](FactorId id) const {
    if (id.value >= entries_.size()) throw std::out_of_range("factor id");
    return entries_[id.value];
  }

  int degree(FactorId id) const { return (*this)[id].form.degree(); }

  std::optional<FactorId> find(const HomogeneousForm& f) const {
    if (f.is_zero()) return std::nullopt;
    auto it = index_.find(f.normalized().first);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Adds an irreducible form (caller vouches for irreducibility); returns the
  /// id and the scalar c with f = c * entry.
  std::pair<FactorId, Rational> intern(const HomogeneousForm& f, FactorKind kind) {
    if (f.ambient_dim() != n_) throw DimMismatch("factor on the wrong projective space");
    if (f.is_zero()) throw std::invalid_argument("zero is not a factor");
    const int want = kind == FactorKind::Linear ? 1 : 2;
    if (f.degree() != want) throw WrongDegree("factor kind does not match degree");
    auto [normal, lc] = f.normalized();
    if (auto it = index_.find(normal); it != index_.end()) return {it->second, lc};
    if (frozen_) throw std::logic_error("FactorTable is frozen");
    const FactorId id{static_cast<std::uint32_t>(entries_.size())};
    index_.emplace(normal, id);
    entries_.push_back({std::move(normal), kind});
    return {id, lc};
  }

  FactorId variable(int i) { return intern(HomogeneousForm::variable(n_, i), FactorKind::Linear).first; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  int n_;
  std::vector<FactorEntry> entries_;
  std::map<HomogeneousForm, FactorId> index_;
  bool frozen_ = false;
};

/// constant * prod factor^exponent.
struct FactoredForm {
  Rational constant = 1;
  std::map<FactorId, int> factors;

  static FactoredForm of(FactorId id, int e = 1) {
    FactoredForm f;
    if (e > 0) f.factors[id] = e;
    return f;
  }

  int degree(const FactorTable& t) const {
    int d = 0;
    for (const auto& [id, e] : factors) d += e * t.degree(id);
    return d;
  }

  bool contains(FactorId id) const { return factors.count(id) != 0; }

  int exponent(FactorId id) const {
    auto it = factors.find(id);
    return it == factors.end() ? 0 : it->second;
  }

  FactoredForm operator*(const FactoredForm& o) const {
    FactoredForm r = *this;
    r.constant *= o.constant;
    for (const auto& [id, e] : o.factors) r.factors[id] += e;
    return r;
  }

  FactoredForm pow(int e) const {
    FactoredForm r;
    r.constant = 1;
    for (int i = 0; i < e; ++i) r.constant *= constant;
    if (e > 0)
      for (const auto& [id, x] : factors) r.factors[id] = x * e;
    return r;
  }

  /// Removes one copy of a factor that must be present.
  FactoredForm divided_by(FactorId id) const {
    FactoredForm r = *this;
    auto it = r.factors.find(id);
    if (it == r.factors.end()) throw std::invalid_argument("factor not present");
    if (--it->second == 0) r.factors.erase(it);
    return r;
  }

  HomogeneousForm expand(const FactorTable& t) const {
    HomogeneousForm acc = HomogeneousForm::constant(t.ambient_dim(), constant);
    for (const auto& [id, e] : factors) acc = acc * t[id].form.pow(e);
    return acc;
  }

  bool operator==(const FactoredForm&) const = default;
};

/// Element of K*/(K*)^2: sorted set of factors with odd exponent.
struct SquareClass {
  std::vector<FactorId> odd;

  SquareClass() = default;
  SquareClass(std::initializer_list<FactorId> ids) {
    for (auto id : ids) toggle(id);
  }

  bool trivial() const { return odd.empty(); }
  bool contains(FactorId id) const { return std::binary_search(odd.begin(), odd.end(), id); }

  void toggle(FactorId id) {
    auto it = std::lower_bound(odd.begin(), odd.end(), id);
    if (it != odd.end() && *it == id) odd.erase(it);
    else odd.insert(it, id);
  }

  int degree(const FactorTable& t) const {
    int d = 0;
    for (auto id : odd) d += t.degree(id);
    return d;
  }

  auto operator<=>(const SquareClass&) const = default;
  bool operator==(const SquareClass&) const = default;
};

inline SquareClass mul_class(const SquareClass& a, const SquareClass& b) {
  SquareClass r;
  std::set_symmetric_difference(a.odd.begin(), a.odd.end(), b.odd.begin(), b.odd.end(), std::back_inserter(r.odd));
  return r;
}

inline SquareClass operator*(const SquareClass& a, const SquareClass& b) { return mul_class(a, b); }

inline SquareClass class_of(const FactoredForm& f) {
  SquareClass c;
  for (const auto& [id, e] : f.factors)
    if (e % 2 != 0) c.odd.push_back(id);
  return c;
}

namespace detail {

inline FactoredForm register_irreducible_or_split(FactorTable& table, const HomogeneousForm& f) {
  FactoredForm out;
  if (f.degree() == 0) {
    out.constant = f.coefficient(Monomial::one(f.num_vars()));
    return out;
  }
  if (f.degree() == 1) {
    auto [id, c] = table.intern(f, FactorKind::Linear);
    out.constant = c;
    out.factors[id] = 1;
    return out;
  }
  if (f.degree() != 2) throw OutsideUniverse("irreducible factor of degree " + std::to_string(f.degree()) + " needs a hint");
  if (quadric_rank(f) >= 3) {
    auto [id, c] = table.intern(f, FactorKind::Quadric);
    out.constant = c;
    out.factors[id] = 1;
    return out;
  }
  // rank <= 2: q = a u^2 (+ b v^2)
  const auto diag = diagonalize_quadric(f);
  auto add_linear = [&](const HomogeneousForm& l) {
    auto [id, c] = table.intern(l, FactorKind::Linear);
    out.constant *= c;
    out.factors[id] += 1;
  };
  if (diag.size() == 1) {
    out.constant = diag[0].first;
    add_linear(diag[0].second);
    add_linear(diag[0].second);
    return out;
  }
  const auto& [a, u] = diag[0];
  const auto& [b, v] = diag[1];
  const Rational ratio = -b / a;
  if (!is_rational_square(ratio))
    throw OutsideUniverse("rank-2 quadric " + to_text(f) + " splits only over Q(sqrt(" + to_string(ratio) + "))");
  const Rational s = rational_sqrt(ratio);
  out.constant = a;
  add_linear(u - v.scaled(s));
  add_linear(u + v.scaled(s));
  return out;
}

}  // namespace detail

/// Factors `form` into the table's universe. With a hint, the hint forms are
/// registered and multiplied, and must reproduce `form` up to a constant.
inline FactoredForm register_form(FactorTable& table, const HomogeneousForm& form,
                                  const std::optional<std::vector<HomogeneousForm>>& hint = std::nullopt) {
  if (form.is_zero()) throw std::invalid_argument("cannot register the zero form");
  if (form.ambient_dim() != table.ambient_dim()) throw DimMismatch("form on the wrong projective space");
  if (!hint) return detail::register_irreducible_or_split(table, form);

  FactoredForm product;
  HomogeneousForm expanded = HomogeneousForm::constant(form.ambient_dim(), 1);
  for (const auto& h : *hint) {
    product = product * register_form(table, h);
    expanded = expanded * h;
  }
  if (expanded.degree() != form.degree() || expanded.is_zero())
    throw std::invalid_argument("hint degrees do not add up to the form degree");
  const Rational scale = form.leading_term().second / expanded.leading_term().second;
  if (!(expanded.scaled(scale) == form)) throw std::invalid_argument("hint does not factor the form");
  // product.constant * prod(entries) == expanded
  product.constant *= scale;
  return product;
}

/// Restriction of units to the hyperplane {l = 0}; restricted factors are
/// re-registered in a fresh table on P^{n-1}.
class HyperplaneRestriction {
 public:
  HyperplaneRestriction(const FactorTable& source, FactorId hyperplane)
      : source_(&source), hyperplane_(hyperplane), target_(source.ambient_dim() - 1) {
    const auto& e = source[hyperplane];
    if (e.kind != FactorKind::Linear) throw WrongDegree("hyperplane factor must be linear");
    rows_ = hyperplane_substitution(e.form);
  }

  const FactorTable& source() const { return *source_; }
  FactorId hyperplane() const { return hyperplane_; }
  const FactorTable& target() const { return target_; }
  FactorTable& target() { return target_; }

  HomogeneousForm restrict_form(const HomogeneousForm& f) const { return compose_linear(f, rows_); }

  /// Factored restriction of one table entry.
  const FactoredForm& restrict_factor(FactorId id) {
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
    if (id == hyperplane_) throw NotAUnit("factor is the hyperplane itself");
    const HomogeneousForm r = restrict_form((*source_)[id].form);
    if (r.is_zero()) throw NotAUnit(to_text((*source_)[id].form) + " vanishes on the hyperplane");
    return cache_.emplace(id, register_form(target_, r)).first->second;
  }

  SquareClass restrict_class(const SquareClass& c) {
    SquareClass out;
    for (auto id : c.odd) out = out * class_of(restrict_factor(id));
    return out;
  }

  /// Class of an arbitrary nonzero form after restriction.
  SquareClass restrict_form_class(const HomogeneousForm& f) {
    const HomogeneousForm r = restrict_form(f);
    if (r.is_zero()) throw NotAUnit(to_text(f) + " vanishes on the hyperplane");
    return class_of(register_form(target_, r));
  }

 private:
  const FactorTable* source_;
  FactorId hyperplane_;
  FactorTable target_;
  std::vector<HomogeneousForm> rows_;
  std::map<FactorId, FactoredForm> cache_;
};

/// One-shot restriction of a class into `target` (a table on the hyperplane).
inline SquareClass restrict_class(const SquareClass& c, FactorId hyperplane, const FactorTable& source,
                                  FactorTable& target) {
  const auto rows = hyperplane_substitution(source[hyperplane].form);
  if (target.ambient_dim() != source.ambient_dim() - 1) throw DimMismatch("target table dimension");
  SquareClass out;
  for (auto id : c.odd) {
    if (id == hyperplane) throw NotAUnit("class contains the hyperplane");
    const HomogeneousForm r = compose_linear(source[id].form, rows);
    if (r.is_zero()) throw NotAUnit(to_text(source[id].form) + " vanishes on the hyperplane");
    out = out * class_of(register_form(target, r));
  }
  return out;
}

}  // namespace qb
