#pragma once

// Random symbol pools and the residue property sweep shared by the
// cohomology suite and the acceptance binary.

#include <algorithm>
#include <iterator>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "qb/cohomology.hpp"

namespace fixtures {

using namespace qb;

// A class with table ids replaced by normalized forms, so that residues
// computed into different target tables can be compared.
using CanonEntry = std::vector<HomogeneousForm>;
using CanonSymbol = std::vector<CanonEntry>;
using CanonClass = std::set<CanonSymbol>;

inline CanonClass canon(const CohClass& c, const FactorTable& t) {
  CanonClass out;
  for (const auto& s : c.symbols()) {
    CanonSymbol cs;
    for (const auto& e : s.entries) {
      CanonEntry ce;
      for (auto id : e.odd) ce.push_back(t[id].form.normalized().first);
      std::sort(ce.begin(), ce.end());
      cs.push_back(ce);
    }
    std::sort(cs.begin(), cs.end());
    out.insert(cs);
  }
  return out;
}

inline CanonClass sym_diff(const CanonClass& a, const CanonClass& b) {
  CanonClass out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

struct RandomPool {
  FactorTable table{2};
  std::vector<FactorId> linear;
};

inline RandomPool make_pool(SplitMix64& rng, int size) {
  RandomPool p;
  p.linear.push_back(p.table.variable(0));
  while (static_cast<int>(p.linear.size()) < size) {
    std::vector<Rational> c(3);
    for (auto& x : c) x = rng.uniform_int(-6, 6);
    const auto f = HomogeneousForm::linear(c);
    if (f.is_zero()) continue;
    const auto before = p.table.size();
    const auto id = p.table.intern(f, FactorKind::Linear).first;
    if (p.table.size() > before) p.linear.push_back(id);
  }
  return p;
}

// Even-size nonempty subset of the pool.
inline SquareClass random_entry(const RandomPool& p, SplitMix64& rng) {
  for (;;) {
    SquareClass c;
    for (auto id : p.linear)
      if (rng.uniform_int(0, 2) == 0) c.toggle(id);
    if (!c.trivial() && c.odd.size() % 2 == 0) return c;
  }
}

inline Symbol random_symbol(const RandomPool& p, SplitMix64& rng, int degree) {
  Symbol s;
  for (int k = 0; k < degree; ++k) s.entries.push_back(random_entry(p, rng));
  return s;
}

struct ResidueSweep {
  int symbols = 0;
  int zero_failures = 0;         // no entry meets D, residue nonzero
  int additivity_failures = 0;
  int permutation_failures = 0;
  int square_failures = 0;
  int tame_checked = 0;          // degree-2 symbols compared with the tame symbol
  int tame_failures = 0;

  bool ok() const {
    return zero_failures + additivity_failures + permutation_failures + square_failures + tame_failures == 0 &&
           tame_checked > 0;
  }
};

inline ResidueSweep residue_sweep(std::uint64_t seed, int count) {
  SplitMix64 rng(seed);
  const auto pool = make_pool(rng, 8);
  ResidueSweep out;
  for (int trial = 0; trial < count; ++trial) {
    ++out.symbols;
    const int degree = static_cast<int>(rng.uniform_int(1, 3));
    const auto s1 = random_symbol(pool, rng, degree), s2 = random_symbol(pool, rng, degree);
    const FactorId d = pool.linear[rng.uniform_int(0, pool.linear.size() - 1)];
    const auto c1 = CohClass::of(s1), c2 = CohClass::of(s2);
    const auto r1 = residue(c1, d, pool.table), r2 = residue(c2, d, pool.table);
    const auto r12 = residue(c1 + c2, d, pool.table);
    const auto k1 = canon(r1.cls, r1.table);

    bool meets = false;
    for (const auto& e : s1.entries) meets = meets || e.contains(d);
    if (!meets && !r1.cls.is_zero()) ++out.zero_failures;

    if (canon(r12.cls, r12.table) != sym_diff(k1, canon(r2.cls, r2.table))) ++out.additivity_failures;

    Symbol perm = s1;
    std::reverse(perm.entries.begin(), perm.entries.end());
    const auto rp = residue(CohClass::of(perm), d, pool.table);
    if (canon(rp.cls, rp.table) != k1) ++out.permutation_failures;

    // each entry times a square, including the square of D itself
    Symbol sq;
    for (const auto& e : s1.entries) {
      FactoredForm f;
      for (auto id : e.odd) f = f * FactoredForm::of(id);
      f = f * FactoredForm::of(d, 2) * FactoredForm::of(pool.linear[0], 2);
      sq.entries.push_back(class_of(f));
    }
    const auto rs = residue(CohClass::of(sq), d, pool.table);
    if (canon(rs.cls, rs.table) != k1) ++out.square_failures;

    if (degree == 2 && !c1.is_zero()) {
      const auto F = oracle::class_form(s1.entries[0], pool.table), G = oracle::class_form(s1.entries[1], pool.table);
      const auto& D = pool.table[d].form;
      const auto expected = oracle::tame_symbol_form(F, G, D);
      HomogeneousForm got = HomogeneousForm::constant(pool.table.ambient_dim(), 1);
      for (const auto& s : r1.cls.symbols())
        got = got * oracle::lift_from_hyperplane(oracle::class_form(s.entries[0], r1.table), hyperplane_pivot(D));
      for (const auto& [p, q] : oracle::lines_in(D, rng, 1))
        if (!oracle::binary_is_square_class_trivial(oracle::restrict_to_line(expected * got, p, q))) ++out.tame_failures;
      ++out.tame_checked;
    }
  }
  return out;
}

}  // namespace fixtures
