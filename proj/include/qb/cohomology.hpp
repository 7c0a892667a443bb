#pragma once

// Mod-2 symbol calculus for H^n(K, mu_2^{(x)n}), K = C(P^n).
//
// A CohClass is a formal mod-2 sum of normalized symbols. Only syntactic
// identities are applied (sorting, (a,a) = 0, (1,b) = 0, c + c = 0), so
// equality is sound only when it is syntactic; nonvanishing is established by
// residue chains that end on a curve, where square classes are faithful.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qb/errors.hpp"
#include "qb/forms.hpp"
#include "qb/linalg.hpp"
#include "qb/prng.hpp"
#include "qb/square_classes.hpp"

namespace qb {

struct Symbol {
  std::vector<SquareClass> entries;

  int degree() const { return static_cast<int>(entries.size()); }
  auto operator<=>(const Symbol&) const = default;
  bool operator==(const Symbol&) const = default;
};

/// Sorted entries, or nullopt when the symbol vanishes (a trivial entry, or a
/// repeated entry: (a, a) = (a, -1) = 0 since -1 is a square).
inline std::optional<Symbol> normalize(Symbol s) {
  std::sort(s.entries.begin(), s.entries.end());
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    if (s.entries[i].trivial()) return std::nullopt;
    if (i > 0 && s.entries[i] == s.entries[i - 1]) return std::nullopt;
  }
  return s;
}

class CohClass {
 public:
  explicit CohClass(int degree = 0) : degree_(degree) {}

  static CohClass of(Symbol s) {
    CohClass c(s.degree());
    c.add_symbol(std::move(s));
    return c;
  }

  int degree() const { return degree_; }
  const std::set<Symbol>& symbols() const { return symbols_; }
  bool is_zero() const { return symbols_.empty(); }

  /// Normalizes and adds mod 2.
  void add_symbol(Symbol s) {
    if (s.degree() != degree_) throw DegreeMismatch("symbol degree " + std::to_string(s.degree()));
    auto n = normalize(std::move(s));
    if (!n) return;
    if (auto it = symbols_.find(*n); it != symbols_.end()) symbols_.erase(it);
    else symbols_.insert(std::move(*n));
  }

  friend CohClass operator+(const CohClass& a, const CohClass& b) {
    if (a.degree_ != b.degree_) throw DegreeMismatch(std::to_string(a.degree_) + " vs " + std::to_string(b.degree_));
    CohClass r = a;
    for (const auto& s : b.symbols_) r.add_symbol(s);
    return r;
  }

  bool operator==(const CohClass&) const = default;

 private:
  int degree_;
  std::set<Symbol> symbols_;
};

inline CohClass add(const CohClass& a, const CohClass& b) { return a + b; }

/// Residue of (pi u_1, ..., pi u_m, v_1, ..., v_k) from reduced units:
/// zero for m = 0, (v) for m = 1, sum_i (u_1..^u_i..u_m, v) for m >= 2.
/// For m = 1 the odd-entry unit is not used and `odd_units` may be empty.
inline std::vector<Symbol> residue_formula(std::size_t m, const std::vector<SquareClass>& odd_units,
                                           const std::vector<SquareClass>& even_units) {
  std::vector<Symbol> out;
  if (m == 0) return out;
  if (m == 1) {
    out.push_back(Symbol{even_units});
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    Symbol s;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) s.entries.push_back(odd_units[j]);
    s.entries.insert(s.entries.end(), even_units.begin(), even_units.end());
    out.push_back(std::move(s));
  }
  return out;
}

struct ResidueOutcome {
  FactorTable table;  // coordinate ring of the divisor, P^{n-1}
  CohClass cls;
};

/// Residue along a linear divisor D = {l = 0}. Uniformizer l / x_k with k the
/// lowest coordinate index that is not the pivot of l.
inline ResidueOutcome residue(const CohClass& c, FactorId divisor, const FactorTable& table) {
  if (c.degree() < 1) throw DegreeMismatch("residue of a degree-0 class");
  HyperplaneRestriction res(table, divisor);
  const int pivot = hyperplane_pivot(table[divisor].form);
  const int k = pivot == 0 ? 1 : 0;
  std::optional<SquareClass> denominator;
  auto denom = [&]() -> const SquareClass& {
    if (!denominator) denominator = res.restrict_form_class(HomogeneousForm::variable(table.ambient_dim(), k));
    return *denominator;
  };

  CohClass out(c.degree() - 1);
  for (const auto& sym : c.symbols()) {
    std::size_t m = 0;
    for (const auto& e : sym.entries) {
      if (e.degree(table) % 2 != 0)
        throw std::invalid_argument("symbol entry is not the class of a degree-0 function");
      if (e.contains(divisor)) ++m;
    }
    if (m == 0) continue;
    std::vector<SquareClass> odd_units, even_units;
    for (const auto& e : sym.entries) {
      if (e.contains(divisor)) {
        if (m >= 2) {
          SquareClass unit = e;
          unit.toggle(divisor);
          odd_units.push_back(res.restrict_class(unit) * denom());
        }
      } else {
        even_units.push_back(res.restrict_class(e));
      }
    }
    for (auto& s : residue_formula(m, odd_units, even_units)) out.add_symbol(std::move(s));
  }
  return {std::move(res.target()), std::move(out)};
}

enum class ChainVerdict { Nonzero, Inconclusive };

inline const char* to_string(ChainVerdict v) { return v == ChainVerdict::Nonzero ? "nonzero" : "inconclusive"; }

struct ResidueStep {
  int coordinate = 0;  // chart coordinate y_i whose vanishing defines the divisor
  FactorTable table;   // table of the divisor after the step
  CohClass cls;        // residue after the step
};

struct ResidueChainCertificate {
  std::vector<FactorId> chain;  // hyperplanes in the source table, in residue order
  Matrix chart;                 // rows: chart coordinates y = chart * x
  FactorTable chart_table;      // source factors rewritten in chart coordinates
  CohClass chart_class;
  std::vector<ResidueStep> steps;
  FactorTable terminal_table;
  SquareClass terminal;
  ChainVerdict verdict = ChainVerdict::Inconclusive;
};

/// Iterated residues along chain[0], chain[1], ... down to a line.
///
/// Coordinates y = M x are chosen with y_0 = x_0 and y_{n-s} = chain[s], so
/// each residue eliminates the top chart coordinate. Requires x_0 not to
/// vanish identically on the line cut out by the chain.
inline ResidueChainCertificate iterated_nonvanishing(const CohClass& alpha, const FactorTable& table,
                                                    std::span<const FactorId> chain) {
  const int n = table.ambient_dim();
  if (static_cast<int>(chain.size()) != n - 1) throw std::invalid_argument("chain must have n-1 hyperplanes");
  if (alpha.degree() != n) throw DegreeMismatch("class degree must equal the ambient dimension");

  ResidueChainCertificate cert;
  cert.chain.assign(chain.begin(), chain.end());

  Matrix chain_rows;
  for (auto id : chain) {
    if (table[id].kind != FactorKind::Linear) throw PreconditionFailed("chain entries must be linear");
    chain_rows.push_back(table[id].form.linear_coefficients());
  }
  if (rank(chain_rows) != n - 1) throw PreconditionFailed("chain hyperplanes are linearly dependent");
  Matrix with_x0 = chain_rows;
  with_x0.push_back(identity_matrix(n + 1)[0]);
  if (rank(with_x0) != n) throw PreconditionFailed("x_0 vanishes on the line cut out by the chain");

  // rows: e_0, e_k, chain[n-2], ..., chain[0]
  Matrix chart;
  for (int k = 1; k <= n && chart.empty(); ++k) {
    Matrix m{identity_matrix(n + 1)[0], identity_matrix(n + 1)[k]};
    for (int i = 2; i <= n; ++i) m.push_back(chain_rows[n - i]);
    if (determinant(m) != 0) chart = std::move(m);
  }
  cert.chart = chart;
  const LinearChange to_chart(*inverse(chart));

  // Rewrite every factor of alpha and the chain in chart coordinates.
  FactorTable chart_table(n);
  std::map<FactorId, FactorId> remap;
  auto transport = [&](FactorId id) {
    if (auto it = remap.find(id); it != remap.end()) return it->second;
    const auto& e = table[id];
    const FactorId nid = chart_table.intern(substitute(e.form, to_chart), e.kind).first;
    remap.emplace(id, nid);
    return nid;
  };
  for (auto id : chain) transport(id);
  CohClass current(alpha.degree());
  for (const auto& sym : alpha.symbols()) {
    Symbol s;
    for (const auto& e : sym.entries) {
      SquareClass t;
      for (auto id : e.odd) t.toggle(transport(id));
      s.entries.push_back(std::move(t));
    }
    current.add_symbol(std::move(s));
  }
  cert.chart_table = chart_table;
  cert.chart_class = current;

  FactorTable current_table = std::move(chart_table);
  try {
    for (std::size_t s = 0; s < chain.size(); ++s) {
      const int coord = n - static_cast<int>(s);
      const FactorId d = current_table.variable(coord);
      auto out = residue(current, d, current_table);
      current_table = out.table;
      current = out.cls;
      cert.steps.push_back({coord, current_table, current});
    }
  } catch (const NotAUnit& e) {
    throw CannotCertify(e.what());
  } catch (const OutsideUniverse& e) {
    throw CannotCertify(e.what());
  }

  // H^1 of the line: the sum of degree-1 symbols is the product of their entries.
  SquareClass terminal;
  for (const auto& sym : current.symbols()) terminal = terminal * sym.entries.at(0);
  cert.terminal_table = std::move(current_table);
  cert.terminal = terminal;
  cert.verdict = terminal.trivial() ? ChainVerdict::Inconclusive : ChainVerdict::Nonzero;
  return cert;
}

// ---------------------------------------------------------------------------
// Pullback compatibility harness for residues.
//
// K = k(t) and L = k(s) with f*: t -> s^e over a constant field k = C(P^2)
// whose square classes are tracked in a factor table (so residue fields carry
// nontrivial classes). Elements of K are t^v * prod (t - c_i)^{e_i} * w with
// c_i, w in k*. The diagram checked is  d_B(f* alpha) = e * f*(d_A alpha).

struct HarnessReport {
  int e = 0;
  int samples = 0;
  int failures = 0;
  int nonzero_residues = 0;  // samples whose residue at t = 0 is nonzero
  std::vector<std::string> notes;
};

namespace detail {

struct ConstantPool {
  FactorTable table{2};
  std::vector<SquareClass> classes;  // classes of l_i / u_0, pairwise distinct
};

inline ConstantPool make_constant_pool(SplitMix64& rng, int size) {
  ConstantPool pool;
  const FactorId u0 = pool.table.variable(0);
  while (static_cast<int>(pool.classes.size()) < size) {
    std::vector<Rational> c(3);
    for (auto& x : c) x = rng.uniform_int(-9, 9);
    c[1] = rng.uniform_int(1, 9);
    const auto f = HomogeneousForm::linear(c);
    const FactorId id = pool.table.intern(f, FactorKind::Linear).first;
    if (id == u0) continue;
    SquareClass cls{id, u0};
    if (std::find(pool.classes.begin(), pool.classes.end(), cls) == pool.classes.end()) pool.classes.push_back(cls);
  }
  return pool;
}

// t^v * prod (t - c_i)^{e_i} * w, with c_i, w given by indices into the pool.
struct UnivariateElement {
  int valuation = 0;
  std::vector<std::pair<int, int>> shifts;  // (pool index of c_i, exponent e_i)
  std::vector<int> constant;                // pool indices whose product is w
};

// f*(x): t -> s^e, so (t - c) -> (s^e - c).
struct PulledBackElement {
  int valuation = 0;
  int e = 1;
  std::vector<std::pair<int, int>> shifts;
  std::vector<int> constant;
};

inline PulledBackElement pull_back(const UnivariateElement& x, int e) {
  return {x.valuation * e, e, x.shifts, x.constant};
}

// Reduction at t = 0 of x / t^v: prod (-c_i)^{e_i} * w. Constants are squares.
inline SquareClass reduce_at_origin(const UnivariateElement& x, const ConstantPool& pool) {
  SquareClass r;
  for (auto [i, k] : x.shifts)
    if (k % 2 != 0) r = r * pool.classes[i];
  for (int i : x.constant) r = r * pool.classes[i];
  return r;
}

// Reduction at s = 0 of y / s^{ev}: each (s^e - c) evaluates to -c.
inline SquareClass reduce_at_origin(const PulledBackElement& y, const ConstantPool& pool) {
  SquareClass r;
  for (auto [i, k] : y.shifts) {
    // (0^e - c)^k with e >= 1
    if (y.e >= 1 && k % 2 != 0) r = r * pool.classes[i];
  }
  for (int i : y.constant) r = r * pool.classes[i];
  return r;
}

template <class Element>
CohClass residue_at_origin(const std::vector<Element>& symbol, const ConstantPool& pool) {
  std::size_t m = 0;
  for (const auto& x : symbol)
    if (x.valuation % 2 != 0) ++m;
  std::vector<SquareClass> odd, even;
  for (const auto& x : symbol) {
    const SquareClass u = reduce_at_origin(x, pool);
    (x.valuation % 2 != 0 ? odd : even).push_back(u);
  }
  CohClass out(static_cast<int>(symbol.size()) - 1);
  for (auto& s : residue_formula(m, odd, even)) out.add_symbol(std::move(s));
  return out;
}

}  // namespace detail

inline HarnessReport univariate_residue_harness(int e, int samples, std::uint64_t seed = 0x5eed) {
  if (e < 1) throw std::invalid_argument("ramification index must be positive");
  SplitMix64 rng(seed);
  const auto pool = detail::make_constant_pool(rng, 6);
  HarnessReport report;
  report.e = e;
  report.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const int degree = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<detail::UnivariateElement> alpha(degree);
    for (auto& x : alpha) {
      x.valuation = static_cast<int>(rng.uniform_int(-2, 3));
      const int nshift = static_cast<int>(rng.uniform_int(0, 2));
      for (int k = 0; k < nshift; ++k)
        x.shifts.emplace_back(static_cast<int>(rng.uniform_int(0, 5)), static_cast<int>(rng.uniform_int(1, 3)));
      const int nconst = static_cast<int>(rng.uniform_int(0, 2));
      for (int k = 0; k < nconst; ++k) x.constant.push_back(static_cast<int>(rng.uniform_int(0, 5)));
    }
    std::vector<detail::PulledBackElement> pulled;
    for (const auto& x : alpha) pulled.push_back(detail::pull_back(x, e));

    const CohClass lhs = detail::residue_at_origin(pulled, pool);
    const CohClass downstairs = detail::residue_at_origin(alpha, pool);
    // residue fields agree (k -> k is the identity), e acts mod 2
    const CohClass rhs = e % 2 == 0 ? CohClass(downstairs.degree()) : downstairs;
    if (!downstairs.is_zero()) ++report.nonzero_residues;
    if (!(lhs == rhs)) {
      ++report.failures;
      report.notes.push_back("sample " + std::to_string(s) + " disagrees");
    }
  }
  return report;
}

}  // namespace qb
