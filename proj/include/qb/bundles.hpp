#pragma once

// Quadric bundles over P^n given by symmetric matrices (a_ij) with
// |a_ij| = l_i + l_j + l, locally sum a_ij z_i z_j = 0. Type d_i = 2 l_i + l.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qb/arrangement.hpp"
#include "qb/errors.hpp"
#include "qb/forms.hpp"
#include "qb/json_io.hpp"
#include "qb/prng.hpp"
#include "qb/square_classes.hpp"
#include "qb/unirationality.hpp"

namespace qb {

inline std::int64_t binomial(std::int64_t a, std::int64_t b) {
  if (b < 0 || b > a) return 0;
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

struct BundleType {
  int n = 0;
  int r = 0;
  std::vector<int> d;     // d_0 .. d_{r+1}
  int l = 0;              // parity of the d_i
  std::vector<int> twist; // l_i = floor(d_i / 2)

  static BundleType of(int n, std::vector<int> degrees) {
    if (degrees.size() < 3) throw std::invalid_argument("a type needs r + 2 >= 3 degrees");
    BundleType t;
    t.n = n;
    t.r = static_cast<int>(degrees.size()) - 2;
    t.l = ((degrees[0] % 2) + 2) % 2;
    for (int x : degrees) {
      if ((((x % 2) + 2) % 2) != t.l) throw ParityMismatch("degrees of mixed parity");
      t.twist.push_back((x - t.l) / 2);
    }
    t.d = std::move(degrees);
    return t;
  }

  int entry_degree(int i, int j) const { return twist[i] + twist[j] + l; }
  bool operator==(const BundleType&) const = default;
};

/// Type (d_i) exists iff the d_i share a parity and C(r+3, 2) > n or some d_i = 0.
inline bool exists_type(int n, int r, const std::vector<int>& degrees) {
  if (static_cast<int>(degrees.size()) != r + 2) throw std::invalid_argument("expected r + 2 degrees");
  for (int x : degrees)
    if (x < 0) throw std::invalid_argument("degrees must be non-negative");
  for (int x : degrees)
    if (x % 2 != degrees[0] % 2) return false;
  return binomial(r + 3, 2) > n || std::find(degrees.begin(), degrees.end(), 0) != degrees.end();
}

struct BundleMatrix {
  BundleType type;
  std::vector<std::vector<HomogeneousForm>> a;  // full symmetric (r+2) x (r+2)

  int size() const { return static_cast<int>(a.size()); }

  /// Degrees, symmetry and ambient space against the declared type.
  void validate() const {
    const int m = type.r + 2;
    if (size() != m) throw DimMismatch("matrix size does not match the type");
    for (int i = 0; i < m; ++i) {
      if (static_cast<int>(a[i].size()) != m) throw DimMismatch("matrix is not square");
      for (int j = 0; j < m; ++j) {
        const auto& f = a[i][j];
        if (f.ambient_dim() != type.n) throw DimMismatch("entry on the wrong projective space");
        if (f.degree() != type.entry_degree(i, j)) throw DegreeMismatch("entry degree");
        if (!(f == a[j][i])) throw std::invalid_argument("matrix is not symmetric");
      }
    }
  }

  bool operator==(const BundleMatrix&) const = default;
};

inline BundleMatrix zero_matrix(const BundleType& t) {
  BundleMatrix m;
  m.type = t;
  const int s = t.r + 2;
  m.a.assign(s, std::vector<HomogeneousForm>(s));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) m.a[i][j] = HomogeneousForm::zero(t.n, t.entry_degree(i, j));
  return m;
}

// ---------------------------------------------------------------------------
// Random entries.

/// All exponent vectors of total degree `degree` in `vars` variables, lex order.
inline std::vector<Monomial> monomials(int vars, int degree) {
  std::vector<Monomial> out;
  std::vector<int> e(vars, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == vars - 1) {
      e[pos] = left;
      out.emplace_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[pos] = k;
      self(self, pos + 1, left - k);
    }
  };
  if (vars > 0) rec(rec, 0, degree);
  return out;
}

/// Nonzero form with coefficients uniform in {-9..9}, supported on x_0..x_{support-1}.
inline HomogeneousForm random_form(int n, int degree, SplitMix64& rng, int support = -1) {
  if (support < 0 || support > n + 1) support = n + 1;
  const auto mons = monomials(support, degree);
  for (;;) {
    HomogeneousForm f(n, degree);
    for (const auto& m : mons) {
      std::vector<int> e(n + 1, 0);
      std::copy(m.exps.begin(), m.exps.end(), e.begin());
      f.add_term(Monomial(std::move(e)), rng.uniform_int(-9, 9));
    }
    if (!f.is_zero()) return f;
  }
}

// ---------------------------------------------------------------------------
// Classification.

struct Threshold {
  std::string name;
  std::string citation;
  std::int64_t bound = 0;
  bool applicable = false;   // (n, r) lies in the range of the statement
  std::optional<bool> met;   // only when d is given
  bool operator==(const Threshold&) const = default;
};

struct ClassificationReport {
  int n = 0;
  int r = 0;
  std::optional<std::int64_t> d;
  int k = 0;
  bool lang_rational = false;  // r > 2^n - 2
  bool cto_band = false;       // 2^{n-1} - 1 <= r <= 2^n - 2
  std::vector<Threshold> thresholds;
};

inline int floor_log2(std::int64_t x) {
  int k = -1;
  while (x > 0) {
    x >>= 1;
    ++k;
  }
  return k;
}

inline ClassificationReport classify(int n, int r, std::optional<std::int64_t> d = std::nullopt) {
  if (n < 1 || r < 1) throw std::invalid_argument("classify needs n, r >= 1");
  if (n > 60) throw std::invalid_argument("n too large");
  ClassificationReport rep;
  rep.n = n;
  rep.r = r;
  rep.d = d;
  rep.k = floor_log2(static_cast<std::int64_t>(r) + 1) + 1;
  const std::int64_t p = std::int64_t{1} << n;
  rep.lang_rational = r > p - 2;
  rep.cto_band = p / 2 - 1 <= r && r <= p - 2;

  auto add = [&](std::string name, std::string citation, std::int64_t bound, bool applicable, auto extra) {
    Threshold t{std::move(name), std::move(citation), bound, applicable, std::nullopt};
    if (d) t.met = applicable && *d >= bound && extra(*d);
    rep.thresholds.push_back(std::move(t));
  };
  auto any = [](std::int64_t) { return true; };
  auto even = [](std::int64_t x) { return x % 2 == 0; };
  add("type-degrees", "very general r-fold quadric bundles over P^n of type (d_i) with all d_i >= 2^n+n-1 are not stably rational",
      p + n - 1, rep.cto_band, any);
  add("hypersurface-multiplicity", "very general degree-d hypersurfaces in P^{n+r+1} with multiplicity d-2 along an r-plane are not stably rational for d >= 2^n+n+1",
      p + n + 1, rep.cto_band, any);
  add("bidegree-d-2", "very general hypersurfaces of bidegree (d,2) in P^n x P^{r+1} are not stably rational for d >= 2^n+n-1",
      p + n - 1, rep.cto_band, any);
  add("double-cover", "double covers of P^{n+r} branched along a very general even degree d >= 2^{n+1}+2n-2 hypersurface with multiplicity d-2 along an (r-1)-plane are not stably rational",
      2 * p + 2 * n - 2, rep.cto_band && n >= 2, even);
  add("degeneration-degree", "smooth unirational families over P^n degenerating along degree d >= 2(n+r)(r+2) with very general member not stably rational; d must be even when r is even",
      2 * static_cast<std::int64_t>(n + r) * (r + 2), rep.cto_band && n >= 2,
      [r](std::int64_t x) { return r % 2 == 1 || x % 2 == 0; });
  return rep;
}

// ---------------------------------------------------------------------------
// Degree ledgers without forms and the padding construction.

inline void check_cto_range(int n, int r) {
  if (n < 2 || n > 20) throw RangeError("n out of range");
  const std::int64_t p = std::int64_t{1} << n;
  if (!(p / 2 <= r + 1 && r + 1 < p)) throw RangeError("r + 1 = " + std::to_string(r + 1) + " outside [2^{n-1}, 2^n)");
}

/// Degrees m_i of the chosen family in phi order, from the combinatorics alone.
inline std::vector<int> structural_degrees(int n, Variant v, const IndexMap& map) {
  const int total = 1 << n;
  const int gdeg = 1 << n;  // |g_j| = 2 * 2^{n-1}
  std::vector<int> out;
  for (int i = 0; i < total; ++i) {
    const auto [mask, eps_n] = map.phi_inverse(i);
    const bool eps1 = mask & 1u;
    int m;
    switch (v) {
      case Variant::C: m = 2 * std::popcount(mask) + eps_n * 2 * gdeg; break;
      case Variant::CPrime: m = 2 * std::popcount(mask) + eps_n * 2 * gdeg + (eps1 ? -1 : 1); break;
      case Variant::CTilde: m = (n - 1) + gdeg; break;
      default: m = (n - 1) + gdeg + (eps1 ? 1 : -1); break;
    }
    out.push_back(m);
  }
  return out;
}

struct DegreeRecipe {
  Variant variant = Variant::C;
  std::vector<int> d;  // d_0 .. d_{r+1}
};

/// d even: d_i = m_i (i <= r), d_{r+1} = d - sum m_i; d odd: same with m'_i.
inline DegreeRecipe degeneration_degree_recipe(int n, int r, std::int64_t d) {
  check_cto_range(n, r);
  DegreeRecipe rec;
  rec.variant = d % 2 == 0 ? Variant::C : Variant::CPrime;
  const auto m = structural_degrees(n, rec.variant, IndexMap::standard(n));
  std::int64_t rest = d;
  for (int i = 0; i <= r; ++i) {
    rec.d.push_back(m[i]);
    rest -= m[i];
  }
  rec.d.push_back(static_cast<int>(rest));
  return rec;
}

struct DiagonalModel {
  Variant variant = Variant::C;
  std::vector<FactoredForm> e;    // e_0 .. e_{r+1}
  std::vector<int> padding;       // d_i - m_i
  std::vector<int> ledger_twist;  // floor(m_i / 2)
  BundleType type;                // from the padded degrees
};

/// e_0 = l^{d_0 - m_0} c_0 and e_i = x_0^{d_i - m_i} c_i for i = 1..r+1.
inline DiagonalModel padded_diagonal(ArrangementModel& model, const CoefficientLedger& ledger, Variant v, int r,
                                     const std::vector<int>& degrees, const HomogeneousForm& l) {
  check_cto_range(model.n, r);
  if (static_cast<int>(degrees.size()) != r + 2) throw std::invalid_argument("expected r + 2 target degrees");
  const auto& c = ledger.family(v);
  const auto& m = ledger.m(v);
  DiagonalModel out;
  out.variant = v;
  for (int i = 0; i <= r + 1; ++i) {
    if (degrees[i] < m[i])
      throw DegreeShortfall("d_" + std::to_string(i) + " = " + std::to_string(degrees[i]) + " < " + std::to_string(m[i]));
    if ((degrees[i] - m[i]) % 2 != 0)
      throw ParityMismatch("d_" + std::to_string(i) + " and m_" + std::to_string(i) + " differ in parity");
  }
  const FactoredForm lf = register_form(model.table, l);
  const FactoredForm x0 = register_form(model.table, HomogeneousForm::variable(model.n, 0));
  for (int i = 0; i <= r + 1; ++i) {
    const int pad = degrees[i] - m[i];
    out.e.push_back((i == 0 ? lf : x0).pow(pad) * c[i]);
    out.padding.push_back(pad);
    out.ledger_twist.push_back(m[i] / 2);
  }
  out.type = BundleType::of(model.n, degrees);
  return out;
}

inline UnirationalityRecord unirationality_precondition(const DiagonalModel& dm, const FactorTable& table) {
  const int d0 = dm.e.at(0).degree(table), d1 = dm.e.at(1).degree(table);
  if (d0 > 2 || d1 > 2) {
    UnirationalityRecord rec;
    rec.d0 = d0;
    rec.d1 = d1;
    return rec;
  }
  return unirationality_precondition(dm.e[0].expand(table), dm.e[1].expand(table));
}

// ---------------------------------------------------------------------------
// Homogenization: singular hypersurfaces and double covers.

namespace detail {

/// Embeds a form in x_0..x_n into P^{n+extra}, times the given monomial in the extra variables.
inline HomogeneousForm embed(const HomogeneousForm& f, int extra, const std::vector<int>& tail) {
  const int n = f.ambient_dim();
  int tail_deg = 0;
  for (int e : tail) tail_deg += e;
  HomogeneousForm out(n + extra, f.degree() + tail_deg);
  for (const auto& [m, c] : f.terms()) {
    std::vector<int> e = m.exps;
    e.insert(e.end(), tail.begin(), tail.end());
    out.add_term(Monomial(std::move(e)), c);
  }
  return out;
}

/// Splits g on P^{n+k} by its monomial in the trailing variables.
inline std::map<std::vector<int>, HomogeneousForm> split_tail(const HomogeneousForm& g, int n) {
  std::map<std::vector<int>, HomogeneousForm> parts;
  for (const auto& [m, c] : g.terms()) {
    std::vector<int> head(m.exps.begin(), m.exps.begin() + n + 1);
    std::vector<int> tail(m.exps.begin() + n + 1, m.exps.end());
    int td = 0;
    for (int e : tail) td += e;
    auto it = parts.try_emplace(tail, HomogeneousForm(n, g.degree() - td)).first;
    it->second.add_term(Monomial(std::move(head)), c);
  }
  return parts;
}

inline std::vector<int> unit_tail(int size, int i, int j = -1) {
  std::vector<int> t(size, 0);
  if (i >= 0) ++t[i];
  if (j >= 0) ++t[j];
  return t;
}

}  // namespace detail

struct HypersurfaceModel {
  HomogeneousForm f;  // on P^{n+r+1}, variables x_0..x_n, y_0..y_r
  BundleMatrix matrix;
};

/// f = sum_{i,j<=r} a_ij y_i y_j + 2 sum_k a_{k,r+1} y_k + a_{r+1,r+1}.
inline HomogeneousForm reconstruct_hypersurface(const BundleMatrix& A) {
  const int n = A.type.n, r = A.type.r, extra = r + 1;
  const int deg = A.a[r + 1][r + 1].degree();
  HomogeneousForm f(n + extra, deg);
  for (int i = 0; i <= r; ++i)
    for (int j = 0; j <= r; ++j) f = f + detail::embed(A.a[i][j], extra, detail::unit_tail(extra, i, j));
  for (int k = 0; k <= r; ++k) f = f + detail::embed(A.a[k][r + 1].scaled(2), extra, detail::unit_tail(extra, k));
  f = f + detail::embed(A.a[r + 1][r + 1], extra, detail::unit_tail(extra, -1));
  return f;
}

/// Inverse of reconstruct_hypersurface for a degree-(d+2) form with multiplicity d along {x = 0}.
inline BundleMatrix matrix_from_hypersurface(const HomogeneousForm& f, int n, int r) {
  const int extra = r + 1;
  if (f.ambient_dim() != n + extra) throw DimMismatch("hypersurface lives on P^{n+r+1}");
  const int d = f.degree() - 2;
  if (d < 0) throw DegreeMismatch("degree must be at least 2");
  std::vector<int> degrees(r + 1, d);
  degrees.push_back(d + 2);
  BundleMatrix A = zero_matrix(BundleType::of(n, degrees));
  for (auto& [tail, part] : detail::split_tail(f, n)) {
    std::vector<int> idx;
    for (int k = 0; k < extra; ++k)
      for (int e = 0; e < tail[k]; ++e) idx.push_back(k);
    if (idx.size() > 2) throw HypothesisViolated("multiplicity along the plane is below d");
    if (idx.size() == 2) {
      const auto [i, j] = std::pair{idx[0], idx[1]};
      const auto v = i == j ? part : part.scaled(Rational(1, 2));
      A.a[i][j] = v;
      A.a[j][i] = v;
    } else if (idx.size() == 1) {
      A.a[idx[0]][r + 1] = part.scaled(Rational(1, 2));
      A.a[r + 1][idx[0]] = A.a[idx[0]][r + 1];
    } else {
      A.a[r + 1][r + 1] = part;
    }
  }
  A.validate();
  return A;
}

inline HypersurfaceModel from_singular_hypersurface(int n, int r, int d, std::uint64_t seed) {
  if (!(binomial(r + 3, 2) > n && n > 0)) throw HypothesisViolated("needs C(r+3, 2) > n > 0");
  if (r < 1 || d < 0) throw std::invalid_argument("needs r >= 1 and d >= 0");
  SplitMix64 rng(seed);
  std::vector<int> degrees(r + 1, d);
  degrees.push_back(d + 2);
  BundleMatrix A = zero_matrix(BundleType::of(n, degrees));
  for (int i = 0; i <= r + 1; ++i)
    for (int j = i; j <= r + 1; ++j) {
      A.a[i][j] = random_form(n, A.type.entry_degree(i, j), rng);
      A.a[j][i] = A.a[i][j];
    }
  A.validate();
  return {reconstruct_hypersurface(A), std::move(A)};
}

struct DoubleCoverModel {
  HomogeneousForm branch;  // on P^{n+r}, variables x_0..x_n, y_1..y_r
  BundleMatrix matrix;
};

/// f = -sum_{i,j>=1} a_ij y_i y_j with y_{r+1} = 1.
inline HomogeneousForm branch_polynomial(const BundleMatrix& A) {
  const int n = A.type.n, r = A.type.r, extra = r;
  HomogeneousForm f(n + extra, A.a[r + 1][r + 1].degree());
  auto tail = [&](int i, int j) {
    std::vector<int> t(extra, 0);
    if (i <= r) ++t[i - 1];
    if (j <= r) ++t[j - 1];
    return t;
  };
  for (int i = 1; i <= r + 1; ++i)
    for (int j = 1; j <= r + 1; ++j) f = f - detail::embed(A.a[i][j], extra, tail(i, j));
  return f;
}

inline BundleMatrix matrix_from_branch(const HomogeneousForm& f, int n, int r) {
  if (f.ambient_dim() != n + r) throw DimMismatch("branch hypersurface lives on P^{n+r}");
  const int d = f.degree() - 2;
  if (d < 0 || d % 2 != 0) throw ParityViolated("branch degree must be even");
  std::vector<int> degrees{0};
  for (int i = 0; i < r; ++i) degrees.push_back(d);
  degrees.push_back(d + 2);
  BundleMatrix A = zero_matrix(BundleType::of(n, degrees));
  A.a[0][0] = HomogeneousForm::constant(n, 1);
  for (auto& [t, part] : detail::split_tail(f, n)) {
    std::vector<int> idx;
    for (int k = 0; k < r; ++k)
      for (int e = 0; e < t[k]; ++e) idx.push_back(k + 1);
    while (idx.size() < 2) idx.push_back(r + 1);
    if (idx.size() > 2) throw HypothesisViolated("multiplicity along the plane is below d");
    const int i = idx[0], j = idx[1];
    const auto v = i == j ? part.scaled(-1) : part.scaled(Rational(-1, 2));
    A.a[i][j] = v;
    A.a[j][i] = v;
  }
  A.validate();
  return A;
}

inline DoubleCoverModel from_double_cover(int n, int r, int d, std::uint64_t seed) {
  if (d < 0 || d % 2 != 0) throw ParityViolated("d must be even, got " + std::to_string(d));
  if (n < 1 || r < 1) throw std::invalid_argument("needs n, r >= 1");
  SplitMix64 rng(seed);
  std::vector<int> degrees{0};
  for (int i = 0; i < r; ++i) degrees.push_back(d);
  degrees.push_back(d + 2);
  BundleMatrix A = zero_matrix(BundleType::of(n, degrees));
  A.a[0][0] = HomogeneousForm::constant(n, 1);
  for (int i = 1; i <= r + 1; ++i)
    for (int j = i; j <= r + 1; ++j) {
      A.a[i][j] = random_form(n, A.type.entry_degree(i, j), rng);
      A.a[j][i] = A.a[i][j];
    }
  A.validate();
  return {branch_polynomial(A), std::move(A)};
}

// ---------------------------------------------------------------------------
// Degeneration-degree family and its surface minor.

/// Member of the family: type from the degree recipe, entries at rows/columns
/// {0, 1, 2, n} in Q[x_0, x_1, x_2], and a_{i0} = 0 there when d is even and n >= 3.
inline BundleMatrix degeneration_family_member(int n, int r, std::int64_t d, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("needs n >= 2");
  if (r % 2 == 0 && d % 2 != 0) throw ParityViolated("d must be even when r is even");
  const auto recipe = degeneration_degree_recipe(n, r, d);
  if (recipe.d.back() < structural_degrees(n, recipe.variant, IndexMap::standard(n))[r + 1])
    throw DegreeShortfall("d below the padding bound");
  SplitMix64 rng(seed);
  BundleMatrix A = zero_matrix(BundleType::of(n, recipe.d));
  auto special = [&](int i) { return i == 0 || i == 1 || i == 2 || i == n; };
  for (int i = 0; i <= r + 1; ++i)
    for (int j = i; j <= r + 1; ++j) {
      const bool both = special(i) && special(j);
      const int deg = A.type.entry_degree(i, j);
      if (both && i == 0 && j != 0 && d % 2 == 0 && n >= 3) continue;
      A.a[i][j] = random_form(n, deg, rng, both ? 3 : -1);
      A.a[j][i] = A.a[i][j];
    }
  A.validate();
  return A;
}

struct SurfaceMinor {
  BundleMatrix minor;  // rows/columns {0, 1, 2, n}, type (d_0, d_1, d_2, d_n)
  bool voisin_type = false;  // type (0,2,2,4), entries in Q[x_0,x_1,x_2], a_{i0} = 0
};

inline SurfaceMinor minor_surface_bundle(const BundleMatrix& A, int n) {
  if (n < 3) throw IndexError("the surface minor needs n >= 3");
  if (!(A.type.r + 2 > n)) throw IndexError("row n does not exist (needs r + 2 > n)");
  const int idx[4] = {0, 1, 2, n};
  std::vector<int> degrees;
  for (int i : idx) degrees.push_back(A.type.d[i]);
  SurfaceMinor out;
  out.minor.type = BundleType::of(A.type.n, degrees);
  out.minor.a.assign(4, std::vector<HomogeneousForm>(4));
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) out.minor.a[p][q] = A.a[idx[p]][idx[q]];
  out.minor.validate();
  bool ok = degrees == std::vector<int>{0, 2, 2, 4};
  for (int p = 0; p < 4 && ok; ++p)
    for (int q = 0; q < 4 && ok; ++q) ok = supported_on_first_three(out.minor.a[p][q]);
  for (int p = 1; p < 4 && ok; ++p) ok = out.minor.a[p][0].is_zero();
  out.voisin_type = ok;
  return out;
}

// ---------------------------------------------------------------------------
// Singularity witnesses. Sampling can refute smoothness, never prove it.

struct SingularityWitness {
  int z_chart = 0;                // z_{z_chart} = 1, and x_0 = 1
  std::vector<Rational> x;        // x_0 .. x_n
  std::vector<Rational> z;        // z_0 .. z_{r+1}
  bool operator==(const SingularityWitness&) const = default;
};

struct WitnessSearch {
  int samples = 0;
  std::vector<SingularityWitness> witnesses;  // empty: none found (not a smoothness claim)
};

inline WitnessSearch singularity_witness_search(const BundleMatrix& A, int sample_count, std::uint64_t seed,
                                                std::size_t max_witnesses = 8) {
  WitnessSearch out;
  out.samples = std::max(sample_count, 0);
  const int n = A.type.n, m = A.size();
  std::vector<std::vector<std::vector<HomogeneousForm>>> da(n + 1);  // da[v][i][j] = d a_ij / d x_v
  for (int v = 1; v <= n; ++v) {
    da[v].assign(m, std::vector<HomogeneousForm>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) da[v][i][j] = A.a[i][j].derivative(v);
  }
  SplitMix64 rng(seed);
  for (int s = 0; s < out.samples && out.witnesses.size() < max_witnesses; ++s) {
    SingularityWitness w;
    w.z_chart = s % m;
    w.x.assign(n + 1, 0);
    w.x[0] = 1;
    for (int v = 1; v <= n; ++v) w.x[v] = rng.uniform_int(-2, 2);
    w.z.assign(m, 0);
    for (int i = 0; i < m; ++i) w.z[i] = i == w.z_chart ? Rational(1) : Rational(rng.uniform_int(-2, 2));
    Matrix val(m, std::vector<Rational>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) val[i][j] = A.a[i][j].evaluate(w.x);
    auto quad = [&](const Matrix& M) {
      Rational acc = 0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) acc += M[i][j] * w.z[i] * w.z[j];
      return acc;
    };
    if (quad(val) != 0) continue;
    bool singular = true;
    for (int i = 0; i < m && singular; ++i) {
      if (i == w.z_chart) continue;
      Rational g = 0;
      for (int j = 0; j < m; ++j) g += val[i][j] * w.z[j];
      singular = g == 0;
    }
    for (int v = 1; v <= n && singular; ++v) {
      Matrix dv(m, std::vector<Rational>(m));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) dv[i][j] = da[v][i][j].evaluate(w.x);
      singular = quad(dv) == 0;
    }
    if (singular) out.witnesses.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON (schema bundle/1).

inline Json type_json(const BundleType& t) {
  return {{"n", t.n}, {"r", t.r}, {"type", t.d}, {"l", t.l}, {"twists", t.twist}};
}

inline Json matrix_json(const BundleMatrix& A) {
  Json j = type_json(A.type);
  Json rows = Json::array();
  for (int i = 0; i < A.size(); ++i) {
    Json row = Json::array();
    for (int k = i; k < A.size(); ++k) row.push_back(form_json(A.a[i][k]));
    rows.push_back(row);
  }
  j["entries"] = rows;
  j["schema"] = "bundle/1";
  return j;
}

inline BundleMatrix bundle_from_json(const Json& j) {
  try {
    if (j.at("schema").get<std::string>() != "bundle/1") throw ParseError("not a bundle/1 document");
    BundleMatrix A;
    A.type = BundleType::of(j.at("n").get<int>(), j.at("type").get<std::vector<int>>());
    if (A.type.r != j.at("r").get<int>()) throw ParseError("r does not match the type length");
    const int m = A.type.r + 2;
    A.a.assign(m, std::vector<HomogeneousForm>(m));
    const auto& rows = j.at("entries");
    if (static_cast<int>(rows.size()) != m) throw ParseError("entries: wrong number of rows");
    for (int i = 0; i < m; ++i) {
      if (static_cast<int>(rows[i].size()) != m - i) throw ParseError("entries: row " + std::to_string(i));
      for (int k = i; k < m; ++k) {
        A.a[i][k] = form_from_json(rows[i][k - i]);
        A.a[k][i] = A.a[i][k];
      }
    }
    A.validate();
    return A;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  } catch (const DegreeMismatch& e) {
    throw ParseError(e.what());
  } catch (const DimMismatch& e) {
    throw ParseError(e.what());
  }
}

inline Json classification_json(const ClassificationReport& rep) {
  Json th = Json::array();
  for (const auto& t : rep.thresholds)
    th.push_back({{"name", t.name},
                  {"citation", t.citation},
                  {"bound", t.bound},
                  {"applicable", t.applicable},
                  {"met", t.met ? Json(*t.met) : Json(nullptr)}});
  return {{"schema", "classify/1"},
          {"n", rep.n},
          {"r", rep.r},
          {"d", rep.d ? Json(*rep.d) : Json(nullptr)},
          {"k", rep.k},
          {"lang_rational", rep.lang_rational},
          {"cto_band", rep.cto_band},
          {"thresholds", th}};
}

inline Json factored_json(const FactoredForm& f) {
  Json factors = Json::array();
  for (const auto& [id, e] : f.factors) factors.push_back(Json::array({id.value, e}));
  return {{"constant", to_string(f.constant)}, {"factors", factors}};
}

}  // namespace qb
