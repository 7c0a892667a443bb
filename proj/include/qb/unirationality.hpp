#pragma once

// Applicability of the unirationality criterion for <1, a_1, ...> with
// a_1 = e_1 / e_0: either both are linear, or (d_0, d_1) = (0, 2) and the
// homogenization of e_0 z^2 - e_1 has rank >= 3 over C(z).

#include <string>

#include "qb/forms.hpp"
#include "qb/linalg.hpp"

namespace qb {

struct UnirationalityRecord {
  std::string applicable_case = "not-applicable";  // "linear" | "rank3" | "not-applicable"
  int d0 = 0;
  int d1 = 0;
  int rank_over_cz = -1;           // only in the (0, 2) case
  bool supported_on_x012 = false;  // e_1 involves x_0, x_1, x_2 only
  bool operator==(const UnirationalityRecord&) const = default;
};

inline bool supported_on_first_three(const HomogeneousForm& f) {
  for (const auto& [m, c] : f.terms())
    for (std::size_t i = 3; i < m.size(); ++i)
      if (m.exps[i] != 0) return false;
  return true;
}

inline UnirationalityRecord unirationality_precondition(const HomogeneousForm& e0, const HomogeneousForm& e1) {
  UnirationalityRecord rec;
  rec.d0 = e0.degree();
  rec.d1 = e1.degree();
  rec.supported_on_x012 = supported_on_first_three(e1);
  if (e0.is_zero() || e1.is_zero()) return rec;
  if (rec.d0 == 1 && rec.d1 == 1) {
    rec.applicable_case = "linear";
    return rec;
  }
  if (rec.d0 != 0 || rec.d1 != 2) return rec;

  // Gram matrix of e_0 t x_0^2 - e_1 with t = z^2. Its minors have degree <= 1
  // in t, so the rank over C(z) is attained at one of any two values of t.
  const Rational c0 = e0.coefficient(Monomial::one(e0.num_vars()));
  const Matrix g1 = gram_matrix(e1);
  int best = 0;
  for (int t : {1, 2}) {
    Matrix g = g1;
    for (auto& row : g)
      for (auto& x : row) x = -x;
    g[0][0] += c0 * t;
    best = std::max(best, rank(g));
  }
  rec.rank_over_cz = best;
  if (best >= 3) rec.applicable_case = "rank3";
  return rec;
}

}  // namespace qb
