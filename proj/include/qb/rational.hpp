#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "qb/errors.hpp"

namespace qb {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p", "-p" or "p/q" (q > 0) into a canonical rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ParseError("empty rational");
  Rational q;
  if (q.set_str(s, 10) != 0) throw ParseError("bad rational '" + s + "'");
  if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

/// Canonical text: "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& q) { return q.get_str(10); }

inline bool is_square(const Integer& z) { return z >= 0 && mpz_perfect_square_p(z.get_mpz_t()) != 0; }

/// True iff q is the square of a rational.
inline bool is_rational_square(const Rational& q) {
  return q >= 0 && is_square(q.get_num()) && is_square(q.get_den());
}

inline Rational rational_sqrt(const Rational& q) {
  Integer a, b;
  mpz_sqrt(a.get_mpz_t(), q.get_num().get_mpz_t());
  mpz_sqrt(b.get_mpz_t(), q.get_den().get_mpz_t());
  Rational r(a, b);
  r.canonicalize();
  return r;
}

}  // namespace qb
