#pragma once

// Exact sparse homogeneous polynomials over Q in variables x_0..x_n.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qb/errors.hpp"
#include "qb/linalg.hpp"
#include "qb/rational.hpp"

namespace qb {

/// Exponent vector of length n+1.
struct Monomial {
  std::vector<int> exps;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exps(std::move(e)) {}
  static Monomial one(int num_vars) { return Monomial(std::vector<int>(num_vars, 0)); }
  static Monomial var(int num_vars, int i, int power = 1) {
    Monomial m = one(num_vars);
    m.exps[i] = power;
    return m;
  }

  int degree() const { return std::accumulate(exps.begin(), exps.end(), 0); }
  std::size_t size() const { return exps.size(); }

  Monomial operator*(const Monomial& o) const {
    Monomial r = *this;
    for (std::size_t i = 0; i < exps.size(); ++i) r.exps[i] += o.exps[i];
    return r;
  }

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

class HomogeneousForm;
HomogeneousForm operator*(const HomogeneousForm& f, const HomogeneousForm& g);

/// A homogeneous form: every stored monomial has total degree `degree()`,
/// no zero coefficients are stored. The zero form keeps its degree tag.
class HomogeneousForm {
 public:
  using Terms = std::map<Monomial, Rational>;

  HomogeneousForm() = default;
  HomogeneousForm(int n, int degree) : n_(n), degree_(degree) {}

  static HomogeneousForm zero(int n, int degree) { return HomogeneousForm(n, degree); }

  static HomogeneousForm constant(int n, const Rational& c) {
    HomogeneousForm f(n, 0);
    f.add_term(Monomial::one(n + 1), c);
    return f;
  }

  static HomogeneousForm variable(int n, int i) {
    HomogeneousForm f(n, 1);
    f.add_term(Monomial::var(n + 1, i), 1);
    return f;
  }

  /// Linear form sum_i coeffs[i] x_i on P^{coeffs.size()-1}.
  static HomogeneousForm linear(std::span<const Rational> coeffs) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    HomogeneousForm f(n, 1);
    for (int i = 0; i <= n; ++i) f.add_term(Monomial::var(n + 1, i), coeffs[i]);
    return f;
  }

  int ambient_dim() const { return n_; }
  int num_vars() const { return n_ + 1; }
  int degree() const { return degree_; }
  bool is_zero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Adds c * m, dropping the entry if it cancels.
  void add_term(const Monomial& m, const Rational& c) {
    if (static_cast<int>(m.size()) != num_vars()) throw DimMismatch("monomial length");
    if (m.degree() != degree_) throw DegreeMismatch("monomial degree " + std::to_string(m.degree()) +
                                                    " in form of degree " + std::to_string(degree_));
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  /// Coefficient vector of a linear form.
  std::vector<Rational> linear_coefficients() const {
    if (degree_ != 1) throw WrongDegree("expected a linear form");
    std::vector<Rational> c(num_vars(), 0);
    for (const auto& [m, v] : terms_)
      for (int i = 0; i < num_vars(); ++i)
        if (m.exps[i] == 1) c[i] = v;
    return c;
  }

  /// Leading term in lexicographic order (largest exponent vector).
  const std::pair<const Monomial, Rational>& leading_term() const { return *terms_.rbegin(); }

  HomogeneousForm scaled(const Rational& c) const {
    HomogeneousForm r(n_, degree_);
    if (c == 0) return r;
    for (const auto& [m, v] : terms_) r.terms_.emplace_hint(r.terms_.end(), m, v * c);
    return r;
  }

  /// Divides by the leading coefficient; returns that coefficient.
  std::pair<HomogeneousForm, Rational> normalized() const {
    if (is_zero()) return {*this, Rational(1)};
    const Rational lc = leading_term().second;
    return {scaled(1 / lc), lc};
  }

  Rational evaluate(std::span<const Rational> point) const {
    if (static_cast<int>(point.size()) != num_vars()) throw DimMismatch("evaluation point length");
    Rational acc = 0;
    for (const auto& [m, c] : terms_) {
      Rational t = c;
      for (int i = 0; i < num_vars(); ++i) {
        if (m.exps[i] == 0) continue;
        Rational p;
        mpz_pow_ui(p.get_num_mpz_t(), point[i].get_num_mpz_t(), m.exps[i]);
        mpz_pow_ui(p.get_den_mpz_t(), point[i].get_den_mpz_t(), m.exps[i]);
        p.canonicalize();
        t *= p;
      }
      acc += t;
    }
    return acc;
  }

  /// Partial derivative in x_i. A constant differentiates to the zero form of degree 0.
  HomogeneousForm derivative(int i) const {
    HomogeneousForm r(n_, std::max(degree_ - 1, 0));
    for (const auto& [m, c] : terms_) {
      if (m.exps[i] == 0) continue;
      Monomial d = m;
      d.exps[i] -= 1;
      r.add_term(d, c * m.exps[i]);
    }
    return r;
  }

  HomogeneousForm pow(int e) const {
    HomogeneousForm r = constant(n_, 1);
    HomogeneousForm b = *this;
    while (e > 0) {
      if (e & 1) r = r * b;
      e >>= 1;
      if (e > 0) b = b * b;
    }
    return r;
  }

  /// Exponent of x_i, maximized over terms.
  int max_exponent(int i) const {
    int e = 0;
    for (const auto& [m, c] : terms_) e = std::max(e, m.exps[i]);
    return e;
  }

  friend bool operator==(const HomogeneousForm& a, const HomogeneousForm& b) {
    return a.n_ == b.n_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

  /// Total order used for canonical tables: by dimension, degree, then terms.
  friend bool operator<(const HomogeneousForm& a, const HomogeneousForm& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    return a.terms_ < b.terms_;
  }

  friend HomogeneousForm operator+(const HomogeneousForm& f, const HomogeneousForm& g) {
    check_compatible(f, g);
    HomogeneousForm r = f;
    for (const auto& [m, c] : g.terms_) r.add_term(m, c);
    return r;
  }

  friend HomogeneousForm operator-(const HomogeneousForm& f) { return f.scaled(-1); }

  friend HomogeneousForm operator-(const HomogeneousForm& f, const HomogeneousForm& g) {
    check_compatible(f, g);
    HomogeneousForm r = f;
    for (const auto& [m, c] : g.terms_) r.add_term(m, -c);
    return r;
  }

  friend HomogeneousForm operator*(const HomogeneousForm& f, const HomogeneousForm& g);

 private:
  static void check_compatible(const HomogeneousForm& f, const HomogeneousForm& g) {
    if (f.n_ != g.n_) throw DimMismatch("forms live on different projective spaces");
    if (f.degree_ != g.degree_)
      throw DegreeMismatch(std::to_string(f.degree_) + " vs " + std::to_string(g.degree_));
  }

  int n_ = 0;
  int degree_ = 0;
  Terms terms_;
};

inline HomogeneousForm operator*(const HomogeneousForm& f, const HomogeneousForm& g) {
  if (f.n_ != g.n_) throw DimMismatch("forms live on different projective spaces");
  HomogeneousForm r(f.n_, f.degree_ + g.degree_);
  for (const auto& [m1, c1] : f.terms_)
    for (const auto& [m2, c2] : g.terms_) r.add_term(m1 * m2, c1 * c2);
  return r;
}

/// Invertible linear change of coordinates: x_i -> sum_j matrix[i][j] x_j.
class LinearChange {
 public:
  explicit LinearChange(Matrix m) : m_(std::move(m)) {
    for (const auto& row : m_)
      if (row.size() != m_.size()) throw DimMismatch("linear change must be square");
    if (m_.empty() || determinant(m_) == 0) throw SingularChange("determinant is zero");
  }

  static LinearChange identity(int n) { return LinearChange(identity_matrix(n + 1)); }

  /// Swaps x_i and x_j.
  static LinearChange swap(int n, int i, int j) {
    Matrix m = identity_matrix(n + 1);
    std::swap(m[i], m[j]);
    return LinearChange(std::move(m));
  }

  const Matrix& matrix() const { return m_; }
  int ambient_dim() const { return static_cast<int>(m_.size()) - 1; }

  LinearChange inverse() const { return LinearChange(*qb::inverse(m_)); }

 private:
  Matrix m_;
};

/// Composes f with x_i -> rows[i], where rows[i] are linear forms on a common
/// target space. This covers changes of variables and restrictions to subspaces.
inline HomogeneousForm compose_linear(const HomogeneousForm& f, std::span<const HomogeneousForm> rows) {
  if (static_cast<int>(rows.size()) != f.num_vars()) throw DimMismatch("one image per variable required");
  if (rows.empty()) throw DimMismatch("empty substitution");
  const int target_n = rows.front().ambient_dim();
  for (const auto& r : rows) {
    if (r.degree() != 1) throw WrongDegree("substitution images must be linear");
    if (r.ambient_dim() != target_n) throw DimMismatch("substitution images on different spaces");
  }
  // powers[i][e] = rows[i]^e, built lazily
  std::vector<std::vector<HomogeneousForm>> powers(rows.size());
  auto power = [&](std::size_t i, int e) -> const HomogeneousForm& {
    auto& p = powers[i];
    if (p.empty()) p.push_back(HomogeneousForm::constant(target_n, 1));
    while (static_cast<int>(p.size()) <= e) p.push_back(p.back() * rows[i]);
    return p[e];
  };
  HomogeneousForm result(target_n, f.degree());
  for (const auto& [m, c] : f.terms()) {
    HomogeneousForm t = HomogeneousForm::constant(target_n, c);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (m.exps[i] > 0) t = t * power(i, m.exps[i]);
    for (const auto& [tm, tc] : t.terms()) result.add_term(tm, tc);
  }
  return result;
}

inline std::vector<HomogeneousForm> rows_as_forms(const Matrix& m) {
  std::vector<HomogeneousForm> rows;
  rows.reserve(m.size());
  for (const auto& row : m) rows.push_back(HomogeneousForm::linear(row));
  return rows;
}

/// f(T x): each x_i replaced by sum_j T[i][j] x_j.
inline HomogeneousForm substitute(const HomogeneousForm& f, const LinearChange& t) {
  if (t.ambient_dim() != f.ambient_dim()) throw DimMismatch("change of variables dimension");
  const auto rows = rows_as_forms(t.matrix());
  return compose_linear(f, rows);
}

/// Variable eliminated when restricting along l: the highest index with a
/// nonzero coefficient.
inline int hyperplane_pivot(const HomogeneousForm& l) {
  const auto c = l.linear_coefficients();
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
    if (c[i] != 0) return i;
  throw ZeroLinearForm("cannot restrict along the zero form");
}

/// Images of x_0..x_n in the coordinate ring of {l = 0} ~ P^{n-1}. Variables
/// above the pivot shift down by one.
inline std::vector<HomogeneousForm> hyperplane_substitution(const HomogeneousForm& l) {
  if (l.degree() != 1) throw WrongDegree("hyperplane must be linear");
  const int n = l.ambient_dim();
  const int p = hyperplane_pivot(l);
  if (n == 0) throw DimMismatch("P^0 has no hyperplanes");
  const auto c = l.linear_coefficients();
  std::vector<HomogeneousForm> rows;
  rows.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    if (i < p) {
      rows.push_back(HomogeneousForm::variable(n - 1, i));
    } else if (i > p) {
      rows.push_back(HomogeneousForm::variable(n - 1, i - 1));
    } else {
      std::vector<Rational> img(n, 0);
      for (int k = 0; k <= n; ++k) {
        if (k == p) continue;
        img[k < p ? k : k - 1] = -c[k] / c[p];
      }
      rows.push_back(HomogeneousForm::linear(img));
    }
  }
  return rows;
}

inline HomogeneousForm restrict_to_hyperplane(const HomogeneousForm& f, const HomogeneousForm& l) {
  if (f.ambient_dim() != l.ambient_dim()) throw DimMismatch("form and hyperplane on different spaces");
  const auto rows = hyperplane_substitution(l);
  return compose_linear(f, rows);
}

struct Division {
  bool divides = false;
  std::optional<HomogeneousForm> quotient;
};

/// Exact division by a linear form, by synthetic division in the pivot variable.
inline Division divide_by_linear(const HomogeneousForm& f, const HomogeneousForm& l) {
  if (l.degree() != 1) throw WrongDegree("divisor must be linear");
  if (l.is_zero()) throw ZeroLinearForm("division by the zero form");
  if (f.ambient_dim() != l.ambient_dim()) throw DimMismatch("form and divisor on different spaces");
  if (!restrict_to_hyperplane(f, l).is_zero()) return {};
  if (f.is_zero()) return {true, HomogeneousForm::zero(f.ambient_dim(), std::max(f.degree() - 1, 0))};

  const int n = f.ambient_dim();
  const int p = hyperplane_pivot(l);
  const auto c = l.linear_coefficients();
  HomogeneousForm rest(n, 1);  // l - c_p x_p
  for (int k = 0; k <= n; ++k)
    if (k != p) rest.add_term(Monomial::var(n + 1, k), c[k]);

  // f = sum_k F_k x_p^k with F_k free of x_p; quotient Q = sum_k Q_k x_p^k.
  const int top = f.max_exponent(p);
  std::vector<HomogeneousForm> slices;
  for (int k = 0; k <= top; ++k) slices.emplace_back(n, f.degree() - k);
  for (const auto& [m, v] : f.terms()) {
    Monomial s = m;
    const int k = s.exps[p];
    s.exps[p] = 0;
    slices[k].add_term(s, v);
  }
  std::vector<HomogeneousForm> q;
  for (int k = 0; k < top; ++k) q.emplace_back(n, f.degree() - 1 - k);
  // F_k = c_p Q_{k-1} + rest * Q_k, for k = top..1
  for (int k = top; k >= 1; --k) {
    HomogeneousForm num = slices[k];
    if (k < top) num = num - rest * q[k];
    q[k - 1] = num.scaled(1 / c[p]);
  }
  HomogeneousForm quotient(n, f.degree() - 1);
  for (int k = 0; k < top; ++k)
    for (const auto& [m, v] : q[k].terms()) {
      Monomial s = m;
      s.exps[p] += k;
      quotient.add_term(s, v);
    }
  if (!(quotient * l == f)) throw Error("divide_by_linear: inexact quotient");
  return {true, std::move(quotient)};
}

/// Symmetric Gram matrix of a quadratic form: q(x) = x^T G x.
inline Matrix gram_matrix(const HomogeneousForm& q) {
  if (q.degree() != 2) throw WrongDegree("Gram matrix needs a quadratic form");
  const int v = q.num_vars();
  Matrix g(v, std::vector<Rational>(v, 0));
  for (const auto& [m, c] : q.terms()) {
    std::vector<int> idx;
    for (int i = 0; i < v; ++i)
      for (int e = 0; e < m.exps[i]; ++e) idx.push_back(i);
    if (idx[0] == idx[1]) {
      g[idx[0]][idx[0]] = c;
    } else {
      g[idx[0]][idx[1]] = c / 2;
      g[idx[1]][idx[0]] = c / 2;
    }
  }
  return g;
}

inline int quadric_rank(const HomogeneousForm& q) { return rank(gram_matrix(q)); }

/// q = sum_k coeff_k * u_k^2 with independent linear forms u_k (Lagrange reduction).
inline std::vector<std::pair<Rational, HomogeneousForm>> diagonalize_quadric(const HomogeneousForm& q) {
  if (q.degree() != 2) throw WrongDegree("diagonalization needs a quadratic form");
  std::vector<std::pair<Rational, HomogeneousForm>> out;
  HomogeneousForm rest = q;
  const int v = q.num_vars();
  while (!rest.is_zero()) {
    int square_var = -1;
    for (int i = 0; i < v && square_var < 0; ++i)
      if (rest.coefficient(Monomial::var(v, i, 2)) != 0) square_var = i;
    if (square_var >= 0) {
      const Rational a = rest.coefficient(Monomial::var(v, square_var, 2));
      HomogeneousForm u = rest.derivative(square_var).scaled(1 / (2 * a));
      rest = rest - (u * u).scaled(a);
      out.emplace_back(a, std::move(u));
      continue;
    }
    // no squares: pick a cross term c x_i x_j
    const Monomial& m = rest.terms().begin()->first;
    const Rational c = rest.terms().begin()->second;
    int i = -1, j = -1;
    for (int k = 0; k < v; ++k)
      if (m.exps[k] == 1) (i < 0 ? i : j) = k;
    HomogeneousForm u = rest.derivative(i);
    HomogeneousForm w = rest.derivative(j);
    // u w / c = ((u+w)^2 - (u-w)^2) / (4c)
    rest = rest - (u * w).scaled(1 / c);
    out.emplace_back(1 / (4 * c), u + w);
    out.emplace_back(-1 / (4 * c), u - w);
  }
  return out;
}

/// A form with x_v set to 1, remembering its degree for re-homogenization.
struct AffinePolynomial {
  int ambient_dim = 0;
  int var = 0;
  int degree = 0;
  std::map<Monomial, Rational> terms;  // exponent of x_var is always 0

  Rational evaluate(std::span<const Rational> point) const {
    Rational acc = 0;
    for (const auto& [m, c] : terms) {
      Rational t = c;
      for (std::size_t i = 0; i < m.exps.size(); ++i)
        for (int e = 0; e < m.exps[i]; ++e) t *= point[i];
      acc += t;
    }
    return acc;
  }

  bool operator==(const AffinePolynomial&) const = default;
};

inline AffinePolynomial dehomogenize(const HomogeneousForm& f, int v) {
  if (v < 0 || v > f.ambient_dim()) throw DimMismatch("dehomogenization variable out of range");
  AffinePolynomial p{f.ambient_dim(), v, f.degree(), {}};
  for (const auto& [m, c] : f.terms()) {
    Monomial s = m;
    s.exps[v] = 0;
    p.terms.emplace(std::move(s), c);
  }
  return p;
}

inline HomogeneousForm rehomogenize(const AffinePolynomial& p, int degree) {
  HomogeneousForm f(p.ambient_dim, degree);
  for (const auto& [m, c] : p.terms) {
    Monomial s = m;
    const int d = s.degree();
    if (d > degree) throw DegreeMismatch("term of degree " + std::to_string(d) + " exceeds " + std::to_string(degree));
    s.exps[p.var] = degree - d;
    f.add_term(s, c);
  }
  return f;
}

inline HomogeneousForm rehomogenize(const AffinePolynomial& p) { return rehomogenize(p, p.degree); }

// ---------------------------------------------------------------------------
// Text format: "c*x0^a0*x1^a1 + ..." with c = p or p/q.

inline std::string to_text(const HomogeneousForm& f) {
  if (f.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = f.terms().rbegin(); it != f.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    Rational a = abs(c);
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    std::string vars;
    for (std::size_t i = 0; i < m.exps.size(); ++i) {
      if (m.exps[i] == 0) continue;
      if (!vars.empty()) vars += "*";
      vars += "x" + std::to_string(i);
      if (m.exps[i] > 1) vars += "^" + std::to_string(m.exps[i]);
    }
    if (vars.empty()) {
      out += to_string(a);
    } else if (a == 1) {
      out += vars;
    } else {
      out += to_string(a) + "*" + vars;
    }
  }
  return out;
}

/// Parses the text format on P^n. The degree is inferred from the terms;
/// `zero_degree` tags the zero form.
inline HomogeneousForm parse_form(std::string_view text, int n, std::optional<int> zero_degree = std::nullopt) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto read_uint = [&]() -> std::string {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw ParseError("expected digits at offset " + std::to_string(start));
    return std::string(text.substr(start, pos - start));
  };
  std::vector<std::pair<Monomial, Rational>> terms;
  skip_ws();
  bool first = true;
  while (pos < text.size()) {
    int sign = 1;
    if (text[pos] == '+' || text[pos] == '-') {
      sign = text[pos] == '-' ? -1 : 1;
      ++pos;
      skip_ws();
    } else if (!first) {
      throw ParseError("expected '+' or '-' at offset " + std::to_string(pos));
    }
    first = false;
    Rational coeff = 1;
    Monomial m = Monomial::one(n + 1);
    bool need_factor = true;
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      std::string num = read_uint();
      if (pos < text.size() && text[pos] == '/') {
        ++pos;
        num += "/" + read_uint();
      }
      coeff = parse_rational(num);
      need_factor = false;
      skip_ws();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        skip_ws();
        need_factor = true;
      }
    }
    while (need_factor) {
      if (pos >= text.size() || text[pos] != 'x') throw ParseError("expected variable at offset " + std::to_string(pos));
      ++pos;
      const int idx = std::stoi(read_uint());
      if (idx > n) throw ParseError("variable x" + std::to_string(idx) + " outside P^" + std::to_string(n));
      int e = 1;
      skip_ws();
      if (pos < text.size() && text[pos] == '^') {
        ++pos;
        e = std::stoi(read_uint());
      }
      m.exps[idx] += e;
      skip_ws();
      need_factor = pos < text.size() && text[pos] == '*';
      if (need_factor) {
        ++pos;
        skip_ws();
      }
    }
    terms.emplace_back(std::move(m), coeff * sign);
    skip_ws();
  }
  if (terms.empty()) throw ParseError("empty form");
  // "0" parses as the constant term 0
  int degree = -1;
  for (const auto& [m, c] : terms)
    if (c != 0) {
      if (degree < 0) degree = m.degree();
      else if (degree != m.degree()) throw ParseError("form is not homogeneous");
    }
  if (degree < 0) degree = zero_degree.value_or(0);
  HomogeneousForm f(n, degree);
  for (const auto& [m, c] : terms)
    if (c != 0) f.add_term(m, c);
  return f;
}

}  // namespace qb
