#pragma once

// JSON encodings shared by certificates and the CLI. Rationals are strings
// "p/q"; forms are {"n", "degree", "terms": [[[exponents], "p/q"], ...]}.
// Objects are key-sorted (nlohmann::json default), so dumps are deterministic.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "qb/cohomology.hpp"
#include "qb/errors.hpp"
#include "qb/forms.hpp"
#include "qb/square_classes.hpp"

namespace qb {

using Json = nlohmann::json;

inline Json rational_json(const Rational& q) { return to_string(q); }

inline Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) throw ParseError("rational must be a string");
  return parse_rational(j.get<std::string>());
}

inline Json form_json(const HomogeneousForm& f) {
  Json terms = Json::array();
  for (const auto& [m, c] : f.terms()) terms.push_back(Json::array({m.exps, to_string(c)}));
  return {{"n", f.ambient_dim()}, {"degree", f.degree()}, {"terms", terms}};
}

inline HomogeneousForm form_from_json(const Json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int degree = j.at("degree").get<int>();
    if (n < 0 || degree < 0) throw ParseError("negative n or degree");
    HomogeneousForm f(n, degree);
    for (const auto& t : j.at("terms")) {
      auto exps = t.at(0).get<std::vector<int>>();
      for (int e : exps)
        if (e < 0) throw ParseError("negative exponent");
      f.add_term(Monomial(std::move(exps)), rational_from_json(t.at(1)));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("form: ") + e.what());
  } catch (const DegreeMismatch& e) {
    throw ParseError(e.what());
  } catch (const DimMismatch& e) {
    throw ParseError(e.what());
  }
}

inline Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(to_string(x));
    out.push_back(r);
  }
  return out;
}

inline Matrix matrix_from_json(const Json& j) {
  Matrix m;
  for (const auto& row : j) {
    std::vector<Rational> r;
    for (const auto& x : row) r.push_back(rational_from_json(x));
    m.push_back(std::move(r));
  }
  return m;
}

inline Json table_json(const FactorTable& t) {
  Json entries = Json::array();
  for (const auto& e : t.entries()) entries.push_back({{"kind", to_string(e.kind)}, {"form", form_json(e.form)}});
  return {{"n", t.ambient_dim()}, {"factors", entries}};
}

inline FactorTable table_from_json(const Json& j) {
  try {
    FactorTable t(j.at("n").get<int>());
    for (const auto& e : j.at("factors")) {
      const std::string kind = e.at("kind").get<std::string>();
      if (kind != "linear" && kind != "quadric") throw ParseError("unknown factor kind '" + kind + "'");
      const auto f = form_from_json(e.at("form"));
      const auto k = kind == "linear" ? FactorKind::Linear : FactorKind::Quadric;
      if (k == FactorKind::Quadric && quadric_rank(f) < 3) throw ParseError("quadric factor of rank < 3");
      const auto before = t.size();
      t.intern(f, k);
      if (t.size() == before) throw ParseError("duplicate factor in table");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("factor table: ") + e.what());
  } catch (const WrongDegree& e) {
    throw ParseError(e.what());
  } catch (const DimMismatch& e) {
    throw ParseError(e.what());
  }
}

inline Json class_json(const SquareClass& c) {
  Json out = Json::array();
  for (auto id : c.odd) out.push_back(id.value);
  return out;
}

inline SquareClass class_from_json(const Json& j, const FactorTable& t) {
  SquareClass c;
  for (const auto& x : j) {
    const auto v = x.get<std::uint32_t>();
    if (v >= t.size()) throw ParseError("factor index " + std::to_string(v) + " out of range");
    c.toggle(FactorId{v});
  }
  return c;
}

inline Json coh_json(const CohClass& c) {
  Json symbols = Json::array();
  for (const auto& s : c.symbols()) {
    Json entries = Json::array();
    for (const auto& e : s.entries) entries.push_back(class_json(e));
    symbols.push_back(entries);
  }
  return {{"degree", c.degree()}, {"symbols", symbols}};
}

inline CohClass coh_from_json(const Json& j, const FactorTable& t) {
  try {
    CohClass c(j.at("degree").get<int>());
    for (const auto& s : j.at("symbols")) {
      Symbol sym;
      for (const auto& e : s) sym.entries.push_back(class_from_json(e, t));
      c.add_symbol(std::move(sym));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("class: ") + e.what());
  } catch (const DegreeMismatch& e) {
    throw ParseError(e.what());
  }
}

inline Json chain_json(const ResidueChainCertificate& c) {
  Json steps = Json::array();
  for (const auto& s : c.steps)
    steps.push_back({{"coordinate", s.coordinate}, {"table", table_json(s.table)}, {"class", coh_json(s.cls)}});
  Json chain = Json::array();
  for (auto id : c.chain) chain.push_back(id.value);
  return {{"chain", chain},
          {"chart", matrix_json(c.chart)},
          {"chart_table", table_json(c.chart_table)},
          {"chart_class", coh_json(c.chart_class)},
          {"steps", steps},
          {"terminal_table", table_json(c.terminal_table)},
          {"terminal", class_json(c.terminal)},
          {"verdict", to_string(c.verdict)}};
}

inline ResidueChainCertificate chain_from_json(const Json& j) {
  ResidueChainCertificate c;
  for (const auto& x : j.at("chain")) c.chain.push_back(FactorId{x.get<std::uint32_t>()});
  c.chart = matrix_from_json(j.at("chart"));
  c.chart_table = table_from_json(j.at("chart_table"));
  c.chart_class = coh_from_json(j.at("chart_class"), c.chart_table);
  for (const auto& s : j.at("steps")) {
    ResidueStep step;
    step.coordinate = s.at("coordinate").get<int>();
    step.table = table_from_json(s.at("table"));
    step.cls = coh_from_json(s.at("class"), step.table);
    c.steps.push_back(std::move(step));
  }
  c.terminal_table = table_from_json(j.at("terminal_table"));
  c.terminal = class_from_json(j.at("terminal"), c.terminal_table);
  const auto v = j.at("verdict").get<std::string>();
  if (v != "nonzero" && v != "inconclusive") throw ParseError("unknown verdict '" + v + "'");
  c.verdict = v == "nonzero" ? ChainVerdict::Nonzero : ChainVerdict::Inconclusive;
  return c;
}

/// FNV-1a 64 of a canonical dump, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qb
