// qbundle: construct and verify CTO-type arrangements, classify parameters,
// build quadric-bundle models and take residues. JSON goes to --out (or stdout
// when --out is absent); a short summary goes to stdout otherwise.
//
// Exit codes: 0 success / certified, 1 usage or I/O error, 2 cannot certify.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qb/arrangement.hpp"
#include "qb/bundles.hpp"
#include "qb/cohomology.hpp"
#include "qb/json_io.hpp"

namespace {

using qb::Json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kCannotCertify = 2;

struct Common {
  std::string out;
  std::string manifest;
};

struct Outcome {
  int code = kOk;
  Json artifact;
  std::string summary;
};

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qb::ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw qb::ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int emit(const Common& common, const Outcome& o) {
  if (common.out.empty()) {
    std::cout << dump(o.artifact);
  } else {
    write_text(common.out, dump(o.artifact));
    std::cout << o.summary;
  }
  return o.code;
}

// ---------------------------------------------------------------------------

struct ConstructArgs {
  int n = 2;
  int r = 2;
  std::string variant = "c";
  std::uint64_t seed = 1;
  int max_resample = 32;
};

Outcome run_construct(const ConstructArgs& a) {
  const auto variant = qb::parse_variant(a.variant);
  qb::check_cto_range(a.n, a.r);
  const auto config = qb::generate_arrangement(a.n, a.seed, a.max_resample);
  auto model = qb::build_model(config);
  const auto map = qb::IndexMap::standard(a.n);
  const auto ledger = qb::build_ledger(model, map);

  std::vector<int> target(ledger.m(variant).begin(), ledger.m(variant).begin() + a.r + 2);
  const auto diag = qb::padded_diagonal(model, ledger, variant, a.r, target, qb::HomogeneousForm::variable(a.n, 0));
  const auto uni = qb::unirationality_precondition(diag, model.table);

  Json ledger_json = Json::object();
  for (auto v : {qb::Variant::C, qb::Variant::CPrime, qb::Variant::CTilde, qb::Variant::CTildePrime}) {
    Json entries = Json::array();
    for (const auto& f : ledger.family(v)) entries.push_back(qb::factored_json(f));
    ledger_json[qb::to_string(v)] = {{"degrees", ledger.m(v)}, {"entries", entries}};
  }
  Json e = Json::array();
  for (const auto& f : diag.e) e.push_back(qb::factored_json(f));
  Json order = Json::array();
  for (auto mask : map.order) order.push_back(qb::eps_text(mask, a.n - 1));

  Outcome o;
  o.artifact = {{"schema", "cto/1"},
                {"kind", "construction"},
                {"config", qb::config_json(config)},
                {"config_hash", qb::config_hash(config)},
                {"factor_table", qb::table_json(model.table)},
                {"index_map", {{"phi_prime_order", order}, {"length_monotone", map.length_monotone()},
                               {"pins_hold", map.pins_hold()}}},
                {"ledger", ledger_json},
                {"diagonal_model", {{"variant", a.variant},
                                    {"r", a.r},
                                    {"entries", e},
                                    {"padding", diag.padding},
                                    {"ledger_twists", diag.ledger_twist},
                                    {"bundle_type", qb::type_json(diag.type)},
                                    {"unirationality", qb::unirationality_json(uni)}}}};
  std::ostringstream s;
  s << "construct n=" << a.n << " r=" << a.r << " variant=" << a.variant << " seed=" << a.seed
    << " attempts=" << config.attempts << "\n  degrees:";
  for (int d : diag.type.d) s << " " << d;
  s << "\n";
  o.summary = s.str();
  return o;
}

struct VerifyArgs {
  std::string config;
  int n = 0;
  std::uint64_t seed = 1;
  int max_resample = 32;
};

Outcome run_verify(const VerifyArgs& a) {
  qb::ArrangementConfig config;
  if (!a.config.empty()) {
    const Json j = read_json(a.config);
    // accept a bare arrangement or any document embedding one under "config"
    config = qb::config_from_json(j.contains("config") ? j.at("config") : j);
  } else {
    if (a.n < 2) throw std::invalid_argument("verify needs --config or --n >= 2");
    config = qb::generate_arrangement(a.n, a.seed, a.max_resample);
  }
  const auto cert = qb::verify_cto(config);
  Outcome o;
  o.artifact = qb::certificate_json(cert);
  o.code = cert.certified ? kOk : kCannotCertify;
  std::ostringstream s;
  s << "verify n=" << config.n << " seed=" << config.seed << " hash=" << cert.hash << ": "
    << (cert.certified ? "certified" : "not certified") << "\n";
  for (const auto& r : cert.checks) {
    s << "  " << r.name << " " << (r.passed ? "pass" : "FAIL") << " (" << r.candidates << " candidates)";
    if (!r.error.empty()) s << " " << r.error;
    s << "\n";
    if (!r.passed)
      for (std::size_t k = 0; k < r.witnesses.size() && k < 4; ++k) s << "    " << r.witnesses[k] << "\n";
  }
  o.summary = s.str();
  // failing checks always reach stderr so they are visible when JSON goes to stdout
  if (!cert.certified) {
    for (const auto& r : cert.checks)
      if (!r.passed) std::cerr << "failed check: " << r.name << "\n";
  }
  return o;
}

struct ClassifyArgs {
  int n = 1;
  int r = 1;
  std::optional<std::int64_t> d;
};

Outcome run_classify(const ClassifyArgs& a) {
  const auto rep = qb::classify(a.n, a.r, a.d);
  Outcome o;
  o.artifact = qb::classification_json(rep);
  std::ostringstream s;
  s << "classify n=" << a.n << " r=" << a.r << ": k=" << rep.k << (rep.lang_rational ? " lang-rational" : "")
    << (rep.cto_band ? " cto-band" : "") << "\n";
  for (const auto& t : rep.thresholds) {
    s << "  " << t.name << " bound=" << t.bound;
    if (t.met) s << (*t.met ? " met" : " not met");
    s << "\n";
  }
  o.summary = s.str();
  return o;
}

struct ModelArgs {
  int n = 2;
  int r = 1;
  int d = 2;
  std::uint64_t seed = 1;
};

Outcome run_hypersurface(const ModelArgs& a) {
  const auto model = qb::from_singular_hypersurface(a.n, a.r, a.d, a.seed);
  const auto back = qb::matrix_from_hypersurface(model.f, a.n, a.r);
  if (!(back == model.matrix) || !(qb::reconstruct_hypersurface(back) == model.f))
    throw std::logic_error("hypersurface round trip failed");
  Json j = qb::matrix_json(model.matrix);
  j["kind"] = "singular-hypersurface";
  j["seed"] = a.seed;
  j["hypersurface"] = qb::form_json(model.f);
  if (!(qb::bundle_from_json(Json::parse(j.dump())) == model.matrix)) throw std::logic_error("JSON round trip failed");
  Outcome o;
  o.artifact = j;
  std::ostringstream s;
  s << "hypersurface n=" << a.n << " r=" << a.r << " d=" << a.d << ": degree " << model.f.degree() << " in P^"
    << model.f.ambient_dim() << ", type";
  for (int x : model.matrix.type.d) s << " " << x;
  s << "\n";
  o.summary = s.str();
  return o;
}

Outcome run_doublecover(const ModelArgs& a) {
  const auto model = qb::from_double_cover(a.n, a.r, a.d, a.seed);
  const auto back = qb::matrix_from_branch(model.branch, a.n, a.r);
  if (!(back == model.matrix) || !(qb::branch_polynomial(back) == model.branch))
    throw std::logic_error("double cover round trip failed");
  Json j = qb::matrix_json(model.matrix);
  j["kind"] = "double-cover";
  j["seed"] = a.seed;
  j["branch"] = qb::form_json(model.branch);
  if (!(qb::bundle_from_json(Json::parse(j.dump())) == model.matrix)) throw std::logic_error("JSON round trip failed");
  Outcome o;
  o.artifact = j;
  std::ostringstream s;
  s << "doublecover n=" << a.n << " r=" << a.r << " d=" << a.d << ": branch degree " << model.branch.degree()
    << ", type";
  for (int x : model.matrix.type.d) s << " " << x;
  s << "\n";
  o.summary = s.str();
  return o;
}

struct ResidueArgs {
  std::string cls;
  unsigned divisor = 0;
};

Outcome run_residue(const ResidueArgs& a) {
  const Json in = read_json(a.cls);
  qb::FactorTable table;
  qb::CohClass c;
  try {
    if (in.at("schema").get<std::string>() != "residue/1") throw qb::ParseError("not a residue/1 document");
    table = qb::table_from_json(in.at("table"));
    c = qb::coh_from_json(in.at("class"), table);
  } catch (const nlohmann::json::exception& e) {
    throw qb::ParseError(std::string("residue input: ") + e.what());
  }
  if (a.divisor >= table.size()) throw std::invalid_argument("divisor index out of range");
  const qb::FactorId d{a.divisor};
  if (table[d].kind != qb::FactorKind::Linear) throw std::invalid_argument("divisor must be a linear factor");
  const auto res = qb::residue(c, d, table);
  Outcome o;
  o.artifact = {{"schema", "residue/1"},
                {"divisor", a.divisor},
                {"divisor_form", qb::to_text(table[d].form)},
                {"table", qb::table_json(res.table)},
                {"class", qb::coh_json(res.cls)}};
  std::ostringstream s;
  s << "residue along " << qb::to_text(table[d].form) << ": " << res.cls.symbols().size() << " symbol(s)"
    << (res.cls.is_zero() ? " (zero)" : "") << "\n";
  o.summary = s.str();
  return o;
}

void write_manifest(const Common& common, const std::string& command, const Json& params, int code, double ms) {
  if (common.manifest.empty()) return;
  Json m = {{"command", command},
            {"parameters", params},
            {"timing_ms", ms},
            {"outcome", code == kOk ? "ok" : code == kCannotCertify ? "cannot-certify" : "error"},
            {"exit_code", code},
            {"artifacts", common.out.empty() ? Json::array() : Json::array({common.out})}};
  write_text(common.manifest, dump(m));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadric bundle arrangements and certificates"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "write JSON here (default: stdout)");
    sub->add_option("--manifest", common.manifest, "write a run manifest with timing here");
  };

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "arrangement, coefficient ledgers and diagonal model");
  construct->add_option("--n", ca.n)->required();
  construct->add_option("--r", ca.r)->required();
  construct->add_option("--variant", ca.variant)->check(CLI::IsMember({"c", "cprime", "ctilde", "ctildeprime"}));
  construct->add_option("--seed", ca.seed);
  construct->add_option("--max-resample", ca.max_resample);
  add_common(construct);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "verify C1-C4 and emit a certificate");
  verify->add_option("--config", va.config, "arrangement or certificate JSON");
  verify->add_option("--n", va.n);
  verify->add_option("--seed", va.seed);
  verify->add_option("--max-resample", va.max_resample);
  add_common(verify);

  ClassifyArgs cl;
  auto* classify = app.add_subcommand("classify", "parameter regions and degree thresholds");
  classify->add_option("--n", cl.n)->required();
  classify->add_option("--r", cl.r)->required();
  classify->add_option("--d", cl.d);
  add_common(classify);

  ModelArgs ha;
  auto* hyper = app.add_subcommand("hypersurface", "singular hypersurface and its quadric bundle matrix");
  hyper->add_option("--n", ha.n)->required();
  hyper->add_option("--r", ha.r)->required();
  hyper->add_option("--d", ha.d)->required();
  hyper->add_option("--seed", ha.seed);
  add_common(hyper);

  ModelArgs da;
  auto* dcover = app.add_subcommand("doublecover", "double cover and its quadric bundle matrix");
  dcover->add_option("--n", da.n)->required();
  dcover->add_option("--r", da.r)->required();
  dcover->add_option("--d", da.d)->required();
  dcover->add_option("--seed", da.seed);
  add_common(dcover);

  ResidueArgs ra;
  auto* residue = app.add_subcommand("residue", "residue of a class along a linear factor");
  residue->add_option("--class", ra.cls)->required();
  residue->add_option("--divisor", ra.divisor)->required();
  add_common(residue);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  std::string command;
  Json params;
  int code = kOk;
  try {
    Outcome o;
    if (*construct) {
      command = "construct";
      params = {{"n", ca.n}, {"r", ca.r}, {"variant", ca.variant}, {"seed", ca.seed}};
      o = run_construct(ca);
    } else if (*verify) {
      command = "verify";
      params = {{"config", va.config}, {"n", va.n}, {"seed", va.seed}};
      o = run_verify(va);
    } else if (*classify) {
      command = "classify";
      params = {{"n", cl.n}, {"r", cl.r}, {"d", cl.d ? Json(*cl.d) : Json(nullptr)}};
      o = run_classify(cl);
    } else if (*hyper) {
      command = "hypersurface";
      params = {{"n", ha.n}, {"r", ha.r}, {"d", ha.d}, {"seed", ha.seed}};
      o = run_hypersurface(ha);
    } else if (*dcover) {
      command = "doublecover";
      params = {{"n", da.n}, {"r", da.r}, {"d", da.d}, {"seed", da.seed}};
      o = run_doublecover(da);
    } else {
      command = "residue";
      params = {{"class", ra.cls}, {"divisor", ra.divisor}};
      o = run_residue(ra);
    }
    code = emit(common, o);
  } catch (const qb::ResampleExhausted& e) {
    std::cerr << e.what() << "\n";
    code = kCannotCertify;
  } catch (const qb::CannotCertify& e) {
    std::cerr << e.what() << "\n";
    code = kCannotCertify;
  } catch (const qb::NotAUnit& e) {
    std::cerr << e.what() << "\n";
    code = kCannotCertify;
  } catch (const qb::OutsideUniverse& e) {
    std::cerr << e.what() << "\n";
    code = kCannotCertify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kUsage;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(common, command, params, code, ms);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return code;
}
