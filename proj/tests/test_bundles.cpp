#include <gtest/gtest.h>

#include "qb/arrangement.hpp"
#include "qb/bundles.hpp"
#include "qb/json_io.hpp"

using namespace qb;

namespace {

// Reference predicate: uniform parity and either C(r+3, 2) > n or a zero degree.
bool type_exists_reference(int n, int r, const std::vector<int>& d) {
  for (int x : d)
    if ((x - d[0]) % 2 != 0) return false;
  const long pairs = static_cast<long>(r + 3) * (r + 2) / 2;
  if (pairs > n) return true;
  for (int x : d)
    if (x == 0) return true;
  return false;
}

int reference_k(int r) {
  for (int k = 1;; ++k)
    if ((1L << (k - 1)) - 1 <= r && r <= (1L << k) - 2) return k;
}

void check_entry_degrees(const BundleMatrix& A) {
  for (int i = 0; i < A.size(); ++i)
    for (int j = 0; j < A.size(); ++j) {
      EXPECT_EQ(A.a[i][j].degree(), A.type.twist[i] + A.type.twist[j] + A.type.l);
      EXPECT_EQ(A.a[i][j], A.a[j][i]);
    }
  // the type recomputed from the diagonal degrees
  std::vector<int> d;
  for (int i = 0; i < A.size(); ++i) d.push_back(A.a[i][i].degree());
  EXPECT_EQ(d, A.type.d);
}

}  // namespace

TEST(Bundles, ExistsTypeExamples) {
  EXPECT_TRUE(exists_type(2, 1, {0, 2, 2}));
  EXPECT_FALSE(exists_type(3, 1, {1, 2, 2}));
  EXPECT_FALSE(exists_type(7, 1, {2, 2, 2}));
  EXPECT_TRUE(exists_type(7, 1, {0, 2, 2}));
}

TEST(Bundles, ExistsTypeGrid) {
  // exhaustive for r <= 2, seeded sample for larger r
  for (int n = 1; n <= 8; ++n)
    for (int r = 1; r <= 2; ++r) {
      std::vector<int> d(r + 2, 0);
      for (;;) {
        EXPECT_EQ(exists_type(n, r, d), type_exists_reference(n, r, d));
        int k = 0;
        while (k < r + 2 && ++d[k] > 6) d[k++] = 0;
        if (k == r + 2) break;
      }
    }
  SplitMix64 rng(77);
  for (int t = 0; t < 20000; ++t) {
    const int n = static_cast<int>(rng.uniform_int(1, 8)), r = static_cast<int>(rng.uniform_int(3, 8));
    std::vector<int> d(r + 2);
    const int parity = static_cast<int>(rng.uniform_int(0, 1));
    for (auto& x : d) x = t % 2 == 0 ? static_cast<int>(rng.uniform_int(0, 3)) * 2 + parity : static_cast<int>(rng.uniform_int(0, 6));
    EXPECT_EQ(exists_type(n, r, d), type_exists_reference(n, r, d));
  }
}

TEST(Bundles, ClassifyK) {
  EXPECT_EQ(classify(2, 2).k, 2);
  EXPECT_EQ(classify(2, 7).k, 4);
  EXPECT_TRUE(classify(2, 3).lang_rational);
  EXPECT_FALSE(classify(2, 2).lang_rational);
  const auto rep = classify(4, 8);
  EXPECT_EQ(rep.k, 4);
  EXPECT_TRUE(rep.cto_band);
  for (int r = 1; r <= 1000; ++r) {
    const int k = classify(3, r).k;
    EXPECT_EQ(k, reference_k(r));
    EXPECT_LE((1 << (k - 1)) - 1, r);
    EXPECT_LE(r, (1 << k) - 2);
  }
}

TEST(Bundles, ThresholdGrid) {
  for (int n = 1; n <= 6; ++n)
    for (int r = 1; r <= 62; ++r) {
      const long p = 1L << n;
      const bool band = p / 2 - 1 <= r && r <= p - 2;
      for (long d : {p + n - 2, p + n - 1, p + n, p + n + 1, 2 * p + 2 * n - 3, 2 * p + 2 * n - 2,
                     2L * (n + r) * (r + 2) - 1, 2L * (n + r) * (r + 2)}) {
        const auto rep = classify(n, r, d);
        ASSERT_EQ(rep.thresholds.size(), 5u);
        std::map<std::string, bool> met;
        for (const auto& t : rep.thresholds) met[t.name] = t.met.value();
        EXPECT_EQ(met["type-degrees"], band && d >= p + n - 1);
        EXPECT_EQ(met["hypersurface-multiplicity"], band && d >= p + n + 1);
        EXPECT_EQ(met["bidegree-d-2"], band && d >= p + n - 1);
        EXPECT_EQ(met["double-cover"], band && n >= 2 && d >= 2 * p + 2 * n - 2 && d % 2 == 0);
        EXPECT_EQ(met["degeneration-degree"],
                  band && n >= 2 && d >= 2L * (n + r) * (r + 2) && (r % 2 == 1 || d % 2 == 0));
      }
    }
  const auto rep = classify(2, 1, 5);
  EXPECT_EQ(rep.thresholds[0].bound, 5);
  EXPECT_TRUE(*rep.thresholds[0].met);
}

TEST(Bundles, PaddingAtTheLedger) {
  auto model = build_model(generate_arrangement(2, 7));
  const auto L = build_ledger(model, IndexMap::standard(2));
  const auto x0 = HomogeneousForm::variable(2, 0);
  const auto dm = padded_diagonal(model, L, Variant::C, 2, {0, 2, 8, 10}, x0);
  EXPECT_EQ(dm.padding, (std::vector<int>{0, 0, 0, 0}));
  for (int i = 0; i < 4; ++i) EXPECT_EQ(dm.e[i].expand(model.table), L.family(Variant::C)[i].expand(model.table));
  const auto big = padded_diagonal(model, L, Variant::C, 2, {32, 32, 32, 32}, x0);
  EXPECT_EQ(big.padding, (std::vector<int>{32, 30, 24, 22}));
  for (int i = 0; i < 4; ++i) EXPECT_EQ(big.e[i].degree(model.table), 32);
  EXPECT_EQ(big.type.twist, (std::vector<int>{16, 16, 16, 16}));
  EXPECT_EQ(big.ledger_twist, (std::vector<int>{0, 1, 4, 5}));
  EXPECT_THROW(padded_diagonal(model, L, Variant::C, 2, {0, 3, 8, 10}, x0), ParityMismatch);
  EXPECT_THROW(padded_diagonal(model, L, Variant::C, 2, {0, 2, 8, 8}, x0), DegreeShortfall);
  EXPECT_THROW(padded_diagonal(model, L, Variant::C, 3, {0, 2, 8, 10, 10}, x0), RangeError);
}

TEST(Bundles, PaddingAtTheDegenerationBound) {
  for (int n = 2; n <= 5; ++n)
    for (int r = (1 << (n - 1)) - 1; r <= (1 << n) - 2; ++r) {
      const long bound = 2L * (n + r) * (r + 2);
      for (long d : {bound, bound + 1, bound + 2}) {
        if (r % 2 == 0 && d % 2 != 0) continue;
        const auto rec = degeneration_degree_recipe(n, r, d);
        const auto m = structural_degrees(n, rec.variant, IndexMap::standard(n));
        long total = 0;
        for (int i = 0; i <= r + 1; ++i) {
          EXPECT_GE(rec.d[i] - m[i], 0) << n << " " << r << " " << d;
          EXPECT_EQ((rec.d[i] - m[i]) % 2, 0);
          total += rec.d[i];
        }
        EXPECT_EQ(total, d);
      }
    }
  // with actual forms for n = 2, 3
  for (int n : {2, 3}) {
    auto model = build_model(generate_arrangement(n, 1));
    const auto L = build_ledger(model, IndexMap::standard(n));
    const int r = (1 << n) - 2;
    const long d = 2L * (n + r) * (r + 2);
    const auto rec = degeneration_degree_recipe(n, r, d);
    const auto dm = padded_diagonal(model, L, rec.variant, r, rec.d, HomogeneousForm::variable(n, 1));
    for (int p : dm.padding) EXPECT_GE(p, 0);
    for (int i = 0; i <= r + 1; ++i) EXPECT_EQ(dm.e[i].degree(model.table), rec.d[i]);
  }
}

TEST(Bundles, UnirationalityCases) {
  auto model = build_model(generate_arrangement(2, 7));
  const auto L = build_ledger(model, IndexMap::standard(2));
  const auto x0 = HomogeneousForm::variable(2, 0);
  const auto c = padded_diagonal(model, L, Variant::C, 2, {0, 2, 8, 10}, x0);
  const auto rc = unirationality_precondition(c, model.table);
  EXPECT_EQ(rc.applicable_case, "rank3");
  EXPECT_EQ(rc.rank_over_cz, 3);
  EXPECT_TRUE(rc.supported_on_x012);
  const auto cp = padded_diagonal(model, L, Variant::CPrime, 2, {1, 1, 9, 9}, x0);
  EXPECT_EQ(unirationality_precondition(cp, model.table).applicable_case, "linear");
  const auto twos = padded_diagonal(model, L, Variant::C, 2, {2, 2, 8, 10}, x0);
  EXPECT_EQ(unirationality_precondition(twos, model.table).applicable_case, "not-applicable");
}

TEST(Bundles, SingularHypersurfaceRoundTrips) {
  for (auto [n, r, d] : {std::tuple{2, 1, 2}, std::tuple{2, 2, 2}, std::tuple{3, 3, 2}, std::tuple{2, 1, 1}}) {
    const auto model = from_singular_hypersurface(n, r, d, 5);
    std::vector<int> expected(r + 1, d);
    expected.push_back(d + 2);
    EXPECT_EQ(model.matrix.type.d, expected);
    EXPECT_EQ(model.f.degree(), d + 2);
    EXPECT_EQ(model.f.ambient_dim(), n + r + 1);
    EXPECT_EQ(reconstruct_hypersurface(model.matrix), model.f);
    EXPECT_EQ(matrix_from_hypersurface(model.f, n, r), model.matrix);
    check_entry_degrees(model.matrix);
  }
  EXPECT_THROW(from_singular_hypersurface(7, 1, 2, 1), HypothesisViolated);
}

TEST(Bundles, QuarticWithDoubleLine) {
  const auto model = from_singular_hypersurface(2, 1, 2, 9);
  // every term has degree >= 2 in x_0, x_1, x_2: multiplicity d = 2 along {x = 0}
  for (const auto& [m, c] : model.f.terms()) EXPECT_GE(m.exps[0] + m.exps[1] + m.exps[2], 2);
  EXPECT_EQ(model.matrix.type.d, (std::vector<int>{2, 2, 4}));
}

TEST(Bundles, DoubleCover) {
  const auto model = from_double_cover(2, 1, 2, 3);
  EXPECT_EQ(model.matrix.type.d, (std::vector<int>{0, 2, 4}));
  const auto m2 = from_double_cover(2, 2, 2, 3);
  EXPECT_EQ(m2.matrix.type.d, (std::vector<int>{0, 2, 2, 4}));
  for (const auto& A : {model.matrix, m2.matrix}) {
    EXPECT_EQ(A.a[0][0], HomogeneousForm::constant(2, 1));
    for (int i = 1; i < A.size(); ++i) EXPECT_TRUE(A.a[i][0].is_zero());
    check_entry_degrees(A);
    EXPECT_EQ(matrix_from_branch(branch_polynomial(A), 2, A.type.r), A);
  }
  EXPECT_THROW(from_double_cover(2, 1, 3, 3), ParityViolated);
}

TEST(Bundles, SurfaceMinor) {
  const int n = 3, r = 3;
  const long d = 2L * (n + r) * (r + 2);
  const auto A = degeneration_family_member(n, r, d, 4);
  check_entry_degrees(A);
  const auto M = minor_surface_bundle(A, n);
  EXPECT_EQ(M.minor.type.d, (std::vector<int>{0, 2, 2, 4}));
  EXPECT_TRUE(M.voisin_type);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(M.minor.a[i][j], M.minor.a[j][i]);
  const auto small = from_singular_hypersurface(3, 1, 2, 1);
  EXPECT_THROW(minor_surface_bundle(small.matrix, 3), IndexError);
}

TEST(Bundles, WitnessSearch) {
  // cone: a_01 = a_23 = x_1^2 / 2, everything singular along x_1 = 0
  auto A = zero_matrix(BundleType::of(2, {2, 2, 2, 2}));
  const auto q = parse_form("1/2*x1^2", 2);
  A.a[0][1] = A.a[1][0] = q;
  A.a[2][3] = A.a[3][2] = q;
  A.validate();
  const auto found = singularity_witness_search(A, 200, 1);
  ASSERT_FALSE(found.witnesses.empty());
  for (const auto& w : found.witnesses) EXPECT_EQ(w.x[1], 0);

  const auto generic = from_singular_hypersurface(2, 2, 2, 11).matrix;
  EXPECT_TRUE(singularity_witness_search(generic, 200, 1).witnesses.empty());
  EXPECT_TRUE(singularity_witness_search(A, 0, 1).witnesses.empty());
}

TEST(Bundles, JsonRoundTrip) {
  const auto A = from_double_cover(3, 2, 4, 8).matrix;
  const auto j = matrix_json(A);
  EXPECT_EQ(j.at("schema"), "bundle/1");
  EXPECT_EQ(bundle_from_json(Json::parse(j.dump())), A);
  auto bad = j;
  bad["type"] = Json::array({0, 3, 4, 6});
  EXPECT_ANY_THROW(bundle_from_json(bad));
}

TEST(Bundles, MixedParityType) { EXPECT_THROW(BundleType::of(2, {0, 1, 2}), ParityMismatch); }
