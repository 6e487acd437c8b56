#include <gtest/gtest.h>

#include <random>

#include "koszul/matrixcrit.hpp"
#include "support.hpp"

using namespace koszul;
using namespace koszul::bigring;
using namespace koszul::matrixcrit;
using namespace testing_support;

namespace {

const Vec X{1, 0};
const Vec Y{0, 1};

ColoredMatrix single(const BigGradedRing& A, int degree, std::vector<std::vector<Vec>> rows) {
  std::vector<Vec> entries;
  for (auto& r : rows)
    for (auto& e : r) entries.push_back(e);
  const std::size_t c = rows.empty() ? 0 : rows[0].size();
  return make_matrix(A, std::vector<std::size_t>(rows.size(), 0), std::vector<std::size_t>(c, 0), degree,
                     std::move(entries));
}

// a --> b: one arrow in A_{ab;1}, nothing above degree 1.
BigGradedRing arrow_ring(int d) {
  BigGradedRing A(ObjectSet({"a", "b"}), 2, d);
  A.set_component(0, 0, 0, FinModule::free(2, 1));
  A.set_component(0, 1, 1, FinModule::free(2, 1));
  A.set_component(1, 0, 1, FinModule::free(2, 1));
  A.set_unit(0, {1});
  A.set_unit(1, {1});
  A.set_mult(0, 0, 0, 0, 0, ModMatrix::from_rows({{1}}));
  A.set_mult(0, 0, 1, 1, 1, ModMatrix::from_rows({{1}}));
  A.set_mult(0, 1, 0, 0, 1, ModMatrix::from_rows({{1}}));
  A.set_mult(1, 0, 0, 1, 1, ModMatrix::from_rows({{1}}));
  return A;
}

// k<x, y> modulo every quadratic monomial: A_n = 0 for n >= 2.
BigGradedRing truncated_two(Residue m, int d) {
  std::vector<std::size_t> ranks(d + 1, 0);
  ranks[0] = 1;
  ranks[1] = 2;
  return one_object_ring(m, ranks, [](int p, std::size_t i, int q, std::size_t j) -> Vec {
    if (p == 0 && q == 0) return Vec{1};
    if (p + q == 1) {
      Vec v(2, 0);
      v[p == 0 ? j : i] = 1;
      return v;
    }
    return Vec{};
  });
}

// Chain problem in Λ(x, y): M(1) = [x], M(2) = [x], N = [x].
ChainProblem exterior_chain(const BigGradedRing& A) {
  return make_problem(A, {single(A, 1, {{X}}), single(A, 1, {{X}})}, single(A, 1, {{X}}));
}

}  // namespace

TEST(Compose, IdentityIsNeutral) {
  auto A = exterior2(3);
  auto N = single(A, 1, {{X, Y}, {Y, X}});
  EXPECT_EQ(compose(A, identity_matrix(A, {0, 0}), N), N);
  EXPECT_EQ(compose(A, N, identity_matrix(A, {0, 0})), N);
}

TEST(Compose, AnticommutingProductVanishes) {
  for (Residue m : {2, 3, 5}) {
    auto A = exterior2(m);
    auto row = single(A, 1, {{X, Y}});
    auto col = single(A, 1, {{Y}, {X}});
    auto prod = compose(A, row, col);
    EXPECT_EQ(prod.degree, 2);
    ASSERT_EQ(prod.entries.size(), 1u);
    EXPECT_EQ(prod.at(0, 0), (Vec{0})) << m;
    // [x y] [x y]^T = xy + yx is zero too, while [x y] [y 0]^T = xy is not.
    EXPECT_FALSE(is_zero(compose(A, row, single(A, 1, {{Y}, {Vec{0, 0}}}))));
  }
}

TEST(Compose, LabelMismatchIsRejected) {
  auto A = arrow_ring(2);
  auto M = make_matrix(A, {0}, {1}, 1, {{1}});
  auto N = make_matrix(A, {0}, {1}, 1, {{1}});
  EXPECT_THROW(compose(A, M, N), InvalidInput);
  EXPECT_NO_THROW(compose(A, identity_matrix(A, {0}), M));
}

TEST(ChainProblem, RejectsEntriesOutsideTheirComponent) {
  auto A = arrow_ring(2);
  // A_{ba;1} is zero, so a nonzero entry there cannot be stated.
  EXPECT_THROW(make_matrix(A, {1}, {0}, 1, {{1}}), InvalidInput);
  EXPECT_THROW(make_problem(A, {}, ColoredMatrix{{1}, {0}, 1, {{1}}}), InvalidInput);
}

TEST(ChainProblem, RejectsNonzeroProducts) {
  auto A = exterior2(2);
  EXPECT_THROW(make_problem(A, {single(A, 1, {{X}})}, single(A, 1, {{Y}})), InvalidInput);
  EXPECT_NO_THROW(make_problem(A, {single(A, 1, {{X}})}, single(A, 1, {{X}})));
}

TEST(ChainProblem, RejectsVacuousN) {
  auto A = exterior2(2);
  EXPECT_THROW(make_problem(A, {}, zero_matrix(A, {}, {0}, 1)), InvalidInput);
  EXPECT_THROW(make_problem(A, {}, single(A, 0, {{Vec{1}}})), InvalidInput);
}

TEST(VerifyWitness, DegreeOneGeneralWitness) {
  auto A = exterior2(2);
  auto P = exterior_chain(A);
  FactorizationWitness W;
  W.variant = Variant::general;
  for (const auto& M : P.chain) W.K.push_back(identity_matrix(A, M.row_labels));
  W.Mp = P.chain;
  W.P = P.N;
  W.Q = identity_matrix(A, P.N.row_labels);
  auto r = verify_witness(A, P, W);
  EXPECT_TRUE(r.holds) << r.failed;
}

TEST(VerifyWitness, DegreeOneTriangulatedWitness) {
  auto A = exterior2(2);
  auto P = exterior_chain(A);
  FactorizationWitness W;
  W.variant = Variant::triangulated;
  // Z(0), Z(1) empty, Z(2) = rows of N.
  W.L = {zero_matrix(A, {}, {0}, 1), zero_matrix(A, {}, {0}, 1), P.N};
  W.Mp = {zero_matrix(A, {}, {}, 1), zero_matrix(A, P.N.row_labels, {}, 1)};
  W.Q = identity_matrix(A, P.N.row_labels);
  auto r = verify_witness(A, P, W);
  EXPECT_TRUE(r.holds) << r.failed;
}

TEST(VerifyWitness, PerturbedEntryNamesTheEquation) {
  auto A = exterior2(2);
  auto P = exterior_chain(A);
  FactorizationWitness W;
  for (const auto& M : P.chain) W.K.push_back(identity_matrix(A, M.row_labels));
  W.Mp = P.chain;
  W.P = P.N;
  W.Q = identity_matrix(A, P.N.row_labels);
  W.P.at(0, 0) = Y;
  auto r = verify_witness(A, P, W);
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.failed, "N K(2) = Q P");
  W.P = P.N;
  W.K[0].at(0, 0) = Vec{0};
  r = verify_witness(A, P, W);
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.failed, "M(1) = K(1) M'(1)");
}

TEST(VerifyWitness, ShapeInconsistencyThrows) {
  auto A = exterior2(2);
  auto P = exterior_chain(A);
  FactorizationWitness W;
  W.K = {identity_matrix(A, {0, 0}), identity_matrix(A, {0})};
  W.Mp = P.chain;
  W.P = P.N;
  W.Q = identity_matrix(A, {0});
  EXPECT_THROW(verify_witness(A, P, W), InvalidInput);
  W.K = {identity_matrix(A, {0})};
  EXPECT_THROW(verify_witness(A, P, W), InvalidInput);
}

TEST(SearchWitness, GenerationInDegreeZeroChain) {
  // k[x, y]: every element of degree n is a sum of products of degree n-1 and 1.
  auto A = symmetric2(3, 3);
  for (int n = 2; n <= 3; ++n) {
    Vec e(static_cast<std::size_t>(n + 1), 1);
    auto P = make_problem(A, {}, single(A, n, {{e}}));
    for (auto v : {Variant::general, Variant::triangulated}) {
      auto res = search_witness(A, P, v);
      ASSERT_TRUE(res.witness.has_value()) << n;
      auto chk = verify_witness(A, P, *res.witness);
      EXPECT_TRUE(chk.holds) << chk.failed;
    }
  }
}

TEST(SearchWitness, ExtraGeneratorHasNoFactorization) {
  auto A = pad(exterior_with_cubic(2), 3);
  auto P = make_problem(A, {}, single(A, 3, {{Vec{1}}}));
  for (auto v : {Variant::general, Variant::triangulated}) {
    auto res = search_witness(A, P, v);
    EXPECT_FALSE(res.witness.has_value());
    EXPECT_GE(res.enumerated, 1u);
    EXPECT_NE(res.certificate().find("no "), std::string::npos);
  }
}

TEST(SearchWitness, FoundWitnessesReplay) {
  auto A = pad(exterior2(3), 3);
  auto P = make_problem(A, {single(A, 1, {{X}, {Y}})}, single(A, 2, {{Vec{1}, Vec{0}}}));
  for (auto v : {Variant::general, Variant::triangulated}) {
    auto res = search_witness(A, P, v);
    ASSERT_TRUE(res.witness.has_value());
    EXPECT_EQ(res.witness->variant, v);
    auto chk = verify_witness(A, P, *res.witness);
    EXPECT_TRUE(chk.holds) << chk.failed;
  }
}

TEST(SearchWitness, BoundedEnumerationFindsTheSameWitnesses) {
  auto A = pad(exterior2(3), 3);
  auto P = make_problem(A, {single(A, 1, {{X}, {Y}})}, single(A, 2, {{Vec{1}, Vec{0}}}));
  SearchOptions opt;
  opt.size_bound = 2;
  for (auto v : {Variant::general, Variant::triangulated}) {
    auto res = search_witness(A, P, v, opt);
    ASSERT_TRUE(res.witness.has_value());
    EXPECT_TRUE(verify_witness(A, P, *res.witness).holds);
  }
  auto B = pad(exterior_with_cubic(2), 3);
  auto Q = make_problem(B, {}, single(B, 3, {{Vec{1}}}));
  auto res = search_witness(B, Q, Variant::triangulated, opt);
  EXPECT_FALSE(res.witness.has_value());
  EXPECT_NE(res.certificate().find("inner dimensions <= 2"), std::string::npos);
}

TEST(SearchWitness, BudgetIsEnforced) {
  auto A = pad(exterior2(3), 3);
  auto P = make_problem(A, {single(A, 1, {{X}, {Y}})}, single(A, 2, {{Vec{1}, Vec{0}}}));
  SearchOptions opt;
  opt.max_steps = 1;
  EXPECT_THROW(search_witness(A, P, Variant::triangulated, opt), BudgetExceeded);
}

TEST(CanonicalWitness, ConvertsToTriangulated) {
  auto A = pad(exterior2(2), 3);
  auto P = make_problem(A, {single(A, 1, {{X}}), single(A, 1, {{X}})}, single(A, 2, {{Vec{1}}}));
  auto W = canonical_witness(A, P);
  ASSERT_TRUE(W.has_value());
  EXPECT_TRUE(verify_witness(A, P, *W).holds);
  auto T = triangulated_from_canonical(A, P, *W);
  auto chk = verify_witness(A, P, T);
  EXPECT_TRUE(chk.holds) << chk.failed;
}

TEST(MatrixCheck, TruncatedRingsAreKoszul) {
  for (Residue m : {2, 3}) {
    auto v = matrix_koszulity_check(truncated_two(m, 5), 2, 3, 2);
    EXPECT_EQ(v.to_string(), "koszul-up-to-5") << m;
    EXPECT_EQ(v.method, homcheck::Method::matrix);
  }
  EXPECT_EQ(matrix_koszulity_check(dual_numbers(2, 5), 2, 3, 2).to_string(), "koszul-up-to-5");
}

TEST(MatrixCheck, ExteriorAndSymmetricAreKoszul) {
  EXPECT_TRUE(matrix_koszulity_check(pad(exterior2(2), 5), 2, 3, 2).koszul);
  EXPECT_TRUE(matrix_koszulity_check(pad(exterior2(3), 5), 2, 3, 2).koszul);
  EXPECT_TRUE(matrix_koszulity_check(symmetric2(2, 5), 2, 3, 2).koszul);
}

TEST(MatrixCheck, NegativeControlFailsWithTheOffendingProblem) {
  auto A = pad(exterior_with_cubic(2), 5);
  auto rep = matrix_check(A, {2, 3, 2});
  EXPECT_EQ(rep.verdict.to_string(), "failed-at(1,3)");
  ASSERT_TRUE(rep.offending.has_value());
  EXPECT_EQ(rep.offending->m(), 0u);
  EXPECT_EQ(rep.offending->n(), 3);
  ASSERT_TRUE(rep.certificate.has_value());
  EXPECT_FALSE(rep.certificate->witness.has_value());
  ASSERT_TRUE(rep.verdict.failure.has_value());
  EXPECT_FALSE(rep.verdict.failure->witness.is_zero());
  // The same homology class the bar method reports.
  auto bar = homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 5);
  EXPECT_EQ(bar.failure->witness, rep.verdict.failure->witness);
  EXPECT_EQ(bar.failure->cycles, rep.verdict.failure->cycles);
}

TEST(MatrixCheck, SeveralObjects) {
  auto A = arrow_ring(4);
  ASSERT_TRUE(validate(A).empty());
  EXPECT_EQ(matrix_koszulity_check(A, 2, 2, 2).to_string(), "koszul-up-to-4");
  EXPECT_TRUE(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 4).koszul);
}

TEST(MatrixCheck, CompositeModulus) {
  EXPECT_TRUE(matrix_koszulity_check(polynomial1(4, 4), 2, 2, 2).koszul);
  EXPECT_TRUE(matrix_koszulity_check(dual_numbers(4, 4), 2, 2, 2).koszul);
  EXPECT_FALSE(matrix_koszulity_check(pad(exterior_with_cubic(4), 4), 2, 3, 2).koszul);
}

TEST(MatrixCheck, BudgetGivesInconclusive) {
  MatrixOptions opt;
  opt.max_steps = 20;
  auto v = matrix_check(symmetric2(2, 4), {2, 2, 2}, opt).verdict;
  EXPECT_TRUE(v.inconclusive);
  EXPECT_EQ(v.to_string(), "inconclusive-up-to-4");
}

TEST(MatrixCheck, AgreesWithBarOnRandomQuadraticRings) {
  std::mt19937_64 rng(2024);
  int tested = 0, non_koszul = 0, koszul = 0;
  while (tested < 6) {
    auto P = random_presentation(rng, 3, 2 + rng() % 4);
    auto A = quadra::quadratic_closure(P, 4);
    if (A.component(3, 0, 0).rank() > 9) continue;
    ++tested;
    auto bar = homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 4);
    auto rep = matrix_check(A, {2, 2, 2});
    ASSERT_FALSE(rep.verdict.inconclusive) << tested;
    EXPECT_EQ(rep.verdict.koszul, bar.koszul) << tested;
    if (!bar.koszul) {
      ASSERT_TRUE(rep.verdict.failure.has_value());
      EXPECT_EQ(rep.verdict.failure->i, bar.failure->i) << tested;
      EXPECT_EQ(rep.verdict.failure->n, bar.failure->n) << tested;
      // The offending problem has no witness of either form.
      ASSERT_TRUE(rep.certificate.has_value());
      EXPECT_FALSE(rep.certificate->witness.has_value());
      EXPECT_FALSE(search_witness(A, *rep.offending, Variant::triangulated).witness.has_value()) << tested;
    }
    (bar.koszul ? koszul : non_koszul) += 1;
  }
  EXPECT_GT(non_koszul, 0);
  // Koszul references: symmetric and exterior algebras.
  for (const auto& A : {symmetric2(2, 4), pad(exterior2(2), 4)}) {
    EXPECT_TRUE(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 4).koszul);
    EXPECT_TRUE(matrix_koszulity_check(A, 2, 2, 2).koszul);
  }
}

TEST(MatrixCheck, VariantsAgree) {
  std::vector<BigGradedRing> rings{pad(exterior2(2), 4), truncated_two(2, 4), pad(exterior_with_cubic(2), 4)};
  std::mt19937_64 rng(99);
  while (rings.size() < 6) {
    auto A = quadra::quadratic_closure(random_presentation(rng, 3, 4 + rng() % 2), 4);
    if (A.component(3, 0, 0).rank() <= 4) rings.push_back(A);
  }
  for (std::size_t r = 0; r < rings.size(); ++r) {
    MatrixOptions tri;
    tri.variant = Variant::triangulated;
    auto g = matrix_check(rings[r], {2, 2, 2});
    auto t = matrix_check(rings[r], {2, 2, 2}, tri);
    ASSERT_FALSE(t.verdict.inconclusive) << r;
    EXPECT_EQ(g.verdict.to_string(), t.verdict.to_string()) << r;
  }
}
