#include <gtest/gtest.h>

#include <random>
#include <set>

#include "koszul/exactla.hpp"

using namespace koszul;
using namespace koszul::exactla;

namespace {

IntMatrix int_matrix(const std::vector<std::vector<long>>& rows) {
  std::vector<std::vector<Integer>> r;
  for (const auto& row : rows) r.emplace_back(row.begin(), row.end());
  return IntMatrix::from_rows(r);
}

// Determinant by cofactor expansion (small matrices only).
Integer det(const IntMatrix& M) {
  const std::size_t n = M.rows();
  if (n == 1) return M(0, 0);
  Integer out = 0;
  for (std::size_t c = 0; c < n; ++c) {
    IntMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, jj = 0; j < n; ++j)
        if (j != c) minor(i - 1, jj++) = M(i, j);
    Integer term = M(0, c) * det(minor);
    out += (c % 2 == 0) ? term : Integer(-term);
  }
  return out;
}

// |{x in Q : d x = 0}| for Q = (Z/m)^rows / <columns>, by enumeration.
long killed_count_bruteforce(const IntMatrix& M, long m, long d) {
  const std::size_t rows = M.rows();
  long total = 1;
  for (std::size_t i = 0; i < rows; ++i) total *= m;
  auto decode = [&](long c) {
    std::vector<long> v(rows);
    for (std::size_t i = 0; i < rows; ++i) v[i] = c % m, c /= m;
    return v;
  };
  auto encode = [&](const std::vector<long>& v) {
    long c = 0;
    for (std::size_t i = rows; i-- > 0;) c = c * m + ((v[i] % m) + m) % m;
    return c;
  };
  // Subgroup H generated by the columns.
  std::set<long> H{0};
  std::vector<long> frontier{0};
  while (!frontier.empty()) {
    std::vector<long> next;
    for (long h : frontier)
      for (std::size_t c = 0; c < M.cols(); ++c) {
        auto v = decode(h);
        for (std::size_t i = 0; i < rows; ++i) v[i] += static_cast<long>(M(i, c) % m);
        long e = encode(v);
        if (H.insert(e).second) next.push_back(e);
      }
    frontier = std::move(next);
  }
  long count = 0;
  for (long x = 0; x < total; ++x) {
    auto v = decode(x);
    for (auto& a : v) a *= d;
    if (H.count(encode(v))) ++count;
  }
  return count / static_cast<long>(H.size());
}

long killed_count(const FinModule& Q, long d) {
  long out = 1;
  for (auto f : Q.factors()) out *= std::gcd(static_cast<long>(f), d);
  return out;
}

}  // namespace

TEST(SmithNormalForm, Identity) {
  auto snf = smith_normal_form(IntMatrix::identity(3));
  EXPECT_EQ(snf.D, IntMatrix::identity(3));
}

TEST(SmithNormalForm, TwoByTwoMatchesGcdAndDeterminant) {
  IntMatrix M = int_matrix({{2, 4}, {6, 8}});
  auto snf = smith_normal_form(M);
  // d1 = gcd of entries, d1*d2 = |det|
  Integer g = 0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) g = boost::multiprecision::gcd(g, M(i, j));
  Integer d = det(M);
  if (d < 0) d = -d;
  EXPECT_EQ(snf.D(0, 0), g);
  EXPECT_EQ(snf.D(0, 0) * snf.D(1, 1), d);
  EXPECT_EQ(snf.D(0, 0), 2);
  EXPECT_EQ(snf.D(1, 1), 4);
  EXPECT_EQ(snf.U * M * snf.V, snf.D);
}

TEST(SmithNormalForm, Zero) {
  auto snf = smith_normal_form(IntMatrix(2, 2));
  EXPECT_EQ(snf.D, IntMatrix(2, 2));
}

TEST(SmithNormalForm, RandomReconstructionAndUnimodularity) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    IntMatrix M(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) M(i, j) = static_cast<long>(rng() % 41) - 20;
    auto snf = smith_normal_form(M);
    ASSERT_EQ(snf.U * M * snf.V, snf.D);
    Integer du = det(snf.U), dv = det(snf.V);
    ASSERT_TRUE(du == 1 || du == -1);
    ASSERT_TRUE(dv == 1 || dv == -1);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (i != j) {
          ASSERT_EQ(snf.D(i, j), 0);
        }
    Integer prev = 1;
    for (std::size_t i = 0; i < std::min(r, c); ++i) {
      ASSERT_GE(snf.D(i, i), 0);
      if (snf.D(i, i) != 0) {
        ASSERT_EQ(snf.D(i, i) % prev, 0);
        prev = snf.D(i, i);
      } else {
        prev = 0;
      }
    }
  }
}

TEST(SmithNormalForm, LargeEntriesDoNotOverflow) {
  IntMatrix M = int_matrix({{1000000007, 998244353}, {1000000009, 1000000021}});
  M(0, 0) *= Integer("123456789123456789");
  auto snf = smith_normal_form(M);
  EXPECT_EQ(snf.U * M * snf.V, snf.D);
}

TEST(CokernelModM, Examples) {
  EXPECT_EQ(cokernel_mod_m(IntMatrix(2, 0), 4).factors(), (std::vector<Residue>{4, 4}));
  EXPECT_EQ(cokernel_mod_m(int_matrix({{2}}), 4).to_string(), "Z/2");
  EXPECT_TRUE(cokernel_mod_m(int_matrix({{1}}), 4).is_zero());
}

TEST(CokernelModM, AgreesWithEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    long m = 2 + static_cast<long>(rng() % 8);
    std::size_t rows = 1 + rng() % 2, cols = rng() % 3;
    IntMatrix M(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) M(i, j) = static_cast<long>(rng() % 19) - 9;
    FinModule Q = cokernel_mod_m(M, m);
    for (long d = 1; d <= m; ++d)
      if (m % d == 0) {
        ASSERT_EQ(killed_count(Q, d), killed_count_bruteforce(M, m, d)) << "m=" << m << " " << M;
      }
  }
}

TEST(CokernelModM, InvariantUnderShuffles) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    long m = 12;
    IntMatrix M(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) M(i, j) = static_cast<long>(rng() % 12);
    IntMatrix S = M;
    S.swap_rows(0, 2);
    S.swap_cols(1, 2);
    EXPECT_EQ(cokernel_mod_m(M, m), cokernel_mod_m(S, m));
  }
}

TEST(FinModule, CanonicalForm) {
  EXPECT_EQ(FinModule::from_orders(12, {2, 3}).factors(), (std::vector<Residue>{6}));
  EXPECT_EQ(FinModule::from_orders(12, {4, 6}).factors(), (std::vector<Residue>{2, 12}));
  EXPECT_EQ(FinModule::from_orders(4, {1, 8}).factors(), (std::vector<Residue>{4}));
  EXPECT_EQ(FinModule::from_orders(4, {2, 2, 4}).to_string(), "(Z/2)^2 + Z/4");
  EXPECT_EQ(FinModule::zero(5).to_string(), "0");
  EXPECT_THROW(FinModule::from_chain(4, {4, 2}), InvalidInput);
}

TEST(SmithMod, ReconstructionOverZmodM) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Residue m = 2 + static_cast<Residue>(rng() % 30);
    std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
    ModMatrix A(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) A(i, j) = static_cast<Residue>(rng() % m);
    auto s = smith_mod(A, m);
    ModMatrix D = mul_mod(mul_mod(s.P, A, m), s.Q, m);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ASSERT_EQ(D(i, j), i == j ? s.diag[i] : 0);
    ASSERT_EQ(mul_mod(s.P, s.Pinv, m), ModMatrix::identity(r));
    for (std::size_t i = 1; i < s.ideal.size(); ++i) ASSERT_EQ(s.ideal[i] % s.ideal[i - 1], 0);
    // Same module as the big-integer computation.
    IntMatrix Z(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) Z(i, j) = A(i, j);
    std::vector<Residue> orders;
    for (std::size_t i = 0; i < r; ++i) orders.push_back(i < s.ideal.size() ? s.ideal[i] : m);
    ASSERT_EQ(FinModule::from_orders(m, orders), cokernel_mod_m(Z, m));
  }
}

TEST(Homology, Examples) {
  BoundedComplex single{4, 0, {FinModule::free(4, 1)}, {}};
  EXPECT_EQ(homology_at(single, 0).module().to_string(), "Z/4");
  EXPECT_TRUE(homology_at(single, 5).module().is_zero());

  BoundedComplex iso{2, 0, {FinModule::free(2, 1), FinModule::free(2, 1)}, {ModMatrix::from_rows({{1}})}};
  EXPECT_TRUE(homology_at(iso, 0).module().is_zero());
  EXPECT_TRUE(homology_at(iso, 1).module().is_zero());

  BoundedComplex twice{4, 0, {FinModule::free(4, 1), FinModule::free(4, 1)}, {ModMatrix::from_rows({{2}})}};
  EXPECT_EQ(twice.check(), "");
  EXPECT_EQ(homology_at(twice, 1).module().to_string(), "Z/2");
  EXPECT_EQ(homology_at(twice, 0).module().to_string(), "Z/2");
}

TEST(Homology, EnumerationOracleOverZ4) {
  // Every multiplication map on Z/4: compare with kernel and image sizes found by enumeration.
  const Residue m = 4;
  for (Residue a = 0; a < m; ++a) {
    BoundedComplex C{m, 0, {FinModule::free(m, 1), FinModule::free(m, 1)}, {ModMatrix::from_rows({{a}})}};
    std::set<Residue> image;
    for (Residue x = 0; x < m; ++x) image.insert(a * x % m);
    std::size_t kernel = 0;
    for (Residue x = 0; x < m; ++x) kernel += (a * x % m == 0);
    EXPECT_EQ(homology_at(C, 1).module().cardinality(), m / static_cast<Residue>(image.size()));
    EXPECT_EQ(homology_at(C, 0).module().cardinality(), static_cast<Residue>(kernel));
  }
}

TEST(Homology, SplitExactComplexesAreAcyclic) {
  // 0 -> F^a -> F^{a+b} -> F^b -> 0 twisted by random invertible changes of basis.
  std::mt19937_64 rng(17);
  auto random_invertible = [&](std::size_t n, Residue m) {
    ModMatrix g = ModMatrix::identity(n);
    for (int k = 0; k < 10; ++k) {
      std::size_t i = rng() % n, j = rng() % n;
      if (i == j) continue;
      Residue c = static_cast<Residue>(rng() % m);
      for (std::size_t col = 0; col < n; ++col) g(i, col) = mod(g(i, col) + c * g(j, col), m);
    }
    return g;
  };
  for (int trial = 0; trial < 200; ++trial) {
    Residue m = 2 + static_cast<Residue>(rng() % 10);
    std::size_t a = 1 + rng() % 3, b = 1 + rng() % 3;
    ModMatrix inc(a + b, a), proj(b, a + b);
    for (std::size_t i = 0; i < a; ++i) inc(i, i) = 1;
    for (std::size_t i = 0; i < b; ++i) proj(i, a + i) = 1;
    ModMatrix g = random_invertible(a + b, m);
    auto s = smith_mod(g, m);
    // g^{-1} = Q P (g is invertible so D is a unit diagonal; rescale)
    ModMatrix D(a + b, a + b);
    for (std::size_t i = 0; i < a + b; ++i) D(i, i) = inverse_mod(s.diag[i], m);
    ModMatrix ginv = mul_mod(mul_mod(s.Q, D, m), s.P, m);
    ASSERT_EQ(mul_mod(g, ginv, m), ModMatrix::identity(a + b));
    BoundedComplex C{m, -1, {FinModule::free(m, a), FinModule::free(m, a + b), FinModule::free(m, b)},
                     {mul_mod(g, inc, m), mul_mod(proj, ginv, m)}};
    ASSERT_EQ(C.check(), "");
    for (int k = -1; k <= 1; ++k) ASSERT_TRUE(homology_at(C, k).module().is_zero());
  }
}

TEST(Homology, LiftsCyclesToHomologyCoordinates) {
  // 0 -> Z/4 --(2)--> Z/4 -> 0 at position 1: homology Z/2 generated by the class of 1.
  BoundedComplex C{4, 0, {FinModule::free(4, 1), FinModule::free(4, 1)}, {ModMatrix::from_rows({{2}})}};
  auto H = homology_at(C, 1);
  EXPECT_EQ(H.lift({1}), Vec{1});
  EXPECT_EQ(H.lift({2}), Vec{0});
  EXPECT_EQ(H.lift({3}), Vec{1});
}

TEST(SolveLinear, Examples) {
  FinModule Z4 = FinModule::free(4, 1);
  ModuleMap id = ModuleMap::identity(Z4);
  EXPECT_EQ(*solve_linear(id, {3}), Vec{3});
  ModuleMap twice{Z4, Z4, ModMatrix::from_rows({{2}})};
  auto x = solve_linear(twice, {2});
  ASSERT_TRUE(x.has_value());
  EXPECT_EQ(twice.apply(*x), Vec{2});
  EXPECT_FALSE(solve_linear(twice, {1}).has_value());
}

TEST(SolveLinear, AgreesWithEnumeration) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    Residue m = 2 + static_cast<Residue>(rng() % 7);
    std::size_t r = 1 + rng() % 2, c = 1 + rng() % 2;
    ModMatrix A(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) A(i, j) = static_cast<Residue>(rng() % m);
    Vec b(r);
    for (auto& x : b) x = static_cast<Residue>(rng() % m);
    bool exists = false;
    Residue total = 1;
    for (std::size_t j = 0; j < c; ++j) total *= m;
    for (Residue code = 0; code < total && !exists; ++code) {
      Vec x(c);
      Residue t = code;
      for (auto& xi : x) xi = t % m, t /= m;
      exists = apply_mod(A, x, m) == b;
    }
    ModuleMap f{FinModule::free(m, c), FinModule::free(m, r), A};
    auto sol = solve_linear(f, b);
    ASSERT_EQ(sol.has_value(), exists);
    if (sol) {
      ASSERT_EQ(f.apply(*sol), b);
    }
  }
}

TEST(Subquotient, CoordinatesAreConsistent) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    Residue m = 2 + static_cast<Residue>(rng() % 10);
    std::size_t n = 1 + rng() % 4, s = 1 + rng() % 4, t = rng() % 3;
    ModMatrix S(n, s), Tgen(s, t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < s; ++j) S(i, j) = static_cast<Residue>(rng() % m);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < t; ++j) Tgen(i, j) = static_cast<Residue>(rng() % m);
    ModMatrix T = mul_mod(S, Tgen, m);  // T inside S
    Subquotient Q(S, T, m);
    // Generators map to unit coordinates; T maps to zero.
    for (std::size_t g = 0; g < Q.module().rank(); ++g) {
      Vec e(Q.module().rank(), 0);
      e[g] = 1;
      ASSERT_EQ(Q.coordinates(Q.generator(g)), e);
    }
    for (std::size_t j = 0; j < t; ++j) ASSERT_TRUE(is_zero(Q.coordinates(T.column(j))));
    // Cardinality agrees with |S| / |T| by enumeration of S.
    std::set<Vec> Sset;
    Residue total = 1;
    for (std::size_t j = 0; j < s; ++j) total *= m;
    for (Residue code = 0; code < total; ++code) {
      Vec x(s);
      Residue c = code;
      for (auto& xi : x) xi = c % m, c /= m;
      Sset.insert(apply_mod(S, x, m));
    }
    std::set<Vec> Tspan{Vec(n, 0)};
    for (bool grew = true; grew;) {
      grew = false;
      for (auto v : std::vector<Vec>(Tspan.begin(), Tspan.end()))
        for (std::size_t j = 0; j < t; ++j) {
          Vec w = v;
          for (std::size_t i = 0; i < n; ++i) w[i] = (w[i] + T(i, j)) % m;
          grew |= Tspan.insert(w).second;
        }
    }
    ASSERT_EQ(Q.module().cardinality(), static_cast<long>(Sset.size() / Tspan.size()));
  }
}
