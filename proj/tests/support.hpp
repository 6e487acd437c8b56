#pragma once

// Hand-built rings for tests, independent of the corpus builders.

#include <functional>
#include <memory>
#include <random>

#include "koszul/quadra.hpp"

namespace testing_support {

using koszul::bigring::BigGradedRing;
using koszul::bigring::ObjectSet;
using koszul::exactla::FinModule;
using koszul::exactla::ModMatrix;
using koszul::exactla::Residue;
using koszul::exactla::Vec;

// Bimodule over a one-object base with component M and both actions given by
// the scalar images of the base generators (a list of scalars, one per generator).
inline koszul::bigring::Bimodule scalar_bimodule(const koszul::bigring::RingPtr& base, const FinModule& M,
                                                 const Vec& left_scalars, const Vec& right_scalars) {
  koszul::bigring::Bimodule K(base, base);
  K.set_component(0, 0, M);
  const std::size_t b = base->component(0, 0, 0).rank();
  ModMatrix L(M.rank(), b * M.rank()), R(M.rank(), M.rank() * b);
  for (std::size_t u = 0; u < b; ++u)
    for (std::size_t i = 0; i < M.rank(); ++i) {
      L(i, u * M.rank() + i) = left_scalars[u];
      R(i, i * b + u) = right_scalars[u];
    }
  K.set_left(0, 0, 0, L);
  K.set_right(0, 0, 0, R);
  return K;
}

/// One-object ring with free components of the given ranks; `product(p, i, q, j)`
/// returns the coordinates of e_i * f_j in degree p + q.
inline BigGradedRing one_object_ring(Residue m, const std::vector<std::size_t>& ranks,
                                     const std::function<Vec(int, std::size_t, int, std::size_t)>& product) {
  const int d = static_cast<int>(ranks.size()) - 1;
  BigGradedRing A(ObjectSet::single(), m, d);
  for (int n = 0; n <= d; ++n) A.set_component(n, 0, 0, FinModule::free(m, ranks[n]));
  Vec unit(ranks[0], 0);
  unit[0] = 1;
  A.set_unit(0, unit);
  for (int p = 0; p <= d; ++p)
    for (int q = 0; p + q <= d; ++q) {
      ModMatrix tb(ranks[p + q], ranks[p] * ranks[q]);
      for (std::size_t i = 0; i < ranks[p]; ++i)
        for (std::size_t j = 0; j < ranks[q]; ++j) {
          Vec c = product(p, i, q, j);
          for (std::size_t r = 0; r < c.size(); ++r) tb(r, i * ranks[q] + j) = c[r];
        }
      A.set_mult(p, q, 0, 0, 0, tb);
    }
  return A;
}

/// Λ(x, y) over Z/m: basis 1 | x, y | xy.
inline BigGradedRing exterior2(Residue m) {
  return one_object_ring(m, {1, 2, 1}, [m](int p, std::size_t i, int q, std::size_t j) -> Vec {
    if (p == 0) return q == 0 ? Vec{1} : (q == 1 ? (j == 0 ? Vec{1, 0} : Vec{0, 1}) : Vec{1});
    if (q == 0) return p == 1 ? (i == 0 ? Vec{1, 0} : Vec{0, 1}) : Vec{1};
    if (i == j) return Vec{0};
    return i == 0 ? Vec{1} : Vec{m - 1};
  });
}

/// k[x]/(x^2) with deg x = 1, truncated at degree d (components vanish above 1).
inline BigGradedRing dual_numbers(Residue m, int d) {
  std::vector<std::size_t> ranks(d + 1, 0);
  ranks[0] = 1;
  if (d >= 1) ranks[1] = 1;
  return one_object_ring(m, ranks, [](int p, std::size_t, int q, std::size_t) -> Vec {
    if (p + q >= 2) return Vec{};
    return Vec{1};
  });
}

/// Free ring on one generator: k[x] truncated at d.
inline BigGradedRing polynomial1(Residue m, int d) {
  return one_object_ring(m, std::vector<std::size_t>(d + 1, 1),
                         [](int, std::size_t, int, std::size_t) -> Vec { return Vec{1}; });
}

/// Z/2[e]/(e^2) in degree zero (basis 1, e).
inline BigGradedRing dual_number_base() {
  return one_object_ring(2, {2}, [](int, std::size_t i, int, std::size_t j) -> Vec {
    if (i == 0) return j == 0 ? Vec{1, 0} : Vec{0, 1};
    return j == 0 ? Vec{0, 1} : Vec{0, 0};
  });
}

/// k[x, y] truncated at d; degree n basis x^a y^(n-a) indexed by a.
inline BigGradedRing symmetric2(Residue m, int d) {
  std::vector<std::size_t> ranks;
  for (int n = 0; n <= d; ++n) ranks.push_back(static_cast<std::size_t>(n + 1));
  return one_object_ring(m, ranks, [](int p, std::size_t i, int q, std::size_t j) {
    Vec v(static_cast<std::size_t>(p + q + 1), 0);
    v[i + j] = 1;
    return v;
  });
}

/// Λ(x) with an extra generator z in degree 3 (all products into degree ≥ 2 vanish).
inline BigGradedRing exterior_with_cubic(Residue m) {
  return one_object_ring(m, {1, 1, 0, 1}, [](int p, std::size_t, int q, std::size_t) -> Vec {
    if (p == 0 || q == 0) return Vec{1};
    return Vec(p + q == 3 ? 1 : 0, 0);
  });
}

/// Z/2[e, x]/(e^2, x^2), deg e = 0, deg x = 1: A_0 = <1, e>, A_1 = <x, ex>.
inline BigGradedRing dual_numbers_over_dual_numbers() {
  return one_object_ring(2, {2, 2}, [](int, std::size_t i, int, std::size_t j) -> Vec {
    if (i == 1 && j == 1) return Vec{0, 0};
    return (i == 1 || j == 1) ? Vec{0, 1} : Vec{1, 0};
  });
}

/// The same ring with zero components added up to degree d.
inline BigGradedRing pad(const BigGradedRing& A, int d) {
  BigGradedRing B(A.objects(), A.modulus(), d);
  const std::size_t k = A.object_count();
  for (int n = 0; n <= std::min(d, A.max_degree()); ++n)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) B.set_component(n, s, t, A.component(n, s, t));
  for (std::size_t s = 0; s < k; ++s) B.set_unit(s, A.unit(s));
  for (const auto& [key, tb] : A.tables())
    if (key.p + key.q <= d) B.set_mult(key.p, key.q, key.s, key.t, key.r, tb);
  return B;
}

/// Z/p as a one-object base.
inline koszul::bigring::RingPtr field(Residue p) {
  return std::make_shared<const koszul::bigring::BigRing>(koszul::bigring::diagonal_base(ObjectSet::single(), p));
}

// Random quadratic presentation on g generators over Z/2 with r random relations.
inline koszul::quadra::QuadraticPresentation random_presentation(std::mt19937_64& rng, std::size_t g, std::size_t r) {
  auto R = field(2);
  auto A1 = scalar_bimodule(R, FinModule::free(2, g), {1}, {1});
  ModMatrix I(g * g, r);
  for (std::size_t i = 0; i < g * g; ++i)
    for (std::size_t j = 0; j < r; ++j) I(i, j) = static_cast<Residue>(rng() % 2);
  return koszul::quadra::make_presentation(R, A1, {I});
}

}  // namespace testing_support
