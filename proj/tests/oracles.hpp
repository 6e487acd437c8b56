#pragma once

// Brute-force references for Ext computations, independent of filtcat's cochain machinery.

#include <functional>
#include <numeric>
#include <set>

#include "koszul/filtcat.hpp"

namespace oracles {

using koszul::exactla::ModMatrix;
using koszul::exactla::Residue;
using koszul::filtcat::FilteredGModule;

inline ModMatrix pow_mod(const ModMatrix& A, std::size_t e, Residue m) {
  ModMatrix out = ModMatrix::identity(A.rows());
  for (std::size_t i = 0; i < e; ++i) out = koszul::exactla::mul_mod(out, A, m);
  return out;
}

/// Extensions of X by Y over a cyclic group, counted by brute force: all
/// generator actions [[ρY, C], [0, ρX]] with C on strict slots and ρ^n = 1, up
/// to conjugation by [[1, b], [0, 1]] with b filtered.
inline std::size_t enumerate_extensions(const FilteredGModule& X, const FilteredGModule& Y) {
  const Residue m = X.modulus();
  const std::size_t n = X.group().order();
  std::vector<std::pair<std::size_t, std::size_t>> strict, filtered;
  for (std::size_t r = 0; r < Y.dim(); ++r)
    for (std::size_t c = 0; c < X.dim(); ++c) {
      if (Y.level(r) > X.level(c)) strict.emplace_back(r, c);
      if (Y.level(r) >= X.level(c)) filtered.emplace_back(r, c);
    }
  const ModMatrix rx = n > 1 ? X.generator_action()[0] : ModMatrix::identity(X.dim());
  const ModMatrix ry = n > 1 ? Y.generator_action()[0] : ModMatrix::identity(Y.dim());
  auto decode = [&](std::size_t code, const auto& slots) {
    ModMatrix M(Y.dim(), X.dim());
    for (const auto& [r, c] : slots) {
      M(r, c) = static_cast<Residue>(code % m);
      code /= m;
    }
    return M;
  };
  auto encode = [&](const ModMatrix& M) {
    std::size_t code = 0;
    for (std::size_t k = strict.size(); k-- > 0;) code = code * m + M(strict[k].first, strict[k].second);
    return code;
  };
  std::size_t total = 1, moves = 1;
  for (std::size_t k = 0; k < strict.size(); ++k) total *= m;
  for (std::size_t k = 0; k < filtered.size(); ++k) moves *= m;
  std::vector<bool> valid(total, false);
  for (std::size_t code = 0; code < total; ++code) {
    ModMatrix C = decode(code, strict);
    ModMatrix E(Y.dim() + X.dim(), Y.dim() + X.dim());
    for (std::size_t r = 0; r < Y.dim(); ++r)
      for (std::size_t c = 0; c < Y.dim(); ++c) E(r, c) = ry(r, c);
    for (std::size_t r = 0; r < X.dim(); ++r)
      for (std::size_t c = 0; c < X.dim(); ++c) E(Y.dim() + r, Y.dim() + c) = rx(r, c);
    for (std::size_t r = 0; r < Y.dim(); ++r)
      for (std::size_t c = 0; c < X.dim(); ++c) E(r, Y.dim() + c) = C(r, c);
    if (n == 1)
      valid[code] = C == ModMatrix(Y.dim(), X.dim());
    else
      valid[code] = pow_mod(E, n, m) == ModMatrix::identity(E.rows());
  }
  std::vector<std::size_t> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t code = 0; code < total; ++code) {
    if (!valid[code]) continue;
    ModMatrix C = decode(code, strict);
    for (std::size_t mv = 0; mv < moves; ++mv) {
      ModMatrix b = decode(mv, filtered);
      // The new generator action has corner C + ρY b - b ρX; it must stay strict.
      ModMatrix D = koszul::exactla::mul_mod(ry, b, m);
      ModMatrix bx = koszul::exactla::mul_mod(b, rx, m);
      bool ok = true;
      for (std::size_t r = 0; r < Y.dim(); ++r)
        for (std::size_t c = 0; c < X.dim(); ++c) {
          D(r, c) = koszul::exactla::mod(C(r, c) + D(r, c) - bx(r, c), m);
          if (Y.level(r) <= X.level(c) && D(r, c)) ok = false;
        }
      if (ok) parent[find(encode(D))] = find(code);
    }
  }
  std::set<std::size_t> classes;
  for (std::size_t code = 0; code < total; ++code)
    if (valid[code]) classes.insert(find(code));
  return classes.size();
}

/// Filtered equivariant maps X -> Y over a cyclic group, counted by brute force.
inline std::size_t enumerate_homs(const FilteredGModule& X, const FilteredGModule& Y) {
  const Residue m = X.modulus();
  std::vector<std::pair<std::size_t, std::size_t>> filtered;
  for (std::size_t r = 0; r < Y.dim(); ++r)
    for (std::size_t c = 0; c < X.dim(); ++c)
      if (Y.level(r) >= X.level(c)) filtered.emplace_back(r, c);
  std::size_t total = 1;
  for (std::size_t k = 0; k < filtered.size(); ++k) total *= m;
  std::size_t count = 0;
  for (std::size_t code = 0; code < total; ++code) {
    ModMatrix M(Y.dim(), X.dim());
    std::size_t rest = code;
    for (const auto& [r, c] : filtered) {
      M(r, c) = static_cast<Residue>(rest % m);
      rest /= m;
    }
    bool ok = true;
    for (std::size_t g = 0; ok && g < X.generator_action().size(); ++g)
      ok = koszul::exactla::mul_mod(Y.generator_action()[g], M, m) ==
           koszul::exactla::mul_mod(M, X.generator_action()[g], m);
    count += ok;
  }
  return count;
}

/// H^1(Z/n, Z/m with generator acting by a) from the periodic resolution of Z/n:
/// ker(N) / im(a - 1), both found by enumeration.
inline std::size_t h1_cyclic(std::size_t n, Residue m, Residue a) {
  Residue norm = 0, pw = 1;
  for (std::size_t i = 0; i < n; ++i) {
    norm = (norm + pw) % m;
    pw = pw * a % m;
  }
  std::size_t ker = 0;
  std::set<Residue> im;
  for (Residue x = 0; x < m; ++x) {
    if (norm * x % m == 0) ++ker;
    im.insert(((a - 1 + m) % m) * x % m);
  }
  return ker / im.size();
}

}  // namespace oracles
