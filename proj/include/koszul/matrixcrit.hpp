#pragma once

// Σ-colored matrices over a big graded ring and the two matrix forms of the
// Koszul condition (general and triangulated): witness verification, bounded
// witness search, and a bounded sweep over chain problems.
//
// A row vector with label ρ over column labels (τ_1..τ_c) in degree d lives in
// the direct sum of the components A_{ρτ_j;d}; its coordinates are the
// concatenated canonical coordinates of the entries.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "koszul/homcheck.hpp"

namespace koszul::matrixcrit {

using bigring::BigGradedRing;
using exactla::FinModule;
using exactla::ModMatrix;
using exactla::ModuleMap;
using exactla::Residue;
using exactla::Vec;

struct ColoredMatrix {
  std::vector<std::size_t> row_labels;
  std::vector<std::size_t> col_labels;
  int degree = 0;
  std::vector<Vec> entries;  // row-major

  [[nodiscard]] std::size_t rows() const noexcept { return row_labels.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return col_labels.size(); }
  [[nodiscard]] const Vec& at(std::size_t i, std::size_t j) const { return entries.at(i * cols() + j); }
  [[nodiscard]] Vec& at(std::size_t i, std::size_t j) { return entries.at(i * cols() + j); }

  friend bool operator==(const ColoredMatrix&, const ColoredMatrix&) = default;
};

inline ColoredMatrix zero_matrix(const BigGradedRing& A, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                                 int degree) {
  ColoredMatrix M{std::move(rows), std::move(cols), degree, {}};
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < M.cols(); ++j)
      M.entries.push_back(A.component(degree, M.row_labels[i], M.col_labels[j]).zero_element());
  return M;
}

inline ColoredMatrix identity_matrix(const BigGradedRing& A, const std::vector<std::size_t>& labels) {
  ColoredMatrix M = zero_matrix(A, labels, labels, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) M.at(i, i) = A.unit(labels[i]);
  return M;
}

/// Checks labels, shape and that every entry lies in its component; reduces entries.
inline ColoredMatrix make_matrix(const BigGradedRing& A, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                                 int degree, std::vector<Vec> entries) {
  const std::size_t k = A.object_count();
  for (auto l : rows)
    if (l >= k) throw InvalidInput("row label out of range");
  for (auto l : cols)
    if (l >= k) throw InvalidInput("column label out of range");
  if (degree < 0) throw InvalidInput("negative matrix degree");
  if (entries.size() != rows.size() * cols.size()) throw InvalidInput("matrix entry count does not match its shape");
  ColoredMatrix M{std::move(rows), std::move(cols), degree, std::move(entries)};
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < M.cols(); ++j) {
      const auto& C = A.component(degree, M.row_labels[i], M.col_labels[j]);
      Vec& e = M.at(i, j);
      if (e.size() != C.rank())
        throw InvalidInput("entry (" + std::to_string(i) + "," + std::to_string(j) + ") does not lie in A_{" +
                           A.objects().name(M.row_labels[i]) + A.objects().name(M.col_labels[j]) + ";" +
                           std::to_string(degree) + "}");
      e = C.reduce(std::move(e));
    }
  return M;
}

inline bool is_zero(const ColoredMatrix& M) {
  return std::all_of(M.entries.begin(), M.entries.end(), [](const Vec& v) { return exactla::is_zero(v); });
}

/// The product MN; requires the columns of M and the rows of N to carry the same labels.
inline ColoredMatrix compose(const BigGradedRing& A, const ColoredMatrix& M, const ColoredMatrix& N) {
  if (M.col_labels != N.row_labels) throw InvalidInput("matrices are not composable");
  ColoredMatrix out = zero_matrix(A, M.row_labels, N.col_labels, M.degree + N.degree);
  const Residue m = A.modulus();
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < N.cols(); ++j) {
      Vec& e = out.at(i, j);
      for (std::size_t k = 0; k < M.cols(); ++k) {
        if (exactla::is_zero(M.at(i, k)) || exactla::is_zero(N.at(k, j))) continue;
        Vec t = A.multiply(M.degree, M.row_labels[i], M.col_labels[k], M.at(i, k), N.degree, N.col_labels[j],
                           N.at(k, j));
        for (std::size_t r = 0; r < e.size(); ++r) e[r] = (e[r] + t[r]) % m;
      }
      e = A.component(out.degree, out.row_labels[i], out.col_labels[j]).reduce(std::move(e));
    }
  return out;
}

inline std::string to_string(const BigGradedRing& A, const ColoredMatrix& M) {
  std::ostringstream os;
  auto labels = [&](const std::vector<std::size_t>& ls) {
    os << '(';
    for (std::size_t i = 0; i < ls.size(); ++i) os << (i ? "," : "") << A.objects().name(ls[i]);
    os << ')';
  };
  os << "deg " << M.degree << " rows ";
  labels(M.row_labels);
  os << " cols ";
  labels(M.col_labels);
  os << " [";
  for (std::size_t i = 0; i < M.rows(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < M.cols(); ++j) {
      os << (j ? " " : "") << '(';
      const Vec& e = M.at(i, j);
      for (std::size_t r = 0; r < e.size(); ++r) os << (r ? "," : "") << e[r];
      os << ')';
    }
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Chain problems and witnesses

struct ChainProblem {
  std::vector<ColoredMatrix> chain;  // M_(1), ..., M_(m), all of degree 1
  ColoredMatrix N;                   // degree n >= 1

  [[nodiscard]] std::size_t m() const noexcept { return chain.size(); }
  [[nodiscard]] int n() const noexcept { return N.degree; }
};

inline ChainProblem make_problem(const BigGradedRing& A, std::vector<ColoredMatrix> chain, ColoredMatrix N) {
  for (auto& M : chain) {
    M = make_matrix(A, M.row_labels, M.col_labels, M.degree, M.entries);
    if (M.degree != 1) throw InvalidInput("chain matrices must have degree 1");
  }
  N = make_matrix(A, N.row_labels, N.col_labels, N.degree, N.entries);
  if (N.degree < 1) throw InvalidInput("N must have degree at least 1");
  if (N.rows() == 0 || N.cols() == 0) throw InvalidInput("vacuous chain problem: N has no entries");
  const int top = N.degree + (chain.empty() ? 0 : 1);
  if (top > A.max_degree()) throw InvalidInput("ring truncated below the degrees the problem involves");
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    if (chain[i + 1].col_labels != chain[i].row_labels)
      throw InvalidInput("M(" + std::to_string(i + 2) + ") and M(" + std::to_string(i + 1) + ") are not composable");
    if (!is_zero(compose(A, chain[i + 1], chain[i])))
      throw InvalidInput("the product M(" + std::to_string(i + 2) + ") M(" + std::to_string(i + 1) + ") is nonzero");
  }
  if (!chain.empty()) {
    if (N.col_labels != chain.back().row_labels) throw InvalidInput("N and M(m) are not composable");
    if (!is_zero(compose(A, N, chain.back()))) throw InvalidInput("the product N M(m) is nonzero");
  }
  return ChainProblem{std::move(chain), std::move(N)};
}

enum class Variant { general, triangulated };

inline std::string variant_name(Variant v) { return v == Variant::general ? "general" : "triangulated"; }

/// General form: K(1..m) of degree 0, M'(1..m), P of degree 1, Q of degree n-1.
/// Triangulated form: L(0..m) and M'(1..m) of degree 1, Q of degree n-1.
struct FactorizationWitness {
  Variant variant = Variant::general;
  std::vector<ColoredMatrix> K;
  std::vector<ColoredMatrix> Mp;
  std::vector<ColoredMatrix> L;
  ColoredMatrix P;
  ColoredMatrix Q;
};

struct WitnessCheck {
  bool holds = true;
  std::string failed;  // first violated equation
};

namespace detail {

inline std::string idx(const char* name, std::size_t i) { return std::string(name) + "(" + std::to_string(i) + ")"; }

inline void expect_degree(const ColoredMatrix& M, int d, const std::string& name) {
  if (M.degree != d) throw InvalidInput(name + " must have degree " + std::to_string(d));
}

inline bool equal(const ColoredMatrix& a, const ColoredMatrix& b, const std::string& eq) {
  if (a.row_labels != b.row_labels || a.col_labels != b.col_labels)
    throw InvalidInput("shape inconsistency in " + eq);
  return a.entries == b.entries;
}

}  // namespace detail

inline WitnessCheck verify_witness(const BigGradedRing& A, const ChainProblem& P, const FactorizationWitness& W) {
  using detail::idx;
  const std::size_t m = P.m();
  const int n = P.n();
  auto mul = [&](const ColoredMatrix& x, const ColoredMatrix& y, const std::string& eq) {
    if (x.col_labels != y.row_labels) throw InvalidInput("shape inconsistency in " + eq);
    return compose(A, x, y);
  };
  std::vector<std::pair<std::string, std::function<bool()>>> eqs;
  if (W.Mp.size() != m) throw InvalidInput("witness has the wrong number of M' matrices");
  for (std::size_t i = 0; i < m; ++i) detail::expect_degree(W.Mp[i], 1, idx("M'", i + 1));
  detail::expect_degree(W.Q, n - 1, "Q");
  for (std::size_t i = 0; i + 1 < m; ++i) {
    std::string eq = idx("M'", i + 2) + " " + idx("M'", i + 1) + " = 0";
    eqs.emplace_back(eq, [&, i, eq] { return is_zero(mul(W.Mp[i + 1], W.Mp[i], eq)); });
  }
  if (W.variant == Variant::general) {
    if (W.K.size() != m) throw InvalidInput("witness has the wrong number of K matrices");
    for (std::size_t i = 0; i < m; ++i) detail::expect_degree(W.K[i], 0, idx("K", i + 1));
    detail::expect_degree(W.P, 1, "P");
    std::vector<std::pair<std::string, std::function<bool()>>> head;
    if (m > 0) {
      std::string eq = "M(1) = K(1) M'(1)";
      head.emplace_back(eq, [&, eq] { return detail::equal(P.chain[0], mul(W.K[0], W.Mp[0], eq), eq); });
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
      std::string eq = idx("M", i + 2) + " " + idx("K", i + 1) + " = " + idx("K", i + 2) + " " + idx("M'", i + 2);
      head.emplace_back(eq, [&, i, eq] {
        return detail::equal(mul(P.chain[i + 1], W.K[i], eq), mul(W.K[i + 1], W.Mp[i + 1], eq), eq);
      });
    }
    std::string eq = m > 0 ? "N " + idx("K", m) + " = Q P" : "N = Q P";
    head.emplace_back(eq, [&, eq] {
      return detail::equal(m > 0 ? mul(P.N, W.K[m - 1], eq) : P.N, mul(W.Q, W.P, eq), eq);
    });
    eqs.insert(eqs.begin(), head.begin(), head.end());
    if (m > 0) {
      std::string e2 = "P " + idx("M'", m) + " = 0";
      eqs.emplace_back(e2, [&, e2] { return is_zero(mul(W.P, W.Mp[m - 1], e2)); });
    }
  } else {
    if (W.L.size() != m + 1) throw InvalidInput("witness has the wrong number of L matrices");
    for (std::size_t i = 0; i <= m; ++i) detail::expect_degree(W.L[i], 1, idx("L", i));
    std::vector<std::pair<std::string, std::function<bool()>>> head;
    std::string eq = "N = Q " + idx("L", m);
    head.emplace_back(eq, [&, eq] { return detail::equal(P.N, mul(W.Q, W.L[m], eq), eq); });
    for (std::size_t i = m; i >= 1; --i) {
      std::string e = idx("L", i) + " " + idx("M", i) + " = " + idx("M'", i) + " " + idx("L", i - 1);
      head.emplace_back(e, [&, i, e] {
        return detail::equal(mul(W.L[i], P.chain[i - 1], e), mul(W.Mp[i - 1], W.L[i - 1], e), e);
      });
    }
    eqs.insert(eqs.begin(), head.begin(), head.end());
    if (m > 0) {
      std::string e2 = "Q " + idx("M'", m) + " = 0";
      eqs.emplace_back(e2, [&, e2] { return is_zero(mul(W.Q, W.Mp[m - 1], e2)); });
    }
  }
  for (auto& [name, test] : eqs)
    if (!test()) return {false, name};
  return {};
}

// ---------------------------------------------------------------------------
// Row spaces and the linear algebra behind the search

namespace detail {

struct RowSpace {
  std::vector<std::size_t> offsets;  // size cols + 1
  FinModule module;
};

inline RowSpace row_space(const BigGradedRing& A, std::size_t rho, const std::vector<std::size_t>& cols, int d) {
  RowSpace R;
  std::vector<Residue> orders;
  R.offsets.push_back(0);
  for (auto c : cols) {
    const auto& C = A.component(d, rho, c);
    orders.insert(orders.end(), C.factors().begin(), C.factors().end());
    R.offsets.push_back(orders.size());
  }
  R.module = FinModule::from_orders(A.modulus(), orders);
  return R;
}

inline Vec row_of(const ColoredMatrix& M, std::size_t i) {
  Vec out;
  for (std::size_t j = 0; j < M.cols(); ++j) out.insert(out.end(), M.at(i, j).begin(), M.at(i, j).end());
  return out;
}

inline std::vector<Vec> split_row(const RowSpace& R, const Vec& v) {
  std::vector<Vec> out;
  for (std::size_t j = 0; j + 1 < R.offsets.size(); ++j)
    out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(R.offsets[j]),
                     v.begin() + static_cast<std::ptrdiff_t>(R.offsets[j + 1]));
  return out;
}

/// r -> r B for rows r with label rho and degree d.
inline ModuleMap right_mult(const BigGradedRing& A, std::size_t rho, int d, const ColoredMatrix& B) {
  RowSpace S = row_space(A, rho, B.row_labels, d);
  RowSpace T = row_space(A, rho, B.col_labels, d + B.degree);
  ModMatrix X(T.module.rank(), S.module.rank());
  for (std::size_t j = 0; j < B.rows(); ++j) {
    const auto& Cj = A.component(d, rho, B.row_labels[j]);
    for (std::size_t g = 0; g < Cj.rank(); ++g) {
      Vec e(Cj.rank(), 0);
      e[g] = 1;
      for (std::size_t k = 0; k < B.cols(); ++k) {
        if (exactla::is_zero(B.at(j, k))) continue;
        Vec t = A.multiply(d, rho, B.row_labels[j], e, B.degree, B.col_labels[k], B.at(j, k));
        for (std::size_t r = 0; r < t.size(); ++r) X(T.offsets[k] + r, S.offsets[j] + g) = t[r];
      }
    }
  }
  return {S.module, T.module, std::move(X)};
}

/// Block map with rows of blocks; a missing block is zero.
inline ModuleMap block_map(const std::vector<FinModule>& sources, const std::vector<FinModule>& targets,
                           const std::vector<std::vector<std::optional<ModuleMap>>>& blocks, Residue m) {
  std::vector<Residue> so, to;
  std::vector<std::size_t> soff{0}, toff{0};
  for (const auto& S : sources) {
    so.insert(so.end(), S.factors().begin(), S.factors().end());
    soff.push_back(so.size());
  }
  for (const auto& T : targets) {
    to.insert(to.end(), T.factors().begin(), T.factors().end());
    toff.push_back(to.size());
  }
  ModMatrix X(to.size(), so.size());
  for (std::size_t a = 0; a < targets.size(); ++a)
    for (std::size_t b = 0; b < sources.size(); ++b) {
      if (!blocks[a][b]) continue;
      const ModMatrix& B = blocks[a][b]->matrix;
      for (std::size_t i = 0; i < B.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) X(toff[a] + i, soff[b] + j) = B(i, j);
    }
  return {FinModule::from_orders(m, so), FinModule::from_orders(m, to), std::move(X)};
}

inline ModuleMap negate(ModuleMap f) {
  const Residue m = f.target.modulus();
  for (std::size_t i = 0; i < f.matrix.rows(); ++i)
    for (auto& x : f.matrix.row(i)) x = exactla::mod(-x, m);
  return f;
}

/// Nonzero generators of ker f, reduced in the source.
inline std::vector<Vec> kernel_generators(const ModuleMap& f) {
  auto K = exactla::kernel_of(f);
  std::vector<Vec> out;
  for (std::size_t g = 0; g < K.module().rank(); ++g) {
    Vec v = f.source.reduce(K.generator(g));
    if (!exactla::is_zero(v)) out.push_back(std::move(v));
  }
  return out;
}

inline std::size_t weight(const Vec& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](Residue x) { return x != 0; }));
}

/// Every element of the submodule generated by `gens` inside `ambient`.
inline std::vector<Vec> all_elements(const FinModule& ambient, const std::vector<Vec>& gens, std::uint64_t cap) {
  ModMatrix G(ambient.rank(), gens.size());
  for (std::size_t j = 0; j < gens.size(); ++j)
    for (std::size_t i = 0; i < ambient.rank(); ++i) G(i, j) = gens[j][i];
  auto S = exactla::submodule_of(ambient, G);
  const auto& M = S.module();
  std::vector<Vec> out;
  Vec c(M.rank(), 0);
  while (true) {
    if (out.size() >= cap) throw BudgetExceeded("matrix search: element enumeration exceeds the budget");
    Vec v(ambient.rank(), 0);
    for (std::size_t g = 0; g < M.rank(); ++g)
      if (c[g]) {
        Vec x = S.generator(g);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] + exactla::mul_mod(c[g], x[i], M.modulus())) % M.modulus();
      }
    out.push_back(ambient.reduce(std::move(v)));
    std::size_t g = 0;
    while (g < M.rank() && ++c[g] == M.order(g)) c[g++] = 0;
    if (g == M.rank()) break;
  }
  return out;
}

struct Context {
  const BigGradedRing& A;
  bool field;
  std::uint64_t budget;
  std::uint64_t used = 0;

  Context(const BigGradedRing& ring, std::uint64_t b)
      : A(ring), field(exactla::is_prime(ring.modulus()) && bigring::is_diagonal_base(ring.base())), budget(b) {}

  void tick(std::uint64_t k = 1) {
    used += k;
    if (used > budget) throw BudgetExceeded("matrix search exceeded its budget of " + std::to_string(budget) + " steps");
  }
};

/// A label together with generators of the admissible rows for it.
struct LabelSpace {
  FinModule ambient;
  std::vector<Vec> gens;
  std::vector<Vec> basis;     // prime-field case
  std::vector<Vec> elements;  // otherwise
};

inline LabelSpace make_space(Context& ctx, FinModule ambient, std::vector<Vec> gens) {
  LabelSpace L{std::move(ambient), std::move(gens), {}, {}};
  if (ctx.field) {
    L.basis = bigring::detail::echelon(L.gens, ctx.A.modulus());
  } else {
    L.elements = all_elements(L.ambient, L.gens, ctx.budget);
    ctx.tick(L.elements.size());
  }
  return L;
}

struct RowChoice {
  std::vector<std::size_t> labels;
  std::vector<Vec> rows;
};

// Reduced echelon coefficient matrices (count x dim) of the given rank over Z/p.
// The visitor returns false to stop; so does the function.
inline bool echelon_forms(std::size_t count, std::size_t dim, std::size_t rank, Residue p,
                          const std::function<bool(const std::vector<Vec>&)>& visit) {
  if (rank > count || rank > dim) return true;
  std::vector<std::size_t> piv;
  std::function<bool(std::size_t, std::size_t)> pick = [&](std::size_t start, std::size_t left) -> bool {
    if (left == 0) {
      std::vector<std::pair<std::size_t, std::size_t>> free;  // (row, col)
      for (std::size_t r = 0; r < piv.size(); ++r)
        for (std::size_t c = piv[r] + 1; c < dim; ++c)
          if (std::find(piv.begin(), piv.end(), c) == piv.end()) free.emplace_back(r, c);
      std::vector<Vec> C(count, Vec(dim, 0));
      for (std::size_t r = 0; r < piv.size(); ++r) C[r][piv[r]] = 1;
      std::function<bool(std::size_t)> fill = [&](std::size_t f) -> bool {
        if (f == free.size()) return visit(C);
        for (Residue x = 0; x < p; ++x) {
          C[free[f].first][free[f].second] = x;
          if (!fill(f + 1)) return false;
        }
        C[free[f].first][free[f].second] = 0;
        return true;
      };
      return fill(0);
    }
    for (std::size_t c = start; c + left <= dim; ++c) {
      piv.push_back(c);
      if (!pick(c + 1, left - 1)) return false;
      piv.pop_back();
    }
    return true;
  };
  return pick(0, rank);
}

/// Tuples of `count` rows from one label space, up to invertible row operations
/// (prime field) or permutations (otherwise).
inline bool for_each_block(Context& ctx, const LabelSpace& L, std::size_t count, bool full_rank,
                           const std::function<bool(const std::vector<Vec>&)>& visit) {
  const Residue m = ctx.A.modulus();
  if (ctx.field) {
    const std::size_t dim = L.basis.size();
    for (std::size_t rk = full_rank ? count : 0; rk <= std::min(count, dim); ++rk) {
      bool go = echelon_forms(count, dim, rk, m, [&](const std::vector<Vec>& C) {
        ctx.tick();
        std::vector<Vec> rows;
        for (const auto& c : C) {
          Vec v(L.ambient.rank(), 0);
          for (std::size_t b = 0; b < dim; ++b)
            if (c[b])
              for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] + exactla::mul_mod(c[b], L.basis[b][i], m)) % m;
          rows.push_back(std::move(v));
        }
        return visit(rows);
      });
      if (!go) return false;
    }
    return true;
  }
  std::vector<std::size_t> pool;
  for (std::size_t e = 0; e < L.elements.size(); ++e)
    if (!full_rank || !exactla::is_zero(L.elements[e])) pool.push_back(e);
  std::vector<Vec> rows;
  std::function<bool(std::size_t)> rec = [&](std::size_t from) -> bool {
    if (rows.size() == count) {
      ctx.tick();
      return visit(rows);
    }
    for (std::size_t i = from; i < pool.size(); ++i) {
      rows.push_back(L.elements[pool[i]]);
      if (!rec(i)) return false;
      rows.pop_back();
    }
    return true;
  };
  return rec(0);
}

/// Largest number of rows tried: the dimension of the spaces over a prime
/// field (more rows cannot be independent), the generator count otherwise.
inline std::size_t row_cap(const Context& ctx, const std::vector<LabelSpace>& spaces, std::size_t hi) {
  std::size_t dim = 0;
  for (const auto& L : spaces) dim += ctx.field ? L.basis.size() : L.gens.size();
  return std::min(hi, dim);
}

/// All row tuples of size lo..hi with nondecreasing labels, each label block
/// drawn from its space. Visited by size, then label multiset, then choice.
inline bool for_each_rows(Context& ctx, const std::vector<LabelSpace>& spaces, std::size_t lo, std::size_t hi,
                          bool full_rank, const std::function<bool(const RowChoice&)>& visit) {
  const std::size_t k = spaces.size();
  if (full_rank) hi = row_cap(ctx, spaces, hi);
  RowChoice cur;
  std::vector<std::size_t> counts(k, 0);
  std::function<bool(std::size_t)> blocks = [&](std::size_t l) -> bool {
    if (l == k) return visit(cur);
    if (counts[l] == 0) return blocks(l + 1);
    return for_each_block(ctx, spaces[l], counts[l], full_rank, [&](const std::vector<Vec>& rows) {
      for (const auto& r : rows) {
        cur.labels.push_back(l);
        cur.rows.push_back(r);
      }
      bool go = blocks(l + 1);
      cur.labels.resize(cur.labels.size() - rows.size());
      cur.rows.resize(cur.rows.size() - rows.size());
      return go;
    });
  };
  std::function<bool(std::size_t, std::size_t)> split = [&](std::size_t label, std::size_t left) -> bool {
    if (label + 1 == k) {
      counts[label] = left;
      return blocks(0);
    }
    for (std::size_t c = left + 1; c-- > 0;) {
      counts[label] = c;
      if (!split(label + 1, left - c)) return false;
    }
    return true;
  };
  for (std::size_t s = lo; s <= hi; ++s)
    if (!split(0, s)) return false;
  return true;
}

inline constexpr std::size_t kMaxStageChoices = 1000000;

inline std::vector<RowChoice> row_choices(Context& ctx, const std::vector<LabelSpace>& spaces, std::size_t lo,
                                          std::size_t hi, bool full_rank) {
  std::vector<RowChoice> out;
  for_each_rows(ctx, spaces, lo, hi, full_rank, [&](const RowChoice& c) {
    if (out.size() == kMaxStageChoices) throw BudgetExceeded("matrix search: too many choices at one stage");
    out.push_back(c);
    return true;
  });
  return out;
}

inline std::size_t total_weight(const std::vector<Vec>& rows) {
  std::size_t w = 0;
  for (const auto& r : rows) w += weight(r);
  return w;
}

inline ColoredMatrix from_rows(const BigGradedRing& A, const std::vector<std::size_t>& labels,
                               const std::vector<std::size_t>& cols, int d, const std::vector<Vec>& rows) {
  ColoredMatrix M{labels, cols, d, {}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto parts = split_row(row_space(A, labels[i], cols, d), rows[i]);
    for (auto& p : parts) M.entries.push_back(std::move(p));
  }
  return M;
}

/// Admissible rows r of degree d over `cols` with r B = 0 for every B in `annihilate`.
inline std::vector<LabelSpace> annihilator_spaces(Context& ctx, const std::vector<std::size_t>& cols, int d,
                                                  const ColoredMatrix* annihilate) {
  std::vector<LabelSpace> out;
  for (std::size_t rho = 0; rho < ctx.A.object_count(); ++rho) {
    RowSpace R = row_space(ctx.A, rho, cols, d);
    std::vector<Vec> gens;
    if (annihilate) {
      gens = kernel_generators(right_mult(ctx.A, rho, d, *annihilate));
    } else {
      for (std::size_t i = 0; i < R.module.rank(); ++i) {
        Vec e(R.module.rank(), 0);
        e[i] = 1;
        gens.push_back(std::move(e));
      }
    }
    ctx.tick();
    out.push_back(make_space(ctx, R.module, std::move(gens)));
  }
  return out;
}

/// Rows q of degree d with q B = target, one per target row; nullopt if some row has none.
inline std::optional<ColoredMatrix> solve_left(Context& ctx, const ColoredMatrix& B, const ColoredMatrix& target,
                                               int d) {
  ColoredMatrix X{target.row_labels, B.row_labels, d, {}};
  for (std::size_t y = 0; y < target.rows(); ++y) {
    ctx.tick();
    auto f = right_mult(ctx.A, target.row_labels[y], d, B);
    auto x = exactla::solve_linear(f, row_of(target, y));
    if (!x) return std::nullopt;
    auto parts = split_row(row_space(ctx.A, target.row_labels[y], B.row_labels, d), *x);
    for (auto& p : parts) X.entries.push_back(std::move(p));
  }
  return X;
}

/// Every solution K (degree 0) of K B = T, rows enumerated independently, ordered by weight.
inline std::vector<ColoredMatrix> all_left_solutions(Context& ctx, const ColoredMatrix& B, const ColoredMatrix& T) {
  std::vector<std::vector<Vec>> per_row;
  for (std::size_t y = 0; y < T.rows(); ++y) {
    ctx.tick();
    auto f = right_mult(ctx.A, T.row_labels[y], 0, B);
    auto x = exactla::solve_linear(f, row_of(T, y));
    if (!x) return {};
    auto kernel = all_elements(f.source, kernel_generators(f), ctx.budget);
    ctx.tick(kernel.size());
    std::vector<Vec> sols;
    for (const auto& k : kernel) {
      Vec v = *x;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] + k[i]) % ctx.A.modulus();
      sols.push_back(f.source.reduce(std::move(v)));
    }
    std::stable_sort(sols.begin(), sols.end(), [](const Vec& a, const Vec& b) {
      return std::pair(weight(a), a) < std::pair(weight(b), b);
    });
    per_row.push_back(std::move(sols));
  }
  std::vector<ColoredMatrix> out;
  std::vector<std::size_t> pos(per_row.size(), 0);
  while (true) {
    ctx.tick();
    std::vector<Vec> rows;
    for (std::size_t y = 0; y < per_row.size(); ++y) rows.push_back(per_row[y][pos[y]]);
    out.push_back(from_rows(ctx.A, T.row_labels, B.row_labels, 0, rows));
    std::size_t y = per_row.size();
    while (y > 0 && ++pos[y - 1] == per_row[y - 1].size()) pos[--y] = 0;
    if (y == 0) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const ColoredMatrix& a, const ColoredMatrix& b) {
    return total_weight(a.entries) < total_weight(b.entries);
  });
  return out;
}

inline void order_by_weight(std::vector<RowChoice>& cs) {
  std::stable_sort(cs.begin(), cs.end(), [](const RowChoice& a, const RowChoice& b) {
    return total_weight(a.rows) < total_weight(b.rows);
  });
}

/// P from all admissible degree-1 rows killing Mp (or all rows when Mp is null), then Q.
inline std::optional<std::pair<ColoredMatrix, ColoredMatrix>> general_tail(Context& ctx, const ChainProblem& pr,
                                                                           const std::vector<std::size_t>& cols,
                                                                           const ColoredMatrix* Mp,
                                                                           const ColoredMatrix& NK) {
  std::vector<std::size_t> labels;
  std::vector<Vec> rows;
  for (std::size_t rho = 0; rho < ctx.A.object_count(); ++rho) {
    RowSpace R = row_space(ctx.A, rho, cols, 1);
    std::vector<Vec> gens;
    if (Mp) {
      gens = kernel_generators(right_mult(ctx.A, rho, 1, *Mp));
    } else {
      for (std::size_t i = 0; i < R.module.rank(); ++i) {
        Vec e(R.module.rank(), 0);
        e[i] = 1;
        gens.push_back(std::move(e));
      }
    }
    if (ctx.field) gens = bigring::detail::echelon(gens, ctx.A.modulus());
    for (auto& g : gens) {
      labels.push_back(rho);
      rows.push_back(std::move(g));
    }
  }
  ColoredMatrix P = from_rows(ctx.A, labels, cols, 1, rows);
  auto Q = solve_left(ctx, P, NK, pr.n() - 1);
  if (!Q) return std::nullopt;
  return std::pair{std::move(P), std::move(*Q)};
}

/// Generators of pairs (l, μ) with l M(i) = μ L(i-1) and μ M'(i-1) = 0.
inline std::vector<std::pair<std::size_t, Vec>> tri_pairs(Context& ctx, const ColoredMatrix& Mi,
                                                          const ColoredMatrix& Lprev, const ColoredMatrix* Mpprev,
                                                          std::size_t rho) {
  const auto& A = ctx.A;
  auto a = right_mult(A, rho, 1, Mi);
  auto b = negate(right_mult(A, rho, 1, Lprev));
  std::vector<FinModule> src{a.source, b.source};
  std::vector<FinModule> tgt{a.target};
  std::vector<std::vector<std::optional<ModuleMap>>> blocks{{a, b}};
  if (Mpprev) {
    auto c = right_mult(A, rho, 1, *Mpprev);
    tgt.push_back(c.target);
    blocks.push_back({std::nullopt, c});
  }
  auto f = block_map(src, tgt, blocks, A.modulus());
  std::vector<std::pair<std::size_t, Vec>> out;
  for (auto& g : kernel_generators(f)) out.emplace_back(rho, std::move(g));
  return out;
}

}  // namespace detail

struct SearchOptions {
  std::size_t size_bound = 0;         // inner dimensions of enumerated witness matrices; 0 means no bound
  std::uint64_t max_steps = 2000000;  // operation-count ceiling
};

/// Outcome of a witness search. Without a witness, `enumerated` counts the
/// witness skeletons examined; each one is decided exactly by linear algebra,
/// so absence is certified for every witness whose enumerated inner
/// dimensions are at most `size_bound`.
struct SearchResult {
  std::optional<FactorizationWitness> witness;
  Variant variant = Variant::general;
  std::uint64_t enumerated = 0;
  std::uint64_t steps = 0;
  std::size_t size_bound = 0;

  [[nodiscard]] std::string certificate() const {
    if (witness) return "witness found after " + std::to_string(enumerated) + " skeletons";
    if (!size_bound && variant == Variant::triangulated)
      return "no triangulated witness: the maximal tower admits no Q";
    std::string scope = size_bound ? "inner dimensions <= " + std::to_string(size_bound) : "independent rows";
    return "no " + variant_name(variant) + " witness: " + std::to_string(enumerated) + " skeletons with " + scope +
           " exhausted";
  }
};

namespace detail {

inline SearchResult search_general(Context& ctx, const ChainProblem& pr, std::size_t bound) {
  if (bound == 0) bound = std::numeric_limits<std::size_t>::max();
  const auto& A = ctx.A;
  const std::size_t m = pr.m();
  SearchResult res;
  res.variant = Variant::general;
  res.size_bound = bound == std::numeric_limits<std::size_t>::max() ? 0 : bound;
  std::vector<ColoredMatrix> K, Mp;
  std::function<bool(std::size_t)> stage = [&](std::size_t i) -> bool {
    if (i == m) {
      ++res.enumerated;
      ctx.tick();
      const ColoredMatrix& NK = m ? compose(A, pr.N, K.back()) : pr.N;
      const auto& cols = m ? Mp.back().row_labels : pr.N.col_labels;
      auto tail = general_tail(ctx, pr, cols, m ? &Mp.back() : nullptr, NK);
      if (!tail) return false;
      res.witness = FactorizationWitness{Variant::general, K, Mp, {}, tail->first, tail->second};
      return true;
    }
    const std::vector<std::size_t> prev_cols = i ? Mp.back().row_labels : pr.chain[0].col_labels;
    auto spaces = annihilator_spaces(ctx, prev_cols, 1, i ? &Mp.back() : nullptr);
    auto choices = row_choices(ctx, spaces, 0, bound, true);
    order_by_weight(choices);
    const ColoredMatrix T = i ? compose(A, pr.chain[i], K.back()) : pr.chain[0];
    for (const auto& c : choices) {
      ColoredMatrix M = from_rows(A, c.labels, prev_cols, 1, c.rows);
      for (auto& k : all_left_solutions(ctx, M, T)) {
        Mp.push_back(M);
        K.push_back(std::move(k));
        if (stage(i + 1)) return true;
        Mp.pop_back();
        K.pop_back();
      }
    }
    return false;
  };
  stage(0);
  res.steps = ctx.used;
  return res;
}

// Without a bound every stage takes all admissible rows. Any witness factors
// through this maximal tower: its rows at stage i are combinations T G of the
// generators G, and M'(i+1) T together with G satisfies the same equations.
// So the tower decides existence in a single pass.
inline SearchResult search_triangulated(Context& ctx, const ChainProblem& pr, std::size_t bound) {
  const bool maximal = bound == 0;
  if (bound == 0) bound = std::numeric_limits<std::size_t>::max();
  const auto& A = ctx.A;
  const std::size_t m = pr.m();
  const std::size_t k = A.object_count();
  SearchResult res;
  res.variant = Variant::triangulated;
  res.size_bound = bound == std::numeric_limits<std::size_t>::max() ? 0 : bound;
  std::vector<ColoredMatrix> L, Mp;
  const auto& X0 = m ? pr.chain[0].col_labels : pr.N.col_labels;

  // Exact last stage: all admissible (l, μ) rows, then Q.
  auto finish = [&]() -> bool {
    ++res.enumerated;
    ctx.tick();
    std::vector<std::size_t> labels;
    std::vector<Vec> lrows, mrows;
    const auto& Xm = m ? pr.chain[m - 1].row_labels : X0;
    for (std::size_t rho = 0; rho < k; ++rho) {
      if (m == 0) {
        RowSpace R = row_space(A, rho, X0, 1);
        for (std::size_t i = 0; i < R.module.rank(); ++i) {
          Vec e(R.module.rank(), 0);
          e[i] = 1;
          labels.push_back(rho);
          lrows.push_back(std::move(e));
        }
        continue;
      }
      const ColoredMatrix* Mpprev = m >= 2 ? &Mp.back() : nullptr;
      RowSpace Rl = row_space(A, rho, Xm, 1);
      auto pairs = tri_pairs(ctx, pr.chain[m - 1], L.back(), Mpprev, rho);
      std::vector<Vec> gens;
      for (auto& [r, v] : pairs) gens.push_back(std::move(v));
      if (ctx.field) gens = bigring::detail::echelon(gens, A.modulus());
      for (auto& v : gens) {
        labels.push_back(rho);
        lrows.emplace_back(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(Rl.module.rank()));
        mrows.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(Rl.module.rank()), v.end());
      }
    }
    ColoredMatrix Lm = from_rows(A, labels, Xm, 1, lrows);
    std::optional<ColoredMatrix> Mpm;
    ColoredMatrix B = Lm, target = pr.N;
    if (m) {
      Mpm = from_rows(A, labels, L.back().row_labels, 1, mrows);
      // Q [L(m) | M'(m)] = [N | 0].
      B.col_labels.insert(B.col_labels.end(), Mpm->col_labels.begin(), Mpm->col_labels.end());
      B.entries.clear();
      for (std::size_t r = 0; r < Lm.rows(); ++r) {
        for (std::size_t c = 0; c < Lm.cols(); ++c) B.entries.push_back(Lm.at(r, c));
        for (std::size_t c = 0; c < Mpm->cols(); ++c) B.entries.push_back(Mpm->at(r, c));
      }
      ColoredMatrix Z = zero_matrix(A, pr.N.row_labels, Mpm->col_labels, pr.n());
      target.col_labels = B.col_labels;
      target.entries.clear();
      for (std::size_t r = 0; r < pr.N.rows(); ++r) {
        for (std::size_t c = 0; c < pr.N.cols(); ++c) target.entries.push_back(pr.N.at(r, c));
        for (std::size_t c = 0; c < Z.cols(); ++c) target.entries.push_back(Z.at(r, c));
      }
    }
    auto Q = solve_left(ctx, B, target, pr.n() - 1);
    if (!Q) return false;
    FactorizationWitness W{Variant::triangulated, {}, Mp, L, {}, std::move(*Q)};
    W.L.push_back(std::move(Lm));
    if (Mpm) W.Mp.push_back(std::move(*Mpm));
    res.witness = std::move(W);
    return true;
  };

  std::function<bool(std::size_t)> stage = [&](std::size_t i) -> bool {
    if (i == m) return finish();
    std::vector<detail::LabelSpace> spaces;
    const auto& Xi = i ? pr.chain[i - 1].row_labels : X0;
    auto space = [&](FinModule ambient, std::vector<Vec> gens) {
      if (!maximal) return make_space(ctx, std::move(ambient), std::move(gens));
      if (ctx.field) gens = bigring::detail::echelon(gens, A.modulus());
      return LabelSpace{std::move(ambient), std::move(gens), {}, {}};
    };
    for (std::size_t rho = 0; rho < k; ++rho) {
      ctx.tick();
      if (i == 0) {
        RowSpace R = row_space(A, rho, X0, 1);
        std::vector<Vec> gens;
        for (std::size_t g = 0; g < R.module.rank(); ++g) {
          Vec e(R.module.rank(), 0);
          e[g] = 1;
          gens.push_back(std::move(e));
        }
        spaces.push_back(space(R.module, std::move(gens)));
        continue;
      }
      auto a = right_mult(A, rho, 1, pr.chain[i - 1]);
      RowSpace Rm = row_space(A, rho, L.back().row_labels, 1);
      auto pairs = tri_pairs(ctx, pr.chain[i - 1], L.back(), i >= 2 ? &Mp.back() : nullptr, rho);
      std::vector<Vec> gens;
      for (auto& [r, v] : pairs) gens.push_back(std::move(v));
      spaces.push_back(space(exactla::direct_sum(a.source, Rm.module), std::move(gens)));
    }
    std::vector<RowChoice> choices;
    if (maximal) {
      choices.emplace_back();
      for (std::size_t rho = 0; rho < k; ++rho)
        for (const auto& g : spaces[rho].gens) {
          choices[0].labels.push_back(rho);
          choices[0].rows.push_back(g);
        }
    } else {
      choices = row_choices(ctx, spaces, 0, bound, true);
      order_by_weight(choices);
    }
    for (const auto& c : choices) {
      if (i == 0) {
        L.push_back(from_rows(A, c.labels, X0, 1, c.rows));
      } else {
        std::vector<Vec> lrows, mrows;
        for (std::size_t r = 0; r < c.rows.size(); ++r) {
          const std::size_t split = row_space(A, c.labels[r], Xi, 1).module.rank();
          lrows.emplace_back(c.rows[r].begin(), c.rows[r].begin() + static_cast<std::ptrdiff_t>(split));
          mrows.emplace_back(c.rows[r].begin() + static_cast<std::ptrdiff_t>(split), c.rows[r].end());
        }
        Mp.push_back(from_rows(A, c.labels, L.back().row_labels, 1, mrows));
        L.push_back(from_rows(A, c.labels, Xi, 1, lrows));
      }
      if (stage(i + 1)) return true;
      L.pop_back();
      if (i) Mp.pop_back();
    }
    return false;
  };
  stage(0);
  res.steps = ctx.used;
  return res;
}

}  // namespace detail

/// Searches for a witness of the chosen form. Earlier stages are enumerated up
/// to invertible row operations (prime field, diagonal base) or row
/// permutations; the final stage is solved exactly. Options are tried in
/// increasing total entry weight, lexicographically within a weight.
inline SearchResult search_witness(const BigGradedRing& A, const ChainProblem& P, Variant variant,
                                   const SearchOptions& opt = {}) {
  detail::Context ctx(A, opt.max_steps);
  return variant == Variant::general ? detail::search_general(ctx, P, opt.size_bound)
                                     : detail::search_triangulated(ctx, P, opt.size_bound);
}

/// The general witness with K = identity and M' = M, when one exists.
inline std::optional<FactorizationWitness> canonical_witness(const BigGradedRing& A, const ChainProblem& P,
                                                             std::uint64_t max_steps = 2000000) {
  detail::Context ctx(A, max_steps);
  const std::size_t m = P.m();
  std::vector<ColoredMatrix> K;
  for (const auto& M : P.chain) K.push_back(identity_matrix(A, M.row_labels));
  const auto& cols = m ? P.chain.back().row_labels : P.N.col_labels;
  auto tail = detail::general_tail(ctx, P, cols, m ? &P.chain.back() : nullptr, P.N);
  if (!tail) return std::nullopt;
  return FactorizationWitness{Variant::general, std::move(K), P.chain, {}, tail->first, tail->second};
}

/// Triangulated witness read off a general one with K = identity:
/// L(i) = M(i+1) and M'(i) = M(i+1) for i < m, L(m) = P, M'(m) = 0.
inline FactorizationWitness triangulated_from_canonical(const BigGradedRing& A, const ChainProblem& P,
                                                        const FactorizationWitness& W) {
  if (W.variant != Variant::general) throw InvalidInput("expected a general witness");
  const std::size_t m = P.m();
  FactorizationWitness T;
  T.variant = Variant::triangulated;
  for (std::size_t i = 0; i < m; ++i) T.L.push_back(P.chain[i]);
  T.L.push_back(W.P);
  for (std::size_t i = 1; i < m; ++i) T.Mp.push_back(P.chain[i]);
  if (m) T.Mp.push_back(zero_matrix(A, W.P.row_labels, P.chain[m - 1].row_labels, 1));
  T.Q = W.Q;
  return T;
}

// ---------------------------------------------------------------------------
// Bounded sweep

struct MatrixBounds {
  int m_max = 2;
  int n_max = 3;
  std::size_t size_bound = 2;  // dimensions of the intermediate chain objects
};

struct MatrixOptions {
  Variant variant = Variant::general;
  std::size_t witness_bound = 0;       // inner witness dimensions; 0 means no bound
  std::uint64_t max_steps = 50000000;  // shared by the sweep and all searches
  homcheck::ComplexOptions complex;
};

struct MatrixReport {
  homcheck::KoszulVerdict verdict;
  std::uint64_t problems = 0;
  std::uint64_t searched = 0;  // problems that needed a bounded search
  std::optional<ChainProblem> offending;
  std::optional<SearchResult> certificate;
};

namespace detail {

inline std::string describe(const BigGradedRing& A, const ChainProblem& P) {
  std::string out = "m=" + std::to_string(P.m()) + " n=" + std::to_string(P.n());
  for (std::size_t i = 0; i < P.m(); ++i) out += "; " + idx("M", i + 1) + " " + to_string(A, P.chain[i]);
  return out + "; N " + to_string(A, P.N);
}

inline void attach_homology(const BigGradedRing& A, const ChainProblem& P, const MatrixOptions& opt,
                            homcheck::Failure& f) {
  const int w = P.n() + static_cast<int>(P.m());
  f.i = w;
  f.n = P.m() == 0 ? 1 : P.m() == 1 ? 2 : P.n() + 1;
  f.witness = FinModule::zero(A.modulus());
  try {
    auto F = homcheck::bar_complex(A, w, opt.complex);
    if (auto g = homcheck::detail::first_off_diagonal(F)) {
      std::string d = f.detail;
      f = *g;
      f.detail = d;
    } else {
      f.detail += "; no off-diagonal bar homology up to weight " + std::to_string(w);
    }
  } catch (const BudgetExceeded&) {
    f.detail += "; bar homology beyond the term budget";
  }
}

}  // namespace detail

/// Sweeps chain problems with a single-object source and target, chain length
/// m <= m_max, degree 2 <= n <= n_max (n = 1 always has the witness K = Q = id,
/// M' = M, P = N) and intermediate dimensions <= size_bound, in order of
/// increasing weight n + m. Problems are taken up to invertible row operations.
/// The first problem without a witness in the bounded search fails the check.
inline MatrixReport matrix_check(const BigGradedRing& A, const MatrixBounds& b, const MatrixOptions& opt = {}) {
  MatrixReport rep;
  auto& v = rep.verdict;
  v.method = homcheck::Method::matrix;
  const int top = std::min(b.m_max + b.n_max, A.max_degree());
  v.checked_up_to = top;
  const std::size_t wbound = opt.witness_bound;
  const std::size_t k = A.object_count();
  detail::Context ctx(A, opt.max_steps);
  std::vector<ColoredMatrix> chain;

  // Returns false once a failure is recorded.
  auto decide = [&](const ColoredMatrix& N) -> bool {
    ++rep.problems;
    ChainProblem P{chain, N};
    // The canonical general witness serves both forms.
    const auto& cols = chain.empty() ? N.col_labels : chain.back().row_labels;
    if (detail::general_tail(ctx, P, cols, chain.empty() ? nullptr : &chain.back(), N)) return true;
    ++rep.searched;
    detail::Context sub(A, ctx.budget - std::min(ctx.budget, ctx.used));
    auto res = opt.variant == Variant::general ? detail::search_general(sub, P, wbound)
                                               : detail::search_triangulated(sub, P, wbound);
    ctx.tick(sub.used);
    if (res.witness) return true;
    v.koszul = false;
    homcheck::Failure f;
    f.detail = "no witness for chain problem " + detail::describe(A, P) + " (" + res.certificate() + ")";
    detail::attach_homology(A, P, opt, f);
    v.failure = std::move(f);
    rep.offending = std::move(P);
    rep.certificate = std::move(res);
    return false;
  };

  // Extends a chain holding i >= 1 matrices; at length m enumerates N.
  std::function<bool(int, int, std::size_t)> extend = [&](int m, int n, std::size_t i) -> bool {
    const std::vector<std::size_t> cols = chain.back().row_labels;
    if (static_cast<int>(i) == m) {
      auto spaces = detail::annihilator_spaces(ctx, cols, n, &chain.back());
      return detail::for_each_rows(ctx, spaces, 1, 1, true, [&](const detail::RowChoice& c) {
        return decide(detail::from_rows(A, c.labels, cols, n, c.rows));
      });
    }
    auto spaces = detail::annihilator_spaces(ctx, cols, 1, &chain.back());
    return detail::for_each_rows(ctx, spaces, 1, b.size_bound, false, [&](const detail::RowChoice& c) {
      chain.push_back(detail::from_rows(A, c.labels, cols, 1, c.rows));
      const bool ok = extend(m, n, i + 1);
      chain.pop_back();
      return ok;
    });
  };

  try {
    for (int w = 2; w <= top; ++w)
      for (int m = 0; m <= std::min(b.m_max, w - 2); ++m) {
        const int n = w - m;
        if (n > b.n_max) continue;
        for (std::size_t x0 = 0; x0 < k; ++x0) {
          chain.clear();
          const std::vector<std::size_t> src{x0};
          auto spaces = detail::annihilator_spaces(ctx, src, m ? 1 : n, nullptr);
          // Up to a unit, N is a single nonzero row.
          const bool ok = detail::for_each_rows(
              ctx, spaces, 1, m ? b.size_bound : 1, m == 0, [&](const detail::RowChoice& c) {
                if (m == 0) return decide(detail::from_rows(A, c.labels, src, n, c.rows));
                chain.push_back(detail::from_rows(A, c.labels, src, 1, c.rows));
                const bool go = extend(m, n, 1);
                chain.pop_back();
                return go;
              });
          if (!ok) {
            v.detail = "matrix condition fails within m <= " + std::to_string(b.m_max) + ", n <= " +
                       std::to_string(b.n_max) + ", size <= " + std::to_string(b.size_bound);
            return rep;
          }
        }
      }
  } catch (const BudgetExceeded& e) {
    v.koszul = false;
    v.inconclusive = true;
    v.detail = std::string(e.what()) + " after " + std::to_string(rep.problems) + " problems";
    return rep;
  }
  v.detail = std::to_string(rep.problems) + " chain problems with m <= " + std::to_string(b.m_max) +
             ", n <= " + std::to_string(b.n_max) + ", size <= " + std::to_string(b.size_bound) + " (" +
             std::to_string(rep.searched) + " needed a search)";
  return rep;
}

inline homcheck::KoszulVerdict matrix_koszulity_check(const BigGradedRing& A, int m_max, int n_max,
                                                      std::size_t size_bound, const MatrixOptions& opt = {}) {
  return matrix_check(A, MatrixBounds{m_max, n_max, size_bound}, opt).verdict;
}

}  // namespace koszul::matrixcrit
