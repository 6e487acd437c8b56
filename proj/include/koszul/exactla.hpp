#pragma once

// Exact linear algebra over Z and Z/m.
//
// Every finitely generated Z/m-module in the library is a FinModule: an
// invariant-factor chain d_1 | d_2 | ... | d_k with each d_i dividing m and
// d_i > 1. Elements are coordinate vectors with respect to the canonical
// generators, entry i taken mod d_i. Subquotients S/T of free modules
// (Z/m)^n are canonicalized through a Smith normal form over the principal
// ideal ring Z/m; residues never grow, so machine integers suffice there.
// Smith forms over Z itself use arbitrary precision.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "koszul/error.hpp"
#include "koszul/matrix.hpp"

namespace koszul::exactla {

using Integer = boost::multiprecision::cpp_int;
using IntMatrix = Matrix<Integer>;
using Residue = std::int64_t;
using Vec = std::vector<Residue>;
using ModMatrix = Matrix<Residue>;

// ---------------------------------------------------------------------------
// Scalar helpers

inline Residue mod(Residue a, Residue m) {
  a %= m;
  return a < 0 ? a + m : a;
}

inline Residue mul_mod(Residue a, Residue b, Residue m) {
  return static_cast<Residue>((static_cast<__int128>(a) * b) % m);
}

inline Residue gcd(Residue a, Residue b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

struct ExtGcd {
  Residue g, s, t;  // s*a + t*b == g >= 0
};

inline ExtGcd ext_gcd(Residue a, Residue b) {
  Residue old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    Residue q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
    std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

/// Inverse of a unit a modulo n (n >= 1).
inline Residue inverse_mod(Residue a, Residue n) {
  if (n == 1) return 0;
  auto e = ext_gcd(mod(a, n), n);
  if (e.g != 1) throw InvalidInput("inverse_mod: not a unit");
  return mod(e.s, n);
}

inline std::vector<std::pair<Residue, int>> factorize(Residue n) {
  std::vector<std::pair<Residue, int>> out;
  for (Residue p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) n /= p, ++e;
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

inline bool is_prime(Residue n) {
  if (n < 2) return false;
  for (Residue p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

inline Vec reduce(Vec v, Residue m) {
  for (auto& x : v) x = mod(x, m);
  return v;
}

inline ModMatrix reduce(ModMatrix a, Residue m) {
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (auto& x : a.row(r)) x = mod(x, m);
  return a;
}

inline ModMatrix mul_mod(const ModMatrix& a, const ModMatrix& b, Residue m) {
  if (a.cols() != b.rows()) throw InvalidInput("mul_mod: shape mismatch");
  ModMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      Residue aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        Residue bkj = b(k, j);
        if (bkj) out(i, j) = (out(i, j) + mul_mod(aik, bkj, m)) % m;
      }
    }
  return out;
}

inline Vec apply_mod(const ModMatrix& a, const Vec& x, Residue m) {
  if (a.cols() != x.size()) throw InvalidInput("apply_mod: shape mismatch");
  Vec out(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Residue acc = 0;
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (x[j] && a(i, j)) acc = (acc + mul_mod(a(i, j), x[j], m)) % m;
    out[i] = acc;
  }
  return out;
}

inline bool is_zero(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](Residue x) { return x == 0; });
}

// ---------------------------------------------------------------------------
// FinModule

/// A finitely generated Z/m-module in invariant-factor form.
class FinModule {
 public:
  FinModule() = default;

  static FinModule zero(Residue m) { return from_orders(m, {}); }

  static FinModule free(Residue m, std::size_t rank) {
    return from_orders(m, std::vector<Residue>(rank, m));
  }

  /// Canonical form of the direct sum of cyclic modules Z/o_i (each o_i reduced to gcd(o_i, m)).
  static FinModule from_orders(Residue m, const std::vector<Residue>& orders) {
    if (m < 1) throw InvalidInput("modulus must be positive");
    FinModule out;
    out.modulus_ = m;
    // Split into prime-power parts, sort per prime, recombine into a chain.
    std::map<Residue, std::vector<Residue>> parts;
    const auto primes = factorize(m);
    std::size_t longest = 0;
    for (Residue o : orders) {
      Residue g = gcd(o == 0 ? m : o, m);
      for (auto [p, e] : primes) {
        Residue pp = 1;
        while (g % (pp * p) == 0) pp *= p;
        if (pp > 1) parts[p].push_back(pp);
      }
    }
    for (auto& [p, v] : parts) {
      std::sort(v.begin(), v.end(), std::greater<>());
      longest = std::max(longest, v.size());
    }
    std::vector<Residue> chain(longest, 1);
    for (auto& [p, v] : parts)
      for (std::size_t i = 0; i < v.size(); ++i) chain[i] *= v[i];
    std::reverse(chain.begin(), chain.end());
    out.factors_ = std::move(chain);
    return out;
  }

  /// Builds from an already-canonical chain; validates it.
  static FinModule from_chain(Residue m, std::vector<Residue> chain) {
    FinModule out;
    out.modulus_ = m;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (chain[i] <= 1 || m % chain[i] != 0) throw InvalidInput("invalid invariant factor");
      if (i && chain[i] % chain[i - 1] != 0) throw InvalidInput("invariant factors must form a divisibility chain");
    }
    out.factors_ = std::move(chain);
    return out;
  }

  [[nodiscard]] Residue modulus() const noexcept { return modulus_; }
  [[nodiscard]] const std::vector<Residue>& factors() const noexcept { return factors_; }
  [[nodiscard]] std::size_t rank() const noexcept { return factors_.size(); }
  [[nodiscard]] Residue order(std::size_t i) const { return factors_.at(i); }
  [[nodiscard]] bool is_zero() const noexcept { return factors_.empty(); }
  [[nodiscard]] bool is_free() const {
    return std::all_of(factors_.begin(), factors_.end(), [&](Residue d) { return d == modulus_; });
  }

  [[nodiscard]] Integer cardinality() const {
    Integer c = 1;
    for (Residue d : factors_) c *= d;
    return c;
  }

  [[nodiscard]] Vec reduce(Vec v) const {
    if (v.size() != factors_.size()) throw InvalidInput("element has wrong number of coordinates");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mod(v[i], factors_[i]);
    return v;
  }

  [[nodiscard]] Vec zero_element() const { return Vec(rank(), 0); }

  /// Human-readable form such as "0", "Z/2", "(Z/2)^2 + Z/4".
  [[nodiscard]] std::string to_string() const {
    if (factors_.empty()) return "0";
    std::ostringstream os;
    for (std::size_t i = 0; i < factors_.size();) {
      std::size_t j = i;
      while (j < factors_.size() && factors_[j] == factors_[i]) ++j;
      if (i) os << " + ";
      if (j - i == 1)
        os << "Z/" << factors_[i];
      else
        os << "(Z/" << factors_[i] << ")^" << (j - i);
      i = j;
    }
    return os.str();
  }

  friend bool operator==(const FinModule& a, const FinModule& b) {
    return a.modulus_ == b.modulus_ && a.factors_ == b.factors_;
  }

 private:
  Residue modulus_ = 1;
  std::vector<Residue> factors_;
};

inline FinModule direct_sum(const FinModule& a, const FinModule& b) {
  if (a.modulus() != b.modulus()) throw InvalidInput("direct_sum: modulus mismatch");
  auto orders = a.factors();
  orders.insert(orders.end(), b.factors().begin(), b.factors().end());
  return FinModule::from_orders(a.modulus(), orders);
}

/// Relations of a FinModule presented on its canonical generators: columns d_i e_i.
inline ModMatrix relation_matrix(const FinModule& M) {
  const Residue m = M.modulus();
  std::vector<std::size_t> torsion;
  for (std::size_t i = 0; i < M.rank(); ++i)
    if (M.order(i) != m) torsion.push_back(i);
  ModMatrix R(M.rank(), torsion.size());
  for (std::size_t k = 0; k < torsion.size(); ++k) R(torsion[k], k) = M.order(torsion[k]);
  return R;
}

// ---------------------------------------------------------------------------
// Smith normal form over Z (arbitrary precision)

struct SmithForm {
  IntMatrix U, D, V;  // U * M * V == D
};

namespace detail {

inline Integer abs_int(const Integer& a) { return a < 0 ? Integer(-a) : a; }

// Extended gcd on big integers: s*a + t*b == g >= 0.
inline void ext_gcd_int(const Integer& a, const Integer& b, Integer& g, Integer& s, Integer& t) {
  Integer old_r = a, r = b, old_s = 1, s1 = 0, old_t = 0, t1 = 1;
  while (r != 0) {
    Integer q = old_r / r;
    Integer tmp = r;
    r = old_r - q * r;
    old_r = tmp;
    tmp = s1;
    s1 = old_s - q * s1;
    old_s = tmp;
    tmp = t1;
    t1 = old_t - q * t1;
    old_t = tmp;
  }
  if (old_r < 0) {
    g = -old_r, s = -old_s, t = -old_t;
  } else {
    g = old_r, s = old_s, t = old_t;
  }
}

template <class T>
void rows_combine(Matrix<T>& M, std::size_t a, std::size_t b, const T& s, const T& u, const T& v, const T& w) {
  for (std::size_t c = 0; c < M.cols(); ++c) {
    T x = M(a, c), y = M(b, c);
    M(a, c) = s * x + u * y;
    M(b, c) = v * x + w * y;
  }
}

template <class T>
void cols_combine(Matrix<T>& M, std::size_t a, std::size_t b, const T& s, const T& u, const T& v, const T& w) {
  for (std::size_t r = 0; r < M.rows(); ++r) {
    T x = M(r, a), y = M(r, b);
    M(r, a) = s * x + u * y;
    M(r, b) = v * x + w * y;
  }
}

}  // namespace detail

/// Smith normal form over Z: U*M*V = D, U and V unimodular, D diagonal with
/// nonnegative entries d_1 | d_2 | ...
inline SmithForm smith_normal_form(const IntMatrix& M) {
  using detail::abs_int;
  const std::size_t r = M.rows(), c = M.cols();
  IntMatrix A = M, U = IntMatrix::identity(r), V = IntMatrix::identity(c);
  const std::size_t k = std::min(r, c);

  auto clear = [&](std::size_t t) {
    for (bool again = true; again;) {
      again = false;
      for (std::size_t i = t + 1; i < r; ++i) {
        if (A(i, t) == 0) continue;
        const Integer a = A(t, t), b = A(i, t);
        if (b % a == 0) {
          Integer q = b / a;
          detail::rows_combine<Integer>(A, t, i, 1, 0, -q, 1);
          detail::rows_combine<Integer>(U, t, i, 1, 0, -q, 1);
        } else {
          Integer g, s, u;
          detail::ext_gcd_int(a, b, g, s, u);
          Integer v = -b / g, w = a / g;
          detail::rows_combine<Integer>(A, t, i, s, u, v, w);
          detail::rows_combine<Integer>(U, t, i, s, u, v, w);
        }
      }
      for (std::size_t j = t + 1; j < c; ++j) {
        if (A(t, j) == 0) continue;
        const Integer a = A(t, t), b = A(t, j);
        if (b % a == 0) {
          Integer q = b / a;
          detail::cols_combine<Integer>(A, t, j, 1, 0, -q, 1);
          detail::cols_combine<Integer>(V, t, j, 1, 0, -q, 1);
        } else {
          Integer g, s, u;
          detail::ext_gcd_int(a, b, g, s, u);
          Integer v = -b / g, w = a / g;
          detail::cols_combine<Integer>(A, t, j, s, u, v, w);
          detail::cols_combine<Integer>(V, t, j, s, u, v, w);
          again = true;
        }
      }
    }
  };

  std::size_t t = 0;
  for (; t < k; ++t) {
    std::size_t bi = r, bj = c;
    Integer best = 0;
    for (std::size_t i = t; i < r; ++i)
      for (std::size_t j = t; j < c; ++j)
        if (A(i, j) != 0 && (bi == r || abs_int(A(i, j)) < best)) bi = i, bj = j, best = abs_int(A(i, j));
    if (bi == r) break;
    A.swap_rows(t, bi), U.swap_rows(t, bi);
    A.swap_cols(t, bj), V.swap_cols(t, bj);
    clear(t);
  }
  const std::size_t nonzero = t;
  // Enforce the divisibility chain.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < nonzero; ++i)
      for (std::size_t j = i + 1; j < nonzero; ++j) {
        if (A(j, j) % A(i, i) == 0) continue;
        detail::rows_combine<Integer>(A, i, j, 1, 1, 0, 1);
        detail::rows_combine<Integer>(U, i, j, 1, 1, 0, 1);
        clear(i);
        changed = true;
      }
  }
  for (std::size_t i = 0; i < nonzero; ++i)
    if (A(i, i) < 0) {
      for (std::size_t j = 0; j < c; ++j) A(i, j) = -A(i, j);
      for (std::size_t j = 0; j < r; ++j) U(i, j) = -U(i, j);
    }
  return {std::move(U), std::move(A), std::move(V)};
}

/// Z^rows / (im M + m Z^rows) in invariant-factor form.
inline FinModule cokernel_mod_m(const IntMatrix& M, Residue m) {
  if (m < 2) throw InvalidInput("cokernel_mod_m: modulus must be at least 2");
  auto snf = smith_normal_form(M);
  std::vector<Residue> orders;
  for (std::size_t i = 0; i < M.rows(); ++i) {
    Integer d = i < M.cols() ? snf.D(i, i) : Integer(0);
    Integer g = boost::multiprecision::gcd(d, Integer(m));
    orders.push_back(static_cast<Residue>(g));
  }
  return FinModule::from_orders(m, orders);
}

// ---------------------------------------------------------------------------
// Smith normal form over Z/m

/// P*A*Q = D over Z/m. `ideal[i]` = gcd(D(i,i), m) (equal to m for zero
/// entries) and forms a divisibility chain over i < min(rows, cols).
struct ModSmith {
  Residue m = 1;
  ModMatrix P, Pinv, Q;
  Vec diag;
  Vec ideal;
};

enum SmithTrack : unsigned { kTrackNone = 0, kTrackP = 1, kTrackPinv = 2, kTrackQ = 4, kTrackAll = 7 };

namespace detail {

inline void mod_rows(ModMatrix& M, std::size_t a, std::size_t b, Residue s, Residue u, Residue v, Residue w, Residue m) {
  s = mod(s, m), u = mod(u, m), v = mod(v, m), w = mod(w, m);
  for (std::size_t c = 0; c < M.cols(); ++c) {
    Residue x = M(a, c), y = M(b, c);
    if (x == 0 && y == 0) continue;
    M(a, c) = (mul_mod(s, x, m) + mul_mod(u, y, m)) % m;
    M(b, c) = (mul_mod(v, x, m) + mul_mod(w, y, m)) % m;
  }
}

inline void mod_cols(ModMatrix& M, std::size_t a, std::size_t b, Residue s, Residue u, Residue v, Residue w, Residue m) {
  s = mod(s, m), u = mod(u, m), v = mod(v, m), w = mod(w, m);
  for (std::size_t r = 0; r < M.rows(); ++r) {
    Residue x = M(r, a), y = M(r, b);
    if (x == 0 && y == 0) continue;
    M(r, a) = (mul_mod(s, x, m) + mul_mod(u, y, m)) % m;
    M(r, b) = (mul_mod(v, x, m) + mul_mod(w, y, m)) % m;
  }
}

}  // namespace detail

inline ModSmith smith_mod(ModMatrix A, Residue m, unsigned track = kTrackAll) {
  const std::size_t r = A.rows(), c = A.cols();
  A = reduce(std::move(A), m);
  ModSmith out;
  out.m = m;
  if (track & kTrackP) out.P = ModMatrix::identity(r);
  if (track & kTrackPinv) out.Pinv = ModMatrix::identity(r);
  if (track & kTrackQ) out.Q = ModMatrix::identity(c);

  // Row transform [[s,u],[v,w]] on rows (a,b); its inverse [[w,-u],[-v,s]] acts on Pinv's columns.
  auto row_op = [&](std::size_t a, std::size_t b, Residue s, Residue u, Residue v, Residue w) {
    detail::mod_rows(A, a, b, s, u, v, w, m);
    if (track & kTrackP) detail::mod_rows(out.P, a, b, s, u, v, w, m);
    if (track & kTrackPinv) detail::mod_cols(out.Pinv, a, b, w, -v, -u, s, m);
  };
  auto col_op = [&](std::size_t a, std::size_t b, Residue s, Residue u, Residue v, Residue w) {
    detail::mod_cols(A, a, b, s, u, v, w, m);
    if (track & kTrackQ) detail::mod_cols(out.Q, a, b, s, u, v, w, m);
  };
  auto swap_rows = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    A.swap_rows(a, b);
    if (track & kTrackP) out.P.swap_rows(a, b);
    if (track & kTrackPinv) out.Pinv.swap_cols(a, b);
  };
  auto swap_cols = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    A.swap_cols(a, b);
    if (track & kTrackQ) out.Q.swap_cols(a, b);
  };

  auto clear = [&](std::size_t t) {
    for (bool again = true; again;) {
      again = false;
      for (std::size_t i = t + 1; i < r; ++i) {
        Residue b = A(i, t);
        if (b == 0) continue;
        Residue a = A(t, t);
        if (b % a == 0) {
          row_op(t, i, 1, 0, -(b / a), 1);
        } else {
          auto e = ext_gcd(a, b);
          row_op(t, i, e.s, e.t, -(b / e.g), a / e.g);
        }
      }
      for (std::size_t j = t + 1; j < c; ++j) {
        Residue b = A(t, j);
        if (b == 0) continue;
        Residue a = A(t, t);
        if (b % a == 0) {
          col_op(t, j, 1, 0, -(b / a), 1);
        } else {
          auto e = ext_gcd(a, b);
          col_op(t, j, e.s, e.t, -(b / e.g), a / e.g);
          again = true;
        }
      }
    }
  };

  const std::size_t k = std::min(r, c);
  std::size_t t = 0;
  for (; t < k; ++t) {
    std::size_t bi = r, bj = c;
    Residue best = m + 1;
    for (std::size_t i = t; i < r && best > 1; ++i)
      for (std::size_t j = t; j < c; ++j) {
        Residue x = A(i, j);
        if (!x) continue;
        Residue g = gcd(x, m);
        if (g < best) {
          best = g, bi = i, bj = j;
          if (g == 1) break;
        }
      }
    if (bi == r) break;
    swap_rows(t, bi);
    swap_cols(t, bj);
    clear(t);
  }
  auto ideal_at = [&](std::size_t i) { return A(i, i) == 0 ? m : gcd(A(i, i), m); };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        Residue gi = ideal_at(i), gj = ideal_at(j);
        if (gj % gi == 0) continue;
        if (A(i, i) == 0) {
          swap_rows(i, j);
          swap_cols(i, j);
        } else {
          row_op(i, j, 1, 1, 0, 1);
          clear(i);
        }
        changed = true;
      }
  }
  out.diag.resize(k);
  out.ideal.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.diag[i] = A(i, i), out.ideal[i] = ideal_at(i);
  return out;
}

/// Columns generating the kernel of A : (Z/m)^cols -> (Z/m)^rows.
inline ModMatrix kernel_mod(const ModMatrix& A, Residue m) {
  const std::size_t n = A.cols();
  auto s = smith_mod(A, m, kTrackQ);
  ModMatrix K(n, 0);
  std::vector<Vec> cols;
  for (std::size_t i = 0; i < n; ++i) {
    Residue scale = 1;
    if (i < s.ideal.size() && s.diag[i] != 0) {
      scale = m / s.ideal[i];
      if (scale % m == 0) continue;
    }
    Vec col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = mul_mod(s.Q(r, i), scale, m);
    if (!is_zero(col)) cols.push_back(std::move(col));
  }
  ModMatrix out(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t r = 0; r < n; ++r) out(r, j) = cols[j][r];
  return out;
}

/// Some x with A x = b over Z/m, or nullopt.
inline std::optional<Vec> solve_mod(const ModMatrix& A, const Vec& b, Residue m) {
  if (b.size() != A.rows()) throw InvalidInput("solve_mod: shape mismatch");
  auto s = smith_mod(A, m, kTrackP | kTrackQ);
  Vec c = apply_mod(s.P, reduce(b, m), m);
  Vec y(A.cols(), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i >= s.diag.size() || s.diag[i] == 0) {
      if (c[i] != 0) return std::nullopt;
      continue;
    }
    Residue g = s.ideal[i];
    if (c[i] % g != 0) return std::nullopt;
    Residue mg = m / g;
    y[i] = mg == 1 ? 0 : mul_mod((c[i] / g) % mg, inverse_mod(s.diag[i] / g, mg), mg);
  }
  return apply_mod(s.Q, y, m);
}

// ---------------------------------------------------------------------------
// Subquotients of free modules

/// S/T for submodules T ⊆ S ⊆ (Z/m)^n given by generating columns, in canonical form.
class Subquotient {
 public:
  Subquotient() = default;

  Subquotient(const ModMatrix& S, const ModMatrix& T, Residue m) : m_(m), n_(S.rows()), full_(false) {
    if (T.cols() && T.rows() != n_) throw InvalidInput("Subquotient: ambient mismatch");
    S_ = reduce(S, m);
    solver_ = smith_mod(S_, m, kTrackP | kTrackQ);
    build(T);
  }

  /// (Z/m)^n / T.
  static Subquotient quotient(std::size_t n, const ModMatrix& T, Residue m) {
    Subquotient q;
    q.m_ = m;
    q.n_ = n;
    q.full_ = true;
    q.S_ = ModMatrix::identity(n);
    if (T.cols() && T.rows() != n) throw InvalidInput("Subquotient: ambient mismatch");
    q.build(T);
    return q;
  }

  [[nodiscard]] const FinModule& module() const noexcept { return module_; }
  [[nodiscard]] Residue modulus() const noexcept { return m_; }
  [[nodiscard]] std::size_t ambient_dim() const noexcept { return n_; }
  /// n x k matrix; column i is an ambient representative of canonical generator i.
  [[nodiscard]] const ModMatrix& generators() const noexcept { return gens_; }
  [[nodiscard]] Vec generator(std::size_t i) const { return gens_.column(i); }

  [[nodiscard]] std::optional<Vec> try_coordinates(const Vec& v) const {
    auto x = solve_in_S(v);
    if (!x) return std::nullopt;
    Vec z = apply_mod(coord_, *x, m_);
    return module_.reduce(std::move(z));
  }

  /// Canonical coordinates of v, which must lie in S.
  [[nodiscard]] Vec coordinates(const Vec& v) const {
    auto z = try_coordinates(v);
    if (!z) throw InvalidInput("Subquotient: element outside the submodule");
    return *z;
  }

  /// Matrix of the coordinate map when S is the whole ambient module.
  [[nodiscard]] ModMatrix coordinate_matrix() const {
    if (!full_) throw InvalidInput("coordinate_matrix requires a quotient of a free module");
    ModMatrix out = coord_;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (auto& x : out.row(i)) x = mod(x, module_.order(i));
    return out;
  }

  [[nodiscard]] bool contains(const Vec& v) const { return solve_in_S(v).has_value(); }

 private:
  std::optional<Vec> solve_in_S(const Vec& v) const {
    if (v.size() != n_) throw InvalidInput("Subquotient: wrong ambient dimension");
    if (full_) return reduce(v, m_);
    const std::size_t s = S_.cols();
    Vec c = apply_mod(solver_.P, reduce(v, m_), m_);
    Vec y(s, 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i >= solver_.diag.size() || solver_.diag[i] == 0) {
        if (c[i] != 0) return std::nullopt;
        continue;
      }
      Residue g = solver_.ideal[i];
      if (c[i] % g != 0) return std::nullopt;
      Residue mg = m_ / g;
      y[i] = mg == 1 ? 0 : mul_mod((c[i] / g) % mg, inverse_mod(solver_.diag[i] / g, mg), mg);
    }
    return apply_mod(solver_.Q, y, m_);
  }

  void build(const ModMatrix& T) {
    const std::size_t s = S_.cols();
    // Preimage of T under (Z/m)^s -> S.
    ModMatrix B = T.cols() ? S_.hconcat(reduce(T, m_)) : S_;
    ModMatrix X;
    if (full_ && T.cols() == 0) {
      X = ModMatrix(s, 0);
    } else if (full_) {
      X = reduce(T, m_);
    } else {
      ModMatrix K = kernel_mod(B, m_);
      X = ModMatrix(s, K.cols());
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < K.cols(); ++j) X(i, j) = K(i, j);
    }
    auto snf = smith_mod(X, m_, kTrackP | kTrackPinv);
    std::vector<std::size_t> kept;
    std::vector<Residue> orders;
    for (std::size_t i = 0; i < s; ++i) {
      Residue g = i < snf.ideal.size() ? snf.ideal[i] : m_;
      if (g == 1) continue;
      kept.push_back(i);
      orders.push_back(g);
    }
    module_ = FinModule::from_chain(m_, orders);
    coord_ = ModMatrix(kept.size(), s);
    ModMatrix lift(s, kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      for (std::size_t j = 0; j < s; ++j) coord_(k, j) = snf.P(kept[k], j);
      for (std::size_t i = 0; i < s; ++i) lift(i, k) = snf.Pinv(i, kept[k]);
    }
    gens_ = full_ ? lift : mul_mod(S_, lift, m_);
  }

  Residue m_ = 1;
  std::size_t n_ = 0;
  bool full_ = true;
  ModMatrix S_;
  ModSmith solver_;
  ModMatrix coord_;
  ModMatrix gens_;
  FinModule module_;
};

// ---------------------------------------------------------------------------
// Maps and complexes

/// Homomorphism between FinModules, acting on canonical coordinates.
struct ModuleMap {
  FinModule source;
  FinModule target;
  ModMatrix matrix;  // target.rank() x source.rank()

  [[nodiscard]] Vec apply(const Vec& x) const {
    return target.reduce(apply_mod(matrix, x, target.modulus()));
  }

  /// True iff the matrix respects the relations of the source.
  [[nodiscard]] bool well_defined() const {
    if (matrix.rows() != target.rank() || matrix.cols() != source.rank()) return false;
    const Residue m = target.modulus();
    for (std::size_t j = 0; j < source.rank(); ++j)
      for (std::size_t i = 0; i < target.rank(); ++i)
        if (mul_mod(source.order(j), matrix(i, j), m) % target.order(i) != 0) return false;
    return true;
  }

  static ModuleMap identity(const FinModule& M) { return {M, M, ModMatrix::identity(M.rank())}; }
  static ModuleMap zero(const FinModule& S, const FinModule& T) { return {S, T, ModMatrix(T.rank(), S.rank())}; }
};

inline ModuleMap compose(const ModuleMap& g, const ModuleMap& f) {
  if (!(f.target == g.source)) throw InvalidInput("compose: modules do not match");
  ModMatrix M = mul_mod(g.matrix, f.matrix, g.target.modulus());
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (auto& x : M.row(i)) x = mod(x, g.target.order(i));
  return {f.source, g.target, std::move(M)};
}

/// Kernel of f as a subquotient of (Z/m)^{rank source}.
inline Subquotient kernel_of(const ModuleMap& f) {
  const Residue m = f.source.modulus();
  ModMatrix B = f.matrix.hconcat(relation_matrix(f.target));
  if (B.rows() == 0) B = ModMatrix(0, f.source.rank());
  ModMatrix K = kernel_mod(B, m);
  ModMatrix Z(f.source.rank(), K.cols());
  for (std::size_t i = 0; i < Z.rows(); ++i)
    for (std::size_t j = 0; j < K.cols(); ++j) Z(i, j) = K(i, j);
  if (f.target.rank() == 0) Z = ModMatrix::identity(f.source.rank());
  return Subquotient(Z, relation_matrix(f.source), m);
}

inline Subquotient cokernel_of(const ModuleMap& f) {
  return Subquotient::quotient(f.target.rank(), f.matrix.hconcat(relation_matrix(f.target)), f.target.modulus());
}

inline Subquotient image_of(const ModuleMap& f) {
  const std::size_t n = f.target.rank();
  ModMatrix R = relation_matrix(f.target);
  ModMatrix S = f.matrix.cols() ? f.matrix.hconcat(R) : R;
  if (S.rows() == 0) S = ModMatrix(n, 0);
  return Subquotient(S, R, f.target.modulus());
}

inline bool is_isomorphism(const ModuleMap& f) {
  return kernel_of(f).module().is_zero() && cokernel_of(f).module().is_zero();
}

/// Some x in the source with A(x) = b, or nullopt when none exists.
inline std::optional<Vec> solve_linear(const ModuleMap& A, const Vec& b) {
  const Residue m = A.target.modulus();
  ModMatrix B = A.matrix.hconcat(relation_matrix(A.target));
  if (B.rows() == 0) return A.source.zero_element();
  auto x = solve_mod(B, A.target.reduce(b), m);
  if (!x) return std::nullopt;
  Vec out(x->begin(), x->begin() + static_cast<std::ptrdiff_t>(A.source.rank()));
  return A.source.reduce(std::move(out));
}

/// Submodule of M generated by the columns of G (canonical coordinates).
inline Subquotient submodule_of(const FinModule& M, const ModMatrix& G) {
  ModMatrix R = relation_matrix(M);
  ModMatrix S = G.cols() ? G.hconcat(R) : R;
  if (S.rows() == 0) S = ModMatrix(M.rank(), 0);
  return Subquotient(S, R, M.modulus());
}

/// M modulo the submodule generated by the columns of G.
inline Subquotient quotient_of(const FinModule& M, const ModMatrix& G) {
  ModMatrix R = relation_matrix(M);
  ModMatrix S = G.cols() ? G.hconcat(R) : R;
  if (S.rows() == 0) S = ModMatrix(M.rank(), 0);
  return Subquotient::quotient(M.rank(), S, M.modulus());
}

/// Generators of U ∩ V for submodules of (Z/m)^n given by generating columns.
inline ModMatrix intersect(const ModMatrix& U, const ModMatrix& V, Residue m) {
  const std::size_t n = U.rows();
  if (U.cols() == 0 || V.cols() == 0) return ModMatrix(n, 0);
  ModMatrix B = U.hconcat(V);
  ModMatrix K = kernel_mod(B, m);
  ModMatrix top(U.cols(), K.cols());
  for (std::size_t i = 0; i < U.cols(); ++i)
    for (std::size_t j = 0; j < K.cols(); ++j) top(i, j) = K(i, j);
  return mul_mod(U, top, m);
}

/// Bounded cochain complex: differentials[k] maps terms[k] to terms[k+1];
/// terms[0] sits at position `lowest`.
struct BoundedComplex {
  Residue modulus = 2;
  int lowest = 0;
  std::vector<FinModule> terms;
  std::vector<ModMatrix> differentials;  // size terms.size() - 1

  [[nodiscard]] int highest() const { return lowest + static_cast<int>(terms.size()) - 1; }

  [[nodiscard]] const FinModule* term_at(int position) const {
    int idx = position - lowest;
    if (idx < 0 || idx >= static_cast<int>(terms.size())) return nullptr;
    return &terms[idx];
  }

  /// Empty string when well formed with d∘d = 0; otherwise a description.
  [[nodiscard]] std::string check() const {
    if (terms.size() && differentials.size() + 1 != terms.size()) return "differential count mismatch";
    for (std::size_t k = 0; k < differentials.size(); ++k) {
      ModuleMap d{terms[k], terms[k + 1], differentials[k]};
      if (!d.well_defined()) return "differential " + std::to_string(lowest + static_cast<int>(k)) + " not well defined";
      if (k + 1 < differentials.size()) {
        ModuleMap e{terms[k + 1], terms[k + 2], differentials[k + 1]};
        ModuleMap dd = compose(e, d);
        for (std::size_t i = 0; i < dd.matrix.rows(); ++i)
          for (auto x : dd.matrix.row(i))
            if (x) return "d∘d != 0 at position " + std::to_string(lowest + static_cast<int>(k));
      }
    }
    return {};
  }
};

struct Homology {
  int position = 0;
  Subquotient data;  // cycles / boundaries inside the canonical coordinates of the term

  [[nodiscard]] const FinModule& module() const { return data.module(); }
  /// Homology coordinates of a cycle.
  [[nodiscard]] Vec lift(const Vec& cycle) const { return data.coordinates(cycle); }
  /// Representative cycles of the canonical homology generators.
  [[nodiscard]] std::vector<Vec> representatives() const {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < data.module().rank(); ++i) out.push_back(data.generator(i));
    return out;
  }
};

/// Relations m_i e_i of (Z/m)^n presented with explicit coordinate orders.
inline ModMatrix diagonal_relations(const std::vector<Residue>& orders, Residue m) {
  std::size_t torsion = 0;
  for (auto o : orders) torsion += o != m;
  ModMatrix R(orders.size(), torsion);
  for (std::size_t i = 0, c = 0; i < orders.size(); ++i)
    if (orders[i] != m) R(i, c++) = orders[i];
  return R;
}

/// ker(d_out)/im(d_in) on (Z/m)^n modulo the columns of R_here; d_out lands in a
/// module presented by R_next. Empty d_in / d_out stand for zero maps.
inline Subquotient homology_of(std::size_t n, const ModMatrix& d_in, const ModMatrix& R_here, const ModMatrix& d_out,
                               const ModMatrix& R_next, Residue m) {
  if (n == 0) return Subquotient::quotient(0, ModMatrix(0, 0), m);
  ModMatrix Z;
  if (d_out.rows() > 0) {
    ModMatrix B = R_next.cols() ? d_out.hconcat(R_next) : d_out;
    ModMatrix K = kernel_mod(B, m);
    Z = ModMatrix(n, K.cols());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < K.cols(); ++j) Z(i, j) = K(i, j);
  } else {
    Z = ModMatrix::identity(n);
  }
  ModMatrix Bd = R_here.cols() ? R_here : ModMatrix(n, 0);
  if (d_in.cols() > 0) Bd = Bd.cols() ? d_in.hconcat(Bd) : d_in;
  if (Z.cols() == n && Z == ModMatrix::identity(n)) return Subquotient::quotient(n, Bd, m);
  return Subquotient(Z, Bd, m);
}

/// ker(d_k)/im(d_{k-1}); positions outside the complex give the zero module.
inline Homology homology_at(const BoundedComplex& C, int position) {
  const Residue m = C.modulus;
  const FinModule* here = C.term_at(position);
  if (!here) return {position, Subquotient::quotient(0, ModMatrix(0, 0), m)};
  const std::size_t idx = static_cast<std::size_t>(position - C.lowest);
  const std::size_t n = here->rank();
  ModMatrix d_in(n, 0), d_out(0, n), R_next(0, 0);
  if (idx > 0 && C.terms[idx - 1].rank() > 0) d_in = C.differentials[idx - 1];
  if (idx + 1 < C.terms.size() && C.terms[idx + 1].rank() > 0) {
    d_out = C.differentials[idx];
    R_next = relation_matrix(C.terms[idx + 1]);
  }
  return {position, homology_of(n, d_in, relation_matrix(*here), d_out, R_next, m)};
}

}  // namespace koszul::exactla
