#pragma once

// Bar, cobar and Koszul complexes, their bigraded homology, lattice
// distributivity and Koszulity verdicts.

#include <array>
#include <bit>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "koszul/quadra.hpp"

namespace koszul::homcheck {

using bigring::BigGradedRing;
using bigring::BigRing;
using bigring::Bimodule;
using bigring::RingPtr;
using bigring::Side;
using bigring::TensorProduct;
using bigring::Word;
using bigring::WordVec;
using exactla::FinModule;
using exactla::ModMatrix;
using exactla::Residue;
using exactla::Subquotient;
using exactla::Vec;
using quadra::GradedCoring;

// ---------------------------------------------------------------------------
// Complexes

enum class Kind { bar, cobar, koszul_left, koszul_right };

/// Direct sum of tensor blocks with concatenated canonical coordinates.
/// Block keys list the factors: i > 0 stands for A_i, i < 0 for C_i, {0} for the base.
struct Term {
  std::vector<std::vector<int>> keys;
  std::vector<std::shared_ptr<const TensorProduct>> blocks;
  std::vector<std::size_t> offsets;
  std::vector<Residue> orders;

  [[nodiscard]] std::size_t dim() const { return orders.size(); }
  [[nodiscard]] int block_of(const std::vector<int>& key) const {
    for (std::size_t b = 0; b < keys.size(); ++b)
      if (keys[b] == key) return static_cast<int>(b);
    return -1;
  }
};

/// One internal weight of a complex on the end pair (s,t), in cochain form:
/// differentials[k] maps terms[k] (at position lowest + k) to terms[k + 1].
struct Piece {
  int weight = 0;
  std::size_t s = 0, t = 0;
  int lowest = 0;
  Residue modulus = 2;
  std::vector<Term> terms;
  std::vector<ModMatrix> differentials;

  [[nodiscard]] int highest() const { return lowest + static_cast<int>(terms.size()) - 1; }
  [[nodiscard]] const Term* term_at(int position) const {
    int idx = position - lowest;
    if (idx < 0 || idx >= static_cast<int>(terms.size())) return nullptr;
    return &terms[static_cast<std::size_t>(idx)];
  }

  /// Cycles modulo boundaries at a position, inside the term coordinates.
  [[nodiscard]] Subquotient homology(int position) const {
    const Term* here = term_at(position);
    if (!here) return Subquotient::quotient(0, ModMatrix(0, 0), modulus);
    const auto idx = static_cast<std::size_t>(position - lowest);
    const std::size_t n = here->dim();
    ModMatrix d_in(n, 0), d_out(0, n), R_next(0, 0);
    if (idx > 0 && terms[idx - 1].dim()) d_in = differentials[idx - 1];
    if (idx + 1 < terms.size() && terms[idx + 1].dim()) {
      d_out = differentials[idx];
      R_next = exactla::diagonal_relations(terms[idx + 1].orders, modulus);
    }
    return exactla::homology_of(n, d_in, exactla::diagonal_relations(here->orders, modulus), d_out, R_next, modulus);
  }

  /// Empty when d∘d = 0 on generators; otherwise the offending position.
  [[nodiscard]] std::string check() const {
    for (std::size_t k = 0; k + 1 < differentials.size(); ++k) {
      if (!terms[k].dim() || !terms[k + 2].dim()) continue;
      ModMatrix dd = exactla::mul_mod(differentials[k + 1], differentials[k], modulus);
      for (std::size_t i = 0; i < dd.rows(); ++i)
        for (auto x : dd.row(i))
          if (x % terms[k + 2].orders[i]) return "d∘d != 0 at position " + std::to_string(lowest + static_cast<int>(k));
    }
    return {};
  }
};

/// All pieces of a complex up to a maximal internal weight.
struct ComplexFamily {
  Kind kind = Kind::bar;
  int max_weight = 0;
  Residue modulus = 2;
  std::size_t object_count = 1;
  std::vector<Piece> pieces;

  [[nodiscard]] const Piece& piece(int w, std::size_t s, std::size_t t) const {
    for (const auto& p : pieces)
      if (p.weight == w && p.s == s && p.t == t) return p;
    throw InvalidInput("no piece of that weight in the family");
  }

  /// (cohomological or homological degree n, internal degree i) of a position in weight w.
  [[nodiscard]] std::pair<int, int> bidegree(int position, int w) const {
    if (kind == Kind::cobar) return {position, -w};
    return {-position, w};
  }
  [[nodiscard]] int position_of(int n) const { return kind == Kind::cobar ? n : -n; }
  [[nodiscard]] int weight_of(int i) const { return kind == Kind::cobar ? -i : i; }
  /// Entries on the diagonal are allowed to be nonzero by the Koszul criteria.
  [[nodiscard]] bool on_diagonal(int n, int i) const {
    switch (kind) {
      case Kind::cobar: return n == -i;
      case Kind::bar: return n == i;
      default: return i == 0;
    }
  }
};

namespace detail {

inline Vec unit_vec(std::size_t n, std::size_t i) {
  Vec v(n, 0);
  v[i] = 1;
  return v;
}

inline std::vector<std::vector<int>> compositions(int w, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int left, int parts) {
    if (parts == 0) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (int a = 1; a <= left - (parts - 1); ++a) {
      cur.push_back(a);
      rec(left - a, parts - 1);
      cur.pop_back();
    }
  };
  rec(w, n);
  return out;
}

inline Word single(std::size_t a, std::size_t b, std::size_t g) {
  return Word{{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)}, {static_cast<std::uint32_t>(g)}};
}

/// Builds blocks and assembles differentials for one family.
class Builder {
 public:
  using Factor = std::function<std::shared_ptr<const Bimodule>(int)>;

  Builder(Residue m, std::size_t k, Factor factor) : m_(m), k_(k), factor_(std::move(factor)) {}

  std::shared_ptr<const TensorProduct> block(const std::vector<int>& key) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<const Bimodule*> fs;
    for (int x : key) {
      auto b = factor_(x);
      owned_.push_back(b);
      fs.push_back(b.get());
    }
    auto T = std::make_shared<const TensorProduct>(fs);
    cache_[key] = T;
    return T;
  }

  Term term(const std::vector<std::vector<int>>& keys, std::size_t s, std::size_t t, std::size_t budget) {
    Term out;
    for (const auto& key : keys) {
      auto T = block(key);
      const FinModule& M = T->component(s, t);
      if (!M.rank()) continue;
      out.keys.push_back(key);
      out.blocks.push_back(T);
      out.offsets.push_back(out.orders.size());
      for (auto o : M.factors()) out.orders.push_back(o);
    }
    if (out.dim() > budget) throw BudgetExceeded("complex term of dimension " + std::to_string(out.dim()) +
                                                 " exceeds the configured budget");
    return out;
  }

  /// Matrix of a map given by images of each block generator as (target key, word combination) pairs.
  template <class F>
  ModMatrix assemble(const Term& src, const Term& dst, std::size_t s, std::size_t t, F&& images) {
    ModMatrix D(dst.dim(), src.dim());
    for (std::size_t b = 0; b < src.keys.size(); ++b) {
      const TensorProduct& T = *src.blocks[b];
      const std::size_t r = T.component(s, t).rank();
      for (std::size_t g = 0; g < r; ++g) {
        std::map<std::vector<int>, WordVec> out;
        for (const auto& [c, w] : T.lift_words(s, t, unit_vec(r, g))) images(src.keys[b], c, w, out);
        for (const auto& [key, wv] : out) {
          int tb = dst.block_of(key);
          if (tb < 0 || wv.empty()) continue;
          Vec y = dst.blocks[static_cast<std::size_t>(tb)]->coordinates(s, t, wv);
          for (std::size_t i = 0; i < y.size(); ++i) {
            const std::size_t row = dst.offsets[static_cast<std::size_t>(tb)] + i;
            D(row, src.offsets[b] + g) = exactla::mod(D(row, src.offsets[b] + g) + y[i], dst.orders[row]);
          }
        }
      }
    }
    return D;
  }

  Residue modulus() const { return m_; }

 private:
  Residue m_;
  std::size_t k_;
  Factor factor_;
  std::map<std::vector<int>, std::shared_ptr<const TensorProduct>> cache_;
  std::vector<std::shared_ptr<const Bimodule>> owned_;
};

inline void append(WordVec& v, Residue c, Word w, Residue m) {
  c = exactla::mod(c, m);
  if (c) v.emplace_back(c, std::move(w));
}

}  // namespace detail

struct ComplexOptions {
  std::size_t max_term_dim = 6000;
  int min_weight = 0;
};

/// Reduced bar complex R ← A₊ ← A₊ ⊗ A₊ ← ..., internal weights ≤ d; homological degree n sits at position -n.
inline ComplexFamily bar_complex(const BigGradedRing& A, int d, const ComplexOptions& opt = {}) {
  if (d > A.max_degree()) throw InvalidInput("bar complex: ring truncated below the requested weight");
  const Residue m = A.modulus();
  const std::size_t k = A.object_count();
  auto base = std::make_shared<const BigRing>(A.base());
  std::map<int, std::shared_ptr<const Bimodule>> parts;
  detail::Builder B(m, k, [&](int i) {
    auto& p = parts[i];
    if (!p) p = std::make_shared<const Bimodule>(Bimodule::of_component(A, i, base));
    return p;
  });
  ComplexFamily F{Kind::bar, d, m, k, {}};
  for (int w = opt.min_weight; w <= d; ++w)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        Piece P;
        P.weight = w;
        P.s = s;
        P.t = t;
        P.modulus = m;
        if (w == 0) {
          P.lowest = 0;
          P.terms.push_back(B.term({{0}}, s, t, opt.max_term_dim));
          F.pieces.push_back(std::move(P));
          continue;
        }
        P.lowest = -w;
        for (int n = w; n >= 1; --n) P.terms.push_back(B.term(detail::compositions(w, n), s, t, opt.max_term_dim));
        for (int n = w; n >= 2; --n) {
          const Term& src = P.terms[static_cast<std::size_t>(w - n)];
          const Term& dst = P.terms[static_cast<std::size_t>(w - n + 1)];
          P.differentials.push_back(B.assemble(src, dst, s, t, [&](const std::vector<int>& key, Residue c, const Word& wd,
                                                                   std::map<std::vector<int>, WordVec>& out) {
            for (std::size_t j = 0; j + 1 < key.size(); ++j) {
              Vec prod = A.multiply_gens(key[j], wd.objs[j], wd.objs[j + 1], wd.gens[j], key[j + 1], wd.objs[j + 2],
                                         wd.gens[j + 1]);
              std::vector<int> nk(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(j));
              nk.push_back(key[j] + key[j + 1]);
              nk.insert(nk.end(), key.begin() + static_cast<std::ptrdiff_t>(j) + 2, key.end());
              const Residue sign = j % 2 ? 1 : -1;
              for (std::size_t x = 0; x < prod.size(); ++x) {
                if (!prod[x]) continue;
                Word y;
                y.objs.assign(wd.objs.begin(), wd.objs.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                y.objs.insert(y.objs.end(), wd.objs.begin() + static_cast<std::ptrdiff_t>(j) + 2, wd.objs.end());
                y.gens.assign(wd.gens.begin(), wd.gens.begin() + static_cast<std::ptrdiff_t>(j));
                y.gens.push_back(static_cast<std::uint32_t>(x));
                y.gens.insert(y.gens.end(), wd.gens.begin() + static_cast<std::ptrdiff_t>(j) + 2, wd.gens.end());
                detail::append(out[nk], sign * exactla::mul_mod(c, prod[x], m), std::move(y), m);
              }
            }
          }));
        }
        F.pieces.push_back(std::move(P));
      }
  return F;
}

/// Reduced cobar complex R → C₊ → C₊ ⊗ C₊ → ..., weights ≤ d; cohomological degree n sits at position n.
inline ComplexFamily cobar_complex(const GradedCoring& C, int d, const ComplexOptions& opt = {}) {
  if (d > C.max_degree()) throw InvalidInput("cobar complex: coring truncated below the requested weight");
  const Residue m = C.modulus();
  const std::size_t k = C.object_count();
  auto unit = std::make_shared<const Bimodule>(Bimodule::unit(C.base()));
  detail::Builder B(m, k, [&](int i) { return i == 0 ? unit : C.component_ptr(-i); });
  ComplexFamily F{Kind::cobar, d, m, k, {}};
  auto negate = [](std::vector<int> v) {
    for (auto& x : v) x = -x;
    return v;
  };
  for (int w = opt.min_weight; w <= d; ++w)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        Piece P;
        P.weight = w;
        P.s = s;
        P.t = t;
        P.modulus = m;
        if (w == 0) {
          P.lowest = 0;
          P.terms.push_back(B.term({{0}}, s, t, opt.max_term_dim));
          F.pieces.push_back(std::move(P));
          continue;
        }
        P.lowest = 1;
        for (int n = 1; n <= w; ++n) {
          std::vector<std::vector<int>> keys;
          for (auto& c : detail::compositions(w, n)) keys.push_back(negate(c));
          P.terms.push_back(B.term(keys, s, t, opt.max_term_dim));
        }
        for (int n = 1; n < w; ++n) {
          const Term& src = P.terms[static_cast<std::size_t>(n - 1)];
          const Term& dst = P.terms[static_cast<std::size_t>(n)];
          P.differentials.push_back(B.assemble(src, dst, s, t, [&](const std::vector<int>& key, Residue c, const Word& wd,
                                                                   std::map<std::vector<int>, WordVec>& out) {
            for (std::size_t j = 0; j < key.size(); ++j) {
              const int deg = -key[j];
              const Residue sign = j % 2 ? -1 : 1;
              for (int a = 1; a < deg; ++a) {
                std::vector<int> nk(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(j));
                nk.push_back(-a);
                nk.push_back(-(deg - a));
                nk.insert(nk.end(), key.begin() + static_cast<std::ptrdiff_t>(j) + 1, key.end());
                WordVec one{{c, wd}};
                WordVec split = quadra::detail::substitute(
                    one, j,
                    [&](std::size_t x, std::size_t y, std::uint32_t g) { return C.comultiply_words(a, deg - a, x, y, g); },
                    m);
                for (auto& [e, y] : split) detail::append(out[nk], sign * e, std::move(y), m);
              }
            }
          }));
        }
        F.pieces.push_back(std::move(P));
      }
  return F;
}

/// The degree ≤ 2 compatibility needed to pair A with C: C_{-1} = A_1 and Δ(C_{-2}) ⊆ ker(A_1 ⊗ A_1 → A_2).
inline void check_pairing(const BigGradedRing& A, const GradedCoring& C) {
  const std::size_t k = A.object_count();
  if (A.object_count() != C.object_count() || A.modulus() != C.modulus())
    throw InvalidInput("duality mismatch in degrees <= 2: different objects or modulus");
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t)
      if (!(A.component(1, s, t) == C.component(1).component(s, t)))
        throw InvalidInput("duality mismatch in degrees <= 2: C_{-1} differs from A_1");
  if (C.max_degree() < 2 || A.max_degree() < 2) return;
  const Residue m = A.modulus();
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t g = 0; g < C.component(2).component(s, t).rank(); ++g) {
        Vec acc(A.component(2, s, t).rank(), 0);
        for (const auto& [c, w] : C.comultiply_words(1, 1, s, t, g)) {
          Vec p = A.multiply_gens(1, w.objs[0], w.objs[1], w.gens[0], 1, w.objs[2], w.gens[1]);
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = (acc[i] + exactla::mul_mod(c, p[i], m)) % m;
        }
        if (!exactla::is_zero(A.component(2, s, t).reduce(acc)))
          throw InvalidInput("duality mismatch in degrees <= 2: C_{-2} does not multiply to zero in A_2");
      }
}

/// A ⊗_R C (side left) or C ⊗_R A (side right) in weights 1..d: A_{w-j} ⊗ C_{-j} at position -j,
/// differential through Δ_{1,j-1} (resp. Δ_{j-1,1}) followed by multiplication.
inline ComplexFamily koszul_complex(const BigGradedRing& A, const GradedCoring& C, Side side, int d,
                                    const ComplexOptions& opt = {}) {
  if (d > A.max_degree() || d > C.max_degree()) throw InvalidInput("koszul complex: inputs truncated below d");
  check_pairing(A, C);
  const Residue m = A.modulus();
  const std::size_t k = A.object_count();
  auto base = C.base();
  std::map<int, std::shared_ptr<const Bimodule>> parts;
  detail::Builder B(m, k, [&](int i) -> std::shared_ptr<const Bimodule> {
    if (i < 0) return C.component_ptr(-i);
    auto& p = parts[i];
    if (!p) p = std::make_shared<const Bimodule>(Bimodule::of_component(A, i, base));
    return p;
  });
  const bool left = side == Side::left;
  auto key_of = [&](int w, int j) -> std::vector<int> {
    if (j == 0) return {w};
    if (j == w) return {-w};
    return left ? std::vector<int>{w - j, -j} : std::vector<int>{-j, w - j};
  };
  ComplexFamily F{left ? Kind::koszul_left : Kind::koszul_right, d, m, k, {}};
  for (int w = std::max(1, opt.min_weight); w <= d; ++w)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        Piece P;
        P.weight = w;
        P.s = s;
        P.t = t;
        P.modulus = m;
        P.lowest = -w;
        for (int j = w; j >= 0; --j) P.terms.push_back(B.term({key_of(w, j)}, s, t, opt.max_term_dim));
        for (int j = w; j >= 1; --j) {
          const Term& src = P.terms[static_cast<std::size_t>(w - j)];
          const Term& dst = P.terms[static_cast<std::size_t>(w - j + 1)];
          const std::vector<int> target = key_of(w, j - 1);
          P.differentials.push_back(B.assemble(src, dst, s, t, [&](const std::vector<int>&, Residue c, const Word& wd,
                                                                   std::map<std::vector<int>, WordVec>& out) {
            WordVec& acc = out[target];
            if (j == w) {
              // Pure coring factor: split off one degree-one letter.
              if (w == 1) {
                detail::append(acc, c, wd, m);
                return;
              }
              WordVec split = left ? C.comultiply_words(1, w - 1, wd.objs[0], wd.objs[1], wd.gens[0])
                                   : C.comultiply_words(w - 1, 1, wd.objs[0], wd.objs[1], wd.gens[0]);
              for (auto& [e, y] : split) detail::append(acc, exactla::mul_mod(c, e, m), y, m);
              return;
            }
            if (left) {
              // wd = (a in A_{w-j}) ⊗ (x in C_{-j})
              const std::size_t o0 = wd.objs[0], o1 = wd.objs[1], o2 = wd.objs[2];
              if (j == 1) {
                Vec p = A.multiply_gens(w - 1, o0, o1, wd.gens[0], 1, o2, wd.gens[1]);
                for (std::size_t x = 0; x < p.size(); ++x)
                  if (p[x]) detail::append(acc, exactla::mul_mod(c, p[x], m), detail::single(o0, o2, x), m);
                return;
              }
              for (const auto& [e, y] : C.comultiply_words(1, j - 1, o1, o2, wd.gens[1])) {
                const std::size_t mid = y.objs[1];
                Vec p = A.multiply_gens(w - j, o0, o1, wd.gens[0], 1, mid, y.gens[0]);
                for (std::size_t x = 0; x < p.size(); ++x)
                  if (p[x]) {
                    Word z{{static_cast<std::uint32_t>(o0), static_cast<std::uint32_t>(mid), static_cast<std::uint32_t>(o2)},
                           {static_cast<std::uint32_t>(x), y.gens[1]}};
                    detail::append(acc, exactla::mul_mod(exactla::mul_mod(c, e, m), p[x], m), std::move(z), m);
                  }
              }
            } else {
              // wd = (x in C_{-j}) ⊗ (a in A_{w-j})
              const std::size_t o0 = wd.objs[0], o1 = wd.objs[1], o2 = wd.objs[2];
              if (j == 1) {
                Vec p = A.multiply_gens(1, o0, o1, wd.gens[0], w - 1, o2, wd.gens[1]);
                for (std::size_t x = 0; x < p.size(); ++x)
                  if (p[x]) detail::append(acc, exactla::mul_mod(c, p[x], m), detail::single(o0, o2, x), m);
                return;
              }
              for (const auto& [e, y] : C.comultiply_words(j - 1, 1, o0, o1, wd.gens[0])) {
                const std::size_t mid = y.objs[1];
                Vec p = A.multiply_gens(1, mid, o1, y.gens[1], w - j, o2, wd.gens[1]);
                for (std::size_t x = 0; x < p.size(); ++x)
                  if (p[x]) {
                    Word z{{static_cast<std::uint32_t>(o0), static_cast<std::uint32_t>(mid), static_cast<std::uint32_t>(o2)},
                           {y.gens[0], static_cast<std::uint32_t>(x)}};
                    detail::append(acc, exactla::mul_mod(exactla::mul_mod(c, e, m), p[x], m), std::move(z), m);
                  }
              }
            }
          }));
        }
        F.pieces.push_back(std::move(P));
      }
  return F;
}

// ---------------------------------------------------------------------------
// Homology tables

/// Bigraded homology of a family over its weight window. Entries are direct sums over end pairs.
class BigradedHomologyTable {
 public:
  BigradedHomologyTable() = default;
  explicit BigradedHomologyTable(const ComplexFamily& F) : kind_(F.kind), max_weight_(F.max_weight) {
    for (const auto& P : F.pieces)
      for (int pos = P.lowest; pos <= P.highest(); ++pos) {
        auto key = F.bidegree(pos, P.weight);
        auto H = P.homology(pos);
        auto& e = entries_[key];
        std::vector<Residue> orders = e.factors();
        if (e.modulus() < 2) orders.clear();
        for (auto o : H.module().factors()) orders.push_back(o);
        e = FinModule::from_orders(F.modulus, orders);
      }
    modulus_ = F.modulus;
  }

  [[nodiscard]] int max_weight() const noexcept { return max_weight_; }
  [[nodiscard]] bool checked(int, int i) const { return std::abs(i) <= max_weight_; }
  [[nodiscard]] bool on_diagonal(int n, int i) const { return ComplexFamily{kind_, 0, 2, 1, {}}.on_diagonal(n, i); }

  /// The entry at (n, i); nullopt when (n, i) lies outside the window.
  [[nodiscard]] std::optional<FinModule> entry(int n, int i) const {
    if (!checked(n, i)) return std::nullopt;
    auto it = entries_.find({n, i});
    if (it == entries_.end()) return FinModule::zero(modulus_);
    return it->second;
  }
  [[nodiscard]] const std::map<std::pair<int, int>, FinModule>& entries() const noexcept { return entries_; }

  /// Tabular report: one line per nonzero entry, then the window.
  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    for (const auto& [key, M] : entries_)
      if (!M.is_zero()) os << "H " << key.first << " " << key.second << " " << M.to_string() << "\n";
    os << "window |i| <= " << max_weight_ << "; entries outside are unchecked\n";
    return os.str();
  }

 private:
  Kind kind_ = Kind::bar;
  int max_weight_ = 0;
  Residue modulus_ = 2;
  std::map<std::pair<int, int>, FinModule> entries_;
};

inline BigradedHomologyTable homology_table(const ComplexFamily& F) { return BigradedHomologyTable(F); }

// ---------------------------------------------------------------------------
// Lattice distributivity

struct LatticeCaps {
  std::size_t max_dim = 12;
  std::size_t max_subspaces = 6;
};

struct LatticeCertificate {
  bool distributive = false;
  ModMatrix basis;                                // distributing basis (columns) when distributive
  std::optional<std::array<ModMatrix, 3>> triple;  // X, Y, Z with (X + Y) ∩ Z != X ∩ Z + Y ∩ Z
  std::string detail;
};

namespace detail {

/// Incremental echelon form over Z/p.
class Echelon {
 public:
  Echelon(std::size_t n, Residue p) : n_(n), p_(p) {}
  /// Adds v; true when it was independent of the rows so far.
  bool insert(Vec v) {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      Residue f = v[pivots_[r]];
      if (!f) continue;
      for (std::size_t i = 0; i < n_; ++i)
        if (rows_[r][i]) v[i] = exactla::mod(v[i] - exactla::mul_mod(f, rows_[r][i], p_), p_);
    }
    std::size_t piv = 0;
    while (piv < n_ && v[piv] == 0) ++piv;
    if (piv == n_) return false;
    Residue inv = exactla::inverse_mod(v[piv], p_);
    for (auto& x : v) x = exactla::mul_mod(x, inv, p_);
    for (auto& row : rows_) {
      Residue f = row[piv];
      if (!f) continue;
      for (std::size_t i = 0; i < n_; ++i)
        if (v[i]) row[i] = exactla::mod(row[i] - exactla::mul_mod(f, v[i], p_), p_);
    }
    rows_.push_back(std::move(v));
    pivots_.push_back(piv);
    return true;
  }
  [[nodiscard]] std::size_t rank() const { return rows_.size(); }
  [[nodiscard]] const std::vector<Vec>& rows() const { return rows_; }

 private:
  std::size_t n_;
  Residue p_;
  std::vector<Vec> rows_;
  std::vector<std::size_t> pivots_;
};

inline std::vector<Vec> columns(const ModMatrix& M) {
  std::vector<Vec> out;
  for (std::size_t j = 0; j < M.cols(); ++j) out.push_back(M.column(j));
  return out;
}

inline ModMatrix from_columns(std::size_t n, const std::vector<Vec>& cols) {
  ModMatrix out(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) out(i, j) = cols[j][i];
  return out;
}

inline ModMatrix span(std::size_t n, const ModMatrix& M, Residue p) {
  Echelon E(n, p);
  for (auto& c : columns(M)) E.insert(c);
  return from_columns(n, E.rows());
}

inline std::size_t dim(std::size_t n, const ModMatrix& M, Residue p) { return span(n, M, p).cols(); }

inline ModMatrix sum(std::size_t n, const ModMatrix& X, const ModMatrix& Y, Residue p) {
  if (!X.cols()) return span(n, Y, p);
  if (!Y.cols()) return span(n, X, p);
  return span(n, X.hconcat(Y), p);
}

inline ModMatrix meet(std::size_t n, const ModMatrix& X, const ModMatrix& Y, Residue p) {
  if (!X.cols() || !Y.cols()) return ModMatrix(n, 0);
  return span(n, exactla::intersect(X, Y, p), p);
}

}  // namespace detail

/// Whether the lattice of subspaces generated by `subspaces` (columns span each one) is distributive.
/// Decided through the atoms A_S = ∩_{i∈S} X_i: the lattice is distributive iff choosing a complement
/// of Σ_{i∉S} A_{S∪{i}} inside every A_S yields a basis of V compatible with all X_i.
inline LatticeCertificate lattice_is_distributive(const FinModule& V, const std::vector<ModMatrix>& subspaces,
                                                  const LatticeCaps& caps = {}) {
  const Residue p = V.modulus();
  const std::size_t n = V.rank();
  if (!exactla::is_prime(p)) throw PreconditionFailed("lattice distributivity needs a prime modulus");
  if (!V.is_free()) throw InvalidInput("lattice distributivity needs a vector space");
  if (n > caps.max_dim) throw BudgetExceeded("lattice dimension " + std::to_string(n) + " exceeds the cap");
  if (subspaces.size() > caps.max_subspaces)
    throw BudgetExceeded(std::to_string(subspaces.size()) + " subspaces exceed the cap");
  const std::size_t r = subspaces.size();
  std::vector<ModMatrix> X;
  for (const auto& S : subspaces) {
    if (S.cols() && S.rows() != n) throw InvalidInput("subspace generators have the wrong length");
    X.push_back(S.cols() ? detail::span(n, S, p) : ModMatrix(n, 0));
  }
  const std::size_t full = std::size_t{1} << r;
  std::vector<ModMatrix> atoms(full);
  atoms[0] = ModMatrix::identity(n);
  for (std::size_t S = 1; S < full; ++S) {
    const std::size_t low = static_cast<std::size_t>(std::countr_zero(S));
    atoms[S] = detail::meet(n, atoms[S & (S - 1)], X[low], p);
  }
  std::vector<Vec> basis;
  std::vector<std::size_t> label;
  for (std::size_t S = 0; S < full; ++S) {
    detail::Echelon E(n, p);
    for (std::size_t i = 0; i < r; ++i)
      if (!(S >> i & 1))
        for (auto& c : detail::columns(atoms[S | std::size_t{1} << i])) E.insert(c);
    for (auto& c : detail::columns(atoms[S]))
      if (E.insert(c)) {
        basis.push_back(c);
        label.push_back(S);
      }
  }
  LatticeCertificate cert;
  bool ok = basis.size() == n;
  if (ok) {
    detail::Echelon E(n, p);
    for (auto& b : basis) ok &= E.insert(b);
  }
  for (std::size_t i = 0; ok && i < r; ++i) {
    std::vector<Vec> inside;
    for (std::size_t b = 0; b < basis.size(); ++b)
      if (label[b] >> i & 1) inside.push_back(basis[b]);
    ok = inside.size() == X[i].cols();
  }
  if (ok) {
    cert.distributive = true;
    cert.basis = detail::from_columns(n, basis);
    return cert;
  }
  // Search for a violating triple among the generators and their pairwise joins and meets.
  std::vector<ModMatrix> pool = X;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j) {
      pool.push_back(detail::sum(n, X[i], X[j], p));
      pool.push_back(detail::meet(n, X[i], X[j], p));
    }
  std::size_t tries = 0;
  for (std::size_t a = 0; a < pool.size() && tries < 20000; ++a)
    for (std::size_t b = a + 1; b < pool.size() && tries < 20000; ++b)
      for (std::size_t c = 0; c < pool.size() && tries < 20000; ++c, ++tries) {
        if (c == a || c == b) continue;
        auto lhs = detail::meet(n, detail::sum(n, pool[a], pool[b], p), pool[c], p);
        auto rhs = detail::sum(n, detail::meet(n, pool[a], pool[c], p), detail::meet(n, pool[b], pool[c], p), p);
        if (lhs.cols() != rhs.cols()) {
          cert.triple = std::array<ModMatrix, 3>{pool[a], pool[b], pool[c]};
          cert.detail = "(X+Y)∩Z has dimension " + std::to_string(lhs.cols()) + " but X∩Z+Y∩Z has dimension " +
                        std::to_string(rhs.cols());
          return cert;
        }
      }
  cert.detail = "no compatible basis exists";
  return cert;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class Method { cobar_diagonal, bar_diagonal, koszul_complex, lattice, matrix };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::cobar_diagonal: return "cobar-diagonal";
    case Method::bar_diagonal: return "bar-diagonal";
    case Method::koszul_complex: return "koszul-complex";
    case Method::lattice: return "lattice";
    case Method::matrix: return "matrix";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::cobar_diagonal, Method::bar_diagonal, Method::koszul_complex, Method::lattice, Method::matrix})
    if (method_name(m) == s) return m;
  throw InvalidInput("unknown method '" + s + "'");
}

struct Failure {
  int n = 0;
  int i = 0;
  FinModule witness;        // the nonzero homology entry on one end pair
  std::size_t s = 0, t = 0;
  std::vector<Vec> cycles;  // representatives of its canonical generators
  std::string detail;
};

struct KoszulVerdict {
  Method method = Method::bar_diagonal;
  int checked_up_to = 0;
  bool koszul = true;
  bool inconclusive = false;
  std::optional<Failure> failure;
  std::string detail;

  [[nodiscard]] std::string to_string() const {
    if (inconclusive) return "inconclusive-up-to-" + std::to_string(checked_up_to);
    if (koszul) return "koszul-up-to-" + std::to_string(checked_up_to);
    if (failure) return "failed-at(" + std::to_string(failure->n) + "," + std::to_string(failure->i) + ")";
    return "failed";
  }
};

struct VerdictOptions {
  ComplexOptions complex;
  LatticeCaps lattice{4096, 8};
  Side koszul_side = Side::left;
};

namespace detail {

/// First nonzero homology off the diagonal, scanning weights upwards.
inline std::optional<Failure> first_off_diagonal(const ComplexFamily& F) {
  std::vector<const Piece*> order;
  for (const auto& P : F.pieces) order.push_back(&P);
  std::stable_sort(order.begin(), order.end(), [](const Piece* a, const Piece* b) { return a->weight < b->weight; });
  for (const Piece* P : order)
    for (int pos = P->lowest; pos <= P->highest(); ++pos) {
      auto [n, i] = F.bidegree(pos, P->weight);
      if (F.on_diagonal(n, i)) continue;
      auto H = P->homology(pos);
      if (H.module().is_zero()) continue;
      Failure f;
      f.n = n;
      f.i = i;
      f.witness = H.module();
      f.s = P->s;
      f.t = P->t;
      for (std::size_t g = 0; g < H.module().rank(); ++g) f.cycles.push_back(H.generator(g));
      return f;
    }
  return std::nullopt;
}

inline void require_flat_ring(const BigGradedRing& A, int d) {
  bool left = true, right = true;
  for (int n = 1; n <= std::min(d, A.max_degree()); ++n) {
    auto K = Bimodule::of_component(A, n);
    left = left && bigring::is_flat(K, Side::left);
    right = right && bigring::is_flat(K, Side::right);
  }
  if (!left && !right)
    throw PreconditionFailed("flatness fails: neither all left nor all right A_0-modules A_n (1 <= n <= " +
                             std::to_string(d) + ") are flat");
}

inline void require_flat_coring(const GradedCoring& C, int d) {
  bool left = true, right = true;
  for (int n = 1; n <= std::min(d, C.max_degree()); ++n) {
    left = left && bigring::is_flat(C.component(n), Side::left);
    right = right && bigring::is_flat(C.component(n), Side::right);
  }
  if (!left && !right)
    throw PreconditionFailed("flatness fails: neither all left nor all right R-modules C_{-n} (1 <= n <= " +
                             std::to_string(d) + ") are flat");
}

inline KoszulVerdict from_family(Method method, int d, const ComplexFamily& F) {
  KoszulVerdict v;
  v.method = method;
  v.checked_up_to = d;
  if (auto f = first_off_diagonal(F)) {
    v.koszul = false;
    v.failure = std::move(f);
  }
  return v;
}

/// Witness for a quadraticity failure: bar homology at (1, k) or (2, k).
inline KoszulVerdict nonquadratic(Method method, int d, const BigGradedRing& A, const quadra::QuadraticityReport& q,
                                  const ComplexOptions& opt) {
  KoszulVerdict v;
  v.method = method;
  v.checked_up_to = d;
  v.koszul = false;
  v.detail = q.detail;
  ComplexOptions o = opt;
  o.min_weight = q.failing_degree;
  auto F = bar_complex(A, q.failing_degree, o);
  const int n = q.generation_failure ? 1 : 2;
  for (const auto& P : F.pieces) {
    auto H = P.homology(-n);
    if (H.module().is_zero()) continue;
    Failure f;
    f.n = n;
    f.i = q.failing_degree;
    f.witness = H.module();
    f.s = P.s;
    f.t = P.t;
    for (std::size_t g = 0; g < H.module().rank(); ++g) f.cycles.push_back(H.generator(g));
    f.detail = q.detail;
    v.failure = std::move(f);
    break;
  }
  return v;
}

/// Lattice condition on a presentation for tensor degrees 3..d.
inline KoszulVerdict lattice_verdict(const quadra::QuadraticPresentation& P, int d, const VerdictOptions& opt,
                                     const std::function<GradedCoring()>& dual) {
  KoszulVerdict v;
  v.method = Method::lattice;
  v.checked_up_to = d;
  const std::size_t k = P.object_count();
  quadra::TensorPowers pow(P.A1, std::max(d, 1));
  for (int mm = 3; mm <= d; ++mm)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        const FinModule& V = pow.power(mm).component(s, t);
        if (!V.rank()) continue;
        std::vector<ModMatrix> subs;
        for (int j = 1; j < mm; ++j) subs.push_back(quadra::relation_span(P, pow, mm, j, s, t));
        auto cert = lattice_is_distributive(V, subs, opt.lattice);
        if (cert.distributive) continue;
        v.koszul = false;
        v.detail = "lattice in A1^{⊗" + std::to_string(mm) + "} not distributive: " + cert.detail;
        ComplexOptions o = opt.complex;
        o.min_weight = mm;
        auto F = cobar_complex(dual(), mm, o);
        auto f = first_off_diagonal(F);
        if (f) {
          f->detail = v.detail;
          v.failure = std::move(f);
        }
        return v;
      }
  return v;
}

}  // namespace detail

namespace detail {

inline KoszulVerdict ring_verdict(const BigGradedRing& A, Method method, int d, const VerdictOptions& opt,
                                  std::optional<ComplexFamily>* keep) {
  auto judge = [&](ComplexFamily F) {
    auto v = from_family(method, d, F);
    if (keep) *keep = std::move(F);
    return v;
  };
  if (d > A.max_degree()) throw InvalidInput("verdict degree exceeds the truncation of the ring");
  if (method == Method::matrix) throw InvalidInput("the matrix method is provided by matrixcrit::matrix_koszulity_check");
  if (method == Method::lattice && !exactla::is_prime(A.modulus()))
    throw PreconditionFailed("prime field required: the lattice method needs a prime modulus");
  require_flat_ring(A, d);
  if (method == Method::bar_diagonal) return judge(bar_complex(A, d, opt.complex));
  if (d >= 2) {
    auto q = quadra::is_quadratic_up_to(A, d);
    if (!q.quadratic) return nonquadratic(method, d, A, q, opt.complex);
  }
  if (d < 2) {
    KoszulVerdict v;
    v.method = method;
    v.checked_up_to = d;
    return v;
  }
  auto P = quadra::relations_of(A);
  if (method == Method::lattice)
    return lattice_verdict(P, d, opt, [&] { return quadra::quadratic_dual_coring(P, d); });
  GradedCoring C = quadra::quadratic_dual_coring(P, d);
  if (method == Method::cobar_diagonal) return judge(cobar_complex(C, d, opt.complex));
  return judge(koszul_complex(A, C, opt.koszul_side, d, opt.complex));
}

}  // namespace detail

/// Verdict for a ring by the bar, cobar, Koszul-complex or lattice criterion, up to internal degree d.
inline KoszulVerdict koszul_verdict(const BigGradedRing& A, Method method, int d, const VerdictOptions& opt = {}) {
  return detail::ring_verdict(A, method, d, opt, nullptr);
}

/// A verdict with the homology table of the complex it was read from; the
/// lattice method and the quadraticity shortcut produce no table.
struct KoszulReport {
  KoszulVerdict verdict;
  std::optional<BigradedHomologyTable> table;
};

inline KoszulReport koszul_report(const BigGradedRing& A, Method method, int d, const VerdictOptions& opt = {}) {
  std::optional<ComplexFamily> F;
  KoszulReport r{detail::ring_verdict(A, method, d, opt, &F), std::nullopt};
  if (F) r.table = homology_table(*F);
  return r;
}

/// Verdict for a coring by the cobar or lattice criterion.
inline KoszulVerdict koszul_verdict(const GradedCoring& C, Method method, int d, const VerdictOptions& opt = {}) {
  if (d > C.max_degree()) throw InvalidInput("verdict degree exceeds the truncation of the coring");
  if (method != Method::cobar_diagonal && method != Method::lattice)
    throw InvalidInput("a coring alone supports the cobar-diagonal and lattice methods");
  if (method == Method::lattice && !exactla::is_prime(C.modulus()))
    throw PreconditionFailed("prime field required: the lattice method needs a prime modulus");
  detail::require_flat_coring(C, d);
  auto F = cobar_complex(C, d, opt.complex);
  if (method == Method::cobar_diagonal) return detail::from_family(method, d, F);
  // Cogeneration in degree 1 and corelations in degree 2: cobar H^1 and H^2 vanish off the diagonal.
  for (const auto& P : F.pieces)
    for (int n = 1; n <= 2; ++n) {
      if (P.weight == n) continue;
      auto H = P.homology(n);
      if (H.module().is_zero()) continue;
      KoszulVerdict v;
      v.method = method;
      v.checked_up_to = d;
      v.koszul = false;
      Failure f{n, -P.weight, H.module(), P.s, P.t, {}, "coring is not quadratic"};
      for (std::size_t g = 0; g < H.module().rank(); ++g) f.cycles.push_back(H.generator(g));
      v.failure = std::move(f);
      v.detail = "coring is not quadratic";
      return v;
    }
  if (d < 3) {
    KoszulVerdict v;
    v.method = method;
    v.checked_up_to = d;
    return v;
  }
  const std::size_t k = C.object_count();
  std::vector<ModMatrix> I(k * k);
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t r = C.component(2).component(s, t).rank();
      const std::size_t n = C.pair(1, 1).component(s, t).rank();
      I[s * k + t] = ModMatrix(n, r);
      for (std::size_t g = 0; g < r; ++g) {
        Vec y = C.comultiply(1, 1, s, t, detail::unit_vec(r, g));
        for (std::size_t i = 0; i < n; ++i) I[s * k + t](i, g) = y[i];
      }
    }
  auto P = quadra::make_presentation(C.base(), C.component(1), std::move(I));
  return detail::lattice_verdict(P, d, opt, [&] { return C; });
}

/// Verdict by exactness of the Koszul complex of an explicit pairing of A with C.
inline KoszulVerdict koszul_verdict(const BigGradedRing& A, const GradedCoring& C, int d,
                                    const VerdictOptions& opt = {}) {
  detail::require_flat_ring(A, d);
  return detail::from_family(Method::koszul_complex, d, koszul_complex(A, C, opt.koszul_side, d, opt.complex));
}

}  // namespace koszul::homcheck
