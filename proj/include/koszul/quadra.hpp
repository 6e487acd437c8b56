#pragma once

// Quadratic presentations, quadratic closures and quadratic dual corings.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "koszul/bigring.hpp"

namespace koszul::quadra {

using bigring::BigGradedRing;
using bigring::BigRing;
using bigring::Bimodule;
using bigring::RingPtr;
using bigring::TensorProduct;
using bigring::Word;
using bigring::WordVec;
using exactla::FinModule;
using exactla::ModMatrix;
using exactla::ModuleMap;
using exactla::Residue;
using exactla::Subquotient;
using exactla::Vec;

namespace detail {

inline Vec unit_vec(std::size_t n, std::size_t i) {
  Vec v(n, 0);
  v[i] = 1;
  return v;
}

inline Word concat(const Word& a, const Word& b) {
  Word w;
  w.objs = a.objs;
  w.objs.insert(w.objs.end(), b.objs.begin() + 1, b.objs.end());
  w.gens = a.gens;
  w.gens.insert(w.gens.end(), b.gens.begin(), b.gens.end());
  return w;
}

inline WordVec concat(const WordVec& a, const WordVec& b, Residue m) {
  WordVec out;
  for (const auto& [c, u] : a)
    for (const auto& [e, v] : b)
      if (Residue x = exactla::mul_mod(c, e, m)) out.emplace_back(x, concat(u, v));
  return out;
}

/// Replaces factor `pos` of every word by f(s, t, gen), a combination of words from s to t.
template <class F>
WordVec substitute(const WordVec& v, std::size_t pos, F&& f, Residue m) {
  WordVec out;
  for (const auto& [c, w] : v) {
    WordVec r = f(w.objs[pos], w.objs[pos + 1], w.gens[pos]);
    for (const auto& [e, x] : r) {
      Word y;
      y.objs.assign(w.objs.begin(), w.objs.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
      y.objs.insert(y.objs.end(), x.objs.begin() + 1, x.objs.end() - 1);
      y.objs.insert(y.objs.end(), w.objs.begin() + static_cast<std::ptrdiff_t>(pos) + 1, w.objs.end());
      y.gens.assign(w.gens.begin(), w.gens.begin() + static_cast<std::ptrdiff_t>(pos));
      y.gens.insert(y.gens.end(), x.gens.begin(), x.gens.end());
      y.gens.insert(y.gens.end(), w.gens.begin() + static_cast<std::ptrdiff_t>(pos) + 1, w.gens.end());
      if (Residue z = exactla::mul_mod(c, e, m)) out.emplace_back(z, std::move(y));
    }
  }
  return out;
}

/// Canonical coordinates of a combination of canonical generators of `M`.
inline Vec combine(const Subquotient& sq, const FinModule& ambient, const Vec& x) {
  Vec out(ambient.rank(), 0);
  const Residue m = ambient.modulus();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i]) continue;
    Vec g = sq.generator(i);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = (out[r] + exactla::mul_mod(g[r], x[i], m)) % m;
  }
  return ambient.reduce(std::move(out));
}

}  // namespace detail

/// The tensor powers A1^{⊗n}, 1 ≤ n ≤ d, over the base of A1.
class TensorPowers {
 public:
  TensorPowers() = default;
  TensorPowers(std::shared_ptr<const Bimodule> A1, int d) : A1_(std::move(A1)) {
    for (int n = 1; n <= d; ++n) {
      auto T = std::make_shared<const TensorProduct>(std::vector<const Bimodule*>(static_cast<std::size_t>(n), A1_.get()));
      powers_.push_back(T);
    }
    bimodules_.resize(powers_.size());
  }

  [[nodiscard]] int max_degree() const { return static_cast<int>(powers_.size()); }
  [[nodiscard]] Residue modulus() const { return A1_->modulus(); }
  [[nodiscard]] const Bimodule& generators() const { return *A1_; }

  [[nodiscard]] const TensorProduct& power(int n) const {
    if (n < 1 || n > max_degree()) throw InvalidInput("tensor power out of range");
    return *powers_[static_cast<std::size_t>(n - 1)];
  }

  /// A1^{⊗n} with its outer base actions.
  [[nodiscard]] const Bimodule& bimodule(int n) const {
    auto& slot = bimodules_.at(static_cast<std::size_t>(n - 1));
    if (!slot) slot = std::make_shared<const Bimodule>(n == 1 ? *A1_ : power(n).as_bimodule());
    return *slot;
  }

  /// a ⊗ b for a in A1^{⊗p}(s,t), b in A1^{⊗q}(t,r), canonical coordinates throughout.
  [[nodiscard]] Vec concat(int p, std::size_t s, std::size_t t, const Vec& a, int q, std::size_t r, const Vec& b) const {
    auto w = detail::concat(power(p).lift_words(s, t, a), power(q).lift_words(t, r, b), modulus());
    return power(p + q).coordinates(s, r, w);
  }

 private:
  std::shared_ptr<const Bimodule> A1_;
  std::vector<std::shared_ptr<const TensorProduct>> powers_;
  mutable std::vector<std::shared_ptr<const Bimodule>> bimodules_;
};

/// Base R, generators A1 and relations I ⊆ A1 ⊗_R A1.
struct QuadraticPresentation {
  RingPtr base;
  std::shared_ptr<const Bimodule> A1;
  std::shared_ptr<const TensorProduct> T2;
  std::vector<ModMatrix> I;  // index s * k + t; columns in canonical coordinates of T2(s,t)

  [[nodiscard]] std::size_t object_count() const { return base->object_count(); }
  [[nodiscard]] Residue modulus() const { return base->modulus(); }
  [[nodiscard]] const ModMatrix& relations(std::size_t s, std::size_t t) const { return I.at(s * object_count() + t); }
  /// I(s,t) as a submodule of the canonical coordinates of T2(s,t).
  [[nodiscard]] Subquotient relation_module(std::size_t s, std::size_t t) const {
    return exactla::submodule_of(T2->component(s, t), relations(s, t));
  }
};

/// Checks shapes and that I is closed under both base actions.
inline QuadraticPresentation make_presentation(RingPtr base, Bimodule A1, std::vector<ModMatrix> I) {
  QuadraticPresentation P;
  P.base = std::move(base);
  P.A1 = std::make_shared<const Bimodule>(std::move(A1));
  P.T2 = std::make_shared<const TensorProduct>(std::vector<const Bimodule*>{P.A1.get(), P.A1.get()});
  const std::size_t k = P.object_count();
  if (I.size() != k * k) throw InvalidInput("relations: one generator matrix per object pair expected");
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      auto& M = I[s * k + t];
      const std::size_t r = P.T2->component(s, t).rank();
      if (M.cols() == 0) M = ModMatrix(r, 0);
      if (M.rows() != r) throw InvalidInput("relations: generator has the wrong length");
    }
  P.I = std::move(I);
  Bimodule T = P.T2->as_bimodule();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        const auto& L = P.base->component(0, a, s);
        const auto& R = P.base->component(0, t, a);
        auto left_target = P.relation_module(a, t);
        auto right_target = P.relation_module(s, a);
        for (std::size_t g = 0; g < P.relations(s, t).cols(); ++g) {
          Vec x = P.relations(s, t).column(g);
          for (std::size_t u = 0; u < L.rank(); ++u)
            if (!left_target.contains(T.act_left(a, s, detail::unit_vec(L.rank(), u), t, x)))
              throw InvalidInput("relations are not closed under the left base action");
          for (std::size_t u = 0; u < R.rank(); ++u)
            if (!right_target.contains(T.act_right(s, t, x, a, detail::unit_vec(R.rank(), u))))
              throw InvalidInput("relations are not closed under the right base action");
        }
      }
  return P;
}

/// I = ker(A1 ⊗_{A0} A1 → A2).
inline QuadraticPresentation relations_of(const BigGradedRing& A) {
  if (A.max_degree() < 2) throw InvalidInput("relations_of needs a ring truncated at degree 2 or more");
  QuadraticPresentation P;
  P.base = std::make_shared<const BigRing>(A.base());
  P.A1 = std::make_shared<const Bimodule>(Bimodule::of_component(A, 1, P.base));
  P.T2 = std::make_shared<const TensorProduct>(std::vector<const Bimodule*>{P.A1.get(), P.A1.get()});
  const std::size_t k = A.object_count();
  const Residue m = A.modulus();
  P.I.resize(k * k);
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      const FinModule& src = P.T2->component(s, t);
      const FinModule& dst = A.component(2, s, t);
      ModMatrix mu(dst.rank(), src.rank());
      for (std::size_t g = 0; g < src.rank(); ++g) {
        Vec col(dst.rank(), 0);
        for (const auto& [c, w] : P.T2->lift_words(s, t, detail::unit_vec(src.rank(), g))) {
          Vec prod = A.multiply_gens(1, w.objs[0], w.objs[1], w.gens[0], 1, w.objs[2], w.gens[1]);
          for (std::size_t i = 0; i < col.size(); ++i) col[i] = (col[i] + exactla::mul_mod(c, prod[i], m)) % m;
        }
        col = dst.reduce(std::move(col));
        for (std::size_t i = 0; i < col.size(); ++i) mu(i, g) = col[i];
      }
      auto ker = exactla::kernel_of(ModuleMap{src, dst, mu});
      P.I[s * k + t] = ker.module().rank() ? ker.generators() : ModMatrix(src.rank(), 0);
    }
  return P;
}

/// Generators of A1^{⊗j-1} ⊗ I ⊗ A1^{⊗n-j-1} inside A1^{⊗n}(s,t), 1 ≤ j ≤ n-1.
inline ModMatrix relation_span(const QuadraticPresentation& P, const TensorPowers& pow, int n, int j, std::size_t s,
                               std::size_t t) {
  const TensorProduct& Tn = pow.power(n);
  const std::size_t k = P.object_count();
  auto ends = [&](int len, std::size_t a, std::size_t b) {
    if (len == 0) {
      std::vector<Word> out;
      if (a == b) out.push_back(Word{{static_cast<std::uint32_t>(a)}, {}});
      return out;
    }
    return pow.power(len).words(a, b);
  };
  std::vector<Vec> cols;
  for (std::size_t alpha = 0; alpha < k; ++alpha)
    for (std::size_t beta = 0; beta < k; ++beta) {
      const ModMatrix& rel = P.relations(alpha, beta);
      if (rel.cols() == 0) continue;
      auto prefix = ends(j - 1, s, alpha);
      auto suffix = ends(n - j - 1, beta, t);
      if (prefix.empty() || suffix.empty()) continue;
      for (std::size_t r = 0; r < rel.cols(); ++r) {
        WordVec rw = P.T2->lift_words(alpha, beta, rel.column(r));
        for (const auto& u : prefix)
          for (const auto& v : suffix) {
            WordVec w;
            for (const auto& [c, x] : rw) w.emplace_back(c, detail::concat(detail::concat(u, x), v));
            Vec col = Tn.coordinates(s, t, w);
            if (!exactla::is_zero(col)) cols.push_back(std::move(col));
          }
      }
    }
  ModMatrix out(Tn.component(s, t).rank(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t i = 0; i < out.rows(); ++i) out(i, c) = cols[c][i];
  return out;
}

/// Product of the letters of a word of degree-1 generators inside A.
inline Vec word_product(const BigGradedRing& A, const Word& w) {
  const std::size_t n = w.gens.size();
  Vec cur = detail::unit_vec(A.component(1, w.objs[0], w.objs[1]).rank(), w.gens[0]);
  for (std::size_t j = 1; j < n; ++j) {
    Vec next = detail::unit_vec(A.component(1, w.objs[j], w.objs[j + 1]).rank(), w.gens[j]);
    cur = A.multiply(static_cast<int>(j), w.objs[0], w.objs[j], cur, 1, w.objs[j + 1], next);
  }
  return cur;
}

/// The quadratic ring of a presentation, with the identification of A_n as a quotient of A1^{⊗n}.
class QuadraticClosure {
 public:
  QuadraticClosure(QuadraticPresentation P, int d) : P_(std::move(P)), pow_(P_.A1, std::max(d, 1)), d_(d) {
    if (d < 2) throw InvalidInput("quadratic closure needs d >= 2");
    const std::size_t k = P_.object_count();
    quot_.resize(static_cast<std::size_t>(d + 1) * k * k);
    for (int n = 2; n <= d; ++n)
      for (std::size_t s = 0; s < k; ++s)
        for (std::size_t t = 0; t < k; ++t) {
          const FinModule& M = pow_.power(n).component(s, t);
          ModMatrix G(M.rank(), 0);
          for (int j = 1; j < n; ++j) {
            ModMatrix S = relation_span(P_, pow_, n, j, s, t);
            if (S.cols()) G = G.cols() ? G.hconcat(S) : S;
          }
          quot_[slot(n, s, t)] = exactla::quotient_of(M, G);
        }
    build_ring();
  }

  [[nodiscard]] const BigGradedRing& ring() const noexcept { return ring_; }
  [[nodiscard]] const QuadraticPresentation& presentation() const noexcept { return P_; }
  [[nodiscard]] const TensorPowers& powers() const noexcept { return pow_; }

  /// Closure coordinates in degree n ≥ 1 to coordinates in A1^{⊗n}.
  [[nodiscard]] Vec to_tensor(int n, std::size_t s, std::size_t t, const Vec& x) const {
    if (n == 1) return x;
    return detail::combine(quot_[slot(n, s, t)], pow_.power(n).component(s, t), x);
  }
  [[nodiscard]] Vec from_tensor(int n, std::size_t s, std::size_t t, const Vec& v) const {
    if (n == 1) return P_.A1->component(s, t).reduce(v);
    return quot_[slot(n, s, t)].coordinates(v);
  }

  /// The natural map from the closure to A in degree n, induced by the identity on A1.
  [[nodiscard]] ModuleMap comparison(const BigGradedRing& A, int n, std::size_t s, std::size_t t) const {
    const FinModule& src = ring_.component(n, s, t);
    const FinModule& dst = A.component(n, s, t);
    if (n <= 1) {
      if (!(src == dst)) throw InvalidInput("comparison: rings differ in degree <= 1");
      return ModuleMap::identity(src);
    }
    const Residue m = A.modulus();
    ModMatrix M(dst.rank(), src.rank());
    for (std::size_t g = 0; g < src.rank(); ++g) {
      Vec col(dst.rank(), 0);
      for (const auto& [c, w] : pow_.power(n).lift_words(s, t, to_tensor(n, s, t, detail::unit_vec(src.rank(), g)))) {
        Vec p = word_product(A, w);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = (col[i] + exactla::mul_mod(c, p[i], m)) % m;
      }
      col = dst.reduce(std::move(col));
      for (std::size_t i = 0; i < col.size(); ++i) M(i, g) = col[i];
    }
    return {src, dst, M};
  }

 private:
  [[nodiscard]] std::size_t slot(int n, std::size_t s, std::size_t t) const {
    const std::size_t k = P_.object_count();
    return (static_cast<std::size_t>(n) * k + s) * k + t;
  }

  Vec product(int p, std::size_t s, std::size_t t, const Vec& a, int q, std::size_t r, const Vec& b) const {
    const BigRing& R = *P_.base;
    if (p == 0 && q == 0) return R.multiply(0, s, t, a, 0, r, b);
    if (p == 0) {
      Vec y = pow_.bimodule(q).act_left(s, t, a, r, to_tensor(q, t, r, b));
      return from_tensor(q, s, r, y);
    }
    if (q == 0) {
      Vec y = pow_.bimodule(p).act_right(s, t, to_tensor(p, s, t, a), r, b);
      return from_tensor(p, s, r, y);
    }
    Vec y = pow_.concat(p, s, t, to_tensor(p, s, t, a), q, r, to_tensor(q, t, r, b));
    return from_tensor(p + q, s, r, y);
  }

  void build_ring() {
    const BigRing& R = *P_.base;
    const std::size_t k = P_.object_count();
    ring_ = BigGradedRing(R.objects(), R.modulus(), d_);
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        ring_.set_component(0, s, t, R.component(0, s, t));
        ring_.set_component(1, s, t, P_.A1->component(s, t));
        for (int n = 2; n <= d_; ++n) ring_.set_component(n, s, t, quot_[slot(n, s, t)].module());
      }
    for (std::size_t s = 0; s < k; ++s) ring_.set_unit(s, R.unit(s));
    for (int p = 0; p <= d_; ++p)
      for (int q = 0; p + q <= d_; ++q)
        for (std::size_t s = 0; s < k; ++s)
          for (std::size_t t = 0; t < k; ++t)
            for (std::size_t r = 0; r < k; ++r) {
              const auto& A = ring_.component(p, s, t);
              const auto& B = ring_.component(q, t, r);
              const auto& C = ring_.component(p + q, s, r);
              if (!A.rank() || !B.rank() || !C.rank()) continue;
              ModMatrix tb(C.rank(), A.rank() * B.rank());
              for (std::size_t i = 0; i < A.rank(); ++i)
                for (std::size_t j = 0; j < B.rank(); ++j) {
                  Vec c = product(p, s, t, detail::unit_vec(A.rank(), i), q, r, detail::unit_vec(B.rank(), j));
                  for (std::size_t x = 0; x < c.size(); ++x) tb(x, i * B.rank() + j) = c[x];
                }
              ring_.set_mult(p, q, s, t, r, std::move(tb));
            }
  }

  QuadraticPresentation P_;
  TensorPowers pow_;
  int d_;
  std::vector<Subquotient> quot_;
  BigGradedRing ring_;
};

inline BigGradedRing quadratic_closure(const QuadraticPresentation& P, int d) { return QuadraticClosure(P, d).ring(); }

struct QuadraticityReport {
  bool quadratic = true;
  int checked_up_to = 0;
  int failing_degree = 0;          // 0 when quadratic
  bool generation_failure = false;  // A_n not generated by A_1 (otherwise: relations beyond degree 2)
  std::string detail;
  explicit operator bool() const noexcept { return quadratic; }
};

/// Whether the closure of relations_of(A) maps isomorphically onto A in degrees ≤ d.
inline QuadraticityReport is_quadratic_up_to(const BigGradedRing& A, int d) {
  if (d > A.max_degree()) throw InvalidInput("is_quadratic_up_to: d exceeds the truncation of the ring");
  QuadraticityReport rep;
  rep.checked_up_to = d;
  if (d < 2) return rep;
  QuadraticClosure Q(relations_of(A), d);
  const std::size_t k = A.object_count();
  for (int n = 3; n <= d; ++n)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        ModuleMap f = Q.comparison(A, n, s, t);
        std::string where = " in degree " + std::to_string(n) + " at objects (" + A.objects().name(s) + "," +
                            A.objects().name(t) + ")";
        if (!exactla::cokernel_of(f).module().is_zero()) {
          rep = {false, d, n, true, "not generated by degree 1" + where};
          return rep;
        }
        if (!exactla::kernel_of(f).module().is_zero()) {
          rep = {false, d, n, false, "relations not implied by quadratic ones" + where};
          return rep;
        }
      }
  return rep;
}

/// qu A together with its comparison morphism to A.
struct QuadraticPart {
  std::shared_ptr<const QuadraticClosure> closure;

  [[nodiscard]] const BigGradedRing& ring() const { return closure->ring(); }
  [[nodiscard]] ModuleMap comparison(const BigGradedRing& A, int n, std::size_t s, std::size_t t) const {
    return closure->comparison(A, n, s, t);
  }
};

inline QuadraticPart quadratic_part(const BigGradedRing& A, int d) {
  if (d < 2) throw InvalidInput("quadratic_part needs d >= 2");
  if (d > A.max_degree()) throw InvalidInput("quadratic_part: d exceeds the truncation of the ring");
  return {std::make_shared<const QuadraticClosure>(relations_of(A), d)};
}

// ---------------------------------------------------------------------------
// Corings

/// Nonnegatively graded coring C_0 = R, C_{-1}, ..., C_{-d}. Comultiplication
/// components Δ_{i,j}: C_{-(i+j)} → C_{-i} ⊗_R C_{-j} for i, j ≥ 1; those with
/// a zero index are the counit identifications.
class GradedCoring {
 public:
  GradedCoring() = default;
  GradedCoring(RingPtr base, int d) : base_(std::move(base)), d_(d) {
    comps_.push_back(std::make_shared<const Bimodule>(Bimodule::unit(base_)));
    for (int n = 1; n <= d; ++n) comps_.push_back(std::make_shared<const Bimodule>(base_, base_));
  }

  [[nodiscard]] const RingPtr& base() const noexcept { return base_; }
  [[nodiscard]] int max_degree() const noexcept { return d_; }
  [[nodiscard]] std::size_t object_count() const { return base_->object_count(); }
  [[nodiscard]] Residue modulus() const { return base_->modulus(); }

  /// C_{-n}; zero beyond the truncation.
  [[nodiscard]] const Bimodule& component(int n) const {
    if (n < 0) throw InvalidInput("coring degree must be nonnegative");
    if (n > d_) {
      if (!zero_) zero_ = std::make_shared<const Bimodule>(base_, base_);
      return *zero_;
    }
    return *comps_[static_cast<std::size_t>(n)];
  }
  [[nodiscard]] std::shared_ptr<const Bimodule> component_ptr(int n) const {
    return comps_.at(static_cast<std::size_t>(n));
  }

  void set_component(int n, Bimodule C) {
    if (n < 1 || n > d_) throw InvalidInput("coring component index out of range");
    comps_[static_cast<std::size_t>(n)] = std::make_shared<const Bimodule>(std::move(C));
    for (auto it = pairs_.begin(); it != pairs_.end();)
      it = (it->first.first == n || it->first.second == n) ? pairs_.erase(it) : std::next(it);
  }

  /// C_{-i} ⊗_R C_{-j}.
  [[nodiscard]] const TensorProduct& pair(int i, int j) const {
    auto it = pairs_.find({i, j});
    if (it == pairs_.end())
      it = pairs_
               .emplace(std::make_pair(i, j), std::make_shared<const TensorProduct>(
                                                  std::vector<const Bimodule*>{&component(i), &component(j)}))
               .first;
    return *it->second;
  }

  void set_comult(int i, int j, std::size_t s, std::size_t t, ModMatrix D) {
    if (i < 1 || j < 1 || i + j > d_) throw InvalidInput("comultiplication index out of range");
    if (D.rows() != pair(i, j).component(s, t).rank() || D.cols() != component(i + j).component(s, t).rank())
      throw InvalidInput("comultiplication matrix has the wrong shape");
    comult_[{i, j, s, t}] = std::move(D);
  }
  [[nodiscard]] const ModMatrix* comult(int i, int j, std::size_t s, std::size_t t) const {
    auto it = comult_.find({i, j, s, t});
    return it == comult_.end() ? nullptr : &it->second;
  }

  /// Δ_{i,j}(c) for c in C_{-(i+j)}(s,t), in canonical coordinates of pair(i, j)(s,t).
  [[nodiscard]] Vec comultiply(int i, int j, std::size_t s, std::size_t t, const Vec& c) const {
    const FinModule& target = pair(i, j).component(s, t);
    const ModMatrix* D = comult(i, j, s, t);
    if (!D) return target.zero_element();
    return target.reduce(exactla::apply_mod(*D, c, modulus()));
  }

  /// Δ_{i,j} of a canonical generator as a combination of words.
  [[nodiscard]] WordVec comultiply_words(int i, int j, std::size_t s, std::size_t t, std::size_t g) const {
    Vec e = detail::unit_vec(component(i + j).component(s, t).rank(), g);
    return pair(i, j).lift_words(s, t, comultiply(i, j, s, t, e));
  }

  /// Failed well-definedness and coassociativity identities on generators.
  [[nodiscard]] std::vector<std::string> validate() const {
    std::vector<std::string> report;
    const std::size_t k = object_count();
    const Residue m = modulus();
    for (int n = 2; n <= d_; ++n)
      for (int i = 1; i < n; ++i)
        for (std::size_t s = 0; s < k; ++s)
          for (std::size_t t = 0; t < k; ++t) {
            const ModMatrix* D = comult(i, n - i, s, t);
            if (D && !ModuleMap{component(n).component(s, t), pair(i, n - i).component(s, t), *D}.well_defined())
              report.push_back("comultiplication (" + std::to_string(i) + "," + std::to_string(n - i) +
                               ") not well defined");
          }
    for (int n = 3; n <= d_; ++n)
      for (int i = 1; i < n; ++i)
        for (int j = 1; i + j < n; ++j) {
          const int l = n - i - j;
          TensorProduct triple({&component(i), &component(j), &component(l)});
          for (std::size_t s = 0; s < k; ++s)
            for (std::size_t t = 0; t < k; ++t)
              for (std::size_t g = 0; g < component(n).component(s, t).rank(); ++g) {
                WordVec left = detail::substitute(
                    comultiply_words(i + j, l, s, t, g), 0,
                    [&](std::size_t a, std::size_t b, std::uint32_t h) { return comultiply_words(i, j, a, b, h); }, m);
                WordVec right = detail::substitute(
                    comultiply_words(i, j + l, s, t, g), 1,
                    [&](std::size_t a, std::size_t b, std::uint32_t h) { return comultiply_words(j, l, a, b, h); }, m);
                if (triple.coordinates(s, t, left) != triple.coordinates(s, t, right))
                  report.push_back("coassociativity fails at degrees (" + std::to_string(i) + "," + std::to_string(j) +
                                   "," + std::to_string(l) + ")");
              }
        }
    return report;
  }

 private:
  RingPtr base_;
  int d_ = 0;
  std::vector<std::shared_ptr<const Bimodule>> comps_;
  std::map<std::tuple<int, int, std::size_t, std::size_t>, ModMatrix> comult_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const TensorProduct>> pairs_;
  mutable std::shared_ptr<const Bimodule> zero_;
};

/// C_{-1} = A1, C_{-2} = I, C_{-n} = ∩_j A1^{⊗j-1} ⊗ I ⊗ A1^{⊗n-j-1}, with the comultiplication
/// obtained by factoring the inclusion C_{-n} ⊂ A1^{⊗n} through C_{-i} ⊗ C_{-(n-i)}.
inline GradedCoring quadratic_dual_coring(const QuadraticPresentation& P, int d) {
  if (d < 2) throw InvalidInput("quadratic_dual_coring needs d >= 2");
  const std::size_t k = P.object_count();
  const Residue m = P.modulus();
  TensorPowers pow(P.A1, d);
  GradedCoring C(P.base, d);
  C.set_component(1, *P.A1);
  std::vector<std::vector<Subquotient>> emb(static_cast<std::size_t>(d + 1), std::vector<Subquotient>(k * k));

  for (int n = 2; n <= d; ++n) {
    const TensorProduct& Tn = pow.power(n);
    Bimodule Cn(P.base, P.base);
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        const FinModule& M = Tn.component(s, t);
        ModMatrix R = exactla::relation_matrix(M);
        ModMatrix Y;
        for (int j = 1; j < n; ++j) {
          ModMatrix U = relation_span(P, pow, n, j, s, t);
          if (R.cols()) U = U.cols() ? U.hconcat(R) : R;
          Y = j == 1 ? U : exactla::intersect(Y, U, m);
        }
        if (Y.rows() == 0) Y = ModMatrix(M.rank(), 0);
        emb[n][s * k + t] = exactla::submodule_of(M, Y);
        Cn.set_component(s, t, emb[n][s * k + t].module());
      }
    const Bimodule& Tb = pow.bimodule(n);
    const BigRing& R = *P.base;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t s = 0; s < k; ++s)
        for (std::size_t t = 0; t < k; ++t) {
          const FinModule& X = Cn.component(s, t);
          if (!X.rank()) continue;
          const auto& L = R.component(0, a, s);
          if (L.rank() && Cn.component(a, t).rank()) {
            ModMatrix tb(Cn.component(a, t).rank(), L.rank() * X.rank());
            for (std::size_t u = 0; u < L.rank(); ++u)
              for (std::size_t g = 0; g < X.rank(); ++g) {
                Vec y = Tb.act_left(a, s, detail::unit_vec(L.rank(), u), t, emb[n][s * k + t].generator(g));
                Vec c = emb[n][a * k + t].coordinates(y);
                for (std::size_t i = 0; i < c.size(); ++i) tb(i, u * X.rank() + g) = c[i];
              }
            Cn.set_left(a, s, t, tb);
          }
          const auto& Rr = R.component(0, t, a);
          if (Rr.rank() && Cn.component(s, a).rank()) {
            ModMatrix tb(Cn.component(s, a).rank(), X.rank() * Rr.rank());
            for (std::size_t g = 0; g < X.rank(); ++g)
              for (std::size_t u = 0; u < Rr.rank(); ++u) {
                Vec y = Tb.act_right(s, t, emb[n][s * k + t].generator(g), a, detail::unit_vec(Rr.rank(), u));
                Vec c = emb[n][s * k + a].coordinates(y);
                for (std::size_t i = 0; i < c.size(); ++i) tb(i, g * Rr.rank() + u) = c[i];
              }
            Cn.set_right(s, t, a, tb);
          }
        }
    C.set_component(n, std::move(Cn));
  }

  auto embed = [&](int n, std::size_t s, std::size_t t, const Vec& x) {
    if (n == 1) return x;
    return detail::combine(emb[n][s * k + t], pow.power(n).component(s, t), x);
  };
  for (int n = 2; n <= d; ++n)
    for (int i = 1; i < n; ++i) {
      const TensorProduct& pr = C.pair(i, n - i);
      for (std::size_t s = 0; s < k; ++s)
        for (std::size_t t = 0; t < k; ++t) {
          const FinModule& Cst = C.component(n).component(s, t);
          if (!Cst.rank()) continue;
          const FinModule& src = pr.component(s, t);
          const FinModule& dst = pow.power(n).component(s, t);
          ModMatrix iota(dst.rank(), src.rank());
          for (std::size_t g = 0; g < src.rank(); ++g) {
            Vec col(dst.rank(), 0);
            for (const auto& [c, w] : pr.lift_words(s, t, detail::unit_vec(src.rank(), g))) {
              const auto& A = C.component(i).component(w.objs[0], w.objs[1]);
              const auto& B = C.component(n - i).component(w.objs[1], w.objs[2]);
              Vec a = embed(i, w.objs[0], w.objs[1], detail::unit_vec(A.rank(), w.gens[0]));
              Vec b = embed(n - i, w.objs[1], w.objs[2], detail::unit_vec(B.rank(), w.gens[1]));
              Vec y = pow.concat(i, w.objs[0], w.objs[1], a, n - i, w.objs[2], b);
              for (std::size_t r = 0; r < col.size(); ++r) col[r] = (col[r] + exactla::mul_mod(c, y[r], m)) % m;
            }
            col = dst.reduce(std::move(col));
            for (std::size_t r = 0; r < col.size(); ++r) iota(r, g) = col[r];
          }
          ModuleMap f{src, dst, iota};
          const std::string where = "degree " + std::to_string(n) + " split (" + std::to_string(i) + "," +
                                    std::to_string(n - i) + ")";
          if (!exactla::kernel_of(f).module().is_zero())
            throw Unsupported("nonfree components unsupported: tensor of coring components does not embed, " + where);
          ModMatrix D(src.rank(), Cst.rank());
          for (std::size_t g = 0; g < Cst.rank(); ++g) {
            auto x = exactla::solve_linear(f, embed(n, s, t, detail::unit_vec(Cst.rank(), g)));
            if (!x) throw Unsupported("nonfree components unsupported: intersection does not split, " + where);
            for (std::size_t r = 0; r < x->size(); ++r) D(r, g) = (*x)[r];
          }
          C.set_comult(i, n - i, s, t, std::move(D));
        }
    }
  return C;
}

}  // namespace koszul::quadra
