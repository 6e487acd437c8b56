#pragma once

// Big rings over a finite object set, their bimodules and tensor products.
//
// A big graded ring A has a component A_{st;n} for each ordered pair of
// objects (s,t) and degree n <= max_degree. Multiplication is composition
// style: A_{st;p} x A_{tr;q} -> A_{sr;p+q}, stored per (p,q,s,t,r) as a
// matrix whose column i*dim(A_{tr;q})+j holds the product of canonical
// generators i and j. Missing tables mean the product is zero.

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "koszul/exactla.hpp"

namespace koszul::bigring {

using exactla::FinModule;
using exactla::ModMatrix;
using exactla::Residue;
using exactla::Subquotient;
using exactla::Vec;

class ObjectSet {
 public:
  ObjectSet() = default;
  explicit ObjectSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw InvalidInput("object set must be nonempty");
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size()) throw InvalidInput("object labels must be distinct");
  }
  static ObjectSet single(const std::string& name = "*") { return ObjectSet({name}); }

  [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
  [[nodiscard]] const std::string& name(std::size_t i) const { return names_.at(i); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    throw InvalidInput("unknown object '" + name + "'");
  }
  friend bool operator==(const ObjectSet&, const ObjectSet&) = default;

 private:
  std::vector<std::string> names_;
};

struct MultKey {
  int p, q;
  std::size_t s, t, r;
  friend auto operator<=>(const MultKey&, const MultKey&) = default;
};

namespace detail {

// Adds coef * column `col` of `table` into `out` (mod m).
inline void add_column(Vec& out, const ModMatrix& table, std::size_t col, Residue coef, Residue m) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    Residue x = table(i, col);
    if (x) out[i] = (out[i] + exactla::mul_mod(coef, x, m)) % m;
  }
}

// Bilinear product through a structure table.
inline Vec bilinear(const ModMatrix* table, const Vec& a, const Vec& b, const FinModule& target) {
  Vec out(target.rank(), 0);
  if (!table) return out;
  const Residue m = target.modulus();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!b[j]) continue;
      add_column(out, *table, i * b.size() + j, exactla::mul_mod(a[i], b[j], m), m);
    }
  }
  return target.reduce(std::move(out));
}

}  // namespace detail

/// A nonnegatively graded big ring truncated at `max_degree`. A big ring is
/// the case max_degree == 0.
class BigGradedRing {
 public:
  BigGradedRing() = default;
  BigGradedRing(ObjectSet objects, Residue modulus, int max_degree)
      : objects_(std::move(objects)), m_(modulus), max_degree_(max_degree) {
    if (modulus < 2) throw InvalidInput("modulus must be at least 2");
    if (max_degree < 0) throw InvalidInput("max_degree must be nonnegative");
    const std::size_t k = objects_.size();
    comps_.assign(static_cast<std::size_t>(max_degree + 1) * k * k, FinModule::zero(m_));
    units_.assign(k, Vec{});
    zero_ = FinModule::zero(m_);
  }

  [[nodiscard]] const ObjectSet& objects() const noexcept { return objects_; }
  [[nodiscard]] std::size_t object_count() const noexcept { return objects_.size(); }
  [[nodiscard]] Residue modulus() const noexcept { return m_; }
  [[nodiscard]] int max_degree() const noexcept { return max_degree_; }

  void set_component(int n, std::size_t s, std::size_t t, FinModule M) {
    if (M.modulus() != m_) throw InvalidInput("component modulus mismatch");
    comps_.at(slot(n, s, t)) = std::move(M);
  }
  void set_unit(std::size_t s, Vec e) { units_.at(s) = component(0, s, s).reduce(std::move(e)); }
  void set_mult(int p, int q, std::size_t s, std::size_t t, std::size_t r, ModMatrix table) {
    if (p + q > max_degree_) return;
    const auto& a = component(p, s, t);
    const auto& b = component(q, t, r);
    const auto& c = component(p + q, s, r);
    if (table.rows() != c.rank() || table.cols() != a.rank() * b.rank())
      throw InvalidInput("multiplication table has wrong shape");
    for (std::size_t i = 0; i < table.rows(); ++i)
      for (auto& x : table.row(i)) x = exactla::mod(x, c.order(i));
    mult_[{p, q, s, t, r}] = std::move(table);
  }

  [[nodiscard]] const FinModule& component(int n, std::size_t s, std::size_t t) const {
    if (n < 0 || n > max_degree_) return zero_;
    return comps_.at(slot(n, s, t));
  }
  [[nodiscard]] const Vec& unit(std::size_t s) const { return units_.at(s); }

  [[nodiscard]] const ModMatrix* table(int p, int q, std::size_t s, std::size_t t, std::size_t r) const {
    auto it = mult_.find({p, q, s, t, r});
    return it == mult_.end() ? nullptr : &it->second;
  }
  [[nodiscard]] const std::map<MultKey, ModMatrix>& tables() const noexcept { return mult_; }

  /// Product of a in A_{st;p} and b in A_{tr;q}, landing in A_{sr;p+q}.
  [[nodiscard]] Vec multiply(int p, std::size_t s, std::size_t t, const Vec& a, int q, std::size_t r,
                             const Vec& b) const {
    return detail::bilinear(table(p, q, s, t, r), a, b, component(p + q, s, r));
  }

  /// Product of canonical generators.
  [[nodiscard]] Vec multiply_gens(int p, std::size_t s, std::size_t t, std::size_t i, int q, std::size_t r,
                                  std::size_t j) const {
    const auto& c = component(p + q, s, r);
    Vec out(c.rank(), 0);
    const ModMatrix* tb = table(p, q, s, t, r);
    if (tb) detail::add_column(out, *tb, i * component(q, t, r).rank() + j, 1, m_);
    return out;
  }

  [[nodiscard]] BigGradedRing truncated(int d) const {
    BigGradedRing out(objects_, m_, std::min(d, max_degree_));
    const std::size_t k = object_count();
    for (int n = 0; n <= out.max_degree_; ++n)
      for (std::size_t s = 0; s < k; ++s)
        for (std::size_t t = 0; t < k; ++t) out.set_component(n, s, t, component(n, s, t));
    out.units_ = units_;
    for (const auto& [key, tb] : mult_)
      if (key.p + key.q <= out.max_degree_) out.mult_[key] = tb;
    return out;
  }

  [[nodiscard]] BigGradedRing base() const { return truncated(0); }

  friend bool operator==(const BigGradedRing& a, const BigGradedRing& b) {
    return a.objects_ == b.objects_ && a.m_ == b.m_ && a.max_degree_ == b.max_degree_ && a.comps_ == b.comps_ &&
           a.units_ == b.units_ && a.mult_ == b.mult_;
  }

 private:
  [[nodiscard]] std::size_t slot(int n, std::size_t s, std::size_t t) const {
    const std::size_t k = objects_.size();
    if (n < 0 || n > max_degree_ || s >= k || t >= k) throw InvalidInput("component index out of range");
    return (static_cast<std::size_t>(n) * k + s) * k + t;
  }

  ObjectSet objects_;
  Residue m_ = 2;
  int max_degree_ = 0;
  std::vector<FinModule> comps_;
  std::vector<Vec> units_;
  std::map<MultKey, ModMatrix> mult_;
  FinModule zero_;
};

using BigRing = BigGradedRing;
using RingPtr = std::shared_ptr<const BigRing>;

/// The base with Z/m on the diagonal and zero off it.
inline BigRing diagonal_base(const ObjectSet& objects, Residue m) {
  BigRing R(objects, m, 0);
  for (std::size_t s = 0; s < objects.size(); ++s) {
    R.set_component(0, s, s, FinModule::free(m, 1));
    R.set_unit(s, {1});
    R.set_mult(0, 0, s, s, s, ModMatrix::from_rows({{1}}));
  }
  return R;
}

/// True when every R_{ss} is Z/m spanned by the unit and R_{st} = 0 for s != t.
inline bool is_diagonal_base(const BigRing& R) {
  const std::size_t k = R.object_count();
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      const auto& c = R.component(0, s, t);
      if (s != t && !c.is_zero()) return false;
      if (s == t) {
        if (!(c.rank() == 1 && c.is_free())) return false;
        if (exactla::gcd(R.unit(s).at(0), R.modulus()) != 1) return false;
      }
    }
  return true;
}

/// Every failed ring axiom on canonical generators; empty iff valid.
inline std::vector<std::string> validate(const BigGradedRing& A) {
  std::vector<std::string> report;
  const std::size_t k = A.object_count();
  const int d = A.max_degree();
  const Residue m = A.modulus();
  auto label = [&](std::size_t s) { return A.objects().name(s); };
  auto gen = [](const FinModule& M, std::size_t i) {
    Vec v(M.rank(), 0);
    v[i] = 1;
    return v;
  };
  for (std::size_t s = 0; s < k; ++s)
    if (A.unit(s).size() != A.component(0, s, s).rank()) report.push_back("missing unit for object " + label(s));
  if (!report.empty()) return report;

  // Well-definedness of the tables on the relations of each factor.
  for (const auto& [key, tb] : A.tables()) {
    const auto& a = A.component(key.p, key.s, key.t);
    const auto& b = A.component(key.q, key.t, key.r);
    const auto& c = A.component(key.p + key.q, key.s, key.r);
    for (std::size_t i = 0; i < a.rank(); ++i)
      for (std::size_t j = 0; j < b.rank(); ++j) {
        Residue o = exactla::gcd(a.order(i), b.order(j));
        for (std::size_t r = 0; r < c.rank(); ++r)
          if (exactla::mul_mod(o, tb(r, i * b.rank() + j), m) % c.order(r) != 0) {
            report.push_back("product not well defined at degrees (" + std::to_string(key.p) + "," +
                             std::to_string(key.q) + ") objects (" + label(key.s) + "," + label(key.t) + "," +
                             label(key.r) + ") generators (" + std::to_string(i) + "," + std::to_string(j) + ")");
            r = c.rank();
          }
      }
  }
  // Unit laws.
  for (int n = 0; n <= d; ++n)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        const auto& M = A.component(n, s, t);
        for (std::size_t i = 0; i < M.rank(); ++i) {
          Vec x = gen(M, i);
          if (A.multiply(0, s, s, A.unit(s), n, t, x) != M.reduce(x))
            report.push_back("left unit law fails on generator " + std::to_string(i) + " of A_{" + label(s) + "," +
                             label(t) + ";" + std::to_string(n) + "}");
          if (A.multiply(n, s, t, x, 0, t, A.unit(t)) != M.reduce(x))
            report.push_back("right unit law fails on generator " + std::to_string(i) + " of A_{" + label(s) + "," +
                             label(t) + ";" + std::to_string(n) + "}");
        }
      }
  // Associativity on generator triples.
  for (int p = 0; p <= d; ++p)
    for (int q = 0; p + q <= d; ++q)
      for (int w = 0; p + q + w <= d; ++w)
        for (std::size_t s = 0; s < k; ++s)
          for (std::size_t t = 0; t < k; ++t)
            for (std::size_t r = 0; r < k; ++r)
              for (std::size_t u = 0; u < k; ++u) {
                const auto& X = A.component(p, s, t);
                const auto& Y = A.component(q, t, r);
                const auto& Z = A.component(w, r, u);
                for (std::size_t i = 0; i < X.rank(); ++i)
                  for (std::size_t j = 0; j < Y.rank(); ++j) {
                    Vec xy = A.multiply_gens(p, s, t, i, q, r, j);
                    for (std::size_t l = 0; l < Z.rank(); ++l) {
                      Vec left = A.multiply(p + q, s, r, xy, w, u, gen(Z, l));
                      Vec right = A.multiply(p, s, t, gen(X, i), q + w, u, A.multiply_gens(q, t, r, j, w, u, l));
                      if (left != right)
                        report.push_back("associativity fails at degrees (" + std::to_string(p) + "," +
                                         std::to_string(q) + "," + std::to_string(w) + ") objects (" + label(s) +
                                         "," + label(t) + "," + label(r) + "," + label(u) + ") generators (" +
                                         std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(l) + ")");
                    }
                  }
              }
  return report;
}

// ---------------------------------------------------------------------------
// Bimodules

/// Bimodule over big rings `left` and `right` on the same object set.
/// Left action L_{st} x K_{tr} -> K_{sr}; right action K_{st} x R_{tr} -> K_{sr}.
class Bimodule {
 public:
  Bimodule() = default;
  Bimodule(RingPtr left, RingPtr right) : left_(std::move(left)), right_(std::move(right)) {
    if (!(left_->objects() == right_->objects())) throw InvalidInput("bimodule bases live on different object sets");
    const std::size_t k = left_->object_count();
    comps_.assign(k * k, FinModule::zero(left_->modulus()));
  }

  /// A_n as a bimodule over the base A_0 (given as `base`, or computed).
  static Bimodule of_component(const BigGradedRing& A, int n, RingPtr base = nullptr) {
    if (!base) base = std::make_shared<const BigRing>(A.base());
    Bimodule K(base, base);
    const std::size_t k = A.object_count();
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) K.set_component(s, t, A.component(n, s, t));
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t)
        for (std::size_t r = 0; r < k; ++r) {
          if (auto* tb = A.table(0, n, s, t, r)) K.set_left(s, t, r, *tb);
          if (auto* tb = A.table(n, 0, s, t, r)) K.set_right(s, t, r, *tb);
        }
    return K;
  }

  /// The base ring R as an R-bimodule.
  static Bimodule unit(RingPtr base) { return of_component(*base, 0, base); }

  [[nodiscard]] std::size_t object_count() const { return left_->object_count(); }
  [[nodiscard]] Residue modulus() const { return left_->modulus(); }
  [[nodiscard]] const BigRing& left_base() const { return *left_; }
  [[nodiscard]] const BigRing& right_base() const { return *right_; }
  [[nodiscard]] const RingPtr& left_ptr() const { return left_; }
  [[nodiscard]] const RingPtr& right_ptr() const { return right_; }

  void set_component(std::size_t s, std::size_t t, FinModule M) { comps_.at(s * object_count() + t) = std::move(M); }
  [[nodiscard]] const FinModule& component(std::size_t s, std::size_t t) const {
    return comps_.at(s * object_count() + t);
  }
  void set_left(std::size_t s, std::size_t t, std::size_t r, ModMatrix tb) { left_act_[{0, 0, s, t, r}] = std::move(tb); }
  void set_right(std::size_t s, std::size_t t, std::size_t r, ModMatrix tb) {
    right_act_[{0, 0, s, t, r}] = std::move(tb);
  }
  [[nodiscard]] const ModMatrix* left_table(std::size_t s, std::size_t t, std::size_t r) const {
    auto it = left_act_.find({0, 0, s, t, r});
    return it == left_act_.end() ? nullptr : &it->second;
  }
  [[nodiscard]] const ModMatrix* right_table(std::size_t s, std::size_t t, std::size_t r) const {
    auto it = right_act_.find({0, 0, s, t, r});
    return it == right_act_.end() ? nullptr : &it->second;
  }

  /// a in L_{st}, x in K_{tr}.
  [[nodiscard]] Vec act_left(std::size_t s, std::size_t t, const Vec& a, std::size_t r, const Vec& x) const {
    return detail::bilinear(left_table(s, t, r), a, x, component(s, r));
  }
  /// x in K_{st}, a in R_{tr}.
  [[nodiscard]] Vec act_right(std::size_t s, std::size_t t, const Vec& x, std::size_t r, const Vec& a) const {
    return detail::bilinear(right_table(s, t, r), x, a, component(s, r));
  }
  [[nodiscard]] bool is_zero() const {
    for (const auto& c : comps_)
      if (!c.is_zero()) return false;
    return true;
  }

  /// Failed unit / associativity identities of the two actions on generators.
  [[nodiscard]] std::vector<std::string> validate() const {
    std::vector<std::string> report;
    const std::size_t k = object_count();
    auto gen = [](const FinModule& M, std::size_t i) {
      Vec v(M.rank(), 0);
      v[i] = 1;
      return v;
    };
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        const auto& K = component(s, t);
        for (std::size_t i = 0; i < K.rank(); ++i) {
          Vec x = gen(K, i);
          if (act_left(s, s, left_->unit(s), t, x) != x) report.push_back("left unit fails");
          if (act_right(s, t, x, t, right_->unit(t)) != x) report.push_back("right unit fails");
          for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) {
              // (l1 l2) x = l1 (l2 x) with l1 in L_{ab}, l2 in L_{bs}
              const auto& L1 = left_->component(0, a, b);
              const auto& L2 = left_->component(0, b, s);
              for (std::size_t u = 0; u < L1.rank(); ++u)
                for (std::size_t v = 0; v < L2.rank(); ++v) {
                  Vec l12 = left_->multiply_gens(0, a, b, u, 0, s, v);
                  if (act_left(a, s, l12, t, x) != act_left(a, b, gen(L1, u), t, act_left(b, s, gen(L2, v), t, x)))
                    report.push_back("left action not associative");
                }
              const auto& R1 = right_->component(0, t, a);
              const auto& R2 = right_->component(0, a, b);
              for (std::size_t u = 0; u < R1.rank(); ++u)
                for (std::size_t v = 0; v < R2.rank(); ++v) {
                  Vec r12 = right_->multiply_gens(0, t, a, u, 0, b, v);
                  if (act_right(s, t, x, b, r12) != act_right(s, a, act_right(s, t, x, a, gen(R1, u)), b, gen(R2, v)))
                    report.push_back("right action not associative");
                }
              // (l x) r = l (x r), l in L_{as}, r in R_{tb}
              const auto& L = left_->component(0, a, s);
              const auto& R = right_->component(0, t, b);
              for (std::size_t u = 0; u < L.rank(); ++u)
                for (std::size_t v = 0; v < R.rank(); ++v) {
                  Vec lhs = act_right(a, t, act_left(a, s, gen(L, u), t, x), b, gen(R, v));
                  Vec rhs = act_left(a, s, gen(L, u), b, act_right(s, t, x, b, gen(R, v)));
                  if (lhs != rhs) report.push_back("actions do not commute");
                }
            }
        }
      }
    return report;
  }

 private:
  RingPtr left_, right_;
  std::vector<FinModule> comps_;
  std::map<MultKey, ModMatrix> left_act_, right_act_;
};

// ---------------------------------------------------------------------------
// Tensor products over the base

/// A pure tensor of canonical generators along an object path.
struct Word {
  std::vector<std::uint32_t> objs;  // size = factors + 1
  std::vector<std::uint32_t> gens;  // size = factors
  friend auto operator<=>(const Word&, const Word&) = default;
};

/// Sparse linear combination of words.
using WordVec = std::vector<std::pair<Residue, Word>>;

/// K_1 ⊗_R K_2 ⊗_R ... ⊗_R K_r, presented as the free Z/m-module on words
/// modulo torsion and balancing relations, canonicalized per end pair (s,t).
class TensorProduct {
 public:
  TensorProduct() = default;

  explicit TensorProduct(std::vector<const Bimodule*> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw InvalidInput("tensor product needs at least one factor");
    m_ = factors_.front()->modulus();
    k_ = factors_.front()->object_count();
    for (std::size_t j = 0; j + 1 < factors_.size(); ++j) {
      const auto& a = factors_[j]->right_ptr();
      const auto& b = factors_[j + 1]->left_ptr();
      if (a != b && !(*a == *b)) throw InvalidInput("tensor product: base mismatch between factors");
    }
    diagonal_ = true;
    for (std::size_t j = 0; j + 1 < factors_.size(); ++j)
      if (!is_diagonal_base(factors_[j]->right_base())) diagonal_ = false;
    blocks_.resize(k_ * k_);
    for (std::size_t s = 0; s < k_; ++s)
      for (std::size_t t = 0; t < k_; ++t) build(s, t);
  }

  [[nodiscard]] std::size_t factor_count() const { return factors_.size(); }
  [[nodiscard]] const Bimodule& factor(std::size_t j) const { return *factors_.at(j); }
  [[nodiscard]] Residue modulus() const { return m_; }
  [[nodiscard]] std::size_t object_count() const { return k_; }
  [[nodiscard]] const FinModule& component(std::size_t s, std::size_t t) const {
    const Block& b = block(s, t);
    return b.identity ? factors_.front()->component(s, t) : b.q.module();
  }
  [[nodiscard]] std::size_t ambient_dim(std::size_t s, std::size_t t) const { return block(s, t).words.size(); }
  [[nodiscard]] const std::vector<Word>& words(std::size_t s, std::size_t t) const { return block(s, t).words; }

  /// Index of a word in the ambient free module of its end pair.
  [[nodiscard]] std::size_t index(const Word& w) const {
    const Block& b = block(w.objs.front(), w.objs.back());
    auto it = b.offsets.find(w.objs);
    if (it == b.offsets.end()) throw InvalidInput("word not in tensor product");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < w.gens.size(); ++j) {
      std::size_t rank = factors_[j]->component(w.objs[j], w.objs[j + 1]).rank();
      idx = idx * rank + w.gens[j];
    }
    return it->second + idx;
  }

  [[nodiscard]] Vec ambient(std::size_t s, std::size_t t, const WordVec& v) const {
    Vec out(ambient_dim(s, t), 0);
    for (const auto& [c, w] : v) {
      auto i = index(w);
      out[i] = exactla::mod(out[i] + c, m_);
    }
    return out;
  }

  /// Canonical coordinates of an ambient vector.
  [[nodiscard]] Vec coordinates(std::size_t s, std::size_t t, const Vec& amb) const {
    const Block& b = block(s, t);
    if (b.identity) return component(s, t).reduce(amb);
    return b.q.coordinates(amb);
  }
  [[nodiscard]] Vec coordinates(std::size_t s, std::size_t t, const WordVec& v) const {
    return coordinates(s, t, ambient(s, t, v));
  }

  /// Ambient representative of canonical generator g.
  [[nodiscard]] Vec lift(std::size_t s, std::size_t t, std::size_t g) const {
    const Block& b = block(s, t);
    if (b.identity) {
      Vec v(b.words.size(), 0);
      v[g] = 1;
      return v;
    }
    return b.q.generator(g);
  }

  /// Ambient representative of an element, as a word combination.
  [[nodiscard]] WordVec lift_words(std::size_t s, std::size_t t, const Vec& coords) const {
    const Block& b = block(s, t);
    Vec amb(b.words.size(), 0);
    for (std::size_t g = 0; g < coords.size(); ++g) {
      if (!coords[g]) continue;
      Vec l = lift(s, t, g);
      for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i]) amb[i] = (amb[i] + exactla::mul_mod(l[i], coords[g], m_)) % m_;
    }
    WordVec out;
    for (std::size_t i = 0; i < amb.size(); ++i)
      if (amb[i]) out.emplace_back(amb[i], b.words[i]);
    return out;
  }

  /// The product as a bimodule with the outer actions.
  [[nodiscard]] Bimodule as_bimodule() const {
    Bimodule out(factors_.front()->left_ptr(), factors_.back()->right_ptr());
    const std::size_t r = factors_.size();
    for (std::size_t s = 0; s < k_; ++s)
      for (std::size_t t = 0; t < k_; ++t) out.set_component(s, t, component(s, t));
    const BigRing& L = factors_.front()->left_base();
    const BigRing& R = factors_.back()->right_base();
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t s = 0; s < k_; ++s)
        for (std::size_t t = 0; t < k_; ++t) {
          // Left: L_{as} x T_{st} -> T_{at}
          const auto& La = L.component(0, a, s);
          const auto& T = component(s, t);
          if (La.rank() && T.rank() && component(a, t).rank()) {
            ModMatrix tb(component(a, t).rank(), La.rank() * T.rank());
            for (std::size_t u = 0; u < La.rank(); ++u) {
              Vec lu(La.rank(), 0);
              lu[u] = 1;
              for (std::size_t g = 0; g < T.rank(); ++g) {
                Vec e(T.rank(), 0);
                e[g] = 1;
                WordVec acted;
                for (auto& [c, w] : lift_words(s, t, e)) {
                  Vec x = factors_[0]->act_left(a, s, lu, w.objs[1], unit_vec(0, w, 0));
                  for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i]) {
                      Word w2 = w;
                      w2.objs[0] = static_cast<std::uint32_t>(a);
                      w2.gens[0] = static_cast<std::uint32_t>(i);
                      acted.emplace_back(exactla::mul_mod(c, x[i], m_), std::move(w2));
                    }
                }
                Vec col = coordinates(a, t, acted);
                for (std::size_t i = 0; i < col.size(); ++i) tb(i, u * T.rank() + g) = col[i];
              }
            }
            out.set_left(a, s, t, tb);
          }
          // Right: T_{st} x R_{ta} -> T_{sa}
          const auto& Ra = R.component(0, t, a);
          if (Ra.rank() && T.rank() && component(s, a).rank()) {
            ModMatrix tb(component(s, a).rank(), T.rank() * Ra.rank());
            for (std::size_t g = 0; g < T.rank(); ++g) {
              Vec e(T.rank(), 0);
              e[g] = 1;
              auto words = lift_words(s, t, e);
              for (std::size_t u = 0; u < Ra.rank(); ++u) {
                Vec ru(Ra.rank(), 0);
                ru[u] = 1;
                WordVec acted;
                for (auto& [c, w] : words) {
                  Vec x = factors_[r - 1]->act_right(w.objs[r - 1], t, unit_vec(r - 1, w, r - 1), a, ru);
                  for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i]) {
                      Word w2 = w;
                      w2.objs[r] = static_cast<std::uint32_t>(a);
                      w2.gens[r - 1] = static_cast<std::uint32_t>(i);
                      acted.emplace_back(exactla::mul_mod(c, x[i], m_), std::move(w2));
                    }
                }
                Vec col = coordinates(s, a, acted);
                for (std::size_t i = 0; i < col.size(); ++i) tb(i, g * Ra.rank() + u) = col[i];
              }
            }
            out.set_right(s, t, a, tb);
          }
        }
    return out;
  }

 private:
  struct Block {
    std::vector<Word> words;
    std::map<std::vector<std::uint32_t>, std::size_t> offsets;
    Subquotient q;
    bool identity = false;
  };

  [[nodiscard]] const Block& block(std::size_t s, std::size_t t) const { return blocks_.at(s * k_ + t); }

  // Generator basis vector of factor j's component for word position `pos`.
  [[nodiscard]] Vec unit_vec(std::size_t j, const Word& w, std::size_t pos) const {
    Vec v(factors_[j]->component(w.objs[pos], w.objs[pos + 1]).rank(), 0);
    v[w.gens[pos]] = 1;
    return v;
  }

  // Enumerates object paths s = o_0, ..., o_r = t with nonzero factor components.
  void paths(std::size_t s, std::size_t t, std::vector<std::uint32_t>& cur,
             std::vector<std::vector<std::uint32_t>>& out) const {
    const std::size_t j = cur.size() - 1;
    if (j == factors_.size()) {
      if (cur.back() == t) out.push_back(cur);
      return;
    }
    for (std::size_t o = 0; o < k_; ++o) {
      if (j + 1 == factors_.size() && o != t) continue;
      if (factors_[j]->component(cur.back(), o).is_zero()) continue;
      cur.push_back(static_cast<std::uint32_t>(o));
      paths(s, t, cur, out);
      cur.pop_back();
    }
  }

  void build(std::size_t s, std::size_t t) {
    Block& b = blocks_[s * k_ + t];
    std::vector<std::vector<std::uint32_t>> ps;
    std::vector<std::uint32_t> cur{static_cast<std::uint32_t>(s)};
    paths(s, t, cur, ps);
    for (const auto& p : ps) {
      b.offsets[p] = b.words.size();
      std::vector<std::size_t> ranks;
      std::size_t total = 1;
      for (std::size_t j = 0; j < factors_.size(); ++j) {
        ranks.push_back(factors_[j]->component(p[j], p[j + 1]).rank());
        total *= ranks.back();
      }
      Word w{p, std::vector<std::uint32_t>(factors_.size(), 0)};
      for (std::size_t c = 0; c < total; ++c) {
        std::size_t x = c;
        for (std::size_t j = factors_.size(); j-- > 0;) {
          w.gens[j] = static_cast<std::uint32_t>(x % ranks[j]);
          x /= ranks[j];
        }
        b.words.push_back(w);
      }
    }
    if (factors_.size() == 1) {
      b.identity = true;
      return;
    }
    const std::size_t N = b.words.size();
    std::vector<Vec> rels;
    // Torsion relations.
    for (std::size_t i = 0; i < N; ++i) {
      const Word& w = b.words[i];
      Residue d = m_;
      for (std::size_t j = 0; j < factors_.size(); ++j)
        d = exactla::gcd(d, factors_[j]->component(w.objs[j], w.objs[j + 1]).order(w.gens[j]));
      if (d != m_) {
        Vec v(N, 0);
        v[i] = d;
        rels.push_back(std::move(v));
      }
    }
    // Balancing relations x a ⊗ y - x ⊗ a y at each junction.
    if (!diagonal_) {
      for (std::size_t j = 0; j + 1 < factors_.size(); ++j) add_balancing(s, t, j, rels);
    }
    ModMatrix R(N, rels.size());
    for (std::size_t c = 0; c < rels.size(); ++c)
      for (std::size_t i = 0; i < N; ++i) R(i, c) = rels[c][i];
    b.q = Subquotient::quotient(N, R, m_);
  }

  void add_balancing(std::size_t s, std::size_t t, std::size_t j, std::vector<Vec>& rels) {
    const Block& b = blocks_[s * k_ + t];
    const BigRing& R = factors_[j]->right_base();
    const std::size_t N = b.words.size();
    // Words of the product with a base generator a in R(alpha, beta) inserted after factor j:
    // take any ambient word whose junction object is alpha for the left part and beta for the right.
    std::set<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> seen;
    for (const auto& [path, off] : b.offsets) {
      (void)off;
      for (std::size_t alpha = 0; alpha < k_; ++alpha)
        for (std::size_t beta = 0; beta < k_; ++beta) {
          const auto& Rab = R.component(0, alpha, beta);
          if (Rab.is_zero()) continue;
          // left part objects path[0..j], alpha ; right part beta, path[j+2..]
          const auto& Kx = factors_[j]->component(path[j], alpha);
          const auto& Ky = factors_[j + 1]->component(beta, path[j + 2]);
          if (Kx.is_zero() || Ky.is_zero()) continue;
          std::vector<std::uint32_t> key = path;
          key[j + 1] = static_cast<std::uint32_t>(alpha * k_ + beta);
          if (!seen.insert({key, {}}).second) continue;
          // Ranks of the other factors along this path.
          std::vector<std::size_t> ranks;
          std::size_t total = 1;
          for (std::size_t f = 0; f < factors_.size(); ++f) {
            std::size_t rk;
            if (f == j)
              rk = Kx.rank();
            else if (f == j + 1)
              rk = Ky.rank();
            else
              rk = factors_[f]->component(path[f], path[f + 1]).rank();
            ranks.push_back(rk);
            total *= rk;
          }
          for (std::size_t c = 0; c < total; ++c) {
            std::vector<std::uint32_t> gens(factors_.size());
            std::size_t x = c;
            for (std::size_t f = factors_.size(); f-- > 0;) {
              gens[f] = static_cast<std::uint32_t>(x % ranks[f]);
              x /= ranks[f];
            }
            Vec xg(Kx.rank(), 0), yg(Ky.rank(), 0);
            xg[gens[j]] = 1;
            yg[gens[j + 1]] = 1;
            for (std::size_t u = 0; u < Rab.rank(); ++u) {
              Vec a(Rab.rank(), 0);
              a[u] = 1;
              Vec xa = factors_[j]->act_right(path[j], alpha, xg, beta, a);
              Vec ay = factors_[j + 1]->act_left(alpha, beta, a, path[j + 2], yg);
              Vec rel(N, 0);
              Word w{path, gens};
              w.objs[j + 1] = static_cast<std::uint32_t>(beta);
              for (std::size_t i = 0; i < xa.size(); ++i)
                if (xa[i]) {
                  w.gens[j] = static_cast<std::uint32_t>(i);
                  auto idx = index_in(b, w);
                  rel[idx] = exactla::mod(rel[idx] + xa[i], m_);
                }
              w = Word{path, gens};
              w.objs[j + 1] = static_cast<std::uint32_t>(alpha);
              for (std::size_t i = 0; i < ay.size(); ++i)
                if (ay[i]) {
                  w.gens[j + 1] = static_cast<std::uint32_t>(i);
                  auto idx = index_in(b, w);
                  rel[idx] = exactla::mod(rel[idx] - ay[i], m_);
                }
              if (!exactla::is_zero(rel)) rels.push_back(std::move(rel));
            }
          }
        }
    }
  }

  [[nodiscard]] std::size_t index_in(const Block& b, const Word& w) const {
    auto it = b.offsets.find(w.objs);
    if (it == b.offsets.end()) throw InvalidInput("word not in tensor product");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < w.gens.size(); ++j)
      idx = idx * factors_[j]->component(w.objs[j], w.objs[j + 1]).rank() + w.gens[j];
    return it->second + idx;
  }

  std::vector<const Bimodule*> factors_;
  Residue m_ = 2;
  std::size_t k_ = 0;
  bool diagonal_ = true;
  std::vector<Block> blocks_;
};

/// N ⊗_R M as a bimodule with induced outer actions.
inline Bimodule tensor_over_base(const Bimodule& N, const Bimodule& M) {
  return TensorProduct({&N, &M}).as_bimodule();
}

// ---------------------------------------------------------------------------
// Restriction of base

/// B = R' ⊕ A_1 ⊕ A_2 ⊕ ... with the A_n pulled back along phi: R' -> A_0.
/// `phi` maps R'_{st} coordinates to A_{st;0} coordinates, indexed s*k+t.
inline BigGradedRing restrict_base(const BigGradedRing& A, const BigRing& Rp, const std::vector<ModMatrix>& phi) {
  const std::size_t k = A.object_count();
  if (!(Rp.objects() == A.objects())) throw InvalidInput("restrict_base: object sets differ");
  if (Rp.modulus() != A.modulus()) throw InvalidInput("restrict_base: modulus mismatch");
  if (phi.size() != k * k) throw InvalidInput("restrict_base: phi needs one matrix per object pair");
  auto apply_phi = [&](std::size_t s, std::size_t t, const Vec& x) {
    return A.component(0, s, t).reduce(exactla::apply_mod(phi[s * k + t], x, A.modulus()));
  };
  auto gen = [](const FinModule& M, std::size_t i) {
    Vec v(M.rank(), 0);
    v[i] = 1;
    return v;
  };
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      exactla::ModuleMap f{Rp.component(0, s, t), A.component(0, s, t), phi[s * k + t]};
      if (!f.well_defined()) throw InvalidInput("restrict_base: phi not well defined");
    }
  for (std::size_t s = 0; s < k; ++s)
    if (apply_phi(s, s, Rp.unit(s)) != A.unit(s)) throw InvalidInput("restrict_base: phi is not unital");
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t i = 0; i < Rp.component(0, s, t).rank(); ++i)
          for (std::size_t j = 0; j < Rp.component(0, t, r).rank(); ++j) {
            Vec lhs = apply_phi(s, r, Rp.multiply_gens(0, s, t, i, 0, r, j));
            Vec rhs = A.multiply(0, s, t, apply_phi(s, t, gen(Rp.component(0, s, t), i)), 0, r,
                                 apply_phi(t, r, gen(Rp.component(0, t, r), j)));
            if (lhs != rhs) throw InvalidInput("restrict_base: phi is not multiplicative");
          }

  BigGradedRing B(A.objects(), A.modulus(), A.max_degree());
  for (int n = 0; n <= A.max_degree(); ++n)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t)
        B.set_component(n, s, t, n == 0 ? Rp.component(0, s, t) : A.component(n, s, t));
  for (std::size_t s = 0; s < k; ++s) B.set_unit(s, Rp.unit(s));
  for (const auto& [key, tb] : Rp.tables()) B.set_mult(0, 0, key.s, key.t, key.r, tb);
  for (const auto& [key, tb] : A.tables()) {
    if (key.p > 0 && key.q > 0) B.set_mult(key.p, key.q, key.s, key.t, key.r, tb);
  }
  for (int n = 1; n <= A.max_degree(); ++n)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t)
        for (std::size_t r = 0; r < k; ++r) {
          // R'_{st} x A_{tr;n}
          const auto& P = Rp.component(0, s, t);
          const auto& X = A.component(n, t, r);
          if (P.rank() && X.rank() && A.component(n, s, r).rank()) {
            ModMatrix tb(A.component(n, s, r).rank(), P.rank() * X.rank());
            for (std::size_t i = 0; i < P.rank(); ++i) {
              Vec a = apply_phi(s, t, gen(P, i));
              for (std::size_t j = 0; j < X.rank(); ++j) {
                Vec c = A.multiply(0, s, t, a, n, r, gen(X, j));
                for (std::size_t u = 0; u < c.size(); ++u) tb(u, i * X.rank() + j) = c[u];
              }
            }
            B.set_mult(0, n, s, t, r, tb);
          }
          // A_{st;n} x R'_{tr}
          const auto& Y = A.component(n, s, t);
          const auto& Q = Rp.component(0, t, r);
          if (Y.rank() && Q.rank() && A.component(n, s, r).rank()) {
            ModMatrix tb(A.component(n, s, r).rank(), Y.rank() * Q.rank());
            for (std::size_t i = 0; i < Y.rank(); ++i)
              for (std::size_t j = 0; j < Q.rank(); ++j) {
                Vec c = A.multiply(n, s, t, gen(Y, i), 0, r, apply_phi(t, r, gen(Q, j)));
                for (std::size_t u = 0; u < c.size(); ++u) tb(u, i * Q.rank() + j) = c[u];
              }
            B.set_mult(n, 0, s, t, r, tb);
          }
        }
  return B;
}

/// Restriction along the diagonal base Z/m -> A_0 sending 1_s to e_s.
inline BigGradedRing restrict_to_diagonal(const BigGradedRing& A) {
  const std::size_t k = A.object_count();
  BigRing D = diagonal_base(A.objects(), A.modulus());
  std::vector<ModMatrix> phi(k * k);
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      phi[s * k + t] = ModMatrix(A.component(0, s, t).rank(), D.component(0, s, t).rank());
      if (s == t)
        for (std::size_t i = 0; i < A.unit(s).size(); ++i) phi[s * k + t](i, 0) = A.unit(s)[i];
    }
  return restrict_base(A, D, phi);
}

// ---------------------------------------------------------------------------
// Flatness

enum class Side { left, right };

namespace detail {

// p-part of each invariant factor is trivial or the full p-part of m.
inline bool locally_free(const FinModule& M) {
  const Residue m = M.modulus();
  for (auto [p, e] : exactla::factorize(m)) {
    Residue full = 1;
    for (int i = 0; i < e; ++i) full *= p;
    for (Residue d : M.factors()) {
      Residue g = exactla::gcd(d, full);
      if (g != 1 && g != full) return false;
    }
  }
  return true;
}

// Row-reduced echelon basis of the span of `vecs` over the prime field Z/p.
inline std::vector<Vec> echelon(std::vector<Vec> vecs, Residue p) {
  std::vector<Vec> out;
  if (vecs.empty()) return out;
  const std::size_t n = vecs.front().size();
  std::size_t row = 0;
  for (std::size_t c = 0; c < n && row < vecs.size(); ++c) {
    std::size_t piv = row;
    while (piv < vecs.size() && vecs[piv][c] % p == 0) ++piv;
    if (piv == vecs.size()) continue;
    std::swap(vecs[row], vecs[piv]);
    Residue inv = exactla::inverse_mod(vecs[row][c], p);
    for (auto& x : vecs[row]) x = exactla::mul_mod(x, inv, p);
    for (std::size_t r = 0; r < vecs.size(); ++r) {
      if (r == row || vecs[r][c] == 0) continue;
      Residue f = vecs[r][c];
      for (std::size_t i = 0; i < n; ++i) vecs[r][i] = exactla::mod(vecs[r][i] - exactla::mul_mod(f, vecs[row][i], p), p);
    }
    ++row;
  }
  vecs.resize(row);
  return vecs;
}

}  // namespace detail

/// Flatness of K as a module over its right (or left) base. Over a diagonal
/// base this is local freeness of every component; over a general base with
/// prime modulus it is tested against every left (resp. right) ideal of the
/// representable modules.
inline bool is_flat(const Bimodule& K, Side side) {
  const BigRing& R = side == Side::right ? K.right_base() : K.left_base();
  const std::size_t k = K.object_count();
  if (is_diagonal_base(R)) {
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t)
        if (!detail::locally_free(K.component(s, t))) return false;
    return true;
  }
  const Residue p = R.modulus();
  if (!exactla::is_prime(p)) throw Unsupported("flatness over a nondiagonal base requires a prime modulus");
  // Ideals J inside the representable R_{.tau} (right side) or R_{tau.} (left side).
  for (std::size_t tau = 0; tau < k; ++tau) {
    // Ambient: concatenation over sigma of R component coordinates.
    std::vector<std::size_t> offs(k + 1, 0);
    for (std::size_t s = 0; s < k; ++s)
      offs[s + 1] = offs[s] + (side == Side::right ? R.component(0, s, tau).rank() : R.component(0, tau, s).rank());
    const std::size_t N = offs[k];
    auto close = [&](std::vector<Vec> gens) {
      // Submodule generated under the R action on the appropriate side.
      std::vector<Vec> basis = detail::echelon(gens, p);
      for (bool grew = true; grew;) {
        grew = false;
        std::vector<Vec> more = basis;
        for (const auto& v : basis)
          for (std::size_t s = 0; s < k; ++s)
            for (std::size_t a = 0; a < k; ++a) {
              const auto& Ra = side == Side::right ? R.component(0, a, s) : R.component(0, s, a);
              for (std::size_t u = 0; u < Ra.rank(); ++u) {
                Vec r(Ra.rank(), 0);
                r[u] = 1;
                Vec x(v.begin() + offs[s], v.begin() + offs[s + 1]);
                Vec y = side == Side::right ? R.multiply(0, a, s, r, 0, tau, x) : R.multiply(0, tau, s, x, 0, a, r);
                Vec w(N, 0);
                for (std::size_t i = 0; i < y.size(); ++i) w[offs[a] + i] = y[i];
                more.push_back(w);
              }
            }
        auto nb = detail::echelon(more, p);
        if (nb.size() != basis.size()) grew = true;
        basis = std::move(nb);
      }
      return basis;
    };
    // Enumerate submodules by closing single elements and sums.
    std::set<std::vector<Vec>> ideals;
    std::vector<std::vector<Vec>> frontier;
    Residue total = 1;
    for (std::size_t i = 0; i < N; ++i) total *= p;
    if (total > 4096) throw BudgetExceeded("flatness test: base too large to enumerate ideals");
    for (Residue c = 1; c < total; ++c) {
      Vec v(N);
      Residue x = c;
      for (std::size_t i = 0; i < N; ++i) v[i] = x % p, x /= p;
      auto J = close({v});
      if (ideals.insert(J).second) frontier.push_back(J);
    }
    std::vector<std::vector<Vec>> cyclic(ideals.begin(), ideals.end());
    while (!frontier.empty()) {
      std::vector<std::vector<Vec>> next;
      for (const auto& J : frontier)
        for (const auto& C : cyclic) {
          auto both = J;
          both.insert(both.end(), C.begin(), C.end());
          auto S = close(both);
          if (ideals.insert(S).second) next.push_back(S);
        }
      frontier = std::move(next);
    }
    // Tensor test: K ⊗_R J -> K ⊗_R R_{.tau} = K_{.tau} injective for every row object rho.
    for (const auto& J : ideals) {
      for (std::size_t rho = 0; rho < k; ++rho) {
        // Ambient: pairs (sigma, x generator of K_{rho sigma}, j generator of J).
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> amb;
        for (std::size_t s = 0; s < k; ++s) {
          const auto& Ks = side == Side::right ? K.component(rho, s) : K.component(s, rho);
          for (std::size_t x = 0; x < Ks.rank(); ++x)
            for (std::size_t j = 0; j < J.size(); ++j) amb.emplace_back(s, x, j);
        }
        if (amb.empty()) continue;
        const auto& target = side == Side::right ? K.component(rho, tau) : K.component(tau, rho);
        auto jpart = [&](std::size_t j, std::size_t s) { return Vec(J[j].begin() + offs[s], J[j].begin() + offs[s + 1]); };
        auto act = [&](std::size_t s, const Vec& x, const Vec& r) {
          return side == Side::right ? K.act_right(rho, s, x, tau, r) : K.act_left(tau, s, r, rho, x);
        };
        // Balancing relations: x a ⊗ j - x ⊗ a j, for a in R_{s s'} (right side).
        // Presented by the tensor over Z/m of the free module on J's basis; we compare dimensions:
        // injectivity <=> dim(image) == dim(K ⊗_R J).
        ModMatrix mapM(target.rank(), amb.size());
        for (std::size_t c = 0; c < amb.size(); ++c) {
          auto [s, x, j] = amb[c];
          const auto& Ks = side == Side::right ? K.component(rho, s) : K.component(s, rho);
          Vec xv(Ks.rank(), 0);
          xv[x] = 1;
          Vec y = act(s, xv, jpart(j, s));
          for (std::size_t i = 0; i < y.size(); ++i) mapM(i, c) = y[i];
        }
        // Relations in the ambient: elements sum_j c_j (x ⊗ j) where sum c_j j = 0 in R (J basis is
        // independent so none), plus balancing: for x in K_{rho a}, r in R_{a s}, j in J: (x r) ⊗ j - x ⊗ (r j).
        std::vector<Vec> rels;
        for (std::size_t a = 0; a < k; ++a) {
          const auto& Ka = side == Side::right ? K.component(rho, a) : K.component(a, rho);
          for (std::size_t x = 0; x < Ka.rank(); ++x)
            for (std::size_t s = 0; s < k; ++s) {
              const auto& Ras = side == Side::right ? R.component(0, a, s) : R.component(0, s, a);
              for (std::size_t u = 0; u < Ras.rank(); ++u)
                for (std::size_t j = 0; j < J.size(); ++j) {
                  Vec xv(Ka.rank(), 0);
                  xv[x] = 1;
                  Vec r(Ras.rank(), 0);
                  r[u] = 1;
                  Vec rel(amb.size(), 0);
                  // x r in K_{rho s}
                  Vec xr = side == Side::right ? K.act_right(rho, a, xv, s, r) : K.act_left(s, a, r, rho, xv);
                  for (std::size_t c = 0; c < amb.size(); ++c) {
                    auto [s2, x2, j2] = amb[c];
                    if (s2 == s && j2 == j) rel[c] = exactla::mod(rel[c] + xr[x2], p);
                  }
                  // r j in J restricted to component a: express in J basis
                  Vec js = jpart(j, s);
                  Vec rj = side == Side::right ? R.multiply(0, a, s, r, 0, tau, js) : R.multiply(0, tau, s, js, 0, a, r);
                  Vec full(N, 0);
                  for (std::size_t i = 0; i < rj.size(); ++i) full[offs[a] + i] = rj[i];
                  // coordinates of full in basis J (echelon): solve
                  ModMatrix B(N, J.size());
                  for (std::size_t jj = 0; jj < J.size(); ++jj)
                    for (std::size_t i = 0; i < N; ++i) B(i, jj) = J[jj][i];
                  auto coef = exactla::solve_mod(B, full, p);
                  if (!coef) throw Error("flatness test: ideal not closed");
                  for (std::size_t c = 0; c < amb.size(); ++c) {
                    auto [s2, x2, j2] = amb[c];
                    if (s2 == a && x2 == x) rel[c] = exactla::mod(rel[c] - (*coef)[j2], p);
                  }
                  if (!exactla::is_zero(rel)) rels.push_back(std::move(rel));
                }
            }
        }
        ModMatrix Rm(amb.size(), rels.size());
        for (std::size_t c = 0; c < rels.size(); ++c)
          for (std::size_t i = 0; i < amb.size(); ++i) Rm(i, c) = rels[c][i];
        Subquotient T = Subquotient::quotient(amb.size(), Rm, p);
        exactla::ModuleMap f{T.module(), target, exactla::ModMatrix(target.rank(), T.module().rank())};
        for (std::size_t g = 0; g < T.module().rank(); ++g) {
          Vec y = exactla::apply_mod(mapM, T.generator(g), p);
          for (std::size_t i = 0; i < y.size(); ++i) f.matrix(i, g) = y[i];
        }
        if (!exactla::kernel_of(f).module().is_zero()) return false;
      }
    }
  }
  return true;
}

/// Flatness of the bimodule A_n over A_0 on the given side.
inline bool component_is_flat(const BigGradedRing& A, int n, Side side) {
  return is_flat(Bimodule::of_component(A, n), side);
}

}  // namespace koszul::bigring
