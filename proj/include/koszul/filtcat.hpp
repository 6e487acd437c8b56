#pragma once

// Exact categories of finitely filtered modules over a finite group ring with
// prescribed graded pieces: Hom and Ext^1 by cocycles, Baer sums, vanishing of
// Yoneda products in Ext^2, the filtered cobar model for conilpotent
// coalgebras, diagonal Ext rings, and the filtered categories with a Frobenius
// endomorphism over Z[1/q] and Z.
//
// Objects are free over Z/m and given in an adapted basis: a list of blocks,
// each a copy of an allowed piece at some level, with F^i spanned by the blocks
// of level >= i. A map f : X -> Y is filtered when f(r, c) = 0 whenever
// level_Y(r) < level_X(c). Admissible triples are those that are split exact on
// every graded piece.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "koszul/exactla.hpp"
#include "koszul/quadra.hpp"

namespace koszul::filtcat {

using exactla::FinModule;
using exactla::Integer;
using exactla::IntMatrix;
using exactla::ModMatrix;
using exactla::ModuleMap;
using exactla::Residue;
using exactla::Subquotient;
using exactla::Vec;

namespace detail {

inline bool is_zero(const ModMatrix& A) {
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (auto x : A.row(i))
      if (x) return false;
  return true;
}

inline ModMatrix add(const ModMatrix& a, const ModMatrix& b, Residue m, Residue sign = 1) {
  ModMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = exactla::mod(a(i, j) + sign * b(i, j), m);
  return out;
}

inline ModMatrix scale(ModMatrix a, Residue s, Residue m) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (auto& x : a.row(i)) x = exactla::mul_mod(x, s, m);
  return a;
}

inline ModMatrix block(const std::vector<std::vector<const ModMatrix*>>& blocks, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
  std::size_t R = 0, C = 0;
  for (auto r : rows) R += r;
  for (auto c : cols) C += c;
  ModMatrix out(R, C);
  std::size_t r0 = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t c0 = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (const ModMatrix* b = blocks[i][j])
        for (std::size_t r = 0; r < rows[i]; ++r)
          for (std::size_t c = 0; c < cols[j]; ++c) out(r0 + r, c0 + c) = (*b)(r, c);
      c0 += cols[j];
    }
    r0 += rows[i];
  }
  return out;
}

/// X with A X = B, column by column; nullopt if some column has no solution.
inline std::optional<ModMatrix> solve_columns(const ModMatrix& A, const ModMatrix& B, Residue m) {
  ModMatrix X(A.cols(), B.cols());
  for (std::size_t j = 0; j < B.cols(); ++j) {
    auto x = A.rows() ? exactla::solve_mod(A, B.column(j), m) : std::optional<Vec>(Vec(A.cols(), 0));
    if (!x) return std::nullopt;
    for (std::size_t i = 0; i < A.cols(); ++i) X(i, j) = (*x)[i];
  }
  return X;
}

inline ModMatrix inverse(const ModMatrix& A, Residue m) {
  auto X = solve_columns(A, ModMatrix::identity(A.rows()), m);
  if (!X || A.rows() != A.cols()) throw InvalidInput("matrix is not invertible");
  return *X;
}

inline ModMatrix columns_of(const std::vector<Vec>& cols, std::size_t n) {
  ModMatrix out(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) out(i, j) = cols[j][i];
  return out;
}

inline std::size_t mod_rank(const ModMatrix& A, Residue m) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  auto s = exactla::smith_mod(A, m, exactla::kTrackNone);
  std::size_t r = 0;
  for (auto d : s.diag) r += d != 0;
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Finite groups and modules

class FinGroup {
 public:
  FinGroup() : FinGroup({{0}}, {}) {}

  /// table[a][b] = ab. Checks the group axioms and that the generators generate.
  FinGroup(std::vector<std::vector<std::size_t>> table, std::vector<std::size_t> generators)
      : table_(std::move(table)), gens_(std::move(generators)) {
    const std::size_t n = table_.size();
    if (n == 0) throw InvalidInput("a group has at least one element");
    for (const auto& row : table_) {
      if (row.size() != n) throw InvalidInput("multiplication table must be square");
      for (auto x : row)
        if (x >= n) throw InvalidInput("multiplication table entry out of range");
    }
    bool found = false;
    for (std::size_t e = 0; e < n && !found; ++e) {
      bool ok = true;
      for (std::size_t a = 0; a < n && ok; ++a) ok = table_[e][a] == a && table_[a][e] == a;
      if (ok) identity_ = e, found = true;
    }
    if (!found) throw InvalidInput("multiplication table has no identity");
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          if (table_[table_[a][b]][c] != table_[a][table_[b][c]]) throw InvalidInput("multiplication is not associative");
    inverse_.assign(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (table_[a][b] == identity_) inverse_[a] = b;
    for (std::size_t a = 0; a < n; ++a)
      if (inverse_[a] == n) throw InvalidInput("element without inverse");
    for (auto s : gens_)
      if (s >= n) throw InvalidInput("generator out of range");
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> todo{identity_};
    seen[identity_] = true;
    while (!todo.empty()) {
      auto g = todo.back();
      todo.pop_back();
      for (auto s : gens_)
        if (!seen[table_[g][s]]) seen[table_[g][s]] = true, todo.push_back(table_[g][s]);
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw InvalidInput("generators do not generate");
  }

  static FinGroup cyclic(std::size_t n) {
    if (n == 0) throw InvalidInput("cyclic group of order 0");
    std::vector<std::vector<std::size_t>> t(n, std::vector<std::size_t>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) t[a][b] = (a + b) % n;
    return FinGroup(std::move(t), n > 1 ? std::vector<std::size_t>{1} : std::vector<std::size_t>{});
  }

  static FinGroup product(const FinGroup& a, const FinGroup& b) {
    const std::size_t na = a.order(), nb = b.order();
    std::vector<std::vector<std::size_t>> t(na * nb, std::vector<std::size_t>(na * nb));
    for (std::size_t x = 0; x < na * nb; ++x)
      for (std::size_t y = 0; y < na * nb; ++y) t[x][y] = a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb);
    std::vector<std::size_t> gens;
    for (auto s : a.generators()) gens.push_back(s * nb + b.identity());
    for (auto s : b.generators()) gens.push_back(a.identity() * nb + s);
    return FinGroup(std::move(t), std::move(gens));
  }

  [[nodiscard]] std::size_t order() const noexcept { return table_.size(); }
  [[nodiscard]] std::size_t mul(std::size_t a, std::size_t b) const { return table_.at(a).at(b); }
  [[nodiscard]] std::size_t inverse(std::size_t a) const { return inverse_.at(a); }
  [[nodiscard]] std::size_t identity() const noexcept { return identity_; }
  [[nodiscard]] const std::vector<std::size_t>& generators() const noexcept { return gens_; }
  [[nodiscard]] const std::vector<std::vector<std::size_t>>& table() const noexcept { return table_; }

  friend bool operator==(const FinGroup& a, const FinGroup& b) { return a.table_ == b.table_ && a.gens_ == b.gens_; }

 private:
  std::vector<std::vector<std::size_t>> table_;
  std::vector<std::size_t> gens_;
  std::vector<std::size_t> inverse_;
  std::size_t identity_ = 0;
};

/// Left action of a finite group on (Z/m)^rank.
class GModule {
 public:
  GModule() = default;

  /// The action of the generators, extended to the whole group and checked
  /// against the multiplication table.
  GModule(FinGroup G, Residue m, std::size_t rank, std::vector<ModMatrix> gen_action)
      : G_(std::move(G)), m_(m), rank_(rank), gens_(std::move(gen_action)) {
    if (m < 2) throw InvalidInput("modulus must be at least 2");
    if (gens_.size() != G_.generators().size()) throw InvalidInput("one action matrix per generator expected");
    for (auto& a : gens_) {
      if (a.rows() != rank || a.cols() != rank) throw InvalidInput("action matrix has wrong shape");
      a = exactla::reduce(std::move(a), m);
    }
    const std::size_t n = G_.order();
    std::vector<std::optional<ModMatrix>> act(n);
    act[G_.identity()] = ModMatrix::identity(rank);
    std::queue<std::size_t> todo;
    todo.push(G_.identity());
    while (!todo.empty()) {
      const std::size_t g = todo.front();
      todo.pop();
      for (std::size_t k = 0; k < gens_.size(); ++k) {
        const std::size_t h = G_.mul(g, G_.generators()[k]);
        ModMatrix cand = exactla::mul_mod(*act[g], gens_[k], m);
        if (!act[h]) {
          act[h] = std::move(cand);
          todo.push(h);
        } else if (!(*act[h] == cand)) {
          throw InvalidInput("action does not respect the group relations");
        }
      }
    }
    for (auto& a : act) act_.push_back(std::move(*a));
  }

  static GModule trivial(const FinGroup& G, Residue m, std::size_t rank = 1) {
    return GModule(G, m, rank, std::vector<ModMatrix>(G.generators().size(), ModMatrix::identity(rank)));
  }

  /// Rank one, each generator acting by the given scalar.
  static GModule character(const FinGroup& G, Residue m, const Vec& values) {
    std::vector<ModMatrix> a;
    for (auto v : values) a.push_back(ModMatrix::from_rows({{v}}));
    return GModule(G, m, 1, std::move(a));
  }

  /// Z/m[G] with G acting by left multiplication on the basis of group elements.
  static GModule regular(const FinGroup& G, Residue m) {
    const std::size_t n = G.order();
    std::vector<ModMatrix> a;
    for (auto s : G.generators()) {
      ModMatrix P(n, n);
      for (std::size_t x = 0; x < n; ++x) P(G.mul(s, x), x) = 1;
      a.push_back(std::move(P));
    }
    return GModule(G, m, n, std::move(a));
  }

  [[nodiscard]] const FinGroup& group() const noexcept { return G_; }
  [[nodiscard]] Residue modulus() const noexcept { return m_; }
  [[nodiscard]] std::size_t rank() const noexcept { return rank_; }
  [[nodiscard]] FinModule underlying() const { return FinModule::free(m_, rank_); }
  [[nodiscard]] const ModMatrix& act(std::size_t g) const { return act_.at(g); }
  [[nodiscard]] const std::vector<ModMatrix>& generator_action() const noexcept { return gens_; }

  friend bool operator==(const GModule& a, const GModule& b) {
    return a.G_ == b.G_ && a.m_ == b.m_ && a.rank_ == b.rank_ && a.gens_ == b.gens_;
  }

 private:
  FinGroup G_;
  Residue m_ = 2;
  std::size_t rank_ = 0;
  std::vector<ModMatrix> gens_;
  std::vector<ModMatrix> act_;
};

/// Allowed graded pieces: at level i, piece k is pieces[k] tensored with the
/// i-th power of the twist character.
struct TwistSetup {
  FinGroup G;
  Residue m = 2;
  Vec twist;                    // character value on every group element
  std::vector<GModule> pieces;  // level-zero pieces
  std::vector<std::string> names;

  /// Trivial twist with the trivial rank-one module as the only piece.
  static TwistSetup trivial(const FinGroup& G, Residue m) {
    TwistSetup s{G, m, Vec(G.order(), 1), {GModule::trivial(G, m)}, {"Z/" + std::to_string(m)}};
    s.validate();
    return s;
  }

  /// Twist by the character with the given values on the generators.
  static TwistSetup twisted(const FinGroup& G, Residue m, const Vec& generator_values) {
    auto chi = GModule::character(G, m, generator_values);
    TwistSetup s{G, m, Vec(G.order()), {GModule::trivial(G, m)}, {"Z/" + std::to_string(m)}};
    for (std::size_t g = 0; g < G.order(); ++g) s.twist[g] = chi.act(g)(0, 0);
    s.validate();
    return s;
  }

  void validate() const {
    if (twist.size() != G.order()) throw InvalidInput("twist needs a value for every group element");
    for (std::size_t a = 0; a < G.order(); ++a) {
      if (exactla::gcd(twist[a], m) != 1) throw InvalidInput("twist values must be units");
      for (std::size_t b = 0; b < G.order(); ++b)
        if (exactla::mul_mod(twist[a], twist[b], m) != exactla::mod(twist[G.mul(a, b)], m))
          throw InvalidInput("twist is not a character");
    }
    if (pieces.empty()) throw InvalidInput("at least one graded piece is required");
    if (names.size() != pieces.size()) throw InvalidInput("one name per piece expected");
    for (const auto& p : pieces)
      if (!(p.group() == G) || p.modulus() != m) throw InvalidInput("piece over a different group or modulus");
  }

  [[nodiscard]] Residue twist_power(std::size_t g, int level) const {
    Residue base = level >= 0 ? twist[g] : exactla::inverse_mod(twist[g], m);
    Residue out = 1;
    for (int i = 0; i < (level >= 0 ? level : -level); ++i) out = exactla::mul_mod(out, base, m);
    return out;
  }

  /// Action of generator number k on piece p at the given level.
  [[nodiscard]] ModMatrix piece_action(std::size_t p, int level, std::size_t k) const {
    return detail::scale(pieces.at(p).generator_action()[k], twist_power(G.generators()[k], level), m);
  }

  friend bool operator==(const TwistSetup& a, const TwistSetup& b) {
    return a.G == b.G && a.m == b.m && a.twist == b.twist && a.pieces == b.pieces;
  }
};

using SetupPtr = std::shared_ptr<const TwistSetup>;

inline SetupPtr make_setup(TwistSetup s) {
  s.validate();
  return std::make_shared<const TwistSetup>(std::move(s));
}

struct Block {
  int level = 0;
  std::size_t piece = 0;
  friend bool operator==(const Block&, const Block&) = default;
};

// ---------------------------------------------------------------------------
// Filtered modules

class FilteredGModule {
 public:
  FilteredGModule() = default;

  /// Checks that the generators act by filtered maps whose graded parts are
  /// exactly the prescribed pieces, and that they define a group action.
  FilteredGModule(SetupPtr setup, std::vector<Block> blocks, std::vector<ModMatrix> gen_action)
      : setup_(std::move(setup)), blocks_(std::move(blocks)) {
    if (!setup_) throw InvalidInput("filtered module needs a category setup");
    const auto& S = *setup_;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].piece >= S.pieces.size()) throw InvalidInput("unknown piece");
      const std::size_t r = S.pieces[blocks_[b].piece].rank();
      for (std::size_t i = 0; i < r; ++i) {
        levels_.push_back(blocks_[b].level);
        owner_.push_back(b);
      }
      offset_.push_back(levels_.size() - r);
    }
    const std::size_t n = levels_.size();
    if (gen_action.size() != S.G.generators().size()) throw InvalidInput("one action matrix per generator expected");
    for (std::size_t k = 0; k < gen_action.size(); ++k) {
      auto& a = gen_action[k];
      if (a.rows() != n || a.cols() != n) throw InvalidInput("action matrix has wrong shape");
      a = exactla::reduce(std::move(a), S.m);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
          if (levels_[r] < levels_[c]) {
            if (a(r, c)) throw InvalidInput("action does not preserve the filtration");
            continue;
          }
          if (levels_[r] != levels_[c]) continue;
          Residue want = 0;
          if (owner_[r] == owner_[c]) {
            const auto& b = blocks_[owner_[r]];
            want = S.piece_action(b.piece, b.level, k)(r - offset_[owner_[r]], c - offset_[owner_[c]]);
          }
          if (a(r, c) != want) throw InvalidInput("graded piece differs from the prescribed piece");
        }
    }
    module_ = GModule(S.G, S.m, n, std::move(gen_action));
  }

  /// Direct sum of pieces with no extension data.
  static FilteredGModule graded(SetupPtr setup, std::vector<Block> blocks) {
    std::vector<std::size_t> sizes;
    for (const auto& b : blocks) sizes.push_back(setup->pieces.at(b.piece).rank());
    std::vector<ModMatrix> gens;
    for (std::size_t k = 0; k < setup->G.generators().size(); ++k) {
      std::vector<ModMatrix> diag;
      for (const auto& b : blocks) diag.push_back(setup->piece_action(b.piece, b.level, k));
      std::vector<std::vector<const ModMatrix*>> grid(blocks.size(), std::vector<const ModMatrix*>(blocks.size()));
      for (std::size_t i = 0; i < blocks.size(); ++i) grid[i][i] = &diag[i];
      gens.push_back(detail::block(grid, sizes, sizes));
    }
    return FilteredGModule(std::move(setup), std::move(blocks), std::move(gens));
  }

  [[nodiscard]] const SetupPtr& setup() const noexcept { return setup_; }
  [[nodiscard]] const std::vector<Block>& blocks() const noexcept { return blocks_; }
  [[nodiscard]] std::size_t dim() const noexcept { return levels_.size(); }
  [[nodiscard]] int level(std::size_t i) const { return levels_.at(i); }
  [[nodiscard]] const std::vector<int>& levels() const noexcept { return levels_; }
  [[nodiscard]] Residue modulus() const { return setup_->m; }
  [[nodiscard]] const FinGroup& group() const { return setup_->G; }
  [[nodiscard]] const ModMatrix& act(std::size_t g) const { return module_.act(g); }
  [[nodiscard]] const std::vector<ModMatrix>& generator_action() const { return module_.generator_action(); }
  [[nodiscard]] const GModule& underlying() const noexcept { return module_; }

  friend bool operator==(const FilteredGModule& a, const FilteredGModule& b) {
    return (a.setup_ == b.setup_ || (a.setup_ && b.setup_ && *a.setup_ == *b.setup_)) && a.blocks_ == b.blocks_ &&
           a.module_ == b.module_;
  }

 private:
  SetupPtr setup_;
  std::vector<Block> blocks_;
  std::vector<int> levels_;
  std::vector<std::size_t> owner_;
  std::vector<std::size_t> offset_;
  GModule module_;
};

/// E_level: one copy of the piece at the given level.
inline FilteredGModule generator(const SetupPtr& setup, int level, std::size_t piece = 0) {
  return FilteredGModule::graded(setup, {{level, piece}});
}

/// X(k): levels raised by k, action multiplied by the k-th power of the twist.
inline FilteredGModule twist(const FilteredGModule& X, int k) {
  const auto& S = *X.setup();
  std::vector<Block> blocks = X.blocks();
  for (auto& b : blocks) b.level += k;
  std::vector<ModMatrix> gens;
  for (std::size_t j = 0; j < S.G.generators().size(); ++j)
    gens.push_back(detail::scale(X.generator_action()[j], S.twist_power(S.G.generators()[j], k), S.m));
  return FilteredGModule(X.setup(), std::move(blocks), std::move(gens));
}

inline FilteredGModule direct_sum(const FilteredGModule& X, const FilteredGModule& Y) {
  std::vector<Block> blocks = X.blocks();
  blocks.insert(blocks.end(), Y.blocks().begin(), Y.blocks().end());
  std::vector<ModMatrix> gens;
  for (std::size_t j = 0; j < X.generator_action().size(); ++j) {
    std::vector<std::vector<const ModMatrix*>> grid{{&X.generator_action()[j], nullptr},
                                                    {nullptr, &Y.generator_action()[j]}};
    gens.push_back(detail::block(grid, {X.dim(), Y.dim()}, {X.dim(), Y.dim()}));
  }
  return FilteredGModule(X.setup(), std::move(blocks), std::move(gens));
}

/// f : X -> Y (a Y.dim x X.dim matrix) preserves the filtrations.
inline bool is_filtered(const FilteredGModule& X, const FilteredGModule& Y, const ModMatrix& f) {
  if (f.rows() != Y.dim() || f.cols() != X.dim()) return false;
  for (std::size_t r = 0; r < Y.dim(); ++r)
    for (std::size_t c = 0; c < X.dim(); ++c)
      if (Y.level(r) < X.level(c) && exactla::mod(f(r, c), X.modulus())) return false;
  return true;
}

inline bool is_morphism(const FilteredGModule& X, const FilteredGModule& Y, const ModMatrix& f) {
  if (!is_filtered(X, Y, f)) return false;
  const Residue m = X.modulus();
  for (std::size_t k = 0; k < X.generator_action().size(); ++k)
    if (!(exactla::mul_mod(f, X.generator_action()[k], m) == exactla::mul_mod(Y.generator_action()[k], f, m)))
      return false;
  return true;
}

namespace detail {

enum class SlotKind { filtered, strict, equal };

/// Matrix positions (r, c) of maps X -> Y allowed by the given kind.
struct Slots {
  std::size_t rows = 0, cols = 0;
  std::vector<std::pair<std::size_t, std::size_t>> at;

  Slots(const FilteredGModule& X, const FilteredGModule& Y, SlotKind kind) : rows(Y.dim()), cols(X.dim()) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const int a = Y.level(r), b = X.level(c);
        if ((kind == SlotKind::filtered && a >= b) || (kind == SlotKind::strict && a > b) ||
            (kind == SlotKind::equal && a == b))
          at.emplace_back(r, c);
      }
  }

  [[nodiscard]] std::size_t size() const { return at.size(); }

  [[nodiscard]] ModMatrix expand(const Vec& v, std::size_t offset = 0) const {
    ModMatrix M(rows, cols);
    for (std::size_t k = 0; k < at.size(); ++k) M(at[k].first, at[k].second) = v[offset + k];
    return M;
  }

  void flatten_into(const ModMatrix& M, Vec& out, std::size_t offset = 0) const {
    for (std::size_t k = 0; k < at.size(); ++k) out[offset + k] = M(at[k].first, at[k].second);
  }
};

/// Matrix of a linear map given on unit vectors.
template <class F>
ModMatrix matrix_of(std::size_t rows, std::size_t cols, F&& f) {
  ModMatrix out(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    Vec col = f(j);
    for (std::size_t i = 0; i < rows; ++i) out(i, j) = col[i];
  }
  return out;
}

inline Vec unit(std::size_t n, std::size_t i) {
  Vec v(n, 0);
  v[i] = 1;
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hom

struct HomSpace {
  FinModule module;
  std::vector<ModMatrix> basis;  // canonical generators as Y.dim x X.dim matrices
  Subquotient data;              // inside the filtered slots
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  std::size_t rows = 0, cols = 0;

  /// Coordinates of a morphism.
  [[nodiscard]] Vec coordinates(const ModMatrix& f) const {
    if (module.is_zero()) return {};
    Vec v(slots.size());
    for (std::size_t k = 0; k < slots.size(); ++k) v[k] = f(slots[k].first, slots[k].second);
    return data.coordinates(v);
  }
};

/// Filtered G-equivariant maps X -> Y.
inline HomSpace ext0(const FilteredGModule& X, const FilteredGModule& Y) {
  if (!(*X.setup() == *Y.setup())) throw InvalidInput("objects from different categories");
  const Residue m = X.modulus();
  detail::Slots P(X, Y, detail::SlotKind::filtered);
  HomSpace out;
  out.slots = P.at;
  out.rows = Y.dim();
  out.cols = X.dim();
  const auto& gx = X.generator_action();
  const auto& gy = Y.generator_action();
  const std::size_t cell = Y.dim() * X.dim();
  if (P.size() == 0) {
    out.module = FinModule::zero(m);
    return out;
  }
  ModMatrix eq = detail::matrix_of(gx.size() * cell, P.size(), [&](std::size_t j) {
    ModMatrix f = P.expand(detail::unit(P.size(), j));
    Vec col(gx.size() * cell, 0);
    for (std::size_t k = 0; k < gx.size(); ++k) {
      ModMatrix d = detail::add(exactla::mul_mod(f, gx[k], m), exactla::mul_mod(gy[k], f, m), m, -1);
      for (std::size_t r = 0; r < d.rows(); ++r)
        for (std::size_t c = 0; c < d.cols(); ++c) col[k * cell + r * d.cols() + c] = d(r, c);
    }
    return col;
  });
  ModMatrix K = eq.rows() ? exactla::kernel_mod(eq, m) : ModMatrix::identity(P.size());
  out.data = Subquotient(K.cols() ? K : ModMatrix(P.size(), 0), ModMatrix(P.size(), 0), m);
  out.module = out.data.module();
  for (std::size_t i = 0; i < out.module.rank(); ++i) out.basis.push_back(P.expand(out.data.generator(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Ext^1 by cocycles

/// A 1-cochain: one Y.dim x X.dim matrix per group element.
using Cochain = std::vector<ModMatrix>;
/// A 2-cochain: index g * |G| + h.
using Cochain2 = std::vector<ModMatrix>;

namespace detail {

/// (δc)(g, h) = ρY(g) c(h) - c(gh) + c(g) ρX(h).
inline Cochain2 coboundary1(const FilteredGModule& X, const FilteredGModule& Y, const Cochain& c) {
  const auto& G = X.group();
  const Residue m = X.modulus();
  const std::size_t n = G.order();
  Cochain2 out;
  out.reserve(n * n);
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t h = 0; h < n; ++h) {
      ModMatrix v = exactla::mul_mod(Y.act(g), c[h], m);
      v = add(v, c[G.mul(g, h)], m, -1);
      v = add(v, exactla::mul_mod(c[g], X.act(h), m), m);
      out.push_back(std::move(v));
    }
  return out;
}

/// (δb)(g) = ρY(g) b - b ρX(g).
inline Cochain coboundary0(const FilteredGModule& X, const FilteredGModule& Y, const ModMatrix& b) {
  const Residue m = X.modulus();
  Cochain out;
  for (std::size_t g = 0; g < X.group().order(); ++g)
    out.push_back(add(exactla::mul_mod(Y.act(g), b, m), exactla::mul_mod(b, X.act(g), m), m, -1));
  return out;
}

/// Strict 1-cochains as vectors: coordinate g * S + k.
struct CochainLayout {
  Slots strict, filtered, equal;
  std::size_t n;

  CochainLayout(const FilteredGModule& X, const FilteredGModule& Y)
      : strict(X, Y, SlotKind::strict),
        filtered(X, Y, SlotKind::filtered),
        equal(X, Y, SlotKind::equal),
        n(X.group().order()) {}

  [[nodiscard]] std::size_t dim1() const { return n * strict.size(); }
  [[nodiscard]] std::size_t dim2() const { return n * n * strict.size(); }

  [[nodiscard]] Cochain expand(const Vec& v) const {
    Cochain c;
    for (std::size_t g = 0; g < n; ++g) c.push_back(strict.expand(v, g * strict.size()));
    return c;
  }
  [[nodiscard]] Vec flatten(const Cochain& c) const {
    Vec v(dim1(), 0);
    for (std::size_t g = 0; g < n; ++g) strict.flatten_into(c[g], v, g * strict.size());
    return v;
  }
  [[nodiscard]] Vec flatten2(const Cochain2& c) const {
    Vec v(dim2(), 0);
    for (std::size_t k = 0; k < n * n; ++k) strict.flatten_into(c[k], v, k * strict.size());
    return v;
  }
  [[nodiscard]] Cochain2 expand2(const Vec& v) const {
    Cochain2 c;
    for (std::size_t k = 0; k < n * n; ++k) c.push_back(strict.expand(v, k * strict.size()));
    return c;
  }
};

/// Matrix of δ on strict 1-cochains (its image is strict as well).
inline ModMatrix d1_matrix(const FilteredGModule& X, const FilteredGModule& Y, const CochainLayout& L) {
  return matrix_of(L.dim2(), L.dim1(),
                   [&](std::size_t j) { return L.flatten2(coboundary1(X, Y, L.expand(unit(L.dim1(), j)))); });
}

/// Generators of the strict coboundaries δb, b filtered with δb vanishing on
/// equal-level positions.
inline ModMatrix strict_coboundaries(const FilteredGModule& X, const FilteredGModule& Y, const CochainLayout& L) {
  const Residue m = X.modulus();
  const std::size_t P = L.filtered.size(), E = L.equal.size(), n = L.n;
  if (P == 0 || L.dim1() == 0) return ModMatrix(L.dim1(), 0);
  ModMatrix eq = matrix_of(n * E, P, [&](std::size_t j) {
    Cochain d = coboundary0(X, Y, L.filtered.expand(unit(P, j)));
    Vec v(n * E, 0);
    for (std::size_t g = 0; g < n; ++g) L.equal.flatten_into(d[g], v, g * E);
    return v;
  });
  ModMatrix K = eq.rows() ? exactla::kernel_mod(eq, m) : ModMatrix::identity(P);
  std::vector<Vec> cols;
  for (std::size_t j = 0; j < K.cols(); ++j) {
    Vec col = L.flatten(coboundary0(X, Y, L.filtered.expand(K.column(j))));
    if (!exactla::is_zero(col)) cols.push_back(std::move(col));
  }
  return columns_of(cols, L.dim1());
}

}  // namespace detail

/// Ext^1(X, Y): strict cocycles G -> Hom(X, Y) modulo strict coboundaries.
class Ext1 {
 public:
  Ext1(const FilteredGModule& X, const FilteredGModule& Y) : X_(X), Y_(Y), L_(X, Y) {
    if (!(*X.setup() == *Y.setup())) throw InvalidInput("objects from different categories");
    const Residue m = X.modulus();
    if (L_.dim1() == 0) {
      module_ = FinModule::zero(m);
      return;
    }
    d1_ = detail::d1_matrix(X, Y, L_);
    ModMatrix Z = d1_.rows() ? exactla::kernel_mod(d1_, m) : ModMatrix::identity(L_.dim1());
    B_ = detail::strict_coboundaries(X, Y, L_);
    if (Z.cols() == 0) {
      module_ = FinModule::zero(m);
      return;
    }
    data_ = Subquotient(Z, B_, m);
    module_ = data_.module();
    nonzero_ = true;
  }

  [[nodiscard]] const FinModule& module() const noexcept { return module_; }
  [[nodiscard]] const FilteredGModule& source() const noexcept { return X_; }
  [[nodiscard]] const FilteredGModule& target() const noexcept { return Y_; }

  /// Representative cocycles of the canonical generators.
  [[nodiscard]] std::vector<Cochain> representatives() const {
    std::vector<Cochain> out;
    for (std::size_t i = 0; i < module_.rank(); ++i) out.push_back(L_.expand(data_.generator(i)));
    return out;
  }

  /// Cocycle representing the class with the given coordinates.
  [[nodiscard]] Cochain cocycle(const Vec& coords) const {
    Vec v(L_.dim1(), 0);
    const Residue m = X_.modulus();
    for (std::size_t i = 0; i < module_.rank(); ++i) {
      Vec g = data_.generator(i);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = (v[k] + exactla::mul_mod(coords.at(i), g[k], m)) % m;
    }
    return L_.expand(v);
  }

  [[nodiscard]] bool is_cocycle(const Cochain& c) const {
    if (!strict(c)) return false;
    for (const auto& M : detail::coboundary1(X_, Y_, c))
      if (!detail::is_zero(M)) return false;
    return true;
  }

  /// Class of a strict cocycle.
  [[nodiscard]] Vec classify(const Cochain& c) const {
    if (!is_cocycle(c)) throw InvalidInput("not a strict cocycle");
    if (!nonzero_) return {};
    return data_.coordinates(L_.flatten(c));
  }

 private:
  [[nodiscard]] bool strict(const Cochain& c) const {
    if (c.size() != L_.n) return false;
    for (const auto& M : c) {
      if (M.rows() != Y_.dim() || M.cols() != X_.dim()) return false;
      for (std::size_t r = 0; r < M.rows(); ++r)
        for (std::size_t col = 0; col < M.cols(); ++col)
          if (Y_.level(r) <= X_.level(col) && exactla::mod(M(r, col), X_.modulus())) return false;
    }
    return true;
  }

  FilteredGModule X_, Y_;
  detail::CochainLayout L_;
  ModMatrix d1_, B_;
  Subquotient data_;
  FinModule module_;
  bool nonzero_ = false;
};

inline Ext1 ext1(const FilteredGModule& X, const FilteredGModule& Y) { return Ext1(X, Y); }

// ---------------------------------------------------------------------------
// Extensions and admissible triples

/// A triple Y -> E -> X.
struct Extension {
  FilteredGModule Y, E, X;
  ModMatrix i;  // E.dim x Y.dim
  ModMatrix p;  // X.dim x E.dim
};

/// Middle term Y ⊕ X with action [[ρY, c], [0, ρX]].
inline Extension middle_term(const FilteredGModule& X, const FilteredGModule& Y, const Cochain& c) {
  const auto& gens = X.group().generators();
  std::vector<Block> blocks = Y.blocks();
  blocks.insert(blocks.end(), X.blocks().begin(), X.blocks().end());
  std::vector<ModMatrix> act;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    std::vector<std::vector<const ModMatrix*>> grid{{&Y.generator_action()[k], &c.at(gens[k])},
                                                    {nullptr, &X.generator_action()[k]}};
    act.push_back(detail::block(grid, {Y.dim(), X.dim()}, {Y.dim(), X.dim()}));
  }
  Extension e{Y, FilteredGModule(Y.setup(), std::move(blocks), std::move(act)), X, ModMatrix(Y.dim() + X.dim(), Y.dim()),
              ModMatrix(X.dim(), Y.dim() + X.dim())};
  for (std::size_t r = 0; r < Y.dim(); ++r) e.i(r, r) = 1;
  for (std::size_t r = 0; r < X.dim(); ++r) e.p(r, Y.dim() + r) = 1;
  return e;
}

namespace detail {

inline std::vector<std::size_t> at_level(const FilteredGModule& X, int l) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < X.dim(); ++i)
    if (X.level(i) == l) out.push_back(i);
  return out;
}

inline ModMatrix restrict(const ModMatrix& M, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  ModMatrix out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = M(rows[r], cols[c]);
  return out;
}

/// A G-equivariant t with g t = id on one graded piece.
inline bool graded_split(const FilteredGModule& B, const FilteredGModule& C, const ModMatrix& g,
                         const std::vector<std::size_t>& bi, const std::vector<std::size_t>& ci) {
  const Residue m = B.modulus();
  const std::size_t nb = bi.size(), nc = ci.size();
  if (nc == 0) return true;
  ModMatrix gg = restrict(g, ci, bi);
  std::vector<ModMatrix> rb, rc;
  for (std::size_t k = 0; k < B.generator_action().size(); ++k) {
    rb.push_back(restrict(B.generator_action()[k], bi, bi));
    rc.push_back(restrict(C.generator_action()[k], ci, ci));
  }
  const std::size_t unknowns = nb * nc;
  const std::size_t rows = nc * nc + rb.size() * nb * nc;
  ModMatrix A = matrix_of(rows, unknowns, [&](std::size_t j) {
    ModMatrix t(nb, nc);
    t(j / nc, j % nc) = 1;
    Vec col(rows, 0);
    ModMatrix gt = exactla::mul_mod(gg, t, m);
    for (std::size_t r = 0; r < nc; ++r)
      for (std::size_t c = 0; c < nc; ++c) col[r * nc + c] = gt(r, c);
    for (std::size_t k = 0; k < rb.size(); ++k) {
      ModMatrix d = add(exactla::mul_mod(t, rc[k], m), exactla::mul_mod(rb[k], t, m), m, -1);
      for (std::size_t r = 0; r < nb; ++r)
        for (std::size_t c = 0; c < nc; ++c) col[nc * nc + k * nb * nc + r * nc + c] = d(r, c);
    }
    return col;
  });
  Vec rhs(rows, 0);
  for (std::size_t r = 0; r < nc; ++r) rhs[r * nc + r] = 1;
  return exactla::solve_mod(A, rhs, m).has_value();
}

}  // namespace detail

/// A --f--> B --g--> C is admissible: g f = 0 and the sequence is split exact
/// on every graded piece. Throws unless f and g are morphisms.
inline bool is_admissible_triple(const FilteredGModule& A, const FilteredGModule& B, const FilteredGModule& C,
                                 const ModMatrix& f, const ModMatrix& g) {
  if (!is_morphism(A, B, f)) throw InvalidInput("first map is not a filtered equivariant map");
  if (!is_morphism(B, C, g)) throw InvalidInput("second map is not a filtered equivariant map");
  const Residue m = A.modulus();
  if (!detail::is_zero(exactla::mul_mod(g, f, m))) return false;
  std::vector<int> levels = A.levels();
  levels.insert(levels.end(), B.levels().begin(), B.levels().end());
  levels.insert(levels.end(), C.levels().begin(), C.levels().end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (int l : levels) {
    auto ai = detail::at_level(A, l), bi = detail::at_level(B, l), ci = detail::at_level(C, l);
    if (ai.size() + ci.size() != bi.size()) return false;
    if (!ai.empty()) {
      ModMatrix ff = detail::restrict(f, bi, ai);
      if (bi.empty() || detail::mod_rank(ff, m) < ai.size()) {
        // Over Z/m injectivity is a kernel condition, not a rank condition.
        if (bi.empty()) return false;
        auto K = exactla::kernel_of(ModuleMap{FinModule::free(m, ai.size()), FinModule::free(m, bi.size()), ff});
        if (!K.module().is_zero()) return false;
      }
    }
    if (!ci.empty()) {
      ModMatrix gg = detail::restrict(g, ci, bi);
      auto Q = exactla::cokernel_of(ModuleMap{FinModule::free(m, bi.size()), FinModule::free(m, ci.size()), gg});
      if (!Q.module().is_zero()) return false;
      if (!detail::graded_split(B, C, g, bi, ci)) return false;
    }
  }
  return true;
}

namespace detail {

struct Splitting {
  Cochain c;    // strict cocycle
  ModMatrix s;  // filtered section X -> E realizing it
};

/// Section of p adapted to the filtration whose cocycle vanishes on equal levels.
inline Splitting split(const Extension& e) {
  if (!is_admissible_triple(e.Y, e.E, e.X, e.i, e.p)) throw InvalidInput("extension is not an admissible triple");
  const Residue m = e.X.modulus();
  ModMatrix s(e.E.dim(), e.X.dim());
  for (std::size_t c = 0; c < e.X.dim(); ++c) {
    std::vector<std::size_t> allowed;
    for (std::size_t j = 0; j < e.E.dim(); ++j)
      if (e.E.level(j) >= e.X.level(c)) allowed.push_back(j);
    std::vector<std::size_t> all(e.X.dim());
    for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
    auto x = exactla::solve_mod(restrict(e.p, all, allowed), unit(e.X.dim(), c), m);
    if (!x) throw InvalidInput("projection is not strict");
    for (std::size_t k = 0; k < allowed.size(); ++k) s(allowed[k], c) = (*x)[k];
  }
  auto cochain_for = [&](const ModMatrix& sec) {
    Cochain c;
    for (std::size_t g = 0; g < e.X.group().order(); ++g) {
      ModMatrix v = add(exactla::mul_mod(e.E.act(g), sec, m), exactla::mul_mod(sec, e.X.act(g), m), m, -1);
      auto y = solve_columns(e.i, v, m);
      if (!y) throw InvalidInput("extension is not exact in the middle");
      c.push_back(std::move(*y));
    }
    return c;
  };
  Cochain c = cochain_for(s);
  // Remove the equal-level part: c - δb corresponds to the section s - i b.
  Slots P(e.X, e.Y, SlotKind::filtered), E(e.X, e.Y, SlotKind::equal);
  const std::size_t n = e.X.group().order();
  if (E.size()) {
    ModMatrix A = matrix_of(n * E.size(), P.size(), [&](std::size_t j) {
      Cochain d = coboundary0(e.X, e.Y, P.expand(unit(P.size(), j)));
      Vec v(n * E.size(), 0);
      for (std::size_t g = 0; g < n; ++g) E.flatten_into(d[g], v, g * E.size());
      return v;
    });
    Vec rhs(n * E.size(), 0);
    for (std::size_t g = 0; g < n; ++g) E.flatten_into(c[g], rhs, g * E.size());
    if (!exactla::is_zero(rhs)) {
      auto b = exactla::solve_mod(A, rhs, m);
      if (!b) throw InvalidInput("graded pieces of the extension do not split");
      s = add(s, exactla::mul_mod(e.i, P.expand(*b), m), m, -1);
      c = cochain_for(s);
    }
  }
  return {std::move(c), std::move(s)};
}

}  // namespace detail

/// The strict cocycle of an admissible extension.
inline Cochain cocycle_of(const Extension& e) { return detail::split(e).c; }

/// Baer sum: pull back along the diagonal of X, push out along the sum map of Y.
inline Extension baer_sum(const Extension& a, const Extension& b) {
  if (!(a.X == b.X) || !(a.Y == b.Y)) throw InvalidInput("Baer sum needs extensions with the same ends");
  const Residue m = a.X.modulus();
  const auto sa = detail::split(a), sb = detail::split(b);
  const std::size_t na = a.E.dim(), nb = b.E.dim(), dy = a.Y.dim(), dx = a.X.dim();
  auto stack = [&](const Vec& u, const Vec& v) {
    Vec w(u);
    w.insert(w.end(), v.begin(), v.end());
    return w;
  };
  // Basis of the pullback modulo the antidiagonal copy of Y: (i y, 0) and (s x, s x).
  std::vector<Vec> basis;
  for (std::size_t r = 0; r < dy; ++r) basis.push_back(stack(a.i.column(r), Vec(nb, 0)));
  for (std::size_t c = 0; c < dx; ++c) basis.push_back(stack(sa.s.column(c), sb.s.column(c)));
  std::vector<Vec> anti;
  for (std::size_t r = 0; r < dy; ++r) {
    Vec v = b.i.column(r);
    for (auto& x : v) x = exactla::mod(-x, m);
    anti.push_back(stack(a.i.column(r), v));
  }
  std::vector<Vec> all = basis;
  all.insert(all.end(), anti.begin(), anti.end());
  ModMatrix W = detail::columns_of(all, na + nb);
  std::vector<ModMatrix> act;
  for (std::size_t k = 0; k < a.X.group().generators().size(); ++k) {
    std::vector<std::vector<const ModMatrix*>> grid{{&a.E.generator_action()[k], nullptr},
                                                    {nullptr, &b.E.generator_action()[k]}};
    ModMatrix rho = detail::block(grid, {na, nb}, {na, nb});
    ModMatrix M(dy + dx, dy + dx);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      auto x = exactla::solve_mod(W, exactla::apply_mod(rho, basis[j], m), m);
      if (!x) throw InvalidInput("Baer sum: pullback is not stable under the action");
      for (std::size_t i = 0; i < dy + dx; ++i) M(i, j) = (*x)[i];
    }
    act.push_back(std::move(M));
  }
  std::vector<Block> blocks = a.Y.blocks();
  blocks.insert(blocks.end(), a.X.blocks().begin(), a.X.blocks().end());
  Extension out{a.Y, FilteredGModule(a.Y.setup(), std::move(blocks), std::move(act)), a.X, ModMatrix(dy + dx, dy),
                ModMatrix(dx, dy + dx)};
  for (std::size_t r = 0; r < dy; ++r) out.i(r, r) = 1;
  for (std::size_t r = 0; r < dx; ++r) out.p(r, dy + r) = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Products in Ext^2

struct ProductVanishing {
  bool vanishes = false;
  std::optional<FilteredGModule> T;
  ModMatrix from_U;  // U -> T
  ModMatrix to_V;    // T -> V
  ModMatrix from_Y;  // Y -> T
  ModMatrix to_X;    // T -> X
};

/// For xi = (Z -> V -> X) and eta = (Y -> U -> Z): the product of their classes
/// in Ext^2(X, Y) vanishes iff U -> Z -> V factors as U -> T -> V with
/// Y -> T -> V and U -> T -> X admissible. Such a T has underlying object
/// Y ⊕ Z ⊕ X with the two given extensions on the diagonal blocks and a corner
/// e solving δe = -cη ∪ cξ, so existence is decided by one linear system.
/// A nonzero size_bound caps dim T; larger candidates are reported as BudgetExceeded.
inline ProductVanishing ext2_product_vanishes(const Extension& xi, const Extension& eta, std::size_t size_bound = 0) {
  if (!(xi.Y == eta.X)) throw InvalidInput("extensions are not composable");
  const FilteredGModule &X = xi.X, &Z = xi.Y, &Y = eta.Y;
  if (size_bound && X.dim() + Y.dim() + Z.dim() > size_bound)
    throw BudgetExceeded("factorizing object exceeds the size bound");
  const Residue m = X.modulus();
  const auto& G = X.group();
  const std::size_t n = G.order();
  auto sx = detail::split(xi), se = detail::split(eta);
  detail::CochainLayout L(X, Y);
  Cochain2 cup;
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t h = 0; h < n; ++h) cup.push_back(exactla::mul_mod(se.c[g], sx.c[h], m));
  Vec rhs = L.flatten2(cup);
  for (auto& v : rhs) v = exactla::mod(-v, m);
  // Products land in strict positions; anything else would be a bug upstream.
  for (std::size_t k = 0; k < cup.size(); ++k) {
    ModMatrix back = L.strict.expand(L.flatten2(cup), k * L.strict.size());
    if (!(back == cup[k])) throw InvalidInput("cup product is not strict");
  }
  ProductVanishing out;
  std::optional<Vec> e;
  if (exactla::is_zero(rhs)) {
    e = Vec(L.dim1(), 0);
  } else if (L.dim1()) {
    e = exactla::solve_mod(detail::d1_matrix(X, Y, L), rhs, m);
  }
  if (!e) return out;
  Cochain ec = L.expand(*e);
  std::vector<Block> blocks = Y.blocks();
  blocks.insert(blocks.end(), Z.blocks().begin(), Z.blocks().end());
  blocks.insert(blocks.end(), X.blocks().begin(), X.blocks().end());
  std::vector<ModMatrix> act;
  for (std::size_t k = 0; k < G.generators().size(); ++k) {
    const std::size_t s = G.generators()[k];
    std::vector<std::vector<const ModMatrix*>> grid{
        {&Y.generator_action()[k], &se.c[s], &ec[s]},
        {nullptr, &Z.generator_action()[k], &sx.c[s]},
        {nullptr, nullptr, &X.generator_action()[k]}};
    act.push_back(detail::block(grid, {Y.dim(), Z.dim(), X.dim()}, {Y.dim(), Z.dim(), X.dim()}));
  }
  FilteredGModule T(X.setup(), std::move(blocks), std::move(act));
  const std::size_t dy = Y.dim(), dz = Z.dim(), dx = X.dim(), dt = dy + dz + dx;
  // U ≅ Y ⊕ Z through [i | s], V ≅ Z ⊕ X likewise.
  ModMatrix phiU = eta.i.hconcat(se.s);
  ModMatrix phiV = xi.i.hconcat(sx.s);
  ModMatrix phiUinv = detail::inverse(phiU, m);
  ModMatrix incl(dt, dy + dz), proj(dz + dx, dt);
  for (std::size_t r = 0; r < dy + dz; ++r) incl(r, r) = 1;
  for (std::size_t r = 0; r < dz + dx; ++r) proj(r, dy + r) = 1;
  out.from_U = exactla::mul_mod(incl, phiUinv, m);
  out.to_V = exactla::mul_mod(phiV, proj, m);
  out.from_Y = ModMatrix(dt, dy);
  for (std::size_t r = 0; r < dy; ++r) out.from_Y(r, r) = 1;
  out.to_X = ModMatrix(dx, dt);
  for (std::size_t r = 0; r < dx; ++r) out.to_X(r, dy + dz + r) = 1;
  out.T = std::move(T);
  out.vanishes = true;
  return out;
}

// ---------------------------------------------------------------------------
// Conilpotent coalgebras and the filtered cobar complex

class FilteredCoalgebra {
 public:
  FilteredCoalgebra() = default;

  /// Coalgebra on (Z/p)^dim: delta[k](a, b) is the coefficient of e_a ⊗ e_b in
  /// Δ(e_k); `counit` and the group-like coaugmentation `unit` in the same basis.
  FilteredCoalgebra(Residue p, std::vector<ModMatrix> delta, Vec counit, Vec unit)
      : p_(p), delta_(std::move(delta)), counit_(std::move(counit)), unit_(std::move(unit)) {
    if (!exactla::is_prime(p)) throw InvalidInput("coalgebras are taken over a prime field");
    const std::size_t d = delta_.size();
    if (d == 0) throw InvalidInput("coalgebra must be nonzero");
    if (counit_.size() != d || unit_.size() != d) throw InvalidInput("counit and unit need one entry per basis vector");
    for (auto& D : delta_) {
      if (D.rows() != d || D.cols() != d) throw InvalidInput("comultiplication tensor has wrong shape");
      D = exactla::reduce(std::move(D), p);
    }
    counit_ = exactla::reduce(counit_, p);
    unit_ = exactla::reduce(unit_, p);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t b = 0; b < d; ++b) {
        Residue l = 0, r = 0;
        for (std::size_t a = 0; a < d; ++a) {
          l = (l + counit_[a] * delta_[k](a, b)) % p;
          r = (r + counit_[a] * delta_[k](b, a)) % p;
        }
        if (l != (b == k) || r != (b == k)) throw InvalidInput("counit axiom fails");
      }
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<Residue> left(d * d * d, 0), right(d * d * d, 0);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
          const Residue c = delta_[k](a, b);
          if (!c) continue;
          for (std::size_t x = 0; x < d; ++x)
            for (std::size_t y = 0; y < d; ++y) {
              left[(x * d + y) * d + b] = (left[(x * d + y) * d + b] + c * delta_[a](x, y)) % p;
              right[(a * d + x) * d + y] = (right[(a * d + x) * d + y] + c * delta_[b](x, y)) % p;
            }
        }
      if (left != right) throw InvalidInput("comultiplication is not coassociative");
    }
    Residue eu = 0;
    for (std::size_t a = 0; a < d; ++a) eu = (eu + counit_[a] * unit_[a]) % p;
    if (eu != 1) throw InvalidInput("coaugmentation must have counit 1");
    ModMatrix du = apply_delta(unit_);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        if (du(a, b) != unit_[a] * unit_[b] % p) throw InvalidInput("coaugmentation is not group-like");
    build_filtration();
  }

  [[nodiscard]] Residue characteristic() const noexcept { return p_; }
  [[nodiscard]] std::size_t dim() const noexcept { return delta_.size(); }
  [[nodiscard]] const std::vector<ModMatrix>& delta() const noexcept { return delta_; }
  [[nodiscard]] const Vec& counit() const noexcept { return counit_; }
  [[nodiscard]] const Vec& unit() const noexcept { return unit_; }
  friend bool operator==(const FilteredCoalgebra& a, const FilteredCoalgebra& b) {
    return a.p_ == b.p_ && a.delta_ == b.delta_ && a.counit_ == b.counit_ && a.unit_ == b.unit_;
  }
  /// dim F_n C for n = 0, 1, ... up to the first n with F_n C = C (or dim C steps).
  [[nodiscard]] const std::vector<std::size_t>& filtration_dims() const noexcept { return fdims_; }
  [[nodiscard]] bool conilpotent() const noexcept { return !fdims_.empty() && fdims_.back() == dim(); }
  /// Basis of C_+ adapted to the filtration, with the level of each vector.
  [[nodiscard]] const std::vector<Vec>& adapted_basis() const noexcept { return basis_; }
  [[nodiscard]] const std::vector<int>& adapted_levels() const noexcept { return levels_; }

  /// Reduced comultiplication of adapted basis vector k in adapted coordinates
  /// (an r x r matrix, r = dim C_+).
  [[nodiscard]] const ModMatrix& reduced_delta(std::size_t k) const { return reduced_.at(k); }

  [[nodiscard]] ModMatrix apply_delta(const Vec& x) const {
    const std::size_t d = dim();
    ModMatrix out(d, d);
    for (std::size_t k = 0; k < d; ++k)
      if (x[k])
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) out(a, b) = (out(a, b) + x[k] * delta_[k](a, b)) % p_;
    return out;
  }

 private:
  void build_filtration() {
    const std::size_t d = dim();
    const Residue p = p_;
    // π : C -> C/k, dropping a coordinate where the coaugmentation is nonzero.
    std::size_t j0 = 0;
    while (unit_[j0] == 0) ++j0;
    const Residue inv = exactla::inverse_mod(unit_[j0], p);
    ModMatrix pi(d - 1, d);
    for (std::size_t x = 0, row = 0; x < d; ++x) {
      if (x == j0) continue;
      for (std::size_t k = 0; k < d; ++k) {
        Residue v = (x == k) - (k == j0 ? exactla::mul_mod(unit_[x], inv, p) : 0);
        pi(row, k) = exactla::mod(v, p);
      }
      ++row;
    }
    // iter[k] = Δ^{(n)}(e_k) as a vector over d^{n+1} tensor words.
    std::vector<Vec> iter(d);
    for (std::size_t k = 0; k < d; ++k) iter[k] = detail::unit(d, k);
    std::vector<ModMatrix> F;
    for (std::size_t n = 0; n <= d; ++n) {
      if (n) {
        std::vector<Vec> next(d);
        for (std::size_t k = 0; k < d; ++k) {
          const std::size_t len = iter[k].size() / d;
          Vec out(iter[k].size() * d, 0);
          for (std::size_t first = 0; first < d; ++first)
            for (std::size_t rest = 0; rest < len; ++rest) {
              const Residue c = iter[k][first * len + rest];
              if (!c) continue;
              for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                  if (delta_[first](a, b))
                    out[(a * d + b) * len + rest] = (out[(a * d + b) * len + rest] + c * delta_[first](a, b)) % p;
            }
          next[k] = std::move(out);
        }
        iter = std::move(next);
      }
      // Apply π to each of the n+1 tensor factors.
      const std::size_t words = iter[0].size();
      ModMatrix M(0, d);
      std::vector<Vec> rows_out;
      std::size_t target = 1;
      for (std::size_t f = 0; f <= n; ++f) target *= d - 1;
      ModMatrix img(target, d);
      for (std::size_t k = 0; k < d; ++k) {
        Vec cur = iter[k];
        std::size_t in_dim = d, stride_after = words / d;
        // Factors are processed left to right; after processing, factor f has size d-1.
        std::size_t before = 1;
        for (std::size_t f = 0; f <= n; ++f) {
          stride_after /= (f ? 1 : 1);
          const std::size_t after = cur.size() / (before * in_dim);
          Vec nxt(before * (d - 1) * after, 0);
          for (std::size_t b0 = 0; b0 < before; ++b0)
            for (std::size_t x = 0; x < d; ++x)
              for (std::size_t a0 = 0; a0 < after; ++a0) {
                const Residue c = cur[(b0 * d + x) * after + a0];
                if (!c) continue;
                for (std::size_t y = 0; y + 1 < d; ++y)
                  if (pi(y, x)) nxt[(b0 * (d - 1) + y) * after + a0] = (nxt[(b0 * (d - 1) + y) * after + a0] + c * pi(y, x)) % p;
              }
          cur = std::move(nxt);
          before *= d - 1;
        }
        for (std::size_t r = 0; r < target; ++r) img(r, k) = cur[r];
      }
      ModMatrix K = target ? exactla::kernel_mod(img, p) : ModMatrix::identity(d);
      fdims_.push_back(detail::mod_rank(K, p));
      F.push_back(K);
      if (fdims_.back() == d) break;
    }
    if (!conilpotent()) return;
    // Adapted basis of C_+ = ker ε.
    ModMatrix eps(1, d);
    for (std::size_t a = 0; a < d; ++a) eps(0, a) = counit_[a];
    std::vector<Vec> chosen;
    for (std::size_t n = 1; n < F.size(); ++n) {
      const ModMatrix& Fn = F[n];
      ModMatrix e = exactla::mul_mod(eps, Fn, p);
      ModMatrix comb = exactla::kernel_mod(e, p);
      for (std::size_t j = 0; j < comb.cols(); ++j) {
        Vec v = exactla::apply_mod(Fn, comb.column(j), p);
        std::vector<Vec> trial = chosen;
        trial.push_back(v);
        if (detail::mod_rank(detail::columns_of(trial, d), p) == trial.size()) {
          chosen.push_back(v);
          levels_.push_back(static_cast<int>(n));
        }
      }
    }
    basis_ = chosen;
    const std::size_t r = basis_.size();
    if (r + 1 != d) throw InvalidInput("adapted basis has the wrong size");
    std::vector<Vec> full{unit_};
    full.insert(full.end(), basis_.begin(), basis_.end());
    ModMatrix Bfull = detail::columns_of(full, d);
    ModMatrix Binv = detail::inverse(Bfull, p);
    for (std::size_t k = 0; k < r; ++k) {
      ModMatrix D = apply_delta(basis_[k]);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          D(a, b) = exactla::mod(D(a, b) - unit_[a] * basis_[k][b] - basis_[k][a] * unit_[b], p);
      ModMatrix coords = exactla::mul_mod(exactla::mul_mod(Binv, D, p), Binv.transpose(), p);
      ModMatrix red(r, r);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
          if (a && b) {
            red(a - 1, b - 1) = coords(a, b);
          } else if (coords(a, b)) {
            throw InvalidInput("reduced comultiplication leaves C_+ ⊗ C_+");
          }
        }
      reduced_.push_back(std::move(red));
    }
  }

  Residue p_ = 2;
  std::vector<ModMatrix> delta_;
  Vec counit_, unit_;
  std::vector<std::size_t> fdims_;
  std::vector<Vec> basis_;
  std::vector<int> levels_;
  std::vector<ModMatrix> reduced_;
};

/// Functions on G: basis δ_g, Δ(δ_g) = Σ_{ab=g} δ_a ⊗ δ_b, coaugmentation the
/// constant function 1. Comodules are G-modules; conilpotent iff G is a p-group.
inline FilteredCoalgebra dual_group_algebra(const FinGroup& G, Residue p) {
  const std::size_t n = G.order();
  std::vector<ModMatrix> delta(n, ModMatrix(n, n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) delta[G.mul(a, b)](a, b) = 1;
  Vec counit(n, 0);
  counit[G.identity()] = 1;
  return FilteredCoalgebra(p, std::move(delta), std::move(counit), Vec(n, 1));
}

/// k ⊕ V with V primitive: Δ(v) = 1 ⊗ v + v ⊗ 1.
inline FilteredCoalgebra primitive_coalgebra(Residue p, std::size_t r) {
  const std::size_t d = r + 1;
  std::vector<ModMatrix> delta(d, ModMatrix(d, d));
  delta[0](0, 0) = 1;
  for (std::size_t k = 1; k < d; ++k) delta[k](0, k) = delta[k](k, 0) = 1;
  return FilteredCoalgebra(p, std::move(delta), detail::unit(d, 0), detail::unit(d, 0));
}

inline constexpr std::size_t kMaxCobarWords = 200000;

/// F_t of the reduced cobar complex k -> C_+ -> C_+^{⊗2} -> ... in positions 0..top:
/// tensors of adapted basis vectors whose levels sum to at most t.
inline exactla::BoundedComplex filtered_cobar_complex(const FilteredCoalgebra& C, int t, int top) {
  if (!C.conilpotent()) throw PreconditionFailed("coalgebra is not conilpotent");
  const Residue p = C.characteristic();
  const std::size_t r = C.adapted_basis().size();
  const auto& lv = C.adapted_levels();
  std::vector<std::vector<std::vector<std::size_t>>> words(top + 2);
  std::size_t total = 0;
  for (int n = 0; n <= top + 1; ++n) {
    if (r == 0 && n > 0) continue;
    std::vector<std::size_t> w(n, 0);
    while (true) {
      int sum = 0;
      for (auto k : w) sum += lv[k];
      if (sum <= t && (n > 0 || t >= 0)) words[n].push_back(w);
      if (++total > kMaxCobarWords) throw PreconditionFailed("cobar complex exceeds the supported size");
      std::size_t pos = 0;
      while (pos < w.size() && ++w[pos] == r) w[pos++] = 0;
      if (pos == w.size()) break;
    }
  }
  auto index = [&](int n) {
    std::map<std::vector<std::size_t>, std::size_t> idx;
    for (std::size_t i = 0; i < words[n].size(); ++i) idx[words[n][i]] = i;
    return idx;
  };
  exactla::BoundedComplex B;
  B.modulus = p;
  B.lowest = 0;
  for (int n = 0; n <= top; ++n) B.terms.push_back(FinModule::free(p, words[n].size()));
  for (int n = 0; n < top; ++n) {
    auto idx = index(n + 1);
    ModMatrix d(words[n + 1].size(), words[n].size());
    for (std::size_t j = 0; j < words[n].size(); ++j) {
      const auto& w = words[n][j];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const ModMatrix& D = C.reduced_delta(w[i]);
        const Residue sign = i % 2 ? p - 1 : 1;
        for (std::size_t a = 0; a < r; ++a)
          for (std::size_t b = 0; b < r; ++b) {
            if (!D(a, b)) continue;
            std::vector<std::size_t> u(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
            u.push_back(a);
            u.push_back(b);
            u.insert(u.end(), w.begin() + static_cast<std::ptrdiff_t>(i) + 1, w.end());
            auto it = idx.find(u);
            if (it == idx.end()) throw InvalidInput("differential leaves the filtration piece");
            d(it->second, j) = (d(it->second, j) + sign * D(a, b)) % p;
          }
      }
    }
    B.differentials.push_back(std::move(d));
  }
  return B;
}

/// Ext^n(E_i, E_j) = H^n(F^{i-j} B) in the category of filtered comodules.
inline FinModule filtered_cobar_ext(const FilteredCoalgebra& C, int i, int j, int n) {
  if (n < 0) return FinModule::zero(C.characteristic());
  auto B = filtered_cobar_complex(C, j - i, n + 1);
  return exactla::homology_at(B, n).module();
}

// ---------------------------------------------------------------------------
// Diagonal Ext rings

/// Components A_{στ;n} = Ext^n(X_τ, X_σ(n)); products are Yoneda compositions,
/// a ∈ A_{st} times b ∈ A_{tr} being a(q) ∘ b. Degrees 0, 1, 2 are computed;
/// above 2 the ring is the quadratic closure of that data.
struct DiagonalExtRing {
  bigring::BigGradedRing ring;
  int computed_up_to = 2;   // degrees computed from Ext data
  bool generated_above = false;  // true when higher degrees come from the quadratic closure
};

inline DiagonalExtRing diagonal_ext_ring(const std::vector<FilteredGModule>& generators,
                                         const std::vector<std::string>& names, int d) {
  if (generators.empty()) throw InvalidInput("at least one generator is required");
  if (names.size() != generators.size()) throw InvalidInput("one name per generator expected");
  if (d < 0) throw InvalidInput("degree must be nonnegative");
  const auto& setup = *generators[0].setup();
  for (const auto& X : generators)
    if (!(*X.setup() == setup)) throw InvalidInput("generators from different categories");
  const Residue m = setup.m;
  const std::size_t k = generators.size();
  const std::size_t n = setup.G.order();
  const int top = std::min(d, 2);
  bigring::BigGradedRing A(bigring::ObjectSet(names), m, top);

  std::vector<HomSpace> hom(k * k);
  std::vector<std::optional<Ext1>> ext(k * k);
  std::vector<FilteredGModule> tw1, tw2;
  for (const auto& X : generators) {
    tw1.push_back(twist(X, 1));
    tw2.push_back(twist(X, 2));
  }
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      hom[s * k + t] = ext0(generators[t], generators[s]);
      A.set_component(0, s, t, hom[s * k + t].module);
      if (top >= 1) {
        ext[s * k + t].emplace(generators[t], tw1[s]);
        A.set_component(1, s, t, ext[s * k + t]->module());
      }
    }
  for (std::size_t s = 0; s < k; ++s) A.set_unit(s, hom[s * k + s].coordinates(ModMatrix::identity(generators[s].dim())));

  // Degree two: products of degree-one classes inside 2-cochains modulo coboundaries.
  struct Deg2 {
    std::optional<detail::CochainLayout> L;
    Subquotient data;
    bool zero = true;
  };
  std::vector<Deg2> deg2(k * k);
  auto twist_factor = [&](std::size_t g) { return setup.twist_power(g, 1); };
  auto cup = [&](const Cochain& a, const Cochain& b) {
    // a ∈ Ext^1(X_ρ, X_σ(1)) twisted once, then composed with b ∈ Ext^1(X_τ, X_ρ(1)).
    Cochain2 out;
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t h = 0; h < n; ++h)
        out.push_back(exactla::mul_mod(detail::scale(a[g], twist_factor(g), m), b[h], m));
    return out;
  };
  if (top >= 2) {
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        Deg2& D = deg2[s * k + t];
        D.L.emplace(generators[t], tw2[s]);
        std::vector<Vec> span;
        for (std::size_t r = 0; r < k; ++r) {
          auto ra = ext[s * k + r]->representatives();
          auto rb = ext[r * k + t]->representatives();
          for (const auto& a : ra)
            for (const auto& b : rb) span.push_back(D.L->flatten2(cup(a, b)));
        }
        const std::size_t N = D.L->dim2();
        if (span.empty() || N == 0) {
          A.set_component(2, s, t, FinModule::zero(m));
          continue;
        }
        ModMatrix Bd = D.L->dim1() ? detail::d1_matrix(generators[t], tw2[s], *D.L) : ModMatrix(N, 0);
        ModMatrix S = detail::columns_of(span, N);
        ModMatrix gens = Bd.cols() ? S.hconcat(Bd) : S;
        D.data = Subquotient(gens, Bd, m);
        D.zero = D.data.module().is_zero();
        A.set_component(2, s, t, D.data.module());
      }
  }

  // Multiplication tables.
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t r = 0; r < k; ++r) {
        const auto& Hst = hom[s * k + t];
        const auto& Htr = hom[t * k + r];
        const auto& Hsr = hom[s * k + r];
        auto table = [&](const FinModule& a, const FinModule& b, const FinModule& c, auto&& prod) {
          ModMatrix tb(c.rank(), a.rank() * b.rank());
          for (std::size_t i = 0; i < a.rank(); ++i)
            for (std::size_t j = 0; j < b.rank(); ++j) {
              Vec v = prod(i, j);
              for (std::size_t x = 0; x < c.rank(); ++x) tb(x, i * b.rank() + j) = v[x];
            }
          return tb;
        };
        A.set_mult(0, 0, s, t, r, table(Hst.module, Htr.module, Hsr.module, [&](std::size_t i, std::size_t j) {
          return Hsr.coordinates(exactla::mul_mod(Hst.basis[i], Htr.basis[j], m));
        }));
        if (top < 1) continue;
        const Ext1& Est = *ext[s * k + t];
        const Ext1& Etr = *ext[t * k + r];
        const Ext1& Esr = *ext[s * k + r];
        auto reps_st = Est.representatives();
        auto reps_tr = Etr.representatives();
        A.set_mult(0, 1, s, t, r, table(Hst.module, Etr.module(), Esr.module(), [&](std::size_t i, std::size_t j) {
          Cochain c;
          for (const auto& M : reps_tr[j]) c.push_back(exactla::mul_mod(Hst.basis[i], M, m));
          return Esr.classify(c);
        }));
        A.set_mult(1, 0, s, t, r, table(Est.module(), Htr.module, Esr.module(), [&](std::size_t i, std::size_t j) {
          Cochain c;
          for (const auto& M : reps_st[i]) c.push_back(exactla::mul_mod(M, Htr.basis[j], m));
          return Esr.classify(c);
        }));
        if (top < 2) continue;
        const Deg2& Dsr = deg2[s * k + r];
        const Deg2& Dst = deg2[s * k + t];
        const Deg2& Dtr = deg2[t * k + r];
        auto coords2 = [&](const Deg2& D, const Cochain2& z) {
          if (D.zero) return Vec{};
          return D.data.coordinates(D.L->flatten2(z));
        };
        A.set_mult(1, 1, s, t, r, table(Est.module(), Etr.module(), A.component(2, s, r), [&](std::size_t i, std::size_t j) {
          return coords2(Dsr, cup(reps_st[i], reps_tr[j]));
        }));
        const FinModule& C2st = A.component(2, s, t);
        const FinModule& C2tr = A.component(2, t, r);
        A.set_mult(0, 2, s, t, r, table(Hst.module, C2tr, A.component(2, s, r), [&](std::size_t i, std::size_t j) {
          Cochain2 z = Dtr.L->expand2(Dtr.data.generator(j));
          for (auto& M : z) M = exactla::mul_mod(Hst.basis[i], M, m);
          return coords2(Dsr, z);
        }));
        A.set_mult(2, 0, s, t, r, table(C2st, Htr.module, A.component(2, s, r), [&](std::size_t i, std::size_t j) {
          Cochain2 z = Dst.L->expand2(Dst.data.generator(i));
          for (auto& M : z) M = exactla::mul_mod(M, Htr.basis[j], m);
          return coords2(Dsr, z);
        }));
      }
  DiagonalExtRing out{std::move(A), top, false};
  if (d > 2) {
    out.ring = quadra::quadratic_closure(quadra::relations_of(out.ring), d);
    out.generated_above = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filtered categories with a Frobenius endomorphism

/// split: filtered abelian groups with a splitting over Z_(p);
/// inverted: Z[1/q]-modules with φ acting by q^i on gr^i;
/// integral: abelian groups with the family φ^(i).
enum class FrobeniusVariant { split = 1, inverted = 2, integral = 3 };

struct FrobeniusSetup {
  FrobeniusVariant variant = FrobeniusVariant::inverted;
  std::int64_t q = 2;

  [[nodiscard]] std::int64_t characteristic() const {
    auto f = exactla::factorize(q);
    if (q < 2 || f.size() != 1) throw InvalidInput("q must be a prime power");
    return f[0].first;
  }
  friend bool operator==(const FrobeniusSetup&, const FrobeniusSetup&) = default;
};

/// A finitely generated group of the shape free ⊕ torsion ⊕ divisible.
struct ExtGroup {
  std::vector<Integer> torsion;  // invariant factors > 1
  std::size_t free_rank = 0;
  std::size_t divisible_rank = 0;
  std::string free_name = "Z";
  std::string divisible_name;

  [[nodiscard]] bool is_zero() const { return torsion.empty() && free_rank == 0 && divisible_rank == 0; }

  [[nodiscard]] std::string to_string() const {
    std::vector<std::string> parts;
    auto power = [](const std::string& s, std::size_t k) { return k == 1 ? s : "(" + s + ")^" + std::to_string(k); };
    if (free_rank) parts.push_back(power(free_name, free_rank));
    for (std::size_t i = 0; i < torsion.size();) {
      std::size_t j = i;
      while (j < torsion.size() && torsion[j] == torsion[i]) ++j;
      parts.push_back(power("Z/" + torsion[i].str(), j - i));
      i = j;
    }
    if (divisible_rank) parts.push_back(power(divisible_name, divisible_rank));
    if (parts.empty()) return "0";
    std::string out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out += " + " + parts[i];
    return out;
  }
};

/// Free object with levels per basis vector and structure matrix ψ, unipotent
/// with respect to the levels: φ = ψ D (inverted) or φ^(k) = q^{-k} ψ D
/// (integral), D = diag(q^level). For the split variant ψ is the splitting
/// gr N ⊗ Z_(p) -> N ⊗ Z_(p), taken with integral entries.
struct FrobeniusObject {
  std::vector<int> levels;
  IntMatrix psi;
};

inline FrobeniusObject frobenius_generator(int level) { return {{level}, IntMatrix::identity(1)}; }

namespace detail {

inline void validate(const FrobeniusObject& X) {
  const std::size_t n = X.levels.size();
  if (X.psi.rows() != n || X.psi.cols() != n) throw InvalidInput("structure matrix has wrong shape");
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      if (X.levels[r] < X.levels[c] && X.psi(r, c) != 0) throw InvalidInput("structure does not preserve the filtration");
      if (X.levels[r] == X.levels[c] && X.psi(r, c) != (r == c ? 1 : 0))
        throw InvalidInput("structure must act on gr^i as prescribed");
    }
}

inline Integer ipow(std::int64_t q, int e) {
  Integer out = 1;
  for (int i = 0; i < e; ++i) out *= q;
  return out;
}

/// Integer matrix of b -> ψY (q^{lr - lc} b) - b ψX on filtered slots, read on strict slots.
inline IntMatrix frobenius_coboundary(const FrobeniusObject& X, const FrobeniusObject& Y, std::int64_t q,
                                      std::vector<std::pair<std::size_t, std::size_t>>& strict) {
  std::vector<std::pair<std::size_t, std::size_t>> filtered;
  for (std::size_t r = 0; r < Y.levels.size(); ++r)
    for (std::size_t c = 0; c < X.levels.size(); ++c) {
      if (Y.levels[r] >= X.levels[c]) filtered.emplace_back(r, c);
      if (Y.levels[r] > X.levels[c]) strict.emplace_back(r, c);
    }
  IntMatrix M(strict.size(), filtered.size());
  for (std::size_t j = 0; j < filtered.size(); ++j) {
    const auto [br, bc] = filtered[j];
    const Integer w = ipow(q, Y.levels[br] - X.levels[bc]);
    for (std::size_t i = 0; i < strict.size(); ++i) {
      const auto [r, c] = strict[i];
      Integer v = 0;
      if (c == bc) v += Y.psi(r, br) * w;
      if (r == br) v -= X.psi(bc, c);
      M(i, j) = v;
    }
  }
  return M;
}

}  // namespace detail

/// Ext^1(X, Y) by cocycles modulo coboundaries, via integer Smith normal form.
inline ExtGroup frobenius_ext1(const FrobeniusSetup& setup, const FrobeniusObject& X, const FrobeniusObject& Y) {
  const std::int64_t p = setup.characteristic();
  detail::validate(X);
  detail::validate(Y);
  std::vector<std::pair<std::size_t, std::size_t>> strict;
  IntMatrix M = detail::frobenius_coboundary(X, Y, setup.q, strict);
  ExtGroup out;
  if (strict.empty()) return out;
  if (setup.variant == FrobeniusVariant::split) {
    // Splittings c over Z_(p) modulo c -> c + b σX - σY gr(b) for integral b.
    std::vector<std::pair<std::size_t, std::size_t>> filtered;
    for (std::size_t r = 0; r < Y.levels.size(); ++r)
      for (std::size_t c = 0; c < X.levels.size(); ++c)
        if (Y.levels[r] >= X.levels[c]) filtered.emplace_back(r, c);
    M = IntMatrix(strict.size(), filtered.size());
    for (std::size_t j = 0; j < filtered.size(); ++j) {
      const auto [br, bc] = filtered[j];
      for (std::size_t i = 0; i < strict.size(); ++i) {
        const auto [r, c] = strict[i];
        Integer v = 0;
        if (r == br) v += X.psi(bc, c);
        if (c == bc && Y.levels[br] == X.levels[bc]) v -= Y.psi(r, br);
        M(i, j) = v;
      }
    }
    out.divisible_name = "Q/Z[1/" + std::to_string(p) + "]";
    out.free_name = "Z_(" + std::to_string(p) + ")";
    std::size_t nonzero = 0;
    if (M.cols()) {
      auto snf = exactla::smith_normal_form(M);
      for (std::size_t i = 0; i < std::min(M.rows(), M.cols()); ++i) {
        Integer d = exactla::detail::abs_int(snf.D(i, i));
        if (d == 0) continue;
        ++nonzero;
        // Z_(p)/dZ is Z/p^a plus Q/Z[1/p], p^a the p-part of d.
        Integer pa = 1;
        while (d % p == 0) d /= p, pa *= p;
        if (pa > 1) out.torsion.push_back(pa);
      }
    }
    std::sort(out.torsion.begin(), out.torsion.end());
    out.divisible_rank = nonzero;
    out.free_rank = strict.size() - nonzero;
    return out;
  }
  auto snf = exactla::smith_normal_form(M);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < std::min(M.rows(), M.cols()); ++i) {
    Integer d = exactla::detail::abs_int(snf.D(i, i));
    if (d == 0) continue;
    ++nonzero;
    if (setup.variant == FrobeniusVariant::inverted)
      while (d % p == 0) d /= p;
    if (d > 1) out.torsion.push_back(d);
  }
  out.free_rank = M.rows() - nonzero;
  if (setup.variant == FrobeniusVariant::inverted) out.free_name = "Z[1/" + std::to_string(p) + "]";
  return out;
}

inline ExtGroup frobenius_ext1(const FrobeniusSetup& setup, int i, int j) {
  return frobenius_ext1(setup, frobenius_generator(i), frobenius_generator(j));
}

/// Hom(X, Y): filtered maps commuting with the structure; free of the computed rank.
inline ExtGroup frobenius_ext0(const FrobeniusSetup& setup, const FrobeniusObject& X, const FrobeniusObject& Y) {
  const std::int64_t p = setup.characteristic();
  detail::validate(X);
  detail::validate(Y);
  std::vector<std::pair<std::size_t, std::size_t>> filtered;
  for (std::size_t r = 0; r < Y.levels.size(); ++r)
    for (std::size_t c = 0; c < X.levels.size(); ++c)
      if (Y.levels[r] >= X.levels[c]) filtered.emplace_back(r, c);
  // f ψX DX = ψY DY f entrywise (scaled to be integral); for the split
  // variant f σX = σY gr(f).
  const std::size_t R = Y.levels.size(), C = X.levels.size();
  const int shift = R && C ? std::min(*std::min_element(X.levels.begin(), X.levels.end()),
                                      *std::min_element(Y.levels.begin(), Y.levels.end()))
                           : 0;
  const bool split = setup.variant == FrobeniusVariant::split;
  IntMatrix M(R * C, filtered.size());
  for (std::size_t j = 0; j < filtered.size(); ++j) {
    const auto [fr, fc] = filtered[j];
    const bool graded = Y.levels[fr] == X.levels[fc];
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) {
        Integer v = 0;
        if (r == fr) v += X.psi(fc, c) * (split ? Integer(1) : detail::ipow(setup.q, X.levels[c] - shift));
        if (c == fc && (!split || graded)) v -= Y.psi(r, fr) * (split ? Integer(1) : detail::ipow(setup.q, Y.levels[fr] - shift));
        M(r * C + c, j) = v;
      }
  }
  ExtGroup out;
  std::size_t rank = 0;
  if (M.rows() && M.cols()) {
    auto snf = exactla::smith_normal_form(M);
    for (std::size_t i = 0; i < std::min(M.rows(), M.cols()); ++i) rank += snf.D(i, i) != 0;
  }
  out.free_rank = filtered.size() - rank;
  if (setup.variant == FrobeniusVariant::inverted) out.free_name = "Z[1/" + std::to_string(p) + "]";
  if (setup.variant == FrobeniusVariant::split) out.free_name = "Z";
  return out;
}

inline ExtGroup frobenius_ext0(const FrobeniusSetup& setup, int i, int j) {
  return frobenius_ext0(setup, frobenius_generator(i), frobenius_generator(j));
}

}  // namespace koszul::filtcat
