#pragma once

// Line-oriented text documents for rings, quadratic presentations, category
// setups and matrix problems. The grammar is in docs/format.md. Every emitted
// document re-parses to an equal value.

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "koszul/filtcat.hpp"
#include "koszul/matrixcrit.hpp"
#include "koszul/quadra.hpp"

namespace koszul::format {

using bigring::BigGradedRing;
using bigring::ObjectSet;
using exactla::FinModule;
using exactla::ModMatrix;
using exactla::Residue;
using exactla::Vec;

/// Malformed document; the message starts with "line N:".
class ParseError : public InvalidInput {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InvalidInput("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

struct Line {
  std::size_t number = 0;
  std::vector<std::string> words;

  [[nodiscard]] const std::string& key() const { return words.front(); }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(number, what); }
};

inline std::vector<Line> lines_of(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::istringstream ws(raw);
    Line l{n, {}};
    for (std::string w; ws >> w;) l.words.push_back(w);
    if (!l.words.empty()) out.push_back(std::move(l));
  }
  return out;
}

inline bool is_int(const std::string& w) {
  long long v = 0;
  auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  return ec == std::errc() && p == w.data() + w.size();
}

inline long long to_int(const Line& l, const std::string& w) {
  long long v = 0;
  auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || p != w.data() + w.size()) l.fail("expected an integer, found '" + w + "'");
  return v;
}

inline long long to_int(const Line& l, const std::string& w, long long lo, long long hi, const std::string& what) {
  long long v = to_int(l, w);
  if (v < lo || v > hi)
    l.fail(what + " " + w + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

/// Reads the "<kind> 1" header and returns the kind.
inline std::string header(const std::vector<Line>& ls) {
  if (ls.empty()) throw ParseError(1, "empty document");
  const Line& h = ls.front();
  if (h.words.size() != 2) h.fail("expected a header '<kind> 1'");
  if (h.words[1] != "1") h.fail("unsupported format version '" + h.words[1] + "'");
  return h.words[0];
}

/// Words of `l` from position `from`, split at a lone ":" into head and tail.
struct Parts {
  std::vector<std::string> head, tail;
};

inline Parts split_colon(const Line& l, std::size_t from) {
  Parts out;
  bool seen = false;
  for (std::size_t i = from; i < l.words.size(); ++i) {
    if (l.words[i] == ":") {
      if (seen) l.fail("more than one ':'");
      seen = true;
    } else {
      (seen ? out.tail : out.head).push_back(l.words[i]);
    }
  }
  if (!seen) l.fail("expected ':'");
  return out;
}

inline Vec ints(const Line& l, const std::vector<std::string>& ws) {
  Vec out;
  for (const auto& w : ws) out.push_back(static_cast<Residue>(to_int(l, w)));
  return out;
}

inline void check_name(const Line& l, const std::string& s, bool allow_star = false) {
  if (s == "-" || s == "+" || is_int(s)) l.fail("'" + s + "' is not a valid name");
  for (char c : s)
    if (c == ':' || c == ',' || c == '(' || c == ')' || c == ';' || c == '.' || (c == '*' && !allow_star))
      l.fail("name '" + s + "' contains a reserved character");
}

inline std::size_t object(const Line& l, const ObjectSet& objs, const std::string& s) {
  for (std::size_t i = 0; i < objs.size(); ++i)
    if (objs.name(i) == s) return i;
  l.fail("unknown object '" + s + "'");
}

/// Fields that may occur once; others are collected in order.
class Fields {
 public:
  Fields(const std::vector<Line>& ls, std::set<std::string> single, std::set<std::string> multi) {
    for (std::size_t i = 1; i < ls.size(); ++i) {
      const Line& l = ls[i];
      if (single.count(l.key())) {
        if (one_.count(l.key())) l.fail("duplicate field '" + l.key() + "'");
        one_[l.key()] = &l;
      } else if (multi.count(l.key())) {
        many_[l.key()].push_back(&l);
      } else {
        l.fail("unknown field '" + l.key() + "'");
      }
    }
    last_ = ls.empty() ? 1 : ls.back().number;
  }

  [[nodiscard]] const Line* find(const std::string& key) const {
    auto it = one_.find(key);
    return it == one_.end() ? nullptr : it->second;
  }
  [[nodiscard]] const Line& need(const std::string& key) const {
    if (auto* l = find(key)) return *l;
    throw ParseError(last_, "missing field '" + key + "'");
  }
  [[nodiscard]] std::vector<const Line*> all(const std::string& key) const {
    auto it = many_.find(key);
    return it == many_.end() ? std::vector<const Line*>{} : it->second;
  }
  [[nodiscard]] std::size_t last_line() const noexcept { return last_; }

 private:
  std::map<std::string, const Line*> one_;
  std::map<std::string, std::vector<const Line*>> many_;
  std::size_t last_ = 1;
};

inline long long single_int(const Line& l, long long lo, long long hi) {
  if (l.words.size() != 2) l.fail("'" + l.key() + "' takes one integer");
  return to_int(l, l.words[1], lo, hi, l.key());
}

inline Residue modulus(const Fields& f) {
  return static_cast<Residue>(single_int(f.need("modulus"), 2, 1LL << 31));
}

inline ObjectSet objects(const Fields& f) {
  const Line& l = f.need("objects");
  std::vector<std::string> names(l.words.begin() + 1, l.words.end());
  if (names.empty()) l.fail("at least one object is required");
  std::set<std::string> seen;
  for (const auto& n : names) {
    check_name(l, n, true);
    if (!seen.insert(n).second) l.fail("duplicate object '" + n + "'");
  }
  return ObjectSet(names);
}

/// Runs `f`, turning library InvalidInput into a diagnostic at `line`.
template <class F>
auto at(std::size_t line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ParseError(line, e.what());
  }
}

inline std::string join(const Vec& v) {
  std::string out;
  for (auto x : v) out += " " + std::to_string(x);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rings and presentations

struct RingDocument {
  BigGradedRing ring;
  std::optional<quadra::QuadraticPresentation> presentation;  // set for presentation documents
};

namespace detail {

inline BigGradedRing parse_ring_body(const std::vector<Line>& ls) {
  Fields f(ls, {"modulus", "objects", "max-degree"}, {"component", "unit", "mult"});
  const Residue m = modulus(f);
  const ObjectSet objs = objects(f);
  const int d = static_cast<int>(single_int(f.need("max-degree"), 0, 64));
  const std::size_t k = objs.size();
  BigGradedRing A(objs, m, d);

  std::set<std::tuple<int, std::size_t, std::size_t>> seen;
  for (const Line* l : f.all("component")) {
    auto p = split_colon(*l, 1);
    if (p.head.size() != 3) l->fail("expected 'component <n> <s> <t> : <orders>'");
    const int n = static_cast<int>(to_int(*l, p.head[0], 0, d, "degree"));
    const std::size_t s = object(*l, objs, p.head[1]), t = object(*l, objs, p.head[2]);
    if (!seen.insert({n, s, t}).second) l->fail("duplicate component");
    std::vector<Residue> orders;
    for (const auto& w : p.tail) {
      Residue o = static_cast<Residue>(to_int(*l, w));
      if (o < 2 || m % o != 0) l->fail("order " + w + " must be a divisor of the modulus greater than 1");
      orders.push_back(o);
    }
    FinModule M = FinModule::from_orders(m, orders);
    for (std::size_t i = 0; i < orders.size(); ++i)
      if (M.order(i) != orders[i]) l->fail("orders must be listed in canonical order (as emitted)");
    A.set_component(n, s, t, std::move(M));
  }

  std::vector<bool> has_unit(k, false);
  for (const Line* l : f.all("unit")) {
    auto p = split_colon(*l, 1);
    if (p.head.size() != 1) l->fail("expected 'unit <s> : <coordinates>'");
    const std::size_t s = object(*l, objs, p.head[0]);
    if (has_unit[s]) l->fail("duplicate unit");
    has_unit[s] = true;
    Vec e = ints(*l, p.tail);
    if (e.size() != A.component(0, s, s).rank()) l->fail("unit has the wrong number of coordinates");
    for (auto& x : e) x = exactla::mod(x, m);
    A.set_unit(s, std::move(e));
  }
  for (std::size_t s = 0; s < k; ++s)
    if (!has_unit[s] && A.component(0, s, s).rank())
      throw ParseError(f.last_line(), "missing unit for object '" + objs.name(s) + "'");

  std::set<bigring::MultKey> keys;
  for (const Line* l : f.all("mult")) {
    auto p = split_colon(*l, 1);
    if (p.head.size() != 5) l->fail("expected 'mult <p> <q> <s> <t> <r> : <row> <col> <value> ...'");
    const int a = static_cast<int>(to_int(*l, p.head[0], 0, d, "degree"));
    const int b = static_cast<int>(to_int(*l, p.head[1], 0, d - a, "degree"));
    const std::size_t s = object(*l, objs, p.head[2]), t = object(*l, objs, p.head[3]),
                      r = object(*l, objs, p.head[4]);
    if (!keys.insert({a, b, s, t, r}).second) l->fail("duplicate multiplication table");
    const std::size_t rows = A.component(a + b, s, r).rank();
    const std::size_t cols = A.component(a, s, t).rank() * A.component(b, t, r).rank();
    if (p.tail.size() % 3) l->fail("structure constants come in triples <row> <col> <value>");
    ModMatrix tb(rows, cols);
    for (std::size_t i = 0; i < p.tail.size(); i += 3) {
      const auto row = to_int(*l, p.tail[i], 0, static_cast<long long>(rows) - 1, "row");
      const auto col = to_int(*l, p.tail[i + 1], 0, static_cast<long long>(cols) - 1, "column");
      tb(row, col) = exactla::mod(static_cast<Residue>(to_int(*l, p.tail[i + 2])), m);
    }
    at(l->number, [&] { A.set_mult(a, b, s, t, r, std::move(tb)); });
  }
  auto problems = bigring::validate(A);
  if (!problems.empty()) throw ParseError(ls.front().number, "ring axioms fail: " + problems.front());
  return A;
}

struct Generator {
  std::string name;
  std::size_t s, t, index;
};

inline RingDocument parse_presentation_body(const std::vector<Line>& ls) {
  Fields f(ls, {"modulus", "objects", "max-degree"}, {"generator", "relation"});
  const Residue m = modulus(f);
  const ObjectSet objs = objects(f);
  const int d = static_cast<int>(single_int(f.need("max-degree"), 1, 64));
  const std::size_t k = objs.size();

  std::vector<Generator> gens;
  std::vector<std::size_t> count(k * k, 0);
  for (const Line* l : f.all("generator")) {
    if (l->words.size() != 4) l->fail("expected 'generator <name> <s> <t>'");
    check_name(*l, l->words[1]);
    for (const auto& g : gens)
      if (g.name == l->words[1]) l->fail("duplicate generator '" + g.name + "'");
    const std::size_t s = object(*l, objs, l->words[2]), t = object(*l, objs, l->words[3]);
    gens.push_back({l->words[1], s, t, count[s * k + t]++});
  }

  BigGradedRing one(objs, m, 1);
  for (std::size_t s = 0; s < k; ++s) {
    one.set_component(0, s, s, FinModule::free(m, 1));
    one.set_unit(s, {1});
    one.set_mult(0, 0, s, s, s, ModMatrix::from_rows({{1}}));
  }
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t c = count[s * k + t];
      one.set_component(1, s, t, FinModule::free(m, c));
      one.set_mult(0, 1, s, s, t, ModMatrix::identity(c));
      one.set_mult(1, 0, s, t, t, ModMatrix::identity(c));
    }
  auto base = std::make_shared<const bigring::BigRing>(one.base());
  bigring::Bimodule A1 = bigring::Bimodule::of_component(one, 1, base);
  bigring::TensorProduct T2({&A1, &A1});

  std::vector<std::vector<Vec>> cols(k * k);
  for (const Line* l : f.all("relation")) {
    const auto& w = l->words;
    bigring::WordVec terms;
    std::optional<std::pair<std::size_t, std::size_t>> ends;
    std::size_t i = 1;
    while (i < w.size()) {
      Residue c = 1;
      if (is_int(w[i])) {
        c = exactla::mod(static_cast<Residue>(to_int(*l, w[i])), m);
        if (++i == w.size()) l->fail("coefficient without a monomial");
      }
      const std::string& mono = w[i++];
      const auto star = mono.find('*');
      if (star == std::string::npos || mono.find('*', star + 1) != std::string::npos)
        l->fail("expected a quadratic monomial 'x*y', found '" + mono + "'");
      auto lookup = [&](const std::string& name) -> const Generator& {
        for (const auto& g : gens)
          if (g.name == name) return g;
        l->fail("unknown generator '" + name + "'");
      };
      const Generator& x = lookup(mono.substr(0, star));
      const Generator& y = lookup(mono.substr(star + 1));
      if (x.t != y.s) l->fail("'" + mono + "' is not composable");
      if (ends && *ends != std::make_pair(x.s, y.t)) l->fail("terms of a relation must share their end objects");
      ends = std::make_pair(x.s, y.t);
      bigring::Word word{{static_cast<std::uint32_t>(x.s), static_cast<std::uint32_t>(x.t),
                          static_cast<std::uint32_t>(y.t)},
                         {static_cast<std::uint32_t>(x.index), static_cast<std::uint32_t>(y.index)}};
      terms.emplace_back(c, word);
      if (i < w.size()) {
        if (w[i] != "+") l->fail("expected '+' between terms, found '" + w[i] + "'");
        if (++i == w.size()) l->fail("dangling '+'");
      }
    }
    if (!ends) l->fail("empty relation");
    cols[ends->first * k + ends->second].push_back(T2.coordinates(ends->first, ends->second, terms));
  }
  std::vector<ModMatrix> I(k * k);
  for (std::size_t st = 0; st < k * k; ++st) {
    const std::size_t r = T2.component(st / k, st % k).rank();
    I[st] = ModMatrix(r, cols[st].size());
    for (std::size_t j = 0; j < cols[st].size(); ++j)
      for (std::size_t i = 0; i < r; ++i) I[st](i, j) = cols[st][j][i];
  }
  RingDocument doc;
  doc.presentation = at(ls.front().number, [&] { return quadra::make_presentation(base, A1, std::move(I)); });
  doc.ring = quadra::quadratic_closure(*doc.presentation, d);
  return doc;
}

}  // namespace detail

/// Parses a "koszul-ring" or "koszul-presentation" document.
inline RingDocument parse_ring_document(const std::string& text) {
  auto ls = detail::lines_of(text);
  const std::string kind = detail::header(ls);
  if (kind == "koszul-ring") return {detail::parse_ring_body(ls), std::nullopt};
  if (kind == "koszul-presentation") return detail::parse_presentation_body(ls);
  ls.front().fail("expected 'koszul-ring' or 'koszul-presentation', found '" + kind + "'");
}

inline BigGradedRing parse_ring(const std::string& text) { return parse_ring_document(text).ring; }

/// Canonical "koszul-ring" document.
inline std::string emit_ring(const BigGradedRing& A) {
  std::ostringstream os;
  const auto& objs = A.objects();
  const std::size_t k = A.object_count();
  os << "koszul-ring 1\nmodulus " << A.modulus() << "\nobjects";
  for (const auto& n : objs.names()) os << ' ' << n;
  os << "\nmax-degree " << A.max_degree() << '\n';
  for (int n = 0; n <= A.max_degree(); ++n)
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t t = 0; t < k; ++t) {
        const auto& M = A.component(n, s, t);
        if (!M.rank()) continue;
        os << "component " << n << ' ' << objs.name(s) << ' ' << objs.name(t) << " :";
        for (std::size_t i = 0; i < M.rank(); ++i) os << ' ' << M.order(i);
        os << '\n';
      }
  for (std::size_t s = 0; s < k; ++s)
    if (A.component(0, s, s).rank()) os << "unit " << objs.name(s) << " :" << detail::join(A.unit(s)) << '\n';
  for (const auto& [key, tb] : A.tables()) {
    os << "mult " << key.p << ' ' << key.q << ' ' << objs.name(key.s) << ' ' << objs.name(key.t) << ' '
       << objs.name(key.r) << " :";
    for (std::size_t i = 0; i < tb.rows(); ++i)
      for (std::size_t j = 0; j < tb.cols(); ++j)
        if (tb(i, j)) os << "  " << i << ' ' << j << ' ' << tb(i, j);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Category setups

enum class PieceKind { trivial, regular, character };

struct PieceDecl {
  std::string name;
  PieceKind kind = PieceKind::trivial;
  Vec values;  // character values on the group generators
  friend bool operator==(const PieceDecl&, const PieceDecl&) = default;
};

/// A twist category over a product of cyclic groups.
struct TwistCategory {
  std::vector<std::size_t> factors;  // orders of the cyclic factors; empty for the trivial group
  Residue m = 2;
  Vec twist;  // twist character on the generators
  std::vector<PieceDecl> pieces;

  [[nodiscard]] filtcat::FinGroup group() const {
    if (factors.empty()) return filtcat::FinGroup::cyclic(1);
    filtcat::FinGroup G = filtcat::FinGroup::cyclic(factors.back());
    for (std::size_t i = factors.size() - 1; i-- > 0;)
      G = filtcat::FinGroup::product(filtcat::FinGroup::cyclic(factors[i]), G);
    return G;
  }

  [[nodiscard]] filtcat::SetupPtr setup() const {
    const auto G = group();
    auto S = filtcat::TwistSetup::twisted(G, m, twist);
    S.pieces.clear();
    S.names.clear();
    for (const auto& p : pieces) {
      switch (p.kind) {
        case PieceKind::trivial: S.pieces.push_back(filtcat::GModule::trivial(G, m)); break;
        case PieceKind::regular: S.pieces.push_back(filtcat::GModule::regular(G, m)); break;
        case PieceKind::character: S.pieces.push_back(filtcat::GModule::character(G, m, p.values)); break;
      }
      S.names.push_back(p.name);
    }
    return filtcat::make_setup(std::move(S));
  }

  friend bool operator==(const TwistCategory&, const TwistCategory&) = default;
};

using Category = std::variant<TwistCategory, filtcat::FrobeniusSetup, filtcat::FilteredCoalgebra>;

namespace detail {

inline std::vector<std::size_t> group_factors(const Line& l) {
  const auto& w = l.words;
  if (w.size() == 2 && w[1] == "trivial") return {};
  if (w.size() == 3 && w[1] == "cyclic") return {static_cast<std::size_t>(to_int(l, w[2], 2, 64, "order"))};
  if (w.size() >= 3 && w[1] == "product") {
    std::vector<std::size_t> out;
    for (std::size_t i = 2; i < w.size(); ++i) out.push_back(static_cast<std::size_t>(to_int(l, w[i], 2, 64, "order")));
    std::size_t n = 1;
    for (auto o : out) n *= o;
    if (n > 64) l.fail("group order above 64");
    return out;
  }
  l.fail("expected 'group trivial', 'group cyclic <n>' or 'group product <n> <n> ...'");
}

inline TwistCategory parse_twisted(const Fields& f, std::size_t line) {
  TwistCategory c;
  c.m = modulus(f);
  c.factors = group_factors(f.need("group"));
  c.twist = Vec(c.factors.size(), 1);
  if (const Line* l = f.find("twist")) {
    c.twist = ints(*l, {l->words.begin() + 1, l->words.end()});
    if (c.twist.size() != c.factors.size()) l->fail("one twist value per group generator expected");
    for (auto& x : c.twist) x = exactla::mod(x, c.m);
  }
  for (const Line* l : f.all("piece")) {
    if (l->words.size() < 3) l->fail("expected 'piece <name> trivial|regular|character <values>'");
    PieceDecl p;
    p.name = l->words[1];
    check_name(*l, p.name);
    for (const auto& q : c.pieces)
      if (q.name == p.name) l->fail("duplicate piece '" + p.name + "'");
    const std::string& kind = l->words[2];
    if (kind == "trivial" || kind == "regular") {
      if (l->words.size() != 3) l->fail("'" + kind + "' takes no values");
      p.kind = kind == "trivial" ? PieceKind::trivial : PieceKind::regular;
    } else if (kind == "character") {
      p.kind = PieceKind::character;
      p.values = ints(*l, {l->words.begin() + 3, l->words.end()});
      if (p.values.size() != c.factors.size()) l->fail("one character value per group generator expected");
      for (auto& x : p.values) x = exactla::mod(x, c.m);
    } else {
      l->fail("unknown piece kind '" + kind + "'");
    }
    c.pieces.push_back(std::move(p));
  }
  if (c.pieces.empty()) throw ParseError(f.last_line(), "at least one piece is required");
  at(line, [&] { return c.setup(); });
  return c;
}

inline filtcat::FilteredCoalgebra parse_coalgebra(const Fields& f, const std::string& kind, std::size_t line) {
  const Residue p = modulus(f);
  if (kind == "dual-group") {
    auto G = TwistCategory{group_factors(f.need("group")), p, {}, {}}.group();
    return at(line, [&] { return filtcat::dual_group_algebra(G, p); });
  }
  if (kind == "primitive") {
    auto r = static_cast<std::size_t>(single_int(f.need("rank"), 0, 16));
    return at(line, [&] { return filtcat::primitive_coalgebra(p, r); });
  }
  const auto d = static_cast<std::size_t>(single_int(f.need("dim"), 1, 64));
  std::vector<ModMatrix> delta(d, ModMatrix(d, d));
  std::vector<bool> seen(d, false);
  for (const Line* l : f.all("delta")) {
    auto parts = split_colon(*l, 1);
    if (parts.head.size() != 1) l->fail("expected 'delta <k> : <a> <b> <coefficient> ...'");
    const auto k = static_cast<std::size_t>(to_int(*l, parts.head[0], 0, static_cast<long long>(d) - 1, "index"));
    if (seen[k]) l->fail("duplicate delta");
    seen[k] = true;
    if (parts.tail.size() % 3) l->fail("comultiplication coefficients come in triples <a> <b> <coefficient>");
    for (std::size_t i = 0; i < parts.tail.size(); i += 3) {
      const auto a = to_int(*l, parts.tail[i], 0, static_cast<long long>(d) - 1, "index");
      const auto b = to_int(*l, parts.tail[i + 1], 0, static_cast<long long>(d) - 1, "index");
      delta[k](a, b) = exactla::mod(static_cast<Residue>(to_int(*l, parts.tail[i + 2])), p);
    }
  }
  auto vec = [&](const std::string& key) {
    const Line& l = f.need(key);
    auto parts = split_colon(l, 1);
    if (!parts.head.empty() || parts.tail.size() != d) l.fail("'" + key + "' needs " + std::to_string(d) + " entries");
    return ints(l, parts.tail);
  };
  Vec counit = vec("counit"), unit = vec("unit");
  return at(line, [&] { return filtcat::FilteredCoalgebra(p, std::move(delta), std::move(counit), std::move(unit)); });
}

}  // namespace detail

inline Category parse_category(const std::string& text) {
  auto ls = detail::lines_of(text);
  const std::string head = detail::header(ls);
  if (head != "koszul-category") ls.front().fail("expected 'koszul-category', found '" + head + "'");
  detail::Fields f(ls, {"kind", "modulus", "group", "twist", "variant", "q", "dim", "counit", "unit", "rank"},
                   {"piece", "delta"});
  const detail::Line& kl = f.need("kind");
  if (kl.words.size() != 2) kl.fail("expected 'kind <kind>'");
  const std::string& kind = kl.words[1];
  auto only = [&](std::set<std::string> allowed) {
    for (const auto& l : ls)
      if (l.number != ls.front().number && l.key() != "kind" && !allowed.count(l.key()))
        l.fail("field '" + l.key() + "' does not apply to kind '" + kind + "'");
  };
  if (kind == "twisted") {
    only({"modulus", "group", "twist", "piece"});
    return detail::parse_twisted(f, kl.number);
  }
  if (kind == "frobenius") {
    only({"variant", "q"});
    filtcat::FrobeniusSetup setup;
    const detail::Line& v = f.need("variant");
    if (v.words.size() != 2) v.fail("expected 'variant split|inverted|integral'");
    if (v.words[1] == "split")
      setup.variant = filtcat::FrobeniusVariant::split;
    else if (v.words[1] == "inverted")
      setup.variant = filtcat::FrobeniusVariant::inverted;
    else if (v.words[1] == "integral")
      setup.variant = filtcat::FrobeniusVariant::integral;
    else
      v.fail("unknown variant '" + v.words[1] + "'");
    const detail::Line& q = f.need("q");
    setup.q = detail::single_int(q, 2, 1 << 20);
    detail::at(q.number, [&] { return setup.characteristic(); });
    return setup;
  }
  if (kind == "coalgebra") {
    only({"modulus", "dim", "delta", "counit", "unit"});
    return detail::parse_coalgebra(f, kind, kl.number);
  }
  if (kind == "dual-group") {
    only({"modulus", "group"});
    return detail::parse_coalgebra(f, kind, kl.number);
  }
  if (kind == "primitive") {
    only({"modulus", "rank"});
    return detail::parse_coalgebra(f, kind, kl.number);
  }
  kl.fail("unknown category kind '" + kind + "'");
}

inline std::string emit_category(const Category& c) {
  std::ostringstream os;
  os << "koszul-category 1\n";
  if (auto* t = std::get_if<TwistCategory>(&c)) {
    os << "kind twisted\nmodulus " << t->m << "\ngroup ";
    if (t->factors.empty())
      os << "trivial";
    else if (t->factors.size() == 1)
      os << "cyclic " << t->factors[0];
    else {
      os << "product";
      for (auto o : t->factors) os << ' ' << o;
    }
    os << "\ntwist" << detail::join(t->twist) << '\n';
    for (const auto& p : t->pieces) {
      os << "piece " << p.name << ' ';
      switch (p.kind) {
        case PieceKind::trivial: os << "trivial"; break;
        case PieceKind::regular: os << "regular"; break;
        case PieceKind::character: os << "character" << detail::join(p.values); break;
      }
      os << '\n';
    }
  } else if (auto* fr = std::get_if<filtcat::FrobeniusSetup>(&c)) {
    static const char* names[] = {"", "split", "inverted", "integral"};
    os << "kind frobenius\nvariant " << names[static_cast<int>(fr->variant)] << "\nq " << fr->q << '\n';
  } else {
    const auto& C = std::get<filtcat::FilteredCoalgebra>(c);
    os << "kind coalgebra\nmodulus " << C.characteristic() << "\ndim " << C.dim() << '\n';
    for (std::size_t k = 0; k < C.dim(); ++k) {
      os << "delta " << k << " :";
      for (std::size_t a = 0; a < C.dim(); ++a)
        for (std::size_t b = 0; b < C.dim(); ++b)
          if (C.delta()[k](a, b)) os << "  " << a << ' ' << b << ' ' << C.delta()[k](a, b);
      os << '\n';
    }
    os << "counit :" << detail::join(C.counit()) << "\nunit :" << detail::join(C.unit()) << '\n';
  }
  return os.str();
}

/// Object of a twist category: "E<level>[.<piece>]" terms joined by "+".
inline filtcat::FilteredGModule parse_twist_object(const TwistCategory& c, const std::string& s) {
  auto setup = c.setup();
  std::vector<filtcat::Block> blocks;
  std::size_t start = 0;
  while (true) {
    const auto plus = s.find('+', start);
    const std::string term = s.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    if (term.size() < 2 || term[0] != 'E') throw InvalidInput("object term '" + term + "' must look like E<level>");
    const auto dot = term.find('.');
    const std::string lev = term.substr(1, dot == std::string::npos ? std::string::npos : dot - 1);
    if (!detail::is_int(lev)) throw InvalidInput("bad level in object term '" + term + "'");
    filtcat::Block b{std::stoi(lev), 0};
    if (dot != std::string::npos) {
      const std::string name = term.substr(dot + 1);
      std::size_t i = 0;
      while (i < c.pieces.size() && c.pieces[i].name != name) ++i;
      if (i == c.pieces.size()) throw InvalidInput("unknown piece '" + name + "'");
      b.piece = i;
    }
    blocks.push_back(b);
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return filtcat::FilteredGModule::graded(setup, std::move(blocks));
}

/// Level of a generator object "E<i>", "Z(<i>)" or "<i>".
inline int parse_level(const std::string& s) {
  std::string t = s;
  if (t.size() > 1 && t[0] == 'E')
    t = t.substr(1);
  else if (t.size() > 3 && t.rfind("Z(", 0) == 0 && t.back() == ')')
    t = t.substr(2, t.size() - 3);
  if (!detail::is_int(t)) throw InvalidInput("expected a level such as E2, Z(2) or 2; found '" + s + "'");
  return std::stoi(t);
}

// ---------------------------------------------------------------------------
// Matrix problems and witnesses

struct MatrixDocument {
  matrixcrit::ChainProblem problem;
  std::optional<matrixcrit::FactorizationWitness> witness;
};

namespace detail {

inline matrixcrit::ColoredMatrix parse_colored(const Line& l, std::size_t from, const BigGradedRing& A) {
  const auto& w = l.words;
  auto need = [&](std::size_t i, const char* key) {
    if (i >= w.size() || w[i] != key) l.fail(std::string("expected '") + key + "'");
  };
  need(from, "deg");
  if (from + 1 >= w.size()) l.fail("missing degree");
  const int deg = static_cast<int>(to_int(l, w[from + 1], 0, A.max_degree(), "degree"));
  auto labels = [&](std::size_t i) {
    if (i >= w.size()) l.fail("missing labels");
    std::vector<std::size_t> out;
    if (w[i] == "-") return out;
    std::size_t start = 0;
    while (true) {
      auto comma = w[i].find(',', start);
      out.push_back(object(l, A.objects(), w[i].substr(start, comma == std::string::npos ? comma : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  need(from + 2, "rows");
  auto rows = labels(from + 3);
  need(from + 4, "cols");
  auto cols = labels(from + 5);
  need(from + 6, "entries");
  std::vector<Vec> entries;
  std::size_t in_row = 0, row_count = 0;
  for (std::size_t i = from + 7; i < w.size(); ++i) {
    if (w[i] == ";") {
      if (in_row != cols.size()) l.fail("row " + std::to_string(row_count) + " has the wrong number of entries");
      in_row = 0;
      ++row_count;
      continue;
    }
    const std::string& e = w[i];
    if (e.size() < 2 || e.front() != '(' || e.back() != ')') l.fail("expected an entry '(c,...)', found '" + e + "'");
    Vec v;
    const std::string inner = e.substr(1, e.size() - 2);
    std::size_t start = 0;
    while (!inner.empty()) {
      auto comma = inner.find(',', start);
      v.push_back(static_cast<Residue>(
          to_int(l, inner.substr(start, comma == std::string::npos ? comma : comma - start))));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    entries.push_back(std::move(v));
    ++in_row;
  }
  if (!rows.empty() && !cols.empty()) {
    if (in_row != cols.size()) l.fail("row " + std::to_string(row_count) + " has the wrong number of entries");
    ++row_count;
    if (row_count != rows.size()) l.fail("expected " + std::to_string(rows.size()) + " rows");
  } else if (!entries.empty()) {
    l.fail("an empty matrix has no entries");
  }
  return at(l.number, [&] { return matrixcrit::make_matrix(A, rows, cols, deg, std::move(entries)); });
}

inline void emit_colored(std::ostringstream& os, const BigGradedRing& A, const matrixcrit::ColoredMatrix& M) {
  auto labels = [&](const std::vector<std::size_t>& ls) {
    if (ls.empty()) return std::string("-");
    std::string out;
    for (std::size_t i = 0; i < ls.size(); ++i) out += (i ? "," : "") + A.objects().name(ls[i]);
    return out;
  };
  os << "deg " << M.degree << " rows " << labels(M.row_labels) << " cols " << labels(M.col_labels) << " entries";
  for (std::size_t i = 0; i < M.rows(); ++i) {
    if (i) os << " ;";
    for (std::size_t j = 0; j < M.cols(); ++j) {
      os << " (";
      const Vec& e = M.at(i, j);
      for (std::size_t r = 0; r < e.size(); ++r) os << (r ? "," : "") << e[r];
      os << ')';
    }
  }
  os << '\n';
}

}  // namespace detail

inline MatrixDocument parse_matrix_document(const std::string& text, const BigGradedRing& A) {
  auto ls = detail::lines_of(text);
  const std::string head = detail::header(ls);
  if (head != "koszul-matrix") ls.front().fail("expected 'koszul-matrix', found '" + head + "'");
  detail::Fields f(ls, {"N", "P", "Q", "variant"}, {"M", "K", "Mp", "L"});
  using matrixcrit::ColoredMatrix;
  auto indexed = [&](const std::string& key, long long first) {
    std::map<long long, ColoredMatrix> got;
    for (const detail::Line* l : f.all(key)) {
      if (l->words.size() < 2) l->fail("missing index");
      const auto i = detail::to_int(*l, l->words[1], first, 64, "index");
      if (got.count(i)) l->fail("duplicate " + key + " " + l->words[1]);
      got[i] = detail::parse_colored(*l, 2, A);
    }
    std::vector<ColoredMatrix> out;
    for (auto& [i, M] : got) {
      if (i != first + static_cast<long long>(out.size()))
        throw ParseError(f.last_line(), key + " indices must run from " + std::to_string(first) + " without gaps");
      out.push_back(std::move(M));
    }
    return out;
  };
  MatrixDocument doc;
  auto chain = indexed("M", 1);
  const detail::Line& nl = f.need("N");
  auto N = detail::parse_colored(nl, 1, A);
  doc.problem = detail::at(nl.number, [&] { return matrixcrit::make_problem(A, std::move(chain), std::move(N)); });

  const bool any = f.find("variant") || f.find("P") || f.find("Q") || !f.all("K").empty() ||
                   !f.all("Mp").empty() || !f.all("L").empty();
  if (!any) return doc;
  matrixcrit::FactorizationWitness W;
  const detail::Line& vl = f.need("variant");
  if (vl.words.size() != 2 || (vl.words[1] != "general" && vl.words[1] != "triangulated"))
    vl.fail("expected 'variant general|triangulated'");
  W.variant = vl.words[1] == "general" ? matrixcrit::Variant::general : matrixcrit::Variant::triangulated;
  W.K = indexed("K", 1);
  W.Mp = indexed("Mp", 1);
  W.L = indexed("L", 0);
  W.Q = detail::parse_colored(f.need("Q"), 1, A);
  if (W.variant == matrixcrit::Variant::general) {
    if (!W.L.empty()) f.all("L").front()->fail("a general witness has no L matrices");
    W.P = detail::parse_colored(f.need("P"), 1, A);
  } else {
    if (!W.K.empty()) f.all("K").front()->fail("a triangulated witness has no K matrices");
    if (auto* pl = f.find("P")) pl->fail("a triangulated witness has no P matrix");
  }
  doc.witness = std::move(W);
  return doc;
}

inline std::string emit_witness(const BigGradedRing& A, const matrixcrit::FactorizationWitness& W) {
  std::ostringstream os;
  os << "variant " << matrixcrit::variant_name(W.variant) << '\n';
  for (std::size_t i = 0; i < W.K.size(); ++i) {
    os << "K " << i + 1 << ' ';
    detail::emit_colored(os, A, W.K[i]);
  }
  for (std::size_t i = 0; i < W.Mp.size(); ++i) {
    os << "Mp " << i + 1 << ' ';
    detail::emit_colored(os, A, W.Mp[i]);
  }
  for (std::size_t i = 0; i < W.L.size(); ++i) {
    os << "L " << i << ' ';
    detail::emit_colored(os, A, W.L[i]);
  }
  if (W.variant == matrixcrit::Variant::general) {
    os << "P ";
    detail::emit_colored(os, A, W.P);
  }
  os << "Q ";
  detail::emit_colored(os, A, W.Q);
  return os.str();
}

inline std::string emit_matrix_document(const BigGradedRing& A, const matrixcrit::ChainProblem& P,
                                        const std::optional<matrixcrit::FactorizationWitness>& W = std::nullopt) {
  std::ostringstream os;
  os << "koszul-matrix 1\n";
  for (std::size_t i = 0; i < P.chain.size(); ++i) {
    os << "M " << i + 1 << ' ';
    detail::emit_colored(os, A, P.chain[i]);
  }
  os << "N ";
  detail::emit_colored(os, A, P.N);
  if (W) os << emit_witness(A, *W);
  return os.str();
}

}  // namespace koszul::format
