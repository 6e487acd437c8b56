#pragma once

// Built-in examples: named rings, coalgebras and categories with annotated
// expectations. Quadratic examples are generated as presentation documents and
// parsed, so every such entry has a canonical presentation.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "koszul/filtcat.hpp"
#include "koszul/format.hpp"
#include "koszul/homcheck.hpp"

namespace koszul::corpus {

using bigring::BigGradedRing;
using exactla::FinModule;
using exactla::ModMatrix;
using exactla::Residue;
using exactla::Vec;

using Params = std::map<std::string, std::string>;
using Artifact = std::variant<BigGradedRing, format::Category>;

struct ParamDoc {
  std::string name;
  std::string fallback;  // empty when the parameter is required
  std::string range;
};

/// An annotated property. `source` is "literature" for a statement taken from the
/// published results, "derived" for a value computed independently, "search" for a seeded
/// discovery. Tests re-derive every annotation.
struct Expectation {
  std::string property;
  std::string value;
  std::string source;
  std::string note;
};

struct CorpusEntry {
  std::string name;
  std::string artifact;  // "ring", "coalgebra" or "category"
  std::string summary;
  std::vector<ParamDoc> params;
  std::vector<Expectation> expected;
  std::vector<Params> instances;  // parameter sets swept by the test suites
};

namespace detail {

inline long long param(const Params& p, const ParamDoc& doc) {
  auto it = p.find(doc.name);
  const std::string s = it == p.end() ? doc.fallback : it->second;
  if (s.empty()) throw InvalidInput("parameter '" + doc.name + "' is required");
  if (!format::detail::is_int(s)) throw InvalidInput("parameter '" + doc.name + "' must be an integer");
  return std::stoll(s);
}

inline long long param(const Params& p, const std::string& name, const std::string& fallback, long long lo,
                       long long hi) {
  long long v = param(p, ParamDoc{name, fallback, ""});
  if (v < lo || v > hi)
    throw InvalidInput("parameter '" + name + "' out of range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]");
  return v;
}

inline void only(const Params& p, std::initializer_list<const char*> names) {
  for (const auto& [k, v] : p)
    if (std::find_if(names.begin(), names.end(), [&](const char* n) { return k == n; }) == names.end())
      throw InvalidInput("unknown parameter '" + k + "'");
}

inline Residue prime(const Params& p, const std::string& name, const std::string& fallback, long long hi) {
  auto v = static_cast<Residue>(param(p, name, fallback, 2, hi));
  if (!exactla::is_prime(v)) throw InvalidInput("parameter '" + name + "' must be prime");
  return v;
}

/// Presentation document on one object with generators x1..xg (or the given names).
struct Presentation {
  Residue m = 2;
  std::vector<std::string> objects{"*"};
  std::vector<std::array<std::string, 3>> generators;  // name, source, target
  std::vector<std::string> relations;
  int d = 5;

  [[nodiscard]] std::string text() const {
    std::ostringstream os;
    os << "koszul-presentation 1\nmodulus " << m << "\nobjects";
    for (const auto& o : objects) os << ' ' << o;
    os << "\nmax-degree " << d << '\n';
    for (const auto& g : generators) os << "generator " << g[0] << ' ' << g[1] << ' ' << g[2] << '\n';
    for (const auto& r : relations) os << "relation " << r << '\n';
    return os.str();
  }
};

inline std::vector<std::string> names(std::size_t g) {
  static const char* letters[] = {"x", "y", "z", "w"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g; ++i) out.push_back(g <= 4 ? letters[i] : "x" + std::to_string(i + 1));
  return out;
}

inline Presentation one_object(Residue m, std::size_t g, int d) {
  Presentation P;
  P.m = m;
  P.d = d;
  for (const auto& n : names(g)) P.generators.push_back({n, "*", "*"});
  return P;
}

inline Presentation exterior(const Params& p) {
  only(p, {"gens", "p", "d"});
  const auto g = static_cast<std::size_t>(param(p, "gens", "2", 1, 4));
  auto P = one_object(static_cast<Residue>(param(p, "p", "2", 2, 1 << 15)), g, static_cast<int>(param(p, "d", "5", 2, 12)));
  const auto x = names(g);
  for (std::size_t i = 0; i < g; ++i) {
    P.relations.push_back(x[i] + "*" + x[i]);
    for (std::size_t j = i + 1; j < g; ++j) P.relations.push_back(x[i] + "*" + x[j] + " + " + x[j] + "*" + x[i]);
  }
  return P;
}

inline Presentation symmetric(const Params& p) {
  only(p, {"gens", "p", "d"});
  const auto g = static_cast<std::size_t>(param(p, "gens", "2", 1, 3));
  auto P = one_object(static_cast<Residue>(param(p, "p", "2", 2, 1 << 15)), g, static_cast<int>(param(p, "d", "5", 2, 12)));
  const auto x = names(g);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = i + 1; j < g; ++j) P.relations.push_back(x[i] + "*" + x[j] + " + -1 " + x[j] + "*" + x[i]);
  return P;
}

inline Presentation free_ring(const Params& p) {
  only(p, {"gens", "p", "d"});
  const auto g = static_cast<std::size_t>(param(p, "gens", "1", 1, 2));
  return one_object(static_cast<Residue>(param(p, "p", "2", 2, 1 << 15)), g, static_cast<int>(param(p, "d", "5", 2, 12)));
}

inline Presentation quiver(const Params& p) {
  only(p, {"p", "d"});
  Presentation P;
  P.m = static_cast<Residue>(param(p, "p", "2", 2, 1 << 15));
  P.d = static_cast<int>(param(p, "d", "5", 2, 12));
  P.objects = {"a", "b", "c"};
  P.generators = {{"f", "a", "b"}, {"g", "b", "c"}, {"h", "b", "c"}};
  P.relations = {"f*g"};
  return P;
}

/// Discrete logarithms to a generator of F_q^*.
inline std::vector<Residue> discrete_log(Residue q) {
  for (Residue g = 1; g < q; ++g) {
    std::vector<Residue> log(q, -1);
    Residue x = 1;
    bool ok = true;
    for (Residue e = 0; e < q - 1; ++e) {
      if (log[x] != -1) {
        ok = false;
        break;
      }
      log[x] = e;
      x = x * g % q;
    }
    if (ok) return log;
  }
  throw InvalidInput("no generator of the unit group");
}

/// K^M(F_q)/l: degree one is F_q^* / l, relations are the Steinberg symbols {a, 1 - a}.
inline Presentation milnor(const Params& p) {
  only(p, {"q", "l", "d"});
  const Residue q = prime(p, "q", "7", 997);
  const Residue l = prime(p, "l", "3", 97);
  Presentation P;
  P.m = l;
  P.d = static_cast<int>(param(p, "d", "5", 2, 12));
  if ((q - 1) % l != 0) return P;  // F_q^* / l = 0
  P.generators.push_back({"e", "*", "*"});
  const auto log = discrete_log(q);
  std::vector<bool> seen(l, false);
  for (Residue a = 2; a < q; ++a) {
    const Residue c = log[a] % l * (log[(q + 1 - a) % q] % l) % l;
    if (c == 0 || seen[c]) continue;
    seen[c] = true;
    P.relations.push_back(std::to_string(c) + " e*e");
  }
  return P;
}

inline std::string monomial(const std::vector<std::string>& x, std::size_t i) {
  return x[i / x.size()] + "*" + x[i % x.size()];
}

/// Seeded search over Z/2 for a quadratic ring with off-diagonal cobar homology.
inline Presentation non_koszul_search(const Params& p) {
  only(p, {"seed", "d"});
  const auto seed = static_cast<std::uint64_t>(param(p, "seed", "", 0, (1LL << 62)));
  const int d = static_cast<int>(param(p, "d", "5", 4, 8));
  std::mt19937_64 rng(seed);
  const std::size_t g = 3;
  const auto x = names(g);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const std::size_t r = 5 + rng() % 2;
    auto P = one_object(2, g, d);
    for (std::size_t j = 0; j < r; ++j) {
      std::string rel;
      for (std::size_t i = 0; i < g * g; ++i)
        if (rng() % 2) rel += (rel.empty() ? "" : " + ") + monomial(x, i);
      if (!rel.empty()) P.relations.push_back(rel);
    }
    auto A = format::parse_ring(P.text());
    if (A.component(3, 0, 0).rank() > 4) continue;
    auto v = homcheck::koszul_verdict(A, homcheck::Method::cobar_diagonal, d);
    if (!v.koszul && v.failure && v.failure->n != -v.failure->i) return P;
  }
  throw BudgetExceeded("no non-Koszul presentation found within 10000 attempts");
}

inline BigGradedRing truncated(const Params& p) {
  only(p, {"m", "a1", "d"});
  const auto m = static_cast<Residue>(param(p, "m", "2", 2, 1 << 15));
  const int d = static_cast<int>(param(p, "d", "5", 1, 12));
  std::vector<Residue> orders;
  auto it = p.find("a1");
  std::string a1 = it == p.end() ? std::to_string(m) : it->second;
  std::stringstream ss(a1);
  for (std::string t; std::getline(ss, t, ',');) {
    if (!format::detail::is_int(t)) throw InvalidInput("parameter 'a1' must be a comma-separated list of orders");
    const Residue o = std::stoll(t);
    if (o < 2 || m % o != 0) throw InvalidInput("orders in 'a1' must be divisors of m greater than 1");
    orders.push_back(o);
  }
  if (orders.size() > 4) throw InvalidInput("at most four generators in 'a1'");
  BigGradedRing A(bigring::ObjectSet::single(), m, d);
  const FinModule A1 = FinModule::from_orders(m, orders);
  A.set_component(0, 0, 0, FinModule::free(m, 1));
  A.set_component(1, 0, 0, A1);
  A.set_unit(0, {1});
  A.set_mult(0, 0, 0, 0, 0, ModMatrix::from_rows({{1}}));
  A.set_mult(0, 1, 0, 0, 0, ModMatrix::identity(A1.rank()));
  A.set_mult(1, 0, 0, 0, 0, ModMatrix::identity(A1.rank()));
  return A;
}

/// Λ(x) with an extra generator z in degree 3.
inline BigGradedRing cubic_generator(const Params& p) {
  only(p, {"p", "d"});
  const auto m = static_cast<Residue>(param(p, "p", "2", 2, 1 << 15));
  const int d = static_cast<int>(param(p, "d", "5", 3, 12));
  BigGradedRing A(bigring::ObjectSet::single(), m, d);
  A.set_component(0, 0, 0, FinModule::free(m, 1));
  A.set_component(1, 0, 0, FinModule::free(m, 1));
  A.set_component(3, 0, 0, FinModule::free(m, 1));
  A.set_unit(0, {1});
  for (int n : {0, 1, 3}) {
    A.set_mult(0, n, 0, 0, 0, ModMatrix::identity(1));
    if (n) A.set_mult(n, 0, 0, 0, 0, ModMatrix::identity(1));
  }
  return A;
}

inline filtcat::SetupPtr cyclic_setup(std::size_t l) {
  const auto G = filtcat::FinGroup::cyclic(l);
  const auto m = static_cast<Residue>(l);
  return filtcat::make_setup(filtcat::TwistSetup{
      G, m, Vec(l, 1), {filtcat::GModule::trivial(G, m), filtcat::GModule::regular(G, m)}, {"k", "kG"}});
}

/// Diagonal Ext ring of E = k + k[G] for G = Z/l acting on Z/l.
inline BigGradedRing cyclic_extension(const Params& p) {
  only(p, {"l", "d"});
  const auto l = static_cast<std::size_t>(param(p, "l", "2", 2, 3));
  const int d = static_cast<int>(param(p, "d", "5", 2, 8));
  auto S = cyclic_setup(l);
  return filtcat::diagonal_ext_ring({filtcat::generator(S, 0, 0), filtcat::generator(S, 0, 1)}, {"k", "kG"}, d).ring;
}

inline format::Category twisted(const Params& p) {
  only(p, {"n", "m", "twist"});
  format::TwistCategory c;
  c.factors = {static_cast<std::size_t>(param(p, "n", "3", 2, 16))};
  c.m = static_cast<Residue>(param(p, "m", "3", 2, 64));
  c.twist = {static_cast<Residue>(param(p, "twist", "1", 1, c.m - 1))};
  c.pieces = {{"Z/" + std::to_string(c.m), format::PieceKind::trivial, {}}};
  static_cast<void>(c.setup());
  return c;
}

inline format::Category frobenius(const Params& p) {
  only(p, {"variant", "q"});
  filtcat::FrobeniusSetup s;
  s.variant = static_cast<filtcat::FrobeniusVariant>(param(p, "variant", "2", 1, 3));
  s.q = param(p, "q", "2", 2, 1 << 20);
  static_cast<void>(s.characteristic());
  return s;
}

inline format::Category dual_group(const Params& p) {
  only(p, {"n", "p"});
  const auto n = static_cast<std::size_t>(param(p, "n", "2", 1, 16));
  return filtcat::dual_group_algebra(filtcat::FinGroup::cyclic(n), prime(p, "p", "2", 97));
}

inline format::Category primitive(const Params& p) {
  only(p, {"p", "r"});
  const auto r = static_cast<std::size_t>(param(p, "r", "1", 0, 3));
  return filtcat::primitive_coalgebra(prime(p, "p", "2", 97), r);
}

struct Builder {
  std::function<Presentation(const Params&)> presentation;
  std::function<Artifact(const Params&)> direct;
};

inline const std::map<std::string, Builder>& builders() {
  static const std::map<std::string, Builder> table{
      {"truncated", {nullptr, truncated}},
      {"exterior", {exterior, nullptr}},
      {"symmetric", {symmetric, nullptr}},
      {"free", {free_ring, nullptr}},
      {"quiver", {quiver, nullptr}},
      {"cubic-generator", {nullptr, cubic_generator}},
      {"milnor-finite-field", {milnor, nullptr}},
      {"non-koszul-search", {non_koszul_search, nullptr}},
      {"cyclic-extension", {nullptr, cyclic_extension}},
      {"twisted", {nullptr, twisted}},
      {"frobenius", {nullptr, frobenius}},
      {"dual-group", {nullptr, dual_group}},
      {"primitive", {nullptr, primitive}},
  };
  return table;
}

inline const Builder& builder(const std::string& name) {
  auto it = builders().find(name);
  if (it == builders().end()) throw InvalidInput("unknown corpus entry '" + name + "'");
  return it->second;
}

}  // namespace detail

/// The catalog, in a fixed order.
inline const std::vector<CorpusEntry>& list() {
  static const std::vector<CorpusEntry> entries{
      {"truncated",
       "ring",
       "Z/m in degree 0, a given A_1, and A_n = 0 for n >= 2",
       {{"m", "2", "2..32768"}, {"a1", "m", "orders of the degree-one generators"}, {"d", "5", "1..12"}},
       {{"verdict", "koszul", "literature", "graded rings with A_n = 0 for n >= 2 are Koszul"}},
       {{{"m", "2"}}, {{"m", "3"}}, {{"m", "4"}}, {{"m", "2"}, {"a1", "2,2"}}}},
      {"exterior",
       "ring",
       "exterior algebra on g generators",
       {{"gens", "2", "1..4"}, {"p", "2", "modulus"}, {"d", "5", "2..12"}},
       {{"ranks", "binomial(g, n)", "derived", "expansion of the relations"},
        {"verdict", "koszul", "literature", "exterior algebra with two generators"}},
       {{{"p", "2"}}, {{"p", "3"}}, {{"gens", "3"}, {"p", "2"}}}},
      {"symmetric",
       "ring",
       "polynomial ring on g commuting generators",
       {{"gens", "2", "1..3"}, {"p", "2", "modulus"}, {"d", "5", "2..12"}},
       {{"ranks", "binomial(n + g - 1, g - 1)", "derived", "expansion of the relations"},
        {"verdict", "koszul", "derived", "bar, cobar, Koszul complex and lattice checks"}},
       {{{"p", "2"}}, {{"p", "3"}}}},
      {"free",
       "ring",
       "tensor ring on g generators",
       {{"gens", "1", "1..2"}, {"p", "2", "modulus"}, {"d", "5", "2..12"}},
       {{"ranks", "g^n", "derived", "no relations"},
        {"verdict", "koszul", "derived", "bar, cobar, Koszul complex and lattice checks"}},
       {{{"p", "2"}}, {{"p", "3"}}}},
      {"quiver",
       "ring",
       "three objects a, b, c; arrows f: a -> b and g, h: b -> c; relation f g = 0",
       {{"p", "2", "modulus"}, {"d", "5", "2..12"}},
       {{"ranks", "A_2(a,c) = Z/p, zero above degree 2", "derived", "expansion of the relations"},
        {"verdict", "koszul", "derived", "bar, cobar, Koszul complex and lattice checks"}},
       {{{"p", "2"}}, {{"p", "3"}}}},
      {"cubic-generator",
       "ring",
       "exterior algebra on x with an extra generator in degree 3",
       {{"p", "2", "modulus"}, {"d", "5", "3..12"}},
       {{"quadratic", "no", "derived", "A_3 is not generated by A_1"},
        {"verdict", "failed-at(1,3)", "derived", "bar homology in degree (1,3)"}},
       {{{"p", "2"}}, {{"p", "3"}}}},
      {"milnor-finite-field",
       "ring",
       "K^M(F_q)/l, computed from the unit group and the Steinberg relations",
       {{"q", "7", "prime"}, {"l", "3", "prime"}, {"d", "5", "2..12"}},
       {{"ranks", "Z/l, Z/l if l | q - 1 (else 0), then 0", "derived", "unit group and Steinberg symbols"},
        {"verdict", "koszul", "literature", "Milnor K-theory ring is quadratic by definition"}},
       {{{"q", "7"}, {"l", "3"}}, {{"q", "5"}, {"l", "2"}}, {{"q", "7"}, {"l", "2"}}, {{"q", "5"}, {"l", "3"}}}},
      {"non-koszul-search",
       "ring",
       "quadratic ring on three generators over Z/2 with off-diagonal cobar homology, found by seeded search",
       {{"seed", "", "required"}, {"d", "5", "4..8"}},
       {{"verdict", "not koszul", "search", "frozen as a golden file"}},
       {{{"seed", "1"}}}},
      {"cyclic-extension",
       "ring",
       "diagonal Ext ring of k + k[G] for G = Z/l acting on Z/l",
       {{"l", "2", "2..3"}, {"d", "5", "2..8"}},
       {{"ranks", "A_0 ranks (1,1,1,l); A_1 only at (k,k)", "derived", "ext0 and ext1 by cocycles"},
        {"flat", "no", "derived", "A_1 is not flat over A_0, so the homological criteria refuse"},
        {"verdict", "koszul-up-to-5", "derived", "matrix criterion, which needs no flatness"}},
       {{{"l", "2"}}, {{"l", "3"}}}},
      {"twisted",
       "category",
       "filtered Z/m[G]-modules for G = Z/n with a twist character",
       {{"n", "3", "2..16"}, {"m", "3", "2..64"}, {"twist", "1", "unit mod m"}},
       {{"ext1(E0,E1)", "Z/3", "derived", "periodic resolution for n = m = 3"}},
       {{}}},
      {"frobenius",
       "category",
       "filtered groups with a Frobenius endomorphism",
       {{"variant", "2", "1..3"}, {"q", "2", "prime power"}},
       {{"ext1(0,2)", "Z/3", "literature", "Ext^1(Z(i), Z(j)) = Z/(q^(j-i) - 1)"}},
       {{}}},
      {"dual-group",
       "coalgebra",
       "functions on Z/n over F_p",
       {{"n", "2", "1..16"}, {"p", "2", "prime"}},
       {{"ext1(E0,E1)", "Z/2", "derived", "extension enumeration"}},
       {{}}},
      {"primitive",
       "coalgebra",
       "k + V with V primitive of rank r",
       {{"p", "2", "prime"}, {"r", "1", "0..3"}},
       {{"ext1(E0,E1)", "(Z/p)^r", "derived", "extension enumeration"}},
       {{}}},
  };
  return entries;
}

inline const CorpusEntry& entry(const std::string& name) {
  for (const auto& e : list())
    if (e.name == name) return e;
  throw InvalidInput("unknown corpus entry '" + name + "'");
}

/// True when the entry is defined by a quadratic presentation.
inline bool has_presentation(const std::string& name) { return detail::builder(name).presentation != nullptr; }

/// The canonical presentation document of a quadratic entry.
inline std::string presentation(const std::string& name, const Params& p = {}) {
  const auto& b = detail::builder(name);
  if (!b.presentation) throw InvalidInput("corpus entry '" + name + "' is not given by a presentation");
  return b.presentation(p).text();
}

inline Artifact build(const std::string& name, const Params& p = {}) {
  const auto& b = detail::builder(name);
  if (b.presentation) return format::parse_ring(b.presentation(p).text());
  return b.direct(p);
}

inline BigGradedRing build_ring(const std::string& name, const Params& p = {}) {
  auto a = build(name, p);
  if (auto* A = std::get_if<BigGradedRing>(&a)) return *A;
  throw InvalidInput("corpus entry '" + name + "' is not a ring");
}

/// The document `koszul corpus get` prints: the presentation when there is one.
inline std::string document(const std::string& name, const Params& p = {}) {
  if (has_presentation(name)) return presentation(name, p);
  auto a = build(name, p);
  if (auto* A = std::get_if<BigGradedRing>(&a)) return format::emit_ring(*A);
  return format::emit_category(std::get<format::Category>(a));
}

/// Rings of every entry instance, labelled "name(k=v,...)".
inline std::vector<std::pair<std::string, BigGradedRing>> ring_instances() {
  std::vector<std::pair<std::string, BigGradedRing>> out;
  for (const auto& e : list()) {
    if (e.artifact != "ring") continue;
    for (const auto& p : e.instances) {
      std::string label = e.name + "(";
      bool first = true;
      for (const auto& [k, v] : p) {
        label += (first ? "" : ",") + k + "=" + v;
        first = false;
      }
      out.emplace_back(label + ")", build_ring(e.name, p));
    }
  }
  return out;
}

}  // namespace koszul::corpus
