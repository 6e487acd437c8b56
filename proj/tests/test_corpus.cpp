#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "koszul/corpus.hpp"
#include "koszul/matrixcrit.hpp"

using namespace koszul;
using corpus::Params;
using exactla::Residue;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) { return read_file(std::string(KOSZUL_SOURCE_DIR) + "/tests/golden/" + name); }

std::size_t total_rank(const bigring::BigGradedRing& A, int n) {
  std::size_t r = 0;
  for (std::size_t s = 0; s < A.object_count(); ++s)
    for (std::size_t t = 0; t < A.object_count(); ++t) r += A.component(n, s, t).rank();
  return r;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t out = 1;
  for (std::size_t i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

// Rank mod p of a list of vectors, by plain row reduction.
std::size_t rank_mod(std::vector<std::vector<Residue>> rows, Residue p) {
  std::size_t rank = 0;
  const std::size_t n = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < n && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c] % p == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    Residue inv = 1;
    while (rows[rank][c] * inv % p != 1) ++inv;
    for (auto& x : rows[rank]) x = x * inv % p;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != rank && rows[r][c] % p) {
        Residue f = rows[r][c];
        for (std::size_t j = 0; j < n; ++j) rows[r][j] = ((rows[r][j] - f * rows[rank][j]) % p + p) % p;
      }
    ++rank;
  }
  return rank;
}

// dim (T(V)/(R))_n for V of dimension g over Z/p; relations as vectors in V⊗V (index i*g + j).
std::size_t quotient_dim(std::size_t g, const std::vector<std::vector<Residue>>& rels, Residue p, int n) {
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= g;
  if (n < 2) return total;
  std::vector<std::vector<Residue>> span;
  for (int pos = 0; pos + 2 <= n; ++pos) {
    std::size_t left = 1, right = 1;
    for (int i = 0; i < pos; ++i) left *= g;
    for (int i = pos + 2; i < n; ++i) right *= g;
    for (const auto& r : rels)
      for (std::size_t u = 0; u < left; ++u)
        for (std::size_t w = 0; w < right; ++w) {
          std::vector<Residue> v(total, 0);
          for (std::size_t k = 0; k < g * g; ++k) v[(u * g * g + k) * right + w] = ((r[k] % p) + p) % p;
          span.push_back(std::move(v));
        }
  }
  return total - rank_mod(span, p);
}

// Relation vectors read off the "relation" lines of a one-object presentation.
std::vector<std::vector<Residue>> relation_vectors(const std::string& text, const std::vector<std::string>& gens) {
  std::vector<std::vector<Residue>> out;
  std::istringstream in(text);
  const std::size_t g = gens.size();
  auto index = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(gens.begin(), gens.end(), s) - gens.begin());
  };
  for (std::string line; std::getline(in, line);) {
    std::istringstream ws(line);
    std::string key;
    ws >> key;
    if (key != "relation") continue;
    std::vector<Residue> v(g * g, 0);
    Residue coef = 1;
    for (std::string w; ws >> w;) {
      if (w == "+") continue;
      auto star = w.find('*');
      if (star == std::string::npos) {
        coef = std::stoll(w);
        continue;
      }
      v[index(w.substr(0, star)) * g + index(w.substr(star + 1))] += coef;
      coef = 1;
    }
    out.push_back(v);
  }
  return out;
}

// |F_q^* / (F_q^*)^l| by listing l-th powers.
std::size_t units_mod_powers(Residue q, Residue l) {
  std::set<Residue> powers;
  for (Residue x = 1; x < q; ++x) {
    Residue y = 1;
    for (Residue i = 0; i < l; ++i) y = y * x % q;
    powers.insert(y);
  }
  return static_cast<std::size_t>(q - 1) / powers.size();
}

const corpus::Expectation& expectation(const corpus::CorpusEntry& e, const std::string& property) {
  for (const auto& x : e.expected)
    if (x.property == property) return x;
  throw std::runtime_error("no expectation " + property + " for " + e.name);
}

}  // namespace

TEST(Catalog, IsNonemptyWithDistinctNames) {
  const auto& entries = corpus::list();
  ASSERT_FALSE(entries.empty());
  std::set<std::string> names;
  for (const auto& e : entries) {
    EXPECT_TRUE(names.insert(e.name).second) << e.name;
    EXPECT_FALSE(e.expected.empty()) << e.name;
    EXPECT_FALSE(e.instances.empty()) << e.name;
    for (const auto& x : e.expected) EXPECT_TRUE(x.source == "literature" || x.source == "derived" || x.source == "search");
  }
  for (const char* n : {"truncated", "exterior", "milnor-finite-field", "non-koszul-search", "cyclic-extension"})
    EXPECT_TRUE(names.count(n)) << n;
}

TEST(Catalog, EveryInstanceBuildsAndValidates) {
  for (const auto& e : corpus::list())
    for (const auto& p : e.instances) {
      auto a = corpus::build(e.name, p);
      if (auto* A = std::get_if<bigring::BigGradedRing>(&a)) {
        EXPECT_EQ(e.artifact, "ring");
        EXPECT_TRUE(bigring::validate(*A).empty()) << e.name;
        continue;
      }
      const auto& c = std::get<format::Category>(a);
      if (auto* C = std::get_if<filtcat::FilteredCoalgebra>(&c)) {
        EXPECT_EQ(e.artifact, "coalgebra");
        EXPECT_TRUE(C->conilpotent()) << e.name;
      } else if (auto* t = std::get_if<format::TwistCategory>(&c)) {
        EXPECT_EQ(e.artifact, "category");
        EXPECT_NO_THROW(t->setup()->validate());
      } else {
        EXPECT_EQ(e.artifact, "category");
      }
    }
}

TEST(Catalog, BuildsAreDeterministic) {
  for (const auto& e : corpus::list())
    for (const auto& p : e.instances) {
      EXPECT_EQ(corpus::document(e.name, p), corpus::document(e.name, p)) << e.name;
      EXPECT_TRUE(corpus::build(e.name, p) == corpus::build(e.name, p)) << e.name;
    }
}

TEST(Catalog, DocumentsParseBackToTheBuiltValue) {
  for (const auto& e : corpus::list())
    for (const auto& p : e.instances) {
      const std::string doc = corpus::document(e.name, p);
      auto a = corpus::build(e.name, p);
      if (auto* A = std::get_if<bigring::BigGradedRing>(&a))
        EXPECT_TRUE(format::parse_ring(doc) == *A) << e.name;
      else
        EXPECT_TRUE(format::parse_category(doc) == std::get<format::Category>(a)) << e.name;
    }
}

TEST(Catalog, RejectsBadRequests) {
  EXPECT_THROW(corpus::build("no-such-entry"), InvalidInput);
  EXPECT_THROW(corpus::build("exterior", {{"colour", "2"}}), InvalidInput);
  EXPECT_THROW(corpus::build("exterior", {{"gens", "9"}}), InvalidInput);
  EXPECT_THROW(corpus::build("exterior", {{"gens", "two"}}), InvalidInput);
  EXPECT_THROW(corpus::build("milnor-finite-field", {{"q", "8"}}), InvalidInput);
  EXPECT_THROW(corpus::build("milnor-finite-field", {{"l", "4"}}), InvalidInput);
  EXPECT_THROW(corpus::build("truncated", {{"m", "4"}, {"a1", "3"}}), InvalidInput);
  EXPECT_THROW(corpus::build("non-koszul-search"), InvalidInput);
  EXPECT_THROW(corpus::build("frobenius", {{"q", "6"}}), InvalidInput);
  EXPECT_THROW(corpus::presentation("truncated"), InvalidInput);
  EXPECT_THROW(corpus::build_ring("frobenius"), InvalidInput);
}

TEST(Exterior, RanksAreBinomial) {
  for (Residue p : {2, 3, 5})
    for (std::size_t g = 1; g <= 4; ++g) {
      auto A = corpus::build_ring("exterior", {{"gens", std::to_string(g)}, {"p", std::to_string(p)}});
      for (int n = 0; n <= 5; ++n) {
        EXPECT_EQ(A.component(n, 0, 0).rank(), binomial(g, n)) << g << " " << n;
        EXPECT_TRUE(A.component(n, 0, 0).is_free());
      }
    }
  auto A = corpus::build_ring("exterior", {{"gens", "2"}, {"p", "2"}});
  EXPECT_EQ(A.component(0, 0, 0).to_string(), "Z/2");
  EXPECT_EQ(A.component(1, 0, 0).to_string(), "(Z/2)^2");
  EXPECT_EQ(A.component(2, 0, 0).to_string(), "Z/2");
}

TEST(Exterior, RanksMatchDirectExpansion) {
  const std::vector<std::string> gens{"x", "y", "z"};
  for (Residue p : {2, 3}) {
    Params params{{"gens", "3"}, {"p", std::to_string(p)}};
    auto rels = relation_vectors(corpus::presentation("exterior", params), gens);
    auto A = corpus::build_ring("exterior", params);
    for (int n = 0; n <= 5; ++n) EXPECT_EQ(A.component(n, 0, 0).rank(), quotient_dim(3, rels, p, n));
  }
}

TEST(Symmetric, RanksAreMonomialCounts) {
  for (Residue p : {2, 3})
    for (std::size_t g = 1; g <= 3; ++g) {
      auto A = corpus::build_ring("symmetric", {{"gens", std::to_string(g)}, {"p", std::to_string(p)}});
      for (int n = 0; n <= 5; ++n) EXPECT_EQ(A.component(n, 0, 0).rank(), binomial(n + g - 1, g - 1));
    }
}

TEST(Free, RanksArePowers) {
  auto A = corpus::build_ring("free", {{"gens", "2"}, {"p", "3"}});
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(A.component(n, 0, 0).rank(), std::size_t{1} << n);
}

TEST(Quiver, ComponentsFollowThePaths) {
  auto A = corpus::build_ring("quiver", {{"p", "3"}});
  EXPECT_EQ(A.object_count(), 3u);
  EXPECT_EQ(A.component(1, 0, 1).rank(), 1u);
  EXPECT_EQ(A.component(1, 1, 2).rank(), 2u);
  // f g = 0 leaves f h.
  EXPECT_EQ(A.component(2, 0, 2).rank(), 1u);
  EXPECT_EQ(total_rank(A, 2), 1u);
  for (int n = 3; n <= 5; ++n) EXPECT_EQ(total_rank(A, n), 0u);
}

TEST(Truncated, VanishesAboveDegreeOne) {
  auto A = corpus::build_ring("truncated", {{"m", "4"}, {"a1", "4"}});
  EXPECT_EQ(A.component(1, 0, 0).to_string(), "Z/4");
  for (int n = 2; n <= A.max_degree(); ++n) EXPECT_TRUE(A.component(n, 0, 0).is_zero());
  EXPECT_TRUE(bigring::validate(A).empty());
  auto B = corpus::build_ring("truncated", {{"m", "4"}, {"a1", "2,4"}});
  EXPECT_EQ(B.component(1, 0, 0).rank(), 2u);
  EXPECT_TRUE(bigring::validate(B).empty());
}

TEST(Truncated, IsKoszulOverZ2AndZ4) {
  for (const char* m : {"2", "4"}) {
    auto A = corpus::build_ring("truncated", {{"m", m}});
    EXPECT_EQ(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 4).to_string(), "koszul-up-to-4") << m;
  }
}

TEST(Milnor, SevenModThree) {
  auto A = corpus::build_ring("milnor-finite-field", {{"q", "7"}, {"l", "3"}});
  EXPECT_EQ(A.component(0, 0, 0).to_string(), "Z/3");
  EXPECT_EQ(A.component(1, 0, 0).to_string(), "Z/3");
  for (int n = 2; n <= A.max_degree(); ++n) EXPECT_TRUE(A.component(n, 0, 0).is_zero()) << n;
}

TEST(Milnor, DegreeOneIsUnitsModPowers) {
  for (Residue q : {2, 3, 5, 7, 11, 13, 31})
    for (Residue l : {2, 3, 5}) {
      auto A = corpus::build_ring("milnor-finite-field", {{"q", std::to_string(q)}, {"l", std::to_string(l)}});
      const std::size_t index = units_mod_powers(q, l);
      EXPECT_EQ(A.component(1, 0, 0).rank() == 0 ? 1u : A.component(1, 0, 0).cardinality().convert_to<std::size_t>(),
                index)
          << q << " " << l;
      // K_2 of a finite field vanishes.
      EXPECT_TRUE(A.component(2, 0, 0).is_zero()) << q << " " << l;
    }
}

TEST(Milnor, IsKoszul) {
  for (const auto& p : corpus::entry("milnor-finite-field").instances) {
    auto A = corpus::build_ring("milnor-finite-field", p);
    EXPECT_TRUE(homcheck::koszul_verdict(A, homcheck::Method::cobar_diagonal, 5).koszul);
    EXPECT_TRUE(quadra::is_quadratic_up_to(A, 5).quadratic);
  }
}

TEST(NonKoszulSearch, MatchesTheGoldenFile) {
  EXPECT_EQ(corpus::document("non-koszul-search", {{"seed", "1"}}), golden("non-koszul-search-seed-1.txt"));
}

TEST(NonKoszulSearch, FailureIsOffDiagonal) {
  auto A = format::parse_ring(golden("non-koszul-search-seed-1.txt"));
  auto cobar = homcheck::koszul_verdict(A, homcheck::Method::cobar_diagonal, 5);
  ASSERT_FALSE(cobar.koszul);
  ASSERT_TRUE(cobar.failure.has_value());
  EXPECT_NE(cobar.failure->n, -cobar.failure->i);
  EXPECT_FALSE(cobar.failure->witness.is_zero());
  EXPECT_FALSE(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 5).koszul);
}

TEST(NonKoszulSearch, RanksMatchDirectExpansion) {
  const std::string text = golden("non-koszul-search-seed-1.txt");
  auto rels = relation_vectors(text, {"x", "y", "z"});
  auto A = format::parse_ring(text);
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(A.component(n, 0, 0).rank(), quotient_dim(3, rels, 2, n)) << n;
}

TEST(NonKoszulSearch, OtherSeedsAlsoFail) {
  for (const char* seed : {"2", "3"}) {
    auto A = corpus::build_ring("non-koszul-search", {{"seed", seed}});
    EXPECT_TRUE(bigring::validate(A).empty());
    EXPECT_FALSE(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 5).koszul) << seed;
  }
}

TEST(CubicGenerator, IsNotQuadratic) {
  auto A = corpus::build_ring("cubic-generator");
  EXPECT_FALSE(quadra::is_quadratic_up_to(A, 5).quadratic);
  EXPECT_EQ(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 5).to_string(),
            expectation(corpus::entry("cubic-generator"), "verdict").value);
}

TEST(CyclicExtension, ShapeAndFlatnessRefusal) {
  for (std::size_t l : {2u, 3u}) {
    auto A = corpus::build_ring("cyclic-extension", {{"l", std::to_string(l)}});
    EXPECT_EQ(A.objects().names(), (std::vector<std::string>{"k", "kG"}));
    EXPECT_EQ(A.component(0, 1, 1).rank(), l);
    EXPECT_EQ(A.component(1, 0, 0).rank(), 1u);
    EXPECT_EQ(total_rank(A, 1), 1u);
    EXPECT_FALSE(bigring::component_is_flat(A, 1, bigring::Side::left));
    EXPECT_FALSE(bigring::component_is_flat(A, 1, bigring::Side::right));
    EXPECT_THROW(homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, 5), PreconditionFailed);
    EXPECT_EQ(matrixcrit::matrix_koszulity_check(A, 2, 3, 2).to_string(), "koszul-up-to-5");
  }
}

// Every "verdict" annotation on a ring entry is reproduced by a checker.
TEST(Annotations, RingVerdictsAreReproduced) {
  for (const auto& e : corpus::list()) {
    if (e.artifact != "ring") continue;
    const std::string want = expectation(e, "verdict").value;
    for (const auto& p : e.instances) {
      auto A = corpus::build_ring(e.name, p);
      const int d = std::min(5, A.max_degree());
      homcheck::KoszulVerdict v;
      try {
        v = homcheck::koszul_verdict(A, homcheck::Method::bar_diagonal, d);
      } catch (const PreconditionFailed&) {
        v = matrixcrit::matrix_koszulity_check(A, 2, 3, 2);
      }
      if (want == "koszul")
        EXPECT_TRUE(v.koszul) << e.name;
      else if (want == "not koszul")
        EXPECT_FALSE(v.koszul) << e.name;
      else
        EXPECT_EQ(v.to_string(), want) << e.name;
    }
  }
}

TEST(Annotations, CategoryValuesAreReproduced) {
  // Twisted Z/3 on Z/3: H^1 = Hom(Z/3, Z/3), counted by enumeration.
  auto tc = std::get<format::TwistCategory>(std::get<format::Category>(corpus::build("twisted")));
  auto S = tc.setup();
  auto E = filtcat::ext1(filtcat::generator(S, 0), filtcat::generator(S, 1));
  std::size_t homs = 0;
  for (Residue x = 0; x < 3; ++x) homs += (3 * x) % 3 == 0;
  EXPECT_EQ(E.module().cardinality(), homs);
  EXPECT_EQ(E.module().to_string(), expectation(corpus::entry("twisted"), "ext1(E0,E1)").value);

  auto fr = std::get<filtcat::FrobeniusSetup>(std::get<format::Category>(corpus::build("frobenius")));
  EXPECT_EQ(filtcat::frobenius_ext1(fr, 0, 2).to_string(), expectation(corpus::entry("frobenius"), "ext1(0,2)").value);

  auto dg = std::get<filtcat::FilteredCoalgebra>(std::get<format::Category>(corpus::build("dual-group")));
  EXPECT_EQ(filtcat::filtered_cobar_ext(dg, 0, 1, 1).to_string(),
            expectation(corpus::entry("dual-group"), "ext1(E0,E1)").value);

  for (std::size_t r = 0; r <= 3; ++r) {
    auto pc = std::get<filtcat::FilteredCoalgebra>(
        std::get<format::Category>(corpus::build("primitive", {{"r", std::to_string(r)}, {"p", "3"}})));
    EXPECT_EQ(filtcat::filtered_cobar_ext(pc, 0, 1, 1).rank(), r);
  }
}
