#include <gtest/gtest.h>

#include "koszul/corpus.hpp"
#include "koszul/format.hpp"
#include "support.hpp"

using namespace koszul;
using namespace testing_support;

namespace {

std::size_t error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const format::ParseError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line " + std::to_string(e.line()) + ": ", 0), 0u) << e.what();
    return e.line();
  }
  ADD_FAILURE() << "no parse error";
  return 0;
}

std::size_t ring_error(const std::string& text) {
  return error_line([&] { static_cast<void>(format::parse_ring(text)); });
}

std::size_t category_error(const std::string& text) {
  return error_line([&] { static_cast<void>(format::parse_category(text)); });
}

const std::string exterior_text =
    "koszul-presentation 1\n"
    "# the exterior algebra on two generators\n"
    "modulus 3\n"
    "objects *\n"
    "max-degree 3\n"
    "generator x * *\n"
    "generator y * *\n"
    "relation x*x\n"
    "relation y*y\n"
    "relation x*y + y*x   # anticommute\n";

}  // namespace

TEST(RingFormat, HandBuiltRingsRoundTrip) {
  for (const auto& A : {exterior2(2), exterior2(3), dual_numbers(2, 4), symmetric2(3, 3), dual_numbers(4, 2)}) {
    const std::string text = format::emit_ring(A);
    auto B = format::parse_ring(text);
    EXPECT_TRUE(B == A);
    EXPECT_EQ(format::emit_ring(B), text);
  }
}

TEST(RingFormat, EmitIsCanonical) {
  const std::string text = format::emit_ring(exterior2(3));
  EXPECT_EQ(text.rfind("koszul-ring 1\nmodulus 3\nobjects *\nmax-degree 2\n", 0), 0u);
  EXPECT_NE(text.find("component 1 * * : 3 3"), std::string::npos);
  EXPECT_NE(text.find("unit * : 1"), std::string::npos);
}

TEST(RingFormat, CommentsAndBlankLinesAreIgnored) {
  const std::string text = format::emit_ring(exterior2(2));
  std::string noisy = "# leading comment\n\n";
  for (char c : text) {
    noisy += c;
    if (c == '\n') noisy += "   \n";
  }
  EXPECT_TRUE(format::parse_ring(noisy) == exterior2(2));
}

TEST(PresentationFormat, ExteriorAlgebra) {
  auto doc = format::parse_ring_document(exterior_text);
  ASSERT_TRUE(doc.presentation.has_value());
  EXPECT_EQ(doc.ring.component(1, 0, 0).rank(), 2u);
  EXPECT_EQ(doc.ring.component(2, 0, 0).rank(), 1u);
  EXPECT_EQ(doc.ring.component(3, 0, 0).rank(), 0u);
  EXPECT_TRUE(quadra::is_quadratic_up_to(doc.ring, 3).quadratic);
  // Emitting the closure gives a ring document that parses to the same ring.
  EXPECT_TRUE(format::parse_ring(format::emit_ring(doc.ring)) == doc.ring);
}

TEST(PresentationFormat, CoefficientsAndSeveralObjects) {
  const std::string text =
      "koszul-presentation 1\n"
      "modulus 5\n"
      "objects a b\n"
      "max-degree 3\n"
      "generator f a b\n"
      "generator g b a\n"
      "relation 2 f*g\n"
      "relation g*f + -1 g*f\n";
  auto A = format::parse_ring(text);
  EXPECT_EQ(A.component(1, 0, 1).rank(), 1u);
  EXPECT_EQ(A.component(1, 1, 0).rank(), 1u);
  EXPECT_EQ(A.component(2, 0, 0).rank(), 0u);  // f g killed
  EXPECT_EQ(A.component(2, 1, 1).rank(), 1u);  // the second relation is zero
  EXPECT_EQ(A.component(3, 1, 0).rank(), 0u);  // g f g contains f g
}

TEST(PresentationFormat, ErrorsCarryLineNumbers) {
  auto with = [](const std::string& extra) {
    return "koszul-presentation 1\nmodulus 3\nobjects a b\nmax-degree 3\ngenerator x a b\ngenerator y b a\n" + extra;
  };
  EXPECT_EQ(ring_error(with("relation x*z\n")), 7u);
  EXPECT_EQ(ring_error(with("relation x*x\n")), 7u);
  EXPECT_EQ(ring_error(with("relation x*y + y*x\n")), 7u);
  EXPECT_EQ(ring_error(with("relation x*y +\n")), 7u);
  EXPECT_EQ(ring_error(with("relation x*y*x\n")), 7u);
  EXPECT_EQ(ring_error(with("relation 2\n")), 7u);
  EXPECT_EQ(ring_error(with("generator x a a\n")), 7u);
  EXPECT_EQ(ring_error(with("generator z a c\n")), 7u);
  EXPECT_EQ(ring_error(with("generator w* a b\n")), 7u);
  EXPECT_EQ(ring_error(with("\n\nfrobnicate 1\n")), 9u);
  EXPECT_EQ(ring_error("koszul-presentation 1\nmodulus 3\nobjects a\nmax-degree 0\n"), 4u);
  EXPECT_EQ(ring_error("koszul-presentation 1\nmodulus 1\nobjects a\nmax-degree 2\n"), 2u);
  EXPECT_EQ(ring_error("koszul-presentation 1\nmodulus 3\nmodulus 3\nobjects a\nmax-degree 2\n"), 3u);
}

TEST(RingFormat, ErrorsCarryLineNumbers) {
  const std::string head = "koszul-ring 1\nmodulus 4\nobjects *\nmax-degree 1\n";
  EXPECT_EQ(ring_error(""), 1u);
  EXPECT_EQ(ring_error("koszul-ring 2\n"), 1u);
  EXPECT_EQ(ring_error("koszul-thing 1\n"), 1u);
  EXPECT_EQ(ring_error("koszul-ring 1\nmodulus 4\nobjects *\n"), 3u);
  // Orders must divide the modulus, exceed 1 and be listed canonically.
  EXPECT_EQ(ring_error(head + "component 0 * * : 3\n"), 5u);
  EXPECT_EQ(ring_error(head + "component 0 * * : 1\n"), 5u);
  EXPECT_EQ(ring_error(head + "component 0 * * : 4 2\n"), 5u);
  EXPECT_EQ(ring_error(head + "component 2 * * : 4\n"), 5u);
  EXPECT_EQ(ring_error(head + "component 0 * q : 4\n"), 5u);
  EXPECT_EQ(ring_error(head + "component 0 * * 4\n"), 5u);
  // A product that breaks the unit law.
  try {
    static_cast<void>(format::parse_ring(head + "component 0 * * : 4\nunit * : 1\nmult 0 0 * * * :  0 0 2\n"));
    ADD_FAILURE();
  } catch (const format::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("ring axioms fail"), std::string::npos) << e.what();
  }
}

TEST(RingFormat, CorpusDocumentsRoundTrip) {
  for (const auto& [label, A] : corpus::ring_instances()) {
    const std::string text = format::emit_ring(A);
    EXPECT_TRUE(format::parse_ring(text) == A) << label;
    EXPECT_EQ(format::emit_ring(format::parse_ring(text)), text) << label;
  }
}

TEST(CategoryFormat, KindsRoundTrip) {
  const std::vector<std::string> docs = {
      "koszul-category 1\nkind twisted\nmodulus 3\ngroup cyclic 3\ntwist 1\npiece k trivial\npiece kG regular\n",
      "koszul-category 1\nkind twisted\nmodulus 5\ngroup product 2 2\ntwist 4 1\npiece k trivial\n"
      "piece chi character 4 4\n",
      "koszul-category 1\nkind twisted\nmodulus 2\ngroup trivial\ntwist\npiece k trivial\n",
      "koszul-category 1\nkind frobenius\nvariant split\nq 4\n",
      "koszul-category 1\nkind frobenius\nvariant inverted\nq 2\n",
      "koszul-category 1\nkind frobenius\nvariant integral\nq 3\n",
  };
  for (const auto& d : docs) {
    auto c = format::parse_category(d);
    EXPECT_EQ(format::emit_category(c), d);
    EXPECT_TRUE(format::parse_category(format::emit_category(c)) == c);
  }
}

TEST(CategoryFormat, CoalgebrasAreEmittedExplicitly) {
  for (const auto& d : {"koszul-category 1\nkind dual-group\nmodulus 2\ngroup cyclic 2\n",
                        "koszul-category 1\nkind primitive\nmodulus 3\nrank 2\n"}) {
    auto c = format::parse_category(d);
    const std::string text = format::emit_category(c);
    EXPECT_NE(text.find("kind coalgebra"), std::string::npos);
    EXPECT_TRUE(format::parse_category(text) == c);
    EXPECT_EQ(format::emit_category(format::parse_category(text)), text);
  }
  // Explicit divided-power coalgebra on 1, x: delta(x) = 1 (x) x + x (x) 1.
  const std::string explicit_doc =
      "koszul-category 1\nkind coalgebra\nmodulus 2\ndim 2\n"
      "delta 0 :  0 0 1\ndelta 1 :  0 1 1  1 0 1\ncounit : 1 0\nunit : 1 0\n";
  auto c = format::parse_category(explicit_doc);
  EXPECT_EQ(format::emit_category(c), explicit_doc);
  const auto& C = std::get<filtcat::FilteredCoalgebra>(c);
  EXPECT_EQ(filtcat::filtered_cobar_ext(C, 0, 1, 1).to_string(), "Z/2");
}

TEST(CategoryFormat, ErrorsCarryLineNumbers) {
  EXPECT_EQ(category_error("koszul-ring 1\n"), 1u);
  EXPECT_EQ(category_error("koszul-category 1\nkind wibble\n"), 2u);
  EXPECT_EQ(category_error("koszul-category 1\nkind frobenius\nvariant split\nq 6\n"), 4u);
  EXPECT_EQ(category_error("koszul-category 1\nkind frobenius\nvariant sideways\nq 2\n"), 3u);
  EXPECT_EQ(category_error("koszul-category 1\nkind frobenius\nvariant split\nq 2\nmodulus 2\n"), 5u);
  EXPECT_EQ(category_error("koszul-category 1\nkind twisted\nmodulus 3\ngroup cyclic 3\ntwist 1 1\npiece k trivial\n"),
            5u);
  EXPECT_EQ(category_error("koszul-category 1\nkind twisted\nmodulus 3\ngroup cyclic 3\npiece k wobbly\n"), 5u);
  EXPECT_EQ(category_error("koszul-category 1\nkind twisted\nmodulus 3\ngroup cyclic 3\npiece k trivial\n"
                           "piece k regular\n"),
            6u);
  EXPECT_EQ(category_error("koszul-category 1\nkind twisted\nmodulus 3\ngroup cyclic 100\npiece k trivial\n"), 4u);
  EXPECT_EQ(category_error("koszul-category 1\nkind coalgebra\nmodulus 2\ndim 2\ndelta 0 : 0 0\n"
                           "counit : 1 0\nunit : 1 0\n"),
            5u);
  EXPECT_EQ(category_error("koszul-category 1\nkind coalgebra\nmodulus 2\ndim 2\ndelta 0 : 0 0 1\n"
                           "counit : 1\nunit : 1 0\n"),
            6u);
  // A comultiplication that is not coassociative is refused at the kind line.
  EXPECT_EQ(category_error("koszul-category 1\nkind coalgebra\nmodulus 2\ndim 2\ndelta 0 : 0 0 1\n"
                           "delta 1 : 1 1 1\ncounit : 1 0\nunit : 1 0\n"),
            2u);
}

TEST(CategoryFormat, TwistObjects) {
  auto c = std::get<format::TwistCategory>(format::parse_category(
      "koszul-category 1\nkind twisted\nmodulus 3\ngroup cyclic 3\ntwist 1\npiece k trivial\npiece kG regular\n"));
  auto X = format::parse_twist_object(c, "E1.kG+E0");
  auto Y = filtcat::FilteredGModule::graded(c.setup(), {{1, 1}, {0, 0}});
  EXPECT_TRUE(X == Y);
  EXPECT_TRUE(format::parse_twist_object(c, "E2") == filtcat::generator(c.setup(), 2));
  EXPECT_THROW(format::parse_twist_object(c, "F1"), InvalidInput);
  EXPECT_THROW(format::parse_twist_object(c, "E1.kH"), InvalidInput);
  EXPECT_THROW(format::parse_twist_object(c, "E1+"), InvalidInput);
  EXPECT_THROW(format::parse_twist_object(c, "Ex"), InvalidInput);
}

TEST(CategoryFormat, Levels) {
  EXPECT_EQ(format::parse_level("E2"), 2);
  EXPECT_EQ(format::parse_level("Z(3)"), 3);
  EXPECT_EQ(format::parse_level("0"), 0);
  EXPECT_EQ(format::parse_level("-1"), -1);
  EXPECT_THROW(format::parse_level("Z(2"), InvalidInput);
  EXPECT_THROW(format::parse_level("E"), InvalidInput);
  EXPECT_THROW(format::parse_level("two"), InvalidInput);
}

TEST(MatrixFormat, ProblemAndWitnessRoundTrip) {
  auto A = pad(exterior2(3), 3);
  const std::string text =
      "koszul-matrix 1\n"
      "M 1 deg 1 rows * cols *,* entries (1,0) (0,1)\n"
      "N deg 2 rows *,* cols * entries (1) ; (2)\n";
  auto doc = format::parse_matrix_document(text, A);
  EXPECT_FALSE(doc.witness.has_value());
  EXPECT_EQ(doc.problem.m(), 1u);
  EXPECT_EQ(doc.problem.n(), 2);
  EXPECT_EQ(format::emit_matrix_document(A, doc.problem), text);

  for (auto v : {matrixcrit::Variant::general, matrixcrit::Variant::triangulated}) {
    auto res = matrixcrit::search_witness(A, doc.problem, v);
    ASSERT_TRUE(res.witness.has_value());
    const std::string full = format::emit_matrix_document(A, doc.problem, res.witness);
    auto back = format::parse_matrix_document(full, A);
    ASSERT_TRUE(back.witness.has_value());
    EXPECT_EQ(format::emit_matrix_document(A, back.problem, back.witness), full);
    EXPECT_TRUE(back.problem.N == doc.problem.N);
    EXPECT_TRUE(matrixcrit::verify_witness(A, back.problem, *back.witness).holds);
  }
}

TEST(MatrixFormat, ErrorsCarryLineNumbers) {
  auto A = pad(exterior2(3), 3);
  auto err = [&](const std::string& t) {
    return error_line([&] { static_cast<void>(format::parse_matrix_document(t, A)); });
  };
  const std::string head = "koszul-matrix 1\n";
  EXPECT_EQ(err(head + "M 1 deg 1 rows * cols * entries (1,0)\n"), 2u);  // N missing, reported at the end
  EXPECT_EQ(err(head + "N deg 2 rows * cols * entries (1,0)\n"), 2u);   // wrong coordinate count
  EXPECT_EQ(err(head + "N deg 2 rows * cols q entries (1)\n"), 2u);
  EXPECT_EQ(err(head + "N deg 2 rows *,* cols * entries (1)\n"), 2u);
  EXPECT_EQ(err(head + "N deg 9 rows * cols * entries (1)\n"), 2u);
  EXPECT_EQ(err(head + "N deg 2 rows * cols * entries 1\n"), 2u);
  EXPECT_EQ(err(head + "M 2 deg 1 rows * cols * entries (1,0)\nN deg 1 rows * cols * entries (1,0)\n"), 3u);
  EXPECT_EQ(err(head + "M 1 deg 1 rows * cols * entries (1,0)\nN deg 1 rows * cols * entries (0,1)\n"), 3u);
  EXPECT_EQ(err(head + "N deg 1 rows * cols * entries (1,0)\nvariant sideways\n"), 3u);
  EXPECT_EQ(err(head + "N deg 1 rows * cols * entries (1,0)\nvariant triangulated\nP deg 1 rows * cols * entries (1,0)\n"
                       "Q deg 0 rows * cols * entries (1)\n"),
            4u);
}
