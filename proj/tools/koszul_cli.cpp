#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "koszul/corpus.hpp"
#include "koszul/matrixcrit.hpp"

using namespace koszul;

namespace {

// Exit statuses.
constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRefused = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Prefixes parse diagnostics with the file they came from.
template <class F>
auto from_file(const std::string& path, F&& parse) -> decltype(parse(std::string{})) {
  const std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const format::ParseError& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

bigring::BigGradedRing load_ring(const std::string& path) {
  return from_file(path, [](const std::string& t) { return format::parse_ring(t); });
}

std::uint64_t budget(std::uint64_t fallback) {
  const char* env = std::getenv("KOSZUL_BUDGET");
  if (!env || !*env) return fallback;
  const std::string s(env);
  if (s.find_first_not_of("0123456789") != std::string::npos || s.size() > 18)
    throw InvalidInput("KOSZUL_BUDGET must be a positive integer, found '" + s + "'");
  const auto v = std::stoull(s);
  if (v == 0) throw InvalidInput("KOSZUL_BUDGET must be a positive integer");
  return v;
}

homcheck::Method method_of(const std::string& s) {
  if (s == "cobar") return homcheck::Method::cobar_diagonal;
  if (s == "bar") return homcheck::Method::bar_diagonal;
  return homcheck::parse_method(s);
}

matrixcrit::MatrixBounds bounds_of(const std::string& s) {
  std::vector<long long> v;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) {
    if (!format::detail::is_int(part)) throw InvalidInput("--bounds expects m,n,size; found '" + s + "'");
    v.push_back(std::stoll(part));
  }
  if (v.size() != 3 || v[0] < 0 || v[1] < 2 || v[2] < 1 || v[0] > 8 || v[1] > 16 || v[2] > 8)
    throw InvalidInput("--bounds expects m,n,size with 0 <= m <= 8, 2 <= n <= 16, 1 <= size <= 8");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<std::size_t>(v[2])};
}

void print_table(const homcheck::BigradedHomologyTable& T) {
  std::cout << "# n i homology position\n";
  for (const auto& [key, M] : T.entries())
    if (!M.is_zero())
      std::cout << key.first << ' ' << key.second << ' ' << M.to_string() << ' '
                << (T.on_diagonal(key.first, key.second) ? "diagonal" : "off-diagonal") << '\n';
  std::cout << "# window |i| <= " << T.max_weight() << "\n";
}

void print_verdict(const bigring::BigGradedRing& A, const homcheck::KoszulVerdict& v) {
  std::cout << "verdict " << v.to_string() << '\n'
            << "method " << homcheck::method_name(v.method) << '\n'
            << "checked-up-to " << v.checked_up_to << '\n'
            << "koszul " << (v.koszul ? "yes" : "no") << '\n'
            << "inconclusive " << (v.inconclusive ? "yes" : "no") << '\n';
  if (v.failure) {
    const auto& f = *v.failure;
    std::cout << "failure-bidegree " << f.n << ' ' << f.i << '\n';
    if (!f.witness.is_zero())
      std::cout << "failure-homology " << f.witness.to_string() << " at " << A.objects().name(f.s) << ' '
                << A.objects().name(f.t) << '\n';
    if (!f.detail.empty()) std::cout << "failure-detail " << f.detail << '\n';
  }
  if (!v.detail.empty()) std::cout << "detail " << v.detail << '\n';
}

struct CheckArgs {
  std::string file, method = "cobar", side = "left", bounds = "2,3,2";
  int max_degree = -1;
};

void cmd_check(const CheckArgs& a) {
  const auto A = load_ring(a.file);
  const auto method = method_of(a.method);
  const int d = a.max_degree < 0 ? A.max_degree() : a.max_degree;
  std::cout << "ring " << a.file << "\nmethod " << homcheck::method_name(method) << "\nmax-degree " << d << '\n';
  if (method == homcheck::Method::matrix) {
    const auto b = bounds_of(a.bounds);
    matrixcrit::MatrixOptions opt;
    opt.max_steps = budget(opt.max_steps);
    auto A2 = A;
    if (d < A.max_degree()) A2 = A.truncated(d);
    const auto rep = matrixcrit::matrix_check(A2, b, opt);
    std::cout << "bounds " << b.m_max << ',' << b.n_max << ',' << b.size_bound << '\n'
              << "problems " << rep.problems << "\nsearched " << rep.searched << '\n';
    if (rep.verdict.inconclusive) throw BudgetExceeded(rep.verdict.detail);
    print_verdict(A2, rep.verdict);
    if (rep.offending) std::cout << "\n# offending chain problem\n" << format::emit_matrix_document(A2, *rep.offending);
    return;
  }
  homcheck::VerdictOptions opt;
  if (a.side != "left" && a.side != "right") throw InvalidInput("--side expects left or right");
  opt.koszul_side = a.side == "left" ? bigring::Side::left : bigring::Side::right;
  const auto rep = homcheck::koszul_report(A, method, d, opt);
  if (rep.table) print_table(*rep.table);
  print_verdict(A, rep.verdict);
}

void cmd_dual(const std::string& file, int d) {
  const auto A = load_ring(file);
  if (A.max_degree() < 2) throw InvalidInput("the ring must be given up to degree 2 at least");
  const auto C = quadra::quadratic_dual_coring(quadra::relations_of(A), d);
  const auto& objs = A.objects();
  std::cout << "# n s t component\n";
  std::vector<std::size_t> ranks;
  for (int n = 0; n <= d; ++n) {
    std::size_t r = 0;
    for (std::size_t s = 0; s < objs.size(); ++s)
      for (std::size_t t = 0; t < objs.size(); ++t) {
        const auto& M = C.component(n).component(s, t);
        r += M.rank();
        if (!M.is_zero()) std::cout << n << ' ' << objs.name(s) << ' ' << objs.name(t) << ' ' << M.to_string() << '\n';
      }
    ranks.push_back(r);
  }
  std::cout << "ranks";
  for (auto r : ranks) std::cout << ' ' << r;
  std::cout << '\n';
}

void cmd_quadratic_part(const std::string& file, int d) {
  const auto A = load_ring(file);
  const auto q = quadra::is_quadratic_up_to(A, std::min(d, A.max_degree()));
  std::cout << "# " << (q.quadratic ? "the ring is quadratic up to degree " + std::to_string(q.checked_up_to)
                                    : "not quadratic: " + q.detail)
            << '\n'
            << format::emit_ring(quadra::quadratic_part(A, d).ring());
}

void cmd_cobar(const std::string& file, int d) {
  const auto A = load_ring(file);
  const auto C = quadra::quadratic_dual_coring(quadra::relations_of(A), d);
  print_table(homcheck::homology_table(homcheck::cobar_complex(C, d)));
}

void cmd_ext(const std::string& file, const std::string& x, const std::string& y, int n) {
  const auto cat = from_file(file, [](const std::string& t) { return format::parse_category(t); });
  std::string value;
  if (n < 0) throw InvalidInput("--n must be nonnegative");
  if (auto* t = std::get_if<format::TwistCategory>(&cat)) {
    const auto X = format::parse_twist_object(*t, x), Y = format::parse_twist_object(*t, y);
    if (n == 0)
      value = filtcat::ext0(X, Y).module.to_string();
    else if (n == 1)
      value = filtcat::ext1(X, Y).module().to_string();
    else
      throw Unsupported("Ext^n in a twist category is computed for n = 0, 1 only");
  } else if (auto* fr = std::get_if<filtcat::FrobeniusSetup>(&cat)) {
    const int i = format::parse_level(x), j = format::parse_level(y);
    if (n == 0)
      value = filtcat::frobenius_ext0(*fr, i, j).to_string();
    else if (n == 1)
      value = filtcat::frobenius_ext1(*fr, i, j).to_string();
    else
      throw Unsupported("Ext^n in a Frobenius category is computed for n = 0, 1 only");
  } else {
    const auto& C = std::get<filtcat::FilteredCoalgebra>(cat);
    value = filtcat::filtered_cobar_ext(C, format::parse_level(x), format::parse_level(y), n).to_string();
  }
  std::cout << "ext " << n << ' ' << x << ' ' << y << ' ' << value << '\n';
}

void cmd_matrix_verify(const std::string& ring, const std::string& problem, const std::string& witness) {
  const auto A = load_ring(ring);
  std::string text = read_file(problem);
  if (!witness.empty()) text += read_file(witness);
  format::MatrixDocument doc;
  try {
    doc = format::parse_matrix_document(text, A);
  } catch (const format::ParseError& e) {
    throw InvalidInput(problem + ": " + e.what());
  }
  if (!doc.witness) throw InvalidInput(problem + ": no witness to verify");
  const auto r = matrixcrit::verify_witness(A, doc.problem, *doc.witness);
  std::cout << "witness " << (r.holds ? "holds" : "fails") << '\n';
  if (!r.holds) std::cout << "failed-equation " << r.failed << '\n';
}

void cmd_matrix_search(const std::string& ring, const std::string& problem, const std::string& variant,
                       std::size_t size_bound) {
  const auto A = load_ring(ring);
  const auto doc = from_file(problem, [&](const std::string& t) { return format::parse_matrix_document(t, A); });
  if (variant != "general" && variant != "triangulated") throw InvalidInput("--variant expects general or triangulated");
  matrixcrit::SearchOptions opt;
  opt.size_bound = size_bound;
  opt.max_steps = budget(opt.max_steps);
  const auto res = matrixcrit::search_witness(
      A, doc.problem, variant == "general" ? matrixcrit::Variant::general : matrixcrit::Variant::triangulated, opt);
  std::cout << "# " << res.certificate() << '\n';
  if (res.witness) std::cout << format::emit_matrix_document(A, doc.problem, res.witness);
}

void cmd_corpus_list() {
  for (const auto& e : corpus::list()) {
    std::cout << e.name << " (" << e.artifact << "): " << e.summary << '\n';
    for (const auto& p : e.params)
      std::cout << "  param " << p.name << " = " << (p.fallback.empty() ? "<required>" : p.fallback) << "  ["
                << p.range << "]\n";
    for (const auto& x : e.expected)
      std::cout << "  expect " << x.property << ": " << x.value << "  [" << x.source << "] " << x.note << '\n';
  }
}

void cmd_corpus_get(const std::string& name, const std::vector<std::string>& kv, const std::string& seed) {
  corpus::Params p;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidInput("--param expects key=value, found '" + s + "'");
    p[s.substr(0, eq)] = s.substr(eq + 1);
  }
  const auto& e = corpus::entry(name);
  const bool randomized = std::any_of(e.params.begin(), e.params.end(), [](const auto& d) { return d.name == "seed"; });
  if (!seed.empty()) {
    if (!randomized) throw InvalidInput("corpus entry '" + name + "' takes no seed");
    p["seed"] = seed;
  }
  if (randomized && !p.count("seed")) throw InvalidInput("corpus entry '" + name + "' is randomized and needs --seed");
  std::cout << corpus::document(name, p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koszulity checks for graded big rings over Z/m"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c_check = app.add_subcommand("check", "decide Koszulity of a ring up to a degree");
  c_check->add_option("file", check.file, "ring or presentation document")->required();
  c_check->add_option("--method", check.method, "cobar, bar, koszul-complex, lattice or matrix")
      ->capture_default_str();
  c_check->add_option("--max-degree,-d", check.max_degree, "degree window (default: the ring's truncation)");
  c_check->add_option("--bounds", check.bounds, "matrix sweep bounds m,n,size")->capture_default_str();
  c_check->add_option("--side", check.side, "side of the Koszul complex: left or right")->capture_default_str();

  std::string file, x, y;
  int degree = 4, n = 1;
  auto* c_dual = app.add_subcommand("dual", "quadratic dual coring of the quadratic part");
  c_dual->add_option("file", file)->required();
  c_dual->add_option("--max-degree,-d", degree)->capture_default_str();

  auto* c_quad = app.add_subcommand("quadratic-part", "quadratic part of a ring, as a ring document");
  c_quad->add_option("file", file)->required();
  c_quad->add_option("degree", degree)->required();

  auto* c_cobar = app.add_subcommand("cobar", "cobar cohomology of the quadratic dual coring");
  c_cobar->add_option("file", file)->required();
  c_cobar->add_option("degree", degree)->required();

  auto* c_ext = app.add_subcommand("ext", "Ext^n(X, Y) in a category document");
  c_ext->add_option("file", file)->required();
  c_ext->add_option("X", x, "object: E1.kG+E0 in twist categories, a level such as 2 or Z(2) otherwise")->required();
  c_ext->add_option("Y", y)->required();
  c_ext->add_option("--n", n)->capture_default_str();

  std::string ring, problem, witness, variant = "general";
  std::size_t size_bound = 0;
  auto* c_matrix = app.add_subcommand("matrix", "colored matrix problems");
  c_matrix->require_subcommand(1);
  auto* c_verify = c_matrix->add_subcommand("verify", "replay a factorization witness");
  c_verify->add_option("ring", ring)->required();
  c_verify->add_option("problem", problem, "matrix document, optionally with a witness")->required();
  c_verify->add_option("witness", witness, "separate witness block");
  auto* c_search = c_matrix->add_subcommand("search", "bounded search for a factorization witness");
  c_search->add_option("ring", ring)->required();
  c_search->add_option("problem", problem)->required();
  c_search->add_option("--variant", variant)->capture_default_str();
  c_search->add_option("--size-bound", size_bound, "inner witness dimensions; 0 for none")->capture_default_str();

  std::string name, seed;
  std::vector<std::string> params;
  auto* c_corpus = app.add_subcommand("corpus", "built-in examples");
  c_corpus->require_subcommand(1);
  auto* c_list = c_corpus->add_subcommand("list", "catalog with annotations");
  auto* c_get = c_corpus->add_subcommand("get", "print the document of an entry");
  c_get->add_option("name", name)->required();
  c_get->add_option("--param,-p", params, "key=value");
  c_get->add_option("--seed", seed, "seed of a randomized entry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*c_check)
      cmd_check(check);
    else if (*c_dual)
      cmd_dual(file, degree);
    else if (*c_quad)
      cmd_quadratic_part(file, degree);
    else if (*c_cobar)
      cmd_cobar(file, degree);
    else if (*c_ext)
      cmd_ext(file, x, y, n);
    else if (*c_verify)
      cmd_matrix_verify(ring, problem, witness);
    else if (*c_search)
      cmd_matrix_search(ring, problem, variant, size_bound);
    else if (*c_list)
      cmd_corpus_list();
    else if (*c_get)
      cmd_corpus_get(name, params, seed);
  } catch (const InvalidInput& e) {
    std::cout.flush();
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const PreconditionFailed& e) {
    std::cout.flush();
    std::cerr << "refused: " << e.what() << '\n';
    return kRefused;
  } catch (const BudgetExceeded& e) {
    std::cout.flush();
    std::cerr << "refused: budget exceeded: " << e.what() << '\n';
    return kRefused;
  } catch (const Unsupported& e) {
    std::cout.flush();
    std::cerr << "refused: unsupported: " << e.what() << '\n';
    return kRefused;
  }
  return kOk;
}
