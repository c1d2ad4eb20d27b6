#include <random>

#include "catch_amalgamated.hpp"
#include "lieharm/parser.hpp"
#include "random_expr.hpp"

using namespace lieharm;
using K = OperatorExpr::Kind;
using lieharm::testing::random_expr;

namespace {

OperatorExpr gen(GenKind k, int f) { return OperatorExpr::make_gen(k, f); }
OperatorExpr sc(std::int64_t re, std::int64_t im = 0) {
  return OperatorExpr::make_scalar(GaussRational(Rational(re), Rational(im)));
}

}  // namespace

TEST_CASE("parse the worked systems", "[opalg]") {
  const SystemDef s1 = parse_system("group T^1xS3^1\nP1 = dx1 + i*d0_1");
  REQUIRE(s1.ops.size() == 1);
  CHECK(s1.ops[0].name == "P1");
  CHECK(s1.ops[0].expr ==
        OperatorExpr::make_sum({gen(GenKind::Dx, 1), OperatorExpr::make_prod({sc(0, 1), gen(GenKind::D0, 1)})}));

  const SystemDef s3 = parse_system("group S3^1\nP1 = 1*d0_1^2 + i*dplus_1*dminus_1");
  CHECK(s3.ops[0].expr ==
        OperatorExpr::make_sum({OperatorExpr::make_prod({sc(1), OperatorExpr::make_pow(gen(GenKind::D0, 1), 2)}),
                                OperatorExpr::make_prod({sc(0, 1), gen(GenKind::Dplus, 1), gen(GenKind::Dminus, 1)})}));
}

TEST_CASE("parse errors carry positions", "[opalg]") {
  try {
    parse_system("group T^1\nP1 = dx2");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
    CHECK(std::string(e.what()).find("out of range") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_system("group T^1\nP1 = dx1 +"), ParseError);
  CHECK_THROWS_AS(parse_system("group T^1\nP1 = dx1 $ 2"), ParseError);
  CHECK_THROWS_AS(parse_system("group T^1\nP1 = foo"), ParseError);
  CHECK_THROWS_AS(parse_system("group T^1\nP1 = dx1\nP1 = dx1"), ParseError);
  CHECK_THROWS_AS(parse_system("group T^1\n"), ParseError);
  CHECK_THROWS_AS(parse_system("P1 = dx1"), ParseError);
  CHECK_THROWS_AS(parse_system("group T^1\nP1 = sqrt(0)"), ParseError);
  CHECK_THROWS_AS(parse_system("group T^1\nP1 = liouville(1)*dx1"), ParseError);
}

TEST_CASE("literals", "[opalg]") {
  const GroupSpec g(1, 0);
  CHECK(parse_expr("(1+2i)", g) == sc(1, 2));
  CHECK(parse_expr("(0.5-1i)", g) ==
        OperatorExpr::make_scalar(Scalar::exact(GaussRational(Rational(1, 2), Rational(-1)))));
  CHECK(parse_expr("2.5i", g) == OperatorExpr::make_scalar(Scalar::exact(GaussRational(Rational(0), Rational(5, 2)))));
  CHECK(parse_expr("1/3", g) == OperatorExpr::make_scalar(Scalar::exact(GaussRational(Rational(1, 3)))));
  CHECK(parse_expr("sqrt(4)", g) == sc(2));
  CHECK(parse_expr("-dx1", g) == OperatorExpr::make_prod({sc(-1), gen(GenKind::Dx, 1)}));
  CHECK(parse_expr("-3", g) == sc(-3));
  CHECK(parse_expr("2 # trailing comment", g) == sc(2));
  // spaced form is a parenthesized sum, not a literal
  CHECK(parse_expr("(1 + 2i)", g).kind == K::Sum);
}

TEST_CASE("format round trips", "[opalg]") {
  const std::string txt = "group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n";
  const SystemDef s = parse_system(txt);
  CHECK(format_system(s) == txt);
  CHECK(parse_system(format_system(s)) == s);
  CHECK(format_expr(sc(1, 2)) == "(1+2i)");
  const GroupSpec g(0, 1);
  const OperatorExpr nested = OperatorExpr::make_pow(
      OperatorExpr::make_prod({OperatorExpr::make_pow(gen(GenKind::Dplus, 1), 2), gen(GenKind::D0, 1)}), 3);
  CHECK(parse_expr(format_expr(nested), g) == nested);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    const GroupSpec gg(1 + t % 2, 1 + t % 3);
    const OperatorExpr e = random_expr(rng, gg, 3);
    INFO(format_expr(e));
    CHECK(parse_expr(format_expr(e), gg) == e);
  }
}

TEST_CASE("normalize", "[opalg]") {
  const OperatorExpr d3 = normalize(gen(GenKind::D3, 1));
  CHECK(d3 == OperatorExpr::make_prod({sc(0, -1), gen(GenKind::D0, 1)}));
  const GaussRational mhi(Rational(0), Rational(-1, 2));
  CHECK(normalize(gen(GenKind::D1, 2)) ==
        OperatorExpr::make_sum({OperatorExpr::make_prod({OperatorExpr::make_scalar(mhi), gen(GenKind::Dplus, 2)}),
                                OperatorExpr::make_prod({OperatorExpr::make_scalar(mhi), gen(GenKind::Dminus, 2)})}));
  const OperatorExpr already = parse_expr("dx1 + i*d0_1", GroupSpec(1, 1));
  CHECK(normalize(already) == already);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const GroupSpec g(1, 1);
    const OperatorExpr e = random_expr(rng, g, 3);
    const OperatorExpr n = normalize(e);
    CHECK(is_normal(n));
    CHECK(normalize(n) == n);
    if (e.is_exact()) CHECK(n.is_exact());
  }
}
