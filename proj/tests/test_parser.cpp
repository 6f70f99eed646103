#include <catch2/catch_amalgamated.hpp>

#include "condsym/eval.hpp"
#include "condsym/invariance.hpp"
#include "condsym/render.hpp"

using namespace condsym;

namespace {
Expr parse_ok(const std::string& s) {
    auto out = parse_expression(s);
    INFO(s << " -> " << out.message());
    REQUIRE(out.ok());
    return normalize(*out.value);
}
}  // namespace

TEST_CASE("basic expression parsing") {
    Expr e = parse_ok("lam1*V + lam2");
    CHECK(expr_identical(e, normalize(Expr::param("lam1") * e_V() + Expr::param("lam2"))));
}

TEST_CASE("reaction factor of the power family") {
    Expr e = parse_ok("(lam1s*V+lam2s)*(lam3 - V^n)");
    Expr expected = (Expr::param("lam1s") * e_V() + Expr::param("lam2s")) *
                    (Expr::param("lam3") - Expr::pow(e_V(), AffineExponent::symbol(ExpSym::N)));
    CHECK(expr_identical(e, normalize(expected)));
}

TEST_CASE("derivative operator D and subscript sugar agree") {
    Expr a = parse_ok("D(h,x,2) + lam*D(h,x) + (lam2/2)*h - h^2");
    Expr b = parse_ok("h_xx + lam*h_x + (lam2/2)*h - h^2");
    CHECK(expr_identical(a, b));
}

TEST_CASE("operator precedence and associativity") {
    CHECK(expr_identical(parse_ok("-V^2"), normalize(Expr::integer(-1) * e_V() * e_V())));
    CHECK(expr_identical(parse_ok("2^3^1"), Expr::integer(8)));
    CHECK(expr_identical(parse_ok("6/2/3"), Expr::integer(1)));
    CHECK(expr_identical(parse_ok("1 - 2 - 3"), Expr::integer(-4)));
    CHECK(expr_identical(parse_ok("x^(-2)"),
                         normalize(Expr::pow(e_x(), AffineExponent(Rational(-2))))));
}

TEST_CASE("diagnostics carry spans and never panic") {
    auto bad1 = parse_expression("lam1*V + unknownsym");
    CHECK(!bad1.ok());
    REQUIRE(!bad1.diagnostics.empty());
    CHECK(bad1.diagnostics[0].span.start == 9);
    auto bad2 = parse_expression("(V + lam");
    CHECK(!bad2.ok());
    auto bad3 = parse_expression("V^(n*m)");
    CHECK(!bad3.ok());  // non-affine exponent
    auto bad4 = parse_expression("V^(n^2)");
    CHECK(!bad4.ok());
    auto bad5 = parse_expression("3*");
    CHECK(!bad5.ok());
}

TEST_CASE("parse-render round trip up to equality") {
    std::vector<std::string> fixtures = {
        "V^n*Vt - lam*Vx + (lam1s*V+lam2s)*(lam3-V^n)",
        "exp(V)*Vt - lam*Vx + (lam1*V+lam2)*(lam3-exp(V))",
        "6*x^(-2)",
        "f*h + f_t + 2*f*f_x",
        "(lam2s+3*lam*V)*(lam2s*lam*V^3/3 + lam3s*V + lam4s)/(3*lam)",
        "C(V^(1/2))",
        "ln(U)*U - lam3",
    };
    for (const auto& s : fixtures) {
        Expr e = parse_ok(s);
        Expr back = parse_ok(to_text(e));
        INFO(s << " -> " << to_text(e));
        CHECK(equal(e, back));
    }
}

TEST_CASE("equation parsing: canonical V-form") {
    auto out = parse_equation("Vxx = V^n*Vt - lam*Vx + F(V)");
    REQUIRE(out.ok());
    CHECK(expr_identical(out.value->f0, normalize(Expr::pow(e_V(), AffineExponent::symbol(ExpSym::N)))));
    CHECK(expr_identical(out.value->f1, normalize(-Expr::param("lam"))));
    CHECK(expr_identical(out.value->f2, Expr::func("F")));
    CHECK(!out.value->origin.has_value());
}

TEST_CASE("equation parsing: U-form auto-conversion (porous Fisher with Burgers term)") {
    auto out = parse_equation("Ut = D(U*Ux,x) + lam*U*Ux + U*(1-U)");
    REQUIRE(out.ok());
    const EvolutionPDE& pde = *out.value;
    REQUIRE(pde.origin.has_value());
    CHECK(pde.origin->m == Rational(1));
    // V = U^2, n = -1/2: Vxx = V^(-1/2) Vt - lam Vx - 2 C(V^(1/2))
    Expr vhalf = Expr::pow(e_V(), AffineExponent(Rational(1, 2)));
    CHECK(equal(pde.f0, Expr::pow(e_V(), AffineExponent(Rational(-1, 2)))));
    CHECK(equal(pde.f1, -Expr::param("lam")));
    CHECK(equal(pde.f2, normalize(Expr::integer(-2) * vhalf * (Expr::integer(1) - vhalf))));
}

TEST_CASE("equation parsing: exponential family via V = ln U") {
    auto out = parse_equation("Vxx = exp(V)*Vt - lam*Vx + F(V)");
    REQUIRE(out.ok());
    CHECK(expr_identical(out.value->f0, normalize(Expr::exp_(e_V()))));

    auto ulog = parse_equation("Ut = D(U^(-1)*Ux,x) + lam*U^(-1)*Ux + (lam1*ln(U)+lam2)*(U-lam3)");
    REQUIRE(ulog.ok());
    REQUIRE(ulog.value->origin.has_value());
    CHECK(ulog.value->origin->log_substitution);
    CHECK(equal(ulog.value->f0, Expr::exp_(e_V())));
    CHECK(equal(ulog.value->f1, -Expr::param("lam")));
    // F = -C(exp V) = (lam1 V + lam2)(lam3 - exp V)
    Expr expected = (Expr::param("lam1") * e_V() + Expr::param("lam2")) *
                    (Expr::param("lam3") - Expr::exp_(e_V()));
    CHECK(equal(ulog.value->f2, expected));
}

TEST_CASE("equation parsing rejects malformed inputs") {
    CHECK(!parse_equation("Vxx = Vxx + Vt").ok());
    CHECK(!parse_equation("Vxx = Vt*Vt").ok());
    CHECK(!parse_equation("Ut = D(exp(U)*Ux,x) + U").ok());  // non-power diffusivity
    CHECK(!parse_equation("Ut = U*Uxx + 5*Ux^2 + U").ok());  // non-conservative
    CHECK(!parse_equation("Vxx = Vt = Vx").ok());
    CHECK(!parse_equation("Uxx = Ut").ok());
    CHECK(!parse_equation("Ut = D(U^m*Ux,x) + C(U)").ok());  // symbolic m
}

TEST_CASE("operator parsing and normalization") {
    auto op = parse_operator("Q = Dt + (lam1*U + lam2*U^(-m))*DU");
    REQUIRE(op.ok());
    CHECK(op.value->dep == DepSym::U);
    CHECK(op.value->xi.is_zero());
    CHECK(!op.value->multiplier.has_value());

    auto conv = parse_operator("Q = Dt - lam*U^(m+1)*Dx + (lam1*U+lam2*U^(-m))*DU");
    REQUIRE(conv.ok());
    CHECK(equal(conv.value->xi,
                normalize(-Expr::param("lam") *
                          Expr::pow(e_U(), AffineExponent(Rational(1), ExpSym::M, Rational(1))))));

    auto scaled = parse_operator("Q = 2*Dt + 2*f*Dx");
    REQUIRE(scaled.ok());
    REQUIRE(scaled.value->multiplier.has_value());
    CHECK(expr_identical(*scaled.value->multiplier, Expr::integer(2)));
    CHECK(expr_identical(scaled.value->xi, Expr::func("f")));
}

TEST_CASE("operator with a function multiplier on Dt") {
    auto op = parse_operator("Q = (1 + c2*exp(lam1*n*t))*Dt + f*Dx");
    REQUIRE(op.ok());
    REQUIRE(op.value->multiplier.has_value());
    // xi = f / (1 + c2 exp(lam1 n t))
    Expr m = *op.value->multiplier;
    CHECK(equal(op.value->xi * m, Expr::func("f")));
}

TEST_CASE("d_x-led operators are rejected as an unsupported class") {
    auto op = parse_operator("Q = Dx + U*DU");
    CHECK(!op.ok());
    CHECK(op.unsupported);
}

TEST_CASE("operator rejects mixed and nonlinear markers") {
    CHECK(!parse_operator("Q = Dt + U*DU + V*DV").ok());
    CHECK(!parse_operator("Q = Dt + Dx*DU").ok());
    CHECK(!parse_operator("Q = Dt + V").ok());
}

TEST_CASE("parameter list parsing") {
    auto p = parse_params("m=1, lam=1/2, lam2=0.25");
    REQUIRE(p.ok());
    CHECK(p.value->at("m") == Rational(1));
    CHECK(p.value->at("lam") == Rational(1, 2));
    CHECK(p.value->at("lam2") == Rational(1, 4));
    CHECK(!parse_params("bogus=1").ok());
    CHECK(!parse_params("lam=x").ok());
}

TEST_CASE("function binding list parsing") {
    auto b = parse_function_bindings("f=0; g=0; h=lam2/2");
    REQUIRE(b.ok());
    CHECK(b.value->size() == 3);
    CHECK(!parse_function_bindings("zeta=1").ok());
}
