#include <catch2/catch_amalgamated.hpp>

#include "condsym/collect.hpp"
#include "condsym/eval.hpp"
#include "condsym/render.hpp"

using namespace condsym;

namespace {

Expr Vp(long a, long b) { return Expr::pow(e_V(), AffineExponent(Rational(a), ExpSym::N, Rational(b))); }
Expr fn(const char* name, std::vector<int> d = {}) { return Expr::func(name, std::move(d)); }

Assumptions generic_ledger() {
    Assumptions as;
    as.exclude("n", Rational(0));
    as.exclude("n", Rational(1));
    as.exclude("n", Rational(-1));
    as.nonzero("lam");
    return as;
}

/// left side of the splitting step for the power family:
/// (2ff_x + f_t + n f g)V^n + n f h V^(n-1) - f_xx + lam f_x + 2 g_x
Expr splitting_input() {
    Expr f = fn("f"), g = fn("g"), h = fn("h");
    Expr fx = fn("f", {0, 1}), ft = fn("f", {1, 0}), fxx = fn("f", {0, 2}), gx = fn("g", {0, 1});
    Expr n = Expr::param("n"), lam = Expr::param("lam");
    return (2 * f * fx + ft + n * f * g) * Vp(1, 0) + n * f * h * Vp(1, -1) - fxx + lam * fx +
           2 * gx;
}

}  // namespace

TEST_CASE("splitting the power-family equation under the full ledger") {
    auto split = collect_powers(splitting_input(), DepSym::V, generic_ledger());
    REQUIRE(split.classes.size() == 3);
    REQUIRE(split.merges.empty());

    std::map<std::string, Expr> by_key;
    for (const auto& c : split.classes) by_key[c.klass.str(DepSym::V)] = c.coefficient;

    Expr f = fn("f"), g = fn("g"), h = fn("h");
    Expr fx = fn("f", {0, 1}), ft = fn("f", {1, 0}), fxx = fn("f", {0, 2}), gx = fn("g", {0, 1});
    Expr n = Expr::param("n"), lam = Expr::param("lam");

    REQUIRE(by_key.count("V^(n)"));
    CHECK(expr_identical(by_key["V^(n)"], normalize(2 * f * fx + ft + n * f * g)));
    REQUIRE(by_key.count("V^(n-1)"));
    CHECK(expr_identical(by_key["V^(n-1)"], normalize(n * f * h)));
    REQUIRE(by_key.count("1"));
    CHECK(expr_identical(by_key["1"], normalize(-fxx + lam * fx + 2 * gx)));
}

TEST_CASE("splitting with n already bound to 1 gives the two-class case") {
    Bindings b;
    b.params.emplace("n", Expr::integer(1));
    Expr input = substitute(splitting_input(), b);
    Assumptions as;
    as.nonzero("lam");
    auto split = collect_powers(input, DepSym::V, as);
    REQUIRE(split.classes.size() == 2);

    Expr f = fn("f"), g = fn("g"), h = fn("h");
    Expr fx = fn("f", {0, 1}), ft = fn("f", {1, 0}), fxx = fn("f", {0, 2}), gx = fn("g", {0, 1});
    Expr lam = Expr::param("lam");
    CHECK(expr_identical(split.classes[0].coefficient, normalize(2 * f * fx + ft + f * g)));
    CHECK(expr_identical(split.classes[1].coefficient,
                         normalize(f * h - fxx + lam * fx + 2 * gx)));
}

TEST_CASE("a weak ledger merges classes it cannot separate and reports it") {
    Assumptions weak;
    weak.exclude("n", Rational(0));  // n != 1 missing: V^(n-1) and V^0 may coincide
    weak.exclude("n", Rational(-1));
    auto split = collect_powers(splitting_input(), DepSym::V, weak);
    CHECK(split.classes.size() == 2);
    REQUIRE(split.merges.size() == 1);
    CHECK(split.merges[0].forced == Rational(1));
    bool any_merged = false;
    for (const auto& c : split.classes) any_merged = any_merged || c.merged;
    CHECK(any_merged);
}

TEST_CASE("exp and V*exp classes split independently of powers") {
    Expr f = fn("f"), g = fn("g"), h = fn("h");
    Expr fx = fn("f", {0, 1}), ft = fn("f", {1, 0}), fxx = fn("f", {0, 2}), gx = fn("g", {0, 1});
    Expr lam = Expr::param("lam");
    Expr eV = Expr::exp_(e_V());
    Expr input = (f * h + ft + 2 * f * fx) * eV + (f * g) * e_V() * eV + lam * fx + 2 * gx - fxx;

    auto split = collect_powers(input, DepSym::V, generic_ledger());
    REQUIRE(split.classes.size() == 3);
    std::map<std::string, Expr> by_key;
    for (const auto& c : split.classes) by_key[c.klass.str(DepSym::V)] = c.coefficient;
    REQUIRE(by_key.count("V*exp(V)"));
    CHECK(expr_identical(by_key["V*exp(V)"], normalize(f * g)));
    REQUIRE(by_key.count("exp(V)"));
    CHECK(expr_identical(by_key["exp(V)"], normalize(f * h + ft + 2 * f * fx)));
    REQUIRE(by_key.count("1"));
    CHECK(expr_identical(by_key["1"], normalize(lam * fx + 2 * gx - fxx)));
}

TEST_CASE("coefficients containing the base signal not-splittable") {
    Expr bad = fn("F") * Vp(1, 0);  // F(V) depends on V
    CHECK_THROWS_AS(collect_powers(bad, DepSym::V, generic_ledger()), SplitError);
}

TEST_CASE("splitting completeness: classes reassemble the input") {
    Expr input = splitting_input();
    auto split = collect_powers(input, DepSym::V, generic_ledger());
    std::vector<Expr> parts;
    for (const auto& c : split.classes) {
        Expr atom = Expr::pow(e_V(), c.klass.power);
        if (c.klass.exp_coeff != 0)
            atom = atom * Expr::exp_(Expr::rational(c.klass.exp_coeff) * e_V());
        parts.push_back(c.coefficient * atom);
    }
    CHECK(is_zero(Expr::sum(parts) - input));
}

TEST_CASE("jet power collection") {
    Expr vx = Expr::jet(JetSym::Vx);
    Expr e = 3 * vx * vx * e_V() + Expr::param("lam") * vx + fn("f");
    auto m = collect_jet_powers(e, JetSym::Vx);
    REQUIRE(m.size() == 3);
    CHECK(expr_identical(m[2], normalize(3 * e_V())));
    CHECK(expr_identical(m[1], Expr::param("lam")));
    CHECK(expr_identical(m[0], fn("f")));
}
