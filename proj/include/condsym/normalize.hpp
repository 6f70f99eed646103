#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "condsym/expr.hpp"

namespace condsym {

/// Canonical polynomial form: sum of monomials over a fixed atom menu.
/// Invariants: factor lists sorted, no zero exponents, no compound atom with a
/// positive integer exponent (those are expanded), no zero coefficients.
namespace detail {

enum class AtomKind : uint8_t { IVar, Dep, Jet, Param, Func, Compound, Log };

struct Atom {
    AtomKind kind;
    IndepVar ivar{};
    DepSym dep{};
    JetSym jet{};
    std::string name;        // Param, Func
    std::vector<int> deriv;  // Func
    std::vector<Expr> args;  // Func (normalized)
    Expr base;               // Compound base / Log argument (normalized)
};

inline int atom_cmp(const Atom& a, const Atom& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    switch (a.kind) {
        case AtomKind::IVar: return a.ivar == b.ivar ? 0 : (a.ivar < b.ivar ? -1 : 1);
        case AtomKind::Dep: return a.dep == b.dep ? 0 : (a.dep < b.dep ? -1 : 1);
        case AtomKind::Jet: return a.jet == b.jet ? 0 : (a.jet < b.jet ? -1 : 1);
        case AtomKind::Param:
            return a.name == b.name ? 0 : (a.name < b.name ? -1 : 1);
        case AtomKind::Func: {
            if (int c = a.name.compare(b.name); c != 0) return c < 0 ? -1 : 1;
            if (a.deriv != b.deriv) return a.deriv < b.deriv ? -1 : 1;
            if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
            for (size_t i = 0; i < a.args.size(); ++i)
                if (int c = expr_cmp(a.args[i], b.args[i]); c != 0) return c;
            return 0;
        }
        case AtomKind::Compound:
        case AtomKind::Log: return expr_cmp(a.base, b.base);
    }
    return 0;
}

inline Expr atom_expr(const Atom& a) {
    switch (a.kind) {
        case AtomKind::IVar: return Expr::ivar(a.ivar);
        case AtomKind::Dep: return Expr::dep(a.dep);
        case AtomKind::Jet: return Expr::jet(a.jet);
        case AtomKind::Param: return Expr::param(a.name);
        case AtomKind::Func: return Expr::func(a.name, a.deriv, a.args);
        case AtomKind::Compound: return a.base;
        case AtomKind::Log: return Expr::ln_(a.base);
    }
    return Expr::integer(0);
}

struct Monomial {
    std::vector<std::pair<Atom, AffineExponent>> factors;  // sorted by atom
    Expr exp_arg;  // argument of an exp(...) factor; invalid when absent

    bool has_exp() const { return exp_arg.valid(); }
};

inline int mono_cmp(const Monomial& a, const Monomial& b) {
    const size_t n = std::min(a.factors.size(), b.factors.size());
    for (size_t i = 0; i < n; ++i) {
        if (int c = atom_cmp(a.factors[i].first, b.factors[i].first); c != 0) return c;
        const auto& ea = a.factors[i].second;
        const auto& eb = b.factors[i].second;
        if (ea != eb) return ea < eb ? -1 : 1;
    }
    if (a.factors.size() != b.factors.size())
        return a.factors.size() < b.factors.size() ? -1 : 1;
    if (a.has_exp() != b.has_exp()) return a.has_exp() ? 1 : -1;
    if (a.has_exp()) return expr_cmp(a.exp_arg, b.exp_arg);
    return 0;
}

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const { return mono_cmp(a, b) < 0; }
};

using Poly = std::map<Monomial, Rational, MonoLess>;

struct NormContext {
    size_t limit = 100000;  // monomial budget per normalization
    void check(size_t size) const {
        if (size > limit)
            throw SizeLimitError("expression exceeds the monomial budget (" +
                                 std::to_string(limit) + ")");
    }
};

Poly to_poly(const Expr& e, NormContext& ctx);
Expr poly_to_expr(const Poly& p);

inline void poly_insert(Poly& p, Monomial m, Rational c, NormContext& ctx) {
    if (c == 0) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(std::move(m), std::move(c));
        ctx.check(p.size());
    } else {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

inline void poly_add_inplace(Poly& dst, const Poly& src, NormContext& ctx) {
    for (const auto& [m, c] : src) poly_insert(dst, m, c, ctx);
}

inline Expr affine_to_expr(const AffineExponent& e) {
    std::vector<Expr> terms;
    if (e.coeff != 0)
        terms.push_back(Expr::rational(e.coeff) * Expr::param(std::string(expsym_name(e.sym))));
    if (e.cst != 0 || terms.empty()) terms.push_back(Expr::rational(e.cst));
    return Expr::sum(std::move(terms));
}

/// Multiply two monomials; merges like atoms. Result may violate the
/// "no positive-integer compound" invariant, fixed by expand_compounds.
inline Monomial mono_mul(const Monomial& a, const Monomial& b, NormContext& ctx) {
    Monomial r;
    r.factors.reserve(a.factors.size() + b.factors.size());
    size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int c = atom_cmp(a.factors[i].first, b.factors[j].first);
        if (c < 0)
            r.factors.push_back(a.factors[i++]);
        else if (c > 0)
            r.factors.push_back(b.factors[j++]);
        else {
            AffineExponent e = a.factors[i].second + b.factors[j].second;
            if (!e.is_zero()) r.factors.emplace_back(a.factors[i].first, e);
            ++i;
            ++j;
        }
    }
    while (i < a.factors.size()) r.factors.push_back(a.factors[i++]);
    while (j < b.factors.size()) r.factors.push_back(b.factors[j++]);
    if (a.has_exp() && b.has_exp()) {
        Poly s = to_poly(a.exp_arg + b.exp_arg, ctx);
        Expr arg = poly_to_expr(s);
        if (!arg.is_zero()) r.exp_arg = arg;
    } else if (a.has_exp()) {
        r.exp_arg = a.exp_arg;
    } else if (b.has_exp()) {
        r.exp_arg = b.exp_arg;
    }
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b, NormContext& ctx);

/// Expand compound atoms raised to positive integer powers.
inline Poly expand_compounds(const Poly& p, NormContext& ctx) {
    bool any = false;
    for (const auto& [m, c] : p)
        for (const auto& [atom, e] : m.factors)
            if (atom.kind == AtomKind::Compound && e.is_integer_constant() && e.cst > 0)
                any = true;
    if (!any) return p;
    Poly out;
    for (const auto& [m, c] : p) {
        Monomial rest;
        rest.exp_arg = m.exp_arg;
        Poly expanded;
        Monomial unit;
        expanded.emplace(unit, Rational(1));
        for (const auto& [atom, e] : m.factors) {
            if (atom.kind == AtomKind::Compound && e.is_integer_constant() && e.cst > 0) {
                Poly base = to_poly(atom.base, ctx);
                long k = rat_to_long(e.cst);
                for (long i = 0; i < k; ++i) expanded = poly_mul(expanded, base, ctx);
            } else {
                rest.factors.emplace_back(atom, e);
            }
        }
        Poly restp;
        restp.emplace(std::move(rest), c);
        Poly term = poly_mul(expanded, restp, ctx);
        poly_add_inplace(out, term, ctx);
    }
    return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b, NormContext& ctx) {
    Poly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b)
            poly_insert(r, mono_mul(ma, mb, ctx), ca * cb, ctx);
    return expand_compounds(r, ctx);
}

inline Poly poly_pow_int(const Poly& a, long k, NormContext& ctx) {
    Poly r;
    Monomial unit;
    r.emplace(unit, Rational(1));
    for (long i = 0; i < k; ++i) r = poly_mul(r, a, ctx);
    return r;
}

inline Poly rational_poly(Rational c) {
    Poly p;
    if (c != 0) p.emplace(Monomial{}, std::move(c));
    return p;
}

inline Poly atom_poly(Atom a, AffineExponent e = AffineExponent(Rational(1))) {
    Poly p;
    Monomial m;
    m.factors.emplace_back(std::move(a), std::move(e));
    p.emplace(std::move(m), Rational(1));
    return p;
}

/// Raise a single monomial to an affine exponent where possible; returns
/// nullopt when the result must be kept as a compound atom.
inline std::optional<std::pair<Monomial, Rational>> mono_pow(const Monomial& m,
                                                             const Rational& coeff,
                                                             const AffineExponent& e,
                                                             NormContext& ctx) {
    Rational new_coeff(1);
    if (e.is_integer_constant()) {
        new_coeff = rat_pow(coeff, rat_to_long(e.cst));
    } else if (coeff == 1) {
        new_coeff = 1;
    } else if (coeff == -1) {
        return std::nullopt;  // (-b)^e with symbolic/fractional e stays atomic
    } else {
        return std::nullopt;
    }
    Monomial r;
    for (const auto& [atom, fe] : m.factors) {
        AffineExponent ne = fe * e;  // throws if both symbolic
        if (!ne.is_zero()) r.factors.emplace_back(atom, ne);
    }
    if (m.has_exp()) {
        Poly s = to_poly(affine_to_expr(e) * m.exp_arg, ctx);
        Expr arg = poly_to_expr(s);
        if (!arg.is_zero()) r.exp_arg = arg;
    }
    return std::make_pair(std::move(r), std::move(new_coeff));
}

inline Poly to_poly(const Expr& e, NormContext& ctx) {
    switch (e.kind()) {
        case NodeKind::Rat: return rational_poly(e.rat());
        case NodeKind::Param: {
            Atom a;
            a.kind = AtomKind::Param;
            a.name = e.node().name;
            return atom_poly(std::move(a));
        }
        case NodeKind::IVar: {
            Atom a;
            a.kind = AtomKind::IVar;
            a.ivar = e.node().ivar;
            return atom_poly(std::move(a));
        }
        case NodeKind::Dep: {
            Atom a;
            a.kind = AtomKind::Dep;
            a.dep = e.node().dep;
            return atom_poly(std::move(a));
        }
        case NodeKind::Jet: {
            Atom a;
            a.kind = AtomKind::Jet;
            a.jet = e.node().jet;
            return atom_poly(std::move(a));
        }
        case NodeKind::Func: {
            Atom a;
            a.kind = AtomKind::Func;
            a.name = e.node().name;
            a.deriv = e.node().deriv;
            for (const auto& arg : e.kids()) a.args.push_back(poly_to_expr(to_poly(arg, ctx)));
            return atom_poly(std::move(a));
        }
        case NodeKind::Sum: {
            Poly r;
            for (const auto& k : e.kids()) poly_add_inplace(r, to_poly(k, ctx), ctx);
            return r;
        }
        case NodeKind::Prod: {
            Poly r = rational_poly(Rational(1));
            for (const auto& k : e.kids()) r = poly_mul(r, to_poly(k, ctx), ctx);
            return r;
        }
        case NodeKind::Exp: {
            Poly a = to_poly(e.kids()[0], ctx);
            Expr arg = poly_to_expr(a);
            if (arg.is_zero()) return rational_poly(Rational(1));
            Monomial m;
            m.exp_arg = arg;
            Poly p;
            p.emplace(std::move(m), Rational(1));
            return p;
        }
        case NodeKind::Ln: {
            Poly a = to_poly(e.kids()[0], ctx);
            Expr arg = poly_to_expr(a);
            if (arg.is_one()) return {};
            if (arg.kind() == NodeKind::Exp) return to_poly(arg.kids()[0], ctx);
            Atom at;
            at.kind = AtomKind::Log;
            at.base = arg;
            return atom_poly(std::move(at));
        }
        case NodeKind::Pow: {
            const AffineExponent& ex = e.node().exponent;
            Poly base = to_poly(e.kids()[0], ctx);
            if (ex.is_zero()) return rational_poly(Rational(1));
            if (base.empty()) {
                if (ex.is_constant() && ex.cst > 0) return {};
                throw std::domain_error("zero base raised to a non-positive or symbolic power");
            }
            if (base.size() == 1) {
                const auto& [m, c] = *base.begin();
                // exp-only monomial: fold the exponent into the argument
                if (auto r = mono_pow(m, c, ex, ctx)) {
                    Poly p;
                    poly_insert(p, std::move(r->first), std::move(r->second), ctx);
                    return expand_compounds(p, ctx);
                }
                Atom a;
                a.kind = AtomKind::Compound;
                a.base = poly_to_expr(base);
                return atom_poly(std::move(a), ex);
            }
            if (ex.is_integer_constant()) {
                long k = rat_to_long(ex.cst);
                if (k > 0) return poly_pow_int(base, k, ctx);
                // negative integer power of a sum: canonical compound atom,
                // leading rational coefficient extracted
                Rational lead = base.begin()->second;
                Poly monic;
                for (const auto& [m, c] : base) monic.emplace(m, c / lead);
                Atom a;
                a.kind = AtomKind::Compound;
                a.base = poly_to_expr(monic);
                Poly p = atom_poly(std::move(a), ex);
                Poly coeffp = rational_poly(rat_pow(lead, k));
                return poly_mul(p, coeffp, ctx);
            }
            Atom a;
            a.kind = AtomKind::Compound;
            a.base = poly_to_expr(base);
            return atom_poly(std::move(a), ex);
        }
    }
    return {};
}

inline Expr poly_to_expr(const Poly& p) {
    if (p.empty()) return Expr::integer(0);
    std::vector<Expr> terms;
    terms.reserve(p.size());
    for (const auto& [m, c] : p) {
        std::vector<Expr> factors;
        if (c != 1 || (m.factors.empty() && !m.has_exp())) factors.push_back(Expr::rational(c));
        for (const auto& [atom, e] : m.factors) {
            Expr ae = atom_expr(atom);
            factors.push_back(e.is_one() ? ae : Expr::pow(ae, e));
        }
        if (m.has_exp()) factors.push_back(Expr::exp_(m.exp_arg));
        terms.push_back(Expr::prod(std::move(factors)));
    }
    return Expr::sum(std::move(terms));
}

/// Collect compound atoms carried with negative integer exponents.
inline std::vector<std::pair<Expr, long>> negative_compounds(const Poly& p) {
    std::vector<std::pair<Expr, long>> out;
    for (const auto& [m, c] : p)
        for (const auto& [atom, e] : m.factors) {
            if (atom.kind != AtomKind::Compound) continue;
            if (!e.is_integer_constant() || e.cst >= 0) continue;
            long need = -rat_to_long(e.cst);
            bool found = false;
            for (auto& [b, k] : out)
                if (expr_identical(b, atom.base)) {
                    k = std::max(k, need);
                    found = true;
                }
            if (!found) out.emplace_back(atom.base, need);
        }
    return out;
}

}  // namespace detail

inline constexpr size_t kDefaultMonomialLimit = 100000;

/// Canonical normal form: expanded, sorted, like terms combined.
inline Expr normalize(const Expr& e, size_t limit = kDefaultMonomialLimit) {
    detail::NormContext ctx{limit};
    return detail::poly_to_expr(detail::to_poly(e, ctx));
}

/// Structural zero test with denominator clearing: multiplies through by
/// compound bases held at negative powers (nonvanishing almost everywhere),
/// which exposes cancellations the factored form hides.
inline bool is_zero(const Expr& e, size_t limit = kDefaultMonomialLimit) {
    detail::NormContext ctx{limit};
    detail::Poly p = detail::to_poly(e, ctx);
    for (int round = 0; round < 8 && !p.empty(); ++round) {
        auto dens = detail::negative_compounds(p);
        if (dens.empty()) break;
        for (const auto& [base, k] : dens) {
            detail::Atom a;
            a.kind = detail::AtomKind::Compound;
            a.base = base;
            detail::Poly mult =
                detail::atom_poly(std::move(a), AffineExponent(Rational(k)));
            p = detail::poly_mul(p, mult, ctx);
        }
    }
    return p.empty();
}

/// Count of monomials in normal form.
inline size_t monomial_count(const Expr& e, size_t limit = kDefaultMonomialLimit) {
    detail::NormContext ctx{limit};
    return detail::to_poly(e, ctx).size();
}

}  // namespace condsym
