#pragma once

#include "condsym/pde.hpp"

namespace condsym {

namespace detail {

struct JetSet {
    JetSym t, x, xx, tx, tt;
};

inline JetSet jets_of(DepSym d) {
    if (d == DepSym::U) return {JetSym::Ut, JetSym::Ux, JetSym::Uxx, JetSym::Utx, JetSym::Utt};
    return {JetSym::Vt, JetSym::Vx, JetSym::Vxx, JetSym::Vtx, JetSym::Vtt};
}

/// Leading rational coefficient of a normalized expression.
inline Rational leading_coefficient(const Expr& e) {
    const Expr* lead = &e;
    if (e.kind() == NodeKind::Sum) lead = &e.kids()[0];
    if (lead->kind() == NodeKind::Rat) return lead->rat();
    if (lead->kind() == NodeKind::Prod && !lead->kids().empty() &&
        lead->kids()[0].kind() == NodeKind::Rat)
        return lead->kids()[0].rat();
    return Rational(1);
}

inline Expr sign_canonical(const Expr& e) {
    if (leading_coefficient(e) < 0) return normalize(Expr::integer(-1) * e);
    return e;
}

}  // namespace detail

struct Prolongation {
    Expr eta_t, eta_x, eta_xx;
};

/// Second prolongation coefficients of Q = d_t + xi d_x + eta d_V through
/// total derivatives acting on V(t,x).
inline Prolongation prolong2(const SymmetryOperator& op) {
    auto J = detail::jets_of(op.dep);
    Expr vx = Expr::jet(J.x);
    Expr vxx = Expr::jet(J.xx);
    Expr vtx = Expr::jet(J.tx);
    Expr theta = op.eta - op.xi * vx;

    Expr eta_t = normalize(detail::diff_raw(theta, IndepVar::T) + op.xi * vtx);
    Expr eta_x = normalize(detail::diff_raw(theta, IndepVar::X) + op.xi * vxx);
    Expr eta_xx =
        normalize(detail::diff_raw(eta_x, IndepVar::X) - vxx * detail::diff_raw(op.xi, IndepVar::X));
    return {eta_t, eta_x, eta_xx};
}

/// Conditional-invariance residual: the prolonged operator applied to
/// Delta = V_xx - F0 V_t - F1 V_x - F2, restricted to the joint manifold of
/// the equation, the invariant surface condition and its differential
/// consequences. The result is a polynomial in V_x; it vanishes identically
/// iff the operator is a conditional symmetry.
inline Expr conditional_residual(const EvolutionPDE& pde, const SymmetryOperator& op,
                                 size_t limit = kDefaultMonomialLimit) {
    if (pde.dep != op.dep) throw UnsupportedError("equation and operator use different symbols");
    if (pde.f0.is_zero()) throw UnsupportedError("F0 is identically zero");
    DepSym d = pde.dep;
    auto J = detail::jets_of(d);
    Expr vt = Expr::jet(J.t), vx = Expr::jet(J.x), vxx = Expr::jet(J.xx);

    Prolongation pr = prolong2(op);
    Expr f0d = differentiate(pde.f0, d);
    Expr f1d = differentiate(pde.f1, d);
    Expr f2d = differentiate(pde.f2, d);

    Expr residual = pr.eta_xx - f0d * op.eta * vt - pde.f0 * pr.eta_t - f1d * op.eta * vx -
                    pde.f1 * pr.eta_x - f2d * op.eta;

    // invariant surface condition and its differential consequences
    Expr isc = op.eta - op.xi * vx;
    Bindings s1;
    s1.jets[J.tt] = detail::diff_raw(isc, IndepVar::T);
    residual = substitute(residual, s1, limit);
    Bindings s2;
    s2.jets[J.tx] = detail::diff_raw(isc, IndepVar::X);
    residual = substitute(residual, s2, limit);
    Bindings s3;
    s3.jets[J.t] = isc;
    residual = substitute(residual, s3, limit);
    Bindings s4;
    s4.jets[J.xx] = pde.f0 * isc + pde.f1 * vx + pde.f2;
    residual = substitute(residual, s4, limit);
    return residual;
}

/// Classical (Lie) invariance test. The operator is first rescaled by the
/// common denominator of its coefficients: rational-coefficient operators
/// that are nonconstant multiples of polynomial Lie fields are recognized.
inline bool is_lie_symmetry(const EvolutionPDE& pde, const RawOperator& raw,
                            size_t limit = kDefaultMonomialLimit) {
    if (pde.dep != raw.dep) throw UnsupportedError("equation and operator use different symbols");
    DepSym d = pde.dep;
    auto J = detail::jets_of(d);
    Expr vt = Expr::jet(J.t), vx = Expr::jet(J.x), vxx = Expr::jet(J.xx), vtx = Expr::jet(J.tx);

    // clear denominators: multiply the triple by every compound base held at
    // a negative power
    Expr tau = normalize(raw.tau), xi = normalize(raw.xi), eta = normalize(raw.eta);
    detail::NormContext ctx{limit};
    for (int round = 0; round < 4; ++round) {
        detail::Poly all = detail::to_poly(tau + xi + eta, ctx);
        auto dens = detail::negative_compounds(all);
        if (dens.empty()) break;
        for (const auto& [base, k] : dens) {
            Expr mult = Expr::pow(base, AffineExponent(Rational(k)));
            tau = normalize(tau * mult);
            xi = normalize(xi * mult);
            eta = normalize(eta * mult);
        }
    }

    Expr dt_tau = detail::diff_raw(tau, IndepVar::T), dx_tau = detail::diff_raw(tau, IndepVar::X);
    Expr dt_xi = detail::diff_raw(xi, IndepVar::T), dx_xi = detail::diff_raw(xi, IndepVar::X);
    Expr eta_t = normalize(detail::diff_raw(eta, IndepVar::T) - vt * dt_tau - vx * dt_xi, limit);
    Expr eta_x = normalize(detail::diff_raw(eta, IndepVar::X) - vt * dx_tau - vx * dx_xi, limit);
    Expr eta_xx = normalize(
        detail::diff_raw(eta_x, IndepVar::X) - vtx * dx_tau - vxx * dx_xi, limit);

    Expr f0d = differentiate(pde.f0, d), f1d = differentiate(pde.f1, d),
         f2d = differentiate(pde.f2, d);
    Expr residual = eta_xx - eta * (f0d * vt + f1d * vx + f2d) - pde.f0 * eta_t - pde.f1 * eta_x;
    Bindings s;
    s.jets[J.xx] = pde.f0 * vt + pde.f1 * vx + pde.f2;
    residual = substitute(residual, s, limit);
    return is_zero(residual, limit);
}

inline bool is_lie_symmetry(const EvolutionPDE& pde, const SymmetryOperator& op,
                            size_t limit = kDefaultMonomialLimit) {
    RawOperator raw{Expr::integer(1), op.xi, op.eta, op.dep};
    return is_lie_symmetry(pde, raw, limit);
}

/// Full verdict: conditional residual, refined by the Lie test, with a
/// deterministic witness (lowest-degree nonzero V_x coefficient) on failure.
inline Verdict verify(const EvolutionPDE& pde, const SymmetryOperator& op,
                      const Assumptions& assumptions = {},
                      size_t limit = kDefaultMonomialLimit) {
    Expr residual = conditional_residual(pde, op, limit);
    Verdict v;
    v.multiplier = op.multiplier;
    if (equal(residual, Expr::integer(0), assumptions)) {
        v.status = is_lie_symmetry(pde, op, limit) ? VerdictStatus::LieSymmetry
                                                   : VerdictStatus::ConditionalSymmetry;
        return v;
    }
    v.status = VerdictStatus::NotASymmetry;
    auto J = detail::jets_of(pde.dep);
    auto coeffs = collect_jet_powers(residual, J.x, limit);
    for (const auto& [deg, coeff] : coeffs) {
        if (!is_zero(coeff, limit)) {
            v.witness = coeff;
            break;
        }
    }
    if (!v.witness) v.witness = residual;
    return v;
}

/// If op2 = M * op1 as coefficient triples, returns M; cross-multiplication
/// avoids dividing by components that vanish identically.
inline std::optional<Expr> equivalent_up_to_multiplier(const RawOperator& a, const RawOperator& b,
                                                       size_t limit = kDefaultMonomialLimit) {
    if (a.dep != b.dep) return std::nullopt;
    if (!is_zero(b.tau * a.xi - a.tau * b.xi, limit)) return std::nullopt;
    if (!is_zero(b.tau * a.eta - a.tau * b.eta, limit)) return std::nullopt;
    if (!is_zero(b.xi * a.eta - a.xi * b.eta, limit)) return std::nullopt;
    Expr m = normalize(b.tau * Expr::pow(a.tau, AffineExponent(Rational(-1))), limit);
    if (m.is_zero()) return std::nullopt;
    return m;
}

/// Families of the general equation  V_xx = F0 V_t + F1 V_x + F(V)  whose
/// determining systems the generator reproduces.
enum class Family { PowerPlain, ExpPlain, PowerConvective, ExpConvective };

inline std::optional<Family> family_from_name(std::string_view s) {
    if (s == "power-plain") return Family::PowerPlain;
    if (s == "exp-plain") return Family::ExpPlain;
    if (s == "power-convective") return Family::PowerConvective;
    if (s == "exp-convective") return Family::ExpConvective;
    return std::nullopt;
}

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::PowerPlain: return "power-plain";
        case Family::ExpPlain: return "exp-plain";
        case Family::PowerConvective: return "power-convective";
        case Family::ExpConvective: return "exp-convective";
    }
    return "?";
}

inline EvolutionPDE family_pde(Family f) {
    Expr lam = Expr::param("lam");
    Expr Vn = Expr::pow(e_V(), AffineExponent::symbol(ExpSym::N));
    Expr Vn1 = Expr::pow(e_V(), AffineExponent(Rational(1), ExpSym::N, Rational(1)));
    Expr eV = Expr::exp_(e_V());
    EvolutionPDE pde;
    pde.f2 = Expr::func("F");
    switch (f) {
        case Family::PowerPlain:
            pde.f0 = Vn;
            pde.f1 = -lam;
            break;
        case Family::ExpPlain:
            pde.f0 = eV;
            pde.f1 = -lam;
            break;
        case Family::PowerConvective:
            pde.f0 = Vn;
            pde.f1 = normalize(Expr::integer(-1) * lam * Vn1);
            break;
        case Family::ExpConvective:
            pde.f0 = eV;
            pde.f1 = normalize(Expr::integer(-1) * lam * eV);
            break;
    }
    return pde;
}

/// Determining system for formal xi(t,x,V), eta(t,x,V) and F(V): the
/// conditional residual collected by powers of V_x, degree 3 down to 0,
/// each equation sign-canonicalized.
inline DeterminingSystem generate_determining_system(Family f,
                                                     size_t limit = kDefaultMonomialLimit) {
    EvolutionPDE pde = family_pde(f);
    SymmetryOperator op;
    op.dep = DepSym::V;
    op.xi = Expr::func("xi");
    op.eta = Expr::func("eta");
    Expr residual = conditional_residual(pde, op, limit);
    auto coeffs = collect_jet_powers(residual, JetSym::Vx, limit);
    DeterminingSystem sys;
    sys.unknowns = {"xi", "eta", "F"};
    sys.assumptions.nonzero("lam");
    sys.assumptions.nonzero("n");
    if (f == Family::PowerConvective) sys.assumptions.exclude("n", Rational(-1));
    for (long deg = 3; deg >= 0; --deg) {
        auto it = coeffs.find(deg);
        if (it == coeffs.end() || it->second.is_zero()) continue;
        sys.equations.push_back(detail::sign_canonical(it->second));
    }
    return sys;
}

/// Instantiate a determining system with structured unknowns and split each
/// equation by powers of V. Equations that cannot be split (their
/// coefficients still involve V through F) are kept whole.
inline DeterminingSystem split_determining(const DeterminingSystem& sys, const Bindings& bindings,
                                           const Assumptions& assumptions,
                                           size_t limit = kDefaultMonomialLimit) {
    DeterminingSystem out;
    out.assumptions = assumptions;
    for (const auto& [name, body] : bindings.funcs) out.unknowns.push_back(name);
    if (out.unknowns.empty()) out.unknowns = sys.unknowns;
    for (const Expr& eq : sys.equations) {
        Expr inst = substitute(eq, bindings, limit);
        if (is_zero(inst, limit)) continue;
        try {
            auto split = collect_powers(inst, DepSym::V, assumptions, limit);
            for (const auto& cl : split.classes)
                out.equations.push_back(detail::sign_canonical(normalize(cl.coefficient, limit)));
        } catch (const SplitError&) {
            out.equations.push_back(detail::sign_canonical(inst));
        }
    }
    return out;
}

namespace detail {

/// Quotient mb/ma as a monomial with coefficient, when it is built from
/// parameters only (negative exponents allowed).
inline std::optional<std::pair<Monomial, Rational>> param_quotient(const Monomial& ma,
                                                                   const Rational& ca,
                                                                   const Monomial& mb,
                                                                   const Rational& cb) {
    if (ma.has_exp() != mb.has_exp()) return std::nullopt;
    if (ma.has_exp() && !expr_identical(ma.exp_arg, mb.exp_arg)) return std::nullopt;
    Monomial quot;
    size_t i = 0, j = 0;
    while (i < ma.factors.size() || j < mb.factors.size()) {
        int c;
        if (i >= ma.factors.size())
            c = 1;
        else if (j >= mb.factors.size())
            c = -1;
        else
            c = atom_cmp(ma.factors[i].first, mb.factors[j].first);
        if (c == 0) {
            AffineExponent d = mb.factors[j].second - ma.factors[i].second;
            if (!d.is_zero()) quot.factors.emplace_back(ma.factors[i].first, d);
            ++i, ++j;
        } else if (c < 0) {
            quot.factors.emplace_back(ma.factors[i].first, -ma.factors[i].second);
            ++i;
        } else {
            quot.factors.emplace_back(mb.factors[j].first, mb.factors[j].second);
            ++j;
        }
    }
    for (const auto& [atom, ex] : quot.factors)
        if (atom.kind != AtomKind::Param) return std::nullopt;
    return std::make_pair(std::move(quot), cb / ca);
}

}  // namespace detail

/// Equality up to a nonzero scale: b == mu * a for a monomial mu made of
/// rationals and ledger-nonzero parameters.
inline bool matches_up_to_scale(const Expr& a, const Expr& b, const Assumptions& ledger = {},
                                size_t limit = kDefaultMonomialLimit) {
    detail::NormContext ctx{limit};
    detail::Poly pa = detail::to_poly(a, ctx);
    detail::Poly pb = detail::to_poly(b, ctx);
    if (pa.empty() || pb.empty()) return pa.empty() == pb.empty();
    if (pa.size() != pb.size()) return false;
    const auto& [ma, ca] = *pa.begin();
    for (const auto& [mb, cb] : pb) {
        auto q = detail::param_quotient(ma, ca, mb, cb);
        if (!q) continue;
        bool admissible = true;
        for (const auto& [atom, ex] : q->first.factors)
            if (!ledger.nonzero_known(atom.name)) admissible = false;
        if (!admissible) continue;
        detail::Poly mu;
        mu.emplace(q->first, q->second);
        detail::Poly scaled = detail::poly_mul(pa, mu, ctx);
        if (scaled.size() != pb.size()) continue;
        bool same = true;
        auto it1 = scaled.begin();
        auto it2 = pb.begin();
        for (; it1 != scaled.end() && same; ++it1, ++it2)
            same = detail::mono_cmp(it1->first, it2->first) == 0 && it1->second == it2->second;
        if (same) return true;
    }
    return false;
}

/// System-level fidelity: same number of equations, and some permutation
/// matches equation-by-equation up to nonzero scale.
inline bool systems_match(const std::vector<Expr>& generated, const std::vector<Expr>& expected,
                          const Assumptions& ledger = {}) {
    if (generated.size() != expected.size()) return false;
    std::vector<bool> used(expected.size(), false);
    for (const Expr& g : generated) {
        bool found = false;
        for (size_t i = 0; i < expected.size(); ++i) {
            if (used[i]) continue;
            if (matches_up_to_scale(g, expected[i], ledger) ||
                matches_up_to_scale(expected[i], g, ledger)) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace condsym
