#pragma once

#include "condsym/eval.hpp"
#include "condsym/parser.hpp"

namespace condsym {

/// Canonical evolution equation  V_xx = F0(V)V_t + F1(V)V_x + F2(V).
/// U-form inputs are converted eagerly; the original data is kept as origin.
struct EvolutionPDE {
    Expr f0, f1, f2;
    DepSym dep = DepSym::V;

    struct Origin {
        bool log_substitution = false;  // V = ln U (diffusivity exponent -1)
        Rational m;                     // diffusivity exponent, meaningless when log
        std::string source;             // original input text
    };
    std::optional<Origin> origin;

    /// Residual  V_xx - F0 V_t - F1 V_x - F2  (identically zero on solutions).
    Expr residual() const {
        JetSym vxx = dep == DepSym::V ? JetSym::Vxx : JetSym::Uxx;
        JetSym vt = dep == DepSym::V ? JetSym::Vt : JetSym::Ut;
        JetSym vx = dep == DepSym::V ? JetSym::Vx : JetSym::Ux;
        return Expr::jet(vxx) - f0 * Expr::jet(vt) - f1 * Expr::jet(vx) - f2;
    }
};

/// Normalized operator  Q = d_t + xi d_x + eta d_V  (unit time coefficient).
struct SymmetryOperator {
    Expr xi, eta;
    DepSym dep = DepSym::V;
    std::optional<Expr> multiplier;  // divided-out time coefficient, when not 1
};

/// Operator triple before normalization (tau, xi, eta), tau not identically 0.
struct RawOperator {
    Expr tau, xi, eta;
    DepSym dep = DepSym::V;

    SymmetryOperator normalized() const {
        SymmetryOperator op;
        op.dep = dep;
        if (normalize(tau).is_one()) {
            op.xi = normalize(xi);
            op.eta = normalize(eta);
            return op;
        }
        Expr inv = Expr::pow(tau, AffineExponent(Rational(-1)));
        op.xi = normalize(xi * inv);
        op.eta = normalize(eta * inv);
        op.multiplier = normalize(tau);
        return op;
    }
};

struct DeterminingSystem {
    std::vector<Expr> equations;  // each normalized, nonzero, required == 0
    std::vector<std::string> unknowns;
    Assumptions assumptions;
};

enum class VerdictStatus { ConditionalSymmetry, LieSymmetry, NotASymmetry };

inline std::string_view verdict_name(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::ConditionalSymmetry: return "ConditionalSymmetry";
        case VerdictStatus::LieSymmetry: return "LieSymmetry";
        case VerdictStatus::NotASymmetry: return "NotASymmetry";
    }
    return "?";
}

struct Verdict {
    VerdictStatus status;
    std::optional<Expr> witness;     // nonzero residual coefficient on failure
    std::optional<Expr> multiplier;  // recorded operator normalization factor
};

namespace detail {

inline bool contains_kind(const Expr& e, NodeKind k) {
    if (e.kind() == k) return true;
    for (const auto& c : e.kids())
        if (contains_kind(c, k)) return true;
    return false;
}

inline bool contains_any_jet(const Expr& e) { return contains_kind(e, NodeKind::Jet); }

inline bool contains_symbol_of(const Expr& e, DepSym d) {
    if (e.kind() == NodeKind::Dep && e.node().dep == d) return true;
    if (e.kind() == NodeKind::Jet && jet_dep(e.node().jet) == d) return true;
    for (const auto& c : e.kids())
        if (contains_symbol_of(c, d)) return true;
    return false;
}

inline bool contains_ivar(const Expr& e) { return contains_kind(e, NodeKind::IVar); }

/// Decompose a jet-linear expression: e = c2*Jxx + c0*Jt + c1*Jx + rest.
struct JetDecomposition {
    Expr cxx, ct, cx, cx2, rest;
};

inline JetDecomposition decompose_jets(const Expr& e, DepSym d) {
    JetSym jt = d == DepSym::V ? JetSym::Vt : JetSym::Ut;
    JetSym jx = d == DepSym::V ? JetSym::Vx : JetSym::Ux;
    JetSym jxx = d == DepSym::V ? JetSym::Vxx : JetSym::Uxx;
    JetDecomposition out;
    auto by_xx = collect_jet_powers(e, jxx);
    for (const auto& [deg, coeff] : by_xx)
        if (deg > 1 || deg < 0) throw SplitError("equation is nonlinear in the second jet");
    Expr c2 = by_xx.count(1) ? by_xx[1] : Expr::integer(0);
    Expr low = by_xx.count(0) ? by_xx[0] : Expr::integer(0);
    if (contains_any_jet(c2)) throw SplitError("second-jet coefficient contains jets");
    auto by_t = collect_jet_powers(low, jt);
    for (const auto& [deg, coeff] : by_t)
        if (deg > 1 || deg < 0) throw SplitError("equation is nonlinear in the time jet");
    Expr c0 = by_t.count(1) ? by_t[1] : Expr::integer(0);
    Expr low2 = by_t.count(0) ? by_t[0] : Expr::integer(0);
    if (contains_any_jet(c0)) throw SplitError("time-jet coefficient contains jets");
    auto by_x = collect_jet_powers(low2, jx);
    out.cxx = c2;
    out.ct = c0;
    out.cx = by_x.count(1) ? by_x[1] : Expr::integer(0);
    out.cx2 = by_x.count(2) ? by_x[2] : Expr::integer(0);
    out.rest = by_x.count(0) ? by_x[0] : Expr::integer(0);
    for (const auto& [deg, coeff] : by_x)
        if (deg > 2 || deg < 0) throw SplitError("equation has unexpected gradient powers");
    if (contains_any_jet(out.cx) || contains_any_jet(out.cx2) || contains_any_jet(out.rest))
        throw SplitError("unsupported jet structure");
    return out;
}

}  // namespace detail

/// Parse "Vxx = ..." (canonical form) or "Ut = ..." (auto-converted through
/// V = U^(m+1), or V = ln U when the diffusivity exponent is -1).
inline ParseOutcome<EvolutionPDE> parse_equation(const std::string& text) {
    ParseOutcome<EvolutionPDE> out;
    auto reject = [&](const std::string& msg) {
        out.diagnostics.push_back({{0, text.size()}, msg, ParseDiagnostic::Severity::Error});
        return out;
    };
    auto eq = text.find('=');
    if (eq == std::string::npos || text.find('=', eq + 1) != std::string::npos)
        return reject("equation must contain exactly one '='");
    std::string lhs = detail::trim(text.substr(0, eq));
    auto rhs_out = parse_expression(text.substr(eq + 1));
    if (!rhs_out.ok()) {
        out.diagnostics = rhs_out.diagnostics;
        return out;
    }
    Expr rhs;
    try {
        rhs = normalize(*rhs_out.value);
    } catch (const std::exception& e) {
        return reject(e.what());
    }

    try {
        if (lhs == "Vxx") {
            if (detail::contains_symbol_of(rhs, DepSym::U))
                return reject("canonical form must not mix U symbols");
            if (detail::contains_ivar(rhs))
                return reject("canonical form coefficients must depend on V only");
            auto d = detail::decompose_jets(rhs, DepSym::V);
            if (!d.cxx.is_zero()) return reject("right side must not contain Vxx");
            if (!d.cx2.is_zero()) return reject("right side must be linear in Vx");
            EvolutionPDE pde;
            pde.f0 = d.ct;
            pde.f1 = d.cx;
            pde.f2 = d.rest;
            if (pde.f0.is_zero()) return reject("not an evolution equation: Vt coefficient is 0");
            out.value = std::move(pde);
            return out;
        }
        if (lhs != "Ut") return reject("equation must start with 'Vxx =' or 'Ut ='");

        if (detail::contains_symbol_of(rhs, DepSym::V))
            return reject("U-form must not mix V symbols");
        auto d = detail::decompose_jets(rhs, DepSym::U);
        if (!d.ct.is_zero()) return reject("U-form right side must not contain Ut");
        // diffusivity A(U) = k*U^m from the Uxx coefficient
        Expr a = d.cxx;
        if (a.is_zero()) return reject("not a diffusion equation: no Uxx term");
        detail::NormContext ctx{kDefaultMonomialLimit};
        detail::Poly ap = detail::to_poly(a, ctx);
        if (ap.size() != 1) return reject("U-form requires a power diffusivity k*U^m");
        const auto& [am, ac] = *ap.begin();
        Rational k = ac;
        Rational m(0);
        for (const auto& [atom, ex] : am.factors) {
            if (atom.kind == detail::AtomKind::Dep && atom.dep == DepSym::U) {
                if (!ex.is_constant())
                    return reject("symbolic diffusivity exponent: instantiate m first");
                m = ex.cst;
            } else if (atom.kind == detail::AtomKind::Param) {
                return reject("U-form requires a power diffusivity k*U^m");
            } else {
                return reject("U-form requires a power diffusivity k*U^m");
            }
        }
        // conservative structure: the Ux^2 coefficient must equal dA/dU
        Expr adU = differentiate(a, DepSym::U);
        if (!is_zero(d.cx2 - adU))
            return reject("non-conservative diffusion: Ux^2 coefficient is not dA/dU");

        Expr residual = Expr::jet(JetSym::Ut) - rhs;
        Bindings sub;
        EvolutionPDE::Origin origin;
        origin.source = text;
        if (m == -1) {
            origin.log_substitution = true;
            Expr eV = Expr::exp_(e_V());
            sub.deps[DepSym::U] = eV;
            sub.jets[JetSym::Ut] = eV * Expr::jet(JetSym::Vt);
            sub.jets[JetSym::Ux] = eV * Expr::jet(JetSym::Vx);
            sub.jets[JetSym::Uxx] =
                eV * (Expr::jet(JetSym::Vx) * Expr::jet(JetSym::Vx) + Expr::jet(JetSym::Vxx));
        } else {
            origin.m = m;
            Rational p = Rational(1) / (m + 1);
            Expr Vp = Expr::pow(e_V(), AffineExponent(p));
            Expr Vp1 = Expr::pow(e_V(), AffineExponent(p - 1));
            Expr Vp2 = Expr::pow(e_V(), AffineExponent(p - 2));
            sub.deps[DepSym::U] = Vp;
            sub.jets[JetSym::Ut] = Rational(p) * Vp1 * Expr::jet(JetSym::Vt);
            sub.jets[JetSym::Ux] = Rational(p) * Vp1 * Expr::jet(JetSym::Vx);
            sub.jets[JetSym::Uxx] =
                Rational(p * (p - 1)) * Vp2 * Expr::jet(JetSym::Vx) * Expr::jet(JetSym::Vx) +
                Rational(p) * Vp1 * Expr::jet(JetSym::Vxx);
        }
        Expr vres = substitute(residual, sub);
        auto vd = detail::decompose_jets(vres, DepSym::V);
        if (!vd.cx2.is_zero())
            return reject("conversion failed: residual gradient-squared term did not cancel");
        if (vd.cxx.is_zero()) return reject("conversion failed: no Vxx term");
        if (detail::contains_symbol_of(vd.cxx, DepSym::V) || detail::contains_ivar(vd.cxx))
            return reject("conversion failed: Vxx coefficient not constant");
        Expr inv = Expr::pow(vd.cxx, AffineExponent(Rational(-1)));
        EvolutionPDE pde;
        pde.f0 = normalize(Expr::integer(-1) * vd.ct * inv);
        pde.f1 = normalize(Expr::integer(-1) * vd.cx * inv);
        pde.f2 = normalize(Expr::integer(-1) * vd.rest * inv);
        if (pde.f0.is_zero()) return reject("not an evolution equation");
        pde.origin = std::move(origin);
        out.value = std::move(pde);
        return out;
    } catch (const SplitError& e) {
        return reject(e.what());
    } catch (const std::exception& e) {
        return reject(e.what());
    }
}

/// Parse "Q = Dt + <expr>*Dx + <expr>*DU" (or DV). The time coefficient is
/// normalized to 1; a nonunit multiplier is divided out and recorded.
/// Operators with zero time coefficient name the excluded d_x-led class.
inline ParseOutcome<SymmetryOperator> parse_operator(const std::string& text) {
    ParseOutcome<SymmetryOperator> out;
    auto reject = [&](const std::string& msg, bool unsupported = false) {
        out.diagnostics.push_back({{0, text.size()}, msg, ParseDiagnostic::Severity::Error});
        out.unsupported = unsupported;
        return out;
    };
    std::string body = text;
    if (auto eq = text.find('='); eq != std::string::npos) {
        std::string lhs = detail::trim(text.substr(0, eq));
        if (lhs != "Q") return reject("operator must be written as Q = ...");
        body = text.substr(eq + 1);
    }
    Expr parsed;
    try {
        detail::Parser p(body, /*allow_markers=*/true);
        parsed = p.parse_all();
    } catch (const detail::ParseFail& f) {
        out.diagnostics.push_back(f.diag);
        out.unsupported = f.unsupported;
        return out;
    } catch (const std::exception& e) {
        return reject(e.what());
    }

    try {
        detail::NormContext ctx{kDefaultMonomialLimit};
        detail::Poly p = detail::to_poly(parsed, ctx);
        detail::Poly tau, xi, etaU, etaV;
        for (const auto& [m, c] : p) {
            detail::Monomial rest;
            rest.exp_arg = m.exp_arg;
            int marker = -1;  // 0 tau, 1 xi, 2 etaU, 3 etaV
            for (const auto& [atom, ex] : m.factors) {
                if (atom.kind == detail::AtomKind::Param && !atom.name.empty() &&
                    atom.name[0] == '@') {
                    if (marker != -1 || !ex.is_one())
                        return reject("operator must be linear in Dt, Dx, DU/DV");
                    marker = atom.name == "@Dt"   ? 0
                             : atom.name == "@Dx" ? 1
                             : atom.name == "@DU" ? 2
                                                  : 3;
                    continue;
                }
                rest.factors.emplace_back(atom, ex);
            }
            if (marker == -1) return reject("term without Dt, Dx or DU/DV marker");
            detail::Poly* dst = marker == 0 ? &tau : marker == 1 ? &xi : marker == 2 ? &etaU : &etaV;
            detail::poly_insert(*dst, std::move(rest), c, ctx);
        }
        if (!etaU.empty() && !etaV.empty()) return reject("operator mixes DU and DV");
        RawOperator raw;
        raw.dep = !etaU.empty() ? DepSym::U : DepSym::V;
        raw.tau = detail::poly_to_expr(tau);
        raw.xi = detail::poly_to_expr(xi);
        raw.eta = detail::poly_to_expr(!etaU.empty() ? etaU : etaV);
        if (etaU.empty() && etaV.empty()) {
            // no eta term: infer the space from the coefficients
            if (detail::contains_symbol_of(raw.xi, DepSym::U) ||
                detail::contains_symbol_of(raw.tau, DepSym::U))
                raw.dep = DepSym::U;
            raw.eta = Expr::integer(0);
        }
        if (raw.tau.is_zero())
            return reject("operators led by d_x are outside the verified class", true);
        DepSym other = raw.dep == DepSym::V ? DepSym::U : DepSym::V;
        if (detail::contains_symbol_of(raw.xi, other) ||
            detail::contains_symbol_of(raw.eta, other) ||
            detail::contains_symbol_of(raw.tau, other))
            return reject("operator coefficients mix U and V symbols");
        if (detail::contains_any_jet(raw.xi) || detail::contains_any_jet(raw.eta) ||
            detail::contains_any_jet(raw.tau))
            return reject("operator coefficients must be point functions (no jets)");
        out.value = raw.normalized();
        return out;
    } catch (const std::exception& e) {
        return reject(e.what());
    }
}

}  // namespace condsym
