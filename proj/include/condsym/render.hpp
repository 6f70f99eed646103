#pragma once

#include <string>

#include "condsym/expr.hpp"

namespace condsym {

namespace detail {

// precedence: 1 sum, 2 product, 3 power base, 4 atom
inline std::string render_text(const Expr& e, int parent_prec);

inline bool default_args(const Node& n) {
    const FuncSignature* sig = find_function(n.name);
    if (!sig || sig->formals.size() != n.kids.size()) return false;
    for (size_t i = 0; i < n.kids.size(); ++i) {
        const Expr& a = n.kids[i];
        const std::string& f = sig->formals[i];
        if (f == "t" && !(a.kind() == NodeKind::IVar && a.node().ivar == IndepVar::T))
            return false;
        if (f == "x" && !(a.kind() == NodeKind::IVar && a.node().ivar == IndepVar::X))
            return false;
        if (f == "U" && !(a.kind() == NodeKind::Dep && a.node().dep == DepSym::U)) return false;
        if (f == "V" && !(a.kind() == NodeKind::Dep && a.node().dep == DepSym::V)) return false;
    }
    return true;
}

inline std::string func_text(const Node& n) {
    std::string s = n.name;
    const FuncSignature* sig = find_function(n.name);
    bool any = false;
    for (int d : n.deriv) any = any || d > 0;
    if (any) {
        s += "_";
        for (size_t i = 0; i < n.deriv.size(); ++i)
            for (int k = 0; k < n.deriv[i]; ++k) s += sig->formals[i];
    }
    if (!default_args(n)) {
        s += "(";
        for (size_t i = 0; i < n.kids.size(); ++i) {
            if (i) s += ",";
            s += render_text(n.kids[i], 1);
        }
        s += ")";
    }
    return s;
}

inline std::string exponent_text(const AffineExponent& e) {
    if (e.is_constant() && is_integer(e.cst) && e.cst >= 0) return rat_to_string(e.cst);
    if (e.coeff == 1 && e.cst == 0) return std::string(expsym_name(e.sym));
    return "(" + e.str() + ")";
}

inline std::string render_text(const Expr& e, int parent_prec) {
    auto wrap = [&](const std::string& s, int prec) {
        return prec < parent_prec ? "(" + s + ")" : s;
    };
    switch (e.kind()) {
        case NodeKind::Rat: {
            const Rational& r = e.rat();
            std::string s = rat_to_string(r);
            int prec = 4;
            if (!is_integer(r)) prec = 2;
            if (r < 0) prec = 0;  // force parens inside any operation
            return wrap(s, prec);
        }
        case NodeKind::Param: return std::string(e.node().name);
        case NodeKind::IVar: return std::string(ivar_name(e.node().ivar));
        case NodeKind::Dep: return std::string(dep_name(e.node().dep));
        case NodeKind::Jet: return std::string(jet_name(e.node().jet));
        case NodeKind::Func: return func_text(e.node());
        case NodeKind::Sum: {
            std::string s;
            bool first = true;
            for (const auto& k : e.kids()) {
                // pull a leading negative rational out as a minus sign
                bool neg = false;
                Expr term = k;
                if (k.kind() == NodeKind::Rat && k.rat() < 0) {
                    neg = true;
                    term = Expr::rational(-k.rat());
                } else if (k.kind() == NodeKind::Prod && !k.kids().empty() &&
                           k.kids()[0].kind() == NodeKind::Rat && k.kids()[0].rat() < 0) {
                    neg = true;
                    std::vector<Expr> fac = k.kids();
                    Rational r = -fac[0].rat();
                    if (r == 1 && fac.size() > 1)
                        fac.erase(fac.begin());
                    else
                        fac[0] = Expr::rational(r);
                    term = Expr::prod(std::move(fac));
                }
                if (first) {
                    s += (neg ? "-" : "") + render_text(term, 2);
                    first = false;
                } else {
                    s += (neg ? " - " : " + ") + render_text(term, 2);
                }
            }
            return wrap(s, 1);
        }
        case NodeKind::Prod: {
            std::string s;
            bool first = true;
            for (const auto& k : e.kids()) {
                if (!first) s += "*";
                s += render_text(k, 3);
                first = false;
            }
            return wrap(s, 2);
        }
        case NodeKind::Pow: {
            std::string base = render_text(e.kids()[0], 4);
            return wrap(base + "^" + exponent_text(e.node().exponent), 3);
        }
        case NodeKind::Exp: return "exp(" + render_text(e.kids()[0], 1) + ")";
        case NodeKind::Ln: return "ln(" + render_text(e.kids()[0], 1) + ")";
    }
    return "?";
}

inline std::string latex_param(const std::string& p) {
    if (p == "lam") return "\\lambda";
    if (p.rfind("lam", 0) == 0) {
        std::string rest = p.substr(3);
        if (!rest.empty() && rest.back() == 's')
            return "\\lambda_" + rest.substr(0, rest.size() - 1) + "^*";
        return "\\lambda_" + rest;
    }
    if (p == "delta") return "\\delta";
    if (p == "gamma") return "\\gamma";
    if (p == "phi") return "\\varphi";
    if (p.size() == 2 && std::isdigit(static_cast<unsigned char>(p[1])))
        return std::string(1, p[0]) + "_" + p.substr(1);
    return p;
}

inline std::string render_latex(const Expr& e, int parent_prec) {
    auto wrap = [&](const std::string& s, int prec) {
        return prec < parent_prec ? "\\left(" + s + "\\right)" : s;
    };
    switch (e.kind()) {
        case NodeKind::Rat: {
            const Rational& r = e.rat();
            if (is_integer(r)) return wrap(numerator(r).str(), r < 0 ? 0 : 4);
            std::string s = "\\frac{" + numerator(r).str() + "}{" + denominator(r).str() + "}";
            return wrap(s, r < 0 ? 0 : 4);
        }
        case NodeKind::Param: return latex_param(e.node().name);
        case NodeKind::IVar: return std::string(ivar_name(e.node().ivar));
        case NodeKind::Dep: return std::string(dep_name(e.node().dep));
        case NodeKind::Jet: {
            std::string j(jet_name(e.node().jet));
            return j.substr(0, 1) + "_{" + j.substr(1) + "}";
        }
        case NodeKind::Func: {
            const Node& n = e.node();
            std::string s = n.name == "xi"    ? "\\xi"
                            : n.name == "eta" ? "\\eta"
                            : n.name == "phi" ? "\\varphi"
                                              : n.name;
            const FuncSignature* sig = find_function(n.name);
            std::string subs;
            for (size_t i = 0; i < n.deriv.size(); ++i)
                for (int k = 0; k < n.deriv[i]; ++k) subs += sig->formals[i];
            if (!subs.empty()) s += "_{" + subs + "}";
            if (!default_args(n)) {
                s += "\\left(";
                for (size_t i = 0; i < n.kids.size(); ++i) {
                    if (i) s += ",";
                    s += render_latex(n.kids[i], 1);
                }
                s += "\\right)";
            }
            return s;
        }
        case NodeKind::Sum: {
            std::string s;
            bool first = true;
            for (const auto& k : e.kids()) {
                std::string t = render_latex(k, 2);
                if (!first && !t.empty() && t[0] != '-') s += "+";
                s += t;
                first = false;
            }
            return wrap(s, 1);
        }
        case NodeKind::Prod: {
            std::string s;
            for (const auto& k : e.kids()) {
                if (!s.empty()) s += " ";
                s += render_latex(k, 3);
            }
            return wrap(s, 2);
        }
        case NodeKind::Pow:
            return wrap(render_latex(e.kids()[0], 4) + "^{" + e.node().exponent.str() + "}", 3);
        case NodeKind::Exp: return "e^{" + render_latex(e.kids()[0], 1) + "}";
        case NodeKind::Ln: return "\\ln\\left(" + render_latex(e.kids()[0], 1) + "\\right)";
    }
    return "?";
}

}  // namespace detail

/// ASCII rendering in the input grammar; parse(to_text(e)) == e up to equal().
inline std::string to_text(const Expr& e) { return detail::render_text(e, 1); }

inline std::string to_latex(const Expr& e) { return detail::render_latex(e, 1); }

}  // namespace condsym
