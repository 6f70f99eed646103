#pragma once

#include <functional>
#include <map>
#include <set>
#include <variant>

#include "condsym/normalize.hpp"

namespace condsym {

struct SubstError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Differentiation target: total derivative for independent variables
/// (dependent symbols chain into jets), partial derivative in jet space for
/// dependent symbols and jet coordinates.
using DiffVar = std::variant<IndepVar, DepSym, JetSym>;

namespace detail {

inline Expr diff_raw(const Expr& e, const DiffVar& v);

inline Expr diff_atom_ivar(const Expr& e, IndepVar v) {
    switch (e.kind()) {
        case NodeKind::IVar: return e.node().ivar == v ? Expr::integer(1) : Expr::integer(0);
        case NodeKind::Dep: return Expr::jet(dep_jet(e.node().dep, v));
        case NodeKind::Jet: return Expr::jet(jet_raise(e.node().jet, v));
        default: return Expr::integer(0);
    }
}

inline Expr diff_atom_jetspace(const Expr& e, const DiffVar& v) {
    if (e.kind() == NodeKind::Dep && std::holds_alternative<DepSym>(v))
        return e.node().dep == std::get<DepSym>(v) ? Expr::integer(1) : Expr::integer(0);
    if (e.kind() == NodeKind::Jet && std::holds_alternative<JetSym>(v))
        return e.node().jet == std::get<JetSym>(v) ? Expr::integer(1) : Expr::integer(0);
    return Expr::integer(0);
}

inline Expr diff_raw(const Expr& e, const DiffVar& v) {
    switch (e.kind()) {
        case NodeKind::Rat:
        case NodeKind::Param: return Expr::integer(0);
        case NodeKind::IVar:
        case NodeKind::Dep:
        case NodeKind::Jet:
            if (std::holds_alternative<IndepVar>(v))
                return diff_atom_ivar(e, std::get<IndepVar>(v));
            return diff_atom_jetspace(e, v);
        case NodeKind::Func: {
            const Node& n = e.node();
            std::vector<Expr> terms;
            for (size_t i = 0; i < n.kids.size(); ++i) {
                Expr darg = diff_raw(n.kids[i], v);
                if (darg.is_zero()) continue;
                std::vector<int> d = n.deriv;
                d[i] += 1;
                terms.push_back(Expr::func(n.name, std::move(d), n.kids) * darg);
            }
            return Expr::sum(std::move(terms));
        }
        case NodeKind::Sum: {
            std::vector<Expr> terms;
            for (const auto& k : e.kids()) terms.push_back(diff_raw(k, v));
            return Expr::sum(std::move(terms));
        }
        case NodeKind::Prod: {
            std::vector<Expr> terms;
            const auto& ks = e.kids();
            for (size_t i = 0; i < ks.size(); ++i) {
                Expr d = diff_raw(ks[i], v);
                if (d.is_zero()) continue;
                std::vector<Expr> fac;
                for (size_t j = 0; j < ks.size(); ++j) fac.push_back(j == i ? d : ks[j]);
                terms.push_back(Expr::prod(std::move(fac)));
            }
            return Expr::sum(std::move(terms));
        }
        case NodeKind::Pow: {
            const AffineExponent& ex = e.node().exponent;
            Expr db = diff_raw(e.kids()[0], v);
            if (db.is_zero()) return Expr::integer(0);
            return detail::affine_to_expr(ex) *
                   Expr::pow(e.kids()[0], ex - AffineExponent(Rational(1))) * db;
        }
        case NodeKind::Exp: {
            Expr da = diff_raw(e.kids()[0], v);
            if (da.is_zero()) return Expr::integer(0);
            return e * da;
        }
        case NodeKind::Ln: {
            Expr da = diff_raw(e.kids()[0], v);
            if (da.is_zero()) return Expr::integer(0);
            return Expr::pow(e.kids()[0], AffineExponent(Rational(-1))) * da;
        }
    }
    return Expr::integer(0);
}

}  // namespace detail

/// Exact derivative; result is normalized.
inline Expr differentiate(const Expr& e, const DiffVar& v,
                          size_t limit = kDefaultMonomialLimit) {
    return normalize(detail::diff_raw(e, v), limit);
}

inline Expr differentiate(const Expr& e, IndepVar v) { return differentiate(e, DiffVar(v)); }
inline Expr differentiate(const Expr& e, DepSym v) { return differentiate(e, DiffVar(v)); }
inline Expr differentiate(const Expr& e, JetSym v) { return differentiate(e, DiffVar(v)); }

/// Simultaneous substitution bindings. Applied in a single pass: replacement
/// bodies are inserted as written and are not themselves rewritten.
struct Bindings {
    std::map<std::string, Expr> params;
    std::map<IndepVar, Expr> ivars;
    std::map<DepSym, Expr> deps;
    std::map<JetSym, Expr> jets;
    std::map<std::string, Expr> funcs;  // body written in the declared formals

    bool empty() const {
        return params.empty() && ivars.empty() && deps.empty() && jets.empty() && funcs.empty();
    }
};

namespace detail {

inline void collect_keys(const Expr& e, std::set<std::string>& out) {
    switch (e.kind()) {
        case NodeKind::Param: out.insert(e.node().name); break;
        case NodeKind::IVar: out.insert(std::string(ivar_name(e.node().ivar))); break;
        case NodeKind::Dep: out.insert(std::string(dep_name(e.node().dep))); break;
        case NodeKind::Jet: out.insert(std::string(jet_name(e.node().jet))); break;
        case NodeKind::Func: out.insert(e.node().name); break;
        default: break;
    }
    if (e.kind() == NodeKind::Pow && !e.node().exponent.is_constant())
        out.insert(std::string(expsym_name(e.node().exponent.sym)));
    for (const auto& k : e.kids()) collect_keys(k, out);
}

inline std::optional<AffineExponent> as_affine(const Expr& e) {
    NormContext ctx{1000};
    Poly p;
    try {
        p = to_poly(e, ctx);
    } catch (...) {
        return std::nullopt;
    }
    AffineExponent r{Rational(0)};
    bool have_sym = false;
    for (const auto& [m, c] : p) {
        if (m.has_exp()) return std::nullopt;
        if (m.factors.empty()) {
            r.cst += c;
            continue;
        }
        if (m.factors.size() != 1) return std::nullopt;
        const auto& [atom, ex] = m.factors[0];
        if (atom.kind != AtomKind::Param || !ex.is_one()) return std::nullopt;
        auto s = expsym_of_param(atom.name);
        if (!s) return std::nullopt;
        if (have_sym && r.sym != *s) return std::nullopt;
        r.sym = *s;
        r.coeff += c;
        have_sym = true;
    }
    r.canonicalize();
    return r;
}

struct Substituter {
    const Bindings& b;

    Expr apply(const Expr& e) const {
        switch (e.kind()) {
            case NodeKind::Rat: return e;
            case NodeKind::Param: {
                auto it = b.params.find(e.node().name);
                return it != b.params.end() ? it->second : e;
            }
            case NodeKind::IVar: {
                auto it = b.ivars.find(e.node().ivar);
                return it != b.ivars.end() ? it->second : e;
            }
            case NodeKind::Dep: {
                auto it = b.deps.find(e.node().dep);
                return it != b.deps.end() ? it->second : e;
            }
            case NodeKind::Jet: {
                auto it = b.jets.find(e.node().jet);
                return it != b.jets.end() ? it->second : e;
            }
            case NodeKind::Func: return apply_func(e);
            case NodeKind::Sum:
            case NodeKind::Prod: {
                std::vector<Expr> ks;
                for (const auto& k : e.kids()) ks.push_back(apply(k));
                return e.kind() == NodeKind::Sum ? Expr::sum(std::move(ks))
                                                 : Expr::prod(std::move(ks));
            }
            case NodeKind::Pow: {
                Expr base = apply(e.kids()[0]);
                AffineExponent ex = e.node().exponent;
                if (!ex.is_constant()) {
                    auto it = b.params.find(std::string(expsym_name(ex.sym)));
                    if (it != b.params.end()) {
                        auto val = as_affine(it->second);
                        if (!val)
                            throw SubstError("exponent symbol bound to a non-affine expression");
                        AffineExponent ne = val->scaled(ex.coeff);
                        ne.cst += ex.cst;
                        ne.canonicalize();
                        ex = ne;
                    }
                }
                return Expr::pow(std::move(base), std::move(ex));
            }
            case NodeKind::Exp: return Expr::exp_(apply(e.kids()[0]));
            case NodeKind::Ln: return Expr::ln_(apply(e.kids()[0]));
        }
        return e;
    }

    Expr apply_func(const Expr& e) const {
        const Node& n = e.node();
        std::vector<Expr> args;
        for (const auto& a : n.kids) args.push_back(apply(a));
        auto it = b.funcs.find(n.name);
        if (it == b.funcs.end()) return Expr::func(n.name, n.deriv, std::move(args));

        const FuncSignature* sig = find_function(n.name);
        Expr body = it->second;
        for (size_t i = 0; i < n.deriv.size(); ++i) {
            DiffVar dv = formal_var(sig->formals[i]);
            for (int k = 0; k < n.deriv[i]; ++k) body = detail::diff_raw(body, dv);
        }
        Bindings inner;
        for (size_t i = 0; i < sig->formals.size(); ++i) {
            const std::string& f = sig->formals[i];
            if (f == "t")
                inner.ivars[IndepVar::T] = args[i];
            else if (f == "x")
                inner.ivars[IndepVar::X] = args[i];
            else if (f == "U")
                inner.deps[DepSym::U] = args[i];
            else
                inner.deps[DepSym::V] = args[i];
        }
        if (inner.empty()) return body;
        return Substituter{inner}.apply(body);
    }

    static DiffVar formal_var(const std::string& f) {
        if (f == "t") return IndepVar::T;
        if (f == "x") return IndepVar::X;
        if (f == "U") return DepSym::U;
        return DepSym::V;
    }
};

}  // namespace detail

/// Simultaneous substitution followed by normalization. Cyclic bindings are
/// rejected, as is replacing a jet symbol by an expression containing itself.
inline Expr substitute(const Expr& e, const Bindings& b,
                       size_t limit = kDefaultMonomialLimit) {
    // detect cycles among binding keys
    std::map<std::string, std::set<std::string>> edges;
    auto add_binding = [&](const std::string& key, const Expr& rhs) {
        std::set<std::string> used;
        detail::collect_keys(rhs, used);
        for (const auto& u : used) edges[key].insert(u);
    };
    for (const auto& [k, v] : b.params) add_binding(k, v);
    for (const auto& [k, v] : b.ivars) add_binding(std::string(ivar_name(k)), v);
    for (const auto& [k, v] : b.deps) add_binding(std::string(dep_name(k)), v);
    for (const auto& [k, v] : b.jets) add_binding(std::string(jet_name(k)), v);
    for (const auto& [k, v] : b.funcs) add_binding(k, v);

    std::set<std::string> bound;
    for (const auto& [k, _] : edges) bound.insert(k);
    std::map<std::string, int> state;  // 0 unvisited, 1 active, 2 done
    std::function<void(const std::string&)> dfs = [&](const std::string& k) {
        state[k] = 1;
        for (const auto& next : edges[k]) {
            if (!bound.count(next)) continue;
            if (state[next] == 1) throw SubstError("cyclic substitution binding through " + next);
            if (state[next] == 0) dfs(next);
        }
        state[k] = 2;
    };
    for (const auto& k : bound)
        if (state[k] == 0) dfs(k);

    return normalize(detail::Substituter{b}.apply(e), limit);
}

}  // namespace condsym
