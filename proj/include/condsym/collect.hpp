#pragma once

#include <functional>
#include <map>

#include "condsym/normalize.hpp"

namespace condsym {

struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One functionally-independent atom class  base^power * exp(exp_coeff*base).
struct VClass {
    AffineExponent power;
    Rational exp_coeff;

    bool operator==(const VClass& o) const {
        return power == o.power && exp_coeff == o.exp_coeff;
    }
    bool operator<(const VClass& o) const {
        if (exp_coeff != o.exp_coeff) return exp_coeff > o.exp_coeff;
        if (power != o.power) return o.power < power;
        return false;
    }
    std::string str(DepSym base) const {
        std::string b(dep_name(base));
        std::string s;
        if (exp_coeff != 0) {
            std::string arg = exp_coeff == 1 ? b : rat_to_string(exp_coeff) + "*" + b;
            s = "exp(" + arg + ")";
        }
        if (!power.is_zero()) {
            std::string p = b;
            if (!power.is_one()) p += "^(" + power.str() + ")";
            s = s.empty() ? p : p + "*" + s;
        }
        return s.empty() ? "1" : s;
    }
};

struct SplitResult {
    struct Class {
        VClass klass;
        Expr coefficient;
        bool merged = false;  // absorbed other classes the ledger could not separate
    };
    struct Merge {
        AffineExponent from, into;
        Rational forced;  // symbol value that would conflate the two classes
    };
    std::vector<Class> classes;
    std::vector<Merge> merges;
};

namespace detail {

inline bool expr_contains_dep(const Expr& e, DepSym d) {
    if (e.kind() == NodeKind::Dep && e.node().dep == d) return true;
    for (const auto& k : e.kids())
        if (expr_contains_dep(k, d)) return true;
    return false;
}

}  // namespace detail

/// Split an expression by functionally independent powers of `base`
/// (including exp(base) style atoms). Coefficients must be free of the base;
/// classes the ledger cannot separate are merged and reported.
inline SplitResult collect_powers(const Expr& e, DepSym base, const Assumptions& ledger = {},
                                  size_t limit = kDefaultMonomialLimit) {
    using namespace detail;
    NormContext ctx{limit};
    Poly p = to_poly(e, ctx);

    struct Bucket {
        Poly coeff;
    };
    std::map<std::pair<Rational, AffineExponent>, Bucket,
             decltype([](const auto& a, const auto& b) {
                 if (a.first != b.first) return a.first < b.first;
                 return a.second < b.second;
             })>
        buckets;

    for (const auto& [m, c] : p) {
        Monomial rest;
        AffineExponent vpow{Rational(0)};
        Rational expc(0);
        for (const auto& [atom, ex] : m.factors) {
            if (atom.kind == AtomKind::Dep && atom.dep == base) {
                vpow = ex;
                continue;
            }
            bool dirty = false;
            if (atom.kind == AtomKind::Func) {
                for (const auto& a : atom.args) dirty = dirty || expr_contains_dep(a, base);
            } else if (atom.kind == AtomKind::Compound || atom.kind == AtomKind::Log) {
                dirty = expr_contains_dep(atom.base, base);
            }
            if (dirty)
                throw SplitError("not splittable: coefficient depends on " +
                                 std::string(dep_name(base)));
            rest.factors.emplace_back(atom, ex);
        }
        if (m.has_exp()) {
            Poly ap = to_poly(m.exp_arg, ctx);
            Poly residue;
            for (const auto& [am, ac] : ap) {
                if (am.factors.size() == 1 && !am.has_exp() &&
                    am.factors[0].first.kind == AtomKind::Dep &&
                    am.factors[0].first.dep == base && am.factors[0].second.is_one()) {
                    expc += ac;
                    continue;
                }
                bool dirty = am.has_exp() && expr_contains_dep(am.exp_arg, base);
                for (const auto& [atom, ex] : am.factors) {
                    if (atom.kind == AtomKind::Dep && atom.dep == base) dirty = true;
                    if (atom.kind == AtomKind::Func)
                        for (const auto& a : atom.args) dirty = dirty || expr_contains_dep(a, base);
                    if (atom.kind == AtomKind::Compound || atom.kind == AtomKind::Log)
                        dirty = dirty || expr_contains_dep(atom.base, base);
                }
                if (dirty) throw SplitError("not splittable: exp argument nonlinear in base");
                residue.emplace(am, ac);
            }
            Expr rest_arg = poly_to_expr(residue);
            if (!rest_arg.is_zero()) rest.exp_arg = rest_arg;
        }
        poly_insert(buckets[{expc, vpow}].coeff, std::move(rest), c, ctx);
    }

    // merge classes (same exp coefficient) the ledger cannot separate
    std::vector<std::pair<Rational, AffineExponent>> keys;
    for (const auto& [k, b] : buckets)
        if (!b.coeff.empty()) keys.push_back(k);
    std::vector<int> parent(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int i) {
        return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    SplitResult out;
    for (size_t i = 0; i < keys.size(); ++i)
        for (size_t j = i + 1; j < keys.size(); ++j) {
            if (keys[i].first != keys[j].first) continue;
            if (ledger.separates(keys[i].second, keys[j].second)) continue;
            auto forced = ledger.merge_value(keys[i].second, keys[j].second);
            out.merges.push_back({keys[j].second, keys[i].second, forced.value_or(Rational(0))});
            parent[find(static_cast<int>(j))] = find(static_cast<int>(i));
        }

    std::map<int, std::vector<int>> groups;
    for (size_t i = 0; i < keys.size(); ++i) groups[find(static_cast<int>(i))].push_back(static_cast<int>(i));

    for (const auto& [root, members] : groups) {
        // representative: lowest exponent in the group
        AffineExponent rep = keys[members[0]].second;
        for (int m : members)
            if (keys[m].second < rep) rep = keys[m].second;
        Poly merged;
        for (int m : members) {
            AffineExponent shift = keys[m].second - rep;
            if (shift.is_zero()) {
                poly_add_inplace(merged, buckets[keys[m]].coeff, ctx);
            } else {
                Atom va;
                va.kind = AtomKind::Dep;
                va.dep = base;
                Poly vp = atom_poly(va, shift);
                poly_add_inplace(merged, poly_mul(buckets[keys[m]].coeff, vp, ctx), ctx);
            }
        }
        SplitResult::Class cl;
        cl.klass = VClass{rep, keys[members[0]].first};
        cl.coefficient = poly_to_expr(merged);
        cl.merged = members.size() > 1;
        out.classes.push_back(std::move(cl));
    }
    std::sort(out.classes.begin(), out.classes.end(),
              [](const auto& a, const auto& b) { return a.klass < b.klass; });
    return out;
}

/// Coefficients of integer powers of a jet symbol (used for residual work).
inline std::map<long, Expr> collect_jet_powers(const Expr& e, JetSym j,
                                               size_t limit = kDefaultMonomialLimit) {
    using namespace detail;
    NormContext ctx{limit};
    Poly p = to_poly(e, ctx);
    std::map<long, Poly> buckets;
    for (const auto& [m, c] : p) {
        long deg = 0;
        Monomial rest;
        rest.exp_arg = m.exp_arg;
        for (const auto& [atom, ex] : m.factors) {
            if (atom.kind == AtomKind::Jet && atom.jet == j) {
                if (!ex.is_integer_constant())
                    throw SplitError("jet symbol carries a non-integer power");
                deg = rat_to_long(ex.cst);
                continue;
            }
            rest.factors.emplace_back(atom, ex);
        }
        poly_insert(buckets[deg], std::move(rest), c, ctx);
    }
    std::map<long, Expr> out;
    for (auto& [deg, poly] : buckets) {
        if (poly.empty()) continue;
        out[deg] = poly_to_expr(poly);
    }
    return out;
}

}  // namespace condsym
