#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "condsym/symbols.hpp"

namespace condsym {

class Expr;

enum class NodeKind : uint8_t {
    Rat,    // exact rational constant
    Param,  // named parameter
    IVar,   // t or x
    Dep,    // U or V
    Jet,    // jet coordinate
    Func,   // formal function symbol with derivative multi-index and arguments
    Sum,
    Prod,
    Pow,  // base^affine-exponent
    Exp,
    Ln,
};

struct Node {
    NodeKind kind;

    Rational rat;              // Rat
    std::string name;          // Param, Func
    IndepVar ivar{};           // IVar
    DepSym dep{};              // Dep
    JetSym jet{};              // Jet
    std::vector<int> deriv;    // Func: per-formal derivative counts
    std::vector<Expr> kids;    // Sum, Prod, Func args
    AffineExponent exponent;   // Pow
};

/// Immutable shared expression. Cheap to copy, safe to share across threads.
class Expr {
public:
    Expr() = default;  // null; only a transient state, never a valid value

    static Expr rational(Rational r) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Rat;
        n->rat = std::move(r);
        return Expr(std::move(n));
    }
    static Expr integer(long v) { return rational(Rational(v)); }
    static Expr param(std::string name) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Param;
        n->name = std::move(name);
        return Expr(std::move(n));
    }
    static Expr ivar(IndepVar v) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::IVar;
        n->ivar = v;
        return Expr(std::move(n));
    }
    static Expr dep(DepSym d) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Dep;
        n->dep = d;
        return Expr(std::move(n));
    }
    static Expr jet(JetSym j) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Jet;
        n->jet = j;
        return Expr(std::move(n));
    }

    /// Function symbol applied to explicit arguments. Empty args means the
    /// declared formal arguments.
    static Expr func(std::string name, std::vector<int> deriv = {}, std::vector<Expr> args = {});

    static Expr sum(std::vector<Expr> terms) {
        if (terms.empty()) return integer(0);
        if (terms.size() == 1) return terms[0];
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Sum;
        n->kids = std::move(terms);
        return Expr(std::move(n));
    }
    static Expr prod(std::vector<Expr> factors) {
        if (factors.empty()) return integer(1);
        if (factors.size() == 1) return factors[0];
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Prod;
        n->kids = std::move(factors);
        return Expr(std::move(n));
    }
    static Expr pow(Expr base, AffineExponent e) {
        if (e.is_zero()) return integer(1);
        if (e.is_one()) return base;
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Pow;
        n->kids = {std::move(base)};
        n->exponent = std::move(e);
        return Expr(std::move(n));
    }
    static Expr exp_(Expr arg) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Exp;
        n->kids = {std::move(arg)};
        return Expr(std::move(n));
    }
    static Expr ln_(Expr arg) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Ln;
        n->kids = {std::move(arg)};
        return Expr(std::move(n));
    }

    bool valid() const { return static_cast<bool>(node_); }
    const Node& node() const { return *node_; }
    NodeKind kind() const { return node_->kind; }

    bool is_rational() const { return node_->kind == NodeKind::Rat; }
    bool is_zero() const { return is_rational() && node_->rat == 0; }
    bool is_one() const { return is_rational() && node_->rat == 1; }
    const Rational& rat() const { return node_->rat; }

    const std::vector<Expr>& kids() const { return node_->kids; }

    // Convenience arithmetic (not normalized).
    Expr operator+(const Expr& o) const { return sum({*this, o}); }
    Expr operator-(const Expr& o) const {
        return sum({*this, prod({integer(-1), o})});
    }
    Expr operator*(const Expr& o) const { return prod({*this, o}); }
    Expr operator-() const { return prod({integer(-1), *this}); }

    const Node* raw() const { return node_.get(); }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

inline Expr operator*(long k, const Expr& e) { return Expr::integer(k) * e; }
inline Expr operator*(const Rational& k, const Expr& e) { return Expr::rational(k) * e; }

inline Expr Expr::func(std::string name, std::vector<int> deriv, std::vector<Expr> args) {
    const FuncSignature* sig = find_function(name);
    if (!sig) throw UnsupportedError("unknown function symbol: " + name);
    const size_t arity = sig->formals.size();
    if (deriv.empty()) deriv.assign(arity, 0);
    if (deriv.size() != arity)
        throw UnsupportedError("malformed derivative multi-index for " + name);
    for (int d : deriv)
        if (d < 0) throw UnsupportedError("malformed derivative multi-index for " + name);
    if (args.empty()) {
        for (const auto& formal : sig->formals) {
            if (formal == "t")
                args.push_back(ivar(IndepVar::T));
            else if (formal == "x")
                args.push_back(ivar(IndepVar::X));
            else if (formal == "U")
                args.push_back(dep(DepSym::U));
            else
                args.push_back(dep(DepSym::V));
        }
    }
    if (args.size() != arity) throw UnsupportedError("wrong argument count for " + name);
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Func;
    n->name = std::move(name);
    n->deriv = std::move(deriv);
    n->kids = std::move(args);
    return Expr(std::move(n));
}

/// Deterministic total order on expression trees (structural).
inline int expr_cmp(const Expr& a, const Expr& b) {
    if (a.raw() == b.raw()) return 0;
    const Node& x = a.node();
    const Node& y = b.node();
    if (x.kind != y.kind) return x.kind < y.kind ? -1 : 1;
    auto cmp_rat = [](const Rational& p, const Rational& q) {
        return p == q ? 0 : (p < q ? -1 : 1);
    };
    switch (x.kind) {
        case NodeKind::Rat: return cmp_rat(x.rat, y.rat);
        case NodeKind::Param: return x.name.compare(y.name) < 0 ? -1 : (x.name == y.name ? 0 : 1);
        case NodeKind::IVar: return x.ivar == y.ivar ? 0 : (x.ivar < y.ivar ? -1 : 1);
        case NodeKind::Dep: return x.dep == y.dep ? 0 : (x.dep < y.dep ? -1 : 1);
        case NodeKind::Jet: return x.jet == y.jet ? 0 : (x.jet < y.jet ? -1 : 1);
        case NodeKind::Func: {
            if (int c = x.name.compare(y.name); c != 0) return c < 0 ? -1 : 1;
            if (x.deriv != y.deriv) return x.deriv < y.deriv ? -1 : 1;
            break;  // fall through to kids
        }
        case NodeKind::Pow: {
            if (x.exponent != y.exponent) return x.exponent < y.exponent ? -1 : 1;
            break;
        }
        default: break;
    }
    if (x.kids.size() != y.kids.size()) return x.kids.size() < y.kids.size() ? -1 : 1;
    for (size_t i = 0; i < x.kids.size(); ++i)
        if (int c = expr_cmp(x.kids[i], y.kids[i]); c != 0) return c;
    return 0;
}

inline bool expr_identical(const Expr& a, const Expr& b) { return expr_cmp(a, b) == 0; }

// Shorthand builders used throughout.
inline Expr e_t() { return Expr::ivar(IndepVar::T); }
inline Expr e_x() { return Expr::ivar(IndepVar::X); }
inline Expr e_U() { return Expr::dep(DepSym::U); }
inline Expr e_V() { return Expr::dep(DepSym::V); }
inline Expr e_rat(long n, long d = 1) { return Expr::rational(Rational(n, d)); }

}  // namespace condsym
