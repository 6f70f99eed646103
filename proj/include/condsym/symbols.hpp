#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condsym/rational.hpp"

namespace condsym {

enum class IndepVar : uint8_t { T, X };
enum class DepSym : uint8_t { U, V };

// Second-order jet coordinates; anything higher is out of range for this engine.
enum class JetSym : uint8_t { Ut, Ux, Uxx, Utx, Utt, Vt, Vx, Vxx, Vtx, Vtt };

// Formal symbols allowed in power exponents.
enum class ExpSym : uint8_t { N, M };

inline std::string_view ivar_name(IndepVar v) { return v == IndepVar::T ? "t" : "x"; }
inline std::string_view dep_name(DepSym d) { return d == DepSym::U ? "U" : "V"; }

inline std::string_view jet_name(JetSym j) {
    switch (j) {
        case JetSym::Ut: return "Ut";
        case JetSym::Ux: return "Ux";
        case JetSym::Uxx: return "Uxx";
        case JetSym::Utx: return "Utx";
        case JetSym::Utt: return "Utt";
        case JetSym::Vt: return "Vt";
        case JetSym::Vx: return "Vx";
        case JetSym::Vxx: return "Vxx";
        case JetSym::Vtx: return "Vtx";
        case JetSym::Vtt: return "Vtt";
    }
    return "?";
}

inline DepSym jet_dep(JetSym j) { return static_cast<int>(j) < 5 ? DepSym::U : DepSym::V; }

struct JetOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raise a dependent symbol into its first jets.
inline JetSym dep_jet(DepSym d, IndepVar v) {
    if (d == DepSym::U) return v == IndepVar::T ? JetSym::Ut : JetSym::Ux;
    return v == IndepVar::T ? JetSym::Vt : JetSym::Vx;
}

/// Total-derivative raise of a jet symbol; throws beyond second order.
inline JetSym jet_raise(JetSym j, IndepVar v) {
    const bool t = v == IndepVar::T;
    switch (j) {
        case JetSym::Ut: return t ? JetSym::Utt : JetSym::Utx;
        case JetSym::Ux: return t ? JetSym::Utx : JetSym::Uxx;
        case JetSym::Vt: return t ? JetSym::Vtt : JetSym::Vtx;
        case JetSym::Vx: return t ? JetSym::Vtx : JetSym::Vxx;
        default:
            throw JetOrderError(std::string("derivative of ") + std::string(jet_name(j)) +
                                " exceeds the second-order jet space");
    }
}

inline std::string_view expsym_name(ExpSym s) { return s == ExpSym::N ? "n" : "m"; }

/// Exponents are affine forms  coeff * sym + cst  over exact rationals.
struct AffineExponent {
    Rational coeff;  // coefficient of the formal symbol; sym is meaningless when 0
    ExpSym sym = ExpSym::N;
    Rational cst;

    AffineExponent() = default;
    AffineExponent(Rational c) : cst(std::move(c)) {}
    AffineExponent(long c) : cst(c) {}
    AffineExponent(Rational co, ExpSym s, Rational c)
        : coeff(std::move(co)), sym(s), cst(std::move(c)) {
        canonicalize();
    }

    void canonicalize() {
        if (coeff == 0) sym = ExpSym::N;
    }

    bool is_constant() const { return coeff == 0; }
    bool is_zero() const { return coeff == 0 && cst == 0; }
    bool is_one() const { return coeff == 0 && cst == 1; }
    bool is_integer_constant() const { return coeff == 0 && is_integer(cst); }

    static AffineExponent symbol(ExpSym s) { return AffineExponent(Rational(1), s, Rational(0)); }

    AffineExponent operator+(const AffineExponent& o) const {
        if (coeff != 0 && o.coeff != 0 && sym != o.sym)
            throw UnsupportedError("mixed exponent symbols in one power");
        AffineExponent r;
        r.coeff = coeff + o.coeff;
        r.sym = coeff != 0 ? sym : o.sym;
        r.cst = cst + o.cst;
        r.canonicalize();
        return r;
    }
    AffineExponent operator-() const {
        AffineExponent r;
        r.coeff = -coeff;
        r.sym = sym;
        r.cst = -cst;
        r.canonicalize();
        return r;
    }
    AffineExponent operator-(const AffineExponent& o) const { return *this + (-o); }

    /// Product of exponents; defined only when at least one side is constant.
    AffineExponent operator*(const AffineExponent& o) const {
        if (!is_constant() && !o.is_constant())
            throw UnsupportedError("non-affine exponent (product of two symbolic exponents)");
        if (is_constant()) {
            AffineExponent r;
            r.coeff = cst * o.coeff;
            r.sym = o.sym;
            r.cst = cst * o.cst;
            r.canonicalize();
            return r;
        }
        return o * *this;
    }

    AffineExponent scaled(const Rational& k) const {
        AffineExponent r;
        r.coeff = coeff * k;
        r.sym = sym;
        r.cst = cst * k;
        r.canonicalize();
        return r;
    }

    bool operator==(const AffineExponent& o) const {
        return coeff == o.coeff && cst == o.cst && (coeff == 0 || sym == o.sym);
    }
    bool operator!=(const AffineExponent& o) const { return !(*this == o); }
    bool operator<(const AffineExponent& o) const {
        if (coeff != o.coeff) return coeff < o.coeff;
        if (coeff != 0 && sym != o.sym) return sym < o.sym;
        return cst < o.cst;
    }

    std::string str() const {
        if (is_constant()) return rat_to_string(cst);
        std::string s;
        if (coeff == 1)
            s = std::string(expsym_name(sym));
        else if (coeff == -1)
            s = "-" + std::string(expsym_name(sym));
        else
            s = rat_to_string(coeff) + "*" + std::string(expsym_name(sym));
        if (cst > 0) s += "+" + rat_to_string(cst);
        if (cst < 0) s += rat_to_string(cst);
        return s;
    }
};

/// Names accepted as free parameters (ASCII surface forms).
inline const std::vector<std::string>& parameter_registry() {
    static const std::vector<std::string> names = {
        "lam",   "lam0",  "lam1",  "lam2",  "lam3",  "lam1s", "lam2s", "lam3s",
        "lam4s", "lam5s", "m",     "n",     "delta", "gamma", "p",     "c",
        "c0",    "c1",    "c2",    "c3",    "q0",    "q1",    "q2",    "q3",
        "b0",    "k0",    "k1",    "v0",    "w0"};
    return names;
}

inline bool is_parameter_name(std::string_view s) {
    for (const auto& p : parameter_registry())
        if (p == s) return true;
    return false;
}

/// Exponent symbol associated with a parameter name, if any.
inline std::optional<ExpSym> expsym_of_param(std::string_view s) {
    if (s == "n") return ExpSym::N;
    if (s == "m") return ExpSym::M;
    return std::nullopt;
}

/// Formal function symbols with fixed argument signatures.
struct FuncSignature {
    std::string name;
    std::vector<std::string> formals;  // drawn from {"t","x","U","V"}
};

inline const std::vector<FuncSignature>& function_registry() {
    static const std::vector<FuncSignature> sigs = {
        {"F", {"V"}},          {"C", {"U"}},
        {"xi", {"t", "x", "V"}}, {"eta", {"t", "x", "V"}},
        {"M", {"t", "x", "V"}},  {"f", {"t", "x"}},
        {"g", {"t", "x"}},       {"h", {"t", "x"}},
        {"a", {"t", "x"}},       {"b", {"t", "x"}},
        {"q", {"t", "x"}},       {"phi", {"t"}}};
    return sigs;
}

inline const FuncSignature* find_function(std::string_view name) {
    for (const auto& s : function_registry())
        if (s.name == name) return &s;
    return nullptr;
}

/// Ledger of inequations: named symbol != rational value.
/// Exponent-symbol entries double as exponent-class separators.
class Assumptions {
public:
    struct Entry {
        std::string symbol;
        Rational excluded;
        bool operator==(const Entry&) const = default;
    };

    Assumptions() = default;

    void exclude(std::string symbol, Rational value) {
        Entry e{std::move(symbol), std::move(value)};
        for (const auto& x : entries_)
            if (x == e) return;
        entries_.push_back(std::move(e));
    }
    void nonzero(std::string symbol) { exclude(std::move(symbol), Rational(0)); }

    bool excludes(std::string_view symbol, const Rational& value) const {
        for (const auto& e : entries_)
            if (e.symbol == symbol && e.excluded == value) return true;
        return false;
    }
    bool nonzero_known(std::string_view symbol) const { return excludes(symbol, Rational(0)); }

    /// Can the ledger tell exponent classes e1 and e2 apart?
    /// Classes that are never equal (constant nonzero difference) separate trivially.
    bool separates(const AffineExponent& e1, const AffineExponent& e2) const {
        AffineExponent d = e1 - e2;
        if (d.is_zero()) return false;  // identical class
        if (d.is_constant()) return true;
        Rational forced = -d.cst / d.coeff;
        return excludes(expsym_name(d.sym), forced);
    }

    /// Value of the exponent symbol that would merge the two classes, if any.
    std::optional<Rational> merge_value(const AffineExponent& e1, const AffineExponent& e2) const {
        AffineExponent d = e1 - e2;
        if (d.is_constant()) return std::nullopt;
        return -d.cst / d.coeff;
    }

    const std::vector<Entry>& entries() const { return entries_; }

    std::string str() const {
        std::string s;
        for (const auto& e : entries_) {
            if (!s.empty()) s += ", ";
            s += e.symbol + " != " + rat_to_string(e.excluded);
        }
        return s;
    }

private:
    std::vector<Entry> entries_;
};

}  // namespace condsym
