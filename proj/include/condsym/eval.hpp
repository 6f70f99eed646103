#pragma once

#include <cstdlib>
#include <random>

#include "condsym/calculus.hpp"
#include "condsym/render.hpp"

namespace condsym {

inline uint64_t default_eval_seed() {
    if (const char* s = std::getenv("CONDSYM_SEED")) {
        uint64_t h = 1469598103934665603ull;
        for (const char* p = s; *p; ++p) h = (h ^ static_cast<uint8_t>(*p)) * 1099511628211ull;
        return h;
    }
    return 0x9e3779b97f4a7c15ull;
}

namespace detail {

/// Exact rational evaluation at a random point. Bases carrying fractional
/// powers get values of the form w^L (L = lcm of exponent denominators) so
/// every power stays inside the rationals; exp(...) atoms are valued as
/// powers of a shared random base, which preserves exp(a)exp(b) = exp(a+b).
class RandomEvaluator {
public:
    enum class Status { Value, Pole, Inexact };
    struct Outcome {
        Status status = Status::Value;
        Rational value;
    };

    RandomEvaluator(const Assumptions& ledger, std::mt19937_64& rng)
        : ledger_(ledger), rng_(rng) {}

    Outcome run(const Expr& e) {
        scan(e);
        choose_exponent_symbols();
        if (inexact_) return {Status::Inexact, Rational(0)};
        assign_bases();
        // phase A: value every exp(...) argument, then fix the shared base
        std::vector<std::pair<std::string, Rational>> exp_vals;
        for (const Expr& arg : exp_args_) {
            auto v = eval(arg, /*allow_exp=*/false);
            if (v.status != Status::Value) return v;
            lexp_ = lcm_long(lexp_, static_cast<long>(rat_den(v.value)));
            exp_vals.emplace_back(to_text(arg), v.value);
            if (lexp_ > 64) return {Status::Inexact, Rational(0)};
        }
        for (auto& [key, val] : exp_vals) exp_arg_values_[key] = val * lexp_;
        exp_base_ = random_small_positive();
        return eval(e, true);
    }

private:
    struct BaseVal {
        Rational w;
        long L = 1;
        Rational value;  // w^L
    };

    const Assumptions& ledger_;
    std::mt19937_64& rng_;
    bool inexact_ = false;
    bool need_n_ = false, need_m_ = false;
    Rational n_val_, m_val_;
    std::map<std::string, long> lcm_;           // base key -> exponent-denominator lcm
    std::map<std::string, bool> signed_ok_;     // base key -> all exponents integer
    std::map<std::string, BaseVal> bases_;
    std::vector<Expr> exp_args_;
    long lexp_ = 1;
    std::map<std::string, Rational> exp_arg_values_;  // scaled by lexp
    Rational exp_base_;
    std::map<std::string, Rational> cache_;  // function/log atom values

    static std::string base_key(const Expr& e) {
        switch (e.kind()) {
            case NodeKind::Param: return "p:" + e.node().name;
            case NodeKind::IVar: return "v:" + std::string(ivar_name(e.node().ivar));
            case NodeKind::Dep: return "d:" + std::string(dep_name(e.node().dep));
            case NodeKind::Jet: return "j:" + std::string(jet_name(e.node().jet));
            default: return "";
        }
    }

    Rational exponent_value(const AffineExponent& e) {
        Rational v = e.cst;
        if (e.coeff != 0) v += e.coeff * (e.sym == ExpSym::N ? n_val_ : m_val_);
        return v;
    }

    void note_symbol(const AffineExponent& e) {
        if (e.coeff == 0) return;
        (e.sym == ExpSym::N ? need_n_ : need_m_) = true;
    }

    void scan(const Expr& e) {
        switch (e.kind()) {
            case NodeKind::Pow: {
                note_symbol(e.node().exponent);
                scan(e.kids()[0]);
                pow_sites_.emplace_back(e.raw());
                return;
            }
            case NodeKind::Exp: {
                const Expr& arg = e.kids()[0];
                if (contains_exp(arg)) {
                    inexact_ = true;
                    return;
                }
                bool seen = false;
                for (const auto& a : exp_args_)
                    if (a.raw() == arg.raw() || expr_identical(a, arg)) seen = true;
                if (!seen) exp_args_.push_back(arg);
                scan(arg);
                return;
            }
            default: break;
        }
        std::string key = base_key(e);
        if (!key.empty()) touch_base(key);
        for (const auto& k : e.kids()) scan(k);
    }

    static bool contains_exp(const Expr& e) {
        if (e.kind() == NodeKind::Exp) return true;
        for (const auto& k : e.kids())
            if (contains_exp(k)) return true;
        return false;
    }

    void touch_base(const std::string& key) {
        if (!lcm_.count(key)) {
            lcm_[key] = 1;
            signed_ok_[key] = true;
        }
    }

    std::vector<const Node*> pow_sites_;

    void choose_exponent_symbols() {
        auto pick = [&](const char* name) {
            std::uniform_int_distribution<int> d(2, 7);
            for (int tries = 0; tries < 64; ++tries) {
                Rational v(d(rng_));
                if (!ledger_.excludes(name, v)) return v;
            }
            return Rational(11);
        };
        if (need_n_) n_val_ = pick("n");
        if (need_m_) m_val_ = pick("m");
        // second scan pass: with symbol values fixed, accumulate denominator lcms
        for (const Node* p : pow_sites_) {
            Rational ev = exponent_value(p->exponent);
            const Expr& base = p->kids[0];
            std::string key = base_key(base);
            long den = static_cast<long>(rat_den(ev));
            if (!key.empty()) {
                touch_base(key);
                lcm_[key] = lcm_long(lcm_[key], den);
                if (den != 1) signed_ok_[key] = false;
            } else if (den != 1) {
                inexact_ = true;  // fractional power of a compound base
            }
        }
    }

    Rational random_small_positive() {
        std::uniform_int_distribution<int> num(2, 7), den(1, 7);
        Rational r(num(rng_), den(rng_));
        if (r == 1) r += 1;
        return r;
    }

    void assign_bases() {
        for (auto& [key, L] : lcm_) {
            BaseVal bv;
            bv.L = L;
            if (key == "p:n" && need_n_) {
                bv.w = n_val_;
                bv.L = 1;
                bv.value = n_val_;
            } else if (key == "p:m" && need_m_) {
                bv.w = m_val_;
                bv.L = 1;
                bv.value = m_val_;
            } else if (L > 1) {
                bv.w = random_small_positive();
                bv.value = rat_pow(bv.w, L);
            } else {
                std::uniform_int_distribution<int> num(-97, 97), den(1, 97);
                Rational v;
                for (int tries = 0; tries < 128; ++tries) {
                    v = Rational(num(rng_), den(rng_));
                    if (v == 0) continue;
                    std::string name = key.substr(2);
                    if (key[0] == 'p' && ledger_.excludes(name, v)) continue;
                    break;
                }
                if (v == 0) v = Rational(13, 7);
                bv.w = v;
                bv.value = v;
            }
            bases_[key] = bv;
        }
    }

    Outcome eval(const Expr& e, bool allow_exp) {
        switch (e.kind()) {
            case NodeKind::Rat: return {Status::Value, e.rat()};
            case NodeKind::Param:
            case NodeKind::IVar:
            case NodeKind::Dep:
            case NodeKind::Jet: {
                std::string key = base_key(e);
                auto it = bases_.find(key);
                if (it == bases_.end()) {
                    BaseVal bv;
                    bv.w = random_small_positive();
                    bv.value = bv.w;
                    it = bases_.emplace(key, bv).first;
                }
                return {Status::Value, it->second.value};
            }
            case NodeKind::Func: {
                std::string key = "f:" + e.node().name;
                for (int d : e.node().deriv) key += "," + std::to_string(d);
                for (const auto& a : e.kids()) {
                    auto v = eval(a, allow_exp);
                    if (v.status != Status::Value) return v;
                    key += ";" + rat_to_string(v.value);
                }
                return {Status::Value, prf(key)};
            }
            case NodeKind::Ln: {
                auto v = eval(e.kids()[0], allow_exp);
                if (v.status != Status::Value) return v;
                if (v.value == 0) return {Status::Pole, Rational(0)};
                return {Status::Value, prf("ln:" + rat_to_string(v.value))};
            }
            case NodeKind::Sum: {
                Rational acc(0);
                for (const auto& k : e.kids()) {
                    auto v = eval(k, allow_exp);
                    if (v.status != Status::Value) return v;
                    acc += v.value;
                }
                return {Status::Value, acc};
            }
            case NodeKind::Prod: {
                Rational acc(1);
                for (const auto& k : e.kids()) {
                    auto v = eval(k, allow_exp);
                    if (v.status != Status::Value) return v;
                    acc *= v.value;
                }
                return {Status::Value, acc};
            }
            case NodeKind::Pow: {
                Rational ev = exponent_value(e.node().exponent);
                const Expr& base = e.kids()[0];
                std::string key = base_key(base);
                if (!key.empty() && !is_integer(ev)) {
                    const BaseVal& bv = bases_.at(key);
                    Rational k = ev * bv.L;
                    if (!is_integer(k)) return {Status::Inexact, Rational(0)};
                    if (bv.w == 0 && k < 0) return {Status::Pole, Rational(0)};
                    return {Status::Value, rat_pow(bv.w, rat_to_long(k))};
                }
                auto b = eval(base, allow_exp);
                if (b.status != Status::Value) return b;
                if (!is_integer(ev)) return {Status::Inexact, Rational(0)};
                long k = rat_to_long(ev);
                if (b.value == 0 && k <= 0) return {Status::Pole, Rational(0)};
                return {Status::Value, rat_pow(b.value, k)};
            }
            case NodeKind::Exp: {
                if (!allow_exp) return {Status::Inexact, Rational(0)};
                auto it = exp_arg_values_.find(to_text(e.kids()[0]));
                if (it == exp_arg_values_.end()) {
                    auto v = eval(e.kids()[0], false);
                    if (v.status != Status::Value) return v;
                    Rational k = v.value * lexp_;
                    if (!is_integer(k)) return {Status::Inexact, Rational(0)};
                    return {Status::Value, rat_pow(exp_base_, rat_to_long(k))};
                }
                return {Status::Value, rat_pow(exp_base_, rat_to_long(it->second))};
            }
        }
        return {Status::Inexact, Rational(0)};
    }

    Rational prf(const std::string& key) {
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        uint64_t h = 1469598103934665603ull;
        for (char c : key) h = (h ^ static_cast<uint8_t>(c)) * 1099511628211ull;
        h ^= rng_();  // mixes in the per-point stream deterministically
        long num = static_cast<long>(h % 193) - 96;
        long den = static_cast<long>((h >> 32) % 96) + 1;
        if (num == 0) num = 17;
        Rational v(num, den);
        cache_[key] = v;
        return v;
    }
};

}  // namespace detail

struct EvalSample {
    bool evaluated = false;  // false: inexact atoms forced a skip
    Rational value;
};

/// Evaluate a normalized expression at one random rational point.
/// Points violating the ledger are never drawn; poles trigger fresh points.
inline EvalSample evaluate_random(const Expr& normalized, const Assumptions& ledger,
                                  std::mt19937_64& rng, int max_tries = 64) {
    using Ev = detail::RandomEvaluator;
    for (int i = 0; i < max_tries; ++i) {
        Ev ev(ledger, rng);
        auto out = ev.run(normalized);
        if (out.status == Ev::Status::Value) return {true, out.value};
        if (out.status == Ev::Status::Inexact) return {false, Rational(0)};
    }
    throw SoundnessError("random evaluation kept hitting poles");
}

/// Structural equality on normal forms, with a randomized-evaluation monitor.
/// The monitor never decides the verdict; it aborts on any disagreement.
inline bool equal(const Expr& a, const Expr& b, const Assumptions& ledger = {},
                  uint64_t seed = default_eval_seed(), int points = 8) {
    Expr d = normalize(a - b);
    if (d.is_zero()) return true;
    bool zero = is_zero(d);

    std::mt19937_64 rng(seed);
    int evaluated = 0, nonzero = 0;
    for (int i = 0; i < points; ++i) {
        EvalSample s = evaluate_random(d, ledger, rng);
        if (!s.evaluated) continue;
        ++evaluated;
        if (s.value != 0) ++nonzero;
        if (zero && s.value != 0)
            throw SoundnessError("equality monitor: structural zero but nonzero at a sample point");
    }
    if (!zero && evaluated > 0 && nonzero == 0)
        throw SoundnessError(
            "equality monitor: structurally nonzero but vanishes at all sample points");
    return zero;
}

inline bool equal(const Expr& a, const Expr& b, const Assumptions& ledger, int points) {
    return equal(a, b, ledger, default_eval_seed(), points);
}

}  // namespace condsym
