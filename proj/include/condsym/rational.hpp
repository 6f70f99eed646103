#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace condsym {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct SizeLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SoundnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline BigInt rat_num(const Rational& r) { return numerator(r); }
inline BigInt rat_den(const Rational& r) { return denominator(r); }

/// r^k for integer k; throws on 0^k with k <= 0 handled by caller.
inline Rational rat_pow(const Rational& base, long k) {
    if (k == 0) return Rational(1);
    if (base == 0) {
        if (k > 0) return Rational(0);
        throw std::domain_error("rat_pow: zero base with negative exponent");
    }
    Rational b = base;
    long n = k;
    if (n < 0) {
        b = Rational(denominator(b), numerator(b));
        n = -n;
    }
    Rational acc(1);
    while (n > 0) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

inline long rat_to_long(const Rational& r) {
    if (!is_integer(r)) throw std::domain_error("rat_to_long: not an integer");
    return static_cast<long>(numerator(r));
}

inline std::string rat_to_string(const Rational& r) {
    if (is_integer(r)) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

inline std::optional<Rational> rat_from_string(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            auto dot = s.find('.');
            if (dot == std::string::npos) return Rational(BigInt(s));
            // decimal literal -> exact rational
            std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
            if (head.empty() || head == "-" || head == "+") head += "0";
            for (char c : tail)
                if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            BigInt den(1);
            for (size_t i = 0; i < tail.size(); ++i) den *= 10;
            BigInt num = BigInt(head) * den;
            BigInt frac = tail.empty() ? BigInt(0) : BigInt(tail);
            if (!head.empty() && head[0] == '-')
                num -= frac;
            else
                num += frac;
            return Rational(num, den);
        }
        BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
        if (den == 0) return std::nullopt;
        return Rational(num, den);
    } catch (...) {
        return std::nullopt;
    }
}

inline double rat_to_double(const Rational& r) { return static_cast<double>(r); }

/// Exact integer square root test; returns the root if n is a perfect square.
inline std::optional<BigInt> perfect_sqrt(const BigInt& n) {
    if (n < 0) return std::nullopt;
    if (n == 0) return BigInt(0);
    BigInt r = sqrt(n);
    for (BigInt c = r - 1; c <= r + 1; ++c)
        if (c >= 0 && c * c == n) return c;
    return std::nullopt;
}

/// Exact rational square root, if it exists.
inline std::optional<Rational> rat_sqrt(const Rational& r) {
    auto n = perfect_sqrt(numerator(r));
    auto d = perfect_sqrt(denominator(r));
    if (n && d) return Rational(*n, *d);
    return std::nullopt;
}

inline long lcm_long(long a, long b) {
    if (a == 0 || b == 0) return 0;
    long g = std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
    return (a / g) * b;
}

}  // namespace condsym
