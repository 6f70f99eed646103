#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "condsym/calculus.hpp"
#include "condsym/collect.hpp"

namespace condsym {

struct SourceSpan {
    size_t start = 0;
    size_t end = 0;
};

struct ParseDiagnostic {
    SourceSpan span;
    std::string message;
    enum class Severity { Error, Warning } severity = Severity::Error;
};

template <typename T>
struct ParseOutcome {
    std::optional<T> value;
    std::vector<ParseDiagnostic> diagnostics;
    bool unsupported = false;  // valid syntax naming an excluded class

    bool ok() const { return value.has_value(); }
    std::string message() const {
        std::string s;
        for (const auto& d : diagnostics) {
            if (!s.empty()) s += "; ";
            s += d.message + " (at " + std::to_string(d.span.start) + ".." +
                 std::to_string(d.span.end) + ")";
        }
        return s;
    }
};

namespace detail {

struct Token {
    enum class Kind { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
    Kind kind;
    SourceSpan span;
    std::string text;
};

struct ParseFail {
    ParseDiagnostic diag;
    bool unsupported = false;
};

inline std::vector<Token> lex(const std::string& in) {
    std::vector<Token> out;
    size_t i = 0;
    auto push = [&](Token::Kind k, size_t s, size_t e) {
        out.push_back({k, {s, e}, in.substr(s, e - s)});
    };
    while (i < in.size()) {
        char c = in[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t s = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < in.size() && (std::isdigit(static_cast<unsigned char>(in[i])) || in[i] == '.'))
                ++i;
            push(Token::Kind::Num, s, i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < in.size() && (std::isalnum(static_cast<unsigned char>(in[i])) || in[i] == '_'))
                ++i;
            push(Token::Kind::Ident, s, i);
            continue;
        }
        ++i;
        switch (c) {
            case '+': push(Token::Kind::Plus, s, i); break;
            case '-': push(Token::Kind::Minus, s, i); break;
            case '*': push(Token::Kind::Star, s, i); break;
            case '/': push(Token::Kind::Slash, s, i); break;
            case '^': push(Token::Kind::Caret, s, i); break;
            case '(': push(Token::Kind::LParen, s, i); break;
            case ')': push(Token::Kind::RParen, s, i); break;
            case ',': push(Token::Kind::Comma, s, i); break;
            default:
                throw ParseFail{{{s, i}, "unexpected character '" + std::string(1, c) + "'",
                                 ParseDiagnostic::Severity::Error}};
        }
    }
    out.push_back({Token::Kind::End, {in.size(), in.size()}, ""});
    return out;
}

inline std::optional<JetSym> jet_of_name(std::string_view s) {
    static const std::pair<std::string_view, JetSym> table[] = {
        {"Ut", JetSym::Ut},   {"Ux", JetSym::Ux},   {"Uxx", JetSym::Uxx},
        {"Utx", JetSym::Utx}, {"Utt", JetSym::Utt}, {"Vt", JetSym::Vt},
        {"Vx", JetSym::Vx},   {"Vxx", JetSym::Vxx}, {"Vtx", JetSym::Vtx},
        {"Vtt", JetSym::Vtt}};
    for (const auto& [name, j] : table)
        if (name == s) return j;
    return std::nullopt;
}

class Parser {
public:
    Parser(const std::string& text, bool allow_markers)
        : text_(text), toks_(lex(text)), markers_(allow_markers) {}

    Expr parse_all() {
        Expr e = parse_sum();
        expect_end();
        return e;
    }

private:
    const std::string& text_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    bool markers_;

    const Token& peek() const { return toks_[pos_]; }
    const Token& advance() { return toks_[pos_++]; }
    bool match(Token::Kind k) {
        if (peek().kind == k) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg, SourceSpan sp, bool unsupported = false) {
        throw ParseFail{{sp, msg, ParseDiagnostic::Severity::Error}, unsupported};
    }
    void expect_end() {
        if (peek().kind != Token::Kind::End) fail("unexpected trailing input", peek().span);
    }

    Expr parse_sum() {
        std::vector<Expr> terms{parse_term()};
        while (true) {
            if (match(Token::Kind::Plus))
                terms.push_back(parse_term());
            else if (match(Token::Kind::Minus))
                terms.push_back(Expr::integer(-1) * parse_term());
            else
                break;
        }
        return Expr::sum(std::move(terms));
    }

    Expr parse_term() {
        std::vector<Expr> factors{parse_factor()};
        while (true) {
            if (match(Token::Kind::Star))
                factors.push_back(parse_factor());
            else if (match(Token::Kind::Slash)) {
                Token op = toks_[pos_ - 1];
                Expr d = parse_factor();
                if (d.is_rational()) {
                    if (d.rat() == 0) fail("division by zero", op.span);
                    factors.push_back(Expr::rational(Rational(1) / d.rat()));
                } else {
                    factors.push_back(Expr::pow(d, AffineExponent(Rational(-1))));
                }
            } else
                break;
        }
        return Expr::prod(std::move(factors));
    }

    Expr parse_factor() {
        if (match(Token::Kind::Minus)) return Expr::integer(-1) * parse_factor();
        Expr a = parse_atom();
        if (match(Token::Kind::Caret)) {
            AffineExponent e = parse_exponent();
            try {
                return Expr::pow(std::move(a), std::move(e));
            } catch (const UnsupportedError& err) {
                fail(err.what(), peek().span);
            }
        }
        return a;
    }

    AffineExponent parse_exponent() {
        SourceSpan sp = peek().span;
        Expr e = parse_exponent_expr();
        auto a = as_affine(e);
        if (!a)
            fail("malformed exponent: must be affine in n or m with rational coefficients", sp);
        return *a;
    }

    // exponent := atom ("^" exponent)? | "(" expr ")"   (right-associative chains)
    Expr parse_exponent_expr() {
        if (match(Token::Kind::LParen)) {
            Expr e = parse_sum();
            if (!match(Token::Kind::RParen)) fail("unbalanced parentheses", peek().span);
            return e;
        }
        if (match(Token::Kind::Minus)) return Expr::integer(-1) * parse_exponent_expr();
        Expr a = parse_atom();
        if (match(Token::Kind::Caret)) {
            Expr e = parse_exponent_expr();
            auto af = as_affine(e);
            if (!af || !af->is_constant()) fail("malformed exponent", peek().span);
            return Expr::pow(std::move(a), AffineExponent(af->cst));
        }
        return a;
    }

    Expr parse_atom() {
        const Token& t = advance();
        switch (t.kind) {
            case Token::Kind::Num: {
                auto r = rat_from_string(t.text);
                if (!r) fail("malformed number", t.span);
                return Expr::rational(*r);
            }
            case Token::Kind::LParen: {
                Expr e = parse_sum();
                if (!match(Token::Kind::RParen)) fail("unbalanced parentheses", peek().span);
                return e;
            }
            case Token::Kind::Ident: return resolve_ident(t);
            default: fail("expected a number, identifier or '('", t.span);
        }
    }

    std::vector<Expr> parse_call_args() {
        std::vector<Expr> args;
        if (!match(Token::Kind::LParen)) return args;
        args.push_back(parse_sum());
        while (match(Token::Kind::Comma)) args.push_back(parse_sum());
        if (!match(Token::Kind::RParen)) fail("unbalanced parentheses in call", peek().span);
        return args;
    }

    Expr resolve_ident(const Token& t) {
        const std::string& s = t.text;
        if (s == "t") return e_t();
        if (s == "x") return e_x();
        if (s == "U") return e_U();
        if (s == "V") return e_V();
        if (auto j = jet_of_name(s)) return Expr::jet(*j);
        if (s == "exp" || s == "ln") {
            auto args = parse_call_args();
            if (args.size() != 1) fail(s + " takes exactly one argument", t.span);
            return s == "exp" ? Expr::exp_(args[0]) : Expr::ln_(args[0]);
        }
        if (s == "D") return parse_derivative(t);
        if (s == "Dt" || s == "Dx" || s == "DU" || s == "DV") {
            if (!markers_) fail("operator marker '" + s + "' outside an operator", t.span);
            return Expr::param("@" + s);
        }
        // function symbols, with optional _deriv suffix
        std::string base = s, suffix;
        if (auto us = s.find('_'); us != std::string::npos) {
            base = s.substr(0, us);
            suffix = s.substr(us + 1);
        }
        if (const FuncSignature* sig = find_function(base)) {
            std::vector<int> deriv(sig->formals.size(), 0);
            for (char c : suffix) {
                bool matched = false;
                for (size_t i = 0; i < sig->formals.size(); ++i)
                    if (sig->formals[i] == std::string(1, c)) {
                        ++deriv[i];
                        matched = true;
                        break;
                    }
                if (!matched)
                    fail("'" + std::string(1, c) + "' is not an argument of " + base, t.span);
            }
            std::vector<Expr> args;
            if (peek().kind == Token::Kind::LParen) {
                args = parse_call_args();
                if (args.size() != sig->formals.size())
                    fail(base + " takes " + std::to_string(sig->formals.size()) + " argument(s)",
                         t.span);
            }
            return Expr::func(base, std::move(deriv), std::move(args));
        }
        if (!suffix.empty()) fail("unknown identifier '" + s + "'", t.span);
        if (is_parameter_name(s)) return Expr::param(s);
        fail("unknown identifier '" + s + "'", t.span);
    }

    Expr parse_derivative(const Token& t) {
        auto args = parse_call_args();
        if (args.size() < 2 || args.size() > 3) fail("D takes D(expr, var[, order])", t.span);
        DiffVar v;
        const Expr& var = args[1];
        if (var.kind() == NodeKind::IVar)
            v = var.node().ivar;
        else if (var.kind() == NodeKind::Dep)
            v = var.node().dep;
        else if (var.kind() == NodeKind::Jet)
            v = var.node().jet;
        else
            fail("second argument of D must be a variable", t.span);
        long order = 1;
        if (args.size() == 3) {
            if (!args[2].is_rational() || !is_integer(args[2].rat()) || args[2].rat() < 1)
                fail("derivative order must be a positive integer", t.span);
            order = rat_to_long(args[2].rat());
        }
        Expr e = args[0];
        try {
            for (long i = 0; i < order; ++i) e = detail::diff_raw(e, v);
        } catch (const JetOrderError& err) {
            fail(err.what(), t.span);
        }
        return e;
    }
};

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parse an expression in the surface grammar. Result is not normalized.
inline ParseOutcome<Expr> parse_expression(const std::string& text) {
    ParseOutcome<Expr> out;
    try {
        detail::Parser p(text, /*allow_markers=*/false);
        out.value = p.parse_all();
    } catch (const detail::ParseFail& f) {
        out.diagnostics.push_back(f.diag);
        out.unsupported = f.unsupported;
    } catch (const std::exception& e) {
        out.diagnostics.push_back({{0, text.size()}, e.what(), ParseDiagnostic::Severity::Error});
    }
    return out;
}

/// Parameter list "k=v,k=v" with rational or decimal values.
inline ParseOutcome<std::map<std::string, Rational>> parse_params(const std::string& text) {
    ParseOutcome<std::map<std::string, Rational>> out;
    std::map<std::string, Rational> m;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        std::string item = detail::trim(
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!item.empty()) {
            auto eq = item.find('=');
            if (eq == std::string::npos) {
                out.diagnostics.push_back(
                    {{pos, pos + item.size()}, "expected name=value", ParseDiagnostic::Severity::Error});
                return out;
            }
            std::string name = detail::trim(item.substr(0, eq));
            std::string val = detail::trim(item.substr(eq + 1));
            auto r = rat_from_string(val);
            if (!r) {
                out.diagnostics.push_back({{pos, pos + item.size()},
                                           "malformed value for " + name,
                                           ParseDiagnostic::Severity::Error});
                return out;
            }
            if (!is_parameter_name(name)) {
                out.diagnostics.push_back({{pos, pos + item.size()},
                                           "unknown parameter '" + name + "'",
                                           ParseDiagnostic::Severity::Error});
                return out;
            }
            m[name] = *r;
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    out.value = std::move(m);
    return out;
}

/// Function bindings "f=expr; g=expr" (bodies in the declared formals).
inline ParseOutcome<std::map<std::string, Expr>> parse_function_bindings(const std::string& text) {
    ParseOutcome<std::map<std::string, Expr>> out;
    std::map<std::string, Expr> m;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t semi = text.find(';', pos);
        std::string item = detail::trim(
            text.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos));
        if (!item.empty()) {
            auto eq = item.find('=');
            if (eq == std::string::npos) {
                out.diagnostics.push_back(
                    {{pos, pos + item.size()}, "expected name=expr", ParseDiagnostic::Severity::Error});
                return out;
            }
            std::string name = detail::trim(item.substr(0, eq));
            if (!find_function(name)) {
                out.diagnostics.push_back({{pos, pos + item.size()},
                                           "unknown function symbol '" + name + "'",
                                           ParseDiagnostic::Severity::Error});
                return out;
            }
            auto body = parse_expression(item.substr(eq + 1));
            if (!body.ok()) {
                for (auto d : body.diagnostics) out.diagnostics.push_back(d);
                return out;
            }
            m.emplace(name, *body.value);
        }
        if (semi == std::string::npos) break;
        pos = semi + 1;
    }
    out.value = std::move(m);
    return out;
}

}  // namespace condsym
