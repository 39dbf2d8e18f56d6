#ifndef TFR_EXPR_HPP
#define TFR_EXPR_HPP

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfr/ratfun.hpp"

namespace tfr {

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error("line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ": " + msg),
          line(line_), column(col_) {}
};

namespace detail {

// Recursive-descent parser for +, -, *, /, ^ (integer exponents) over
// the given variables and rational literals.
class ExprParser {
public:
    ExprParser(const std::string& text, std::vector<std::string> vars, int line)
        : text_(text), vars_(std::move(vars)), line_(line) {}

    RatFun parse() {
        RatFun r = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return r;
    }

private:
    RatFun parse_sum() {
        RatFun r = parse_product();
        while (true) {
            skip_ws();
            if (peek() == '+') { ++pos_; r += parse_product(); }
            else if (peek() == '-') { ++pos_; r -= parse_product(); }
            else return r;
        }
    }
    RatFun parse_product() {
        RatFun r = parse_unary();
        while (true) {
            skip_ws();
            if (peek() == '*') { ++pos_; r *= parse_unary(); }
            else if (peek() == '/') { ++pos_; r /= parse_unary(); }
            else return r;
        }
    }
    RatFun parse_unary() {
        skip_ws();
        if (peek() == '-') { ++pos_; return -parse_unary(); }
        if (peek() == '+') { ++pos_; return parse_unary(); }
        return parse_power();
    }
    RatFun parse_power() {
        RatFun base = parse_atom();
        skip_ws();
        if (peek() != '^') return base;
        ++pos_;
        skip_ws();
        bool neg = false;
        if (peek() == '-') { neg = true; ++pos_; }
        if (!std::isdigit(peek())) fail("integer exponent expected after '^'");
        long e = 0;
        while (std::isdigit(peek())) e = e * 10 + (text_[pos_++] - '0');
        return base.pow(neg ? -e : e);
    }
    RatFun parse_atom() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++pos_;
            RatFun r = parse_sum();
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return r;
        }
        if (std::isdigit(c)) {
            std::size_t start = pos_;
            while (std::isdigit(peek()) || peek() == '.') ++pos_;
            return RatFun::constant(vars_, parse_rational(text_.substr(start, pos_ - start)));
        }
        if (std::isalpha(c) || c == '_') {
            std::size_t start = pos_;
            while (std::isalnum(peek()) || peek() == '_') ++pos_;
            std::string name = text_.substr(start, pos_ - start);
            for (std::size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == name) return RatFun::variable(vars_, i);
            throw ParseError("unknown identifier '" + name + "'", line_,
                             static_cast<int>(start) + 1);
        }
        fail(c == '\0' ? "unexpected end of expression"
                       : std::string("unexpected character '") + c + "'");
        return {};  // unreachable
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
    }

    const std::string& text_;
    std::vector<std::string> vars_;
    int line_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline RatFun parse_ratfun(const std::string& text, std::vector<std::string> vars,
                           int line = 1) {
    return detail::ExprParser(text, std::move(vars), line).parse();
}

// Parses an expression that must be polynomial (constant denominator).
inline MultiPoly parse_poly(const std::string& text, std::vector<std::string> vars,
                            int line = 1) {
    RatFun r = parse_ratfun(text, std::move(vars), line);
    if (!r.is_polynomial())
        throw ParseError("expression is not polynomial", line, 1);
    Rational d = r.den().constant_value();
    MultiPoly p = r.num();
    p *= Rational(1) / d;
    return p;
}

}  // namespace tfr

#endif
