#ifndef TFR_RATIONAL_HPP
#define TFR_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tfr {

// Exact arbitrary-precision rational. mpq_class keeps the invariants we
// need (canonical form, positive denominator) on every operation.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline double to_double(const Rational& q) { return q.get_d(); }

// Parses "3", "-2/7" or a finite decimal like "0.125" (converted exactly).
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        Rational q;
        if (q.set_str(text, 10) != 0)
            throw std::invalid_argument("bad rational literal: " + text);
        if (q.get_den() == 0)
            throw std::invalid_argument("zero denominator in: " + text);
        q.canonicalize();
        return q;
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (frac_len == 0 || digits.empty())
        throw std::invalid_argument("bad decimal literal: " + text);
    mpz_class num;
    if (num.set_str(digits, 10) != 0)
        throw std::invalid_argument("bad decimal literal: " + text);
    mpz_class den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) {
    return q.get_str();
}

}  // namespace tfr

#endif
