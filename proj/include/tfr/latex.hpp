#ifndef TFR_LATEX_HPP
#define TFR_LATEX_HPP

#include <algorithm>
#include <sstream>
#include <string>

#include "tfr/ratfun.hpp"

namespace tfr {

// v12 -> v_{12}, X1 -> X_{1}; names without a trailing index are kept as-is.
inline std::string latex_var(const std::string& name) {
    std::size_t i = name.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(name[i - 1]))) --i;
    if (i == name.size() || i == 0) return name;
    return name.substr(0, i) + "_{" + name.substr(i) + "}";
}

inline std::string latex_rational(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    std::string sign = q < 0 ? "-" : "";
    mpz_class num = abs(q.get_num());
    return sign + "\\frac{" + num.get_str() + "}{" + q.get_den().get_str() + "}";
}

inline std::string latex(const MultiPoly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        const auto& [e, c] = *it;
        Rational ac = c < 0 ? Rational(-c) : c;
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        bool has_var = std::any_of(e.begin(), e.end(), [](int x) { return x > 0; });
        bool printed = false;
        if (ac != 1 || !has_var) {
            os << latex_rational(ac);
            printed = true;
        }
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (printed) os << " ";
            printed = true;
            os << latex_var(p.vars()[i]);
            if (e[i] > 1) os << "^{" << e[i] << "}";
        }
    }
    return os.str();
}

inline std::string latex(const RatFun& f) {
    if (f.num().is_zero()) return "0";
    if (f.den().is_constant() && f.den().constant_value() == 1) return latex(f.num());
    return "\\frac{" + latex(f.num()) + "}{" + latex(f.den()) + "}";
}

}  // namespace tfr

#endif
