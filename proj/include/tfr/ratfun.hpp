#ifndef TFR_RATFUN_HPP
#define TFR_RATFUN_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "tfr/multipoly.hpp"

namespace tfr {

struct ZeroDenominatorError : std::runtime_error {
    ZeroDenominatorError() : std::runtime_error("rational function with zero denominator") {}
};

// Rational function num/den in canonical form: gcd cancelled, integer
// coefficients with common content removed, leading coefficient of the
// denominator (grlex) positive. Equal values have equal representations.
class RatFun {
public:
    RatFun() = default;
    explicit RatFun(MultiPoly num)
        : num_(std::move(num)), den_(MultiPoly::constant(num_.vars(), Rational(1))) {
        normalize();
    }
    RatFun(MultiPoly num, MultiPoly den) : num_(std::move(num)), den_(std::move(den)) {
        num_.check_vars(den_);
        normalize();
    }
    static RatFun constant(std::vector<std::string> vars, const Rational& c) {
        return RatFun(MultiPoly::constant(std::move(vars), c));
    }
    static RatFun variable(std::vector<std::string> vars, std::size_t i) {
        return RatFun(MultiPoly::variable(std::move(vars), i));
    }

    const MultiPoly& num() const { return num_; }
    const MultiPoly& den() const { return den_; }
    const std::vector<std::string>& vars() const { return num_.vars(); }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.is_constant(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const {
        return num_.constant_value() / den_.constant_value();
    }

    friend RatFun operator+(const RatFun& a, const RatFun& b) {
        return RatFun(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFun operator-(const RatFun& a, const RatFun& b) {
        return RatFun(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFun operator-(const RatFun& a) {
        RatFun r = a;
        r.num_ = -r.num_;
        return r;
    }
    friend RatFun operator*(const RatFun& a, const RatFun& b) {
        return RatFun(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RatFun operator/(const RatFun& a, const RatFun& b) {
        if (b.is_zero()) throw ZeroDenominatorError{};
        return RatFun(a.num_ * b.den_, a.den_ * b.num_);
    }
    RatFun& operator+=(const RatFun& o) { return *this = *this + o; }
    RatFun& operator-=(const RatFun& o) { return *this = *this - o; }
    RatFun& operator*=(const RatFun& o) { return *this = *this * o; }
    RatFun& operator/=(const RatFun& o) { return *this = *this / o; }

    RatFun pow(long n) const {
        if (n >= 0) return RatFun(num_.pow(n), den_.pow(n));
        if (num_.is_zero()) throw ZeroDenominatorError{};
        return RatFun(den_.pow(-n), num_.pow(-n));
    }

    bool operator==(const RatFun& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const RatFun& o) const { return !(*this == o); }

    Rational eval(const std::vector<Rational>& point) const {
        Rational d = den_.eval(point);
        if (d == 0) throw ZeroDenominatorError{};
        return num_.eval(point) / d;
    }
    double eval_d(const std::vector<double>& point) const {
        return num_.eval_d(point) / den_.eval_d(point);
    }

    RatFun derivative(std::size_t var) const {
        return RatFun(num_.derivative(var) * den_ - num_ * den_.derivative(var),
                      den_ * den_);
    }

    std::string str() const {
        if (den_.is_constant() && den_.constant_value() == 1) return num_.str();
        std::string n = num_.str(), d = den_.str();
        if (num_.term_count() > 1) n = "(" + n + ")";
        if (d.find_first_of("* ") != std::string::npos) d = "(" + d + ")";
        return n + "/" + d;
    }

private:
    void normalize() {
        if (den_.is_zero()) throw ZeroDenominatorError{};
        if (num_.is_zero()) {
            den_ = MultiPoly::constant(num_.vars(), Rational(1));
            return;
        }
        MultiPoly g = poly_gcd(num_, den_);
        if (!g.is_constant() || g.constant_value() != 1) {
            num_ = *exact_divide(num_, g);
            den_ = *exact_divide(den_, g);
        }
        Rational cn = poly_content(num_), cd = poly_content(den_);
        // common content: cn/cd in lowest terms, pushed into the numerator
        mpz_class g2;
        mpz_gcd(g2.get_mpz_t(), cn.get_num().get_mpz_t(), cd.get_num().get_mpz_t());
        mpz_class l2;
        mpz_lcm(l2.get_mpz_t(), cn.get_den().get_mpz_t(), cd.get_den().get_mpz_t());
        Rational scale(l2, g2);
        scale.canonicalize();
        num_ *= scale;
        den_ *= scale;
        if (den_.leading().second < 0) {
            num_ = -num_;
            den_ = -den_;
        }
    }

    MultiPoly num_, den_;
};

// Substitute rational functions for the variables of a polynomial.
inline RatFun poly_subst(const MultiPoly& p, const std::vector<RatFun>& values) {
    if (values.size() != p.vars().size())
        throw std::invalid_argument("substitution arity mismatch");
    std::vector<std::string> tvars =
        values.empty() ? std::vector<std::string>{} : values[0].vars();
    RatFun acc = RatFun::constant(tvars, Rational(0));
    for (const auto& [e, c] : p.terms()) {
        RatFun t = RatFun::constant(tvars, c);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] != 0) t *= values[i].pow(e[i]);
        acc += t;
    }
    return acc;
}

inline RatFun ratfun_subst(const RatFun& f, const std::vector<RatFun>& values) {
    return poly_subst(f.num(), values) / poly_subst(f.den(), values);
}

}  // namespace tfr

#endif
