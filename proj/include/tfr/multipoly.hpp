#ifndef TFR_MULTIPOLY_HPP
#define TFR_MULTIPOLY_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfr/rational.hpp"

namespace tfr {

// Graded lexicographic order on exponent vectors (total degree first,
// then lex with the model's variable order). Used for canonical term
// ordering and deterministic printing.
struct GrlexLess {
    bool operator()(const std::vector<int>& a, const std::vector<int>& b) const {
        long da = std::accumulate(a.begin(), a.end(), 0L);
        long db = std::accumulate(b.begin(), b.end(), 0L);
        if (da != db) return da < db;
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

// Multivariate polynomial with exact rational coefficients over a fixed,
// ordered variable list. Zero coefficients are never stored.
class MultiPoly {
public:
    using TermMap = std::map<std::vector<int>, Rational, GrlexLess>;

    MultiPoly() = default;
    explicit MultiPoly(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    static MultiPoly constant(std::vector<std::string> vars, const Rational& c) {
        MultiPoly p(std::move(vars));
        if (c != 0) p.terms_[std::vector<int>(p.vars_.size(), 0)] = c;
        return p;
    }
    static MultiPoly variable(std::vector<std::string> vars, std::size_t i) {
        MultiPoly p(std::move(vars));
        if (i >= p.vars_.size()) throw std::out_of_range("variable index");
        std::vector<int> e(p.vars_.size(), 0);
        e[i] = 1;
        p.terms_[e] = Rational(1);
        return p;
    }
    static MultiPoly monomial(std::vector<std::string> vars,
                              const std::vector<int>& exps, const Rational& c) {
        MultiPoly p(std::move(vars));
        if (exps.size() != p.vars_.size()) throw std::invalid_argument("exponent length");
        for (int e : exps)
            if (e < 0) throw std::invalid_argument("negative exponent in monomial");
        if (c != 0) p.terms_[exps] = c;
        return p;
    }

    const std::vector<std::string>& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() ||
               (terms_.size() == 1 && total_degree() == 0);
    }
    Rational constant_value() const {
        if (terms_.empty()) return Rational(0);
        if (!is_constant()) throw std::logic_error("not a constant polynomial");
        return terms_.begin()->second;
    }
    std::size_t term_count() const { return terms_.size(); }

    long total_degree() const {
        long d = 0;
        for (const auto& [e, c] : terms_)
            d = std::max(d, std::accumulate(e.begin(), e.end(), 0L));
        return d;
    }
    int degree_in(std::size_t var) const {
        int d = -1;  // -1 for the zero polynomial
        for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
        return d;
    }

    // Leading term under grlex.
    const std::pair<const std::vector<int>, Rational>& leading() const {
        if (terms_.empty()) throw std::logic_error("leading term of zero");
        return *terms_.rbegin();
    }

    void add_term(const std::vector<int>& exps, const Rational& c) {
        if (exps.size() != vars_.size()) throw std::invalid_argument("exponent length");
        auto it = terms_.find(exps);
        if (it == terms_.end()) {
            if (c != 0) terms_[exps] = c;
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    MultiPoly& operator+=(const MultiPoly& o) {
        check_vars(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        check_vars(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
    friend MultiPoly operator-(const MultiPoly& a) {
        MultiPoly r(a.vars_);
        for (const auto& [e, c] : a.terms_) r.terms_[e] = -c;
        return r;
    }
    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.check_vars(b);
        MultiPoly r(a.vars_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                std::vector<int> e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }
    MultiPoly& operator*=(const Rational& c) {
        if (c == 0) { terms_.clear(); return *this; }
        for (auto& [e, v] : terms_) v *= c;
        return *this;
    }
    friend MultiPoly operator*(MultiPoly a, const Rational& c) { return a *= c; }
    friend MultiPoly operator*(const Rational& c, MultiPoly a) { return a *= c; }

    MultiPoly pow(long n) const {
        if (n < 0) throw std::invalid_argument("negative power of a polynomial");
        MultiPoly r = constant(vars_, Rational(1));
        MultiPoly base = *this;
        while (n > 0) {
            if (n & 1) r *= base;
            base *= base;
            n >>= 1;
        }
        return r;
    }

    bool operator==(const MultiPoly& o) const {
        return vars_ == o.vars_ && terms_ == o.terms_;
    }
    bool operator!=(const MultiPoly& o) const { return !(*this == o); }

    Rational eval(const std::vector<Rational>& point) const {
        if (point.size() != vars_.size()) throw std::invalid_argument("point length");
        Rational acc(0);
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int j = 0; j < e[i]; ++j) t *= point[i];
            acc += t;
        }
        return acc;
    }
    double eval_d(const std::vector<double>& point) const {
        double acc = 0;
        for (const auto& [e, c] : terms_) {
            double t = to_double(c);
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int j = 0; j < e[i]; ++j) t *= point[i];
            acc += t;
        }
        return acc;
    }

    MultiPoly derivative(std::size_t var) const {
        MultiPoly r(vars_);
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0) continue;
            std::vector<int> d = e;
            d[var] -= 1;
            r.add_term(d, c * Rational(e[var]));
        }
        return r;
    }

    void check_vars(const MultiPoly& o) const {
        if (vars_ != o.vars_) throw std::invalid_argument("variable context mismatch");
    }

    std::string str() const;

private:
    std::vector<std::string> vars_;
    TermMap terms_;
};

// ---------------------------------------------------------------------------
// Exact division and multivariate gcd (primitive PRS).

// Quotient of p by d when the division is exact; nullopt otherwise.
inline std::optional<MultiPoly> exact_divide(const MultiPoly& p, const MultiPoly& d) {
    p.check_vars(d);
    if (d.is_zero()) throw std::invalid_argument("division by zero polynomial");
    MultiPoly rem = p;
    MultiPoly quot(p.vars());
    const auto& [lde, ldc] = d.leading();
    while (!rem.is_zero()) {
        const auto& [lre, lrc] = rem.leading();
        std::vector<int> e(lre.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            e[i] = lre[i] - lde[i];
            if (e[i] < 0) return std::nullopt;
        }
        Rational c = lrc / ldc;
        MultiPoly m = MultiPoly::monomial(p.vars(), e, c);
        quot += m;
        rem -= m * d;
    }
    return quot;
}

// Positive rational c such that p/c has coprime integer coefficients.
inline Rational poly_content(const MultiPoly& p) {
    if (p.is_zero()) return Rational(0);
    mpz_class num_gcd = 0, den_lcm = 1;
    for (const auto& [e, c] : p.terms()) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    }
    Rational c(num_gcd, den_lcm);
    c.canonicalize();
    return c;
}

namespace detail {

// View p as univariate in `var` with MultiPoly coefficients.
inline std::map<int, MultiPoly> univariate_view(const MultiPoly& p, std::size_t var) {
    std::map<int, MultiPoly> coeffs;
    for (const auto& [e, c] : p.terms()) {
        std::vector<int> rest = e;
        int d = rest[var];
        rest[var] = 0;
        auto it = coeffs.find(d);
        if (it == coeffs.end()) it = coeffs.emplace(d, MultiPoly(p.vars())).first;
        it->second.add_term(rest, c);
    }
    return coeffs;
}

inline MultiPoly from_univariate(const std::map<int, MultiPoly>& coeffs,
                                 std::size_t var, const std::vector<std::string>& vars) {
    MultiPoly r(vars);
    for (const auto& [d, c] : coeffs)
        for (const auto& [e, v] : c.terms()) {
            std::vector<int> ee = e;
            ee[var] += d;
            r.add_term(ee, v);
        }
    return r;
}

}  // namespace detail

MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b);

namespace detail {

// gcd of the coefficient polynomials of a univariate view.
inline MultiPoly coeff_gcd(const std::map<int, MultiPoly>& coeffs,
                           const std::vector<std::string>& vars) {
    MultiPoly g(vars);
    for (const auto& [d, c] : coeffs) g = poly_gcd(g, c);
    return g;
}

// Pseudo-remainder of a by b, both univariate in `var`.
inline MultiPoly pseudo_rem(MultiPoly a, const MultiPoly& b, std::size_t var) {
    int db = b.degree_in(var);
    auto bview = univariate_view(b, var);
    const MultiPoly& lcb = bview.rbegin()->second;
    while (true) {
        int da = a.degree_in(var);
        if (da < db || a.is_zero()) return a;
        auto aview = univariate_view(a, var);
        const MultiPoly lca = aview.rbegin()->second;
        // a <- lcb * a - lca * x^(da-db) * b
        MultiPoly shift = MultiPoly::monomial(
            a.vars(), [&] { std::vector<int> e(a.vars().size(), 0); e[var] = da - db; return e; }(),
            Rational(1));
        a = lcb * a - lca * shift * b;
    }
}

}  // namespace detail

// Multivariate gcd over Q via primitive PRS, normalized to primitive
// integer coefficients with positive leading coefficient.
inline MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b) {
    if (a.is_zero() && b.is_zero()) return a;
    auto normalize = [](MultiPoly p) {
        Rational c = poly_content(p);
        if (c != 0) {
            auto q = exact_divide(p, MultiPoly::constant(p.vars(), c));
            p = *q;
        }
        if (!p.is_zero() && p.leading().second < 0) p = -p;
        return p;
    };
    if (a.is_zero()) return normalize(b);
    if (b.is_zero()) return normalize(a);

    // Pick the last variable that actually occurs.
    std::size_t nv = a.vars().size();
    std::optional<std::size_t> main_var;
    for (std::size_t i = nv; i-- > 0;) {
        if (a.degree_in(i) > 0 || b.degree_in(i) > 0) { main_var = i; break; }
    }
    if (!main_var) return MultiPoly::constant(a.vars(), Rational(1));  // both constants

    std::size_t v = *main_var;
    auto av = detail::univariate_view(a, v);
    auto bv = detail::univariate_view(b, v);
    MultiPoly cont_a = detail::coeff_gcd(av, a.vars());
    MultiPoly cont_b = detail::coeff_gcd(bv, a.vars());
    MultiPoly cont = poly_gcd(cont_a, cont_b);

    MultiPoly p = *exact_divide(a, cont_a);
    MultiPoly q = *exact_divide(b, cont_b);
    if (p.degree_in(v) < q.degree_in(v)) std::swap(p, q);
    while (!q.is_zero()) {
        MultiPoly r = detail::pseudo_rem(p, q, v);
        p = std::move(q);
        if (!r.is_zero()) {
            auto rv = detail::univariate_view(r, v);
            r = *exact_divide(r, detail::coeff_gcd(rv, r.vars()));
        }
        q = std::move(r);
    }
    if (p.degree_in(v) == 0) return normalize(cont);
    auto pv = detail::univariate_view(p, v);
    p = *exact_divide(p, detail::coeff_gcd(pv, p.vars()));
    return normalize(cont * p);
}

// ---------------------------------------------------------------------------
// Printing: terms in decreasing grlex order, coefficients exact.

inline std::string MultiPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        Rational ac = c < 0 ? Rational(-c) : c;
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        bool has_var = std::any_of(e.begin(), e.end(), [](int x) { return x > 0; });
        if (ac != 1 || !has_var) {
            os << to_string(ac);
            if (has_var) os << "*";
        }
        bool fv = true;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (!fv) os << "*";
            fv = false;
            os << vars_[i];
            if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
}

}  // namespace tfr

#endif
