#ifndef TFR_RFMATRIX_HPP
#define TFR_RFMATRIX_HPP

#include <stdexcept>
#include <vector>

#include "tfr/qmatrix.hpp"
#include "tfr/ratfun.hpp"

namespace tfr {

struct ZeroBaseNegativeExponentError : std::runtime_error {
    ZeroBaseNegativeExponentError()
        : std::runtime_error("zero base raised to a negative exponent") {}
};

// Rectangular matrix over the field of multivariate rational functions.
class RFMatrix {
public:
    RFMatrix() = default;
    RFMatrix(std::size_t rows, std::size_t cols, std::vector<std::string> vars)
        : rows_(rows), cols_(cols), vars_(std::move(vars)),
          data_(rows * cols, RatFun::constant(vars_, Rational(0))) {}

    static RFMatrix identity(std::size_t n, std::vector<std::string> vars) {
        RFMatrix m(n, n, std::move(vars));
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = RatFun::constant(m.vars_, Rational(1));
        return m;
    }
    static RFMatrix from_rational(const QMatrix& q, std::vector<std::string> vars) {
        RFMatrix m(q.rows(), q.cols(), std::move(vars));
        for (std::size_t i = 0; i < q.rows(); ++i)
            for (std::size_t j = 0; j < q.cols(); ++j)
                m(i, j) = RatFun::constant(m.vars_, q(i, j));
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<std::string>& vars() const { return vars_; }
    RatFun& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const RatFun& operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    bool operator==(const RFMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool is_zero() const {
        for (const auto& e : data_)
            if (!e.is_zero()) return false;
        return true;
    }
    bool is_identity() const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                const RatFun& e = (*this)(i, j);
                if (i == j) {
                    if (!e.is_constant() || e.constant_value() != 1) return false;
                } else if (!e.is_zero()) {
                    return false;
                }
            }
        return true;
    }

    RFMatrix transpose() const {
        RFMatrix t(cols_, rows_, vars_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend RFMatrix operator*(const RFMatrix& a, const RFMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape");
        RFMatrix r(a.rows_, b.cols_, a.vars_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a(i, k).is_zero()) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    if (b(k, j).is_zero()) continue;
                    r(i, j) += a(i, k) * b(k, j);
                }
            }
        return r;
    }
    friend RFMatrix operator-(const RFMatrix& a, const RFMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw std::invalid_argument("matrix difference shape");
        RFMatrix r(a.rows_, a.cols_, a.vars_);
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            r.data_[i] = a.data_[i] - b.data_[i];
        return r;
    }

    QMatrix eval(const std::vector<Rational>& point) const {
        QMatrix m(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).eval(point);
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::string> vars_;
    std::vector<RatFun> data_;
};

namespace detail {

inline MultiPoly must_divide(const MultiPoly& a, const MultiPoly& b) {
    auto q = exact_divide(a, b);
    if (!q) throw std::logic_error("fraction-free elimination: inexact division");
    return *q;
}

// Clears denominators row by row, giving a polynomial matrix that is a
// row-rescaling of the input (same rank, same solution sets per row).
inline std::vector<std::vector<MultiPoly>> clear_denominators(const RFMatrix& m) {
    std::vector<std::vector<MultiPoly>> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        MultiPoly lcd = MultiPoly::constant(m.vars(), Rational(1));
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const MultiPoly& d = m(i, j).den();
            MultiPoly g = poly_gcd(lcd, d);
            lcd = *exact_divide(lcd * d, g);
        }
        out[i].reserve(m.cols());
        for (std::size_t j = 0; j < m.cols(); ++j)
            out[i].push_back(m(i, j).num() * *exact_divide(lcd, m(i, j).den()));
    }
    return out;
}

}  // namespace detail

// Generic rank over the rational-function field, by fraction-free
// (Bareiss) elimination on the denominator-cleared matrix.
inline std::size_t rf_rank(const RFMatrix& m) {
    auto a = detail::clear_denominators(m);
    std::size_t rows = m.rows(), cols = m.cols();
    if (rows == 0 || cols == 0) return 0;
    MultiPoly prev = MultiPoly::constant(m.vars(), Rational(1));
    std::size_t rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t sel = row;
        while (sel < rows && a[sel][col].is_zero()) ++sel;
        if (sel == rows) continue;
        std::swap(a[sel], a[row]);
        for (std::size_t i = row + 1; i < rows; ++i) {
            for (std::size_t j = col + 1; j < cols; ++j)
                a[i][j] = detail::must_divide(a[i][j] * a[row][col] - a[i][col] * a[row][j], prev);
            a[i][col] = MultiPoly(m.vars());
        }
        prev = a[row][col];
        ++row;
        ++rank;
    }
    return rank;
}

// Exact solution X of A X = b over the rational-function field.
// Fraction-free forward elimination, then back substitution.
inline RFMatrix rf_solve_linear(const RFMatrix& A, const RFMatrix& b) {
    if (A.rows() != A.cols()) throw std::invalid_argument("rf_solve_linear: square A required");
    if (b.rows() != A.rows()) throw std::invalid_argument("rf_solve_linear: rhs shape");
    std::size_t n = A.rows(), k = b.cols();
    RFMatrix aug(n, n + k, A.vars());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = A(i, j);
        for (std::size_t j = 0; j < k; ++j) aug(i, n + j) = b(i, j);
    }
    auto a = detail::clear_denominators(aug);
    MultiPoly prev = MultiPoly::constant(A.vars(), Rational(1));
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t sel = col;
        while (sel < n && a[sel][col].is_zero()) ++sel;
        if (sel == n) throw SingularMatrixError{};
        std::swap(a[sel], a[col]);
        for (std::size_t i = col + 1; i < n; ++i) {
            for (std::size_t j = col + 1; j < n + k; ++j)
                a[i][j] = detail::must_divide(a[i][j] * a[col][col] - a[i][col] * a[col][j], prev);
            a[i][col] = MultiPoly(A.vars());
        }
        prev = a[col][col];
    }
    RFMatrix x(n, k, A.vars());
    for (std::size_t col = 0; col < k; ++col) {
        for (std::size_t i = n; i-- > 0;) {
            RatFun acc(a[i][n + col]);
            for (std::size_t j = i + 1; j < n; ++j)
                acc -= RatFun(a[i][j]) * x(j, col);
            x(i, col) = acc / RatFun(a[i][i]);
        }
    }
    return x;
}

// Componentwise (Hadamard) product.
template <typename T>
std::vector<T> hadamard(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hadamard: length mismatch");
    std::vector<T> r;
    r.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(a[i] * b[i]);
    return r;
}

// x^M with columns of M as exponent vectors: component l is prod_i x_i^{M(i,l)}.
inline std::vector<RatFun> monomial_pow(const std::vector<RatFun>& x, const QMatrix& M) {
    if (x.size() != M.rows()) throw std::invalid_argument("monomial_pow: base length");
    std::vector<std::string> vars = x.empty() ? std::vector<std::string>{} : x[0].vars();
    std::vector<RatFun> out;
    out.reserve(M.cols());
    for (std::size_t l = 0; l < M.cols(); ++l) {
        RatFun t = RatFun::constant(vars, Rational(1));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Rational& e = M(i, l);
            if (e == 0) continue;
            if (!is_integer(e))
                throw std::invalid_argument("monomial_pow: non-integer exponent");
            long ei = static_cast<long>(e.get_num().get_si());
            if (ei < 0 && x[i].is_zero()) throw ZeroBaseNegativeExponentError{};
            t *= x[i].pow(ei);
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace tfr

#endif
