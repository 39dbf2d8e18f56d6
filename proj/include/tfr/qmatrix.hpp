#ifndef TFR_QMATRIX_HPP
#define TFR_QMATRIX_HPP

#include <stdexcept>
#include <vector>

#include "tfr/rational.hpp"

namespace tfr {

struct SingularMatrixError : std::runtime_error {
    SingularMatrixError() : std::runtime_error("singular matrix") {}
};

// Dense matrix over the exact rationals.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

    static QMatrix identity(std::size_t n) {
        QMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    bool operator==(const QMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    QMatrix transpose() const {
        QMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend QMatrix operator*(const QMatrix& a, const QMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape");
        QMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    r(i, j) += a(i, k) * b(k, j);
            }
        return r;
    }
    friend QMatrix operator-(const QMatrix& a, const QMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw std::invalid_argument("matrix difference shape");
        QMatrix r(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] - b.data_[i];
        return r;
    }

    bool is_zero() const {
        for (const auto& v : data_)
            if (v != 0) return false;
        return true;
    }

    // Reduced row echelon form in place; returns pivot columns.
    std::vector<std::size_t> rref() {
        std::vector<std::size_t> pivots;
        std::size_t row = 0;
        for (std::size_t col = 0; col < cols_ && row < rows_; ++col) {
            std::size_t sel = row;
            while (sel < rows_ && (*this)(sel, col) == 0) ++sel;
            if (sel == rows_) continue;
            if (sel != row)
                for (std::size_t j = 0; j < cols_; ++j)
                    std::swap((*this)(sel, j), (*this)(row, j));
            Rational p = (*this)(row, col);
            for (std::size_t j = 0; j < cols_; ++j) (*this)(row, j) /= p;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i == row || (*this)(i, col) == 0) continue;
                Rational f = (*this)(i, col);
                for (std::size_t j = 0; j < cols_; ++j)
                    (*this)(i, j) -= f * (*this)(row, j);
            }
            pivots.push_back(col);
            ++row;
        }
        return pivots;
    }

    std::size_t rank() const {
        QMatrix c = *this;
        return c.rref().size();
    }

    QMatrix inverse() const {
        if (rows_ != cols_) throw std::invalid_argument("inverse of non-square matrix");
        QMatrix aug(rows_, 2 * cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) aug(i, j) = (*this)(i, j);
            aug(i, cols_ + i) = 1;
        }
        auto piv = aug.rref();
        // all pivots must land in the left block, one per column
        if (piv.size() < rows_) throw SingularMatrixError{};
        for (std::size_t i = 0; i < rows_; ++i)
            if (piv[i] != i) throw SingularMatrixError{};
        QMatrix inv(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) inv(i, j) = aug(i, cols_ + j);
        return inv;
    }

    // Basis of the left kernel {y : y A = 0}, canonicalized: RREF over Q,
    // each row scaled to coprime integers with positive pivot.
    QMatrix left_kernel() const {
        QMatrix t = transpose();  // kernel of A^T as row vectors
        QMatrix work = t;
        auto pivots = work.rref();
        std::vector<bool> is_pivot(t.cols_, false);
        for (auto c : pivots) is_pivot[c] = true;
        std::vector<std::size_t> free_cols;
        for (std::size_t c = 0; c < t.cols_; ++c)
            if (!is_pivot[c]) free_cols.push_back(c);
        QMatrix basis(free_cols.size(), t.cols_);
        for (std::size_t k = 0; k < free_cols.size(); ++k) {
            basis(k, free_cols[k]) = 1;
            for (std::size_t pi = 0; pi < pivots.size(); ++pi)
                basis(k, pivots[pi]) = -work(pi, free_cols[k]);
        }
        basis.rref();
        basis.scale_rows_primitive();
        return basis;
    }

    // Scale every row to coprime integer entries with the first nonzero
    // entry positive.
    void scale_rows_primitive() {
        for (std::size_t i = 0; i < rows_; ++i) {
            mpz_class den_lcm = 1, num_gcd = 0;
            for (std::size_t j = 0; j < cols_; ++j) {
                const Rational& v = (*this)(i, j);
                if (v == 0) continue;
                mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), v.get_den().get_mpz_t());
                mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), v.get_num().get_mpz_t());
            }
            if (num_gcd == 0) continue;
            Rational scale(den_lcm, num_gcd);
            scale.canonicalize();
            if (scale < 0) scale = -scale;
            bool sign_fixed = false;
            for (std::size_t j = 0; j < cols_; ++j) {
                Rational& v = (*this)(i, j);
                if (v == 0) continue;
                if (!sign_fixed) {
                    if (v < 0) scale = -scale;
                    sign_fixed = true;
                }
                v *= scale;
            }
        }
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Rational> data_;
};

}  // namespace tfr

#endif
