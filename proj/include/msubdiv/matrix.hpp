#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "msubdiv/rational.hpp"

namespace msubdiv {

/// Dense matrix of exact rationals, row-major.
class RatMatrix {
public:
    RatMatrix() : rows_(0), cols_(0) {}
    RatMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix extent");
    }

    static RatMatrix identity(int n) {
        RatMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = Rational(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Rational& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const Rational& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    bool operator==(const RatMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

    RatMatrix operator*(const RatMatrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
        RatMatrix r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const Rational& v = (*this)(i, k);
                if (v.is_zero()) continue;
                for (int j = 0; j < o.cols_; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }

    RatMatrix operator-(const RatMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("matrix difference shape mismatch");
        RatMatrix r(rows_, cols_);
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
        return r;
    }

    std::vector<Rational> apply(const std::vector<Rational>& v) const {
        if (int(v.size()) != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
        std::vector<Rational> r(rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                if (!(*this)(i, j).is_zero()) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    RatMatrix transpose() const {
        RatMatrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    bool is_zero() const {
        for (const auto& v : a_)
            if (!v.is_zero()) return false;
        return true;
    }

    /// Solves A X = rhs for square nonsingular A.
    static RatMatrix solve(RatMatrix a, RatMatrix rhs) {
        if (a.rows_ != a.cols_ || a.rows_ != rhs.rows_)
            throw std::invalid_argument("solve: shape mismatch");
        const int n = a.rows_, m = rhs.cols_;
        for (int col = 0; col < n; ++col) {
            int piv = -1;
            for (int r = col; r < n; ++r)
                if (!a(r, col).is_zero()) {
                    piv = r;
                    break;
                }
            if (piv < 0) throw std::domain_error("solve: singular matrix");
            a.swap_rows(col, piv);
            rhs.swap_rows(col, piv);
            Rational inv = Rational(1) / a(col, col);
            for (int j = 0; j < n; ++j) a(col, j) *= inv;
            for (int j = 0; j < m; ++j) rhs(col, j) *= inv;
            for (int r = 0; r < n; ++r) {
                if (r == col || a(r, col).is_zero()) continue;
                Rational f = a(r, col);
                for (int j = 0; j < n; ++j) a(r, j) -= f * a(col, j);
                for (int j = 0; j < m; ++j) rhs(r, j) -= f * rhs(col, j);
            }
        }
        return rhs;
    }

    /// Solves B X = rhs where B has full column rank and the system is
    /// consistent (rhs columns lie in the column space of B). Exact; throws
    /// otherwise.
    static RatMatrix solve_full_column_rank(RatMatrix b, RatMatrix rhs) {
        if (b.rows_ != rhs.rows_) throw std::invalid_argument("solve: shape mismatch");
        const int n = b.rows_, k = b.cols_, m = rhs.cols_;
        for (int col = 0; col < k; ++col) {
            int piv = -1;
            for (int r = col; r < n; ++r)
                if (!b(r, col).is_zero()) {
                    piv = r;
                    break;
                }
            if (piv < 0) throw std::domain_error("solve: matrix is column rank deficient");
            b.swap_rows(col, piv);
            rhs.swap_rows(col, piv);
            Rational inv = Rational(1) / b(col, col);
            for (int j = 0; j < k; ++j) b(col, j) *= inv;
            for (int j = 0; j < m; ++j) rhs(col, j) *= inv;
            for (int r = 0; r < n; ++r) {
                if (r == col || b(r, col).is_zero()) continue;
                Rational f = b(r, col);
                for (int j = 0; j < k; ++j) b(r, j) -= f * b(col, j);
                for (int j = 0; j < m; ++j) rhs(r, j) -= f * rhs(col, j);
            }
        }
        for (int r = k; r < n; ++r)
            for (int j = 0; j < m; ++j)
                if (!rhs(r, j).is_zero())
                    throw std::domain_error("solve: inconsistent system (rhs outside column space)");
        RatMatrix x(k, m);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < m; ++j) x(i, j) = rhs(i, j);
        return x;
    }

    bool is_symmetric() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if (!((*this)(i, j) == (*this)(j, i))) return false;
        return true;
    }

    /// Exact positive-definiteness test for a symmetric matrix: Gaussian
    /// elimination without pivoting must produce strictly positive pivots.
    bool positive_definite() const {
        if (!is_symmetric()) throw std::invalid_argument("positive_definite: matrix not symmetric");
        RatMatrix a = *this;
        const int n = rows_;
        for (int k = 0; k < n; ++k) {
            if (a(k, k).sign() <= 0) return false;
            for (int i = k + 1; i < n; ++i) {
                if (a(i, k).is_zero()) continue;
                Rational f = a(i, k) / a(k, k);
                for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            }
        }
        return true;
    }

private:
    void swap_rows(int i, int j) {
        if (i == j) return;
        for (int c = 0; c < cols_; ++c) std::swap((*this)(i, c), (*this)(j, c));
    }

    int rows_, cols_;
    std::vector<Rational> a_;
};

} // namespace msubdiv
