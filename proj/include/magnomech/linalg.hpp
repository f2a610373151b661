#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "magnomech/dual.hpp"
#include "magnomech/errors.hpp"

namespace magnomech {

using Vec = std::vector<double>;

// Dense row-major matrix over any scalar (double or a dual level). Only the
// small-and-dense regime matters here; everything is O(n^3) with tiny n.
template <class T>
class MatT {
public:
    MatT() = default;
    MatT(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, T(0.0)) {}
    MatT(std::initializer_list<std::initializer_list<double>> rows) {
        r_ = static_cast<int>(rows.size());
        c_ = r_ ? static_cast<int>(rows.begin()->size()) : 0;
        a_.reserve(static_cast<std::size_t>(r_) * c_);
        for (const auto& row : rows)
            for (double x : row) a_.push_back(T(x));
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    T& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    const T& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }

    static MatT identity(int n) {
        MatT m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1.0);
        return m;
    }

    static MatT zero(int rows, int cols) { return MatT(rows, cols); }

    MatT transposed() const {
        MatT m(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    std::vector<T> col(int j) const {
        std::vector<T> v(r_);
        for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    void set_col(int j, std::span<const T> v) {
        for (int i = 0; i < r_; ++i) (*this)(i, j) = v[i];
    }

    friend MatT operator+(const MatT& a, const MatT& b) {
        MatT m(a.r_, a.c_);
        for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = a.a_[k] + b.a_[k];
        return m;
    }
    friend MatT operator-(const MatT& a, const MatT& b) {
        MatT m(a.r_, a.c_);
        for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = a.a_[k] - b.a_[k];
        return m;
    }
    friend MatT operator*(double s, const MatT& a) {
        MatT m(a.r_, a.c_);
        for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = T(s) * a.a_[k];
        return m;
    }
    friend MatT operator*(const MatT& a, const MatT& b) {
        MatT m(a.r_, b.c_);
        for (int i = 0; i < a.r_; ++i)
            for (int k = 0; k < a.c_; ++k) {
                const T& aik = a(i, k);
                for (int j = 0; j < b.c_; ++j) m(i, j) = m(i, j) + aik * b(k, j);
            }
        return m;
    }

    std::vector<T> apply(std::span<const T> x) const {
        std::vector<T> y(r_, T(0.0));
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) y[i] = y[i] + (*this)(i, j) * x[j];
        return y;
    }

    const std::vector<T>& data() const { return a_; }

private:
    int r_ = 0, c_ = 0;
    std::vector<T> a_;
};

using Mat = MatT<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const Mat& a) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(double s, std::span<const double> a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline bool all_finite(std::span<const double> a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

// LU with partial pivoting, in place, generic over the scalar. Pivot choice
// compares |primal| so dual perturbations never steer the factorization.
template <class T>
std::vector<T> lu_solve(MatT<T> a, std::vector<T> b) {
    const int n = a.rows();
    if (a.cols() != n || static_cast<int>(b.size()) != n)
        throw ContractError("lu_solve: square system expected");
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = pivot_abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            double m = pivot_abs(a(i, k));
            if (m > best) { best = m; piv = i; }
        }
        if (best == 0.0) throw DegeneracyError("lu_solve: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            T f = a(i, k) / a(k, k);
            a(i, k) = f;
            for (int j = k + 1; j < n; ++j) a(i, j) = a(i, j) - f * a(k, j);
            b[i] = b[i] - f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        T s = b[i];
        for (int j = i + 1; j < n; ++j) s = s - a(i, j) * b[j];
        b[i] = s / a(i, i);
    }
    return b;
}

template <class T>
MatT<T> lu_inverse(const MatT<T>& a) {
    const int n = a.rows();
    MatT<T> inv(n, n);
    for (int j = 0; j < n; ++j) {
        std::vector<T> e(n, T(0.0));
        e[j] = T(1.0);
        auto col = lu_solve(a, std::move(e));
        inv.set_col(j, col);
    }
    return inv;
}

struct Svd {
    Mat u;       // m x r, orthonormal columns
    Vec sigma;   // r values, descending
    Mat v;       // n x r, orthonormal columns
};

// One-sided Jacobi SVD. Fine for the tiny well-conditioned matrices that
// arise from frames and constraint stacks.
Svd svd(const Mat& a);

// Orthonormal basis of the null space; singular values below tol*sigma_max
// count as zero. tol <= 0 selects the default relative cutoff 1e-10.
Mat null_space(const Mat& a, double tol = -1.0);

// Orthonormal basis of the column span (rank-revealing).
Mat orth(const Mat& a, double tol = -1.0);

int numerical_rank(const Mat& a, double tol = -1.0);

// Orthonormal basis of span(b1) ∩ span(b2), computed as the null space of the
// stacked annihilators of the two spans.
Mat subspace_intersect(const Mat& b1, const Mat& b2, double tol = -1.0);

// Euclidean residual of v against span(basis) with orthonormal basis columns.
double projection_residual(const Mat& basis, std::span<const double> v);

// Max such residual over the columns of m.
double projection_residual(const Mat& basis, const Mat& m);

Mat hstack(const Mat& a, const Mat& b);
Mat vstack(const Mat& a, const Mat& b);

}  // namespace magnomech
