#include "magnomech/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace magnomech {

namespace {
constexpr double kDefaultRankTol = 1e-10;

bool finite(const Mat& a) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (!std::isfinite(a(i, j))) return false;
    return true;
}
}  // namespace

Svd svd(const Mat& a) {
    if (!finite(a)) throw NumericError("svd: non-finite input");
    const int m = a.rows();
    const int n = a.cols();
    Mat u = a;
    Mat v = Mat::identity(n);

    // Orthogonalize column pairs until all inner products are negligible.
    const double eps = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    app += u(i, p) * u(i, p);
                    aqq += u(i, q) * u(i, q);
                    apq += u(i, p) * u(i, q);
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (int i = 0; i < m; ++i) {
                    double up = u(i, p), uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (int i = 0; i < n; ++i) {
                    double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    Vec sigma(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += u(i, j) * u(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return sigma[i] > sigma[j]; });

    Svd out;
    out.u = Mat(m, n);
    out.v = Mat(n, n);
    out.sigma.resize(n);
    for (int j = 0; j < n; ++j) {
        int src = order[j];
        out.sigma[j] = sigma[src];
        double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (int i = 0; i < m; ++i) out.u(i, j) = u(i, src) * inv;
        for (int i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    }
    return out;
}

int numerical_rank(const Mat& a, double tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    if (tol <= 0.0) tol = kDefaultRankTol;
    Svd s = svd(a);
    double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
    int r = 0;
    for (double x : s.sigma)
        if (x > tol * smax && x > 0.0) ++r;
    return r;
}

Mat null_space(const Mat& a, double tol) {
    const int n = a.cols();
    if (a.rows() == 0) return Mat::identity(n);  // zero constraints: full space
    if (tol <= 0.0) tol = kDefaultRankTol;
    Svd s = svd(a);
    double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
    int rank = 0;
    for (double x : s.sigma)
        if (x > tol * smax && x > 0.0) ++rank;
    Mat basis(n, n - rank);
    for (int j = rank; j < n; ++j)
        for (int i = 0; i < n; ++i) basis(i, j - rank) = s.v(i, j);
    return basis;
}

Mat orth(const Mat& a, double tol) {
    if (a.cols() == 0 || a.rows() == 0) return Mat(a.rows(), 0);
    if (tol <= 0.0) tol = kDefaultRankTol;
    Svd s = svd(a);
    double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
    int rank = 0;
    for (double x : s.sigma)
        if (x > tol * smax && x > 0.0) ++rank;
    Mat basis(a.rows(), rank);
    for (int j = 0; j < rank; ++j)
        for (int i = 0; i < a.rows(); ++i) basis(i, j) = s.u(i, j);
    return basis;
}

Mat subspace_intersect(const Mat& b1, const Mat& b2, double tol) {
    if (b1.rows() != b2.rows())
        throw ContractError("subspace_intersect: ambient dimensions differ");
    const int d = b1.rows();
    // Annihilator rows of span(b): basis of the orthogonal complement, transposed.
    Mat n1 = null_space(b1.transposed(), tol);
    Mat n2 = null_space(b2.transposed(), tol);
    Mat stacked(n1.cols() + n2.cols(), d);
    for (int j = 0; j < n1.cols(); ++j)
        for (int i = 0; i < d; ++i) stacked(j, i) = n1(i, j);
    for (int j = 0; j < n2.cols(); ++j)
        for (int i = 0; i < d; ++i) stacked(n1.cols() + j, i) = n2(i, j);
    return null_space(stacked, tol);
}

double projection_residual(const Mat& basis, std::span<const double> v) {
    Vec res(v.begin(), v.end());
    for (int j = 0; j < basis.cols(); ++j) {
        double c = 0.0;
        for (int i = 0; i < basis.rows(); ++i) c += basis(i, j) * res[i];
        for (int i = 0; i < basis.rows(); ++i) res[i] -= c * basis(i, j);
    }
    return norm(res);
}

double projection_residual(const Mat& basis, const Mat& m) {
    double worst = 0.0;
    for (int j = 0; j < m.cols(); ++j) worst = std::max(worst, projection_residual(basis, m.col(j)));
    return worst;
}

Mat hstack(const Mat& a, const Mat& b) {
    if (a.cols() == 0) return b;
    if (b.cols() == 0) return a;
    if (a.rows() != b.rows()) throw ContractError("hstack: row counts differ");
    Mat m(a.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
        for (int j = 0; j < b.cols(); ++j) m(i, a.cols() + j) = b(i, j);
    }
    return m;
}

Mat vstack(const Mat& a, const Mat& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) throw ContractError("vstack: column counts differ");
    Mat m(a.rows() + b.rows(), a.cols());
    for (int j = 0; j < a.cols(); ++j) {
        for (int i = 0; i < a.rows(); ++i) m(i, j) = a(i, j);
        for (int i = 0; i < b.rows(); ++i) m(a.rows() + i, j) = b(i, j);
    }
    return m;
}

}  // namespace magnomech
