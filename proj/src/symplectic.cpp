#include "magnomech/symplectic.hpp"

namespace magnomech {

MagneticField::MagneticField(int n, VectorMap entries) : n_(n), zero_(false), entries_(std::move(entries)) {
    if (entries_.in_dim() != n || entries_.out_dim() != n * n)
        throw ContractError("MagneticField: entries map must be R^n -> R^{n*n}");
}

MagneticField MagneticField::zero(int n) {
    MagneticField b;
    b.n_ = n;
    b.zero_ = true;
    b.entries_ = VectorMap(n, n * n, [n](auto x) {
        using T = std::decay_t<decltype(x[0])>;
        return std::vector<T>(static_cast<std::size_t>(n) * n, T(0.0));
    });
    return b;
}

MagneticField MagneticField::constant(const Mat& beta) {
    const int n = beta.rows();
    if (beta.cols() != n) throw ContractError("MagneticField: pairing matrix must be square");
    std::vector<double> flat(beta.data());
    MagneticField b(n, VectorMap(n, n * n, [flat](auto x) {
        using T = std::decay_t<decltype(x[0])>;
        std::vector<T> out;
        out.reserve(flat.size());
        for (double v : flat) out.push_back(T(v));
        return out;
    }));
    return b;
}

Mat MagneticField::pairing(std::span<const double> q) const { return pairing_t<double>(q); }

double MagneticField::skewness_residual(std::span<const double> q) const {
    Mat b = pairing(q);
    Mat r = b + b.transposed();
    return max_abs(r);
}

OneFormSection::OneFormSection(int n_, VectorMap g) : n(n_), gammabar(std::move(g)) {
    if (gammabar.in_dim() != n || gammabar.out_dim() != n)
        throw ContractError("OneFormSection: gammabar must be R^n -> R^n");
}

Vec OneFormSection::section_point(std::span<const double> q) const {
    Vec z(q.begin(), q.end());
    Vec p = gammabar(q);
    z.insert(z.end(), p.begin(), p.end());
    return z;
}

Mat symplectic_matrix(const MagneticField& beta, std::span<const double> q) {
    return symplectic_matrix_t<double>(beta, q);
}

double omega_B(const MagneticField& beta, std::span<const double> z, std::span<const double> v,
               std::span<const double> w) {
    const int n = beta.dim();
    if (static_cast<int>(z.size()) != 2 * n || v.size() != z.size() || w.size() != z.size())
        throw ContractError("omega_B: phase dimension mismatch");
    Mat s = symplectic_matrix(beta, z.subspan(0, n));
    Vec sw = s.apply(w);
    return dot(v, sw);
}

Mat exterior_derivative_matrix(const OneFormSection& gamma, const DerivativeEngine& eng,
                               std::span<const double> q) {
    Mat j = eng.jacobian(gamma.gammabar, q);
    Mat a = j.transposed() - j;
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k)
            if (!std::isfinite(a(i, k)))
                throw NumericError("exterior_derivative_matrix: non-finite Jacobian");
    return a;
}

double closedness_residual(const MagneticField& beta, const DerivativeEngine& eng,
                           std::span<const double> q) {
    const int n = beta.dim();
    if (beta.is_zero()) return 0.0;
    // d beta as Jacobian of the flattened entries: grad[(i*n+j)*n + k] = d_k b_ij.
    auto grad = jacobian_flat_t<double>(beta.entries(), eng, q);
    auto d = [&](int k, int i, int j) {
        return grad[(static_cast<std::size_t>(i) * n + j) * n + k];
    };
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                worst = std::max(worst, std::abs(d(k, i, j) + d(i, j, k) + d(j, k, i)));
    return worst;
}

double pullback_two_form(const VectorMap& phase_map, const MagneticField& beta,
                         const DerivativeEngine& eng, std::span<const double> z,
                         std::span<const double> v, std::span<const double> w) {
    const int n = beta.dim();
    if (phase_map.in_dim() != 2 * n || phase_map.out_dim() != 2 * n)
        throw ContractError("pullback_two_form: map must act on phase space");
    Vec image = phase_map(z);
    Mat t = eng.jacobian(phase_map, z);
    Vec tv = t.apply(v);
    Vec tw = t.apply(w);
    return omega_B(beta, image, tv, tw);
}

VectorMap section_as_phase_map(const OneFormSection& gamma) {
    const int n = gamma.n;
    VectorMap g = gamma.gammabar;
    return VectorMap(2 * n, 2 * n, [n, g](auto z) {
        using T = std::decay_t<decltype(z[0])>;
        std::span<const T> q = z.subspan(0, n);
        auto p = g.template operator()<T>(q);
        std::vector<T> out(z.begin(), z.begin() + n);
        out.insert(out.end(), p.begin(), p.end());
        return out;
    });
}

VectorMap section_map(const OneFormSection& gamma) {
    const int n = gamma.n;
    VectorMap g = gamma.gammabar;
    return VectorMap(n, 2 * n, [g](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        auto p = g.template operator()<T>(q);
        std::vector<T> out(q.begin(), q.end());
        out.insert(out.end(), p.begin(), p.end());
        return out;
    });
}

}  // namespace magnomech
