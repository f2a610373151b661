#pragma once

#include <span>

#include "magnomech/derivative.hpp"
#include "magnomech/linalg.hpp"
#include "magnomech/smooth_fn.hpp"

namespace magnomech {

// Closed two-form on Q carried as a skew pairing matrix: B(x, y) = x' beta(q) y.
// The twisted form on phase space is omega^B(v, w) = v' S^B(q) w with
//   S^B = [ -beta  I ]
//         [  -I    0 ]
// in (dq, dp) blocks. With this convention the magnetic Hamiltonian vector
// field comes out as (H_p, -H_q + beta H_p); see magnetic_vf.
class MagneticField {
public:
    MagneticField() = default;
    MagneticField(int n, VectorMap entries);  // entries: R^n -> R^{n*n}, row-major

    static MagneticField zero(int n);
    static MagneticField constant(const Mat& beta);

    int dim() const { return n_; }
    bool is_zero() const { return zero_; }
    const VectorMap& entries() const { return entries_; }

    Mat pairing(std::span<const double> q) const;

    template <class T>
    MatT<T> pairing_t(std::span<const T> q) const {
        auto flat = entries_.operator()<T>(q);
        MatT<T> b(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) b(i, j) = flat[static_cast<std::size_t>(i) * n_ + j];
        return b;
    }

    double skewness_residual(std::span<const double> q) const;

private:
    int n_ = 0;
    bool zero_ = true;
    VectorMap entries_;
};

// One-form section gamma(q) = (q, gammabar(q)); the q-component is structural.
struct OneFormSection {
    int n = 0;
    VectorMap gammabar;  // R^n -> R^n

    OneFormSection() = default;
    OneFormSection(int n_, VectorMap g);

    Vec at(std::span<const double> q) const { return gammabar(q); }

    // Full phase point (q, gammabar(q)).
    Vec section_point(std::span<const double> q) const;
};

// S^B(q) as a 2n x 2n matrix.
Mat symplectic_matrix(const MagneticField& beta, std::span<const double> q);

template <class T>
MatT<T> symplectic_matrix_t(const MagneticField& beta, std::span<const T> q) {
    const int n = static_cast<int>(q.size());
    MatT<T> s(2 * n, 2 * n);
    if (!beta.is_zero()) {
        MatT<T> b = beta.pairing_t<T>(q);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s(i, j) = T(0.0) - b(i, j);
    }
    for (int i = 0; i < n; ++i) {
        s(i, n + i) = T(1.0);
        s(n + i, i) = T(-1.0);
    }
    return s;
}

// omega^B at z evaluated on tangents v, w in R^{2n}.
double omega_B(const MagneticField& beta, std::span<const double> z, std::span<const double> v,
               std::span<const double> w);

// Skew matrix A(q) of the exterior derivative of gamma, paired like beta:
// dgamma(x, y) = x' A(q) y, A = J' - J with J the Jacobian of gammabar.
Mat exterior_derivative_matrix(const OneFormSection& gamma, const DerivativeEngine& eng,
                               std::span<const double> q);

// Max over index triples of the cyclic sum d_k b_ij + d_i b_jk + d_j b_ki.
double closedness_residual(const MagneticField& beta, const DerivativeEngine& eng,
                           std::span<const double> q);

// (phi^* omega^B)(v, w) at z: the form at phi(z) on pushed-forward tangents.
double pullback_two_form(const VectorMap& phase_map, const MagneticField& beta,
                         const DerivativeEngine& eng, std::span<const double> z,
                         std::span<const double> v, std::span<const double> w);

// lambda = gamma . pi_Q as a phase-space map (q, p) -> (q, gammabar(q)).
VectorMap section_as_phase_map(const OneFormSection& gamma);

// gamma itself as a map Q -> T*Q, q -> (q, gammabar(q)).
VectorMap section_map(const OneFormSection& gamma);

}  // namespace magnomech
