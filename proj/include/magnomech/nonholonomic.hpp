#pragma once

#include "magnomech/hamilton_jacobi.hpp"

namespace magnomech {

// Pfaffian constraints A(q) qdot = 0; the distribution is D_q = ker A(q).
struct PfaffianDistribution {
    int n = 0;
    int k = 0;
    VectorMap rows_map;  // R^n -> R^{k*n}, row-major constraint rows

    PfaffianDistribution() = default;
    PfaffianDistribution(int n_, int k_, VectorMap rows);

    Mat rows(std::span<const double> q) const { return rows_t<double>(q); }

    template <class T>
    MatT<T> rows_t(std::span<const T> q) const {
        auto flat = rows_map.operator()<T>(q);
        MatT<T> a(k, n);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = flat[static_cast<std::size_t>(i) * n + j];
        return a;
    }

    // Orthonormal basis of D_q.
    Mat kernel_basis(std::span<const double> q) const;
};

// L = 1/2 qdot' M(q) qdot - V(q). SPD mass keeps the constrained Legendre
// data nondegenerate, so D-regularity holds by construction.
struct MechanicalLagrangian {
    int n = 0;
    VectorMap mass;        // R^n -> R^{n*n}
    ScalarField potential;  // R^n -> R

    MechanicalLagrangian() = default;
    MechanicalLagrangian(int n_, VectorMap m, ScalarField v);

    Mat mass_at(std::span<const double> q) const { return mass_t<double>(q); }

    template <class T>
    MatT<T> mass_t(std::span<const T> q) const {
        auto flat = mass.operator()<T>(q);
        MatT<T> m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = flat[static_cast<std::size_t>(i) * n + j];
        return m;
    }

    // H(q, p) = 1/2 p' M(q)^{-1} p + V(q).
    ScalarField induced_hamiltonian() const;

    // Throws DegeneracyError unless M(q) is symmetric positive definite.
    void require_spd(std::span<const double> q) const;
};

struct NonholonomicCmhSystem {
    CmhSystem sys;
    MechanicalLagrangian lagrangian;
    PfaffianDistribution dist;

    NonholonomicCmhSystem() = default;
    // H derived from the Lagrangian unless an override is supplied.
    NonholonomicCmhSystem(MechanicalLagrangian lag, PfaffianDistribution d, MagneticField beta,
                          std::optional<FiberMap> force = std::nullopt,
                          std::optional<FiberMap> control = std::nullopt,
                          std::optional<ScalarField> h_override = std::nullopt,
                          DerivativeEngine eng = DerivativeEngine::dual());

    int n() const { return sys.n; }
    int k() const { return dist.k; }

    // c(q, p) = A(q) M(q)^{-1} p as a differentiable map.
    const VectorMap& constraint_map() const { return cmap_; }

private:
    VectorMap cmap_;
};

// Momentum residuals c(z); the zero set is M = FL(D).
Vec constraint_functions(const NonholonomicCmhSystem& nh, std::span<const double> z);

template <class T>
std::vector<T> project_to_M_t(const NonholonomicCmhSystem& nh, std::span<const T> z) {
    const int n = nh.n();
    const int k = nh.k();
    std::vector<T> out(z.begin(), z.end());
    if (k == 0) return out;
    std::span<const T> q = z.subspan(0, n);
    MatT<T> a = nh.dist.rows_t<T>(q);
    MatT<T> m = nh.lagrangian.mass_t<T>(q);
    MatT<T> minv_at = lu_inverse(m);
    MatT<T> c = a * minv_at;  // k x n
    std::vector<T> cp(k, T(0.0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) cp[i] = cp[i] + c(i, j) * z[n + j];
    MatT<T> g = c * m * c.transposed();  // = A M^{-1} A'
    auto mu = lu_solve(g, cp);
    // p' = p - M C' mu: minimal momentum change in the M^{-1} metric
    MatT<T> mct = m * c.transposed();
    for (int i = 0; i < n; ++i) {
        T d(0.0);
        for (int j = 0; j < k; ++j) d = d + mct(i, j) * mu[j];
        out[n + i] = out[n + i] - d;
    }
    return out;
}

Vec project_to_M(const NonholonomicCmhSystem& nh, std::span<const double> z);

// Per-point bases for TM, F, K = F cap TM plus the projector onto K along
// the omega^B-orthogonal complement K^perp.
struct ConstraintFrame {
    Vec z;
    bool magnetic = true;
    Mat s;  // S^B(q), or the canonical S when magnetic == false
    Mat basis_TM, basis_F, basis_K, basis_Kperp;
    Mat tau;  // 2n x 2n projector, range K, kernel K^perp
    bool admissible = false;
    bool compatible = false;
    double membership_residual = 0.0;

    Vec project(std::span<const double> v) const { return tau.apply(v); }
};

ConstraintFrame frame_at(const NonholonomicCmhSystem& nh, std::span<const double> z,
                         bool magnetic = true);

// Gram-system solve of the restricted equation on K.
Vec distributional_vf(const NonholonomicCmhSystem& nh, const ConstraintFrame& frame);

// Saddle-system route: X in TM with i_X omega^B - dH annihilating F.
// Independent of the frame construction; also the differentiable evaluator.
template <class T>
std::vector<T> multiplier_field_t(const NonholonomicCmhSystem& nh, std::span<const T> z) {
    const int n = nh.n();
    const int k = nh.k();
    auto grad = gradient_t<T>(nh.sys.H, nh.sys.engine, z);
    if (k == 0) return magnetic_vf_t<T>(nh.sys.H, nh.sys.beta, nh.sys.engine, z);
    std::span<const T> q = z.subspan(0, n);
    MatT<T> s = symplectic_matrix_t<T>(nh.sys.beta, q);
    MatT<T> a = nh.dist.rows_t<T>(q);
    MatT<T> dc = jacobian_t<T>(nh.constraint_map(), nh.sys.engine, z);
    const int dim = 2 * n + k;
    MatT<T> w(dim, dim);
    std::vector<T> rhs(dim, T(0.0));
    for (int i = 0; i < 2 * n; ++i) {
        for (int j = 0; j < 2 * n; ++j) w(i, j) = T(0.0) - s(i, j);
        rhs[i] = grad[i];
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) w(i, 2 * n + j) = T(0.0) - a(j, i);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < 2 * n; ++j) w(2 * n + i, j) = dc(i, j);
    auto sol = lu_solve(std::move(w), std::move(rhs));
    return std::vector<T>(sol.begin(), sol.begin() + 2 * n);
}

Vec multiplier_oracle_vf(const NonholonomicCmhSystem& nh, std::span<const double> z);

// Full constrained dynamics X~ = X^B_K + tau(vlift(F) X^B_H) + tau(vlift(u) X^B_H).
Vec distributional_cmh_vf(const NonholonomicCmhSystem& nh, const ConstraintFrame& frame);

// r_K = X^0_K + F^B_K + u^B_K with X^0_K = tau X^B_H - tau X_H.
Vec dist_magnetic_vanishing_residual(const NonholonomicCmhSystem& nh,
                                     const ConstraintFrame& frame);

struct BracketResult {
    bool bracket_generating = false;
    int achieved_rank = 0;
};

// Iterated Lie brackets of a smooth frame of D (fixed kernel basis at q0
// pushed through the pointwise orthogonal projector onto ker A(q)).
BracketResult bracket_generating_check(const PfaffianDistribution& dist,
                                       const DerivativeEngine& eng, std::span<const double> q0,
                                       int max_depth);

// Max of |x' (A_gamma(q) + beta(q)) y| over an orthonormal basis of D_q.
double dgamma_plus_B_on_D_residual(const OneFormSection& gamma, const MagneticField& beta,
                                   const PfaffianDistribution& dist, const DerivativeEngine& eng,
                                   std::span<const double> q);

struct Lemma63Result {
    bool hypothesis_ok = false;  // image lies in M at the samples
    double hypothesis_residual = 0.0;
    double max_residual = 0.0;  // || A(q) . Tpi(X^B_H . map) ||
};

Lemma63Result lemma63_gamma_check(const OneFormSection& gamma, const NonholonomicCmhSystem& nh,
                                  const std::vector<Vec>& sample_qs, double hyp_tol);
Lemma63Result lemma63_eps_check(const PhaseMap& eps, const NonholonomicCmhSystem& nh,
                                const std::vector<Vec>& sample_zs_on_M, double hyp_tol);

struct DistHj1Result {
    Vec residual;
    double image_residual = 0.0;    // || c(gamma(q)) ||
    double tangent_residual = 0.0;  // Tgamma(D) against K
    bool hypotheses_ok = false;
};

DistHj1Result hj1_dist_residual(const OneFormSection& gamma, const NonholonomicCmhSystem& nh,
                                std::span<const double> q, double hyp_tol = 1e-8);

struct DistHj2Result {
    Vec r1, r2;
    double eps_membership_residual = 0.0;  // || c(eps(z)) ||
    double tangent_residual = 0.0;
    bool hypotheses_ok = false;
};

DistHj2Result hj2_dist_residuals(const OneFormSection& gamma, const PhaseMap& eps,
                                 const NonholonomicCmhSystem& nh, std::span<const double> z,
                                 double hyp_tol = 1e-8);

// Integration of the constrained dynamics with re-projection onto M after
// each step (rk4 by default).
Trajectory integrate_constrained(const NonholonomicCmhSystem& nh, std::span<const double> z0,
                                 double dt, int steps,
                                 IntegrationMethod method = IntegrationMethod::rk4);

// Time-t flow of X^B_K (multiplier form, re-projected each substep) as a
// differentiable phase-space map; preserves M by construction.
VectorMap make_constrained_flow_map(const NonholonomicCmhSystem& nh, double time, int substeps);

// Translation of phase points by a constant configuration shift.
VectorMap make_translation_map(int n, const Vec& shift);

}  // namespace magnomech
