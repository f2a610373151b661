#include "magnomech/hamilton_jacobi.hpp"

namespace magnomech {

double dgamma_plus_B_residual(const OneFormSection& gamma, const MagneticField& beta,
                              const DerivativeEngine& eng, std::span<const double> q) {
    Mat a = exterior_derivative_matrix(gamma, eng, q);
    if (!beta.is_zero()) a = a + beta.pairing(q);
    return max_abs(a);
}

double section_energy_residual(const OneFormSection& gamma, const ScalarField& h,
                               const DerivativeEngine& eng, std::span<const double> q) {
    ScalarField h_on_section = h.compose(section_map(gamma));
    Vec g = eng.gradient(h_on_section, q);
    return norm(g);
}

Vec hj1_residual(const OneFormSection& gamma, const CmhSystem& sys, std::span<const double> q) {
    const int n = sys.n;
    Vec zg = gamma.section_point(q);
    Vec xt = cmh_vf(sys, zg);
    Vec xq(xt.begin(), xt.begin() + n);
    Mat j = sys.engine.jacobian(gamma.gammabar, q);
    Vec lhs(2 * n);
    for (int i = 0; i < n; ++i) lhs[i] = xq[i];
    Vec jp = j.apply(xq);
    for (int i = 0; i < n; ++i) lhs[n + i] = jp[i];
    return sub(lhs, magnetic_vf(sys, zg));
}

MagneticField compensating_magnetic_field(const OneFormSection& gamma,
                                          const DerivativeEngine& eng) {
    const int n = gamma.n;
    VectorMap jm = jacobian_map(gamma.gammabar, eng);
    // beta_ij = -(A)_ij = J_ij - J_ji
    VectorMap entries(n, n * n, [n, jm](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        auto j = jm.template operator()<T>(q);
        std::vector<T> b(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                b[static_cast<std::size_t>(i) * n + k] =
                    j[static_cast<std::size_t>(i) * n + k] - j[static_cast<std::size_t>(k) * n + i];
        return b;
    });
    return MagneticField(n, std::move(entries));
}

double symplectic_residual(const PhaseMap& eps, const MagneticField& beta,
                           const DerivativeEngine& eng, std::span<const double> z,
                           std::span<const double> v, std::span<const double> w) {
    double pulled = pullback_two_form(eps, beta, eng, z, v, w);
    double base = omega_B(beta, z, v, w);
    return std::abs(pulled - base);
}

std::pair<Vec, Vec> hj2_residuals(const OneFormSection& gamma, const PhaseMap& eps,
                                  const CmhSystem& sys, std::span<const double> z) {
    const int n = sys.n;
    Vec ez = eps(z);
    std::span<const double> eq(ez.data(), n);

    Vec xt = cmh_vf(sys, ez);
    Vec xq(xt.begin(), xt.begin() + n);
    Mat j = sys.engine.jacobian(gamma.gammabar, eq);
    Vec t_lambda_xt(2 * n);
    for (int i = 0; i < n; ++i) t_lambda_xt[i] = xq[i];
    Vec jp = j.apply(xq);
    for (int i = 0; i < n; ++i) t_lambda_xt[n + i] = jp[i];

    Vec r1 = sub(t_lambda_xt, magnetic_vf(sys, ez));

    ScalarField h_eps = sys.H.compose(eps);
    Vec x_he = magnetic_vf(h_eps, sys.beta, sys.engine, z);
    Mat teps = sys.engine.jacobian(eps, z);
    Vec pushed = teps.apply(x_he);
    Vec r2 = sub(pushed, t_lambda_xt);
    return {std::move(r1), std::move(r2)};
}

}  // namespace magnomech
