#include "magnomech/equivalence.hpp"

namespace magnomech {

namespace {

template <class T>
T det_lu(MatT<T> a) {
    const int n = a.rows();
    T det(1.0);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = pivot_abs(a(k, k));
        for (int i = k + 1; i < n; ++i)
            if (pivot_abs(a(i, k)) > best) { best = pivot_abs(a(i, k)); piv = i; }
        if (best == 0.0) return T(0.0);
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = T(0.0) - det;
        }
        det = det * a(k, k);
        for (int i = k + 1; i < n; ++i) {
            T f = a(i, k) / a(k, k);
            for (int j = k + 1; j < n; ++j) a(i, j) = a(i, j) - f * a(k, j);
        }
    }
    return det;
}

}  // namespace

ConfigDiffeo::ConfigDiffeo(int n_, VectorMap fwd, VectorMap inv)
    : n(n_), phi(std::move(fwd)), phi_inv(std::move(inv)) {
    if (phi.in_dim() != n || phi.out_dim() != n || phi_inv.in_dim() != n || phi_inv.out_dim() != n)
        throw ContractError("ConfigDiffeo: phi and phi_inv must both be R^n -> R^n");
}

double ConfigDiffeo::inverse_residual(const DerivativeEngine& eng,
                                      std::span<const double> q1) const {
    Vec fwd = phi(q1);
    Vec back = phi_inv(fwd);
    double r = norm(sub(back, q1));
    Mat j = eng.jacobian(phi, q1);
    if (std::abs(det_lu(j)) <= 1e-10)
        throw DegeneracyError("ConfigDiffeo: Jacobian numerically singular");
    return r;
}

ConfigDiffeo ConfigDiffeo::compose(const ConfigDiffeo& outer, const ConfigDiffeo& inner) {
    return ConfigDiffeo(inner.n, outer.phi.compose(inner.phi),
                        inner.phi_inv.compose(outer.phi_inv));
}

PhaseMap cotangent_lift_map(const ConfigDiffeo& phi, const DerivativeEngine& eng) {
    const int n = phi.n;
    VectorMap fwd = phi.phi;
    VectorMap inv = phi.phi_inv;
    return VectorMap(2 * n, 2 * n, [n, fwd, inv, eng](auto z2) {
        using T = std::decay_t<decltype(z2[0])>;
        std::span<const T> q2 = z2.subspan(0, n);
        auto q1 = inv.template operator()<T>(q2);
        MatT<T> j = jacobian_t<T>(fwd, eng, std::span<const T>(q1));
        std::vector<T> p1(n, T(0.0));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) p1[i] = p1[i] + j(k, i) * z2[n + k];
        std::vector<T> out(q1.begin(), q1.end());
        out.insert(out.end(), p1.begin(), p1.end());
        return out;
    });
}

Vec cotangent_lift(const ConfigDiffeo& phi, const DerivativeEngine& eng,
                   std::span<const double> z2) {
    const int n = phi.n;
    Vec q1 = phi.phi_inv(z2.subspan(0, n));
    Mat j = eng.jacobian(phi.phi, q1);
    if (std::abs(det_lu(j)) <= 1e-10)
        throw DegeneracyError("cotangent_lift: Jacobian numerically singular");
    return cotangent_lift_map(phi, eng)(z2);
}

PhaseMap cotangent_pushforward_map(const ConfigDiffeo& phi, const DerivativeEngine& eng) {
    ConfigDiffeo inverse(phi.n, phi.phi_inv, phi.phi);
    return cotangent_lift_map(inverse, eng);
}

MagneticField pullback_magnetic_field(const ConfigDiffeo& phi, const MagneticField& beta2,
                                      const DerivativeEngine& eng) {
    const int n = phi.n;
    if (beta2.is_zero()) return MagneticField::zero(n);
    VectorMap fwd = phi.phi;
    MagneticField b2 = beta2;
    VectorMap entries(n, n * n, [n, fwd, b2, eng](auto q1) {
        using T = std::decay_t<decltype(q1[0])>;
        auto q2 = fwd.template operator()<T>(q1);
        MatT<T> j = jacobian_t<T>(fwd, eng, q1);
        MatT<T> b = b2.pairing_t<T>(std::span<const T>(q2));
        MatT<T> out = j.transposed() * b * j;
        return out.data();
    });
    return MagneticField(n, std::move(entries));
}

OneFormSection transport_one_form(const ConfigDiffeo& phi, const OneFormSection& gamma2,
                                  const DerivativeEngine& eng) {
    const int n = phi.n;
    VectorMap fwd = phi.phi;
    VectorMap g2 = gamma2.gammabar;
    VectorMap g1(n, n, [n, fwd, g2, eng](auto q1) {
        using T = std::decay_t<decltype(q1[0])>;
        auto q2 = fwd.template operator()<T>(q1);
        auto gb = g2.template operator()<T>(std::span<const T>(q2));
        MatT<T> j = jacobian_t<T>(fwd, eng, q1);
        std::vector<T> out(n, T(0.0));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) out[i] = out[i] + j(k, i) * gb[k];
        return out;
    });
    return OneFormSection(n, std::move(g1));
}

PhaseMap transport_phase_map(const ConfigDiffeo& phi, const PhaseMap& eps2,
                             const DerivativeEngine& eng) {
    PhaseMap lift = cotangent_lift_map(phi, eng);
    PhaseMap push = cotangent_pushforward_map(phi, eng);
    return lift.compose(eps2).compose(push);
}

FiberMap conjugate_fiber_map(const ConfigDiffeo& phi, const FiberMap& f2,
                             const DerivativeEngine& eng) {
    const int n = phi.n;
    PhaseMap conj = transport_phase_map(phi, f2.as_phase_map(), eng);
    VectorMap fiber(2 * n, n, [n, conj](auto z1) {
        using T = std::decay_t<decltype(z1[0])>;
        auto full = conj.template operator()<T>(z1);
        return std::vector<T>(full.begin() + n, full.end());
    });
    return FiberMap(n, std::move(fiber));
}

CmhSystem conjugate_system(const CmhSystem& sys2, const ConfigDiffeo& phi) {
    const DerivativeEngine eng = sys2.engine;
    PhaseMap push = cotangent_pushforward_map(phi, eng);
    ScalarField h1 = sys2.H.compose(push);
    MagneticField b1 = pullback_magnetic_field(phi, sys2.beta, eng);
    std::optional<FiberMap> f1, u1;
    if (sys2.force) f1 = conjugate_fiber_map(phi, *sys2.force, eng);
    if (sys2.control) u1 = conjugate_fiber_map(phi, *sys2.control, eng);
    return CmhSystem(sys2.n, std::move(h1), std::move(b1), std::move(f1), std::move(u1), eng);
}

SystemPair make_conjugated_pair(const CmhSystem& sys2, const ConfigDiffeo& phi) {
    return SystemPair{conjugate_system(sys2, phi), sys2, phi};
}

double cmh2_residual(const SystemPair& pair, std::span<const double> z2) {
    const DerivativeEngine& eng = pair.sys2.engine;
    PhaseMap lift = cotangent_lift_map(pair.phi, eng);
    Vec z1 = lift(z2);
    Vec lhs = cmh_vf(pair.sys1, z1);
    Mat tlift = eng.jacobian(lift, z2);
    Vec rhs = tlift.apply(cmh_vf(pair.sys2, z2));
    return norm(sub(lhs, rhs));
}

double magnetic_equivalence_residual(const SystemPair& pair, std::span<const double> z2) {
    const DerivativeEngine& eng = pair.sys2.engine;
    PhaseMap lift = cotangent_lift_map(pair.phi, eng);
    Vec z1 = lift(z2);
    Vec lhs = magnetic_vf(pair.sys1, z1);
    Mat tlift = eng.jacobian(lift, z2);
    Vec rhs = tlift.apply(magnetic_vf(pair.sys2, z2));
    return norm(sub(lhs, rhs));
}

TransportReport solution_transport_check(const SystemPair& pair, const OneFormSection& gamma2,
                                         const std::optional<PhaseMap>& eps2,
                                         const std::vector<Vec>& samples_q2,
                                         const std::vector<Vec>& samples_z2, double tol) {
    const DerivativeEngine& eng = pair.sys2.engine;
    TransportReport rep;
    for (const Vec& z2 : samples_z2) {
        rep.hypothesis_residual = std::max(rep.hypothesis_residual, cmh2_residual(pair, z2));
        rep.hypothesis_residual =
            std::max(rep.hypothesis_residual, magnetic_equivalence_residual(pair, z2));
    }
    rep.hypothesis_ok = rep.hypothesis_residual <= tol;
    if (!rep.hypothesis_ok) return rep;

    OneFormSection gamma1 = transport_one_form(pair.phi, gamma2, eng);
    if (!eps2) {
        for (const Vec& q2 : samples_q2) {
            rep.source_residual =
                std::max(rep.source_residual, max_abs(hj1_residual(gamma2, pair.sys2, q2)));
            Vec q1 = pair.phi.phi_inv(q2);
            rep.transported_residual =
                std::max(rep.transported_residual, max_abs(hj1_residual(gamma1, pair.sys1, q1)));
        }
    } else {
        PhaseMap eps1 = transport_phase_map(pair.phi, *eps2, eng);
        PhaseMap lift = cotangent_lift_map(pair.phi, eng);
        for (const Vec& z2 : samples_z2) {
            auto [r1s, r2s] = hj2_residuals(gamma2, *eps2, pair.sys2, z2);
            rep.source_residual = std::max(rep.source_residual, max_abs(r1s));
            Vec z1 = lift(z2);
            auto [r1t, r2t] = hj2_residuals(gamma1, eps1, pair.sys1, z1);
            rep.transported_residual = std::max(rep.transported_residual, max_abs(r1t));
        }
    }
    rep.source_pass = rep.source_residual <= tol;
    rep.transported_pass = rep.transported_residual <= tol;
    rep.verdicts_match = rep.source_pass == rep.transported_pass;
    return rep;
}

}  // namespace magnomech
