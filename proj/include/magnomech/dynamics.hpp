#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "magnomech/derivative.hpp"
#include "magnomech/symplectic.hpp"

namespace magnomech {

struct PhasePoint {
    Vec q;
    Vec p;

    PhasePoint() = default;
    PhasePoint(Vec q_, Vec p_) : q(std::move(q_)), p(std::move(p_)) {}

    static PhasePoint from_flat(std::span<const double> z) {
        const std::size_t n = z.size() / 2;
        return PhasePoint(Vec(z.begin(), z.begin() + n), Vec(z.begin() + n, z.end()));
    }

    Vec flat() const {
        Vec z = q;
        z.insert(z.end(), p.begin(), p.end());
        return z;
    }
};

// Fiber-preserving map (q, p) -> (q, f(q, p)); stores only the fiber output.
struct FiberMap {
    int n = 0;
    VectorMap f;  // R^{2n} -> R^n

    FiberMap() = default;
    FiberMap(int n_, VectorMap f_) : n(n_), f(std::move(f_)) {
        if (f.in_dim() != 2 * n || f.out_dim() != n)
            throw ContractError("FiberMap: fiber component must be R^{2n} -> R^n");
    }

    VectorMap as_phase_map() const;
};

// The 5-tuple (T*R^n, omega^B, H, F, u). Absent force/control contribute
// nothing to the dynamics.
struct CmhSystem {
    int n = 0;
    ScalarField H;  // arity 2n
    MagneticField beta;
    std::optional<FiberMap> force;
    std::optional<FiberMap> control;
    DerivativeEngine engine;

    CmhSystem() = default;
    CmhSystem(int n_, ScalarField h, MagneticField b, std::optional<FiberMap> f = std::nullopt,
              std::optional<FiberMap> u = std::nullopt,
              DerivativeEngine eng = DerivativeEngine::dual())
        : n(n_), H(std::move(h)), beta(std::move(b)), force(std::move(f)), control(std::move(u)),
          engine(eng) {
        if (H.arity() != 2 * n) throw ContractError("CmhSystem: Hamiltonian arity must be 2n");
        if (beta.dim() != n) throw ContractError("CmhSystem: magnetic field dimension mismatch");
    }
};

// (H_p, -H_q) at z.
template <class T>
std::vector<T> canonical_vf_t(const ScalarField& h, const DerivativeEngine& eng,
                              std::span<const T> z) {
    const std::size_t n = z.size() / 2;
    auto g = gradient_t<T>(h, eng, z);
    std::vector<T> x(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g[n + i];
        x[n + i] = T(0.0) - g[i];
    }
    return x;
}

// (H_p, -H_q + beta H_p); the unique solution of i_X omega^B = dH.
template <class T>
std::vector<T> magnetic_vf_t(const ScalarField& h, const MagneticField& beta,
                             const DerivativeEngine& eng, std::span<const T> z) {
    const std::size_t n = z.size() / 2;
    auto x = canonical_vf_t<T>(h, eng, z);
    if (!beta.is_zero()) {
        MatT<T> b = beta.pairing_t<T>(z.subspan(0, n));
        std::span<const T> hp(x.data(), n);  // dq block equals H_p
        auto mag = b.apply(hp);
        for (std::size_t i = 0; i < n; ++i) x[n + i] = x[n + i] + mag[i];
    }
    return x;
}

// Change of base_vf under the fiber-preserving action of fm: zero dq block,
// dp block = (full Jacobian of the fiber component at fm(z)) . base_vf(fm(z)).
template <class T, class Field>
std::vector<T> vertical_lift_t(const FiberMap& fm, const DerivativeEngine& eng, Field&& base_vf,
                               std::span<const T> z) {
    const std::size_t n = static_cast<std::size_t>(fm.n);
    std::vector<T> y(z.begin(), z.begin() + n);
    auto fp = fm.f.operator()<T>(z);
    y.insert(y.end(), fp.begin(), fp.end());
    auto base = base_vf(std::span<const T>(y));
    MatT<T> jf = jacobian_t<T>(fm.f, eng, std::span<const T>(y));
    auto lift_p = jf.apply(base);
    std::vector<T> out(2 * n, T(0.0));
    for (std::size_t i = 0; i < n; ++i) out[n + i] = lift_p[i];
    return out;
}

// Dynamical vector field of the closed-loop system:
// X~ = X^B_H + vlift(F) X^B_H + vlift(u) X^B_H.
template <class T>
std::vector<T> cmh_vf_t(const CmhSystem& sys, std::span<const T> z) {
    auto field = [&sys](std::span<const T> w) {
        return magnetic_vf_t<T>(sys.H, sys.beta, sys.engine, w);
    };
    std::vector<T> x = field(z);
    for (const auto& fm : {std::cref(sys.force), std::cref(sys.control)}) {
        if (!fm.get().has_value()) continue;
        auto lift = vertical_lift_t<T>(*fm.get(), sys.engine, field, z);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] + lift[i];
    }
    return x;
}

Vec canonical_vf(const ScalarField& h, const DerivativeEngine& eng, std::span<const double> z);
Vec magnetic_vf(const ScalarField& h, const MagneticField& beta, const DerivativeEngine& eng,
                std::span<const double> z);
Vec magnetic_vf(const CmhSystem& sys, std::span<const double> z);
Vec canonical_vf(const CmhSystem& sys, std::span<const double> z);

// X^0 = X^B_H - X_H; purely vertical.
Vec magnetic_deviation_vf(const CmhSystem& sys, std::span<const double> z);

Vec vertical_lift(const FiberMap& fm, const VectorMap& base_vf, const DerivativeEngine& eng,
                  std::span<const double> z);

Vec cmh_vf(const CmhSystem& sys, std::span<const double> z);

// r = X^0 + vlift(F)^B + vlift(u)^B; zero iff the closed-loop field is the
// canonical one.
Vec magnetic_vanishing_residual(const CmhSystem& sys, std::span<const double> z);

enum class IntegrationMethod { rk4, euler };

struct Trajectory {
    Vec times;
    std::vector<Vec> states;
};

using FieldFn = std::function<Vec(std::span<const double>)>;

Trajectory integrate(const FieldFn& field, std::span<const double> z0, double dt, int steps,
                     IntegrationMethod method = IntegrationMethod::rk4);

template <class T, class Field>
std::vector<T> rk4_step(Field&& f, const std::vector<T>& z, double h) {
    auto axpy = [](const std::vector<T>& a, double s, const std::vector<T>& b) {
        std::vector<T> r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + T(s) * b[i];
        return r;
    };
    auto k1 = f(std::span<const T>(z));
    auto z2 = axpy(z, h / 2.0, k1);
    auto k2 = f(std::span<const T>(z2));
    auto z3 = axpy(z, h / 2.0, k2);
    auto k3 = f(std::span<const T>(z3));
    auto z4 = axpy(z, h, k3);
    auto k4 = f(std::span<const T>(z4));
    std::vector<T> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = z[i] + T(h / 6.0) * (k1[i] + T(2.0) * k2[i] + T(2.0) * k3[i] + k4[i]);
    return out;
}

// Time-t flow of X^B_H as a differentiable phase-space map.
VectorMap make_flow_map(const ScalarField& h, const MagneticField& beta,
                        const DerivativeEngine& eng, double time, int substeps);

}  // namespace magnomech
