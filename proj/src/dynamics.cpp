#include "magnomech/dynamics.hpp"

namespace magnomech {

VectorMap FiberMap::as_phase_map() const {
    const int nn = n;
    VectorMap fiber = f;
    return VectorMap(2 * nn, 2 * nn, [nn, fiber](auto z) {
        using T = std::decay_t<decltype(z[0])>;
        std::vector<T> out(z.begin(), z.begin() + nn);
        auto p = fiber.template operator()<T>(z);
        out.insert(out.end(), p.begin(), p.end());
        return out;
    });
}

Vec canonical_vf(const ScalarField& h, const DerivativeEngine& eng, std::span<const double> z) {
    if (static_cast<int>(z.size()) != h.arity())
        throw ContractError("canonical_vf: phase dimension mismatch");
    Vec x = canonical_vf_t<double>(h, eng, z);
    if (!all_finite(x)) throw NumericError("canonical_vf: non-finite field value");
    return x;
}

Vec magnetic_vf(const ScalarField& h, const MagneticField& beta, const DerivativeEngine& eng,
                std::span<const double> z) {
    Vec x = magnetic_vf_t<double>(h, beta, eng, z);
    if (!all_finite(x)) throw NumericError("magnetic_vf: non-finite field value");
    return x;
}

Vec magnetic_vf(const CmhSystem& sys, std::span<const double> z) {
    return magnetic_vf(sys.H, sys.beta, sys.engine, z);
}

Vec canonical_vf(const CmhSystem& sys, std::span<const double> z) {
    return canonical_vf(sys.H, sys.engine, z);
}

Vec magnetic_deviation_vf(const CmhSystem& sys, std::span<const double> z) {
    return sub(magnetic_vf(sys, z), canonical_vf(sys, z));
}

Vec vertical_lift(const FiberMap& fm, const VectorMap& base_vf, const DerivativeEngine& eng,
                  std::span<const double> z) {
    auto field = [&base_vf](std::span<const double> w) { return base_vf(w); };
    return vertical_lift_t<double>(fm, eng, field, z);
}

Vec cmh_vf(const CmhSystem& sys, std::span<const double> z) {
    Vec x = cmh_vf_t<double>(sys, z);
    if (!all_finite(x)) throw NumericError("cmh_vf: non-finite field value");
    return x;
}

Vec magnetic_vanishing_residual(const CmhSystem& sys, std::span<const double> z) {
    Vec r = magnetic_deviation_vf(sys, z);
    auto field = [&sys](std::span<const double> w) {
        return magnetic_vf_t<double>(sys.H, sys.beta, sys.engine, w);
    };
    for (const auto& fm : {std::cref(sys.force), std::cref(sys.control)}) {
        if (!fm.get().has_value()) continue;
        Vec lift = vertical_lift_t<double>(*fm.get(), sys.engine, field, z);
        r = add(r, lift);
    }
    return r;
}

Trajectory integrate(const FieldFn& field, std::span<const double> z0, double dt, int steps,
                     IntegrationMethod method) {
    if (dt <= 0.0) throw ContractError("integrate: dt must be positive");
    if (steps < 1) throw ContractError("integrate: steps must be >= 1");
    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    Vec z(z0.begin(), z0.end());
    traj.times.push_back(0.0);
    traj.states.push_back(z);
    for (int k = 0; k < steps; ++k) {
        try {
            if (method == IntegrationMethod::rk4) {
                z = rk4_step<double>([&field](std::span<const double> w) { return field(w); }, z,
                                     dt);
            } else {
                Vec f = field(z);
                for (std::size_t i = 0; i < z.size(); ++i) z[i] += dt * f[i];
            }
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (integration step " +
                               std::to_string(k + 1) + ")");
        }
        if (!all_finite(z))
            throw NumericError("integrate: non-finite state at step " + std::to_string(k + 1));
        traj.times.push_back(dt * (k + 1));
        traj.states.push_back(z);
    }
    return traj;
}

VectorMap make_flow_map(const ScalarField& h, const MagneticField& beta,
                        const DerivativeEngine& eng, double time, int substeps) {
    const int dim = h.arity();
    return VectorMap(dim, dim, [h, beta, eng, time, substeps](auto z0) {
        using T = std::decay_t<decltype(z0[0])>;
        std::vector<T> z(z0.begin(), z0.end());
        double hstep = time / substeps;
        auto field = [&](std::span<const T> w) { return magnetic_vf_t<T>(h, beta, eng, w); };
        for (int k = 0; k < substeps; ++k) z = rk4_step<T>(field, z, hstep);
        return z;
    });
}

}  // namespace magnomech
