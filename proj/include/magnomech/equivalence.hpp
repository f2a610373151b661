#pragma once

#include <optional>

#include "magnomech/hamilton_jacobi.hpp"

namespace magnomech {

// Configuration diffeomorphism with a user-supplied inverse; no numerical
// inversion happens anywhere downstream.
struct ConfigDiffeo {
    int n = 0;
    VectorMap phi;      // Q1 -> Q2
    VectorMap phi_inv;  // Q2 -> Q1

    ConfigDiffeo() = default;
    ConfigDiffeo(int n_, VectorMap fwd, VectorMap inv);

    // Round-trip residual at a point of Q1.
    double inverse_residual(const DerivativeEngine& eng, std::span<const double> q1) const;

    static ConfigDiffeo compose(const ConfigDiffeo& outer, const ConfigDiffeo& inner);
};

struct SystemPair {
    CmhSystem sys1;
    CmhSystem sys2;
    ConfigDiffeo phi;
};

// Cotangent lift phi^*: T*Q2 -> T*Q1, (q2, p2) -> (phi^{-1}(q2), Dphi^T p2).
PhaseMap cotangent_lift_map(const ConfigDiffeo& phi, const DerivativeEngine& eng);
Vec cotangent_lift(const ConfigDiffeo& phi, const DerivativeEngine& eng,
                   std::span<const double> z2);

// phi_* = (phi^{-1})^*: T*Q1 -> T*Q2.
PhaseMap cotangent_pushforward_map(const ConfigDiffeo& phi, const DerivativeEngine& eng);

// beta1(q1) = Dphi(q1)^T beta2(phi(q1)) Dphi(q1).
MagneticField pullback_magnetic_field(const ConfigDiffeo& phi, const MagneticField& beta2,
                                      const DerivativeEngine& eng);

// gammabar1(q1) = Dphi(q1)^T gammabar2(phi(q1)).
OneFormSection transport_one_form(const ConfigDiffeo& phi, const OneFormSection& gamma2,
                                  const DerivativeEngine& eng);

// eps1 = phi^* . eps2 . phi_*.
PhaseMap transport_phase_map(const ConfigDiffeo& phi, const PhaseMap& eps2,
                             const DerivativeEngine& eng);

// F1 = phi^* . F2 . phi_* as a fiber map.
FiberMap conjugate_fiber_map(const ConfigDiffeo& phi, const FiberMap& f2,
                             const DerivativeEngine& eng);

// The constructive equivalent partner (H1 = H2 . phi_*, transported beta,
// conjugated force and control).
CmhSystem conjugate_system(const CmhSystem& sys2, const ConfigDiffeo& phi);

SystemPair make_conjugated_pair(const CmhSystem& sys2, const ConfigDiffeo& phi);

// || X~_1(phi^*(z2)) - T(phi^*) X~_2(z2) ||.
double cmh2_residual(const SystemPair& pair, std::span<const double> z2);

// || X^B_{H1}(phi^*(z2)) - T(phi^*) X^B_{H2}(z2) ||: equivalence of the
// underlying magnetic Hamiltonian systems.
double magnetic_equivalence_residual(const SystemPair& pair, std::span<const double> z2);

struct TransportReport {
    bool hypothesis_ok = false;   // CMH-2 + magnetic equivalence hold on the sample
    double hypothesis_residual = 0.0;
    double source_residual = 0.0;       // Hamilton-Jacobi residual on sys2
    double transported_residual = 0.0;  // residual of the transported object on sys1
    bool source_pass = false;
    bool transported_pass = false;
    bool verdicts_match = false;
};

// Transports gamma2 (Type I) or [gamma2, eps2] (Type II) across the pair and
// compares pass/fail verdicts on both sides. Sample points are configuration
// points on Q2 for Type I and phase points on T*Q2 for Type II.
TransportReport solution_transport_check(const SystemPair& pair, const OneFormSection& gamma2,
                                         const std::optional<PhaseMap>& eps2,
                                         const std::vector<Vec>& samples_q2,
                                         const std::vector<Vec>& samples_z2, double tol);

}  // namespace magnomech
