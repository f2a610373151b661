#pragma once

#include <utility>

#include "magnomech/dynamics.hpp"

namespace magnomech {

// Candidate phase-space map for the Type II equation (and for transports).
using PhaseMap = VectorMap;

// Max-abs entry of A(q) + beta(q): zero iff dgamma = -B holds at q under the
// pairing convention of this library. On a single global chart the base
// projection of phase tangents is onto, so the tangent-restricted version of
// the condition collapses to this plain matrix test.
double dgamma_plus_B_residual(const OneFormSection& gamma, const MagneticField& beta,
                              const DerivativeEngine& eng, std::span<const double> q);

// Norm of d(H.gamma) at q. The Type I equation can only hold where this
// vanishes; the checker treats it as a hypothesis next to dgamma = -B.
double section_energy_residual(const OneFormSection& gamma, const ScalarField& h,
                               const DerivativeEngine& eng, std::span<const double> q);

// Type I residual: Tgamma(X~^gamma(q)) - X^B_H(gamma(q)). The dq block
// cancels structurally; the dp block carries the content.
Vec hj1_residual(const OneFormSection& gamma, const CmhSystem& sys, std::span<const double> q);

// Field with pairing matrix -A(q); by construction gamma satisfies
// dgamma = -B against it, and the entries stay closed (exactness).
MagneticField compensating_magnetic_field(const OneFormSection& gamma,
                                          const DerivativeEngine& eng);

// |omega^B_{eps(z)}(Teps v, Teps w) - omega^B_z(v, w)|.
double symplectic_residual(const PhaseMap& eps, const MagneticField& beta,
                           const DerivativeEngine& eng, std::span<const double> z,
                           std::span<const double> v, std::span<const double> w);

// Type II residual pair:
//   r1 = Tgamma . X~^eps - X^B_H . eps
//   r2 = Teps . X^B_{H.eps} - Tlambda . X~ . eps
// with Tlambda taken along eps. For an exactly symplectic eps, r1 = -r2;
// the two sides are computed by independent routes, so their sum measures
// the symplectic defect of eps.
std::pair<Vec, Vec> hj2_residuals(const OneFormSection& gamma, const PhaseMap& eps,
                                  const CmhSystem& sys, std::span<const double> z);

}  // namespace magnomech
