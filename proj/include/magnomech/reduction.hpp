#pragma once

#include "magnomech/nonholonomic.hpp"
#include "magnomech/rng.hpp"

namespace magnomech {

// Translation group R^s acting by shifts of the cyclic coordinates q_S. The
// quotient chart is explicit: drop the q_S components, keep all momenta.
struct TranslationSymmetry {
    int n = 0;
    std::vector<int> cyclic;  // 0-based, strictly increasing

    TranslationSymmetry() = default;
    TranslationSymmetry(int n_, std::vector<int> cyclic_);

    int s() const { return static_cast<int>(cyclic.size()); }
    int reduced_dim() const { return 2 * n - s(); }

    bool is_cyclic(int i) const;

    // (2n - s) x 2n selection matrix realizing T pi_{/G}.
    Mat drop_matrix() const;

    Vec reduce_point(std::span<const double> z) const;
    // Section q_S = 0.
    Vec lift_point(std::span<const double> zbar) const;

    template <class T>
    std::vector<T> lift_point_t(std::span<const T> zbar) const {
        std::vector<T> z(2 * n, T(0.0));
        int src = 0;
        for (int i = 0; i < n; ++i)
            if (!is_cyclic(i)) z[i] = zbar[src++];
        for (int i = 0; i < n; ++i) z[n + i] = zbar[src++];
        return z;
    }

    Vec drop(std::span<const double> v) const { return reduce_point(v); }

    // Phase translation by amounts c over the cyclic coordinates.
    Vec shifted(std::span<const double> z, std::span<const double> c) const;
};

// Worst change of every piece of system data under sampled cyclic shifts.
double invariance_residual(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                           const std::vector<Vec>& sample_zs, const std::vector<Vec>& shifts);

double map_invariance_residual(const VectorMap& phase_map, const TranslationSymmetry& sym,
                               const std::vector<Vec>& sample_zs, const std::vector<Vec>& shifts);

double one_form_invariance_residual(const OneFormSection& gamma, const TranslationSymmetry& sym,
                                    const std::vector<Vec>& sample_zs,
                                    const std::vector<Vec>& shifts);

struct ReducedFrame {
    Vec z;     // base point on M
    Vec zbar;  // reduced point
    ConstraintFrame full;
    Mat basis_V;      // vertical directions (e_a, 0), a cyclic
    Mat basis_VK;     // V cap K
    Mat basis_U;      // omega^B_K-orthogonal of V cap K inside K
    Mat basis_Kbar;   // orthonormal basis of Tpi(U)
    Mat lift_of_Kbar; // U-lifts of the Kbar basis columns
    Mat gram_Kbar;    // omega pairing of the lifts
    Mat tau_Kbar;     // projector onto Kbar along the dropped K^perp
    bool reduced_compatible = false;
};

ReducedFrame reduced_frame_at(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                              std::span<const double> z, bool magnetic = true);

// Reduced Hamiltonian h(zbar) = H(lift(zbar)); well defined by invariance.
ScalarField reduced_hamiltonian(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym);

// Gram-system solve of the reduced restricted equation on Kbar.
Vec reduced_distributional_vf(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                              const ReducedFrame& rframe);

// Reduced closed-loop field X^ = X^B_Kbar + fbar + ubar.
Vec reduced_cmh_vf(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                   const ReducedFrame& rframe);

enum class RelatednessKind { plain, cmh };

// || reduced field at pi(z) - droprows(full field at z) ||.
double relatedness_residual(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                            std::span<const double> z, RelatednessKind kind);

struct ReducedVanishing {
    Vec rbar;                 // X^0_Kbar + fbar + ubar
    double identity_residual; // || X^ - X_Kbar - rbar ||
    double drop_consistency;  // || rbar - tau_Kbar(droprows(r_K)) ||
};

ReducedVanishing reduced_magnetic_vanishing_residual(const NonholonomicCmhSystem& nh,
                                                     const TranslationSymmetry& sym,
                                                     const ReducedFrame& rframe);

// Lift-independence of the reduced pairing: the Gram entries recomputed from
// lifts offset by random V cap K components.
double lift_independence_residual(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                                  const ReducedFrame& rframe, Rng& rng);

struct ReducedHj1Result {
    Vec residual;  // reduced tangent
    double image_residual = 0.0;
    double invariance_residual = 0.0;
    double tangent_residual = 0.0;
    bool hypotheses_ok = false;
};

ReducedHj1Result reduced_hj1_residual(const OneFormSection& gamma,
                                      const NonholonomicCmhSystem& nh,
                                      const TranslationSymmetry& sym, std::span<const double> q,
                                      double hyp_tol = 1e-8);

struct ReducedHj2Result {
    Vec r1, r2;
    double eps_membership_residual = 0.0;
    double eps_invariance_residual = 0.0;
    bool hypotheses_ok = false;
};

ReducedHj2Result reduced_hj2_residuals(const OneFormSection& gamma, const PhaseMap& eps,
                                       const NonholonomicCmhSystem& nh,
                                       const TranslationSymmetry& sym, std::span<const double> z,
                                       double hyp_tol = 1e-8);

struct CorrespondenceReport {
    int samples = 0;
    int agreements = 0;
    double max_unreduced = 0.0;
    double max_reduced = 0.0;
    bool all_agree() const { return agreements == samples; }
};

// Verdict agreement between the unreduced and reduced Type II equations at
// the same phase points.
CorrespondenceReport hj2_reduction_correspondence(const OneFormSection& gamma,
                                                  const PhaseMap& eps,
                                                  const NonholonomicCmhSystem& nh,
                                                  const TranslationSymmetry& sym,
                                                  const std::vector<Vec>& samples, double tol);

}  // namespace magnomech
