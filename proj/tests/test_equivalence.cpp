#include "doctest.h"

#include "corpus.hpp"
#include "magnomech/scenario.hpp"

using namespace magnomech;
using namespace magnomech::testing;

namespace {

ConfigDiffeo shear_diffeo() {
    return ConfigDiffeo(2, make_vector_map({"q1 + 0.3*q2^2", "q2"}, config_vars(2)),
                        make_vector_map({"q1 - 0.3*q2^2", "q2"}, config_vars(2)));
}

ConfigDiffeo scaling1d(double factor) {
    auto fwd = VectorMap(1, 1, [factor](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        return std::vector<T>{T(factor) * q[0]};
    });
    auto inv = VectorMap(1, 1, [factor](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        return std::vector<T>{q[0] / T(factor)};
    });
    return ConfigDiffeo(1, fwd, inv);
}

}  // namespace

TEST_CASE("cotangent lift: hand formulas") {
    DerivativeEngine eng;
    SUBCASE("identity") {
        ConfigDiffeo id(2, VectorMap::identity(2), VectorMap::identity(2));
        Vec z{0.3, 0.7, -1.2, 0.5};
        CHECK(max_abs(sub(cotangent_lift(id, eng, z), z)) <= 1e-14);
    }
    SUBCASE("scaling by two") {
        ConfigDiffeo two = scaling1d(2.0);
        Vec lifted = cotangent_lift(two, eng, Vec{1.0, 3.0});
        CHECK(lifted[0] == doctest::Approx(0.5));
        CHECK(lifted[1] == doctest::Approx(6.0));
    }
    SUBCASE("linear map uses the transpose Jacobian") {
        Mat m{{2, 1}, {0, 1}};
        auto fwd = make_vector_map({"2*q1 + q2", "q2"}, config_vars(2));
        auto inv = make_vector_map({"0.5*q1 - 0.5*q2", "q2"}, config_vars(2));
        ConfigDiffeo phi(2, fwd, inv);
        Vec z2{1.0, 2.0, 3.0, 4.0};
        Vec z1 = cotangent_lift(phi, eng, z2);
        // base: M^{-1} q2; fiber: M' p2
        CHECK(z1[0] == doctest::Approx(-0.5));
        CHECK(z1[1] == doctest::Approx(2.0));
        CHECK(z1[2] == doctest::Approx(6.0));
        CHECK(z1[3] == doctest::Approx(7.0));
    }
    SUBCASE("singular Jacobian raises a degeneracy error") {
        auto fwd = make_vector_map({"q1^2"}, config_vars(1));
        auto inv = make_vector_map({"q1^0.5"}, config_vars(1));
        ConfigDiffeo bad(1, fwd, inv);
        CHECK_THROWS_AS(cotangent_lift(bad, eng, Vec{0.0, 1.0}), DegeneracyError);
    }
}

TEST_CASE("cotangent lift functoriality reverses composition") {
    DerivativeEngine eng;
    ConfigDiffeo phi = shear_diffeo();
    ConfigDiffeo psi(2, make_vector_map({"q1 + 1", "2*q2"}, config_vars(2)),
                     make_vector_map({"q1 - 1", "0.5*q2"}, config_vars(2)));
    ConfigDiffeo composed = ConfigDiffeo::compose(phi, psi);  // phi . psi
    PhaseMap lift_phi = cotangent_lift_map(phi, eng);
    PhaseMap lift_psi = cotangent_lift_map(psi, eng);
    PhaseMap lift_comp = cotangent_lift_map(composed, eng);
    Rng rng(42);
    for (int i = 0; i < 50; ++i) {
        Vec z = random_phase(rng, 2, 2.0);
        CHECK(max_abs(sub(lift_comp(z), lift_psi(lift_phi(z)))) <= 1e-10);
    }
}

TEST_CASE("pullback magnetic field") {
    DerivativeEngine eng;
    Mat bm{{0, -1}, {1, 0}};
    auto beta2 = MagneticField::constant(bm);
    SUBCASE("identity keeps the field") {
        ConfigDiffeo id(2, VectorMap::identity(2), VectorMap::identity(2));
        MagneticField b1 = pullback_magnetic_field(id, beta2, eng);
        CHECK(max_abs(b1.pairing(Vec{0.4, 0.5}) - bm) <= 1e-14);
    }
    SUBCASE("uniform scaling acts as a congruence") {
        auto fwd = make_vector_map({"2*q1", "2*q2"}, config_vars(2));
        auto inv = make_vector_map({"0.5*q1", "0.5*q2"}, config_vars(2));
        ConfigDiffeo two(2, fwd, inv);
        MagneticField b1 = pullback_magnetic_field(two, beta2, eng);
        CHECK(max_abs(b1.pairing(Vec{0.1, -0.7}) - 4.0 * bm) <= 1e-13);
    }
    SUBCASE("zero pulls back to zero") {
        ConfigDiffeo phi = shear_diffeo();
        MagneticField b1 = pullback_magnetic_field(phi, MagneticField::zero(2), eng);
        CHECK(b1.is_zero());
    }
    SUBCASE("pullback of a closed field stays closed and skew") {
        ConfigDiffeo phi = shear_diffeo();
        MagneticField b1 = pullback_magnetic_field(phi, beta2, eng);
        Rng rng(4);
        for (int i = 0; i < 20; ++i) {
            Vec q = random_config(rng, 2, 2.0);
            CHECK(b1.skewness_residual(q) <= 1e-12);
            CHECK(closedness_residual(b1, eng, q) <= 1e-10);
        }
    }
}

TEST_CASE("transport of one-forms") {
    DerivativeEngine eng;
    ConfigDiffeo phi = shear_diffeo();
    SUBCASE("gradient sections transport to gradient sections (chain rule)") {
        // gammabar2 = grad W with W = q1^2 + q2^3
        OneFormSection gamma2(2, make_vector_map({"2*q1", "3*q2^2"}, config_vars(2)));
        OneFormSection gamma1 = transport_one_form(phi, gamma2, eng);
        // expected: grad (W . phi) at q1-coordinates
        auto expected = make_vector_map(
            {"2*(q1 + 0.3*q2^2)",
             "2*(q1 + 0.3*q2^2)*0.6*q2 + 3*q2^2"},
            config_vars(2));
        Rng rng(8);
        for (int i = 0; i < 30; ++i) {
            Vec q = random_config(rng, 2, 2.0);
            CHECK(max_abs(sub(gamma1.gammabar(q), expected(q))) <= 1e-12);
        }
    }
    SUBCASE("transported closed-against-field forms stay closed against the pullback") {
        Mat bm{{0, -1}, {1, 0}};
        auto beta2 = MagneticField::constant(bm);
        OneFormSection gamma2(2, make_vector_map({"-0.5*q2", "0.5*q1"}, config_vars(2)));
        OneFormSection gamma1 = transport_one_form(phi, gamma2, eng);
        MagneticField beta1 = pullback_magnetic_field(phi, beta2, eng);
        Rng rng(9);
        for (int i = 0; i < 30; ++i) {
            Vec q = random_config(rng, 2, 2.0);
            CHECK(dgamma_plus_B_residual(gamma1, beta1, eng, q) <= 1e-8);
        }
    }
}

TEST_CASE("conjugated pair: closed-loop dynamics correspond") {
    BuiltScenario bs = build_scenario(load_scenario("equiv_pair"));
    REQUIRE(bs.phi.has_value());
    SystemPair pair = make_conjugated_pair(bs.system(), *bs.phi);
    Rng rng(42);
    SUBCASE("trivial pair has zero residual") {
        ConfigDiffeo id(2, VectorMap::identity(2), VectorMap::identity(2));
        SystemPair trivial{bs.system(), bs.system(), id};
        for (int i = 0; i < 10; ++i)
            CHECK(cmh2_residual(trivial, random_phase(rng, 2, 2.0)) <= 1e-12);
    }
    SUBCASE("constructive pair stays within tolerance at 50 samples") {
        for (int i = 0; i < 50; ++i) {
            Vec z2 = random_phase(rng, 2, 2.0);
            CHECK(cmh2_residual(pair, z2) <= 1e-6);
            CHECK(magnetic_equivalence_residual(pair, z2) <= 1e-6);
        }
    }
    SUBCASE("perturbing one Hamiltonian breaks the correspondence") {
        CmhSystem perturbed(2,
                            ScalarField(4, [h = pair.sys1.H](auto z) {
                                using T = std::decay_t<decltype(z[0])>;
                                return h.template operator()<T>(z) + T(0.1) * z[0];
                            }),
                            pair.sys1.beta, pair.sys1.force, pair.sys1.control);
        SystemPair broken{perturbed, pair.sys2, pair.phi};
        double worst = 0.0;
        for (int i = 0; i < 20; ++i)
            worst = std::max(worst, cmh2_residual(broken, random_phase(rng, 2, 2.0)));
        CHECK(worst > 1e-3);
    }
}

TEST_CASE("the lift intertwines the twisted forms of a conjugated pair") {
    BuiltScenario bs = build_scenario(load_scenario("equiv_pair"));
    SystemPair pair = make_conjugated_pair(bs.system(), *bs.phi);
    DerivativeEngine eng;
    PhaseMap lift = cotangent_lift_map(pair.phi, eng);
    Rng rng(42);
    for (int i = 0; i < 30; ++i) {
        Vec z2 = random_phase(rng, 2, 2.0);
        Vec v = random_phase(rng, 2, 1.0);
        Vec w = random_phase(rng, 2, 1.0);
        Vec z1 = lift(z2);
        Mat t = eng.jacobian(lift, z2);
        double pulled = omega_B(pair.sys1.beta, z1, t.apply(v), t.apply(w));
        CHECK(std::abs(pulled - omega_B(pair.sys2.beta, z2, v, w)) <= 1e-8);
    }
}

TEST_CASE("vanishing residuals correspond across the pair") {
    BuiltScenario bs = build_scenario(load_scenario("equiv_pair"));
    SystemPair pair = make_conjugated_pair(bs.system(), *bs.phi);
    DerivativeEngine eng;
    PhaseMap lift = cotangent_lift_map(pair.phi, eng);
    Rng rng(42);
    for (int i = 0; i < 30; ++i) {
        Vec z2 = random_phase(rng, 2, 2.0);
        Vec r1 = magnetic_vanishing_residual(pair.sys1, lift(z2));
        Mat t = eng.jacobian(lift, z2);
        Vec r2t = t.apply(magnetic_vanishing_residual(pair.sys2, z2));
        CHECK(max_abs(sub(r1, r2t)) <= 1e-8);
    }
}

TEST_CASE("solution transport: verdicts match on both fixtures") {
    BuiltScenario bs = build_scenario(load_scenario("equiv_pair"));
    SystemPair pair = make_conjugated_pair(bs.system(), *bs.phi);
    Rng rng(42);
    std::vector<Vec> qs, zs;
    for (int i = 0; i < 25; ++i) {
        qs.push_back(random_config(rng, 2, 2.0));
        zs.push_back(random_phase(rng, 2, 2.0));
    }

    SUBCASE("type I, solution side: pass/pass") {
        TransportReport rep = solution_transport_check(pair, *bs.gamma, std::nullopt, qs, zs, 1e-6);
        CHECK(rep.hypothesis_ok);
        CHECK(rep.source_pass);
        CHECK(rep.transported_pass);
        CHECK(rep.verdicts_match);
    }
    SUBCASE("type I, non-solution side: fail/fail") {
        OneFormSection nonsol(2, make_vector_map({"q2", "0"}, config_vars(2)));
        TransportReport rep = solution_transport_check(pair, nonsol, std::nullopt, qs, zs, 1e-6);
        CHECK(rep.hypothesis_ok);
        CHECK_FALSE(rep.source_pass);
        CHECK_FALSE(rep.transported_pass);
        CHECK(rep.verdicts_match);
    }
    SUBCASE("type II with the flow map: pass/pass on the invariant section") {
        std::vector<Vec> zs_section;
        for (const Vec& q : qs) zs_section.push_back(bs.gamma->section_point(q));
        TransportReport rep =
            solution_transport_check(pair, *bs.gamma, bs.epsilon, qs, zs_section, 1e-5);
        CHECK(rep.hypothesis_ok);
        CHECK(rep.source_pass);
        CHECK(rep.transported_pass);
        CHECK(rep.verdicts_match);
    }
    SUBCASE("type II, non-solution side: fail/fail") {
        OneFormSection nonsol(2, make_vector_map({"q2", "0"}, config_vars(2)));
        TransportReport rep = solution_transport_check(pair, nonsol, bs.epsilon, qs, zs, 1e-6);
        CHECK(rep.hypothesis_ok);
        CHECK_FALSE(rep.source_pass);
        CHECK_FALSE(rep.transported_pass);
        CHECK(rep.verdicts_match);
    }
    SUBCASE("trivial pair: verdicts trivially match") {
        ConfigDiffeo id(2, VectorMap::identity(2), VectorMap::identity(2));
        SystemPair trivial{bs.system(), bs.system(), id};
        TransportReport rep =
            solution_transport_check(trivial, *bs.gamma, std::nullopt, qs, zs, 1e-6);
        CHECK(rep.hypothesis_ok);
        CHECK(rep.verdicts_match);
    }
}

TEST_CASE("transported phase maps stay symplectic for the transported form") {
    BuiltScenario bs = build_scenario(load_scenario("equiv_pair"));
    SystemPair pair = make_conjugated_pair(bs.system(), *bs.phi);
    DerivativeEngine eng;
    REQUIRE(bs.epsilon.has_value());
    PhaseMap eps1 = transport_phase_map(pair.phi, *bs.epsilon, eng);
    Rng rng(42);
    for (int i = 0; i < 10; ++i) {
        Vec z = random_phase(rng, 2, 1.5);
        Vec v = random_phase(rng, 2, 1.0);
        Vec w = random_phase(rng, 2, 1.0);
        CHECK(symplectic_residual(eps1, pair.sys1.beta, eng, z, v, w) <= 1e-6);
    }
    SUBCASE("identity transports to the identity") {
        PhaseMap id1 = transport_phase_map(pair.phi, VectorMap::identity(4), eng);
        Vec z = random_phase(rng, 2, 2.0);
        CHECK(max_abs(sub(id1(z), z)) <= 1e-12);
    }
}

TEST_CASE("nonlinear diffeos: force-free pairs still correspond") {
    // The coordinate vertical split only commutes with block-diagonal
    // cotangent lifts, so fiber-map conjugation is exact for linear maps
    // only. Without force and control every ingredient is natural and the
    // correspondence survives a nonlinear base map.
    BuiltScenario bs = build_scenario(load_scenario("equiv_pair"));
    CmhSystem bare(2, bs.system().H, bs.system().beta);
    SystemPair pair = make_conjugated_pair(bare, shear_diffeo());
    DerivativeEngine eng;
    PhaseMap lift = cotangent_lift_map(pair.phi, eng);
    Rng rng(42);
    for (int i = 0; i < 30; ++i) {
        Vec z2 = random_phase(rng, 2, 2.0);
        CHECK(cmh2_residual(pair, z2) <= 1e-8);
        Vec r1 = magnetic_vanishing_residual(pair.sys1, lift(z2));
        Mat t = eng.jacobian(lift, z2);
        Vec r2t = t.apply(magnetic_vanishing_residual(pair.sys2, z2));
        CHECK(max_abs(sub(r1, r2t)) <= 1e-8);
    }
}

TEST_CASE("diffeo inverse residual flags sloppy inverses") {
    DerivativeEngine eng;
    ConfigDiffeo sloppy(1, make_vector_map({"2*q1"}, config_vars(1)),
                        make_vector_map({"0.49*q1"}, config_vars(1)));
    CHECK(sloppy.inverse_residual(eng, Vec{1.0}) > 1e-3);
    ConfigDiffeo good = shear_diffeo();
    CHECK(good.inverse_residual(eng, Vec{0.3, -0.8}) <= 1e-12);
}
