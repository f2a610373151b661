#include "doctest.h"

#include "magnomech/expression.hpp"
#include "magnomech/rng.hpp"
#include "magnomech/scenario.hpp"
#include "magnomech/symplectic.hpp"

using namespace magnomech;

TEST_CASE("omega_B: canonical pairing and antisymmetry") {
    auto b0 = MagneticField::zero(2);
    Vec z{0.1, 0.2, 0.3, 0.4};
    Vec v{1, 0, 0, 0}, w{0, 0, 1, 0};
    CHECK(omega_B(b0, z, v, w) == doctest::Approx(1.0));  // dq1 ^ dp1

    Mat bm{{0, -1}, {1, 0}};
    auto b = MagneticField::constant(bm);
    Vec u{0.3, -0.9, 1.7, 0.2};
    CHECK(omega_B(b, z, u, u) == doctest::Approx(0.0));

    Vec vq{1, 0, 0, 0}, wq{0, 1, 0, 0};
    CHECK(omega_B(b, z, vq, wq) == doctest::Approx(1.0));  // -dq' beta dq term

    CHECK_THROWS_AS(omega_B(b, z, Vec{1.0}, w), ContractError);
}

TEST_CASE("exterior derivative matrix: hand examples") {
    DerivativeEngine eng;
    // gradient sections are closed (needs second derivatives of W)
    auto grad_w = make_vector_map({"2*q1 + q2^2*3", "6*q1*q2 + 4*q2^3"}, config_vars(2));
    OneFormSection closed(2, grad_w);  // gradient of q1^2 + 3 q1 q2^2 + q2^4
    Mat a0 = exterior_derivative_matrix(closed, eng, Vec{0.7, -0.3});
    CHECK(max_abs(a0) <= 1e-12);

    OneFormSection shear(2, make_vector_map({"q2", "0"}, config_vars(2)));
    Mat a1 = exterior_derivative_matrix(shear, eng, Vec{1.1, 2.2});
    CHECK(a1(0, 0) == doctest::Approx(0.0));
    CHECK(a1(0, 1) == doctest::Approx(-1.0));
    CHECK(a1(1, 0) == doctest::Approx(1.0));
    CHECK(a1(1, 1) == doctest::Approx(0.0));

    // linear section Cq gives C' - C
    Mat c{{0.5, 2.0}, {-1.0, 0.25}};
    OneFormSection lin(2, make_vector_map({"0.5*q1 + 2*q2", "-q1 + 0.25*q2"}, config_vars(2)));
    Mat al = exterior_derivative_matrix(lin, eng, Vec{0.4, 0.9});
    Mat expected = c.transposed() - c;
    CHECK(max_abs(al - expected) <= 1e-12);
}

TEST_CASE("closedness residual") {
    DerivativeEngine eng;
    Mat bm{{0, 2.5}, {-2.5, 0}};
    CHECK(closedness_residual(MagneticField::constant(bm), eng, Vec{1.0, 2.0}) == 0.0);

    // any two-form on the plane is closed
    MagneticField planar(2, VectorMap(2, 4, [](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        T b12 = sin(q[0]) * q[1] + q[0] * q[0];
        return std::vector<T>{T(0.0), b12, T(0.0) - b12, T(0.0)};
    }));
    CHECK(closedness_residual(planar, eng, Vec{0.7, -1.3}) <= 1e-14);

    // b12 = q3 on R^3 fails with residual exactly 1
    MagneticField bad(3, VectorMap(3, 9, [](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        std::vector<T> out(9, T(0.0));
        out[0 * 3 + 1] = q[2];
        out[1 * 3 + 0] = T(0.0) - q[2];
        return out;
    }));
    CHECK(closedness_residual(bad, eng, Vec{0.4, 0.5, 0.6}) == doctest::Approx(1.0));
}

TEST_CASE("pullback two-form: identity, translation, section") {
    DerivativeEngine eng;
    Mat bm{{0, -1}, {1, 0}};
    auto b = MagneticField::constant(bm);
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        Vec z{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        Vec v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec w{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        double base = omega_B(b, z, v, w);
        CHECK(pullback_two_form(VectorMap::identity(4), b, eng, z, v, w) ==
              doctest::Approx(base).epsilon(1e-12));
        VectorMap shift(4, 4, [](auto x) {
            using T = std::decay_t<decltype(x[0])>;
            std::vector<T> out(x.begin(), x.end());
            out[0] = out[0] + T(0.3);
            out[3] = out[3] - T(1.1);
            return out;
        });
        CHECK(pullback_two_form(shift, b, eng, z, v, w) == doctest::Approx(base).epsilon(1e-12));
    }

    // lambda = gamma . pi with gammabar = (q2, 0), beta = 0: value -dgamma(e1, e2) = 1
    OneFormSection shear(2, make_vector_map({"q2", "0"}, config_vars(2)));
    auto lam = section_as_phase_map(shear);
    Vec z{0.2, 0.5, -0.4, 0.8}, v{1, 0, 0, 0}, w{0, 1, 0, 0};
    CHECK(pullback_two_form(lam, MagneticField::zero(2), eng, z, v, w) == doctest::Approx(1.0));
}

TEST_CASE("pullback identities hold on the builtin magnetic corpus") {
    DerivativeEngine eng;
    for (const char* name : {"lorentz2d", "lorentz3d", "poly_beta3d"}) {
        BuiltScenario bs = build_scenario(load_scenario(name));
        const int n = bs.n();
        REQUIRE(bs.gamma.has_value());
        PhaseMap lam = section_as_phase_map(*bs.gamma);
        Rng rng(42);
        for (int i = 0; i < 100; ++i) {
            Vec z(2 * n), v(2 * n), w(2 * n);
            for (int a = 0; a < 2 * n; ++a) {
                z[a] = rng.uniform(-2, 2);
                v[a] = rng.uniform(-1, 1);
                w[a] = rng.uniform(-1, 1);
            }
            std::span<const double> q(z.data(), n);
            Mat pairing = exterior_derivative_matrix(*bs.gamma, eng, q);
            pairing = pairing + bs.system().beta.pairing(q);
            double base = 0.0;
            for (int a = 0; a < n; ++a)
                for (int c = 0; c < n; ++c) base += v[a] * pairing(a, c) * w[c];

            double lhs1 = pullback_two_form(lam, bs.system().beta, eng, z, v, w);
            CHECK(std::abs(lhs1 + base) <= 1e-8);

            Mat j = eng.jacobian(bs.gamma->gammabar, q);
            auto push = [&](const Vec& x) {
                Vec out(2 * n, 0.0);
                Vec xq(x.begin(), x.begin() + n);
                Vec jx = j.apply(xq);
                for (int a = 0; a < n; ++a) {
                    out[a] = xq[a];
                    out[n + a] = jx[a];
                }
                return out;
            };
            Vec lam_z = bs.gamma->section_point(q);
            double lhs2 = omega_B(bs.system().beta, lam_z, push(v), w);
            double rhs2 = omega_B(bs.system().beta, z, v, sub(w, push(w))) - base;
            CHECK(std::abs(lhs2 - rhs2) <= 1e-8);
        }
    }
}

TEST_CASE("twisted symplectic matrix is skew and nondegenerate") {
    Mat bm{{0, 1.7}, {-1.7, 0}};
    auto b = MagneticField::constant(bm);
    Mat s = symplectic_matrix(b, Vec{0.3, -0.9});
    CHECK(max_abs(s + s.transposed()) <= 1e-15);
    CHECK(numerical_rank(s) == 4);
    // zero field reduces to the canonical block form
    Mat s0 = symplectic_matrix(MagneticField::zero(2), Vec{0.0, 0.0});
    CHECK(s0(0, 2) == 1.0);
    CHECK(s0(2, 0) == -1.0);
    CHECK(s0(0, 0) == 0.0);
}

TEST_CASE("magnetic field skewness check") {
    Mat notskew{{0, 1}, {1, 0}};
    auto b = MagneticField::constant(notskew);
    CHECK(b.skewness_residual(Vec{0, 0}) == doctest::Approx(2.0));
}
