#include "magnomech/nonholonomic.hpp"

namespace magnomech {

PfaffianDistribution::PfaffianDistribution(int n_, int k_, VectorMap rows)
    : n(n_), k(k_), rows_map(std::move(rows)) {
    if (k < 0 || n <= 0) throw ContractError("PfaffianDistribution: bad dimensions");
    if (rows_map.in_dim() != n || rows_map.out_dim() != k * n)
        throw ContractError("PfaffianDistribution: rows map must be R^n -> R^{k*n}");
}

Mat PfaffianDistribution::kernel_basis(std::span<const double> q) const {
    if (k == 0) return Mat::identity(n);
    Mat a = rows(q);
    Svd s = svd(a);
    if (s.sigma[k - 1] < 1e-8 * s.sigma[0])
        throw DegeneracyError("PfaffianDistribution: constraint rows lose rank");
    return null_space(a);
}

MechanicalLagrangian::MechanicalLagrangian(int n_, VectorMap m, ScalarField v)
    : n(n_), mass(std::move(m)), potential(std::move(v)) {
    if (mass.in_dim() != n || mass.out_dim() != n * n)
        throw ContractError("MechanicalLagrangian: mass map must be R^n -> R^{n*n}");
    if (potential.arity() != n)
        throw ContractError("MechanicalLagrangian: potential must live on Q");
}

ScalarField MechanicalLagrangian::induced_hamiltonian() const {
    const int nn = n;
    VectorMap m = mass;
    ScalarField v = potential;
    return ScalarField(2 * nn, [nn, m, v](auto z) {
        using T = std::decay_t<decltype(z[0])>;
        std::span<const T> q = z.subspan(0, nn);
        auto flat = m.template operator()<T>(q);
        MatT<T> mm(nn, nn);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) mm(i, j) = flat[static_cast<std::size_t>(i) * nn + j];
        std::vector<T> p(z.begin() + nn, z.end());
        auto y = lu_solve(mm, p);  // M^{-1} p
        T kin(0.0);
        for (int i = 0; i < nn; ++i) kin = kin + z[nn + i] * y[i];
        return T(0.5) * kin + v.template operator()<T>(q);
    });
}

void MechanicalLagrangian::require_spd(std::span<const double> q) const {
    Mat m = mass_at(q);
    double skew = max_abs(m - m.transposed());
    if (skew > 1e-10 * (1.0 + max_abs(m)))
        throw DegeneracyError("MechanicalLagrangian: mass matrix not symmetric");
    // Cholesky; failure of a pivot means not positive definite.
    Mat l = m;
    for (int j = 0; j < n; ++j) {
        double d = l(j, j);
        for (int s = 0; s < j; ++s) d -= l(j, s) * l(j, s);
        if (d <= 0.0) throw DegeneracyError("MechanicalLagrangian: mass matrix not SPD");
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double x = l(i, j);
            for (int s = 0; s < j; ++s) x -= l(i, s) * l(j, s);
            l(i, j) = x / l(j, j);
        }
    }
}

NonholonomicCmhSystem::NonholonomicCmhSystem(MechanicalLagrangian lag, PfaffianDistribution d,
                                             MagneticField beta, std::optional<FiberMap> force,
                                             std::optional<FiberMap> control,
                                             std::optional<ScalarField> h_override,
                                             DerivativeEngine eng)
    : lagrangian(std::move(lag)), dist(std::move(d)) {
    if (lagrangian.n != dist.n) throw ContractError("NonholonomicCmhSystem: dimension mismatch");
    ScalarField h = h_override ? std::move(*h_override) : lagrangian.induced_hamiltonian();
    sys = CmhSystem(lagrangian.n, std::move(h), std::move(beta), std::move(force),
                    std::move(control), eng);

    const int n = lagrangian.n;
    const int k = dist.k;
    VectorMap rows = dist.rows_map;
    VectorMap mass = lagrangian.mass;
    cmap_ = VectorMap(2 * n, k, [n, k, rows, mass](auto z) {
        using T = std::decay_t<decltype(z[0])>;
        std::span<const T> q = z.subspan(0, n);
        auto aflat = rows.template operator()<T>(q);
        auto mflat = mass.template operator()<T>(q);
        MatT<T> m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = mflat[static_cast<std::size_t>(i) * n + j];
        std::vector<T> p(z.begin() + n, z.end());
        auto y = lu_solve(std::move(m), std::move(p));
        std::vector<T> c(k, T(0.0));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j)
                c[i] = c[i] + aflat[static_cast<std::size_t>(i) * n + j] * y[j];
        return c;
    });
}

Vec constraint_functions(const NonholonomicCmhSystem& nh, std::span<const double> z) {
    nh.lagrangian.require_spd(z.subspan(0, nh.n()));
    return nh.constraint_map()(z);
}

Vec project_to_M(const NonholonomicCmhSystem& nh, std::span<const double> z) {
    if (nh.k() > 0) {
        Mat a = nh.dist.rows(z.subspan(0, nh.n()));
        Svd s = svd(a);
        if (s.sigma[nh.k() - 1] < 1e-8 * s.sigma[0])
            throw DegeneracyError("project_to_M: constraint rows lose rank");
    }
    return project_to_M_t<double>(nh, z);
}

ConstraintFrame frame_at(const NonholonomicCmhSystem& nh, std::span<const double> z,
                         bool magnetic) {
    const int n = nh.n();
    const int k = nh.k();
    ConstraintFrame fr;
    fr.z.assign(z.begin(), z.end());
    fr.magnetic = magnetic;
    std::span<const double> q = z.subspan(0, n);
    fr.membership_residual = norm(nh.constraint_map()(z));
    fr.s = magnetic ? symplectic_matrix(nh.sys.beta, q)
                    : symplectic_matrix(MagneticField::zero(n), q);

    if (k == 0) {
        fr.basis_TM = Mat::identity(2 * n);
        fr.basis_F = Mat::identity(2 * n);
        fr.basis_K = Mat::identity(2 * n);
        fr.basis_Kperp = Mat(2 * n, 0);
        fr.tau = Mat::identity(2 * n);
        fr.admissible = fr.compatible = true;
        return fr;
    }

    Mat a = nh.dist.rows(q);
    Svd asvd = svd(a);
    if (asvd.sigma[k - 1] < 1e-8 * asvd.sigma[0])
        throw DegeneracyError("frame_at: constraint rows lose rank");

    Mat dc = nh.sys.engine.jacobian(nh.constraint_map(), z);
    fr.basis_TM = null_space(dc);

    Mat a_ext(k, 2 * n);  // rows annihilating F: (A row, 0)
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) a_ext(i, j) = a(i, j);
    fr.basis_F = null_space(a_ext);

    fr.basis_K = subspace_intersect(fr.basis_F, fr.basis_TM);

    // Admissibility: dim M = rank F.
    fr.admissible = (2 * n - numerical_rank(dc)) == fr.basis_F.cols();

    // Compatibility: TM cap F^perp = {0} with the omega^B-orthogonal F^perp.
    Mat f_perp = null_space(fr.basis_F.transposed() * fr.s);
    fr.compatible = subspace_intersect(fr.basis_TM, f_perp).cols() == 0;

    fr.basis_Kperp = null_space(fr.basis_K.transposed() * fr.s);
    Mat split = hstack(fr.basis_K, fr.basis_Kperp);
    if (split.cols() != 2 * n) {
        fr.compatible = false;
        fr.tau = Mat(2 * n, 2 * n);
        return fr;
    }
    const int dim_k = fr.basis_K.cols();
    Mat tau(2 * n, 2 * n);
    try {
        for (int j = 0; j < 2 * n; ++j) {
            Vec e(2 * n, 0.0);
            e[j] = 1.0;
            Vec coef = lu_solve(split, std::move(e));
            for (int i = 0; i < 2 * n; ++i) {
                double x = 0.0;
                for (int c = 0; c < dim_k; ++c) x += fr.basis_K(i, c) * coef[c];
                tau(i, j) = x;
            }
        }
    } catch (const DegeneracyError&) {
        fr.compatible = false;
        fr.tau = Mat(2 * n, 2 * n);
        return fr;
    }
    fr.tau = std::move(tau);
    return fr;
}

Vec distributional_vf(const NonholonomicCmhSystem& nh, const ConstraintFrame& frame) {
    if (!frame.compatible)
        throw DegeneracyError("distributional_vf: incompatible frame (omega^B degenerate on K)");
    const Mat& bk = frame.basis_K;
    Vec grad = nh.sys.engine.gradient(nh.sys.H, frame.z);
    // omega^B(X, u_j) = dH(u_j) for the K basis: -(B_K' S B_K) x = B_K' grad H.
    Mat gram = bk.transposed() * frame.s * bk;
    Mat neg_gram = -1.0 * gram;
    Vec rhs(bk.cols());
    for (int j = 0; j < bk.cols(); ++j) rhs[j] = dot(bk.col(j), grad);
    Vec x;
    try {
        x = lu_solve(neg_gram, std::move(rhs));
    } catch (const DegeneracyError&) {
        throw DegeneracyError("distributional_vf: singular Gram matrix of omega^B on K");
    }
    Vec out(2 * nh.n(), 0.0);
    for (int i = 0; i < 2 * nh.n(); ++i)
        for (int j = 0; j < bk.cols(); ++j) out[i] += bk(i, j) * x[j];
    return out;
}

Vec multiplier_oracle_vf(const NonholonomicCmhSystem& nh, std::span<const double> z) {
    Vec x = multiplier_field_t<double>(nh, z);
    if (!all_finite(x)) throw NumericError("multiplier_oracle_vf: non-finite field value");
    return x;
}

namespace {

// tau-projected vertical lifts of force and control, summed.
Vec projected_lifts(const NonholonomicCmhSystem& nh, const ConstraintFrame& frame) {
    Vec total(2 * nh.n(), 0.0);
    auto base = [&nh](std::span<const double> w) {
        return magnetic_vf_t<double>(nh.sys.H, nh.sys.beta, nh.sys.engine, w);
    };
    for (const auto& fm : {std::cref(nh.sys.force), std::cref(nh.sys.control)}) {
        if (!fm.get().has_value()) continue;
        Vec lift = vertical_lift_t<double>(*fm.get(), nh.sys.engine, base, frame.z);
        total = add(total, frame.project(lift));
    }
    return total;
}

}  // namespace

Vec distributional_cmh_vf(const NonholonomicCmhSystem& nh, const ConstraintFrame& frame) {
    return add(distributional_vf(nh, frame), projected_lifts(nh, frame));
}

Vec dist_magnetic_vanishing_residual(const NonholonomicCmhSystem& nh,
                                     const ConstraintFrame& frame) {
    Vec xb = magnetic_vf(nh.sys, frame.z);
    Vec xc = canonical_vf(nh.sys, frame.z);
    Vec x0k = frame.project(sub(xb, xc));
    return add(x0k, projected_lifts(nh, frame));
}

namespace {

// Smooth local frame of D near q0: fixed kernel basis pushed through the
// orthogonal projector onto ker A(q).
VectorMap smooth_kernel_field(const PfaffianDistribution& dist, const Vec& seed_dir) {
    const int n = dist.n;
    VectorMap rows = dist.rows_map;
    const int k = dist.k;
    return VectorMap(n, n, [n, k, rows, seed_dir](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        std::vector<T> v(n);
        for (int i = 0; i < n; ++i) v[i] = T(seed_dir[i]);
        if (k == 0) return v;
        auto aflat = rows.template operator()<T>(q);
        MatT<T> a(k, n);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = aflat[static_cast<std::size_t>(i) * n + j];
        MatT<T> gram = a * a.transposed();
        std::vector<T> av(k, T(0.0));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j) av[i] = av[i] + a(i, j) * v[j];
        auto mu = lu_solve(std::move(gram), std::move(av));
        for (int j = 0; j < n; ++j) {
            T corr(0.0);
            for (int i = 0; i < k; ++i) corr = corr + a(i, j) * mu[i];
            v[j] = v[j] - corr;
        }
        return v;
    });
}

VectorMap bracket_field(const VectorMap& x, const VectorMap& y, const DerivativeEngine& eng) {
    const int n = x.in_dim();
    return VectorMap(n, n, [n, x, y, eng](auto q) {
        using T = std::decay_t<decltype(q[0])>;
        auto xv = x.template operator()<T>(q);
        auto yv = y.template operator()<T>(q);
        MatT<T> jx = jacobian_t<T>(x, eng, q);
        MatT<T> jy = jacobian_t<T>(y, eng, q);
        auto jyx = jy.apply(std::span<const T>(xv));
        auto jxy = jx.apply(std::span<const T>(yv));
        std::vector<T> out(n);
        for (int i = 0; i < n; ++i) out[i] = jyx[i] - jxy[i];
        return out;
    });
}

}  // namespace

BracketResult bracket_generating_check(const PfaffianDistribution& dist,
                                       const DerivativeEngine& eng, std::span<const double> q0,
                                       int max_depth) {
    if (max_depth < 1) throw ContractError("bracket_generating_check: depth must be >= 1");
    if (eng.mode == DerivativeEngine::Mode::dual && max_depth > 4)
        throw ContractError("bracket_generating_check: dual mode supports depth <= 4");
    const int n = dist.n;
    Mat kernel = dist.kernel_basis(q0);

    std::vector<VectorMap> generation;
    for (int j = 0; j < kernel.cols(); ++j)
        generation.push_back(smooth_kernel_field(dist, kernel.col(j)));
    std::vector<VectorMap> all = generation;

    Mat values(n, 0);
    auto collect = [&](const std::vector<VectorMap>& fields) {
        for (const auto& f : fields) {
            Vec v = f(q0);
            Mat col(n, 1);
            for (int i = 0; i < n; ++i) col(i, 0) = v[i];
            values = hstack(values, col);
        }
    };
    collect(generation);

    BracketResult res;
    res.achieved_rank = numerical_rank(values, 1e-8);
    for (int depth = 2; depth <= max_depth && res.achieved_rank < n; ++depth) {
        std::vector<VectorMap> next;
        for (const auto& base : generation)
            for (const auto& other : all) next.push_back(bracket_field(other, base, eng));
        collect(next);
        res.achieved_rank = numerical_rank(values, 1e-8);
        generation = std::move(next);
        all.insert(all.end(), generation.begin(), generation.end());
    }
    res.bracket_generating = res.achieved_rank == n;
    return res;
}

double dgamma_plus_B_on_D_residual(const OneFormSection& gamma, const MagneticField& beta,
                                   const PfaffianDistribution& dist, const DerivativeEngine& eng,
                                   std::span<const double> q) {
    Mat pairing = exterior_derivative_matrix(gamma, eng, q);
    if (!beta.is_zero()) pairing = pairing + beta.pairing(q);
    Mat d = dist.kernel_basis(q);
    double worst = 0.0;
    for (int j = 0; j < d.cols(); ++j) {
        Vec pd = pairing.apply(d.col(j));
        for (int i = 0; i < d.cols(); ++i)
            worst = std::max(worst, std::abs(dot(d.col(i), pd)));
    }
    return worst;
}

Lemma63Result lemma63_gamma_check(const OneFormSection& gamma, const NonholonomicCmhSystem& nh,
                                  const std::vector<Vec>& sample_qs, double hyp_tol) {
    Lemma63Result res;
    const int n = nh.n();
    for (const Vec& q : sample_qs) {
        Vec zg = gamma.section_point(q);
        res.hypothesis_residual =
            std::max(res.hypothesis_residual, norm(nh.constraint_map()(zg)));
    }
    res.hypothesis_ok = res.hypothesis_residual <= hyp_tol;
    if (!res.hypothesis_ok) return res;
    for (const Vec& q : sample_qs) {
        Vec zg = gamma.section_point(q);
        Vec x = magnetic_vf(nh.sys, zg);
        Vec xq(x.begin(), x.begin() + n);
        Mat a = nh.dist.rows(q);
        res.max_residual = std::max(res.max_residual, norm(a.apply(xq)));
    }
    return res;
}

Lemma63Result lemma63_eps_check(const PhaseMap& eps, const NonholonomicCmhSystem& nh,
                                const std::vector<Vec>& sample_zs_on_M, double hyp_tol) {
    Lemma63Result res;
    const int n = nh.n();
    for (const Vec& z : sample_zs_on_M) {
        Vec ez = eps(z);
        res.hypothesis_residual = std::max(res.hypothesis_residual, norm(nh.constraint_map()(ez)));
    }
    res.hypothesis_ok = res.hypothesis_residual <= hyp_tol;
    if (!res.hypothesis_ok) return res;
    for (const Vec& z : sample_zs_on_M) {
        Vec ez = eps(z);
        Vec x = magnetic_vf(nh.sys, ez);
        Vec xq(x.begin(), x.begin() + n);
        Mat a = nh.dist.rows(std::span<const double>(ez.data(), n));
        res.max_residual = std::max(res.max_residual, norm(a.apply(xq)));
    }
    return res;
}

namespace {

double tangent_in_K_residual(const OneFormSection& gamma, const NonholonomicCmhSystem& nh,
                             const ConstraintFrame& frame, std::span<const double> q) {
    Mat j = nh.sys.engine.jacobian(gamma.gammabar, q);
    Mat d = nh.dist.kernel_basis(q);
    const int n = nh.n();
    double worst = 0.0;
    for (int c = 0; c < d.cols(); ++c) {
        Vec x = d.col(c);
        Vec jx = j.apply(x);
        Vec tg(2 * n);
        for (int i = 0; i < n; ++i) {
            tg[i] = x[i];
            tg[n + i] = jx[i];
        }
        worst = std::max(worst, projection_residual(frame.basis_K, tg));
    }
    return worst;
}

}  // namespace

DistHj1Result hj1_dist_residual(const OneFormSection& gamma, const NonholonomicCmhSystem& nh,
                                std::span<const double> q, double hyp_tol) {
    const int n = nh.n();
    DistHj1Result res;
    Vec zg = gamma.section_point(q);
    res.image_residual = norm(nh.constraint_map()(zg));
    ConstraintFrame frame = frame_at(nh, zg);
    res.tangent_residual = tangent_in_K_residual(gamma, nh, frame, q);
    res.hypotheses_ok = res.image_residual <= hyp_tol && res.tangent_residual <= hyp_tol;

    Vec xt = distributional_cmh_vf(nh, frame);
    Vec xq(xt.begin(), xt.begin() + n);
    Mat j = nh.sys.engine.jacobian(gamma.gammabar, q);
    Vec lhs(2 * n);
    Vec jp = j.apply(xq);
    for (int i = 0; i < n; ++i) {
        lhs[i] = xq[i];
        lhs[n + i] = jp[i];
    }
    res.residual = sub(lhs, distributional_vf(nh, frame));
    return res;
}

DistHj2Result hj2_dist_residuals(const OneFormSection& gamma, const PhaseMap& eps,
                                 const NonholonomicCmhSystem& nh, std::span<const double> z,
                                 double hyp_tol) {
    const int n = nh.n();
    DistHj2Result res;
    Vec ez = eps(z);
    res.eps_membership_residual = norm(nh.constraint_map()(ez));
    std::span<const double> eq(ez.data(), n);
    ConstraintFrame frame = frame_at(nh, ez);
    res.tangent_residual = tangent_in_K_residual(gamma, nh, frame, eq);
    res.hypotheses_ok =
        res.eps_membership_residual <= hyp_tol && res.tangent_residual <= hyp_tol;

    Vec xt = distributional_cmh_vf(nh, frame);
    Vec xq(xt.begin(), xt.begin() + n);
    Mat j = nh.sys.engine.jacobian(gamma.gammabar, eq);
    Vec t_lambda_xt(2 * n);
    Vec jp = j.apply(xq);
    for (int i = 0; i < n; ++i) {
        t_lambda_xt[i] = xq[i];
        t_lambda_xt[n + i] = jp[i];
    }
    res.r1 = sub(t_lambda_xt, distributional_vf(nh, frame));

    ScalarField h_eps = nh.sys.H.compose(eps);
    Vec x_he = magnetic_vf(h_eps, nh.sys.beta, nh.sys.engine, z);
    Mat teps = nh.sys.engine.jacobian(eps, z);
    Vec pushed = frame.project(teps.apply(x_he));
    res.r2 = sub(pushed, t_lambda_xt);
    return res;
}

Trajectory integrate_constrained(const NonholonomicCmhSystem& nh, std::span<const double> z0,
                                 double dt, int steps, IntegrationMethod method) {
    Vec start = project_to_M(nh, z0);
    int step_index = 0;
    FieldFn field = [&nh, &step_index](std::span<const double> z) {
        ConstraintFrame frame = frame_at(nh, z);
        if (!frame.compatible)
            throw DegeneracyError("integrate_constrained: incompatible frame at step " +
                                  std::to_string(step_index));
        return distributional_cmh_vf(nh, frame);
    };
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(start);
    Vec z = start;
    for (step_index = 1; step_index <= steps; ++step_index) {
        if (method == IntegrationMethod::rk4) {
            z = rk4_step<double>([&field](std::span<const double> w) { return field(w); }, z, dt);
        } else {
            Vec f = field(z);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] += dt * f[i];
        }
        z = project_to_M(nh, z);
        if (!all_finite(z))
            throw NumericError("integrate_constrained: non-finite state at step " +
                               std::to_string(step_index));
        traj.times.push_back(dt * step_index);
        traj.states.push_back(z);
    }
    return traj;
}

VectorMap make_constrained_flow_map(const NonholonomicCmhSystem& nh, double time, int substeps) {
    const int dim = 2 * nh.n();
    return VectorMap(dim, dim, [nh, time, substeps](auto z0) {
        using T = std::decay_t<decltype(z0[0])>;
        std::vector<T> z = project_to_M_t<T>(nh, z0);
        double h = time / substeps;
        auto field = [&nh](std::span<const T> w) { return multiplier_field_t<T>(nh, w); };
        for (int s = 0; s < substeps; ++s) {
            z = rk4_step<T>(field, z, h);
            z = project_to_M_t<T>(nh, z);
        }
        return z;
    });
}

VectorMap make_translation_map(int n, const Vec& shift) {
    if (static_cast<int>(shift.size()) != n)
        throw ContractError("make_translation_map: shift must have length n");
    return VectorMap(2 * n, 2 * n, [n, shift](auto z) {
        using T = std::decay_t<decltype(z[0])>;
        std::vector<T> out(z.begin(), z.end());
        for (int i = 0; i < n; ++i) out[i] = out[i] + T(shift[i]);
        return out;
    });
}

}  // namespace magnomech
