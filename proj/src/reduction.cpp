#include "magnomech/reduction.hpp"

namespace magnomech {

TranslationSymmetry::TranslationSymmetry(int n_, std::vector<int> cyclic_)
    : n(n_), cyclic(std::move(cyclic_)) {
    for (std::size_t i = 0; i < cyclic.size(); ++i) {
        if (cyclic[i] < 0 || cyclic[i] >= n)
            throw ContractError("TranslationSymmetry: cyclic index out of range");
        if (i > 0 && cyclic[i] <= cyclic[i - 1])
            throw ContractError("TranslationSymmetry: cyclic indices must be increasing");
    }
}

bool TranslationSymmetry::is_cyclic(int i) const {
    for (int c : cyclic)
        if (c == i) return true;
    return false;
}

Mat TranslationSymmetry::drop_matrix() const {
    Mat d(reduced_dim(), 2 * n);
    int row = 0;
    for (int i = 0; i < n; ++i)
        if (!is_cyclic(i)) d(row++, i) = 1.0;
    for (int i = 0; i < n; ++i) d(row++, n + i) = 1.0;
    return d;
}

Vec TranslationSymmetry::reduce_point(std::span<const double> z) const {
    Vec out;
    out.reserve(reduced_dim());
    for (int i = 0; i < n; ++i)
        if (!is_cyclic(i)) out.push_back(z[i]);
    for (int i = 0; i < n; ++i) out.push_back(z[n + i]);
    return out;
}

Vec TranslationSymmetry::lift_point(std::span<const double> zbar) const {
    return lift_point_t<double>(zbar);
}

Vec TranslationSymmetry::shifted(std::span<const double> z, std::span<const double> c) const {
    Vec out(z.begin(), z.end());
    for (int i = 0; i < s(); ++i) out[cyclic[i]] += c[i];
    return out;
}

namespace {

double vec_change(const Vec& a, const Vec& b) { return max_abs(sub(a, b)); }

}  // namespace

double invariance_residual(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                           const std::vector<Vec>& sample_zs, const std::vector<Vec>& shifts) {
    const int n = nh.n();
    double worst = 0.0;
    for (const Vec& z : sample_zs) {
        std::span<const double> q(z.data(), n);
        double h0 = nh.sys.H(std::span<const double>(z));
        Vec beta0 = nh.sys.beta.entries()(q);
        Vec rows0 = nh.dist.k > 0 ? nh.dist.rows_map(q) : Vec{};
        Vec mass0 = nh.lagrangian.mass(q);
        Vec force0 = nh.sys.force ? nh.sys.force->f(std::span<const double>(z)) : Vec{};
        Vec ctrl0 = nh.sys.control ? nh.sys.control->f(std::span<const double>(z)) : Vec{};
        for (const Vec& c : shifts) {
            Vec zs = sym.shifted(z, c);
            std::span<const double> qs(zs.data(), n);
            worst = std::max(worst, std::abs(nh.sys.H(std::span<const double>(zs)) - h0));
            worst = std::max(worst, vec_change(nh.sys.beta.entries()(qs), beta0));
            if (nh.dist.k > 0) worst = std::max(worst, vec_change(nh.dist.rows_map(qs), rows0));
            worst = std::max(worst, vec_change(nh.lagrangian.mass(qs), mass0));
            if (nh.sys.force)
                worst = std::max(worst, vec_change(nh.sys.force->f(std::span<const double>(zs)), force0));
            if (nh.sys.control)
                worst = std::max(worst, vec_change(nh.sys.control->f(std::span<const double>(zs)), ctrl0));
        }
    }
    return worst;
}

double map_invariance_residual(const VectorMap& phase_map, const TranslationSymmetry& sym,
                               const std::vector<Vec>& sample_zs, const std::vector<Vec>& shifts) {
    double worst = 0.0;
    for (const Vec& z : sample_zs) {
        Vec base = phase_map(z);
        for (const Vec& c : shifts) {
            Vec zs = sym.shifted(z, c);
            Vec moved = phase_map(zs);
            // equivariance: eps(z + c) = eps(z) + c on the cyclic block
            Vec expected = sym.shifted(base, c);
            worst = std::max(worst, vec_change(moved, expected));
        }
    }
    return worst;
}

double one_form_invariance_residual(const OneFormSection& gamma, const TranslationSymmetry& sym,
                                    const std::vector<Vec>& sample_zs,
                                    const std::vector<Vec>& shifts) {
    const int n = gamma.n;
    double worst = 0.0;
    for (const Vec& z : sample_zs) {
        Vec q(z.begin(), z.begin() + n);
        Vec base = gamma.gammabar(q);
        for (const Vec& c : shifts) {
            Vec qz = q;
            for (int i = 0; i < sym.s(); ++i) qz[sym.cyclic[i]] += c[i];
            worst = std::max(worst, vec_change(gamma.gammabar(qz), base));
        }
    }
    return worst;
}

ReducedFrame reduced_frame_at(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                              std::span<const double> z, bool magnetic) {
    const int n = nh.n();
    ReducedFrame rf;
    rf.z.assign(z.begin(), z.end());
    rf.zbar = sym.reduce_point(z);
    rf.full = frame_at(nh, z, magnetic);
    if (!rf.full.compatible)
        throw DegeneracyError("reduced_frame_at: underlying frame incompatible");

    Mat v(2 * n, sym.s());
    for (int j = 0; j < sym.s(); ++j) v(sym.cyclic[j], j) = 1.0;
    rf.basis_V = v;
    rf.basis_VK = subspace_intersect(v, rf.full.basis_K);

    // U = { u in K : omega^B(u, v) = 0 for v in V cap K }.
    if (rf.basis_VK.cols() == 0) {
        rf.basis_U = rf.full.basis_K;
    } else {
        Mat cond = rf.basis_VK.transposed() * rf.full.s * rf.full.basis_K;
        Mat y = null_space(cond);
        rf.basis_U = orth(rf.full.basis_K * y);
    }

    Mat d = sym.drop_matrix();
    Mat dropped_u = d * rf.basis_U;
    rf.basis_Kbar = orth(dropped_u);

    // Minimal-norm U-coordinates lifting each reduced basis vector.
    Svd du = svd(dropped_u);
    double smax = du.sigma.empty() ? 0.0 : du.sigma[0];
    rf.lift_of_Kbar = Mat(2 * n, rf.basis_Kbar.cols());
    for (int j = 0; j < rf.basis_Kbar.cols(); ++j) {
        Vec k = rf.basis_Kbar.col(j);
        Vec y(dropped_u.cols(), 0.0);
        for (int r = 0; r < du.u.cols(); ++r) {
            if (du.sigma[r] <= 1e-12 * smax) continue;
            double coef = dot(du.u.col(r), k) / du.sigma[r];
            for (int i = 0; i < dropped_u.cols(); ++i) y[i] += coef * du.v(i, r);
        }
        Vec lift(2 * n, 0.0);
        for (int i = 0; i < 2 * n; ++i)
            for (int c = 0; c < rf.basis_U.cols(); ++c) lift[i] += rf.basis_U(i, c) * y[c];
        for (int i = 0; i < 2 * n; ++i) rf.lift_of_Kbar(i, j) = lift[i];
    }

    // gram(i, j) = omega(l_i, l_j) = l_i' S l_j
    const int dk = rf.basis_Kbar.cols();
    rf.gram_Kbar = Mat(dk, dk);
    for (int j = 0; j < dk; ++j) {
        Vec slj = rf.full.s.apply(rf.lift_of_Kbar.col(j));
        for (int i = 0; i < dk; ++i) rf.gram_Kbar(i, j) = dot(rf.lift_of_Kbar.col(i), slj);
    }

    rf.reduced_compatible = dk == 0 || numerical_rank(rf.gram_Kbar) == dk;

    // tau_Kbar: project onto Kbar along the dropped image of K^perp, with a
    // Euclidean completion when that complement does not fill the rest.
    const int rd = sym.reduced_dim();
    Mat comp = orth(d * rf.full.basis_Kperp);
    Mat filtered(rd, 0);
    for (int j = 0; j < comp.cols(); ++j) {
        Vec c = comp.col(j);
        if (projection_residual(rf.basis_Kbar, c) > 1e-6) {
            Mat col(rd, 1);
            for (int i = 0; i < rd; ++i) col(i, 0) = c[i];
            filtered = hstack(filtered, col);
        }
    }
    Mat joint = hstack(rf.basis_Kbar, filtered);
    Mat completion = null_space(joint.transposed());
    joint = hstack(joint, completion);
    if (joint.cols() != rd || numerical_rank(joint) != rd)
        throw DegeneracyError("reduced_frame_at: cannot complete the reduced splitting");
    rf.tau_Kbar = Mat(rd, rd);
    for (int j = 0; j < rd; ++j) {
        Vec e(rd, 0.0);
        e[j] = 1.0;
        Vec coef = lu_solve(joint, std::move(e));
        for (int i = 0; i < rd; ++i) {
            double x = 0.0;
            for (int c = 0; c < dk; ++c) x += rf.basis_Kbar(i, c) * coef[c];
            rf.tau_Kbar(i, j) = x;
        }
    }
    return rf;
}

ScalarField reduced_hamiltonian(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym) {
    ScalarField h = nh.sys.H;
    TranslationSymmetry s = sym;
    return ScalarField(sym.reduced_dim(), [h, s](auto zbar) {
        using T = std::decay_t<decltype(zbar[0])>;
        auto z = s.lift_point_t<T>(zbar);
        return h.template operator()<T>(std::span<const T>(z));
    });
}

Vec reduced_distributional_vf(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                              const ReducedFrame& rframe) {
    if (!rframe.reduced_compatible)
        throw DegeneracyError("reduced_distributional_vf: reduced Gram matrix singular");
    const int dk = rframe.basis_Kbar.cols();
    ScalarField h = reduced_hamiltonian(nh, sym);
    Vec grad = nh.sys.engine.gradient(h, rframe.zbar);
    Vec rhs(dk);
    for (int j = 0; j < dk; ++j) rhs[j] = dot(rframe.basis_Kbar.col(j), grad);
    // omega_bar(X, kbar_j) = dh(kbar_j): Gram' x = rhs, Gram skew.
    Mat gt = rframe.gram_Kbar.transposed();
    Vec x = lu_solve(gt, std::move(rhs));
    Vec out(sym.reduced_dim(), 0.0);
    for (int i = 0; i < sym.reduced_dim(); ++i)
        for (int j = 0; j < dk; ++j) out[i] += rframe.basis_Kbar(i, j) * x[j];
    return out;
}

namespace {

Vec reduced_projected_lifts(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                            const ReducedFrame& rframe) {
    Mat d = sym.drop_matrix();
    Vec total(sym.reduced_dim(), 0.0);
    auto base = [&nh](std::span<const double> w) {
        return magnetic_vf_t<double>(nh.sys.H, nh.sys.beta, nh.sys.engine, w);
    };
    for (const auto& fm : {std::cref(nh.sys.force), std::cref(nh.sys.control)}) {
        if (!fm.get().has_value()) continue;
        Vec lift = vertical_lift_t<double>(*fm.get(), nh.sys.engine, base, rframe.z);
        Vec projected = rframe.full.project(lift);
        total = add(total, rframe.tau_Kbar.apply(d.apply(projected)));
    }
    return total;
}

}  // namespace

Vec reduced_cmh_vf(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                   const ReducedFrame& rframe) {
    return add(reduced_distributional_vf(nh, sym, rframe),
               reduced_projected_lifts(nh, sym, rframe));
}

double relatedness_residual(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                            std::span<const double> z, RelatednessKind kind) {
    ReducedFrame rf = reduced_frame_at(nh, sym, z);
    Mat d = sym.drop_matrix();
    if (kind == RelatednessKind::plain) {
        Vec reduced = reduced_distributional_vf(nh, sym, rf);
        Vec full = distributional_vf(nh, rf.full);
        return norm(sub(reduced, d.apply(full)));
    }
    Vec reduced = reduced_cmh_vf(nh, sym, rf);
    Vec full = distributional_cmh_vf(nh, rf.full);
    return norm(sub(reduced, d.apply(full)));
}

ReducedVanishing reduced_magnetic_vanishing_residual(const NonholonomicCmhSystem& nh,
                                                     const TranslationSymmetry& sym,
                                                     const ReducedFrame& rframe) {
    Mat d = sym.drop_matrix();
    Vec xb_red = reduced_distributional_vf(nh, sym, rframe);
    Vec x_can = canonical_vf(nh.sys, rframe.z);
    Vec x_kbar = rframe.tau_Kbar.apply(d.apply(rframe.full.project(x_can)));
    Vec x0_kbar = sub(xb_red, x_kbar);
    Vec lifts = reduced_projected_lifts(nh, sym, rframe);

    ReducedVanishing out;
    out.rbar = add(x0_kbar, lifts);
    Vec xhat = add(xb_red, lifts);
    out.identity_residual = norm(sub(xhat, add(x_kbar, out.rbar)));
    Vec r_k = dist_magnetic_vanishing_residual(nh, rframe.full);
    out.drop_consistency = norm(sub(out.rbar, rframe.tau_Kbar.apply(d.apply(r_k))));
    return out;
}

double lift_independence_residual(const NonholonomicCmhSystem& nh, const TranslationSymmetry& sym,
                                  const ReducedFrame& rframe, Rng& rng) {
    (void)nh;
    (void)sym;
    const int dk = rframe.basis_Kbar.cols();
    if (dk == 0 || rframe.basis_VK.cols() == 0) return 0.0;
    double worst = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
        // Offset each lift by a random V cap K component; the pairing may not move.
        Mat lifted = rframe.lift_of_Kbar;
        for (int j = 0; j < dk; ++j)
            for (int c = 0; c < rframe.basis_VK.cols(); ++c) {
                double w = rng.uniform(-1.0, 1.0);
                for (int i = 0; i < lifted.rows(); ++i) lifted(i, j) += w * rframe.basis_VK(i, c);
            }
        for (int j = 0; j < dk; ++j) {
            Vec slj = rframe.full.s.apply(lifted.col(j));
            for (int i = 0; i < dk; ++i)
                worst = std::max(worst,
                                 std::abs(dot(lifted.col(i), slj) - rframe.gram_Kbar(i, j)));
        }
    }
    return worst;
}

ReducedHj1Result reduced_hj1_residual(const OneFormSection& gamma,
                                      const NonholonomicCmhSystem& nh,
                                      const TranslationSymmetry& sym, std::span<const double> q,
                                      double hyp_tol) {
    const int n = nh.n();
    ReducedHj1Result res;
    Vec zg = gamma.section_point(q);
    res.image_residual = norm(nh.constraint_map()(zg));

    std::vector<Vec> zsamples{zg};
    std::vector<Vec> shifts;
    for (int j = 0; j < sym.s(); ++j) {
        Vec c(sym.s(), 0.0);
        c[j] = 0.7;
        shifts.push_back(c);
    }
    res.invariance_residual = one_form_invariance_residual(gamma, sym, zsamples, shifts);

    DistHj1Result unreduced = hj1_dist_residual(gamma, nh, q, hyp_tol);
    res.tangent_residual = unreduced.tangent_residual;
    res.hypotheses_ok = res.image_residual <= hyp_tol && res.invariance_residual <= hyp_tol &&
                        res.tangent_residual <= hyp_tol;

    ReducedFrame rf = reduced_frame_at(nh, sym, zg);
    ConstraintFrame frame = rf.full;
    Vec xt = distributional_cmh_vf(nh, frame);
    Vec xq(xt.begin(), xt.begin() + n);
    Mat j = nh.sys.engine.jacobian(gamma.gammabar, q);
    Vec jp = j.apply(xq);
    Vec tgamma(2 * n);
    for (int i = 0; i < n; ++i) {
        tgamma[i] = xq[i];
        tgamma[n + i] = jp[i];
    }
    Mat d = sym.drop_matrix();
    Vec lhs = d.apply(tgamma);  // T(gammabar_red) . X~^gamma
    Vec rhs = reduced_distributional_vf(nh, sym, rf);
    res.residual = sub(lhs, rhs);
    return res;
}

ReducedHj2Result reduced_hj2_residuals(const OneFormSection& gamma, const PhaseMap& eps,
                                       const NonholonomicCmhSystem& nh,
                                       const TranslationSymmetry& sym, std::span<const double> z,
                                       double hyp_tol) {
    const int n = nh.n();
    ReducedHj2Result res;
    Vec ez = eps(z);
    res.eps_membership_residual = norm(nh.constraint_map()(ez));
    std::vector<Vec> shifts;
    for (int j = 0; j < sym.s(); ++j) {
        Vec c(sym.s(), 0.0);
        c[j] = 0.4;
        shifts.push_back(c);
    }
    std::vector<Vec> zs{Vec(z.begin(), z.end())};
    res.eps_invariance_residual = map_invariance_residual(eps, sym, zs, shifts);
    res.hypotheses_ok =
        res.eps_membership_residual <= hyp_tol && res.eps_invariance_residual <= 1e-6;

    std::span<const double> eq(ez.data(), n);
    ReducedFrame rf = reduced_frame_at(nh, sym, ez);
    Mat d = sym.drop_matrix();

    Vec xt = distributional_cmh_vf(nh, rf.full);
    Vec xq(xt.begin(), xt.begin() + n);
    Mat j = nh.sys.engine.jacobian(gamma.gammabar, eq);
    Vec jp = j.apply(xq);
    Vec t_lambda_xt(2 * n);
    for (int i = 0; i < n; ++i) {
        t_lambda_xt[i] = xq[i];
        t_lambda_xt[n + i] = jp[i];
    }
    Vec t_lambda_bar = d.apply(t_lambda_xt);

    res.r1 = sub(t_lambda_bar, reduced_distributional_vf(nh, sym, rf));

    // Composite Hamiltonian hbar . epsbar on the full phase space; by
    // invariance it equals H . eps, but it is built through the quotient.
    ScalarField h_red = reduced_hamiltonian(nh, sym);
    TranslationSymmetry symc = sym;
    PhaseMap eps_copy = eps;
    ScalarField h_comp(2 * n, [h_red, symc, eps_copy](auto zz) {
        using T = std::decay_t<decltype(zz[0])>;
        auto im = eps_copy.template operator()<T>(zz);
        std::vector<T> red;
        red.reserve(symc.reduced_dim());
        for (int i = 0; i < symc.n; ++i)
            if (!symc.is_cyclic(i)) red.push_back(im[i]);
        for (int i = 0; i < symc.n; ++i) red.push_back(im[symc.n + i]);
        return h_red.template operator()<T>(std::span<const T>(red));
    });
    Vec x_hc = magnetic_vf(h_comp, nh.sys.beta, nh.sys.engine, z);
    Mat teps = nh.sys.engine.jacobian(eps, z);
    Vec pushed_bar = rf.tau_Kbar.apply(d.apply(teps.apply(x_hc)));
    res.r2 = sub(pushed_bar, rf.tau_Kbar.apply(t_lambda_bar));
    return res;
}

CorrespondenceReport hj2_reduction_correspondence(const OneFormSection& gamma,
                                                  const PhaseMap& eps,
                                                  const NonholonomicCmhSystem& nh,
                                                  const TranslationSymmetry& sym,
                                                  const std::vector<Vec>& samples, double tol) {
    CorrespondenceReport rep;
    for (const Vec& z : samples) {
        DistHj2Result full = hj2_dist_residuals(gamma, eps, nh, z);
        ReducedHj2Result red = reduced_hj2_residuals(gamma, eps, nh, sym, z);
        bool pass_full = max_abs(full.r1) <= tol;
        bool pass_red = max_abs(red.r1) <= tol;
        rep.max_unreduced = std::max(rep.max_unreduced, max_abs(full.r1));
        rep.max_reduced = std::max(rep.max_reduced, max_abs(red.r1));
        ++rep.samples;
        if (pass_full == pass_red) ++rep.agreements;
    }
    return rep;
}

}  // namespace magnomech
