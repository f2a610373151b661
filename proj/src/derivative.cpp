#include "magnomech/derivative.hpp"

namespace magnomech {

Vec DerivativeEngine::gradient(const ScalarField& f, std::span<const double> x) const {
    if (static_cast<int>(x.size()) != f.arity())
        throw ContractError("gradient: point has dimension " + std::to_string(x.size()) +
                            ", field arity is " + std::to_string(f.arity()));
    Vec g = gradient_t<double>(f, *this, x);
    if (!all_finite(g)) throw NumericError("gradient: non-finite result");
    return g;
}

Mat DerivativeEngine::jacobian(const VectorMap& g, std::span<const double> x) const {
    if (static_cast<int>(x.size()) != g.in_dim())
        throw ContractError("jacobian: point has dimension " + std::to_string(x.size()) +
                            ", map expects " + std::to_string(g.in_dim()));
    Mat j = jacobian_t<double>(g, *this, x);
    for (int i = 0; i < j.rows(); ++i)
        for (int k = 0; k < j.cols(); ++k)
            if (!std::isfinite(j(i, k))) throw NumericError("jacobian: non-finite result");
    return j;
}

Mat DerivativeEngine::hessian(const ScalarField& f, std::span<const double> x) const {
    const std::size_t m = x.size();
    Mat h(static_cast<int>(m), static_cast<int>(m));
    if (mode == Mode::dual) {
        std::vector<D2> xs(m);
        for (std::size_t i = 0; i < m; ++i) {
            D1 inner = seed(x[i], i, m);
            xs[i] = seed(inner, i, m);
        }
        D2 y = f.operator()<D2>(xs);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double v = 0.0;
                if (i < y.d.size() && j < y.d[i].d.size()) v = y.d[i].d[j];
                h(static_cast<int>(i), static_cast<int>(j)) = v;
            }
    } else {
        Vec xp(x.begin(), x.end());
        for (std::size_t i = 0; i < m; ++i) {
            double step = eps * (1.0 + std::abs(x[i]));
            double keep = xp[i];
            xp[i] = keep + step;
            Vec gp = gradient_t<double>(f, *this, xp);
            xp[i] = keep - step;
            Vec gm = gradient_t<double>(f, *this, xp);
            xp[i] = keep;
            for (std::size_t j = 0; j < m; ++j)
                h(static_cast<int>(i), static_cast<int>(j)) = (gp[j] - gm[j]) / (2.0 * step);
        }
    }
    return h;
}

VectorMap jacobian_map(const VectorMap& g, const DerivativeEngine& eng) {
    const int in = g.in_dim();
    const int out = g.out_dim() * g.in_dim();
    return VectorMap::from_channels(
        in, out,
        [g, eng](std::span<const D0> x) { return jacobian_flat_t<D0>(g, eng, x); },
        [g, eng](std::span<const D1> x) { return jacobian_flat_t<D1>(g, eng, x); },
        [g, eng](std::span<const D2> x) { return jacobian_flat_t<D2>(g, eng, x); },
        [g, eng](std::span<const D3> x) -> std::vector<D3> {
            if (eng.mode == DerivativeEngine::Mode::fd) return jacobian_flat_t<D3>(g, eng, x);
            throw NumericError("jacobian_map: dual derivative depth exhausted");
        });
}

}  // namespace magnomech
