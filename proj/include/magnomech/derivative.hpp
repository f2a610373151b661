#pragma once

#include <span>
#include <vector>

#include "magnomech/linalg.hpp"
#include "magnomech/smooth_fn.hpp"

namespace magnomech {

// Differentiation service. Forward-dual is the default and is exact to
// machine precision on the expression corpus; central differences are the
// fallback for opaque callables. The relative step is h = eps * (1 + |x_i|).
struct DerivativeEngine {
    enum class Mode { dual, fd };

    Mode mode = Mode::dual;
    double eps = 1e-6;

    static DerivativeEngine dual() { return {Mode::dual, 1e-6}; }
    static DerivativeEngine finite_difference(double eps = 1e-6) { return {Mode::fd, eps}; }

    Vec gradient(const ScalarField& f, std::span<const double> x) const;
    Mat jacobian(const VectorMap& g, std::span<const double> x) const;
    Mat hessian(const ScalarField& f, std::span<const double> x) const;
};

// Generic-scalar gradient, used inside maps that are themselves evaluated on
// duals (flow maps, derived magnetic fields). Dual mode climbs one level.
template <class T>
std::vector<T> gradient_t(const ScalarField& f, const DerivativeEngine& eng,
                          std::span<const T> x) {
    const std::size_t m = x.size();
    std::vector<T> g(m);
    if (eng.mode == DerivativeEngine::Mode::dual) {
        if constexpr (dual_depth<T>::value >= 3) {
            throw NumericError("gradient: dual derivative depth exhausted");
        } else {
            std::vector<Dual<T>> xs(m);
            for (std::size_t i = 0; i < m; ++i) xs[i] = seed(x[i], i, m);
            Dual<T> y = f.operator()<Dual<T>>(xs);
            for (std::size_t i = 0; i < m; ++i) g[i] = i < y.d.size() ? y.d[i] : T(0.0);
        }
    } else {
        std::vector<T> xp(x.begin(), x.end());
        for (std::size_t i = 0; i < m; ++i) {
            double h = eng.eps * (1.0 + std::abs(primal(x[i])));
            T keep = xp[i];
            xp[i] = keep + T(h);
            T fp = f.operator()<T>(xp);
            xp[i] = keep - T(h);
            T fm = f.operator()<T>(xp);
            xp[i] = keep;
            g[i] = (fp - fm) / T(2.0 * h);
        }
    }
    return g;
}

// Flattened (row-major, out x in) Jacobian of g as values of type T.
template <class T>
std::vector<T> jacobian_flat_t(const VectorMap& g, const DerivativeEngine& eng,
                               std::span<const T> x) {
    const std::size_t m = x.size();
    const std::size_t k = static_cast<std::size_t>(g.out_dim());
    std::vector<T> jac(k * m, T(0.0));
    if (eng.mode == DerivativeEngine::Mode::dual) {
        if constexpr (dual_depth<T>::value >= 3) {
            throw NumericError("jacobian: dual derivative depth exhausted");
        } else {
            std::vector<Dual<T>> xs(m);
            for (std::size_t i = 0; i < m; ++i) xs[i] = seed(x[i], i, m);
            auto y = g.operator()<Dual<T>>(xs);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < m; ++c)
                    jac[r * m + c] = c < y[r].d.size() ? y[r].d[c] : T(0.0);
        }
    } else {
        std::vector<T> xp(x.begin(), x.end());
        for (std::size_t c = 0; c < m; ++c) {
            double h = eng.eps * (1.0 + std::abs(primal(x[c])));
            T keep = xp[c];
            xp[c] = keep + T(h);
            auto fp = g.operator()<T>(xp);
            xp[c] = keep - T(h);
            auto fm = g.operator()<T>(xp);
            xp[c] = keep;
            for (std::size_t r = 0; r < k; ++r) jac[r * m + c] = (fp[r] - fm[r]) / T(2.0 * h);
        }
    }
    return jac;
}

template <class T>
MatT<T> jacobian_t(const VectorMap& g, const DerivativeEngine& eng, std::span<const T> x) {
    auto flat = jacobian_flat_t(g, eng, x);
    MatT<T> j(g.out_dim(), static_cast<int>(x.size()));
    for (int r = 0; r < j.rows(); ++r)
        for (int c = 0; c < j.cols(); ++c) j(r, c) = flat[static_cast<std::size_t>(r) * x.size() + c];
    return j;
}

// The Jacobian of g, packaged as a map of its own (outputs row-major). Its
// top dual level is sacrificed to the inner differentiation.
VectorMap jacobian_map(const VectorMap& g, const DerivativeEngine& eng);

}  // namespace magnomech
