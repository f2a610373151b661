#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "magnomech/dual.hpp"
#include "magnomech/errors.hpp"

namespace magnomech {

// Type-erased smooth map R^m -> R^k, evaluable at four scalar levels: plain
// doubles and three nested dual levels. Anything the toolkit may need to
// differentiate (Hamiltonians, one-form sections, fiber maps, flow maps,
// magnetic field entries) is carried this way, so composed objects stay
// differentiable to the depth the checks require.
class VectorMap {
public:
    template <class T>
    using Fn = std::function<std::vector<T>(std::span<const T>)>;

    VectorMap() = default;

    template <class F>
    VectorMap(int in_dim, int out_dim, F f)
        : impl_(std::make_shared<Impl>(Impl{
              in_dim, out_dim,
              [f](std::span<const D0> x) { return f(x); },
              [f](std::span<const D1> x) { return f(x); },
              [f](std::span<const D2> x) { return f(x); },
              [f](std::span<const D3> x) { return f(x); }})) {}

    static VectorMap from_channels(int in_dim, int out_dim, Fn<D0> f0, Fn<D1> f1, Fn<D2> f2,
                                   Fn<D3> f3) {
        VectorMap m;
        m.impl_ = std::make_shared<Impl>(
            Impl{in_dim, out_dim, std::move(f0), std::move(f1), std::move(f2), std::move(f3)});
        return m;
    }

    bool valid() const { return impl_ != nullptr; }
    int in_dim() const { return impl_->in; }
    int out_dim() const { return impl_->out; }

    template <class T>
    std::vector<T> operator()(std::span<const T> x) const {
        if (static_cast<int>(x.size()) != impl_->in)
            throw ContractError("VectorMap: input has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(impl_->in));
        if constexpr (std::is_same_v<T, D0>) return impl_->f0(x);
        else if constexpr (std::is_same_v<T, D1>) return impl_->f1(x);
        else if constexpr (std::is_same_v<T, D2>) return impl_->f2(x);
        else if constexpr (std::is_same_v<T, D3>) return impl_->f3(x);
        else static_assert(sizeof(T) == 0, "unsupported scalar level");
    }

    std::vector<double> operator()(std::span<const double> x) const { return (*this).operator()<D0>(x); }

    static VectorMap identity(int n) {
        return VectorMap(n, n, [](auto x) {
            using T = std::decay_t<decltype(x[0])>;
            return std::vector<T>(x.begin(), x.end());
        });
    }

    // g after f (this map applied to the output of inner).
    VectorMap compose(const VectorMap& inner) const {
        if (inner.out_dim() != in_dim())
            throw ContractError("VectorMap::compose: dimension mismatch");
        VectorMap outer = *this;
        return VectorMap(inner.in_dim(), out_dim(), [outer, inner](auto x) {
            using T = std::decay_t<decltype(x[0])>;
            auto mid = inner.operator()<T>(x);
            return outer.operator()<T>(std::span<const T>(mid));
        });
    }

private:
    struct Impl {
        int in = 0, out = 0;
        Fn<D0> f0;
        Fn<D1> f1;
        Fn<D2> f2;
        Fn<D3> f3;
    };
    std::shared_ptr<const Impl> impl_;
};

// Scalar-valued counterpart, R^m -> R.
class ScalarField {
public:
    ScalarField() = default;

    template <class F>
    ScalarField(int arity, F f)
        : map_(arity, 1, [f](auto x) {
              using T = std::decay_t<decltype(x[0])>;
              return std::vector<T>{f(x)};
          }) {}

    static ScalarField from_map(VectorMap m) {
        if (m.out_dim() != 1) throw ContractError("ScalarField: map must have one output");
        ScalarField s;
        s.map_ = std::move(m);
        return s;
    }

    bool valid() const { return map_.valid(); }
    int arity() const { return map_.in_dim(); }
    const VectorMap& as_map() const { return map_; }

    template <class T>
    T operator()(std::span<const T> x) const {
        return map_.operator()<T>(x)[0];
    }
    double operator()(std::span<const double> x) const { return (*this).operator()<D0>(x); }

    ScalarField compose(const VectorMap& inner) const {
        return from_map(map_.compose(inner));
    }

private:
    VectorMap map_;
};

}  // namespace magnomech
