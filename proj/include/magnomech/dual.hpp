#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace magnomech {

// Forward-mode dual number with a runtime vector of partials. Nesting
// Dual<Dual<double>> gives exact second derivatives, and so on. A value
// constructed from a plain constant carries an empty partial vector, which
// every operation treats as "all zeros of whatever width".
template <class T>
struct Dual {
    T v{};
    std::vector<T> d;

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT: implicit, constants promote like scalars
    Dual(T val, std::vector<T> der) : v(std::move(val)), d(std::move(der)) {}

    Dual& operator+=(const Dual& o) { *this = *this + o; return *this; }
    Dual& operator-=(const Dual& o) { *this = *this - o; return *this; }
    Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
    Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

    friend Dual operator+(const Dual& a, const Dual& b) {
        Dual r;
        r.v = a.v + b.v;
        std::size_t m = std::max(a.d.size(), b.d.size());
        r.d.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (i < a.d.size() && i < b.d.size()) r.d[i] = a.d[i] + b.d[i];
            else if (i < a.d.size()) r.d[i] = a.d[i];
            else r.d[i] = b.d[i];
        }
        return r;
    }

    friend Dual operator-(const Dual& a, const Dual& b) {
        Dual r;
        r.v = a.v - b.v;
        std::size_t m = std::max(a.d.size(), b.d.size());
        r.d.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (i < a.d.size() && i < b.d.size()) r.d[i] = a.d[i] - b.d[i];
            else if (i < a.d.size()) r.d[i] = a.d[i];
            else r.d[i] = T(0.0) - b.d[i];
        }
        return r;
    }

    friend Dual operator-(const Dual& a) {
        Dual r;
        r.v = T(0.0) - a.v;
        r.d.resize(a.d.size());
        for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = T(0.0) - a.d[i];
        return r;
    }

    friend Dual operator*(const Dual& a, const Dual& b) {
        Dual r;
        r.v = a.v * b.v;
        std::size_t m = std::max(a.d.size(), b.d.size());
        r.d.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            T t(0.0);
            if (i < a.d.size()) t = t + a.d[i] * b.v;
            if (i < b.d.size()) t = t + a.v * b.d[i];
            r.d[i] = t;
        }
        return r;
    }

    friend Dual operator/(const Dual& a, const Dual& b) {
        Dual r;
        r.v = a.v / b.v;
        T inv2 = T(1.0) / (b.v * b.v);
        std::size_t m = std::max(a.d.size(), b.d.size());
        r.d.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            T num(0.0);
            if (i < a.d.size()) num = num + a.d[i] * b.v;
            if (i < b.d.size()) num = num - a.v * b.d[i];
            r.d[i] = num * inv2;
        }
        return r;
    }
};

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) { return primal(x.v); }

// |primal| for pivot selection inside generic linear solves.
template <class T>
double pivot_abs(const T& x) { return std::abs(primal(x)); }

inline bool is_finite(double x) { return std::isfinite(x); }
template <class T>
bool is_finite(const Dual<T>& x) {
    if (!is_finite(x.v)) return false;
    for (const auto& p : x.d)
        if (!is_finite(p)) return false;
    return true;
}

// Chain rule helper: given f(v) and f'(v), propagate the partials of x.
template <class T>
Dual<T> chain(const Dual<T>& x, T fv, const T& dfv) {
    Dual<T> r;
    r.v = std::move(fv);
    r.d.resize(x.d.size());
    for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i] = dfv * x.d[i];
    return r;
}

using std::cos;
using std::exp;
using std::pow;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> sin(const Dual<T>& x) { return chain(x, sin(x.v), cos(x.v)); }

template <class T>
Dual<T> cos(const Dual<T>& x) { return chain(x, cos(x.v), T(0.0) - sin(x.v)); }

template <class T>
Dual<T> exp(const Dual<T>& x) {
    T e = exp(x.v);
    return chain(x, e, e);
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
    T s = sqrt(x.v);
    return chain(x, s, T(0.5) / s);
}

// x^c for a constant exponent; the only power form the expression language
// admits, so no log is needed.
template <class T>
Dual<T> pow(const Dual<T>& x, double c) {
    if (c == 0.0) return Dual<T>(1.0);
    if (c == 1.0) return x;
    T fv = pow(x.v, c);
    T dfv = pow(x.v, c - 1.0) * T(c);
    return chain(x, std::move(fv), dfv);
}

template <class T>
Dual<T> pow(const T& x, double c);  // no accidental cross-level calls

using D0 = double;
using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

template <class T>
struct dual_depth {
    static constexpr int value = 0;
};
template <class T>
struct dual_depth<Dual<T>> {
    static constexpr int value = dual_depth<T>::value + 1;
};

// Seed `x` as the i-th of m independent variables one dual level up.
template <class T>
Dual<T> seed(const T& x, std::size_t i, std::size_t m) {
    Dual<T> r;
    r.v = x;
    r.d.assign(m, T(0.0));
    r.d[i] = T(1.0);
    return r;
}

}  // namespace magnomech
