#pragma once

// Second-order forward-mode automatic differentiation in N variables.

#include <array>
#include <cmath>

namespace tridentlab::detail {

template <int N>
struct Jet {
    double v = 0.0;
    std::array<double, N> g{};
    std::array<std::array<double, N>, N> h{};

    Jet() = default;
    Jet(double value) : v(value) {} // NOLINT: constants promote implicitly

    static Jet variable(double value, int k)
    {
        Jet j(value);
        j.g[k] = 1.0;
        return j;
    }
};

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) { return x.v; }

/// f(x) given f, f', f'' at x.v
template <int N>
Jet<N> chain(const Jet<N>& x, double f, double f1, double f2)
{
    Jet<N> r(f);
    for (int i = 0; i < N; ++i)
        r.g[i] = f1 * x.g[i];
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k)
            r.h[i][k] = f1 * x.h[i][k] + f2 * x.g[i] * x.g[k];
    return r;
}

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b)
{
    Jet<N> r(a.v + b.v);
    for (int i = 0; i < N; ++i) {
        r.g[i] = a.g[i] + b.g[i];
        for (int k = 0; k < N; ++k)
            r.h[i][k] = a.h[i][k] + b.h[i][k];
    }
    return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b)
{
    Jet<N> r(a.v - b.v);
    for (int i = 0; i < N; ++i) {
        r.g[i] = a.g[i] - b.g[i];
        for (int k = 0; k < N; ++k)
            r.h[i][k] = a.h[i][k] - b.h[i][k];
    }
    return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a)
{
    return Jet<N>(0.0) - a;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b)
{
    Jet<N> r(a.v * b.v);
    for (int i = 0; i < N; ++i)
        r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k)
            r.h[i][k] = a.h[i][k] * b.v + a.v * b.h[i][k] + a.g[i] * b.g[k] + a.g[k] * b.g[i];
    return r;
}

template <int N>
Jet<N> operator*(double s, const Jet<N>& a)
{
    Jet<N> r(s * a.v);
    for (int i = 0; i < N; ++i) {
        r.g[i] = s * a.g[i];
        for (int k = 0; k < N; ++k)
            r.h[i][k] = s * a.h[i][k];
    }
    return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, double s)
{
    return s * a;
}

template <int N>
Jet<N> operator+(const Jet<N>& a, double s)
{
    Jet<N> r = a;
    r.v += s;
    return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b)
{
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
Jet<N> exp(const Jet<N>& x)
{
    const double e = std::exp(x.v);
    return chain(x, e, e, e);
}

template <int N>
Jet<N> sqrt(const Jet<N>& x)
{
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}

template <int N>
Jet<N> abs(const Jet<N>& x)
{
    return x.v < 0.0 ? -x : x;
}

} // namespace tridentlab::detail
