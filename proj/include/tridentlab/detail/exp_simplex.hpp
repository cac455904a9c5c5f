#pragma once

// Exact integrals of e^{-z} over triangles on which z is linear, written
// generically so the same code yields values (double) and exact first and
// second derivatives (Jet<N>).

#include <algorithm>
#include <cmath>
#include <utility>

#include "jet.hpp"

namespace tridentlab::detail {

/**
 * I_k(m) = \int_0^1 s^k e^{s m} ds for k = 0..kmax and m <= 0.
 * Upward recursion m I_k = e^m - k I_{k-1} is stable while k <= |m|, the
 * downward one I_{k-1} = (e^m - m I_k)/k while k > |m|; each index range
 * uses the stable direction.
 */
inline void exp_moments(double m, int kmax, double* out)
{
    if (m == 0.0) {
        for (int k = 0; k <= kmax; ++k)
            out[k] = 1.0 / (k + 1);
        return;
    }
    const double em = std::exp(m);
    const double am = std::abs(m);
    int split = std::min(kmax, static_cast<int>(am)); // upward for k <= split
    if (am < 1.0)
        split = -1;
    if (split >= 0) {
        out[0] = std::expm1(m) / m;
        for (int k = 1; k <= split; ++k)
            out[k] = (em - k * out[k - 1]) / m;
    }
    if (split < kmax) {
        const int top = kmax + 60;
        double ik = em / (top + 1 - m);
        for (int k = top; k > split + 1; --k) {
            ik = (em - m * ik) / k; // now I_{k-1}
            if (k - 1 <= kmax)
                out[k - 1] = ik;
        }
    }
}

/// A scalar function given its value and first two derivatives at m.
inline double lift(double, double f, double, double) { return f; }
template <int N>
Jet<N> lift(const Jet<N>& m, double f, double f1, double f2)
{
    return chain(m, f, f1, f2);
}

inline double exp_of(double x) { return std::exp(x); }
template <int N>
Jet<N> exp_of(const Jet<N>& x) { return exp(x); }

inline double sqrt_of(double x) { return std::sqrt(x); }
template <int N>
Jet<N> sqrt_of(const Jet<N>& x) { return sqrt(x); }

/**
 * Second divided difference of exp at (t1,t2,t3), i.e. the integral of
 * e^{l1 t1 + l2 t2 + l3 t3} over the standard simplex.  After shifting by the
 * largest point, close point pairs use the even Taylor series in the half
 * gap d around their midpoint m:  sum_n I_{2n+1}(m) d^{2n} / (2n+1)!.
 */
template <class T>
T exp_divided_difference(T t1, T t2, T t3)
{
    if (value_of(t2) > value_of(t1))
        std::swap(t1, t2);
    if (value_of(t3) > value_of(t1))
        std::swap(t1, t3);
    if (value_of(t3) > value_of(t2))
        std::swap(t2, t3);
    const T p = t2 - t1; // <= 0
    const T q = t3 - t1; // <= p
    T g;
    if (value_of(p) - value_of(q) >= 1.0) {
        double iq[3], ip[3];
        exp_moments(value_of(q), 2, iq);
        exp_moments(value_of(p), 2, ip);
        g = (lift(q, iq[0], iq[1], iq[2]) - lift(p, ip[0], ip[1], ip[2])) / (q - p);
    } else {
        const T m = 0.5 * (p + q);
        const T d = 0.5 * (p - q);
        const T d2 = d * d;
        // Horner over n = 8..0 with 1/(2n+1)! folded in
        constexpr int terms = 9;
        double fact[terms];
        double f = 1.0;
        for (int n = 0; n < terms; ++n) {
            fact[n] = 1.0 / f;
            f *= (2.0 * n + 2.0) * (2.0 * n + 3.0);
        }
        // I_k' = I_{k+1}, so the moments up to 2*terms+1 carry all derivatives
        double mom[2 * terms + 2];
        exp_moments(value_of(m), 2 * terms + 1, mom);
        auto odd = [&](int n) { return lift(m, mom[2 * n + 1], mom[2 * n + 2], mom[2 * n + 3]); };
        g = odd(terms - 1) * fact[terms - 1];
        for (int n = terms - 2; n >= 0; --n)
            g = g * d2 + odd(n) * fact[n];
    }
    return exp_of(t1) * g;
}

/// \int_T e^{-z} dS over the planar triangle with vertices (x_k, y_k, z_k).
template <class T>
T triangle_weighted_area(double xa, double ya, const T& za, double xb, double yb, const T& zb, double xc,
                         double yc, const T& zc)
{
    const double det = (xb - xa) * (yc - ya) - (xc - xa) * (yb - ya);
    const T dzb = zb - za;
    const T dzc = zc - za;
    const T gx = (dzb * (yc - ya) - dzc * (yb - ya)) * (1.0 / det);
    const T gy = (dzc * (xb - xa) - dzb * (xc - xa)) * (1.0 / det);
    const T stretch = sqrt_of(gx * gx + gy * gy + 1.0);
    return stretch * std::abs(det) * exp_divided_difference(-1.0 * za, -1.0 * zb, -1.0 * zc);
}

/**
 * Weighted area of one grid cell of size hx x hy split into four triangles
 * through its center, the center height being the mean of the corners.
 * The split is invariant under both coordinate reflections of the cell.
 */
template <class T>
T cell_weighted_area(const T& z00, const T& z10, const T& z01, const T& z11, double hx, double hy)
{
    const T zc = (z00 + z10 + z01 + z11) * 0.25;
    const double cx = 0.5 * hx;
    const double cy = 0.5 * hy;
    return triangle_weighted_area(0.0, 0.0, z00, hx, 0.0, z10, cx, cy, zc) +
           triangle_weighted_area(hx, 0.0, z10, hx, hy, z11, cx, cy, zc) +
           triangle_weighted_area(hx, hy, z11, 0.0, hy, z01, cx, cy, zc) +
           triangle_weighted_area(0.0, hy, z01, 0.0, 0.0, z00, cx, cy, zc);
}

} // namespace tridentlab::detail
