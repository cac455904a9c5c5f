#pragma once

/**
 * @file area_energy.hpp
 * @brief Discrete translator-metric area of a graph, written in the variable
 *        v = e^{-u}, with exact gradient and Hessian.
 *
 * With v = e^{-u} the weight e^{-u} sqrt(1+|Du|^2) becomes sqrt(v^2 + |Dv|^2),
 * a norm of (v, Dv), so the area is a convex function of v.  The discrete
 * energy keeps that property: v is piecewise linear on the four-triangle
 * split of each cell and the integrand is sampled at edge midpoints.
 *
 * Critical points are discrete translators.  The continuum first variation
 * in v is R(u) / W^3 (W = sqrt(1+|Du|^2)), so the gradient divided by the cell
 * area approximates R/W^3 at each node.  A steep wall costs, per unit length,
 * the total variation of v across it, which is what the exact weighted area
 * of a vertical wall is; near-vertical boundary layers therefore stay coupled
 * to the rest of the graph instead of decoupling from it as they do in the
 * pointwise residual.
 */

#include <Eigen/SparseCore>

#include <cmath>
#include <vector>

#include "detail/exp_simplex.hpp"
#include "detail/jet.hpp"
#include "grid.hpp"
#include "translator.hpp"

namespace tridentlab {

namespace detail {

/// \int_T sqrt(v^2 + |Dv|^2) over a triangle with v linear, edge-midpoint rule.
template <class T>
T triangle_log_area(double xa, double ya, const T& va, double xb, double yb, const T& vb, double xc, double yc,
                    const T& vc)
{
    const double det = (xb - xa) * (yc - ya) - (xc - xa) * (yb - ya);
    const T dvb = vb - va;
    const T dvc = vc - va;
    const T gx = (dvb * (yc - ya) - dvc * (yb - ya)) * (1.0 / det);
    const T gy = (dvc * (xb - xa) - dvb * (xc - xa)) * (1.0 / det);
    const T g2 = gx * gx + gy * gy;
    const T mab = (va + vb) * 0.5;
    const T mbc = (vb + vc) * 0.5;
    const T mca = (vc + va) * 0.5;
    const double w = std::abs(det) / 6.0; // |T| / 3
    return (sqrt_of(mab * mab + g2) + sqrt_of(mbc * mbc + g2) + sqrt_of(mca * mca + g2)) * w;
}

template <class T>
T cell_log_area(const T& v00, const T& v10, const T& v01, const T& v11, double hx, double hy)
{
    const T vc = (v00 + v10 + v01 + v11) * 0.25;
    const double cx = 0.5 * hx;
    const double cy = 0.5 * hy;
    return triangle_log_area(0.0, 0.0, v00, hx, 0.0, v10, cx, cy, vc) +
           triangle_log_area(hx, 0.0, v10, hx, hy, v11, cx, cy, vc) +
           triangle_log_area(hx, hy, v11, 0.0, hy, v01, cx, cy, vc) +
           triangle_log_area(0.0, hy, v01, 0.0, 0.0, v00, cx, cy, vc);
}

} // namespace detail

/// Node values of v = e^{-u}.
inline std::vector<double> to_log_variable(const ScalarField& u)
{
    std::vector<double> v(u.values().size());
    auto uv = u.values();
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = std::exp(-uv[k]);
    return v;
}

struct AreaSystem {
    double energy = 0.0;
    Eigen::VectorXd gradient; ///< dE/dv over interior nodes, interior order
    SparseMatrix hessian;     ///< d2E/dv2 over interior nodes (empty unless requested)
};

/// Discrete energy of node values v (all nodes, flat grid order).
inline double log_area_energy(const Grid& g, const std::vector<double>& v)
{
    const int nx = g.nx();
    double e = 0.0;
    for (int j = 0; j < g.ny() - 1; ++j)
        for (int i = 0; i < nx; ++i) {
            const int i1 = (i + 1) % nx;
            e += detail::cell_log_area(v[g.index(i, j)], v[g.index(i1, j)], v[g.index(i, j + 1)],
                                       v[g.index(i1, j + 1)], g.hx(), g.hy());
        }
    return e;
}

inline AreaSystem assemble_area_system(const Grid& g, const std::vector<double>& v, bool with_hessian = true)
{
    using J = detail::Jet<4>;
    const int nx = g.nx();
    const int ny = g.ny();
    const auto n = static_cast<Eigen::Index>(g.interior_count());

    AreaSystem sys;
    sys.gradient = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    if (with_hessian)
        trip.reserve(static_cast<std::size_t>(16) * nx * (ny - 1));

    // interior unknown of node (i, j), or -1 on the boundary rows
    auto unknown = [&](int i, int j) -> Eigen::Index {
        if (j == 0 || j == ny - 1)
            return -1;
        return static_cast<Eigen::Index>(j - 1) * nx + i;
    };

    for (int j = 0; j < ny - 1; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int i1 = (i + 1) % nx;
            const Eigen::Index idx[4] = {unknown(i, j), unknown(i1, j), unknown(i, j + 1), unknown(i1, j + 1)};
            const J e = detail::cell_log_area(J::variable(v[g.index(i, j)], 0), J::variable(v[g.index(i1, j)], 1),
                                              J::variable(v[g.index(i, j + 1)], 2),
                                              J::variable(v[g.index(i1, j + 1)], 3), g.hx(), g.hy());
            sys.energy += e.v;
            for (int p = 0; p < 4; ++p) {
                if (idx[p] < 0)
                    continue;
                sys.gradient[idx[p]] += e.g[p];
                if (!with_hessian)
                    continue;
                for (int q = 0; q < 4; ++q)
                    if (idx[q] >= 0)
                        trip.emplace_back(idx[p], idx[q], e.h[p][q]);
            }
        }
    }
    if (with_hessian) {
        sys.hessian.resize(n, n);
        sys.hessian.setFromTriplets(trip.begin(), trip.end());
    }
    return sys;
}

inline AreaSystem assemble_area_system(const ScalarField& u, bool with_hessian = true)
{
    return assemble_area_system(u.grid(), to_log_variable(u), with_hessian);
}

/// dE/dv_k / (hx hy) over interior nodes; approximately R/W^3.
inline Eigen::VectorXd area_residual(const Grid& g, const Eigen::VectorXd& gradient)
{
    return gradient / (g.hx() * g.hy());
}

} // namespace tridentlab
